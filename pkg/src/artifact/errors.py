"""Exception types shared across the package."""


class ArtifactError(Exception):
    pass


class InvalidCutLevel(ArtifactError, ValueError):
    pass


class MinimalEnergyViolation(ArtifactError, ValueError):
    pass


class SpaceMismatch(ArtifactError, ValueError):
    pass


class DegreeError(ArtifactError, ValueError):
    pass


class CutRaiseError(ArtifactError, ValueError):
    pass


class PreconditionFailed(ArtifactError):
    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("precondition failed: " + "; ".join(map(str, self.failures)))


class PromotionObstructed(ArtifactError):
    """Raised when a linear obstruction equation has no solution.

    ``certificate`` is a linear functional that kills every achievable
    residual but not the one we needed to cancel.
    """

    def __init__(self, message, certificate=None, stage=None):
        self.certificate = certificate
        self.stage = stage
        super().__init__(message)


class IndexOutOfRange(ArtifactError, IndexError):
    pass


class InvalidPartition(ArtifactError, ValueError):
    pass


class Unsupported(ArtifactError, NotImplementedError):
    pass


class OutOfDomain(ArtifactError, ValueError):
    pass


class SchemaError(ArtifactError, ValueError):
    def __init__(self, pointer, message):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}")
