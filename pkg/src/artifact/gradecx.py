"""Finite graded cochain complexes over Q and an exact linear solver."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DegreeError, SpaceMismatch
from .novikov import rat

ZERO = Fraction(0)


@dataclass(frozen=True)
class GradedSpace:
    basis: tuple = ()

    def __post_init__(self):
        b = tuple((str(n), int(d)) for n, d in self.basis)
        names = [n for n, _ in b]
        if len(set(names)) != len(names):
            raise ValueError("basis names must be unique")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def degree(self, i: int) -> int:
        return self.basis[i][1]

    def index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.basis):
            if n == name:
                return i
        raise KeyError(name)

    def of_degree(self, d: int) -> list[int]:
        return [i for i, (_, dd) in enumerate(self.basis) if dd == d]

    def degrees(self) -> list[int]:
        return sorted({d for _, d in self.basis})


class GradedMap:
    """Sparse homogeneous linear map; ``entries[(j, i)]`` is target row j, source column i."""

    __slots__ = ("source", "target", "degree", "entries")

    def __init__(self, source: GradedSpace, target: GradedSpace, degree: int, entries=None):
        self.source = source
        self.target = target
        self.degree = int(degree)
        clean = {}
        for (j, i), v in (entries or {}).items():
            v = rat(v)
            if v == 0:
                continue
            if not (0 <= j < target.dim and 0 <= i < source.dim):
                raise IndexError(f"entry ({j},{i}) outside {target.dim}x{source.dim}")
            if target.degree(j) != source.degree(i) + self.degree:
                raise DegreeError(
                    f"entry ({j},{i}) maps degree {source.degree(i)} to {target.degree(j)},"
                    f" map degree is {self.degree}"
                )
            clean[(j, i)] = v
        self.entries = clean

    @classmethod
    def zero(cls, source, target, degree=0):
        return cls(source, target, degree)

    @classmethod
    def identity(cls, space):
        return cls(space, space, 0, {(i, i): 1 for i in range(space.dim)})

    @classmethod
    def from_dense(cls, source, target, degree, rows):
        return cls(source, target, degree,
                   {(j, i): v for j, row in enumerate(rows) for i, v in enumerate(row) if v})

    def is_zero(self) -> bool:
        return not self.entries

    def dense(self) -> list[list[Fraction]]:
        m = [[ZERO] * self.source.dim for _ in range(self.target.dim)]
        for (j, i), v in self.entries.items():
            m[j][i] = v
        return m

    def apply(self, x: Sequence) -> list[Fraction]:
        out = [ZERO] * self.target.dim
        for (j, i), v in self.entries.items():
            if x[i]:
                out[j] += v * x[i]
        return out

    def _check_same(self, other):
        if self.source != other.source or self.target != other.target:
            raise SpaceMismatch("maps have different source or target")
        if self.degree != other.degree and not (self.is_zero() or other.is_zero()):
            raise DegreeError(f"cannot add maps of degree {self.degree} and {other.degree}")

    def __add__(self, other: "GradedMap") -> "GradedMap":
        self._check_same(other)
        e = dict(self.entries)
        for k, v in other.entries.items():
            e[k] = e.get(k, ZERO) + v
        deg = other.degree if self.is_zero() else self.degree
        return GradedMap(self.source, self.target, deg, e)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "GradedMap":
        c = rat(c)
        return GradedMap(self.source, self.target, self.degree,
                         {k: c * v for k, v in self.entries.items()})

    def __eq__(self, other):
        return (isinstance(other, GradedMap) and self.source == other.source
                and self.target == other.target and self.entries == other.entries
                and (self.degree == other.degree or not self.entries))

    def __hash__(self):
        return hash((self.source, self.target, frozenset(self.entries.items())))

    def __repr__(self):
        return f"GradedMap(deg={self.degree}, {self.target.dim}x{self.source.dim}, {self.entries})"


def compose(f: GradedMap, g: GradedMap) -> GradedMap:
    """f after g."""
    if g.target != f.source:
        raise SpaceMismatch("g.target != f.source")
    by_row: dict[int, list] = {}
    for (k, i), v in g.entries.items():
        by_row.setdefault(k, []).append((i, v))
    e: dict = {}
    for (j, k), u in f.entries.items():
        for i, v in by_row.get(k, ()):
            e[(j, i)] = e.get((j, i), ZERO) + u * v
    return GradedMap(g.source, f.target, f.degree + g.degree, e)


@dataclass(frozen=True)
class CochainComplex:
    space: GradedSpace
    d0: GradedMap = field(default=None)

    def __post_init__(self):
        d0 = self.d0 if self.d0 is not None else GradedMap.zero(self.space, self.space, 1)
        if d0.source != self.space or d0.target != self.space:
            raise SpaceMismatch("d0 must be an endomorphism of the space")
        if d0.degree != 1 and not d0.is_zero():
            raise DegreeError("d0 must have degree 1")
        if d0.is_zero():
            d0 = GradedMap.zero(self.space, self.space, 1)
        if not compose(d0, d0).is_zero():
            raise ValueError("d0 does not square to zero")
        object.__setattr__(self, "d0", d0)

    def __hash__(self):
        return hash((self.space, frozenset(self.d0.entries.items())))

    def __eq__(self, other):
        return isinstance(other, CochainComplex) and self.space == other.space and self.d0 == other.d0


# models used throughout the tests and examples
def point_complex(deg: int = 0, name: str = "p") -> CochainComplex:
    return CochainComplex(GradedSpace(((name, deg),)))


def interval_complex(x: str = "x", y: str = "y") -> CochainComplex:
    """Two cells x (deg 0), y (deg 1) with d0 x = y: acyclic."""
    V = GradedSpace(((x, 0), (y, 1)))
    return CochainComplex(V, GradedMap(V, V, 1, {(1, 0): 1}))


def circle_complex() -> CochainComplex:
    V = GradedSpace((("1", 0), ("theta", 1)))
    return CochainComplex(V)


# ---------------------------------------------------------------- linear algebra

@dataclass
class LinearSolution:
    x: list | None
    certificate: list | None  # left functional y with y A = 0, y b != 0

    @property
    def ok(self) -> bool:
        return self.x is not None


def solve_linear(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction], ncols: int | None = None) -> LinearSolution:
    """Solve A x = b exactly.

    Pivots are chosen column by column, taking the first row (in original
    order among the remaining rows) with a nonzero entry.  Free variables
    are set to zero, so the output is deterministic.
    """
    m = len(A)
    n = ncols if ncols is not None else (len(A[0]) if m else 0)
    rows = [[rat(v) for v in A[r]] + [rat(b[r])] + [Fraction(int(r == s)) for s in range(m)]
            for r in range(m)]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * bb for a, bb in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if rows[i][n] != 0:
            return LinearSolution(None, rows[i][n + 1:])
    x = [ZERO] * n
    for i, c in enumerate(pivots):
        x[c] = rows[i][n]
    return LinearSolution(x, None)


@dataclass
class NotExact:
    certificate: list  # functional on the degree-d part of the space, in full coordinates

    def __bool__(self):
        return False


def _homogeneous_degree(space: GradedSpace, y) -> int | None:
    degs = {space.degree(i) for i, v in enumerate(y) if v}
    if len(degs) > 1:
        raise DegreeError(f"vector is not homogeneous (degrees {sorted(degs)})")
    return degs.pop() if degs else None


def solve_primitive(C: CochainComplex, y: Sequence) -> list | NotExact:
    """Return x with d0 x = y, or NotExact carrying a separating functional."""
    y = [rat(v) for v in y]
    V = C.space
    d = _homogeneous_degree(V, y)
    if d is None:
        return [ZERO] * V.dim
    cols = V.of_degree(d - 1)
    rows = V.of_degree(d)
    dense = C.d0.dense()
    A = [[dense[j][i] for i in cols] for j in rows]
    sol = solve_linear(A, [y[j] for j in rows], ncols=len(cols))
    if not sol.ok:
        cert = [ZERO] * V.dim
        for j, v in zip(rows, sol.certificate):
            cert[j] = v
        return NotExact(cert)
    x = [ZERO] * V.dim
    for i, v in zip(cols, sol.x):
        x[i] = v
    return x


def hom_differential(f: GradedMap, d_source: GradedMap, d_target: GradedMap) -> GradedMap:
    """d f - (-1)^{deg f} f d."""
    left = compose(d_target, f)
    right = compose(f, d_source)
    return left - right if f.degree % 2 == 0 else left + right


def is_cocycle(C: CochainComplex, f: GradedMap, C2: CochainComplex | None = None) -> bool:
    """True iff f: C -> C2 (default C) commutes with d0 up to the Koszul sign."""
    C2 = C if C2 is None else C2
    if f.source != C.space or f.target != C2.space:
        raise SpaceMismatch("map does not go between the given complexes")
    return hom_differential(f, C.d0, C2.d0).is_zero()
