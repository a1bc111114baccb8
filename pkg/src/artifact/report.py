"""Defect reports returned by the check_* functions."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Report:
    anchor: str
    failures: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.ok

    def merge(self, other: "Report") -> "Report":
        self.failures.extend(other.failures)
        return self
