"""Pass/fail records shared by every checker."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class CheckReport:
    name: str
    passed: bool
    trials: int = 1
    counterexample: dict | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def merge(self, other: "CheckReport") -> "CheckReport":
        """Combine two reports; the first counterexample wins."""
        return CheckReport(
            self.name,
            self.passed and other.passed,
            self.trials + other.trials,
            self.counterexample if self.counterexample is not None else other.counterexample,
            {**self.details, **other.details},
        )
