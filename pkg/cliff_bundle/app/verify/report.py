from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


RNG_NAME = "PCG64"


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    @classmethod
    def below(cls, name: str, value: float, tolerance: float, detail: str = "") -> "CheckResult":
        """Pass when value < tolerance (residual style)."""
        value = float(value)
        return cls(name, value, float(tolerance), bool(value < tolerance), detail)

    @classmethod
    def within(cls, name: str, value: float, target: float, tolerance: float, detail: str = "") -> "CheckResult":
        """Pass when |value - target| <= tolerance (slope/order style)."""
        value = float(value)
        ok = abs(value - target) <= tolerance
        return cls(name, value, float(tolerance), bool(ok), detail or f"target={target}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    suite: str
    seed: int
    checks: list[CheckResult] = field(default_factory=list)
    rng: str = RNG_NAME
    tolerance_scale: float = 1.0
    perturb: float = 0.0
    wall_time: float | None = None

    def __post_init__(self) -> None:
        self.checks = sorted(self.checks, key=lambda c: c.name)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "suite": self.suite,
            "seed": self.seed,
            "rng": self.rng,
            "tolerance_scale": self.tolerance_scale,
            "perturb": self.perturb,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }
        if include_timing and self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out

    def csv_rows(self) -> tuple[list[str], list[list[Any]]]:
        header = ["name", "value", "tolerance", "passed", "detail"]
        rows = [[c.name, c.value, c.tolerance, int(c.passed), c.detail] for c in self.checks]
        return header, rows
