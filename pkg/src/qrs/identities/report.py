"""Verification reports shared by the terminating, reduction and numeric drivers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

VERSION = "0.1.0"


@dataclass
class Failure:
    point: dict
    lhs: str
    rhs: str

    def to_json(self) -> dict:
        return {"point": self.point, "lhs": self.lhs, "rhs": self.rhs}


@dataclass
class VerificationReport:
    id: str
    anchor: str
    regime: str
    n: Optional[int]
    box: object
    attempted: int = 0
    resampled: int = 0
    passed: int = 0
    failures: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    seed: Optional[int] = None
    wall_ms: int = 0
    # not serialized: per-trial residual sequences and inconclusive counts
    sequences: list = field(default_factory=list)
    inconclusive: int = 0
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.attempted > 0 and self.passed == self.attempted and not self.failures

    def add_failure(self, point, lhs, rhs, limit: int = 5):
        if len(self.failures) < limit:
            self.failures.append(Failure(point, str(lhs), str(rhs)))

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "regime": self.regime,
            "n": self.n,
            "box": self.box,
            "trials": {"attempted": self.attempted, "resampled": self.resampled, "passed": self.passed},
            "failures": [f.to_json() for f in self.failures],
            "residuals": list(self.residuals),
            "seed": self.seed,
            "wall_ms": self.wall_ms,
            "version": VERSION,
        }

    def summary(self) -> str:
        status = "PASS" if self.ok else ("INCONCLUSIVE" if self.inconclusive and not self.failures else "FAIL")
        box = self.box if not isinstance(self.box, dict) else ",".join(f"{k}={v}" for k, v in self.box.items())
        return (f"{status:<12} {self.id:<28} {self.regime:<15} n={self.n} box={box} "
                f"passed {self.passed}/{self.attempted} resampled {self.resampled}")


def format_residual(value) -> str:
    """|value| in scientific notation with 30 significant digits ("0" when exact)."""
    from decimal import Context, Decimal

    from gmpy2 import mpq

    v = abs(mpq(value))
    if v == 0:
        return "0"
    ctx = Context(prec=30)
    d = ctx.divide(Decimal(int(v.numerator)), Decimal(int(v.denominator)))
    return f"{d:.29E}"
