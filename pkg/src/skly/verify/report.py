"""Report types shared by every check."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..specfun import EllipticParams, _cstr


class DegenerateEta(ValueError):
    pass


class PoleCollision(ValueError):
    pass


class ConstraintViolated(ValueError):
    pass


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one named check.

    ``comparison`` is "lt" for identities (pass when residual < tolerance) and
    "gt" for non-vanishing claims (pass when the measured size exceeds it).
    """

    check_name: str
    params_echo: dict
    residual: float
    tolerance: float
    samples: tuple = ()
    notes: str = ""
    seed: int | None = None
    comparison: str = "lt"
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.residual):
            return False
        if self.comparison == "gt":
            return self.residual > self.tolerance
        return self.residual < self.tolerance

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_record(self) -> dict[str, Any]:
        return {
            "name": self.check_name,
            "params": self.params_echo,
            "seed": self.seed,
            "residual": _float_repr(self.residual),
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "comparison": self.comparison,
            "notes": self.notes,
            "samples": [_cstr(s) for s in self.samples],
        }


def _float_repr(x: float):
    return x if math.isfinite(x) else str(x)


def echo(params: EllipticParams, seed: int | None = None, **extra) -> dict:
    out = params.as_dict()
    if seed is not None:
        out["seed"] = seed
    for k, v in extra.items():
        out[k] = _cstr(v) if isinstance(v, complex) else v
    return out


def relative_residual(lhs, rhs, floor: float = 1.0) -> float:
    """max |lhs - rhs| / (floor + max(|lhs|, |rhs|)) over the arrays."""
    lhs = np.asarray(lhs, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    if not (np.all(np.isfinite(lhs)) and np.all(np.isfinite(rhs))):
        return math.inf
    num = np.abs(lhs - rhs)
    den = floor + np.maximum(np.abs(lhs), np.abs(rhs))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(num == 0, 0.0, num / den)
    return float(np.max(r, initial=0.0))


def scaled_residual(diff, scale: float) -> float:
    diff = np.asarray(diff, dtype=complex)
    if not np.all(np.isfinite(diff)) or not math.isfinite(scale):
        return math.inf
    return float(np.max(np.abs(diff), initial=0.0)) / max(scale, 1e-300)


def combine(name: str, reports: list[VerificationReport], params: EllipticParams,
            seed: int | None = None, notes: str = "") -> VerificationReport:
    """Fold sub-reports into one, keeping the worst normalised residual."""
    worst = 0.0
    for r in reports:
        if r.comparison == "gt":
            ratio = r.tolerance / r.residual if r.residual > 0 else math.inf
        else:
            ratio = r.residual / r.tolerance
        worst = max(worst, ratio)
    failing = [r.check_name for r in reports if not r.passed]
    text = notes + ("; failing: " + ", ".join(failing) if failing else "")
    return VerificationReport(name, echo(params, seed), worst, 1.0, (), text.strip("; "), seed,
                              extra={"parts": reports})
