"""Audit records produced by the verifiers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .exact import Interval, PPowerSum, to_decimal


class TheoremId(enum.Enum):
    DILATION = "Dilation31"
    TRANSPORT = "Transport32"
    HILBERT = "Hilbert33"
    HARDY = "Hardy34"
    DP = "Dp35"
    HLP_REMARK = "HLPRemark"
    HOLDER = "Holder23"
    MINKOWSKI = "Minkowski24"


class Outcome(enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INADMISSIBLE = "Inadmissible"
    UNDECIDED = "Undecided"


def value_json(x):
    """Exact and decimal renderings of a PPowerSum or Interval (None passes through)."""
    if x is None:
        return None
    if isinstance(x, Interval):
        x = x.rounded(128)
        return {"interval": [str(x.lo), str(x.hi)], "decimal": to_decimal(x)}
    return {"exact": x.to_json(), "text": str(x), "decimal": to_decimal(x)}


@dataclass
class VerificationRecord:
    theorem_id: TheoremId
    inputs: dict
    lhs: object = None
    rhs: object = None
    outcome: Outcome = Outcome.UNDECIDED
    precision_used: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.outcome is Outcome.PASS

    def sort_key(self):
        return (self.theorem_id.value, _canon(self.inputs))

    def to_json(self) -> dict:
        out = {
            "theorem_id": self.theorem_id.value,
            "inputs": self.inputs,
            "lhs": value_json(self.lhs),
            "rhs": value_json(self.rhs),
            "outcome": self.outcome.value,
            "precision_used": self.precision_used,
        }
        if self.notes:
            out["notes"] = self.notes
        return out


def _canon(d) -> str:
    import json

    return json.dumps(d, sort_keys=True, default=str)


def decide(lhs, rhs, theorem_id, inputs, notes=None, max_bits=None) -> VerificationRecord:
    """Record for the claim lhs <= rhs; an undecidable comparison becomes Undecided."""
    from .errors import PrecisionExhausted
    from .exact import DEFAULT_MAX_BITS, Ordering, compare_values

    try:
        cmp = compare_values(lhs, rhs, max_bits or DEFAULT_MAX_BITS)
    except PrecisionExhausted:
        bits = max_bits or DEFAULT_MAX_BITS
        if Interval.coerce(lhs, bits).hi <= Interval.coerce(rhs, bits).lo:
            return VerificationRecord(theorem_id, inputs, lhs, rhs, Outcome.PASS, bits, notes or {})
        return VerificationRecord(theorem_id, inputs, lhs, rhs, Outcome.UNDECIDED,
                                  max_bits or DEFAULT_MAX_BITS, notes or {})
    outcome = Outcome.FAIL if cmp.outcome is Ordering.GREATER else Outcome.PASS
    return VerificationRecord(theorem_id, inputs, lhs, rhs, outcome, cmp.precision_used, notes or {})


__all__ = ["TheoremId", "Outcome", "VerificationRecord", "decide", "value_json"]
