"""Structured check reports and the registry of claim identifiers."""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

SCHEMA_VERSION = "1.0"

#: stable claim identifiers; each report's ``check`` names one of them
CLAIMS = {
    "KRAWT-SYM": "k-x and reflection symmetry of Krawtchouk polynomials",
    "KRAWT-ORTHO": "orthogonality of Krawtchouk polynomials",
    "KRAWT-ROOTS": "roots real, distinct, within n/2 +- sqrt(k(n-k))",
    "KRAWT-DECAY": "|kappa_k(x)| <= exp(-c k x / n) for k, x <= n/2",
    "KRAWT-CASE-CONST": "explicit constants of the two decay regimes",
    "L1-NORM": "||M_S||_{1->1} = n + 1",
    "ABEL": "summation-by-parts identities, even and odd radii",
    "KRAWT-DIFF": "one- and two-step Krawtchouk difference identities",
    "STEIN-D": "square-function multipliers bounded by 24/c^2 + 1",
    "STEIN-R": "||M_Sbar f - M_Sen(Sbar) f|| <= C_R ||f||",
    "TRUNCATION": "M_S = max(M_Sbar, iota M_Sbar) and senate truncation",
    "N-COMPARE": "Sen(N~)_P is a probability mixture of Sen(N)_T",
    "BINOM-LB": "Sen(S)_K <= 3 e^20 Sen(N~)_{P_K}",
    "ERGODIC-W11": "weak (1,1) bound for Cesaro maximal functions",
    "MARCINKIEWICZ-2": "||M_Sen(N)||_{2->2} <= 2 sqrt 2",
    "NORM-ESTIMATE": "empirical lower bounds on ||M_S||_{2->2}",
    "CHAIN-BOUND": "explicit end-to-end upper bound on ||M_S||_{2->2}",
    "GAME-COROLLARY": "marking-game sphere densities",
}


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and Fractions for ``json``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return repr(x)
        return float(f"{x:.17g}")
    return obj


@dataclass
class CheckReport:
    """Outcome of one verification.

    Violations are report content, never exceptions, so a caller can always
    assemble a complete conformance table.
    """

    check: str
    passed: bool
    n_range: list = None
    n: int = None
    params: dict = field(default_factory=dict)
    worst_case: dict = None
    worst_violation: float = None
    constants: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.passed)

    def to_dict(self):
        out = {"check": self.check, "pass": bool(self.passed)}
        for key in ("n_range", "n", "worst_case", "worst_violation"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        for key in ("params", "constants", "details"):
            value = getattr(self, key)
            if value:
                out[key] = value
        return to_jsonable(out)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)
