"""Physical parameters for the combined NLS with inverse-square potential.

The model lives in dimension d in {3, 4, 5} with the operator
-Delta + a/|x|^2.  Everything downstream (ground state, exponents,
admissibility windows) is derived from (d, a), so this module is the
single source of truth for those numbers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

__all__ = ["PhysParams", "Regime", "make_params", "admissibility", "AdmissibilityCheck"]


class Regime(enum.Enum):
    """Open a-intervals under which the dichotomy theorems operate."""

    SUB_THRESHOLD = "sub_threshold"
    THRESHOLD = "threshold"


@dataclass(frozen=True)
class PhysParams:
    """Validated parameter container; immutable and shareable across threads.

    d       -- ambient dimension, one of {3, 4, 5}
    a       -- coefficient of the inverse-square potential (a > -(d-2)^2/4)
    beta    -- sqrt(1 + (2/(d-2))^2 a), in (0, 1] for a <= 0
    sigma   -- (d-2)/2 * (1 - beta), the ground-state cusp exponent at r=0
    p_crit  -- energy-critical power 4/(d-2)
    p_pert  -- perturbative (defocusing) power 4/(d-1)
    """

    d: int
    a: float
    beta: float
    sigma: float
    p_crit: float
    p_pert: float

    @property
    def hardy_bound(self) -> float:
        """Friedrichs bound -(d-2)^2/4 below which the quadratic form is unbounded."""
        return -((self.d - 2) ** 2) / 4.0

    @property
    def q_crit(self) -> float:
        """Lebesgue exponent 2d/(d-2) of the focusing term."""
        return 2.0 * self.d / (self.d - 2)

    @property
    def q_pert(self) -> float:
        """Lebesgue exponent (2d+2)/(d-1) of the defocusing term."""
        return (2.0 * self.d + 2.0) / (self.d - 1)

    def to_config(self) -> dict:
        """Flat key-value record; round-trips through from_config."""
        return {"d": self.d, "a": self.a}

    @staticmethod
    def from_config(cfg: Mapping) -> "PhysParams":
        return make_params(int(cfg["d"]), float(cfg["a"]))


def make_params(d: int, a: float) -> PhysParams:
    """Build PhysParams, validating dimension and the Friedrichs bound.

    a = 0 is accepted: the potential-free ground state is the constant
    reference for the comparison estimates even though the dichotomy
    theorems themselves require a < 0.
    """
    if d not in (3, 4, 5):
        raise ValueError(f"dimension d={d} unsupported; d must be one of 3, 4, 5")
    a = float(a)
    hardy = -((d - 2) ** 2) / 4.0
    if not a > hardy:
        raise ValueError(
            f"a={a} violates the positivity bound a > -(d-2)^2/4 = {hardy}"
        )
    beta = math.sqrt(1.0 + (2.0 / (d - 2)) ** 2 * a)
    sigma = (d - 2) / 2.0 * (1.0 - beta)
    return PhysParams(
        d=d,
        a=a,
        beta=beta,
        sigma=sigma,
        p_crit=4.0 / (d - 2),
        p_pert=4.0 / (d - 1),
    )


class AdmissibilityCheck(NamedTuple):
    ok: bool
    margin: float  # absolute distance to the nearest interval endpoint


def _regime_lower(d: int, regime: Regime) -> float:
    base = -((d - 2) ** 2) / 4.0
    if regime is Regime.SUB_THRESHOLD:
        return base + ((d - 2) / (d + 2)) ** 2
    return base + (2.0 * (d - 2) / (d + 2)) ** 2


def admissibility(params: PhysParams, regime: Regime) -> AdmissibilityCheck:
    """Whether a sits strictly inside the open interval of the given regime.

    The intervals are (lower(d, regime), 0); both endpoints excluded.  The
    margin is the absolute distance to the nearest endpoint (intervals are
    O(1), so no relative scaling).
    """
    lower = _regime_lower(params.d, regime)
    ok = lower < params.a < 0.0
    margin = min(abs(params.a - lower), abs(params.a - 0.0))
    return AdmissibilityCheck(ok=ok, margin=margin)
