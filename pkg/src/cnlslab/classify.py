"""Region classification of initial data against the variational threshold.

Below the threshold energy m_a = kinetic_sq(W)/d the phase space splits
into a scattering region (kinetic norm below the ground state's) and a
blow-up region (above); at the threshold the ground-state orbit separates
the two.  The classifier reports signed margins so parameter sweeps can
contour the boundary, plus the quantitative K-bound and trapping
predicates used as runtime monitors.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .functionals import EnergyReport, mu_bar, report, scale_L2inv
from .grid import RadialField
from .groundstate import GroundStateBundle
from .params import PhysParams

__all__ = [
    "Region",
    "ClassifierVerdict",
    "classify",
    "k_region_equivalence",
    "uniform_k_bounds",
    "KBoundsResult",
    "kzero_scaling_witness",
    "ScalingWitness",
    "energy_trapping",
    "TrappingResult",
]


class Region(enum.Enum):
    SCATTER_SUB = "ScatterSub"
    BLOWUP_SUB = "BlowupSub"
    SCATTER_THRESHOLD = "ScatterThreshold"
    BLOWUP_THRESHOLD = "BlowupThreshold"
    GROUND_STATE_ORBIT = "GroundStateOrbit"
    ABOVE_THRESHOLD = "AboveThreshold"


@dataclass(frozen=True)
class ClassifierVerdict:
    report: EnergyReport
    m_a: float
    kinetic_ground_sq: float
    region: Region
    energy_margin: float   # m_a - E_a(u); positive below threshold
    kinetic_margin: float  # ||W||^2 - ||u||^2; positive on the scattering side
    note: str = ""


def classify(
    u: RadialField,
    p: PhysParams,
    bundle: GroundStateBundle,
    tol_E: float | None = None,
) -> ClassifierVerdict:
    """Classify an initial datum per the dichotomy hypotheses.

    tol_E defaults to 1e-6 * m_a: threshold membership is tolerance-based
    since floating-point data never sits exactly on E_a = m_a.  The
    radiality hypotheses of the underlying theorems are automatic here
    (every field is radial) and are not separately enforced.
    """
    rep = report(u, p)
    m_a = bundle.m_a
    kin_w = bundle.kinetic_sq
    if tol_E is None:
        tol_E = 1e-6 * m_a
    if tol_E <= 0:
        raise ValueError("tol_E must be positive")

    e, kin = rep.e_a, rep.kinetic_sq
    note = ""
    if math.isinf(e):
        region = Region.ABOVE_THRESHOLD
        note = "perturbative Lebesgue mass diverges; combined energy is +inf"
    elif abs(e - m_a) <= tol_E:
        if abs(kin - kin_w) <= tol_E * p.d:
            region = Region.GROUND_STATE_ORBIT
        elif kin < kin_w:
            region = Region.SCATTER_THRESHOLD
        else:
            region = Region.BLOWUP_THRESHOLD
    elif e < m_a:
        if kin < kin_w:
            region = Region.SCATTER_SUB
        elif kin > kin_w:
            region = Region.BLOWUP_SUB
        else:
            region = Region.BLOWUP_SUB
            note = "kinetic norm exactly at the ground-state value (degenerate)"
    else:
        region = Region.ABOVE_THRESHOLD
        if rep.l_pert > 0 and abs(rep.e_a_crit - m_a) <= max(tol_E, 1e-4 * m_a):
            note = (
                "critical-only energy sits at the threshold; the combined "
                "energy exceeds it by the positive perturbative term"
            )
    return ClassifierVerdict(
        report=rep,
        m_a=m_a,
        kinetic_ground_sq=kin_w,
        region=region,
        energy_margin=m_a - e,
        kinetic_margin=kin_w - kin,
        note=note,
    )


def k_region_equivalence(
    u: RadialField, p: PhysParams, bundle: GroundStateBundle
) -> bool:
    """For sub-threshold data, sign(K >= 0) must match kinetic side.

    This is the datum-by-datum version of the equivalence between the
    K-sign regions and the kinetic-norm regions below the threshold.
    """
    rep = report(u, p)
    if not rep.e_a < bundle.m_a:
        raise ValueError("precondition E_a(u) < m_a violated")
    return (rep.k_a >= 0.0) == (rep.kinetic_sq <= bundle.kinetic_sq)


class KBoundsResult(NamedTuple):
    bound_ok: bool
    k_a: float
    bound: float          # the side that K must clear
    branch: str           # "negative" or "positive"
    positive_branches: tuple  # (mu_bar gap bound, quadratic+pert bound) when K >= 0


def uniform_k_bounds(
    u: RadialField, p: PhysParams, bundle: GroundStateBundle, rtol: float = 1e-9
) -> KBoundsResult:
    """Quantitative lower/upper bounds on K below the threshold.

    K < 0:  K <= -(2d/(d-2)) (m_a - E_a)
    K >= 0: K >= min( (2d/(d-2)) (m_a - E_a),
                      2/(2d-3) ||u||_{kinetic}^2 + 2d/((2d-3)(d+1)) l_pert )
    """
    rep = report(u, p)
    if not rep.e_a < bundle.m_a:
        raise ValueError("precondition E_a(u) < m_a violated")
    gap = bundle.m_a - rep.e_a
    mb = mu_bar(p)
    slack = rtol * max(1.0, abs(rep.k_a))
    if rep.k_a < 0:
        bound = -mb * gap
        return KBoundsResult(rep.k_a <= bound + slack, rep.k_a, bound, "negative", ())
    d = p.d
    b1 = mb * gap
    b2 = 2.0 / (2 * d - 3) * rep.kinetic_sq + 2.0 * d / ((2 * d - 3) * (d + 1)) * rep.l_pert
    bound = min(b1, b2)
    return KBoundsResult(rep.k_a >= bound - slack, rep.k_a, bound, "positive", (b1, b2))


class ScalingWitness(NamedTuple):
    s_star: float
    k_at_star: float
    h_at_star: float


def kzero_scaling_witness(
    u: RadialField,
    p: PhysParams,
    bundle: GroundStateBundle,
    k_tol: float = 1e-6,
    max_iter: int = 200,
) -> ScalingWitness:
    """Bisection along the mass-preserving dilation to the K = 0 crossing.

    For data with K < 0, shrinking the scale drives the quadratic part to
    zero, so K turns positive; the crossing scale s* carries
    H(u^{s*}) >= m_a, witnessing the minimization characterization of the
    threshold.
    """
    rep = report(u, p)
    if rep.k_a >= 0:
        raise ValueError("witness requires a datum with K < 0")

    def k_of(s: float) -> float:
        return report(scale_L2inv(u, s), p).k_a

    lo, hi = 1.0, 1.0
    while k_of(lo) < 0:
        lo *= 0.5
        if lo < 1e-12:
            raise RuntimeError("no K sign change found along the scaling path")
    # K(lo) >= 0 > K(hi); bisect
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        km = k_of(mid)
        if abs(km) < k_tol:
            lo = hi = mid
            break
        if km > 0:
            lo = mid
        else:
            hi = mid
    s_star = 0.5 * (lo + hi)
    rep_star = report(scale_L2inv(u, s_star), p)
    return ScalingWitness(s_star=s_star, k_at_star=rep_star.k_a, h_at_star=rep_star.h_a)


class TrappingResult(NamedTuple):
    ok: bool
    note: str

    def __bool__(self) -> bool:  # allow use as a plain predicate
        return self.ok


def energy_trapping(
    kinetic_trajectory: Sequence[float], bundle: GroundStateBundle, rtol: float = 1e-9
) -> TrappingResult:
    """Whether the kinetic norm stays strictly on its initial side.

    Mirrors the continuity argument: a sub-threshold trajectory can never
    touch the ground-state kinetic value.  Trajectories that ride the
    boundary are reported as failures with a note.
    """
    ks = list(kinetic_trajectory)
    if not ks:
        return TrappingResult(False, "empty trajectory")
    ref = bundle.kinetic_sq
    tol = rtol * ref
    if abs(ks[0] - ref) <= tol:
        return TrappingResult(False, "trajectory starts on the ground-state boundary")
    below = ks[0] < ref
    for k in ks:
        if abs(k - ref) <= tol:
            return TrappingResult(False, "trajectory touches the ground-state boundary")
        if (k < ref) != below:
            return TrappingResult(False, "kinetic norm crossed the ground-state value")
    return TrappingResult(True, "below" if below else "above")
