"""Scalar energy/virial-type functionals and the two scaling maps.

One evaluation pass computes every functional from four shared integrals
(mass, gradient norm, potential term, two Lebesgue masses); the report
fields are algebraic views of those, so identities between them hold to
machine precision by construction.

Fields carrying an analytic profile are integrated on the whole half line
(geometric-accuracy rule); sampled-only fields are integrated over their
grid domain.  Ground-state-family profiles can have divergent mass or
perturbative Lebesgue mass in low dimension (their decay is a borderline
power law); those entries are reported as +inf rather than a silently
truncated number.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields as dataclass_fields

import numpy as np
from scipy.interpolate import PchipInterpolator

from .grid import RadialField, h1a_norm_sq, radial_derivative
from .params import PhysParams
from .profiles import RadialProfile, ScaledProfile
from .quadrature import DEFAULT_RULE, HalfLineRule, integral_diverges

__all__ = [
    "EnergyReport",
    "report",
    "scale_L2inv",
    "scale_H1inv",
    "mu_bar",
    "mu_under",
    "REPORT_COLUMNS",
]


def mu_bar(p: PhysParams) -> float:
    """max of the scaling exponents entering K; equals 2d/(d-2) for d in 3..5."""
    return 2.0 * p.d / (p.d - 2)


def mu_under(p: PhysParams) -> float:
    """min of the scaling exponents entering K; equals 0 for d in 3..5."""
    return 0.0


@dataclass(frozen=True)
class EnergyReport:
    mass: float
    grad_sq: float      # int |d_r u|^2 (no potential term)
    kinetic_sq: float   # grad_sq + a int |u|^2/r^2
    l_crit: float       # int |u|^(2d/(d-2))
    l_pert: float       # int |u|^((2d+2)/(d-1))
    e_a: float
    e_a_crit: float
    e_0: float
    e_0_crit: float
    k_a: float
    k_a_q: float
    k_a_n: float
    k_a_c: float
    h_a: float
    g_val: float

    def row(self) -> list:
        return [getattr(self, f.name) for f in dataclass_fields(self)]


REPORT_COLUMNS = [f.name for f in dataclass_fields(EnergyReport)]


def _assemble(d: int, mass_v, grad, kin, lc, lp) -> EnergyReport:
    c_pert = (d - 1) / (2.0 * d + 2.0)
    c_crit = (d - 2) / (2.0 * d)
    k_a = 2.0 * kin - 2.0 * lc + (2.0 * d / (d + 1)) * lp
    return EnergyReport(
        mass=mass_v,
        grad_sq=grad,
        kinetic_sq=kin,
        l_crit=lc,
        l_pert=lp,
        e_a=0.5 * kin + c_pert * lp - c_crit * lc,
        e_a_crit=0.5 * kin - c_crit * lc,
        e_0=0.5 * grad + c_pert * lp - c_crit * lc,
        e_0_crit=0.5 * grad - c_crit * lc,
        k_a=k_a,
        k_a_q=2.0 * kin,
        k_a_n=k_a - 2.0 * kin,
        k_a_c=2.0 * kin - 2.0 * lc,
        h_a=(kin + lc) / (2.0 * d),
        g_val=kin - lc,
    )


def _report_profile(prof: RadialProfile, p: PhysParams, rule: HalfLineRule) -> EnergyReport:
    d = p.d
    omega = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    breaks = prof.breakpoints()

    def integ(f):
        if breaks:
            return omega * rule.integrate_piecewise(f, breaks)
        return omega * rule.integrate(f)

    pw = prof.decay_pow

    def lebesgue(q):
        if integral_diverges(q * pw + (d - 1)):
            return math.inf
        return integ(lambda r: np.abs(prof.value(r)) ** q * r ** (d - 1))

    mass_v = lebesgue(2.0)
    lc = lebesgue(p.q_crit)
    lp = lebesgue(p.q_pert)
    # kinetic density decays like r^(2 pw + d - 3): always integrable for
    # the profile families used here, but guard anyway
    if integral_diverges(2.0 * pw + d - 3.0):
        grad = math.inf
        kin = math.inf
    else:
        grad = integ(lambda r: np.abs(prof.d1(r)) ** 2 * r ** (d - 1))
        pot = integ(lambda r: np.abs(prof.value(r)) ** 2 * r ** (d - 3))
        kin = grad + p.a * pot
    return _assemble(d, mass_v, grad, kin, lc, lp)


def _report_grid(u: RadialField, p: PhysParams) -> EnergyReport:
    u.check_finite()
    w = u.grid.volume_weights
    r = u.grid.nodes
    absu = np.abs(u.values)
    du = radial_derivative(u, p)
    mass_v = float(np.dot(w, absu**2))
    grad = float(np.dot(w, np.abs(du) ** 2))
    pot = float(np.dot(w, absu**2 / r**2))
    kin = grad + p.a * pot
    lc = float(np.dot(w, absu**p.q_crit))
    lp = float(np.dot(w, absu**p.q_pert))
    return _assemble(p.d, mass_v, grad, kin, lc, lp)


def report(u: RadialField, p: PhysParams, rule: HalfLineRule = DEFAULT_RULE) -> EnergyReport:
    """Compute every functional in one pass sharing quadratures."""
    u.check_finite()
    if u.profile is not None:
        return _report_profile(u.profile, p, rule)
    return _report_grid(u, p)


def _resample(u: RadialField, s: float, power: float) -> RadialField:
    """u -> s^power u(s .), exact for profile-backed fields."""
    if s <= 0:
        raise ValueError("scale must be positive")
    grid = u.grid
    if u.profile is not None:
        prof = ScaledProfile(u.profile, amp=s**power, rate=s)
        return RadialField(grid, prof.value(grid.nodes), prof)
    # sampled-only: monotone cubic interpolation of re/im, zero beyond r_max
    if s < 1.0:
        edge = abs(u.values[-1])
        peak = np.max(np.abs(u.values)) or 1.0
        if edge > 1e-8 * peak:
            warnings.warn(
                "rescaled support leaves the grid; spreading a field with "
                "nonzero boundary values loses mass past r_max",
                stacklevel=3,
            )
    x = grid.nodes
    target = s * x
    with np.errstate(over="ignore", invalid="ignore"):
        re = PchipInterpolator(x, u.values.real, extrapolate=False)(target)
        im = PchipInterpolator(x, u.values.imag, extrapolate=False)(target)
    vals = np.where(np.isnan(re), 0.0, re) + 1j * np.where(np.isnan(im), 0.0, im)
    return RadialField(grid, s**power * vals)


def scale_L2inv(u: RadialField, s: float) -> RadialField:
    """Mass-preserving dilation u -> s^(d/2) u(s .)."""
    return _resample(u, s, u.grid.d / 2.0)


def scale_H1inv(u: RadialField, s: float) -> RadialField:
    """Kinetic-norm-preserving dilation u -> s^((d-2)/2) u(s .)."""
    return _resample(u, s, (u.grid.d - 2) / 2.0)
