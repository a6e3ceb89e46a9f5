"""Near-ground-state decomposition and the linearized energy machinery.

Close to the orbit { e^(i theta) mu^((d-2)/2) W(mu r) } a field is written
u = e^(i theta) (g + W_[mu]) with g fixed by two orthogonality conditions
in the potential-adapted H^1 inner product: the imaginary part of g
orthogonal to W_[mu] (phase direction) and the real part orthogonal to the
scaling generator W1_[mu].  These are two equations for (theta, mu),
solved by damped Newton.

The proximity parameter is delta(u) = | ||W||^2 - ||u||^2 | in that inner
product.  Inner products follow the field's evaluation path: profile-backed
fields use whole-line quadrature, sampled fields use grid quadrature with
the grid-sampled ground-state reference, so that delta is a like-for-like
comparison in either world.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .grid import RadialField, RadialGrid, h1a_norm_sq, radial_derivative
from .groundstate import GroundStateBundle
from .params import PhysParams
from .profiles import (
    GeneratorProfile,
    GroundStateProfile,
    RadialProfile,
    ScaledProfile,
    SumProfile,
)
from .quadrature import DEFAULT_RULE, HalfLineRule

__all__ = [
    "ModulationFit",
    "NotInWindow",
    "ModulationFitError",
    "ScaleOutOfRange",
    "fit",
    "quadratic_form_F",
    "project_Hperp",
    "modulation_estimates_check",
    "ModulationEstimates",
    "coercivity_sample",
    "default_delta0",
]

DEFAULT_DELTA0_FACTOR = 0.05  # window size as a fraction of ||W||^2


class ModulationFitError(RuntimeError):
    def __init__(self, residuals, iterations):
        super().__init__(
            f"orthogonality fit did not converge after {iterations} iterations; "
            f"last residuals {residuals}"
        )
        self.residuals = residuals


class ScaleOutOfRange(RuntimeError):
    """Fitted scale left the range the grid can represent."""


@dataclass(frozen=True)
class NotInWindow:
    delta: float
    delta0: float


@dataclass
class ModulationFit:
    theta: float
    mu: float
    g: RadialField
    delta: float
    g_norm: float
    in_window: bool
    ortho_residuals: Tuple[float, float]
    params: PhysParams

    def orbit_profile(self) -> ScaledProfile:
        W = GroundStateProfile(self.params)
        amp = self.mu ** ((self.params.d - 2) / 2.0) * complex(
            math.cos(self.theta), math.sin(self.theta)
        )
        return ScaledProfile(W, amp=amp, rate=self.mu)

    def orbit_field(self, grid: RadialGrid) -> RadialField:
        prof = self.orbit_profile()
        return RadialField(grid, prof.value(grid.nodes), prof)


def default_delta0(bundle: GroundStateBundle) -> float:
    return DEFAULT_DELTA0_FACTOR * bundle.kinetic_sq


# ---------------------------------------------------------------------------
# inner products

def _inner_profiles(
    f: RadialProfile, h: RadialProfile, p: PhysParams, rule: HalfLineRule
) -> complex:
    """<f, h>_a = int (f' conj(h') + a f conj(h)/r^2) over the half line."""
    d = p.d
    omega = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    breaks = sorted(set(f.breakpoints()) | set(h.breakpoints()))

    def re_part(r):
        dens = f.d1(r) * np.conj(h.d1(r)) + p.a * f.value(r) * np.conj(h.value(r)) / r**2
        return np.real(dens) * r ** (d - 1)

    def im_part(r):
        dens = f.d1(r) * np.conj(h.d1(r)) + p.a * f.value(r) * np.conj(h.value(r)) / r**2
        return np.imag(dens) * r ** (d - 1)

    if breaks:
        return complex(
            omega * rule.integrate_piecewise(re_part, breaks),
            omega * rule.integrate_piecewise(im_part, breaks),
        )
    return complex(omega * rule.integrate(re_part), omega * rule.integrate(im_part))


def _inner_grid_vs_profile(
    u: RadialField, h: RadialProfile, p: PhysParams
) -> complex:
    """Grid-path pairing: u is differenced, the profile side is analytic."""
    g = u.grid
    r = g.nodes
    du = radial_derivative(u, p)
    dens = du * np.conj(h.d1(r)) + p.a * u.values * np.conj(h.value(r)) / r**2
    return complex(np.dot(g.volume_weights, dens))


def _norm_sq(u: RadialField, p: PhysParams, rule: HalfLineRule) -> float:
    if u.profile is not None:
        return float(_inner_profiles(u.profile, u.profile, p, rule).real)
    return h1a_norm_sq(u, p, warn_tail=False)


def _reference_kinetic(u: RadialField, p: PhysParams, bundle: GroundStateBundle,
                       rule: HalfLineRule) -> float:
    """||W||^2 evaluated the same way u will be (exact vs truncated grid)."""
    if u.profile is not None:
        return bundle.kinetic_sq
    wfield = RadialField(u.grid, bundle.w.values)  # drop profile: grid path
    return h1a_norm_sq(wfield, p, warn_tail=False)


# ---------------------------------------------------------------------------
# the (theta, mu) fit

def _half_kinetic_radius_profile(prof: RadialProfile, p: PhysParams,
                                 rule: HalfLineRule) -> float:
    r = rule.nodes
    dens = np.abs(prof.d1(r)) ** 2 * r ** (p.d - 1)
    cum = np.cumsum(rule.weights * dens)
    total = cum[-1]
    idx = int(np.searchsorted(cum, 0.5 * total))
    return float(r[min(idx, len(r) - 1)])


def _half_kinetic_radius_grid(u: RadialField, p: PhysParams) -> float:
    du = radial_derivative(u, p)
    dens = np.abs(du) ** 2 * u.grid.nodes ** (p.d - 1)
    cum = np.cumsum(dens) * u.grid.dr
    total = cum[-1]
    if total <= 0:
        return 1.0
    idx = int(np.searchsorted(cum, 0.5 * total))
    return float(u.grid.nodes[min(idx, u.grid.n - 1)])


def fit(
    u: RadialField,
    p: PhysParams,
    bundle: GroundStateBundle,
    delta0: float | None = None,
    rule: HalfLineRule = DEFAULT_RULE,
    max_iter: int = 50,
):
    """Solve the two orthogonality conditions for (theta, mu).

    Returns a ModulationFit, or NotInWindow when delta(u) >= delta0.
    Raises ModulationFitError on Newton stagnation and ScaleOutOfRange when
    mu leaves what the grid resolves.
    """
    if delta0 is None:
        delta0 = default_delta0(bundle)
    if delta0 <= 0:
        raise ValueError("delta0 must be positive")

    ref = _reference_kinetic(u, p, bundle, rule)
    norm_u = _norm_sq(u, p, rule)
    delta = abs(ref - norm_u)
    if delta >= delta0:
        return NotInWindow(delta=delta, delta0=delta0)

    W = GroundStateProfile(p)
    W1 = GeneratorProfile(W)
    dpow = (p.d - 2) / 2.0
    exact = u.profile is not None

    def scaled(base: RadialProfile, mu: float) -> ScaledProfile:
        return ScaledProfile(base, amp=mu**dpow, rate=mu)

    def pair(h: RadialProfile) -> complex:
        if exact:
            return _inner_profiles(u.profile, h, p, rule)
        return _inner_grid_vs_profile(u, h, p)

    def cross(mu: float) -> float:
        # <W_[mu], W1_[mu]>_a, consistently with the evaluation path
        if exact:
            return float(_inner_profiles(scaled(W, mu), scaled(W1, mu), p, rule).real)
        a_fld = RadialField(u.grid, scaled(W, mu).value(u.grid.nodes))
        return float(_inner_grid_vs_profile(a_fld, scaled(W1, mu), p).real)

    def residuals(theta: float, mu: float) -> np.ndarray:
        e = complex(math.cos(-theta), math.sin(-theta))
        c0 = pair(scaled(W, mu))
        c1 = pair(scaled(W1, mu))
        r1 = (e * c0).imag
        r2 = (e * c1).real - cross(mu)
        return np.array([r1, r2])

    # initial guess: phase from the projection onto W, scale from matching
    # the half-kinetic-density radius
    theta = math.atan2(pair(W).imag, pair(W).real)
    if exact:
        mu = _half_kinetic_radius_profile(W, p, rule) / max(
            _half_kinetic_radius_profile(u.profile, p, rule), 1e-12
        )
    else:
        wf = RadialField(u.grid, W.value(u.grid.nodes))
        mu = _half_kinetic_radius_grid(wf, p) / max(_half_kinetic_radius_grid(u, p), 1e-12)
    mu = min(max(mu, 1e-6), 1e6)

    scale_res = max(ref, 1.0)
    tol = 1e-12 * scale_res
    res = residuals(theta, mu)
    it = 0
    while np.max(np.abs(res)) > tol and it < max_iter:
        h_t = 1e-7
        h_m = 1e-7 * max(mu, 1e-3)
        j00 = (residuals(theta + h_t, mu)[0] - residuals(theta - h_t, mu)[0]) / (2 * h_t)
        j10 = (residuals(theta + h_t, mu)[1] - residuals(theta - h_t, mu)[1]) / (2 * h_t)
        j01 = (residuals(theta, mu + h_m)[0] - residuals(theta, mu - h_m)[0]) / (2 * h_m)
        j11 = (residuals(theta, mu + h_m)[1] - residuals(theta, mu - h_m)[1]) / (2 * h_m)
        J = np.array([[j00, j01], [j10, j11]])
        try:
            step = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            raise ModulationFitError(tuple(res), it)
        lam = 1.0
        base = np.max(np.abs(res))
        while lam > 1e-6:
            th_new = theta + lam * step[0]
            mu_new = mu + lam * step[1]
            if mu_new > 0:
                res_new = residuals(th_new, mu_new)
                if np.max(np.abs(res_new)) < base:
                    theta, mu, res = th_new, mu_new, res_new
                    break
            lam *= 0.5
        else:
            raise ModulationFitError(tuple(res), it)
        it += 1

    if np.max(np.abs(res)) > max(tol, 1e-9 * scale_res):
        raise ModulationFitError(tuple(res), it)

    g0 = u.grid
    if mu > 0.25 / g0.dr or mu < 4.0 / g0.r_max:
        raise ScaleOutOfRange(
            f"fitted scale mu={mu:.3e} outside the grid-resolved range "
            f"[{4.0 / g0.r_max:.3e}, {0.25 / g0.dr:.3e}]"
        )

    theta = theta % (2.0 * math.pi)
    e = complex(math.cos(-theta), math.sin(-theta))
    orbit = scaled(W, mu)
    if exact:
        g_prof = SumProfile([ScaledProfile(u.profile, amp=e), ScaledProfile(orbit, amp=-1.0)])
        g_field = RadialField(g0, g_prof.value(g0.nodes), g_prof)
        g_norm = math.sqrt(max(_inner_profiles(g_prof, g_prof, p, rule).real, 0.0))
    else:
        g_vals = e * u.values - orbit.value(g0.nodes)
        g_field = RadialField(g0, g_vals)
        g_norm = math.sqrt(h1a_norm_sq(g_field, p, warn_tail=False))

    return ModulationFit(
        theta=theta,
        mu=mu,
        g=g_field,
        delta=delta,
        g_norm=g_norm,
        in_window=True,
        ortho_residuals=(float(res[0]), float(res[1])),
        params=p,
    )


# ---------------------------------------------------------------------------
# linearized energy quadratic form and the spectral projection

def quadratic_form_F(
    h1: RadialField,
    h2: RadialField,
    p: PhysParams,
    bundle: GroundStateBundle,
    rule: HalfLineRule = DEFAULT_RULE,
) -> float:
    """(1/2)||h||_a^2 - (1/2) int W^(4/(d-2)) [ (d+2)/(d-2) h1^2 + h2^2 ].

    The two kernel directions are (0, W) (the elliptic equation itself)
    and (W1, 0) (differentiated scaling family); (W, 0) is the known
    negative direction.
    """
    W = GroundStateProfile(p)
    c = (p.d + 2.0) / (p.d - 2.0)
    d = p.d
    omega = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    quad = 0.5 * (_norm_sq(h1, p, rule) + _norm_sq(h2, p, rule))
    if h1.profile is not None and h2.profile is not None:
        breaks = sorted(set(h1.profile.breakpoints()) | set(h2.profile.breakpoints()))

        def dens(r):
            w4 = np.abs(W.value(r)) ** p.p_crit
            return (
                w4
                * (c * np.abs(h1.profile.value(r)) ** 2 + np.abs(h2.profile.value(r)) ** 2)
                * r ** (d - 1)
            )

        pot = omega * (rule.integrate_piecewise(dens, breaks) if breaks else rule.integrate(dens))
    else:
        wvals = np.abs(W.value(h1.grid.nodes)) ** p.p_crit
        dens = wvals * (c * np.abs(h1.values) ** 2 + np.abs(h2.values) ** 2)
        pot = float(np.dot(h1.grid.volume_weights, dens))
    return quad - 0.5 * pot


def project_Hperp(
    h1: RadialField,
    h2: RadialField,
    p: PhysParams,
    bundle: GroundStateBundle,
    rule: HalfLineRule = DEFAULT_RULE,
) -> Tuple[RadialField, RadialField]:
    """Remove the inner-product projections onto span{W, iW, W + r W'}.

    The real component loses its W and W + rW' parts, the imaginary
    component its W part (the iW direction).  Gram-Schmidt in the
    potential-adapted inner product; idempotent to roundoff.
    """
    W = GroundStateProfile(p)
    rW = SumProfile([W, _RTimesDerivative(W)])
    grid = h1.grid

    def proj_field(h: RadialField, directions: List[RadialProfile]) -> RadialField:
        # orthonormalize the directions, then subtract components
        basis: List[RadialProfile] = []
        for e in directions:
            e_cur: RadialProfile = e
            for b in basis:
                coef = _inner_profiles(e_cur, b, p, rule).real
                e_cur = SumProfile([e_cur, ScaledProfile(b, amp=-coef)])
            nrm = math.sqrt(max(_inner_profiles(e_cur, e_cur, p, rule).real, 1e-300))
            basis.append(ScaledProfile(e_cur, amp=1.0 / nrm))
        if h.profile is not None:
            out_prof: RadialProfile = h.profile
            for b in basis:
                coef = _inner_profiles(out_prof, b, p, rule).real
                out_prof = SumProfile([out_prof, ScaledProfile(b, amp=-coef)])
            return RadialField(grid, out_prof.value(grid.nodes), out_prof)
        out_vals = h.values.copy()
        for b in basis:
            coef = _inner_grid_vs_profile(RadialField(grid, out_vals), b, p).real
            out_vals = out_vals - coef * b.value(grid.nodes)
        return RadialField(grid, out_vals)

    return proj_field(h1, [W, rW]), proj_field(h2, [W])


class _RTimesDerivative(RadialProfile):
    """r * base'(r); helper for the scaling direction W + r W'."""

    def __init__(self, base: GroundStateProfile):
        self.base = base
        self.decay_pow = base.decay_pow

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return r * self.base.d1(r)

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        return self.base.d1(r) + r * self.base.d2(r)

    def d2(self, r):
        r = np.asarray(r, dtype=float)
        return 2.0 * self.base.d2(r) + r * self.base.d3(r)


# ---------------------------------------------------------------------------
# trajectory-level estimate monitors

class ModulationEstimates(NamedTuple):
    n_in_window: int
    ratio_pert: float        # max l_pert / delta^2
    ratio_scale: float       # max mu^(-beta(d-2)(d+1)/(d-1)) / delta^2
    ratio_mu_drift: float    # max |mu'/mu| / (mu^2 delta)
    degenerate: bool         # delta ~ 0 everywhere; ratios skipped


def modulation_estimates_check(
    times,
    fits: Sequence[object] | None = None,
    l_perts: Sequence[float] | None = None,
    p: PhysParams = None,
    bundle: GroundStateBundle = None,
    min_window: int = 10,
) -> ModulationEstimates:
    """Evaluate the near-orbit estimate ratios along a trajectory.

    Accepts either a trajectory record (anything with .times, .fits and
    .l_pert attributes, plus .params if p is omitted) or explicit lists.
    Requires at least min_window consecutive in-window fits.  mu' is taken
    by centered differences in time.  Snapshots with delta at roundoff are
    skipped (the estimates degenerate to 0/0 on an exact orbit); if all
    snapshots are degenerate the report says so instead of inventing
    ratios.
    """
    if fits is None and hasattr(times, "fits"):
        record = times
        times = record.times
        fits = record.fits
        l_perts = record.l_pert
        if p is None:
            p = record.params
    if fits is None or l_perts is None or p is None or bundle is None:
        raise TypeError("pass a trajectory record or explicit times/fits/l_perts with params and bundle")
    run_start = run_len = best_start = best_len = 0
    for i, f in enumerate(fits):
        if isinstance(f, ModulationFit) and f.in_window:
            if run_len == 0:
                run_start = i
            run_len += 1
            if run_len > best_len:
                best_start, best_len = run_start, run_len
        else:
            run_len = 0
    if best_len < min_window:
        raise ValueError(
            f"need at least {min_window} consecutive in-window fits, found {best_len}"
        )
    sl = slice(best_start, best_start + best_len)
    ts = np.asarray(times[sl], dtype=float)
    window_fits: List[ModulationFit] = list(fits[sl])
    lps = np.asarray(l_perts[sl], dtype=float)
    mus = np.array([f.mu for f in window_fits])
    deltas = np.array([f.delta for f in window_fits])
    floor = 1e-12 * bundle.kinetic_sq
    live = deltas > floor
    if not np.any(live):
        return ModulationEstimates(best_len, 0.0, 0.0, 0.0, True)
    expo = p.beta * (p.d - 2) * (p.d + 1) / (p.d - 1)
    r_pert = float(np.max(lps[live] / deltas[live] ** 2))
    r_scale = float(np.max(mus[live] ** (-expo) / deltas[live] ** 2))
    dmu = np.gradient(mus, ts)
    drift = np.abs(dmu / mus) / (mus**2 * np.maximum(deltas, floor))
    r_drift = float(np.max(drift[live]))
    return ModulationEstimates(best_len, r_pert, r_scale, r_drift, False)


def coercivity_sample(
    p: PhysParams,
    bundle: GroundStateBundle,
    n_samples: int = 200,
    seed: int = 0,
    rule: HalfLineRule = DEFAULT_RULE,
) -> Tuple[float, np.ndarray]:
    """Sample F(h)/||h||^2 over random projected pairs.

    Returns (min ratio, all ratios).  A positive minimum is the sampling
    version of coercivity on the orthogonal complement; the constant is
    whatever the samples give, no sharp value is claimed.
    """
    from .profiles import BumpProfile, GaussianProfile

    rng = np.random.default_rng(seed)
    grid = bundle.w.grid
    ratios = np.empty(n_samples)
    for i in range(n_samples):
        def rand_profile():
            parts: List[RadialProfile] = []
            for _ in range(rng.integers(2, 4)):
                kind = rng.integers(0, 3)
                amp = rng.uniform(-1.0, 1.0)
                scale = rng.uniform(0.3, 4.0)
                if kind == 0:
                    parts.append(GaussianProfile(amp, scale))
                elif kind == 1:
                    parts.append(GaussianProfile(amp, scale, k=2))
                else:
                    parts.append(BumpProfile(amp, scale))
            return SumProfile(parts)

        prof1, prof2 = rand_profile(), rand_profile()
        h1 = RadialField(grid, prof1.value(grid.nodes), prof1)
        h2 = RadialField(grid, prof2.value(grid.nodes), prof2)
        q1, q2 = project_Hperp(h1, h2, p, bundle, rule)
        nrm = _norm_sq(q1, p, rule) + _norm_sq(q2, p, rule)
        if nrm < 1e-14:
            ratios[i] = np.nan
            continue
        ratios[i] = quadratic_form_F(q1, q2, p, bundle, rule) / nrm
    ratios = ratios[np.isfinite(ratios)]
    return float(np.min(ratios)), ratios
