"""Closed-form radial profiles with analytic derivatives.

Fields built from these profiles can be resampled exactly under scaling
and integrated on the whole half line, which matters because the
ground-state family decays too slowly for a truncated grid to capture
its norms.  Every profile exposes value/d1/d2 (complex-valued, vectorised
over radii), a power-law decay exponent at infinity (-inf for compact or
super-polynomial decay), and breakpoints where it is only piecewise
smooth.
"""

from __future__ import annotations

import math
from typing import List, Sequence

import numpy as np

from .params import PhysParams

__all__ = [
    "RadialProfile",
    "GroundStateProfile",
    "GeneratorProfile",
    "GaussianProfile",
    "BumpProfile",
    "SmoothWindow",
    "ScaledProfile",
    "SumProfile",
    "ProductProfile",
    "scale_profile",
]


class RadialProfile:
    """Base class; subclasses fill in value/d1/d2 and metadata."""

    #: |value| ~ r**decay_pow as r -> inf; -inf means faster than any power.
    decay_pow: float = -math.inf

    def value(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def d1(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def d2(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def breakpoints(self) -> List[float]:
        return []

    # profile algebra ----------------------------------------------------
    def __mul__(self, c) -> "RadialProfile":
        return ScaledProfile(self, amp=complex(c), rate=1.0)

    __rmul__ = __mul__

    def __add__(self, other: "RadialProfile") -> "RadialProfile":
        return SumProfile([self, other])


class GroundStateProfile(RadialProfile):
    """The explicit radial static solution of L_a W = W^((d+2)/(d-2)).

    W(r) = [d(d-2) beta^2]^((d-2)/4) * [r^(beta-1) / (1+r^(2 beta))]^((d-2)/2)

    Derivatives come from the log-derivative recursion for
    W = A r^m (1+y)^(-k) with y = r^(2 beta), m = (beta-1)(d-2)/2,
    k = (d-2)/2, which keeps the r -> 0 cusp exact.
    """

    def __init__(self, p: PhysParams):
        self.p = p
        d, beta = p.d, p.beta
        self.amp = (d * (d - 2) * beta**2) ** ((d - 2) / 4.0)
        self.m = (beta - 1.0) * (d - 2) / 2.0
        self.k = (d - 2) / 2.0
        self.two_beta = 2.0 * beta
        self.decay_pow = -(d - 2) * (beta + 1.0) / 2.0

    def _w_u(self, r):
        with np.errstate(over="ignore"):
            y = r**self.two_beta
        u = y / (1.0 + y)
        u = np.where(np.isfinite(y), u, 1.0)
        with np.errstate(over="ignore", invalid="ignore"):
            w = self.amp * r**self.m * (1.0 + y) ** (-self.k)
            w_big = self.amp * r ** (self.m - self.two_beta * self.k)
        w = np.where(np.isfinite(y), w, w_big)
        return w, u

    def value(self, r):
        w, _ = self._w_u(np.asarray(r, dtype=float))
        return w.astype(complex)

    def _pqu(self, r):
        w, u = self._w_u(np.asarray(r, dtype=float))
        tb, k = self.two_beta, self.k
        p = self.m - tb * k * u
        q = p * p - p - tb * tb * k * u * (1.0 - u)
        return w, u, p, q

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        w, _, p, _ = self._pqu(r)
        return (w * p / r).astype(complex)

    def d2(self, r):
        r = np.asarray(r, dtype=float)
        w, _, _, q = self._pqu(r)
        return (w * q / (r * r)).astype(complex)

    def d3(self, r):
        r = np.asarray(r, dtype=float)
        w, u, p, q = self._pqu(r)
        tb, k = self.two_beta, self.k
        # r*Q'(r) = -(2 beta)^2 k u(1-u) [(2P-1) + 2 beta (1-2u)]
        rqprime = -tb * tb * k * u * (1.0 - u) * ((2.0 * p - 1.0) + tb * (1.0 - 2.0 * u))
        return (w * (p * q + rqprime - 2.0 * q) / (r**3)).astype(complex)


class GeneratorProfile(RadialProfile):
    """Scaling-direction profile (d-2)/2 * W + r * W'(r) for the ground state."""

    def __init__(self, ground: GroundStateProfile):
        self.g = ground
        self.c = (ground.p.d - 2) / 2.0
        self.decay_pow = ground.decay_pow

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return self.c * self.g.value(r) + r * self.g.d1(r)

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        return (self.c + 1.0) * self.g.d1(r) + r * self.g.d2(r)

    def d2(self, r):
        r = np.asarray(r, dtype=float)
        return (self.c + 2.0) * self.g.d2(r) + r * self.g.d3(r)


class GaussianProfile(RadialProfile):
    """amp * (r/s)^k * exp(-(r/s)^2 / 2) with even k (k=0 is the plain Gaussian)."""

    def __init__(self, amp: complex = 1.0, scale: float = 1.0, k: int = 0):
        if k < 0 or k % 2:
            raise ValueError("k must be a nonnegative even integer")
        self.amp = complex(amp)
        self.s = float(scale)
        self.k = int(k)

    def _x(self, r):
        return np.asarray(r, dtype=float) / self.s

    def value(self, r):
        x = self._x(r)
        return self.amp * x**self.k * np.exp(-0.5 * x * x)

    def d1(self, r):
        x = self._x(r)
        base = np.exp(-0.5 * x * x) / self.s
        if self.k == 0:
            return self.amp * (-x) * base
        return self.amp * x ** (self.k - 1) * (self.k - x * x) * base

    def d2(self, r):
        x = self._x(r)
        base = np.exp(-0.5 * x * x) / self.s**2
        k = self.k
        if k == 0:
            return self.amp * (x * x - 1.0) * base
        if k == 2:
            return self.amp * (2.0 - 5.0 * x * x + x**4) * base
        return self.amp * x ** (k - 2) * (k * (k - 1) - (2 * k + 1) * x * x + x**4) * base


class BumpProfile(RadialProfile):
    """Smooth compactly supported bump amp * exp(1 - 1/(1-(r/s)^2)) on r < s."""

    def __init__(self, amp: complex = 1.0, scale: float = 1.0):
        self.amp = complex(amp)
        self.s = float(scale)

    def _parts(self, r):
        x = np.asarray(r, dtype=float) / self.s
        inside = x < 1.0 - 1e-12
        xs = np.where(inside, x, 0.0)
        one = 1.0 - xs * xs
        phi = np.where(inside, np.exp(1.0 - 1.0 / one), 0.0)
        return x, xs, one, phi, inside

    def value(self, r):
        _, _, _, phi, _ = self._parts(r)
        return self.amp * phi

    def d1(self, r):
        _, xs, one, phi, inside = self._parts(r)
        g1 = -2.0 * xs / one**2
        return self.amp * np.where(inside, phi * g1, 0.0) / self.s

    def d2(self, r):
        _, xs, one, phi, inside = self._parts(r)
        g1 = -2.0 * xs / one**2
        g2 = -2.0 * (1.0 + 3.0 * xs * xs) / one**3
        return self.amp * np.where(inside, phi * (g1 * g1 + g2), 0.0) / self.s**2

    def breakpoints(self):
        return [self.s]


class SmoothWindow(RadialProfile):
    """C^3 cutoff: 1 on [0, r1], polynomial smoothstep down to 0 on [r1, r2]."""

    def __init__(self, r1: float, r2: float):
        if not 0 < r1 < r2:
            raise ValueError("need 0 < r1 < r2")
        self.r1, self.r2 = float(r1), float(r2)

    def _t(self, r):
        r = np.asarray(r, dtype=float)
        return np.clip((r - self.r1) / (self.r2 - self.r1), 0.0, 1.0)

    def value(self, r):
        t = self._t(r)
        s = t**4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t**3)
        return (1.0 - s).astype(complex)

    def d1(self, r):
        t = self._t(r)
        ds = t**3 * (140.0 - 420.0 * t + 420.0 * t * t - 140.0 * t**3)
        mid = (t > 0) & (t < 1)
        return np.where(mid, -ds / (self.r2 - self.r1), 0.0).astype(complex)

    def d2(self, r):
        t = self._t(r)
        d2s = t * t * (420.0 - 1680.0 * t + 2100.0 * t * t - 840.0 * t**3)
        mid = (t > 0) & (t < 1)
        return np.where(mid, -d2s / (self.r2 - self.r1) ** 2, 0.0).astype(complex)

    def breakpoints(self):
        return [self.r1, self.r2]


class ScaledProfile(RadialProfile):
    """amp * base(rate * r); covers phases, amplitudes and dilations."""

    def __init__(self, base: RadialProfile, amp: complex = 1.0, rate: float = 1.0):
        # collapse nested scalings so profile algebra stays flat
        if isinstance(base, ScaledProfile):
            amp = complex(amp) * base.amp
            rate = float(rate) * base.rate
            base = base.base
        self.base = base
        self.amp = complex(amp)
        self.rate = float(rate)
        self.decay_pow = base.decay_pow

    def value(self, r):
        return self.amp * self.base.value(self.rate * np.asarray(r, dtype=float))

    def d1(self, r):
        return self.amp * self.rate * self.base.d1(self.rate * np.asarray(r, dtype=float))

    def d2(self, r):
        return self.amp * self.rate**2 * self.base.d2(self.rate * np.asarray(r, dtype=float))

    def breakpoints(self):
        return [b / self.rate for b in self.base.breakpoints()]


class SumProfile(RadialProfile):
    def __init__(self, parts: Sequence[RadialProfile]):
        flat: List[RadialProfile] = []
        for p in parts:
            if isinstance(p, SumProfile):
                flat.extend(p.parts)
            else:
                flat.append(p)
        self.parts = flat
        self.decay_pow = max(p.decay_pow for p in flat)

    def value(self, r):
        return sum(p.value(r) for p in self.parts)

    def d1(self, r):
        return sum(p.d1(r) for p in self.parts)

    def d2(self, r):
        return sum(p.d2(r) for p in self.parts)

    def breakpoints(self):
        out: List[float] = []
        for p in self.parts:
            out.extend(p.breakpoints())
        return sorted(set(out))


class ProductProfile(RadialProfile):
    """Pointwise product, e.g. a windowed ground state."""

    def __init__(self, f: RadialProfile, g: RadialProfile):
        self.f, self.g = f, g
        self.decay_pow = f.decay_pow + g.decay_pow

    def value(self, r):
        return self.f.value(r) * self.g.value(r)

    def d1(self, r):
        return self.f.d1(r) * self.g.value(r) + self.f.value(r) * self.g.d1(r)

    def d2(self, r):
        return (
            self.f.d2(r) * self.g.value(r)
            + 2.0 * self.f.d1(r) * self.g.d1(r)
            + self.f.value(r) * self.g.d2(r)
        )

    def breakpoints(self):
        return sorted(set(self.f.breakpoints()) | set(self.g.breakpoints()))


def scale_profile(profile: RadialProfile, s: float, power: float, phase: float = 0.0) -> ScaledProfile:
    """Return e^(i phase) s^power * profile(s r)."""
    amp = s**power * complex(math.cos(phase), math.sin(phase))
    return ScaledProfile(profile, amp=amp, rate=float(s))
