"""Cell-centered radial grid, quadrature, differencing, and field container.

The grid never samples r = 0: nodes sit at (i + 1/2) dr, which keeps a/r^2
and the r^-sigma ground-state cusp finite at every node.  Midpoint
quadrature treats the mildly singular integrands near the origin uniformly.

Fields may carry an analytic profile; operations that can use it
(rescaling, whole-line norms) do so, everything else works on samples.
Norms computed here integrate over [0, r_max] only -- for slowly decaying
fields such as the ground-state family this is the norm of the truncated
field, which is smaller than the whole-line value.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .params import PhysParams
from .profiles import RadialProfile

__all__ = [
    "RadialGrid",
    "RadialField",
    "CorruptedFieldError",
    "make_grid",
    "integrate",
    "mass",
    "h1a_norm_sq",
    "lebesgue_norm",
    "apply_La",
    "radial_derivative",
    "sample_profile",
    "write_field_csv",
    "read_field_csv",
]

#: static-functional defaults; chosen for desk-scale runtimes
DEFAULT_RMAX = 60.0
DEFAULT_N = 16384

FIELD_SCHEMA = "cnlslab/field/v1"


class CorruptedFieldError(ValueError):
    """Raised when samples contain NaN/Inf."""


@dataclass(frozen=True)
class RadialGrid:
    r_max: float
    n: int
    d: int
    dr: float = field(init=False)
    nodes: np.ndarray = field(init=False)
    omega: float = field(init=False)

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("grid too small")
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        if self.d not in (3, 4, 5):
            raise ValueError("d must be one of 3, 4, 5")
        dr = self.r_max / self.n
        object.__setattr__(self, "dr", dr)
        object.__setattr__(self, "nodes", (np.arange(self.n) + 0.5) * dr)
        object.__setattr__(self, "omega", 2.0 * math.pi ** (self.d / 2.0) / math.gamma(self.d / 2.0))
        # cell-volume weights omega * r^(d-1) * dr, shared by every quadrature
        object.__setattr__(self, "_w", self.omega * self.nodes ** (self.d - 1) * dr)

    @property
    def volume_weights(self) -> np.ndarray:
        return self._w


def make_grid(p: PhysParams, r_max: float = DEFAULT_RMAX, n: int = DEFAULT_N) -> RadialGrid:
    return RadialGrid(r_max=float(r_max), n=int(n), d=p.d)


@dataclass
class RadialField:
    grid: RadialGrid
    values: np.ndarray
    profile: Optional[RadialProfile] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got {v.shape}")
        self.values = v

    def check_finite(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise CorruptedFieldError("field contains non-finite samples")

    def copy(self) -> "RadialField":
        return RadialField(self.grid, self.values.copy(), self.profile)

    def scaled(self, c: complex) -> "RadialField":
        prof = None if self.profile is None else c * self.profile
        return RadialField(self.grid, c * self.values, prof)


def sample_profile(profile: RadialProfile, grid: RadialGrid) -> RadialField:
    return RadialField(grid, profile.value(grid.nodes), profile)


def integrate(f: RadialField | np.ndarray, grid: RadialGrid | None = None) -> float:
    """Midpoint rule for int_{R^d} f dx with radial real-valued f."""
    if isinstance(f, RadialField):
        grid = f.grid
        vals = f.values
    else:
        vals = np.asarray(f)
    if grid is None:
        raise ValueError("grid required when integrating raw samples")
    if not np.all(np.isfinite(vals)):
        raise CorruptedFieldError("non-finite samples in integrand")
    if np.iscomplexobj(vals):
        if np.max(np.abs(vals.imag)) > 1e-12 * max(1.0, np.max(np.abs(vals.real))):
            raise ValueError("integrate expects a real-valued integrand")
        vals = vals.real
    return float(np.dot(grid.volume_weights, vals))


def mass(u: RadialField) -> float:
    u.check_finite()
    return float(np.dot(u.grid.volume_weights, np.abs(u.values) ** 2))


def radial_derivative(u: RadialField, p: PhysParams) -> np.ndarray:
    """Second-order d/dr of the samples.

    Interior nodes use centered differences.  The innermost node uses the
    even-extension ghost u(-dr/2) := u(dr/2) when a = 0; for a < 0 the
    ground state carries an r^-sigma cusp which is not even-extendable, so
    a one-sided second-order stencil is used instead.  The outer node is
    always one-sided.
    """
    v = u.values
    dr = u.grid.dr
    du = np.empty_like(v)
    du[1:-1] = (v[2:] - v[:-2]) / (2.0 * dr)
    if p.a == 0.0:
        du[0] = (v[1] - v[0]) / (2.0 * dr)
    else:
        du[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dr)
    du[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dr)
    return du


def radial_derivative4(values: np.ndarray, dr: float) -> np.ndarray:
    """Fourth-order interior stencil; used by the virial monitors."""
    v = values
    du = np.empty_like(v)
    du[2:-2] = (-v[4:] + 8.0 * v[3:-1] - 8.0 * v[1:-3] + v[:-4]) / (12.0 * dr)
    du[1] = (v[2] - v[0]) / (2.0 * dr)
    du[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dr)
    du[-2] = (v[-1] - v[-3]) / (2.0 * dr)
    du[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dr)
    return du


def h1a_norm_sq(u: RadialField, p: PhysParams, warn_tail: bool = True) -> float:
    """Quadratic form int (|d_r u|^2 + a |u|^2 / r^2) over the grid domain.

    Positive for Hardy-admissible a; a tiny negative value is clipped, a
    substantial one signals an inadmissible a or broken discretization.
    """
    u.check_finite()
    if warn_tail:
        tail = np.max(np.abs(u.values[-4:]))
        scale = np.max(np.abs(u.values))
        if scale > 0 and tail > 1e-4 * scale:
            warnings.warn(
                "field does not decay at r_max; the truncated-domain norm "
                "will significantly under-report the whole-line value",
                stacklevel=2,
            )
    du = radial_derivative(u, p)
    r = u.grid.nodes
    dens = np.abs(du) ** 2 + p.a * np.abs(u.values) ** 2 / r**2
    val = float(np.dot(u.grid.volume_weights, dens))
    if val < -1e-10 * max(1.0, float(np.dot(u.grid.volume_weights, np.abs(du) ** 2))):
        raise ValueError(
            f"quadratic form is negative ({val}); a={p.a} is below the "
            "Hardy-admissible range or the discretization is broken"
        )
    return max(val, 0.0)


def lebesgue_norm(u: RadialField, q: float) -> float:
    """(int |u|^q)^(1/q) over the grid domain."""
    if q < 1:
        raise ValueError("q must be >= 1")
    u.check_finite()
    return float(np.dot(u.grid.volume_weights, np.abs(u.values) ** q)) ** (1.0 / q)


def apply_La(u: RadialField, p: PhysParams) -> RadialField:
    """-u'' - (d-1)/r u' + a u / r^2 with the standard second-order stencil.

    Boundary handling mirrors radial_derivative: even-extension ghost at
    the origin side for a = 0, one-sided stencils for a < 0, Dirichlet 0
    beyond r_max.  This is the diagnostic form of the operator; time
    evolution uses the conservative flux form (see stepper).
    """
    v = u.values
    r = u.grid.nodes
    dr = u.grid.dr
    d = p.d

    upp = np.empty_like(v)
    upr = np.empty_like(v)
    upp[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / dr**2
    upr[1:-1] = (v[2:] - v[:-2]) / (2.0 * dr)
    # outer boundary: Dirichlet ghost value 0 beyond r_max
    upp[-1] = (0.0 - 2.0 * v[-1] + v[-2]) / dr**2
    upr[-1] = (0.0 - v[-2]) / (2.0 * dr)
    if p.a == 0.0:
        ghost = v[0]  # even extension across r = 0
        upp[0] = (v[1] - 2.0 * v[0] + ghost) / dr**2
        upr[0] = (v[1] - ghost) / (2.0 * dr)
    else:
        # one-sided second-order stencils (cusp is not even-extendable)
        upp[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / dr**2
        upr[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dr)

    out = -upp - (d - 1) / r * upr + p.a * v / r**2
    return RadialField(u.grid, out)


def write_field_csv(path, u: RadialField) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: {FIELD_SCHEMA}\n")
        w = csv.writer(fh)
        w.writerow(["r", "re", "im"])
        for r, v in zip(u.grid.nodes, u.values):
            w.writerow([f"{r:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def read_field_csv(path, grid: RadialGrid) -> RadialField:
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("r,"):
                continue
            parts = line.strip().split(",")
            if len(parts) == 3:
                rows.append((float(parts[1]), float(parts[2])))
    if len(rows) != grid.n:
        raise ValueError(f"field file has {len(rows)} samples, grid expects {grid.n}")
    vals = np.array([complex(re, im) for re, im in rows])
    return RadialField(grid, vals)
