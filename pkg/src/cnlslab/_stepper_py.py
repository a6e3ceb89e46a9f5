"""NumPy/SciPy reference implementation of the time-step kernels.

Same contract as the compiled extension (see _stepper.pyx); selected at
import time by stepper.py when the extension is unavailable or disabled.
The tridiagonal solve goes through LAPACK's banded driver, everything
else is vectorised numpy.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

BACKEND_NAME = "python"


def nonlinear_phase(u: np.ndarray, tau: float, pc: float, pp: float) -> None:
    """In-place u *= exp(i tau (|u|^pc - |u|^pp)); the exact nonlinear flow."""
    absu = np.abs(u)
    phase = tau * (absu**pc - absu**pp)
    u *= np.cos(phase) + 1j * np.sin(phase)


class CrankNicolsonSolver:
    """Precomputed Crank-Nicolson sweep for (I + i dt/2 L) u+ = (I - i dt/2 L) u."""

    def __init__(self, lo: np.ndarray, di: np.ndarray, up: np.ndarray, dt: float):
        n = di.shape[0]
        alpha = 0.5j * dt
        self._blo = -alpha * lo  # B sub-diagonal (entries 1..n-1)
        self._bdi = 1.0 - alpha * di
        self._bup = -alpha * up  # B super-diagonal (entries 0..n-2)
        ab = np.zeros((3, n), dtype=complex)
        ab[0, 1:] = alpha * up[:-1]
        ab[1, :] = 1.0 + alpha * di
        ab[2, :-1] = alpha * lo[1:]
        self._ab = ab

    def solve(self, u: np.ndarray) -> np.ndarray:
        rhs = self._bdi * u
        rhs[:-1] += self._bup[:-1] * u[1:]
        rhs[1:] += self._blo[1:] * u[:-1]
        return solve_banded((1, 1), self._ab, rhs, overwrite_b=True, check_finite=False)


def strang_step(u: np.ndarray, solver: CrankNicolsonSolver, dt: float,
                pc: float, pp: float) -> np.ndarray:
    """One full Strang step; returns a new array."""
    v = u.copy()
    nonlinear_phase(v, 0.5 * dt, pc, pp)
    v = solver.solve(v)
    nonlinear_phase(v, 0.5 * dt, pc, pp)
    return v
