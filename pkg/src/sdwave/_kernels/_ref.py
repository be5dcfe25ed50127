"""Pure numpy/scipy kernels: fallback backend for the compiled core.

Same contracts as `_core`; the recurrences run through scipy's C filter
implementation so this path stays usable at production sizes.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded
from scipy.signal import lfilter

BACKEND = "numpy"


def _cell_weights(a: float, h: float) -> tuple:
    """Exact integrals of the linear interpolant against exp(a*r) on [0, h].

    Returns (c0, c1) with contribution = c1 * H_near + (c0 - c1) * H_far in
    the recurrence orientation.  Series branch avoids cancellation for small
    |a*h|.
    """
    z = a * h
    if abs(z) < 1e-3:
        c0 = h * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0)
        c1 = h * (0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0)
    else:
        em = np.expm1(z)
        E = em + 1.0
        c0 = em / a
        c1 = (h * E / a - em / (a * a)) / h
    return c0, c1


def exp_conv_pair(H, h: float, g1: float, g2: float,
                  h_left: float, h_right: float):
    """Two-sided exponential convolution of grid samples H.

    Computes I_minus(x_i) = integral_{-inf}^{x_i} exp(g1 (x_i - s)) H(s) ds
    and its mirrored right-sided counterpart with rate g2, treating H as its
    linear interpolant on the grid and as the constants h_left / h_right
    beyond it (exact tails).  Returns (I_minus + I_plus) / (g2 - g1).
    Requires g1 < 0 < g2.
    """
    H = np.asarray(H, dtype=float)
    n = H.shape[0]
    if n < 2:
        raise ValueError("need at least two grid samples")
    c0, c1 = _cell_weights(g1, h)
    E1 = np.exp(g1 * h)
    x = c1 * H[:-1] + (c0 - c1) * H[1:]
    i0 = h_left / (-g1)
    body, _ = lfilter([1.0], [1.0, -E1], x, zi=np.array([E1 * i0]))
    i_minus = np.empty(n)
    i_minus[0] = i0
    i_minus[1:] = body

    d0, d1 = _cell_weights(-g2, h)
    E2 = np.exp(-g2 * h)
    y = (d1 * H[1:] + (d0 - d1) * H[:-1])[::-1]
    j0 = h_right / g2
    body2, _ = lfilter([1.0], [1.0, -E2], y, zi=np.array([E2 * j0]))
    i_plus = np.empty(n)
    i_plus[-1] = j0
    i_plus[:-1] = body2[::-1]
    return (i_minus + i_plus) / (g2 - g1)


def solve_tridiagonal(lower, diag, upper, rhs):
    """Solve the tridiagonal system with the given bands (lower/upper offset 1)."""
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[: n - 1]
    ab[1, :] = diag
    ab[2, : n - 1] = lower[: n - 1]
    return solve_banded((1, 1), ab, rhs, overwrite_ab=True, check_finite=False)
