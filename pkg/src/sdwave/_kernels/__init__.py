"""Hot numerical kernels with a compiled core and a pure fallback.

The compiled extension is preferred when importable; setting the
environment variable SDWAVE_PURE_PYTHON=1 forces the numpy/scipy path.
`BACKEND` records which one is active.
"""
import os

if os.environ.get("SDWAVE_PURE_PYTHON", "") not in ("", "0"):
    from ._ref import BACKEND, exp_conv_pair, solve_tridiagonal
else:
    try:
        from ._core import BACKEND, exp_conv_pair, solve_tridiagonal
    except ImportError:
        from ._ref import BACKEND, exp_conv_pair, solve_tridiagonal

__all__ = ["BACKEND", "exp_conv_pair", "solve_tridiagonal"]
