"""JIT compilation switch for the numeric hot kernels.

Kernels decorated with :func:`maybe_jit` are compiled with numba when it is
available, unless the environment variable ``SHADOWHEIGHT_JIT`` is set to
``0``/``off``/``false``. The pure-NumPy fallback runs the identical Python
source, so both paths stay in lockstep; ``benchmarks/bench_jit.py`` compares
them. The flag is read at import time because decoration happens at import.
"""
import os
import warnings

try:
    import numba
except ImportError:
    numba = None

_FALSY = {"0", "off", "false", "no"}
_TRUTHY = {"1", "on", "true", "yes"}


def _requested() -> bool:
    flag = os.environ.get("SHADOWHEIGHT_JIT", "").strip().lower()
    if flag in _FALSY:
        return False
    if flag in _TRUTHY:
        if numba is None:
            warnings.warn("SHADOWHEIGHT_JIT=1 requested but numba is not importable; "
                          "falling back to pure NumPy", RuntimeWarning)
            return False
        return True
    return numba is not None


JIT_ENABLED = _requested()


def maybe_jit(func):
    """Compile ``func`` with numba when JIT is enabled, else return it unchanged."""
    if JIT_ENABLED:
        return numba.njit(cache=True)(func)
    return func
