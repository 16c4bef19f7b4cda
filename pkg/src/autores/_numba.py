"""JIT shim: numba-accelerated kernels with a pure-NumPy fallback.

The fallback is the same source executed as plain Python. It is selected by
setting ``AUTORES_NO_NUMBA=1`` (or ``NUMBA_DISABLE_JIT``), or automatically if
numba is not importable. ``benchmarks/bench_kernels.py`` times both paths.
"""

import os


def _numba_wanted() -> bool:
    if os.environ.get("AUTORES_NO_NUMBA", "").strip() not in ("", "0"):
        return False
    if os.environ.get("NUMBA_DISABLE_JIT", "").strip() not in ("", "0"):
        return False
    return True


USE_NUMBA = False
if _numba_wanted():
    try:
        import numba  # noqa: F401
        USE_NUMBA = True
    except ImportError:
        USE_NUMBA = False


def maybe_njit(*args, **kwargs):
    """``numba.njit`` when enabled, identity decorator otherwise.

    Usable bare (``@maybe_njit``) or with options (``@maybe_njit(cache=True)``).
    """
    if args and callable(args[0]) and not kwargs:
        func = args[0]
        if USE_NUMBA:
            import numba
            return numba.njit(func)
        return func

    def deco(func):
        if USE_NUMBA:
            import numba
            return numba.njit(func, **kwargs)
        return func

    return deco
