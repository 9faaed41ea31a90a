"""Backend switch for the compiled kernels.

Numba is used when importable unless ``QPCASIMIR_DISABLE_NUMBA`` is set to a
truthy value, in which case the pure-numpy implementations are selected.
"""
import os

_FLAG = os.environ.get("QPCASIMIR_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG not in ("", "0", "false", "no")

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not DISABLED_BY_ENV


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    The compiled variant is always built when numba exists so that benchmarks
    can compare both paths; ``USE_NUMBA`` only controls which one the library
    dispatches to.
    """
    kwargs.setdefault("cache", True)
    if HAS_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]):
        return args[0]
    return lambda f: f


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
