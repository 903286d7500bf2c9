"""Backend selection for the hot loops.

The compiled numba kernels are used by default.  Setting the environment
variable ``CORRMATE_NO_NUMBA=1`` selects the pure-numpy implementations,
which share the same signatures.
"""

import os

from . import _numpy

BACKEND = "numpy"
_impl = _numpy

if os.environ.get("CORRMATE_NO_NUMBA", "").strip().lower() not in ("1", "true", "yes"):
    try:
        from . import _numba

        _impl = _numba
        BACKEND = "numba"
    except ImportError:  # pragma: no cover
        pass


def get(name: str = None):
    """Kernel module for ``name`` ('numba' or 'numpy'), or the active one."""
    if name is None:
        return _impl
    if name == "numpy":
        return _numpy
    if name == "numba":
        from . import _numba

        return _numba
    raise ValueError(f"unknown backend {name!r}")


def set_threads(count: int) -> None:
    if BACKEND == "numba" and count and count > 0:
        import numba

        numba.set_num_threads(min(count, numba.config.NUMBA_NUM_THREADS))
