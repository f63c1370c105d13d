"""Kernel backend selection.

The hot numeric loops exist twice: a Cython extension compiled at install
time and a pure-Python twin with identical arithmetic. The compiled one is
preferred when importable. Set ``ROUGHSEG_BACKEND=python`` or
``ROUGHSEG_BACKEND=native`` to force a choice at import time, or call
:func:`use_backend` from code (testing/benchmark hook, not thread-safe).

Call sites must access kernels as module attributes
(``from roughseg import _kernels as K; K.hsi_distance(...)``) so that
:func:`use_backend` rebinding takes effect everywhere.
"""

from __future__ import annotations

import os

from roughseg._kernels import _pure
from roughseg.exceptions import ParameterError

_FUNCTIONS = (
    "rgb_to_hsi_pixel",
    "rgb_to_hsi_planes",
    "hsi_distance",
    "population_counts",
    "max_hue_index",
    "cluster_sq_dev",
    "classify_pixels",
)


def _load(name: str):
    if name == "python":
        return _pure
    if name == "native":
        from roughseg._kernels import _native

        return _native
    raise ParameterError(f"unknown kernel backend {name!r} (expected 'native' or 'python')")


def _select_initial():
    forced = os.environ.get("ROUGHSEG_BACKEND")
    if forced:
        return _load(forced)
    try:
        from roughseg._kernels import _native

        return _native
    except ImportError:
        return _pure


_impl = _select_initial()


def backend_name() -> str:
    """Name of the active backend: 'native' or 'python'."""
    return _impl.BACKEND


def use_backend(name: str) -> str:
    """Rebind all kernels to the named backend and return its name."""
    global _impl
    _impl = _load(name)
    g = globals()
    for fn in _FUNCTIONS:
        g[fn] = getattr(_impl, fn)
    return _impl.BACKEND


for _fn in _FUNCTIONS:
    globals()[_fn] = getattr(_impl, _fn)
del _fn
