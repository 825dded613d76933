"""Kernel dispatch: compiled extension when available, numpy otherwise.

Set ``DSGE_SELECT_PURE_PYTHON=1`` to force the numpy implementations.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("DSGE_SELECT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py


def _c(a, ndim):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != ndim:
        raise ValueError(f"expected {ndim}-d array, got shape {a.shape}")
    return a


def _resolve(impl):
    """``None`` -> active backend; ``"python"`` / ``"cython"`` -> that backend."""
    if impl is None:
        return _impl
    if impl == "python":
        return _kernels_py
    if impl == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {impl!r}")


def simulate_lss(r, q, p, g, ks, kj, eps, s0, impl=None):
    mod = _resolve(impl)
    return mod.simulate_lss(_c(r, 2), _c(q, 2), _c(p, 2), _c(g, 2), _c(ks, 1), _c(kj, 1),
                            _c(eps, 2), _c(s0, 1))


def forward_affine(f, h, s0, impl=None):
    mod = _resolve(impl)
    return mod.forward_affine(_c(f, 3), _c(h, 2), _c(s0, 1))
