"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise (or when
``CUBEPERC_PURE=1`` is set) the numpy/scipy twins in ``_fallback`` are used.
Both expose identical functions and produce identical results.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _fallback


def _load() -> ModuleType:
    if os.environ.get("CUBEPERC_PURE", "") not in ("", "0"):
        return _fallback
    try:
        from . import _kernels
    except ImportError:
        return _fallback
    return _kernels


_impl = _load()
BACKEND: str = _impl.BACKEND


def use(backend: str) -> None:
    """Switch backend at runtime ("cython" or "python"); for tests and benchmarks."""
    global _impl, BACKEND
    if backend == "python":
        _impl = _fallback
    elif backend == "cython":
        from . import _kernels

        _impl = _kernels
    else:
        raise ValueError(f"unknown backend {backend!r}")
    BACKEND = _impl.BACKEND


def available() -> list[str]:
    out = ["python"]
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return out
    return ["cython", *out]


def philox_one(seed, index):
    return _impl.philox_one(seed, index)


def edge_draws(seed, indices):
    return _impl.edge_draws(seed, indices)


def open_table(d, seed, thr, full, verts):
    return _impl.open_table(d, seed, thr, full, verts)


def label_components(d, seed, thr, full):
    return _impl.label_components(d, seed, thr, full)


def explore(d, seed, thr, full, start, cap):
    return _impl.explore(d, seed, thr, full, start, cap)


def oracle_distance(d, seed, thr, full, src, dst, max_dist):
    return _impl.oracle_distance(d, seed, thr, full, src, dst, max_dist)


def bfs_csr(indptr, indices, src):
    return _impl.bfs_csr(indptr, indices, src)


def eccentricities(indptr, indices, sources):
    return _impl.eccentricities(indptr, indices, sources)


def lazy_step(indptr, indices, inv2deg, mu):
    return _impl.lazy_step(indptr, indices, inv2deg, mu)
