"""Backend selection for the panel-interaction kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``CPTSIM_PURE_PYTHON`` is set to a truthy value, the
NumPy implementation is used. Both produce the same numbers to roundoff.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

_compiled = None
if os.environ.get("CPTSIM_PURE_PYTHON", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def available_backends() -> list[str]:
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return ["python"]
    return ["cython", "python"]


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (default: the active backend)."""
    name = name or BACKEND
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")


def _prep(*arrays):
    return [np.ascontiguousarray(a, dtype=np.float64) for a in arrays]


def potential_block(targets, mesh, far_factor=3.0, backend=None):
    mod = get_backend(backend)
    args = _prep(targets, mesh.centroid, mesh.u, mesh.v, mesh.normal, mesh.half_u, mesh.half_v)
    return mod.potential_block(*args, far_factor)


def field_block(targets, target_normals, mesh, far_factor=3.0, backend=None):
    mod = get_backend(backend)
    args = _prep(targets, target_normals, mesh.centroid, mesh.u, mesh.v, mesh.normal,
                 mesh.half_u, mesh.half_v)
    return mod.field_block(*args, far_factor)
