"""Truncation-sweep kernels.

The tensor-network build spends nearly all of its time in per-site QR
orthogonalisation and truncated-SVD passes.  A compiled extension
(``ptwork.kernels._core``) implements that sweep with direct LAPACK
calls; ``_py`` is the numpy twin.  The backend is selected at import
time: the extension when available, overridable with
``PTWORK_KERNEL=py`` or ``PTWORK_KERNEL=cy``.
"""

from __future__ import annotations

import os

from ._common import BondCapExceeded

__all__ = ["BondCapExceeded", "backend_name", "sweep", "get_backend"]


def get_backend(name: str):
    """Return (backend_name, sweep) for 'py', 'cy', or 'auto'."""
    if name not in ("py", "cy", "auto"):
        raise ValueError(f"unknown kernel backend {name!r}")
    if name in ("auto", "cy"):
        try:
            from . import _core

            return "cy", _core.sweep
        except ImportError:
            if name == "cy":
                raise
    from . import _py

    return "py", _py.sweep


backend_name, sweep = get_backend(os.environ.get("PTWORK_KERNEL", "auto"))
