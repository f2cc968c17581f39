"""
Kernel backend selection.

The compiled extension is used when it imports; set ``OSCGATE_PURE_PYTHON=1``
to force the NumPy fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py
from .errors import InvalidInputError

python_kernels = _kernels_py

if os.environ.get("OSCGATE_PURE_PYTHON", "").strip() not in ("", "0"):
    compiled_kernels = None
else:
    try:
        from . import _ckernels as compiled_kernels
    except ImportError:  # extension not built
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "cython" if compiled_kernels is not None else "python"


def get_kernels(name: str | None = None):
    """Return the kernel module by name (``"cython"`` or ``"python"``); ``None`` means the active one."""
    if name is None:
        return kernels
    if name == "python":
        return python_kernels
    if name == "cython":
        if compiled_kernels is None:
            raise ImportError("compiled kernels are not available")
        return compiled_kernels
    raise InvalidInputError(f"unknown backend {name!r}")
