"""Backend selection for the statevector kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``Z2HUBBARD_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy fallback is used.
"""

from __future__ import annotations

import os

from . import _kernels_py

__all__ = ["backend", "BACKEND_NAME", "get_backend", "compiled_available"]


def _load_compiled():
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()


def compiled_available() -> bool:
    return _compiled is not None


def get_backend(name: str | None = None):
    """Return the kernel module ``"compiled"``, ``"python"`` or the default."""
    if name is None:
        forced = os.environ.get("Z2HUBBARD_PURE_PYTHON", "")
        name = "python" if forced not in ("", "0") or _compiled is None else "compiled"
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    if name == "python":
        return _kernels_py
    raise ValueError(f"unknown backend {name!r}")


backend = get_backend()
BACKEND_NAME = "compiled" if backend is _compiled else "python"
