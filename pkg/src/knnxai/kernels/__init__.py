"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the pure-Python
module is.  Set ``KNNXAI_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

python_backend = _pykernels
compiled_backend = None

if os.environ.get("KNNXAI_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend  # type: ignore[no-redef]
    except ImportError:
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend


def available() -> dict:
    return {"python": python_backend, **({"cython": compiled_backend} if compiled_backend else {})}


def use(name: str) -> None:
    """Switch the process-wide backend (``"python"`` or ``"cython"``)."""
    global backend
    table = available()
    if name not in table:
        raise ValueError(f"kernel backend {name!r} is not available")
    backend = table[name]
