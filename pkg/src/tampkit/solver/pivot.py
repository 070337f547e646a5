"""Pivot kernel selection: compiled extension when available, NumPy otherwise.

Set ``TAMPKIT_KERNEL=python`` or ``TAMPKIT_KERNEL=compiled`` to force a
choice (the latter raises if the extension is missing).
"""

from __future__ import annotations

import os
from types import ModuleType

from tampkit.solver import _pivot_py


def _load() -> ModuleType:
    forced = os.environ.get("TAMPKIT_KERNEL", "").strip().lower()
    if forced == "python":
        return _pivot_py
    try:
        from tampkit.solver import _pivot_cy  # type: ignore[attr-defined]
        return _pivot_cy
    except ImportError:
        if forced == "compiled":
            raise ImportError(
                "TAMPKIT_KERNEL=compiled but the compiled pivot kernel is "
                "not built; reinstall with a C compiler available")
        return _pivot_py


active = _load()


def kernel_name() -> str:
    return active.IMPL


def get_kernel(name: str | None = None) -> ModuleType:
    """Return a kernel module by name ("python", "compiled") or the active one."""
    if name is None:
        return active
    if name == "python":
        return _pivot_py
    if name == "compiled":
        from tampkit.solver import _pivot_cy  # type: ignore[attr-defined]
        return _pivot_cy
    raise ValueError(f"unknown kernel {name!r}")
