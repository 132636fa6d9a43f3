"""Kernel backend selection.

The compiled ``_core`` extension is preferred; ``HAREPLAN_PURE=1`` forces
the numpy fallback (used by the equivalence tests and the kernel
benchmark).
"""
import os

BACKEND = "python"

if os.environ.get("HAREPLAN_PURE", "") not in ("1", "true", "yes"):
    try:
        from ._core import Chain, ssm_vmax  # noqa: F401

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        pass

if BACKEND == "python":
    from ._fallback import Chain, ssm_vmax  # noqa: F401
