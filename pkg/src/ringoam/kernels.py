"""Backend selection for the mode-coupling kernel and integrators.

The compiled core (``ringoam._kernels``) is used when it imports; otherwise
the numpy fallback takes over.  ``RINGOAM_BACKEND=python`` forces the
fallback, ``RINGOAM_BACKEND=compiled`` makes a missing core an error.
"""
import os
from types import ModuleType

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name=None) -> ModuleType:
    """Return the kernel module for ``name`` (default: the active backend)."""
    if name is None:
        name = BACKEND
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"kernel backend {name!r} unavailable; have {available_backends()}"
        ) from None


def _select():
    requested = os.environ.get("RINGOAM_BACKEND", "").strip().lower()
    if requested:
        if requested not in ("python", "compiled"):
            raise ValueError(f"RINGOAM_BACKEND must be 'python' or 'compiled', got {requested!r}")
        if requested == "compiled" and _compiled is None:
            raise ImportError("RINGOAM_BACKEND=compiled but ringoam._kernels is not built")
        return requested
    return "compiled" if _compiled is not None else "python"


BACKEND = _select()
