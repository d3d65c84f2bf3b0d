"""Backend dispatch for the hot multiplier kernels.

The compiled Cython extension is preferred when present; the NumPy
implementation is the fallback.  Set ``DIRACLAB_BACKEND`` to ``python`` or
``cython`` to force a choice (``cython`` raises if the extension is
missing); anything else means auto.
"""

import os

from . import _multiplier_py

_requested = os.environ.get("DIRACLAB_BACKEND", "auto").lower()

_impl = None
if _requested != "python":
    try:
        from . import _multiplier_cy as _impl
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "DIRACLAB_BACKEND=cython but the compiled kernels are not "
                "built; reinstall the package with a working C toolchain"
            )
if _impl is None:
    _impl = _multiplier_py

symbol_apply = _impl.symbol_apply
resolvent_apply = _impl.resolvent_apply


def backend_name():
    """'cython' when the compiled kernels are active, else 'python'."""
    return "cython" if _impl is not _multiplier_py else "python"


def get_backends():
    """Mapping of available backend name -> module (for benchmarks/tests)."""
    out = {"python": _multiplier_py}
    try:
        from . import _multiplier_cy

        out["cython"] = _multiplier_cy
    except ImportError:
        pass
    return out
