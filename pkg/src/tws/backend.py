"""Kernel backend selection.

Prefers the compiled extension ``tws._kernels``; falls back to the pure
Python mirror ``tws._kernels_py`` when the extension was not built.  Both
expose the same functions with matching numerics, so the choice only affects
speed.  ``BACKEND`` names the active implementation.
"""

from __future__ import annotations

try:
    from . import _kernels as _impl

    BACKEND = "compiled"
except ImportError:  # extension not built; use the mirror
    from . import _kernels_py as _impl

    BACKEND = "python"

zeta = _impl.zeta
eta = _impl.eta
trunc_value = _impl.trunc_value
sup_search = _impl.sup_search
maximal_value = _impl.maximal_value
power_tail_segments = _impl.power_tail_segments


def implementations():
    """Both kernel modules when available, for benchmarks and parity tests."""
    from . import _kernels_py as pure

    out = {"python": pure}
    try:
        from . import _kernels as compiled

        out["compiled"] = compiled
    except ImportError:
        pass
    return out
