"""Kernel backend selection.

Prefers the compiled extension; falls back to the numpy/scipy
implementation when the extension is unavailable or when the environment
variable ISOFLOW_PURE_PYTHON=1 requests it. Both expose the same API:

    cn_heat_1d, apply_sym_2d, pcg_sym_2d, cn_heat_2d, BACKEND
"""

import os

from . import fallback

if os.environ.get("ISOFLOW_PURE_PYTHON") == "1":
    _impl = fallback
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = fallback

cn_heat_1d = _impl.cn_heat_1d
apply_sym_2d = _impl.apply_sym_2d
pcg_sym_2d = _impl.pcg_sym_2d
cn_heat_2d = _impl.cn_heat_2d


def backend_name():
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return _impl.BACKEND
