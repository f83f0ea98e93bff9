"""Kernel backend selection.

Prefers the compiled Cython kernels; falls back to the numpy implementation
when the extension is missing. Set SQCORR_FORCE_PY=1 to force the fallback
(used by the benchmark and the kernel-equivalence tests).
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SQCORR_FORCE_PY", "") not in ("", "0"):
    BACKEND = "numpy"
    hist1d = _kernels_py.hist1d
    hist2d = _kernels_py.hist2d
else:
    try:
        from . import _kernels_cy

        BACKEND = "cython"
        hist1d = _kernels_cy.hist1d
        hist2d = _kernels_cy.hist2d
    except ImportError:
        BACKEND = "numpy"
        hist1d = _kernels_py.hist1d
        hist2d = _kernels_py.hist2d

window_lo_edge = _kernels_py.window_lo_edge
