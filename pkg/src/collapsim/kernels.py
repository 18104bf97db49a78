"""Backend selection for the ensemble stepper.

Prefers the compiled extension `collapsim._ensemble_cy` and falls back to the
pure-numpy twin when the extension is missing (no compiler at install time)
or when COLLAPSIM_PURE_PYTHON=1 is set in the environment.  Both expose the
same `step_ensemble` contract and agree numerically to the last few ulps;
`benchmarks/bench_kernels.py` compares their throughput.
"""

from __future__ import annotations

import os

from . import _ensemble_np

if os.environ.get("COLLAPSIM_PURE_PYTHON", "") == "1":
    _impl = _ensemble_np
else:
    try:
        from . import _ensemble_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _ensemble_np

BACKEND: str = _impl.BACKEND
step_ensemble = _impl.step_ensemble


def get_backend(name: str | None = None):
    """Return a kernel module by name ('cython', 'numpy', or None = active)."""
    if name is None:
        return _impl
    if name == "numpy":
        return _ensemble_np
    if name == "cython":
        from . import _ensemble_cy
        return _ensemble_cy
    raise ValueError(f"unknown kernel backend {name!r}")
