"""Kernel backend selection.

Prefers the compiled extension ``gpelab._core``; falls back to the numpy
implementations in ``gpelab._kernels_py`` if the extension is unavailable or
``GPELAB_PURE_PYTHON=1`` is set. Both backends expose the same callables.
"""

import os

if os.environ.get("GPELAB_PURE_PYTHON") == "1":
    _impl = None
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = None

if _impl is None:
    from . import _kernels_py as _impl  # noqa: F811

    BACKEND = "python"
else:
    BACKEND = "compiled"

shoot_classify = _impl.shoot_classify
shoot_trajectory = _impl.shoot_trajectory
flow_predictor = _impl.flow_predictor
quartic_overlap = _impl.quartic_overlap

CROSSED = 1
DIVERGED = -1
RAN_OUT = 0
