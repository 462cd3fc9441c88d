"""Hot-loop kernels: compiled extension with a pure-numpy fallback.

The compiled backend (``_core``, Cython) is preferred; ``_pure`` is used when
the extension is missing or ``STCUBE_FORCE_PURE`` is set to a non-empty value
other than "0".  Both backends implement the same contracts and produce
bit-identical output; ``stcube bench`` compares their throughput.
"""

from __future__ import annotations

import os

from . import _pure

try:
    from . import _core
except ImportError:
    _core = None

_FORCE_PURE = os.environ.get("STCUBE_FORCE_PURE", "") not in ("", "0")

if _core is not None and not _FORCE_PURE:
    _impl = _core
    BACKEND = "compiled"
else:
    _impl = _pure
    BACKEND = "python"

COMPILED_AVAILABLE = _core is not None

fill_polygon = _impl.fill_polygon
raycast_first_hit = _impl.raycast_first_hit
raster_triangles = _impl.raster_triangles


def backends() -> dict[str, object]:
    """Importable backends by name ("python" always, "compiled" when built)."""
    out: dict[str, object] = {"python": _pure}
    if _core is not None:
        out["compiled"] = _core
    return out
