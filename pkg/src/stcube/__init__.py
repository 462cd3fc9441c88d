"""Space-time cube construction and rendering for segmented time-lapse meshes.

Builds a W x H x T object-ID volume by slicing every time step of a mesh
dataset with one cutting plane, then renders it with opaque first-hit
raycasting.  Ships a CLI (``stcube``) and an HTTP service on top.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .dataset import (
    ABSENT,
    Dataset,
    DatasetError,
    Lifespan,
    LineageTree,
    Mesh,
    PropertyTable,
    ValidationReport,
    descendants,
    division_histogram,
    divisions_at,
    load_dataset,
    mesh_volume,
    property_value,
    remaining_lifespan,
    validate,
)
from .geometry import (
    Contour,
    CutPlane,
    IDImage,
    Viewport,
    fit_viewport,
    plane_basis,
    rasterize_section,
    section_contours,
    section_meshes,
)
from .render import (
    Camera,
    ColorGradient,
    GRADIENTS,
    RenderStyle,
    ValueTexture,
    bake_value_texture,
    get_gradient,
    pick_mesh,
    pick_stc,
    render_mesh_view,
    render_stc,
)
from .session import (
    HIGHLIGHTED,
    MASKED,
    NORMAL,
    SessionState,
    cycle_object_state,
    session_from_json,
    session_to_json,
    visibility_lut,
    visible,
)
from .volume import (
    NormalVolume,
    STCVolume,
    build_stc,
    compute_normals,
    load_volume,
    save_volume,
    stc_slice,
)

__all__ = [
    "ABSENT",
    "Camera",
    "ColorGradient",
    "Contour",
    "CutPlane",
    "Dataset",
    "DatasetError",
    "GRADIENTS",
    "HIGHLIGHTED",
    "IDImage",
    "Lifespan",
    "LineageTree",
    "MASKED",
    "Mesh",
    "NORMAL",
    "NormalVolume",
    "PropertyTable",
    "RenderStyle",
    "STCVolume",
    "SessionState",
    "ValidationReport",
    "ValueTexture",
    "Viewport",
    "bake_value_texture",
    "build_stc",
    "compute_normals",
    "cycle_object_state",
    "descendants",
    "division_histogram",
    "divisions_at",
    "fit_viewport",
    "get_gradient",
    "load_dataset",
    "load_volume",
    "mesh_volume",
    "pick_mesh",
    "pick_stc",
    "plane_basis",
    "property_value",
    "rasterize_section",
    "remaining_lifespan",
    "render_mesh_view",
    "render_stc",
    "save_volume",
    "section_contours",
    "section_meshes",
    "session_from_json",
    "session_to_json",
    "stc_slice",
    "validate",
    "visibility_lut",
    "visible",
    "__version__",
]
