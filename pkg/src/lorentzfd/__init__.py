"""Lorentzian fundamental domains for finite-level subgroups of the universal cover of SU(1,1)."""
from .cover import (
    IDENTITY,
    CoverPoint,
    GroupElement,
    InvalidPointError,
    PseudoVector,
    act,
    bilinear_form,
    central_power,
    inverse,
    mul,
    project_pi,
    rotation_r0,
    rotation_rx,
    section_s,
    translation_to,
)
from .groups import (
    LiftedGroup,
    OrbitAtlas,
    TriangleSignature,
    Unrealizable,
    central_words,
    evaluate_word,
    find_lift_offsets,
    level_of,
    lifted_group,
    orbit_enumerate,
)
from .halfspaces import (
    ChartPoint,
    PrismHandle,
    boundary_section,
    chart_from,
    chart_to,
    in_H,
    in_I,
    on_E,
    star_polygon,
)
from .domain_carver import (
    PolyComplex,
    carve,
    certificate,
    cutter_set,
    euclideanize,
    face_pairing,
    verify_tiling,
    volume,
)
from .analogues import so2_domain, so11_domain
from .config import RunConfig, make_config
from .presets import presets, preset
from .pipeline import run_pipeline

__version__ = "0.1.0"
