"""Piecewise hyperbolic 2-complexes: geodesics, galleries, the open cover and stability trials."""
from .complex import (
    TEST_COMPLEXES,
    NotCertifiedError,
    OutsideComplexError,
    PHComplex,
    Point,
    book,
    equilateral,
    from_dict,
    from_triangles,
    heptagonal_ball,
    loads,
    two_flowers,
    uniform,
)
from .cover import (
    AngleCheck,
    CoverCheck,
    Cover,
    CoverConstants,
    CoverError,
    Decomposition,
    angle_check,
    cover_check,
    cover_constants,
    decompose,
)
from .galleries import Gallery, extended_gallery, link_distance
from .paths import Geodesic, SearchBudgetExceeded, geodesic, is_local_geodesic, random_point, shoot
from .stability import (
    NotAcuteError,
    TrialReport,
    acyl_constants,
    fellow_travel_length,
    gallery_constant,
    run_stability_trials,
    stability_test,
    star_bound,
)

__all__ = [
    "TEST_COMPLEXES", "NotCertifiedError", "OutsideComplexError", "PHComplex", "Point", "book",
    "equilateral", "from_dict", "from_triangles", "heptagonal_ball", "loads", "two_flowers", "uniform",
    "AngleCheck", "CoverCheck", "cover_check", "Cover", "CoverConstants", "CoverError", "Decomposition", "angle_check",
    "cover_constants", "decompose", "Gallery", "extended_gallery", "link_distance", "Geodesic",
    "SearchBudgetExceeded", "geodesic", "is_local_geodesic", "random_point", "shoot", "NotAcuteError",
    "TrialReport", "acyl_constants", "fellow_travel_length", "gallery_constant", "run_stability_trials",
    "stability_test", "star_bound",
]
