"""Growth and contracting-geometry experiments for finitely presented groups."""

from ._version import __version__
from .errors import (AxiomViolation, BudgetExceeded, CollisionFound, ConfigError, DegenerateGrowth,
                     GrowthLabError, InjectivityFailed, InsufficientData, MissedAxis, NoDeepPoint,
                     NoTripleFound, NotAdmissible, NotContracting, OrderInconsistent,
                     PresentationError, StrategyMismatch, TrivialWord, Unexplored, WindowTooSmall)
from .words import (Presentation, canonical_form, direct_product, equal_in_group, format_word,
                    free_group, is_trivial, load_presentation, one_relator, parse_presentation,
                    parse_word)
from .spaces import (OrbitSpace, ProductSpace, cayley_space, census, distance, explore, geodesic,
                     product_space, quotient_space)
from .growth import GrowthReport, exact_free_product_rate, growth_rate, lq_norm_rate
from .contracting import (Axis, axis_family, contraction_constant, extend_word, find_extension_triple,
                          independence_test, make_axis, proj_diameter, project)
from .projection import build_projection_complex, build_projection_table, build_quasitree_space
from .quotients import convergence_sweep, injectivity_experiment, product_experiment

__all__ = [
    "__version__",
    "Presentation", "canonical_form", "direct_product", "equal_in_group", "format_word",
    "free_group", "is_trivial", "load_presentation", "one_relator", "parse_presentation",
    "parse_word", "OrbitSpace", "ProductSpace", "cayley_space", "census", "distance", "explore",
    "geodesic", "product_space", "quotient_space", "GrowthReport", "exact_free_product_rate",
    "growth_rate", "lq_norm_rate", "Axis", "axis_family", "contraction_constant", "extend_word",
    "find_extension_triple", "independence_test", "make_axis", "proj_diameter", "project",
    "build_projection_complex", "build_projection_table", "build_quasitree_space",
    "convergence_sweep", "injectivity_experiment", "product_experiment",
    "AxiomViolation", "BudgetExceeded", "CollisionFound", "ConfigError", "DegenerateGrowth",
    "GrowthLabError", "InjectivityFailed", "InsufficientData", "MissedAxis", "NoDeepPoint",
    "NoTripleFound", "NotAdmissible", "NotContracting", "OrderInconsistent", "PresentationError",
    "StrategyMismatch", "TrivialWord", "Unexplored", "WindowTooSmall",
]
