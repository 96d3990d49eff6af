"""Limit cycles of planar polynomial oscillators.

Pipeline: kinetic system -> LLS form (:mod:`reduction`) -> averaged amplitude
and phase equations (:mod:`averaging`) -> cycle count and stability
(:mod:`cycles`), cross-checked by direct integration (:mod:`odeverify`).
"""

from .averaging import AveragedDynamics, RescaledOscillator, kb_average, numeric_average_oracle, rescale, wallis
from .cycles import (
    CycleEstimate, CycleReport, OriginNature, ParityBound, ParityClass, RadialRoot, RootCensus,
    Stability, classify_cycles, count_cycles, generic_degree_bound, parity_bound, radial_roots,
    render_table_ii, root_census,
)
from .errors import (
    CycleKitError, DegenerateTransform, FixedPointNotShifted, IdenticallyZero, InputError,
    NoFixedPointFound, NonFiniteState, NotOscillatory, NotProportional, NotReducible,
    ParameterOutOfRange, ReductionError, StepUnderflow,
)
from .modelzoo import ModelEntry, get_model, zoo
from .odeverify import (
    DetectSettings, DetectedCycle, Direction, PlanarField, SimSpec, compare_with_kb,
    detect_limit_cycles, integrate, kinetic_field, run_seeds,
)
from .polycore import BiPoly, Rational, UniPoly, poly_compose
from .serialize import LoadedSystem, load_system, parse_system
from .reduction import (
    KineticSystem, LLSClass, LLSSystem, ReductionMap, build_reduction_map, classify_lls,
    find_fixed_points, fixed_point_info, reduce_system, reduce_to_lls,
)

__version__ = "0.1.0"

__all__ = [
    "AveragedDynamics", "RescaledOscillator", "kb_average", "numeric_average_oracle", "rescale", "wallis",
    "CycleEstimate", "CycleReport", "OriginNature", "ParityBound", "ParityClass", "RadialRoot",
    "RootCensus", "Stability", "classify_cycles", "count_cycles", "generic_degree_bound",
    "parity_bound", "radial_roots", "render_table_ii", "root_census",
    "CycleKitError", "DegenerateTransform", "FixedPointNotShifted", "IdenticallyZero", "InputError",
    "NoFixedPointFound", "NonFiniteState", "NotOscillatory", "NotProportional", "NotReducible",
    "ParameterOutOfRange", "ReductionError", "StepUnderflow",
    "ModelEntry", "get_model", "zoo",
    "DetectSettings", "DetectedCycle", "Direction", "PlanarField", "SimSpec", "compare_with_kb",
    "detect_limit_cycles", "integrate", "kinetic_field", "run_seeds",
    "BiPoly", "Rational", "UniPoly", "poly_compose",
    "LoadedSystem", "load_system", "parse_system",
    "KineticSystem", "LLSClass", "LLSSystem", "ReductionMap", "build_reduction_map", "classify_lls",
    "find_fixed_points", "fixed_point_info", "reduce_system", "reduce_to_lls",
    "__version__",
]
