"""Numerical dimension theory for complex Hénon maps in the horseshoe regime.

Periodic orbits feed partition sums, which give pressure curves, Bowen roots
and the dimension of the maximal-dimension equilibrium state.  Exactly
solvable linear models serve as oracles for the whole pipeline.
"""
from .errors import (
    BudgetExceededError,
    ConfigError,
    CorruptCacheError,
    DegenerateLambdaError,
    EscapedError,
    FingerprintMismatchError,
    HenonDimError,
    IncompleteLibraryError,
    NewtonDivergedError,
    NoBracketError,
    NoInteriorMaxError,
    NonHyperbolicError,
    OrientationError,
    SeedingDivergedError,
)
from .maps import HenonFactor, HenonMap, characterize, eval_inverse, eval_map, jacobian_at, make_map, quadratic
from .orbits import (
    Itinerary,
    OrbitLibrary,
    PeriodicOrbit,
    cache_load,
    cache_store,
    enumerate_orbits,
    multipliers,
    necklace_count,
    refine_orbit,
    seed_itineraries,
)
from .pressure import LibraryPressure, PressureCurve, PressureSample, build_curve, gibbs_weights, partition_sums, sample_at
from .dimension import DimensionReport, dimension_report, full_dimension_diagnostics, maximize_delta, solve_bowen
from .oracle import LinearModel, exact_report, exact_sample, synthetic_library
from .sweep import Circle, FamilySpec, Segment, Slot, submean_check
from .config import RunConfig, load_config, parse_config

__version__ = "0.1.0"
