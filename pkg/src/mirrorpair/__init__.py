"""Exact-arithmetic mirror pipeline for log Calabi-Yau pairs.

Builds relative I-functions over finite graded algebras, normalizes them to
mirror maps and proper Landau-Ginzburg potentials, and verifies the period
identities coefficient by coefficient over the rationals.
"""

from .algebra import (
    AlgebraError,
    Element,
    GradedAlgebra,
    RestrictionMap,
    check_algebra,
    check_restriction,
    divide_by_class,
    nilpotency_index,
    pairing_matrix,
    pairing_pushforward,
    solve_exact,
)
from .geometry import (
    BUILTIN_CONFIGS,
    ConfigError,
    InvariantTable,
    MissingDataError,
    PairGeometry,
    builtin_geometry,
    format_invariants,
    ingest_invariants,
    load_geometry,
    tabulate_one_point_invariants,
)
from .ifunctions import (
    CancellationError,
    DivisorMirrorMap,
    MalformedMirrorMapError,
    MirrorChange,
    MirrorExponent,
    NormalizedI,
    RelativeSeries,
    StateSeries,
    composed_exponent,
    divisor_map_from_normal_bundle,
    divisor_mirror_map,
    extended_i_function,
    extract_mirror_exponent,
    hypergeometric_factor,
    inverse_coordinates,
    normal_bundle_i_function,
    normalize_i,
    relative_i_function,
    substitute_forward,
    substitute_inverse,
    toric_i_function,
)
from .inversion import (
    BellReport,
    RoundtripReport,
    SimplePoleLaurent,
    bell_identity_check,
    compose,
    inversion_roundtrip,
    lagrange_inverse,
    potential_roundtrip,
)
from .periods import (
    EulerScalingReport,
    PeriodComparison,
    PeriodSeries,
    ProperPotential,
    classical_period,
    compare_periods,
    euler_scaling_check,
    proper_potential,
    quantum_period,
    regularize,
    roundtrip_for_geometry,
    theta_coefficient,
)
from .series import (
    NovikovSeries,
    TruncationError,
    TruncationPolicy,
    WindowError,
    XLaurentSeries,
    ZLaurentElement,
    nilpotent_reciprocal,
)

__version__ = "0.1.0"
