"""Exact formal calculus on the disc.

Truncated power series and the group of formal coordinate changes form the
base layer.  On top of it sit k-differentials with their residues,
tensor-density modules, rational functions on configuration space with
covariance checks, and the multi-point coordinate-independence checks.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BadRange,
    DomainViolation,
    ExpansionBudgetExceeded,
    FormalDiscError,
    FractionalPowerUndefined,
    NonZeroConstantTerm,
    NotExponentiable,
    NotInvertible,
    NotNilpotent,
    NotUnipotent,
    OnDiagonal,
    ParseError,
    TruncationError,
    UnknownTest,
    ValidationError,
)
from .rational import GaussianRational  # noqa: E402
from .series import (  # noqa: E402
    LaurentSeries,
    TruncatedSeries,
    series_add,
    series_compose,
    series_derive,
    series_invert_composition,
    series_mul,
    series_residue,
)
from .coords import (  # noqa: E402
    CoordinateChange,
    Derivation,
    decompose_scaling_unipotent,
    exp_derivation,
    group_compose,
    group_inverse,
    lie_bracket,
    log_coordinate_change,
)
from .differentials import (  # noqa: E402
    EndValuedDifferential,
    KDifferential,
    MultiplicationAction,
    canonical_differential,
    check_differential_invariance,
    pullback_kdifferential,
    residue_pairing,
)
from .density import (  # noqa: E402
    TENSOR_DENSITIES,
    DensityElement,
    DensityModule,
    ModuleSpec,
    act_pullback,
    check_admissible,
    derivation_action,
    filtration_truncate,
    grading_operator,
    translation_operator,
)
from .polynomial import Poly  # noqa: E402
from .config_rational import (  # noqa: E402
    InsertionFrame,
    RationalSection,
    SectionFamily,
    SectionVector,
    ShuffleSet,
    build_section_vector,
    check_insertion_composition,
    check_insertion_expansion,
    check_K_property,
    check_pole_bounds,
    check_T_derivative,
    check_translation,
    enumerate_shuffles,
    evaluate_at,
    in_convergence_domain,
    permute_action,
    reference_family,
    shuffle_sum,
)
from .torsor import (  # noqa: E402
    CoordinateTorsor,
    ModuleSection,
    PointAtlas,
    TwistElement,
    check_representation_law,
    check_section_invariance,
    exact_sequence_check,
    pair_dual_section,
    torsor_translate,
    transform_section,
    twist_normalize,
)

__all__ = [
    "__version__",
    "BadRange",
    "DomainViolation",
    "ExpansionBudgetExceeded",
    "FormalDiscError",
    "FractionalPowerUndefined",
    "NonZeroConstantTerm",
    "NotExponentiable",
    "NotInvertible",
    "NotNilpotent",
    "NotUnipotent",
    "OnDiagonal",
    "ParseError",
    "TruncationError",
    "UnknownTest",
    "ValidationError",
    "LaurentSeries",
    "TruncatedSeries",
    "series_add",
    "series_compose",
    "series_derive",
    "series_invert_composition",
    "series_mul",
    "series_residue",
    "CoordinateChange",
    "Derivation",
    "decompose_scaling_unipotent",
    "exp_derivation",
    "group_compose",
    "group_inverse",
    "lie_bracket",
    "log_coordinate_change",
    "EndValuedDifferential",
    "KDifferential",
    "MultiplicationAction",
    "canonical_differential",
    "check_differential_invariance",
    "pullback_kdifferential",
    "residue_pairing",
    "TENSOR_DENSITIES",
    "DensityElement",
    "DensityModule",
    "ModuleSpec",
    "act_pullback",
    "check_admissible",
    "derivation_action",
    "filtration_truncate",
    "grading_operator",
    "translation_operator",
    "InsertionFrame",
    "RationalSection",
    "SectionFamily",
    "SectionVector",
    "ShuffleSet",
    "build_section_vector",
    "check_insertion_composition",
    "check_insertion_expansion",
    "check_K_property",
    "check_pole_bounds",
    "check_T_derivative",
    "check_translation",
    "enumerate_shuffles",
    "evaluate_at",
    "in_convergence_domain",
    "permute_action",
    "reference_family",
    "shuffle_sum",
    "CoordinateTorsor",
    "ModuleSection",
    "PointAtlas",
    "TwistElement",
    "check_representation_law",
    "check_section_invariance",
    "exact_sequence_check",
    "pair_dual_section",
    "torsor_translate",
    "transform_section",
    "twist_normalize",
    "GaussianRational",
    "Poly",
]
