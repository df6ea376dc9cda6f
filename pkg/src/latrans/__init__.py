"""Latin squares, their transversals, and the entropy bound on how many there can be."""
from .bounds import (
    AlphaProcessTrace,
    BoundValue,
    ClaimReport,
    entropy_chain_estimate,
    entropy_gap_report,
    sample_alpha_process,
    upper_bound_log,
    verify_claim1,
    verify_claim2,
)
from .construction import (
    BlockStructure,
    ConstructionParams,
    PaddedSquare,
    build_L,
    build_structure,
    choose_b,
    derive_params,
    pad_to,
    relaxed_params,
    special_transversals,
)
from .counting import (
    CountResult,
    EstimateResult,
    count_exact,
    enumerate_transversals,
    estimate_sis,
    has_transversal,
    sample_transversal,
)
from .errors import (
    ConfigError,
    ConstructionFailed,
    DomainError,
    InvalidSquare,
    LatransError,
    ParseError,
    UnsupportedOrder,
)
from .experiment import ExperimentReport, run_experiment
from .hypercube import (
    HypercubeTransversal,
    LatinHypercube01,
    count_transversals_brute,
    from_square,
    group_hypercube,
    validate_hypercube,
)
from .io import SquareFile, parse_square, parse_square_file, serialize_square
from .latin import (
    LatinSquare,
    Transversal,
    ValidationReport,
    cyclic_square,
    mols_pair,
    random_isotope,
    relabel,
    transversal_decomposition,
    uniform_random_square,
    validate_latin,
)

__version__ = "0.1.0"
