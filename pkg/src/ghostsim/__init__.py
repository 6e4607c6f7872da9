"""Simulation of ghost interference with entangled Gaussian pairs and its duality bound."""
from .coherence import (
    DensityMatrix,
    DualityReport,
    coherence,
    conditional_rho,
    duality_report,
    unconditional_rho,
)
from .discrimination import (
    DetectorGram,
    distinguishability,
    gram_from_vectors,
    random_gram,
    uniform_gram,
    validate_gram,
)
from .errors import (
    ConfigError,
    DegenerateInputError,
    DomainError,
    ExtractionError,
    GhostsimError,
    GridError,
    RegimeError,
    ResolutionError,
    SingularConfigurationError,
)
from .gaussian_core import (
    Gaussian1D,
    Geometry,
    SourceParams,
    TwoParticleGaussian,
    condition_on_slit,
    evolve_pair,
    fresnel_evolve,
    gamma_limit,
    make_epr_state,
)
from .pattern import (
    PatternResult,
    closed_form_pattern,
    coherence_from_pattern,
    coincidence_pattern,
)

__version__ = "0.1.0"
