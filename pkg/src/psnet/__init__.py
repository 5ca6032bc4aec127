"""Phase-space Monte Carlo for linear bosonic networks.

Positive-P and Wigner sampling of Gaussian inputs, transmission through
linear networks, grouped click-count distributions and continuous-variable
entanglement witnesses.
"""

from .core import (
    Ensemble,
    GaussianMoments,
    ModeKind,
    ModeSpec,
    Ordering,
    SeededStream,
    SigmaVariances,
    SubEnsembleLayout,
    ValidationError,
    moments_from_spec,
    sigma_variances,
)
from .counting import (
    GroupedDistribution,
    GroupedSpec,
    grouped_probability,
    grouped_probability_bruteforce,
)
from .entanglement import (
    QuadratureSpec,
    WitnessReport,
    empirical_gains,
    epr_source,
    epr_witness,
    mpartite_witness,
    quadrature_samples,
    steering_witness,
)
from .network import (
    BeamSplitterChainSpec,
    TransmissionMatrix,
    apply,
    bs_chain_matrix,
    haar_unitary,
    load_matrix,
    save_matrix,
)
from .sampler import InputSpec, draw_input, estimate_moments
from .stats import (
    ChiSquareReport,
    ReferenceDistribution,
    chi_square,
    exact_independent_click_total,
    exact_thermal_total,
    subensemble_error,
)

__version__ = "0.1.0"
