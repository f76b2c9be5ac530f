"""Numerical laboratory for the central-spin (spin-bath) decoherence model."""

from .couplings import (
    CouplingScheme,
    coupling_value,
    coupling_values,
    energy_norm_limit,
    partial_energy_norm,
    weyl_growth_check,
)
from .decoherence import (
    DecoherenceTrace,
    ReducedState,
    decoherence_factor,
    decoherence_factor_limit,
    eigenvalue_sum_factor,
    log_decoherence_factor,
    reduced_density_matrix,
    sample_trace,
)
from .pisot import (
    AlgebraicInteger,
    PisotVerdict,
    classify_pisot,
    distance_to_integers,
    isolate_dominant_root,
    power_sums,
)
from .regimes import (
    ExperimentReport,
    classify_regime,
    clt_rescaling_experiment,
    equidistribution_discrepancy,
    high_precision_fractional_orbit,
    lyapunov_average,
    pisot_probe,
    rational_decay_experiment,
    rational_decay_exponent,
)
from .spectrum import (
    CantorModel,
    SpectrumSample,
    bath_energy,
    box_counting_dimension,
    cantor_intervals,
    enumerate_spectrum,
    spectrum_in_cantor_check,
)

__version__ = "0.1.0"
