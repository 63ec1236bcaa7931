"""envlab: numerical checks of environment-assisted invariance.

Submodules:

* :mod:`envlab.hilbert` -- dense pure states, local unitaries, Schmidt form
* :mod:`envlab.envariance` -- swap/counterswap and phase pairs, optimal counters
* :mod:`envlab.finegrain` -- Born's rule from fine-graining and branch counting
* :mod:`envlab.frequency` -- ensemble branch counts and the Gaussian limit
* :mod:`envlab.cli` -- the ``envlab`` command
"""

from .envariance import (
    CounterResult,
    EnvariantDescription,
    SwapSpec,
    envariant_description,
    is_envariant,
    optimal_counter,
    phase_rotation_pair,
    swap_detectability,
    swap_pair,
)
from .errors import (
    DimensionCapError,
    EnvarianceGateError,
    EnvlabError,
    NumericalContractError,
    ValidationError,
)
from .finegrain import (
    BornResult,
    FineGraining,
    apply_cshift,
    build_fine_grained_state,
    derive_born,
    derive_born_multi,
    equal_coeff_probabilities,
    rational_approximation,
)
from .frequency import (
    EnsembleDistribution,
    ensemble_counts,
    ensemble_oracle,
    ensemble_probabilities,
    gaussian_approx,
)
from .hilbert import (
    DensityMatrix,
    LocalUnitary,
    PureState,
    SchmidtDecomposition,
    apply_local,
    overlap,
    reduced_density,
    schmidt,
    tensor,
)

__version__ = "0.1.0"
