"""Device-uncharacterized witness of quantum discord.

The witness is the determinant of the covariance matrix
``Q[x, y] = <A_x (x) B_y> - <A_x><B_y>`` of local two-outcome measurements;
it vanishes on every zero-discord state.
"""

from .errors import WitnessError
from .measurements import (
    DichotomicObservable,
    MeasurementSet,
    apply_efficiency,
    observable_matrix,
    optimal_pair,
    projective_from_direction,
    validate,
)
from .simulator import ExperimentConfig, TallyTable, bootstrap_ci, estimate, run
from .states import (
    BlochData,
    DensityMatrix,
    HermitianBasis,
    bloch_decompose,
    classical_quantum,
    gell_mann_basis,
    random_density,
    s_matrix,
    werner,
)
from .witness import (
    WitnessReport,
    expectations,
    geometric_discord_2q,
    max_witness_bound,
    q_value,
    witness_from_bloch,
    witness_value,
)

__version__ = "0.1.0"
