"""Two-qubit quantum correlations under local decoherence channels."""

__version__ = "0.1.0"

from .analytic import (
    BranchPair,
    adc_bell_branches,
    gmqd_adc,
    gmqd_dpc,
    gmqd_pdc,
    pdc_example_branches,
    third_example_gmqd,
)
from .channels import (
    KrausChannel,
    adc,
    apply_local,
    dpc,
    evolve_expectation,
    pdc,
    transmission_matrix,
)
from .correlations import (
    CorrelationReport,
    MeasurementBasis,
    OptimizerConfig,
    ZeroDiscordCandidate,
    classical_correlation,
    concurrence,
    correlation_report,
    gmqd_bruteforce,
    gmqd_eig,
    gmqd_svd,
    measured_mutual_information,
    mutual_information,
    quantum_discord,
)
from .dynamics import (
    KinkReport,
    SweepConfig,
    SweepRow,
    SweepTable,
    detect_angle_jump,
    detect_branch_switch,
    detect_kinks,
    run_sweep,
    sweep,
)
from .errors import DomainError, GridTooCoarse, NotHermitian, NotPhysical, OptimizerFailure
from .states import (
    BlochForm,
    DensityMatrix,
    ExpectationMatrix,
    bell_diagonal,
    expectation_matrix,
    from_bloch,
    is_physical_bell_diagonal,
    reduced_expectation,
    to_bloch,
)
