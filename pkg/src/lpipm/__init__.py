"""Sparse LP interior-point solvers.

Engines: Mehrotra predictor-corrector (``pd_solve``), the primal barrier
method in exact, frozen-preconditioner, and delayed-scaling modes
(``primal_solve``), and a hybrid controller that switches from
primal-dual to delayed-scaling primal iterations near convergence to
reuse cached normal-matrix factorizations (``hybrid_solve``).
"""

from .cg import CgOutcome, generalized_condition_probe, pcg_solve
from .cholesky import CholeskyFactor, cholesky_factorize, factor_solve, minimum_degree_ordering
from .errors import (
    FactorizationFailed,
    InexactDirectionWarning,
    InsufficientData,
    InteriorityViolation,
    ModelError,
    NumericalBreakdown,
    ParseError,
    SolverError,
)
from .generator import Certificate, GeneratedInstance, generate_instance, parse_certificate
from .hybrid import SwitchDecision, SwitchPolicy, hybrid_solve, should_switch
from .mehrotra import PdConfig, mehrotra_step, pd_solve, pd_starting_point
from .mps import LpProblem, parse_mps, write_mps
from .primal import (
    DELAYED_SCALING,
    EXACT,
    FROZEN_PRECOND,
    PreconditionerCache,
    PrimalConfig,
    feasibility_repair,
    infeasible_primal_step,
    primal_direction,
    primal_solve,
    ratio_test,
    refresh_cache,
    surrogate_direction,
)
from .problem import (
    IterateState,
    RecoveryMap,
    StandardLp,
    SymmetricLp,
    convergence_metrics,
    dualize,
    residuals,
    symmetric_to_standard,
    to_standard_form,
    to_symmetric_form,
)
from .results import SolveResult, SolveStatus
from .scaling import (
    PartitionLS,
    Proximity,
    ScalingVector,
    bound_scaling_diag,
    delayed_scaling_point,
    proximity,
    thresholded_distance,
)
from .sparse import SparseMatrix, form_normal_matrix
from .spectra import SpectraRow, probe_spectra, spectra_csv
from .trace import (
    TraceLog,
    TraceRecord,
    classify_convergence,
    emit_csv,
    parse_csv,
)

__version__ = "0.1.0"
