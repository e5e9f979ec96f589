"""Three-block splitting solvers with an SPCP benchmark harness.

The relaxed inertial alternating minimization method (and its relaxed and
plain special cases), three ADMM baselines, the inertial three-operator
splitting it is derived from, proximal kernels and a stable principal
component pursuit experiment harness.
"""
from .admm import AdmgConfig, SpadmmConfig, admg_step, admm3_step, run_admm, spadmm_step
from .ama import AmaVariant, adaptive_alpha, ama3_step, rama3_step, riama_step, run_ama
from .bench import ExperimentConfig, run_experiment, sweep
from .errors import (
    ConfigurationError,
    DomainError,
    ParameterError,
    ShapeError,
    SplitkitError,
    StepError,
)
from .functions import l1_norm, nuclear_norm, shifted_quadratic, squared_frobenius, zero_function
from .model import (
    BlockObjective,
    Constant,
    IterationState,
    LinearBlockMap,
    RunRecord,
    SeparableProblem,
    SolverParams,
    TraceEntry,
    dual_objective,
    kkt_residual,
    primal_objective,
)
from .prox import prox_conjugate, prox_l1, prox_nuclear, svd
from .runner import StoppingRule
from .spcp import (
    RecoveryMetrics,
    SpcpInstance,
    assemble_spcp_problem,
    gen_spcp_instance,
    load_instance,
    recovery_metrics,
    save_instance,
)
from .splitting import MonotoneTriple, ParamReport, dual_triple, its_step, run_splitting, validate_params

__version__ = "0.1.0"
