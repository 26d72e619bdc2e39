"""hetbounds: joint partial-identification bounds for effects that vary by setting."""

from .bounds import (
    BiasBound,
    DifferenceBound,
    Restricted,
    RhoMatrix,
    SettingEstimate,
    UNRESTRICTED,
    Unrestricted,
    Violation,
    bias_difference_bounds,
    difference_interval,
    individual_set,
    rho_from_adjacency,
    rho_from_decay,
    supershort_rho,
    transitivity_audit,
)
from .estimator import (
    Dataset,
    EstimationError,
    FitResult,
    RankDeficiencyError,
    RegressionSpec,
    SupershortResult,
    partial_r2_bias_bound,
    residualize,
    short_supershort,
    wols_fit,
)
from .intervals import Interval
from .polytope import (
    ConstraintGraph,
    InfeasiblePolytopeError,
    PinResult,
    SolvedPolytope,
    build,
    close,
    pin,
    pin_at_fraction,
    project,
    sharpening_report,
)
from .problem import (
    Problem,
    ProblemError,
    ReportBundle,
    canonical_json,
    load_problem,
    problem_from_dict,
    problem_to_dict,
    rho_matrix_from_csv,
    rho_matrix_from_json_dict,
    rho_matrix_to_csv,
    rho_matrix_to_json_dict,
    solve_problem,
)

__version__ = "0.1.0"
