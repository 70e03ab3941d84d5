"""Non-polynomial quintic spline collocation for time-fractional beam equations.

The model problem is ``D_t^gamma y + alpha y_xxxx = u`` on ``[0, L]`` with
simply supported ends.  Time uses the L1 Caputo formula and space the
spline consistency relations, giving one pentadiagonal solve per step.
"""

from .banded import BandFactorization, PentadiagonalMatrix, band_lu, band_matvec, band_solve
from .caputo import (
    L1Weights,
    caputo_exp_series,
    caputo_power,
    caputo_quadrature_oracle,
    gamma_function,
    history_term,
    l1_weights,
)
from .exceptions import (
    ConvergenceError,
    DomainError,
    ManufacturedResidualError,
    ReconstructionError,
    SingularMatrixError,
)
from .harness import (
    ConvergenceRow,
    ConvergenceTable,
    ErrorReport,
    convergence_study,
    emit_solution_dump,
    emit_table,
    error_norms,
    solve_problem,
    temporal_study,
)
from .problems import (
    check_manufactured,
    get_problem,
    manufacture,
    pde_residual,
    problem1,
    problem2,
    problem3,
)
from .solver import (
    ProblemSpec,
    SchemeConfig,
    SolutionHistory,
    assemble_system,
    reconstruct_derivatives,
    run,
    stability_monitor,
)
from .spline import (
    CoefficientSource,
    ConsistencyCoefficients,
    Mesh,
    SplineNodeData,
    consistency_coefficients_from_theta,
    evaluate_spline,
    optimal_consistency_coefficients,
    relation_residual,
    second_derivatives_from_relation,
    segment_coefficients,
)

__version__ = "0.1.0"
