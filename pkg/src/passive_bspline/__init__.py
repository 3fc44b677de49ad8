"""Passive approximation with B-spline Herglotz functions.

Targets on a real band are approximated by boundary values of Herglotz
functions whose generating measure is a nonnegative B-spline expansion,
with sum-rule lower bounds on the achievable error.
"""

from .approx import (
    ProblemOptions,
    ResidualSystem,
    SampleGrid,
    TargetSpec,
    assemble,
    build_basis_columns,
    make_grid,
    objective,
    permittivity_view,
    polygon_factor,
    polygonal_modulus,
    to_l1_lp,
    to_l2_problem,
    to_minimax_lp,
)
from .bspline import (
    BSplineBasis,
    Partition,
    PiecewisePolynomial,
    band_basis,
    box_convolve,
    eval_pp,
    expansion,
    holder_seminorm_estimate,
    interior_basis,
    interpolation_coeffs,
    make_partition,
    prototype_bspline,
)
from .cauchy import (
    LogPolynomial,
    cauchy_integral,
    eval_logpoly,
    hilbert_pp,
    pv_segment_integral,
    rooftop_hilbert_reference,
)
from .errors import InvalidArgumentError, NumericalFailure, PoleError, SingularEvaluationError
from .experiment import FitResult, error_of_measure, run_fit
from .herglotz import (
    Asymptotics,
    HerglotzMeasure,
    bound_chain,
    aux_hdelta,
    boundary_value,
    composed_h1,
    eval_upper,
    lower_bound_generic,
    metamaterial_bound,
    stieltjes_invert,
    sum_rule,
    symmetric_spline_density,
)
from .solver import LpStandardForm, NnlsProblem, ProductMatrix, SolveResult, solve_lp, solve_nnls

__version__ = "0.1.0"
