"""mpde: formal power-series solutions of moment PDE Cauchy problems,
Newton polygons, and Gevrey-order growth verification."""

from .moments import (
    ExactValueUnavailable,
    MomentFunction,
    combine,
    gamma_moment,
    growth_envelope,
    moment_value,
    regularity_constants,
    tabulated_moment,
)
from .series import (
    MultiSeries,
    ThetaSeries,
    evaluate,
    formal_norm,
    generator_series,
    majorant,
    majorizes,
    make_series,
    series_add,
    series_scale,
    sup_bound,
    theta_series,
    truncate_series,
    write_coefficients_csv,
    zero_series,
)
from .operators import (
    OperatorSpec,
    OperatorTerm,
    TimeSeries,
    apply_operator,
    borel_t,
    borel_z,
    moment_diff_t,
    moment_diff_z,
    time_series,
    zero_time_series,
)
from .polygon import (
    NewtonPolygon,
    build_polygon,
    generator_points,
    inverse_k1,
    polygon_contains,
    polygon_slopes,
)
from .solver import (
    CauchyProblem,
    SolutionSeries,
    ValidationFailure,
    ValidationReport,
    borel_problem,
    initial_residuals,
    inverse_borel_solution,
    residual,
    residual_max_relative,
    solve_formal,
    solve_majorant,
    solve_via_borel,
    validate,
    zero_forcing,
)
from .analysis import (
    BoundWitness,
    FitResult,
    GrowthReport,
    InequalityReport,
    coefficient_bounds,
    decide_verdict,
    fit_gevrey_order,
    intermediate_bound_roots,
    make_growth_report,
    moment_derivative_bound_probe,
    verify_gevrey_bound,
    verify_inequality,
)
from .precision import (
    default_precision_bits,
    get_precision,
    set_precision,
)
from .problemspec import (
    ProblemSpecFile,
    RunConfig,
    SpecError,
    materialize_problem,
    parse_problem_file,
)
from .svgrender import render_polygon_svg

__version__ = "0.1.0"
