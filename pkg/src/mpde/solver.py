"""Cauchy problems for moment PDEs: validation, the order-0 Borel change of
variables in z, and the coefficient recurrence that produces the unique
formal solution.

Writing u(t,z) = sum u_n(z) t^n with raw coefficients, the equation pins
down, for n >= M,

    u_n = (m0(n-M)/m0(n)) * [ g_n - sum_{(j,alpha)} sum_{p=q..n-j}
          c_{j,alpha,p} * (m0(n-p)/m0(n-p-j)) * D_z^alpha u_{n-p} ],

where g_n = f_{n-M}, the c_{j,alpha,p} are the t-coefficients of
t^{M-j} a_{j,alpha}(t), and q = ord_t(a) - j + M.  The inner sum runs while
n-p-j >= 0: the boundary index n-p-j = 0 contributes m0(n-p)/m0(0) = m0(n-p),
which is exactly what term-by-term differentiation of t^{n-p} gives.  The
residual check in the test suite adjudicates this convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath
from mpmath import mpf

from .moments import MomentFunction, combine, gamma_moment, regularity_constants
from .precision import to_mpf
from .series import (
    MultiSeries,
    majorant,
    series_add,
    series_scale,
    truncate_series,
    zero_series,
)
from .operators import (
    OperatorSpec,
    TimeSeries,
    apply_operator,
    borel_z,
    moment_diff_z,
)


class ValidationFailure(ValueError):
    """Raised when solving is attempted on a problem that fails validation."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        failed = ", ".join(c.name for c in report.checks if not c.passed)
        super().__init__(f"problem fails validation: {failed}")


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> ConditionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class CauchyProblem:
    """Operator + initial data phi_j (j < M) + forcing f, one arithmetic mode."""

    spec: OperatorSpec
    initial: tuple
    forcing: TimeSeries

    def __post_init__(self):
        object.__setattr__(self, "initial", tuple(self.initial))
        if len(self.initial) != self.spec.M:
            raise ValueError(
                f"need {self.spec.M} initial series, got {len(self.initial)}"
            )
        dims = {phi.dim for phi in self.initial} | {self.forcing.dim}
        if dims != {self.spec.dim}:
            raise ValueError(f"data dimensions {dims} do not match operator dimension {self.spec.dim}")
        modes = {phi.mode for phi in self.initial} | {self.forcing.mode}
        if len(modes) != 1:
            raise ValueError(f"mixed arithmetic modes in problem data: {modes}")

    @property
    def mode(self) -> str:
        return self.initial[0].mode


@dataclass(frozen=True)
class SolutionSeries:
    """Solution coefficients plus the recurrence's audit trail.

    ``u`` holds every u_n truncated to the uniform report degree; ``working``
    keeps the full materialized degrees (decreasing in n) that the residual
    check consumes.  ``g_used`` and ``c_table`` record the forcing
    coefficients and the t-shifted operator coefficients the recurrence saw.
    """

    u: TimeSeries
    working: TimeSeries
    provenance: str
    report_degree: int
    g_used: tuple = ()
    c_table: dict = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return self.u.n_max

    @property
    def valid_degrees(self) -> tuple:
        return tuple(c.valid_degree for c in self.working.coeffs)


def validate(problem: CauchyProblem, regularity_n: int = 50) -> ValidationReport:
    """Check the solvability conditions; report-only, never raises.

    Conditions: term_order (ord_t(a) >= max{0, j-M+1}, i.e. q >= 1),
    finite_terms, time_moment_regular (m0(0)=1 plus empirical regularity
    constants), positive_orders.
    """
    spec = problem.spec
    checks = []

    offenders = []
    for term in spec.terms:
        sigma = term.ord_t()
        if sigma is None:
            continue
        if sigma < max(0, term.j - spec.M + 1):
            offenders.append(f"j={term.j}, alpha={term.alpha} (ord_t={sigma})")
    checks.append(ConditionCheck(
        "term_order",
        not offenders,
        "all terms satisfy ord_t(a) >= max{0, j-M+1}" if not offenders
        else "violated at term " + "; ".join(offenders),
    ))

    checks.append(ConditionCheck(
        "finite_terms", True, f"{len(spec.terms)} coefficient terms"
    ))

    m0_ok = spec.m0.value(0) == 1
    detail = "m0(0) = 1"
    if m0_ok and spec.m0.order > 0:
        a, big_a = regularity_constants(spec.m0, regularity_n)
        m0_ok = a > 0 and mpmath.isfinite(big_a)
        detail = (f"m0(0) = 1; ratio envelope on n <= {regularity_n}: "
                  f"[{mpmath.nstr(a, 8)}, {mpmath.nstr(big_a, 8)}]")
    checks.append(ConditionCheck("time_moment_regular", m0_ok, detail))

    orders_ok = spec.m0.order > 0 and all(o > 0 for o in spec.orders)
    checks.append(ConditionCheck(
        "positive_orders", orders_ok,
        f"s0 = {spec.m0.order}, s = {tuple(str(o) for o in spec.orders)}",
    ))

    return ValidationReport(tuple(checks))


def zero_forcing(spec: OperatorSpec, n_max: int, report_degree: int = 0,
                 mode: str = "exact") -> TimeSeries:
    """A zero forcing materialized to the degrees solve_formal will demand."""
    n_top = max(0, n_max - spec.M)
    degree = report_degree + n_top * spec.max_alpha
    return TimeSeries(tuple(
        zero_series(spec.dim, degree, mode) for _ in range(n_top + 1)
    ))


def space_borel_quotients(spec: OperatorSpec) -> list:
    """The order-0 moment functions Gamma_{s_j}/m_j used by the z-transform."""
    return [combine(gamma_moment(mj.order), mj, "quotient") for mj in spec.m]


def borel_problem(problem: CauchyProblem) -> CauchyProblem:
    """Transform to the equivalent problem whose z-moments are Gamma_{s_j}.

    Data are pushed through the order-0 Borel transform in z; the operator
    keeps its coefficients and time moment function.
    """
    spec = problem.spec
    quotients = space_borel_quotients(spec)
    new_spec = OperatorSpec(
        M=spec.M,
        m0=spec.m0,
        m=tuple(gamma_moment(mj.order) for mj in spec.m),
        terms=spec.terms,
    )
    initial = tuple(borel_z(phi, quotients) for phi in problem.initial)
    forcing = borel_z(problem.forcing, quotients)
    return CauchyProblem(spec=new_spec, initial=initial, forcing=forcing)


def inverse_borel_solution(problem: CauchyProblem, sol: SolutionSeries) -> SolutionSeries:
    """Map a solution of borel_problem(problem) back to the original unknowns."""
    quotients = space_borel_quotients(problem.spec)
    return SolutionSeries(
        u=borel_z(sol.u, quotients, inverse=True),
        working=borel_z(sol.working, quotients, inverse=True),
        provenance="via-borel",
        report_degree=sol.report_degree,
        g_used=sol.g_used,
        c_table=sol.c_table,
    )


def _m0_ratio(m0: MomentFunction, a: int, b: int, mode: str):
    if mode == "exact":
        return m0.value_exact(a) / m0.value_exact(b)
    return m0.value(a) / m0.value(b)


def _shifted_coefficients(term, M: int, n_max: int) -> dict:
    """c_{j,alpha,p}: t-coefficients of t^{M-j} a_{j,alpha}(t), p = q..n_max."""
    out = {}
    for idx, value in enumerate(term.coeff):
        p = idx + M - term.j
        if 0 <= p <= n_max and value != 0:
            out[p] = value
    return out


def solve_formal(problem: CauchyProblem, n_max: int, report_degree: int = 0,
                 majorant_mode: bool = False,
                 drop_zero_boundary: bool = False) -> SolutionSeries:
    """Run the coefficient recurrence up to t^n_max.

    Initial data must be materialized to z-degree report_degree +
    n_max * max|alpha| so that every reported coefficient is provable; the
    returned u_n all carry valid_degree = report_degree, with the full
    working degrees kept alongside.

    majorant_mode replaces data and coefficients by absolute values and flips
    the recurrence's subtraction to addition, producing the dominating
    sequence.  drop_zero_boundary reproduces the (incorrect) convention that
    also drops the n-p-j = 0 boundary term; it exists so tests can show the
    residual rejects it.
    """
    report = validate(problem)
    if not report.passed:
        raise ValidationFailure(report)

    spec = problem.spec
    mode = problem.mode
    m0 = spec.m0
    a_max = spec.max_alpha
    needed = report_degree + n_max * a_max

    for j, phi in enumerate(problem.initial):
        if phi.valid_degree < needed:
            raise ValueError(
                f"initial series {j} is materialized to degree {phi.valid_degree}; "
                f"need {needed} (= report {report_degree} + {n_max}*{a_max}) "
                f"to report degree {report_degree} at n_max {n_max}"
            )
    if n_max >= spec.M:
        if problem.forcing.n_max < n_max - spec.M:
            raise ValueError(
                f"forcing is truncated at t^{problem.forcing.n_max}; "
                f"need t^{n_max - spec.M} for n_max {n_max}"
            )
        forcing_need = report_degree + (n_max - spec.M) * a_max
        for k in range(n_max - spec.M + 1):
            fk = problem.forcing.coeffs[k]
            if fk.valid_degree < report_degree + (n_max - spec.M - k) * a_max:
                raise ValueError(
                    f"forcing coefficient {k} is materialized to degree "
                    f"{fk.valid_degree}; need {forcing_need - k * a_max}"
                )

    c_table = {}
    for term in spec.terms:
        if term.truncation_order is not None and term.truncation_order < n_max - spec.M:
            raise ValueError(
                f"coefficient of term (j={term.j}, alpha={term.alpha}) is "
                f"truncated at t^{term.truncation_order}; need t^{n_max - spec.M} "
                f"for n_max {n_max}"
            )
        cs = _shifted_coefficients(term, spec.M, n_max)
        if majorant_mode:
            cs = {p: abs(v) for p, v in cs.items()}
        c_table[(term.j, term.alpha)] = cs

    u = []
    for j in range(min(spec.M, n_max + 1)):
        phi = majorant(problem.initial[j]) if majorant_mode else problem.initial[j]
        u.append(series_scale(phi, _m0_ratio(m0, 0, j, mode)))

    g_used = []
    diff_cache = {}

    def dz(k: int, alpha: tuple) -> MultiSeries:
        key = (k, alpha)
        if key not in diff_cache:
            diff_cache[key] = moment_diff_z(u[k], spec.m, alpha)
        return diff_cache[key]

    for n in range(spec.M, n_max + 1):
        g_n = problem.forcing.coeffs[n - spec.M]
        if majorant_mode:
            g_n = majorant(g_n)
        g_used.append(g_n)
        acc = g_n
        sign = 1 if majorant_mode else -1
        for term in spec.terms:
            cs = c_table[(term.j, term.alpha)]
            for p, c in cs.items():
                if p > n - term.j:
                    continue
                k = n - p
                if drop_zero_boundary and k - term.j == 0:
                    continue
                factor = c * _m0_ratio(m0, k, k - term.j, mode)
                acc = series_add(acc, series_scale(dz(k, term.alpha), sign * factor))
        u.append(series_scale(acc, _m0_ratio(m0, n - spec.M, n, mode)))

    working = TimeSeries(tuple(u))
    reported = working.map_z(
        lambda c: truncate_series(c, report_degree, degree_cap=report_degree)
    )
    return SolutionSeries(
        u=reported,
        working=working,
        provenance="majorant" if majorant_mode else "direct",
        report_degree=report_degree,
        g_used=tuple(g_used),
        c_table=c_table,
    )


def solve_majorant(problem: CauchyProblem, n_max: int, report_degree: int = 0) -> SolutionSeries:
    """The nonnegative dominating sequence: same recurrence on absolute values."""
    return solve_formal(problem, n_max, report_degree, majorant_mode=True)


def solve_via_borel(problem: CauchyProblem, n_max: int, report_degree: int = 0) -> SolutionSeries:
    """Solve the z-Borel-transformed problem, then map back."""
    bsol = solve_formal(borel_problem(problem), n_max, report_degree)
    return inverse_borel_solution(problem, bsol)


def residual(problem: CauchyProblem, sol: SolutionSeries) -> TimeSeries:
    """P(u) - f on the jointly valid (t-order, z-degree) window."""
    app = apply_operator(problem.spec, sol.working)
    n_res = min(app.n_max, problem.forcing.n_max)
    if n_res < 0:
        raise ValueError("empty residual window")
    out = []
    for n in range(n_res + 1):
        out.append(series_add(app.coeffs[n], series_scale(problem.forcing.coeffs[n], -1)))
    return TimeSeries(tuple(out))


def initial_residuals(problem: CauchyProblem, sol: SolutionSeries) -> list:
    """phi_j - m0(j) * u_j for j < M (zero when initial conditions hold)."""
    spec = problem.spec
    out = []
    for j in range(spec.M):
        scaled = series_scale(sol.working.coeffs[j], _m0_ratio(spec.m0, j, 0, problem.mode))
        out.append(series_add(problem.initial[j], series_scale(scaled, -1)))
    return out


def residual_max_relative(problem: CauchyProblem, sol: SolutionSeries) -> mpf:
    """max |residual coefficient| / (coefficientwise magnitude envelope).

    The envelope applies the operator with absolute values to |u| and adds
    |f|, so it bounds the sum of magnitudes of everything that cancelled; a
    zero envelope forces an exactly zero residual.  Returns an mpf (0 for an
    identically zero residual; +inf if a zero envelope meets a nonzero
    residual, which indicates a genuine defect).
    """
    res = residual(problem, sol)
    envelope = apply_operator(problem.spec, sol.working, absolute=True)
    worst = mpf(0)
    for n in range(res.n_max + 1):
        env_n = series_add(envelope.coeffs[n], majorant(problem.forcing.coeffs[n]))
        vd = min(res.coeffs[n].valid_degree, env_n.valid_degree)
        for alpha, v in res.coeffs[n].coeffs.items():
            if sum(alpha) > vd:
                continue
            denom = env_n.coeffs.get(alpha, 0)
            num = abs(v)
            if denom == 0:
                if num != 0:
                    return mpf("inf")
                continue
            worst = max(worst, to_mpf(num) / to_mpf(denom))
    return worst
