import math
import random
from fractions import Fraction

import mpmath
import pytest

from mpde import (
    CauchyProblem,
    OperatorSpec,
    OperatorTerm,
    TimeSeries,
    ValidationFailure,
    borel_problem,
    combine,
    gamma_moment,
    generator_series,
    initial_residuals,
    make_series,
    residual,
    residual_max_relative,
    solve_formal,
    solve_majorant,
    solve_via_borel,
    time_series,
    validate,
    zero_forcing,
    zero_series,
)
from mpde.series import series_equal
from helpers import heat_solution_oracle, random_problem

G1 = gamma_moment(1)
GH = gamma_moment(Fraction(1, 2))


def heat_problem(n_max, report_degree=0, mode="exact", s0=Fraction(1)):
    spec = OperatorSpec(M=1, m0=gamma_moment(s0), m=(G1,),
                        terms=(OperatorTerm(j=0, alpha=(2,), coeff=(Fraction(-1),)),))
    full = report_degree + 2 * n_max
    phi = generator_series("geometric", 1, full, mode, ratio=1)
    return CauchyProblem(spec=spec, initial=(phi,),
                         forcing=zero_forcing(spec, n_max, report_degree, mode))


class TestValidate:
    def test_heat_passes_all(self):
        rep = validate(heat_problem(6))
        assert rep.passed
        assert {c.name for c in rep.checks} == {
            "term_order", "finite_terms", "time_moment_regular", "positive_orders"}

    def test_j_equals_m_with_zero_order_fails(self):
        spec = OperatorSpec(M=1, m0=G1, m=(G1,),
                            terms=(OperatorTerm(j=1, alpha=(1,), coeff=(Fraction(1),)),))
        phi = generator_series("geometric", 1, 10, ratio=1)
        prob = CauchyProblem(spec=spec, initial=(phi,), forcing=zero_forcing(spec, 4))
        rep = validate(prob)
        assert not rep.passed
        bad = rep.check("term_order")
        assert not bad.passed and "j=1" in bad.detail

    def test_low_j_with_zero_order_passes(self):
        spec = OperatorSpec(M=2, m0=G1, m=(G1,),
                            terms=(OperatorTerm(j=0, alpha=(1,), coeff=(Fraction(1),)),))
        phi = generator_series("geometric", 1, 10, ratio=1)
        prob = CauchyProblem(spec=spec, initial=(phi, phi), forcing=zero_forcing(spec, 4))
        assert validate(prob).check("term_order").passed

    def test_solve_refuses_invalid_problem(self):
        spec = OperatorSpec(M=1, m0=G1, m=(G1,),
                            terms=(OperatorTerm(j=1, alpha=(1,), coeff=(Fraction(1),)),))
        phi = generator_series("geometric", 1, 10, ratio=1)
        prob = CauchyProblem(spec=spec, initial=(phi,), forcing=zero_forcing(spec, 4))
        with pytest.raises(ValidationFailure, match="term_order"):
            solve_formal(prob, 4, 0)


class TestBorelProblem:
    def test_identity_when_already_gamma(self):
        prob = heat_problem(5)
        bp = borel_problem(prob)
        for a, b in zip(prob.initial, bp.initial):
            assert series_equal(a, b)
        assert bp.spec.m[0].order == 1

    def test_transform_scales_by_moment_over_gamma(self):
        # phi_l = m1(l) with m1 = Gamma1^2 (order 2): psi_l = m1(l)^2 / (2l)!
        m1 = combine(G1, G1, "product")
        spec = OperatorSpec(M=1, m0=G1, m=(m1,),
                            terms=(OperatorTerm(j=0, alpha=(1,), coeff=(Fraction(1),)),))
        cap = 8
        phi = make_series(1, {(l,): m1.value_exact(l) for l in range(cap + 1)}, cap)
        prob = CauchyProblem(spec=spec, initial=(phi,), forcing=zero_forcing(spec, 4))
        psi = borel_problem(prob).initial[0]
        for l in range(cap + 1):
            want = (Fraction(math.factorial(l)) ** 2) ** 2 / math.factorial(2 * l)
            assert psi.coefficient((l,)) == want

    def test_zero_forcing_stays_zero(self):
        prob = heat_problem(5)
        assert all(not c.coeffs for c in borel_problem(prob).forcing.coeffs)


class TestSolveFormal:
    def test_heat_against_differentiation_oracle(self):
        n_max = 20
        prob = heat_problem(n_max)
        sol = solve_formal(prob, n_max, 0)
        oracle = heat_solution_oracle(n_max, [1] * (2 * n_max + 1))
        for n in range(n_max + 1):
            assert sol.u.coeffs[n].coefficient((0,)) == oracle[n]
        # closed form (2n)!/n!
        assert oracle[5] == Fraction(math.factorial(10), math.factorial(5))

    def test_initial_coefficients(self):
        prob = heat_problem(4)
        sol = solve_formal(prob, 4, 0)
        assert sol.working.coeffs[0].coefficient((0,)) == 1    # u_0 = phi / m0(0)

    def test_forcing_only_cascade(self):
        spec = OperatorSpec(M=1, m0=G1, m=(G1,), terms=())
        phi = zero_series(1, 0)
        forcing = time_series([make_series(1, {(0,): 1}, 0) for _ in range(8)])
        prob = CauchyProblem(spec=spec, initial=(phi,), forcing=forcing)
        sol = solve_formal(prob, 8, 0)
        assert sol.u.coeffs[1].coefficient((0,)) == 1
        assert sol.u.coeffs[2].coefficient((0,)) == Fraction(1, 2)
        for n in range(1, 9):
            assert sol.u.coeffs[n].coefficient((0,)) == Fraction(1, n)

    def test_boundary_convention_adjudicated_by_residual(self):
        # the p-sum hits n-p-j = 0 at n = j + p with v_j built from initial
        # data; the factor there is m0(n-p)/m0(0), not zero, and dropping it
        # must break the residual
        spec = OperatorSpec(M=2, m0=G1, m=(G1,),
                            terms=(OperatorTerm(j=1, alpha=(1,),
                                                coeff=(Fraction(0), Fraction(1))),))
        n_max = 6
        phi = generator_series("geometric", 1, n_max, ratio=Fraction(1, 2))
        prob = CauchyProblem(spec=spec, initial=(phi, phi),
                             forcing=zero_forcing(spec, n_max))
        good = solve_formal(prob, n_max, 0)
        assert residual_max_relative(prob, good) == 0
        bad = solve_formal(prob, n_max, 0, drop_zero_boundary=True)
        assert residual_max_relative(prob, bad) > 0

    def test_insufficient_degree_budget_rejected(self):
        spec = heat_problem(4).spec
        phi = generator_series("geometric", 1, 4, ratio=1)
        prob = CauchyProblem(spec=spec, initial=(phi,), forcing=zero_forcing(spec, 4))
        with pytest.raises(ValueError, match="degree"):
            solve_formal(prob, 4, 0)

    def test_report_degree_uniform(self):
        prob = heat_problem(6, report_degree=3)
        sol = solve_formal(prob, 6, 3)
        assert all(c.valid_degree == 3 for c in sol.u.coeffs)
        assert sol.valid_degrees == tuple(3 + 2 * (6 - n) for n in range(7))


class TestSolveMajorant:
    def test_sign_stable_problem_is_fixed_point(self):
        # heat: the recurrence's effective coefficients -c are nonnegative, so
        # with nonnegative data the solution is its own majorant
        prob = heat_problem(8)
        sol = solve_formal(prob, 8, 0)
        maj = solve_majorant(prob, 8, 0)
        for n in range(9):
            assert sol.working.coeffs[n].coeffs == maj.working.coeffs[n].coeffs

    def test_positive_coefficient_gives_alternating_solution(self):
        prob = heat_problem(8)
        spec = OperatorSpec(M=1, m0=G1, m=(G1,),
                            terms=(OperatorTerm(j=0, alpha=(2,), coeff=(Fraction(1),)),))
        prob = CauchyProblem(spec=spec, initial=prob.initial, forcing=prob.forcing)
        sol = solve_formal(prob, 8, 0)
        maj = solve_majorant(prob, 8, 0)
        for n in range(9):
            for alpha, v in sol.working.coeffs[n].coeffs.items():
                assert maj.working.coeffs[n].coefficient(alpha) == abs(v)
                assert (v < 0) == (n % 2 == 1)

    def test_alternating_sign_symmetry(self):
        n_max = 8
        spec = heat_problem(n_max).spec
        full = 2 * n_max
        phi_neg = generator_series("geometric", 1, full, ratio=-1)
        prob_neg = CauchyProblem(spec=spec, initial=(phi_neg,),
                                 forcing=zero_forcing(spec, n_max))
        maj = solve_majorant(prob_neg, n_max, 0)
        pos = solve_formal(heat_problem(n_max), n_max, 0)
        for n in range(n_max + 1):
            assert maj.working.coeffs[n].coeffs == pos.working.coeffs[n].coeffs

    def test_zero_data_zero_majorant(self):
        spec = heat_problem(4).spec
        phi = zero_series(1, 8)
        prob = CauchyProblem(spec=spec, initial=(phi,), forcing=zero_forcing(spec, 4))
        maj = solve_majorant(prob, 4, 0)
        assert all(not c.coeffs for c in maj.working.coeffs)

    def test_domination_randomized(self):
        from mpde import majorizes

        rng = random.Random(99)
        for _ in range(6):
            prob = random_problem(rng, exact=True, n_max=7)
            sol = solve_formal(prob, 7, 1)
            maj = solve_majorant(prob, 7, 1)
            for n in range(8):
                assert majorizes(maj.u.coeffs[n], sol.u.coeffs[n])


class TestResidual:
    def test_residual_vanishes_exact(self):
        prob = heat_problem(10)
        sol = solve_formal(prob, 10, 0)
        res = residual(prob, sol)
        assert all(not c.coeffs for c in res.coeffs)
        assert residual_max_relative(prob, sol) == 0

    def test_initial_conditions_hold(self):
        prob = heat_problem(6)
        sol = solve_formal(prob, 6, 0)
        assert all(not r.coeffs for r in initial_residuals(prob, sol))

    def test_perturbation_shows_up_at_predictable_spot(self):
        prob = heat_problem(8)
        sol = solve_formal(prob, 8, 0)
        bumped = list(sol.working.coeffs)
        c3 = dict(bumped[3].coeffs)
        c3[(2,)] = c3.get((2,), Fraction(0)) + 1
        bumped[3] = make_series(1, c3, bumped[3].degree_cap)
        from dataclasses import replace

        sol2 = replace(sol, working=TimeSeries(tuple(bumped)))
        res = residual(prob, sol2)
        # P(delta) with delta = t^3 z^2: D_t -> 3 t^2 z^2; -D_z^2 -> -2 t^3
        assert res.coeffs[2].coefficient((2,)) == 3
        assert res.coeffs[3].coefficient((0,)) == -2

    def test_zero_problem_zero_residual(self):
        spec = heat_problem(4).spec
        prob = CauchyProblem(spec=spec, initial=(zero_series(1, 8),),
                             forcing=zero_forcing(spec, 4))
        sol = solve_formal(prob, 4, 0)
        assert residual_max_relative(prob, sol) == 0

    def test_randomized_residuals_exact(self):
        rng = random.Random(5150)
        for _ in range(5)        :
            prob = random_problem(rng, exact=True, n_max=7)
            sol = solve_formal(prob, 7, 1)
            assert residual_max_relative(prob, sol) == 0

    def test_randomized_residuals_float(self):
        rng = random.Random(60)
        tol = mpmath.ldexp(1, -(mpmath.mp.prec - 32))
        for _ in range(3):
            prob = random_problem(rng, exact=False, n_max=6)
            sol = solve_formal(prob, 6, 1)
            assert residual_max_relative(prob, sol) < tol


class TestBorelRoundTrip:
    def test_exact_round_trip_product_moment(self):
        m1 = combine(G1, G1, "product")
        spec = OperatorSpec(M=1, m0=G1, m=(m1,),
                            terms=(OperatorTerm(j=0, alpha=(1,), coeff=(Fraction(1),)),))
        n_max = 10
        phi = generator_series("geometric", 1, n_max, ratio=1)
        prob = CauchyProblem(spec=spec, initial=(phi,), forcing=zero_forcing(spec, n_max))
        direct = solve_formal(prob, n_max, 0)
        via = solve_via_borel(prob, n_max, 0)
        for n in range(n_max + 1):
            assert direct.working.coeffs[n].coeffs == via.working.coeffs[n].coeffs
        assert via.provenance == "via-borel"

    def test_float_round_trip_half_order(self):
        mh = combine(GH, GH, "product")    # order 1, not Gamma_1
        spec = OperatorSpec(M=1, m0=G1, m=(mh,),
                            terms=(OperatorTerm(j=0, alpha=(1,), coeff=(Fraction(1),)),))
        n_max = 8
        phi = generator_series("geometric", 1, n_max, "float", ratio=Fraction(1, 2))
        prob = CauchyProblem(spec=spec, initial=(phi,),
                             forcing=zero_forcing(spec, n_max, mode="float"))
        direct = solve_formal(prob, n_max, 0)
        via = solve_via_borel(prob, n_max, 0)
        for n in range(n_max + 1):
            assert series_equal(direct.working.coeffs[n], via.working.coeffs[n])

    def test_linearity_of_solutions(self):
        n_max = 6
        spec = heat_problem(n_max).spec
        full = 2 * n_max
        phi_a = generator_series("geometric", 1, full, ratio=Fraction(1, 2))
        phi_b = generator_series("polynomial", 1, full, coeffs=[1, 0, 2])
        prob_a = CauchyProblem(spec=spec, initial=(phi_a,), forcing=zero_forcing(spec, n_max))
        prob_b = CauchyProblem(spec=spec, initial=(phi_b,), forcing=zero_forcing(spec, n_max))
        from mpde import series_add

        prob_ab = CauchyProblem(spec=spec, initial=(series_add(phi_a, phi_b),),
                                forcing=zero_forcing(spec, n_max))
        sa = solve_formal(prob_a, n_max, 0)
        sb = solve_formal(prob_b, n_max, 0)
        sab = solve_formal(prob_ab, n_max, 0)
        for n in range(n_max + 1):
            assert series_equal(series_add(sa.working.coeffs[n], sb.working.coeffs[n]),
                                sab.working.coeffs[n])


class TestFactorialLemmaExactSmall:
    def test_small_grid(self):
        for big_m in range(1, 5):
            for n in range(big_m, 60):
                lhs = Fraction(math.factorial(n - big_m), math.factorial(n))
                assert lhs <= Fraction(big_m, n) ** big_m
