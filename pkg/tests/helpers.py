"""Shared test utilities: random problem generators and independent oracles.

Everything here is deliberately independent of the code paths it checks:
the hull oracle separates points with explicit support directions, and the
heat-solution oracle differentiates coefficient lists by hand.
"""

from __future__ import annotations

import random
from fractions import Fraction

from mpde import (
    CauchyProblem,
    OperatorSpec,
    OperatorTerm,
    TimeSeries,
    gamma_moment,
    generator_series,
    make_series,
    zero_series,
)

ORDERS_ANY = [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2)]
ORDERS_EXACT = [Fraction(1), Fraction(2)]


def random_operator_spec(rng: random.Random, exact: bool = False, max_m: int = 3,
                         max_terms: int = 5, dims=(1, 2)) -> OperatorSpec:
    """A valid random operator (q >= 1 for every term, ord_t <= 4)."""
    orders = ORDERS_EXACT if exact else ORDERS_ANY
    dim = rng.choice(list(dims))
    big_m = rng.randint(1, max_m)
    m0 = gamma_moment(rng.choice(orders))
    m = tuple(gamma_moment(rng.choice(orders)) for _ in range(dim))
    terms = []
    seen = set()
    for _ in range(rng.randint(0, max_terms)):
        j = rng.randint(0, big_m + 1)
        alpha = tuple(rng.randint(0, 2) for _ in range(dim))
        if (j, alpha) in seen:
            continue
        seen.add((j, alpha))
        ord_t = rng.randint(max(0, j - big_m + 1), 4)
        coeff = [Fraction(0)] * ord_t
        coeff.append(Fraction(rng.randint(1, 3) * rng.choice([-1, 1])))
        for _ in range(rng.randint(0, 2)):
            coeff.append(Fraction(rng.randint(-2, 2)))
        terms.append(OperatorTerm(j=j, alpha=alpha, coeff=tuple(coeff)))
    return OperatorSpec(M=big_m, m0=m0, m=m, terms=tuple(terms))


def random_problem(rng: random.Random, exact: bool = True, n_max: int = 8,
                   report_degree: int = 1, max_m: int = 2,
                   max_terms: int = 3):
    """A random solvable Cauchy problem with a sufficient degree budget."""
    spec = random_operator_spec(rng, exact=exact, max_m=max_m, max_terms=max_terms)
    mode = "exact" if exact else "float"
    dim = spec.dim
    full = report_degree + n_max * spec.max_alpha
    initial = []
    for _ in range(spec.M):
        choice = rng.choice(["geometric", "sparse", "zero"])
        if choice == "geometric":
            ratio = Fraction(rng.randint(-2, 2), rng.choice([1, 2]))
            initial.append(generator_series("geometric", dim, full, mode, ratio=ratio))
        elif choice == "sparse":
            table = {}
            for _ in range(rng.randint(1, 4)):
                alpha = tuple(rng.randint(0, min(3, full)) for _ in range(dim))
                if sum(alpha) <= full:
                    table[alpha] = Fraction(rng.randint(-3, 3))
            initial.append(make_series(dim, table, full, mode))
        else:
            initial.append(zero_series(dim, full, mode))
    n_top = max(0, n_max - spec.M)
    fdeg = report_degree + n_top * spec.max_alpha
    fcoeffs = []
    for _ in range(n_top + 1):
        alpha = tuple(rng.randint(0, 1) for _ in range(dim))
        if rng.random() < 0.5 or sum(alpha) > fdeg:
            fcoeffs.append(zero_series(dim, fdeg, mode))
        else:
            table = {alpha: Fraction(rng.randint(-2, 2))}
            fcoeffs.append(make_series(dim, table, fdeg, mode))
    problem = CauchyProblem(spec=spec, initial=tuple(initial),
                            forcing=TimeSeries(tuple(fcoeffs)))
    return problem


def bruteforce_hull_vertices(points):
    """Hull corners of the union of upper-left quadrants, by direction probing.

    For every support direction k (strictly between consecutive pairwise
    slopes, plus one below and one above all of them) the unique maximizer of
    k*x - y over the generator points is a corner; the union over directions
    is the full corner set.
    """
    pts = sorted(set((Fraction(x), Fraction(y)) for x, y in points))
    if len(pts) == 1:
        return list(pts)
    slopes = set()
    for i in range(len(pts)):
        for k in range(i + 1, len(pts)):
            (x1, y1), (x2, y2) = pts[i], pts[k]
            if x1 != x2:
                slopes.add((y2 - y1) / (x2 - x1))
    pos = sorted(s for s in slopes if s > 0)
    if not pos:
        dirs = [Fraction(1)]
    else:
        dirs = [pos[0] / 2]
        dirs += [(a + b) / 2 for a, b in zip(pos, pos[1:])]
        dirs.append(pos[-1] + 1)
    verts = set()
    for k in dirs:
        best, arg, tie = None, None, False
        for p in pts:
            val = k * p[0] - p[1]
            if best is None or val > best:
                best, arg, tie = val, p, False
            elif val == best:
                tie = True
        assert not tie, f"direction {k} is not separating"
        verts.add(arg)
    return sorted(verts)


def heat_solution_oracle(n_terms: int, phi_coeffs):
    """u_n(0) for the heat problem by repeated differentiation of phi.

    u_n = (d/dz)^{2n} phi / n!; works directly on the coefficient list, with
    no series or operator machinery involved.
    """
    c = [Fraction(v) for v in phi_coeffs]
    fact = 1
    out = []
    for n in range(n_terms + 1):
        if n > 0:
            c = [(l + 1) * c[l + 1] for l in range(len(c) - 1)]
            c = [(l + 1) * c[l + 1] for l in range(len(c) - 1)]
            fact *= n
        out.append(c[0] / fact if c else Fraction(0))
    return out
