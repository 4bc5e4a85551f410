"""Moment functions: positive sequences n -> m(n) with m(0) = 1 and a declared
growth order s, generalizing n -> Gamma(1 + s*n).

A moment function of order s grows like Gamma(1+sn) up to a geometric factor;
products and quotients combine orders additively.  The ``gamma`` kind is the
classical family; ``tabulated`` lets tests inject arbitrary (valid) sequences.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import mpmath
from mpmath import mpf

from .precision import to_mpf


class ExactValueUnavailable(ValueError):
    """Raised when a moment value is irrational and exact arithmetic was requested."""


@dataclass(frozen=True)
class MomentFunction:
    """An evaluable positive sequence with a declared order.

    kind is one of gamma|product|quotient|tabulated.  gamma evaluates to
    Gamma(1 + order*n); product/quotient compose two children pointwise;
    tabulated wraps user-supplied values.
    """

    kind: str
    order: Fraction
    left: Optional["MomentFunction"] = None
    right: Optional["MomentFunction"] = None
    table: Union[tuple, Callable, None] = None

    def value(self, n: int) -> mpf:
        """m(n) as an arbitrary-precision float (current global precision)."""
        return _value_float(self, int(n), mpmath.mp.prec)

    def value_exact(self, n: int) -> Fraction:
        """m(n) as an exact rational; raises ExactValueUnavailable otherwise."""
        return _value_exact(self, int(n))

    @property
    def is_exact(self) -> bool:
        """True when every value is exactly rational."""
        try:
            self.value_exact(1)
        except ExactValueUnavailable:
            return False
        return True

    def __repr__(self):
        if self.kind == "gamma":
            return f"gamma_moment({self.order})"
        if self.kind in ("product", "quotient"):
            return f"{self.kind}({self.left!r}, {self.right!r})"
        return f"tabulated_moment(order={self.order})"


def gamma_moment(s) -> MomentFunction:
    """The moment function n -> Gamma(1 + s*n) of order s >= 0."""
    s = Fraction(s)
    if s < 0:
        raise ValueError(f"gamma moment order must be >= 0, got {s}")
    return MomentFunction(kind="gamma", order=s)


def combine(m1: MomentFunction, m2: MomentFunction, op: str) -> MomentFunction:
    """Pointwise product or quotient; orders add or subtract.

    Quotients require s1 >= s2 so the resulting order is nonnegative.
    """
    if op == "product":
        return MomentFunction(kind="product", order=m1.order + m2.order, left=m1, right=m2)
    if op == "quotient":
        if m1.order < m2.order:
            raise ValueError(
                f"quotient order would be negative ({m1.order} - {m2.order})"
            )
        return MomentFunction(kind="quotient", order=m1.order - m2.order, left=m1, right=m2)
    raise ValueError(f"unknown combine op {op!r} (want 'product' or 'quotient')")


def tabulated_moment(values: Union[Sequence, Callable], order) -> MomentFunction:
    """Wrap explicit values (a sequence, or a callable n -> value).

    The normalisation m(0) = 1 and positivity are enforced; sequences are
    checked up front, callables at evaluation time.
    """
    order = Fraction(order)
    if callable(values):
        table = values
        v0 = values(0)
    else:
        table = tuple(values)
        if not table:
            raise ValueError("tabulated moment function needs at least m(0)")
        for n, v in enumerate(table):
            if not v > 0:
                raise ValueError(f"moment values must be positive, got m({n}) = {v}")
        v0 = table[0]
    if not _is_one(v0):
        raise ValueError(f"moment function must satisfy m(0) = 1, got {v0}")
    return MomentFunction(kind="tabulated", order=order, table=table)


def moment_value(m: MomentFunction, n: int) -> mpf:
    return m.value(n)


@functools.lru_cache(maxsize=200_000)
def _value_float(m: MomentFunction, n: int, prec: int) -> mpf:
    if n < 0:
        raise ValueError(f"moment functions are defined on n >= 0, got {n}")
    if m.kind == "gamma":
        return mpmath.gamma(1 + to_mpf(m.order) * n)
    if m.kind == "product":
        return _value_float(m.left, n, prec) * _value_float(m.right, n, prec)
    if m.kind == "quotient":
        if m.left == m.right:
            return mpf(1)
        return _value_float(m.left, n, prec) / _value_float(m.right, n, prec)
    return _table_value(m, n, exact=False)


@functools.lru_cache(maxsize=200_000)
def _value_exact(m: MomentFunction, n: int) -> Fraction:
    if n < 0:
        raise ValueError(f"moment functions are defined on n >= 0, got {n}")
    if m.kind == "gamma":
        sn = m.order * n
        if sn.denominator == 1:
            return Fraction(math.factorial(sn.numerator))
        raise ExactValueUnavailable(
            f"Gamma(1 + {m.order}*{n}) is not rational; use float mode"
        )
    if m.kind == "product":
        return _value_exact(m.left, n) * _value_exact(m.right, n)
    if m.kind == "quotient":
        if m.left == m.right:
            return Fraction(1)
        return _value_exact(m.left, n) / _value_exact(m.right, n)
    v = _table_value(m, n, exact=True)
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    raise ExactValueUnavailable(f"tabulated value m({n}) = {v!r} is not rational")


def _table_value(m: MomentFunction, n: int, exact: bool):
    if callable(m.table):
        v = m.table(n)
    else:
        if n >= len(m.table):
            raise ValueError(
                f"tabulated moment function has {len(m.table)} values, asked for m({n})"
            )
        v = m.table[n]
    if not v > 0:
        raise ValueError(f"moment values must be positive, got m({n}) = {v}")
    return v if exact else to_mpf(v)


def _is_one(v) -> bool:
    if isinstance(v, (int, Fraction)):
        return v == 1
    return to_mpf(v) == 1


def regularity_constants(m: MomentFunction, n_max: int) -> tuple[mpf, mpf]:
    """Empirical (a, A) with a*n^s <= m(n)/m(n-1) <= A*n^s on 1..n_max.

    For order 0 the n^s factor is identically 1, so the plain consecutive
    ratio extrema are returned (the regularity notion itself needs s > 0).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    s = to_mpf(m.order)
    lo, hi = None, None
    for n in range(1, n_max + 1):
        ratio = m.value(n) / m.value(n - 1)
        if m.order > 0:
            ratio = ratio / mpmath.power(n, s)
        lo = ratio if lo is None else min(lo, ratio)
        hi = ratio if hi is None else max(hi, ratio)
    return lo, hi


def growth_envelope(m: MomentFunction, n_max: int) -> tuple[mpf, mpf]:
    """Empirical (a, A) with a^n*Gamma_s(n) <= m(n) <= A^n*Gamma_s(n) on 1..n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    s = to_mpf(m.order)
    lo, hi = None, None
    for n in range(1, n_max + 1):
        gs = mpmath.gamma(1 + s * n)
        root = mpmath.power(m.value(n) / gs, mpf(1) / n)
        lo = root if lo is None else min(lo, root)
        hi = root if hi is None else max(hi, root)
    return lo, hi
