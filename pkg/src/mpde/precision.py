"""Arbitrary-precision arithmetic helpers shared by every module.

All big-float computation goes through mpmath.  The working precision is a
process-wide setting (mpmath's global context); the CLI sets it once per run,
tests pin it in a fixture.  Exact-mode computation uses ``fractions.Fraction``
and never touches the float context.
"""

from __future__ import annotations

import os
from fractions import Fraction

import mpmath
from mpmath import mpc, mpf

DEFAULT_PRECISION_BITS = 256
PRECISION_ENV_VAR = "MPDE_PRECISION_BITS"


def default_precision_bits() -> int:
    """Default mantissa size in bits, overridable via MPDE_PRECISION_BITS."""
    raw = os.environ.get(PRECISION_ENV_VAR)
    if raw is None or not raw.strip():
        return DEFAULT_PRECISION_BITS
    try:
        bits = int(raw)
    except ValueError as exc:
        raise ValueError(
            f"{PRECISION_ENV_VAR} must be an integer, got {raw!r}"
        ) from exc
    if bits < 16:
        raise ValueError(f"{PRECISION_ENV_VAR} must be at least 16, got {bits}")
    return bits


def set_precision(bits: int) -> None:
    """Set the global working precision (mantissa bits)."""
    if bits < 16:
        raise ValueError(f"precision must be at least 16 bits, got {bits}")
    mpmath.mp.prec = bits


def get_precision() -> int:
    return mpmath.mp.prec


def to_mpf(x) -> mpf:
    """Convert ints, floats, Fractions and decimal strings to mpf.

    Fractions are converted as numerator/denominator so that huge exact
    values (e.g. 400!) round only once, at the final division.
    """
    if isinstance(x, mpf):
        return x
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / mpmath.mpf(x.denominator)
    if isinstance(x, (int, float, str)):
        return mpmath.mpf(x)
    raise TypeError(f"cannot convert {type(x).__name__} to mpf")


def to_number(x, mode: str):
    """Coerce a scalar into the arithmetic of the given mode.

    exact mode accepts ints, Fractions and 'p/q' strings; float mode
    additionally accepts floats and mpmath numbers (complex included).
    """
    if mode == "exact":
        if isinstance(x, bool):
            raise TypeError("bool is not a coefficient")
        if isinstance(x, (int, Fraction)):
            return Fraction(x)
        if isinstance(x, str):
            return Fraction(x)
        raise TypeError(f"exact mode cannot hold {type(x).__name__} coefficients")
    if mode == "float":
        if isinstance(x, mpc):
            return x
        if isinstance(x, complex):
            return mpc(x.real, x.imag)
        return to_mpf(x)
    raise ValueError(f"unknown arithmetic mode {mode!r}")


def float_tolerance() -> mpf:
    """Relative slack for float-mode coefficient comparison: 2^-(prec-16)."""
    return mpmath.ldexp(1, -(mpmath.mp.prec - 16))


def nonzero_threshold() -> mpf:
    """Modulus below which a float-mode coefficient counts as zero: 2^-(prec/2)."""
    return mpmath.ldexp(1, -(mpmath.mp.prec // 2))
