"""Configurable-precision scalars.

The rigorous profile runs on gmpy2 mpfr with P = 8L + 64 mantissa bits,
where L is the instance bit complexity.  Intermediate path-following
quantities reach magnitude ~2^(7L), and the final rounding step needs
absolute accuracy well below 1, so the margin matters.  The fast profile
is plain machine doubles and voids every exactness guarantee.

Arithmetic in the hot loops is done with native operators; mpfr and
float both support them, so callers stay agnostic of the profile.
"""

import math

import gmpy2

FAST_PRECISION = 53


class ScalarContext:
    """Precision profile handed around with each solve."""

    def __init__(self, precision):
        if precision < 24:
            raise ValueError("precision too small to be meaningful")
        self.precision = int(precision)
        self.is_float = self.precision <= FAST_PRECISION

    def activate(self):
        # gmpy2 keeps a per-thread context; solves are single threaded.
        if not self.is_float:
            gmpy2.get_context().precision = self.precision

    def from_int(self, value):
        if self.is_float:
            return float(value)
        return gmpy2.mpfr(value)

    def zero(self):
        return 0.0 if self.is_float else gmpy2.mpfr(0)

    def sqrt(self, value):
        if self.is_float:
            return math.sqrt(value)
        return gmpy2.sqrt(value)

    def log(self, value):
        if self.is_float:
            return math.log(value)
        return gmpy2.log(value)

    def pow2(self, exponent):
        """2**exponent, exact in the representation."""
        if self.is_float:
            return math.ldexp(1.0, exponent)
        return gmpy2.exp2(gmpy2.mpfr(exponent))

    def to_float(self, value):
        return float(value)

    def nearest_int(self, value):
        """Nearest integer and the distance to it, as (int, float)."""
        if self.is_float:
            r = round(value)
            return int(r), abs(value - r)
        r = gmpy2.rint(value)
        return int(r), float(abs(value - r))

    def __repr__(self):
        kind = "fast" if self.is_float else "rigorous"
        return f"ScalarContext({self.precision} bits, {kind})"


def rigorous_context(bit_complexity):
    return ScalarContext(8 * int(bit_complexity) + 64)


def fast_context():
    return ScalarContext(FAST_PRECISION)
