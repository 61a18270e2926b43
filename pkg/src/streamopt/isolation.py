"""Small-seed oracle producing perturbation weights that make the
minimum-weight member of a bounded family unique with constant
probability.

State is O(log Z + log N) words: a random modulus, and one random
multiplier per base-N digit.  Query i maps 2^i mod modulus to its
base-N digits and returns the digit/multiplier inner product, so the
same weight vector is reproduced on every pass without storing it.
"""

import json
import random
from dataclasses import dataclass

from .errors import ParameterError
from .stream_core import words_for_bits


@dataclass(frozen=True)
class IsolationOracle:
    N: int
    Z_base: int
    Z_exp: int
    modulus: int
    t: int
    r: tuple
    seed: object

    def max_output(self):
        # each of the t digits is < N and each multiplier is <= N^5
        return self.t * (self.N - 1) * self.N**5

    def state_words(self):
        bits = self.modulus.bit_length() + sum(x.bit_length() for x in self.r) + 128
        return words_for_bits(bits)

    def to_json(self):
        return json.dumps(
            {
                "N": self.N,
                "Z_base": self.Z_base,
                "Z_exp": self.Z_exp,
                "modulus": self.modulus,
                "t": self.t,
                "r": list(self.r),
                "seed": str(self.seed),
            }
        )


def _ceil_log(value, base):
    t, p = 0, 1
    while p < value:
        p *= base
        t += 1
    return t


def iso_init(N, Z, seed):
    """Draw oracle state for ground set [N] and family bound Z.

    Z may be an integer or a (base, exp) pair held unexpanded apart
    from the one big-integer sampling bound (2 N Z^2)^2.
    """
    if N < 2:
        raise ParameterError("ground set must have at least 2 indices")
    if isinstance(Z, tuple):
        z_base, z_exp = Z
    else:
        z_base, z_exp = int(Z), 1
    if z_base < 1 or z_exp < 0:
        raise ParameterError("bad family bound")
    z_value = z_base**z_exp
    rng = random.Random(f"iso:{seed}:{N}:{z_base}:{z_exp}")
    mod_cap = (2 * N * z_value * z_value) ** 2
    modulus = 1 + rng.randrange(mod_cap)
    t = _ceil_log(modulus, N)
    r = tuple(1 + rng.randrange(N**5) for _ in range(t))
    return IsolationOracle(N, z_base, z_exp, modulus, t, r, seed)


def iso_query(oracle, i):
    """Weight for index i (1-based), identical across calls and passes."""
    if not 1 <= i <= oracle.N:
        raise IndexError(f"index {i} outside [1, {oracle.N}]")
    x = pow(2, i, oracle.modulus)
    w = 0
    for rj in oracle.r:
        x, digit = divmod(x, oracle.N)
        w += digit * rj
    return w


def max_modulus_digits(N, Z):
    """Worst-case digit count t over all modulus draws for (N, Z)."""
    if isinstance(Z, tuple):
        z_value = Z[0] ** Z[1]
    else:
        z_value = int(Z)
    return _ceil_log((2 * N * z_value * z_value) ** 2, N)


def iso_from_json(blob):
    d = json.loads(blob)
    return IsolationOracle(
        d["N"], d["Z_base"], d["Z_exp"], d["modulus"], d["t"], tuple(d["r"]), d["seed"]
    )
