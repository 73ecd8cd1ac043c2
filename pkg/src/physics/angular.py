"""
Angular-momentum coupling coefficients.

Wigner 3j and 6j symbols from the Racah sum formulas. Quantum numbers are
accepted as (half-)integers and handled internally as doubled integers.
The alternating Racah sums are accumulated exactly as rationals over a
cached factorial table, so nothing overflows or cancels catastrophically
for the j <= 20 range used here; only the final square root is rounded.
"""

import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np


def _two(j: float) -> int:
    """Doubled quantum number, or -1 when j is not a half-integer."""
    doubled = 2.0 * float(j)
    rounded = int(round(doubled))
    if abs(doubled - rounded) > 1e-9:
        return -1
    return rounded


@lru_cache(maxsize=None)
def _factorial(n: int) -> int:
    return math.factorial(n)


def _triangle(ta: int, tb: int, tc: int) -> bool:
    """Triangle rule on doubled arguments, including integer perimeter."""
    if min(ta, tb, tc) < 0:
        return False
    if (ta + tb + tc) % 2:
        return False
    return abs(ta - tb) <= tc <= ta + tb


def _delta(ta: int, tb: int, tc: int) -> Fraction:
    """Triangle coefficient (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)! (squared form)."""
    return Fraction(
        _factorial((ta + tb - tc) // 2) * _factorial((ta - tb + tc) // 2) * _factorial((-ta + tb + tc) // 2),
        _factorial((ta + tb + tc) // 2 + 1),
    )


def _signed_sqrt(prefactor: Fraction, total: Fraction) -> float:
    if total == 0:
        return 0.0
    magnitude = math.sqrt(prefactor.numerator / prefactor.denominator)
    return magnitude * (total.numerator / total.denominator)


@lru_cache(maxsize=65536)
def _wigner3j_doubled(tj1: int, tj2: int, tj3: int, tm1: int, tm2: int, tm3: int) -> float:
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tj3, tm3)):
        if tj < 0 or abs(tm) > tj or (tj + tm) % 2:
            return 0.0
    if not _triangle(tj1, tj2, tj3):
        return 0.0

    # Integer combinations (all exact after the parity checks above)
    a = (tj1 + tj2 - tj3) // 2
    b = (tj1 - tm1) // 2
    c = (tj2 + tm2) // 2
    d = (tj3 - tj2 + tm1) // 2
    e = (tj3 - tj1 - tm2) // 2

    k_min = max(0, -d, -e)
    k_max = min(a, b, c)
    if k_min > k_max:
        return 0.0

    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denominator = (
            _factorial(k) * _factorial(a - k) * _factorial(b - k)
            * _factorial(c - k) * _factorial(d + k) * _factorial(e + k)
        )
        term = Fraction(1, denominator)
        total += -term if k % 2 else term

    prefactor = _delta(tj1, tj2, tj3) * (
        _factorial((tj1 + tm1) // 2) * _factorial((tj1 - tm1) // 2)
        * _factorial((tj2 + tm2) // 2) * _factorial((tj2 - tm2) // 2)
        * _factorial((tj3 + tm3) // 2) * _factorial((tj3 - tm3) // 2)
    )
    phase = (tj1 - tj2 - tm3) // 2
    value = _signed_sqrt(prefactor, total)
    return -value if phase % 2 else value


def wigner3j(j1: float, j2: float, j3: float, m1: float, m2: float, m3: float) -> float:
    """
    Wigner 3j symbol (j1 j2 j3; m1 m2 m3).

    Invalid quantum numbers, a violated triangle rule or m1 + m2 + m3 != 0
    give exactly 0.
    """
    doubled = [_two(v) for v in (j1, j2, j3)]
    projections = [_two(abs(v)) for v in (m1, m2, m3)]
    if min(doubled) < 0 or min(projections) < 0:
        return 0.0
    return _wigner3j_doubled(*doubled, _two_signed(m1), _two_signed(m2), _two_signed(m3))


def _two_signed(m: float) -> int:
    return int(round(2.0 * float(m)))


@lru_cache(maxsize=65536)
def _wigner6j_doubled(ta: int, tb: int, tc: int, td: int, te: int, tf: int) -> float:
    triads = ((ta, tb, tc), (ta, te, tf), (td, tb, tf), (td, te, tc))
    if not all(_triangle(*t) for t in triads):
        return 0.0

    alphas = [sum(t) // 2 for t in triads]
    betas = [
        (ta + tb + td + te) // 2,
        (tb + tc + te + tf) // 2,
        (tc + ta + tf + td) // 2,
    ]
    t_min = max(alphas)
    t_max = min(betas)

    total = Fraction(0)
    for t in range(t_min, t_max + 1):
        denominator = 1
        for alpha in alphas:
            denominator *= _factorial(t - alpha)
        for beta in betas:
            denominator *= _factorial(beta - t)
        term = Fraction(_factorial(t + 1), denominator)
        total += -term if t % 2 else term

    prefactor = Fraction(1)
    for triad in triads:
        prefactor *= _delta(*triad)
    return _signed_sqrt(prefactor, total)


def wigner6j(j1: float, j2: float, j3: float, j4: float, j5: float, j6: float) -> float:
    """
    Wigner 6j symbol {j1 j2 j3; j4 j5 j6}.

    Returns 0 when any of the four triads (j1 j2 j3), (j1 j5 j6),
    (j4 j2 j6), (j4 j5 j3) is not a valid coupling.
    """
    doubled = [_two(v) for v in (j1, j2, j3, j4, j5, j6)]
    if min(doubled) < 0:
        return 0.0
    return _wigner6j_doubled(*doubled)


def spherical_basis() -> np.ndarray:
    """
    Cyclic unit vectors as rows, ordered q = -1, 0, +1.

    e_0 = e_Z, e_{+1} = -(e_X + i e_Y)/sqrt(2), e_{-1} = (e_X - i e_Y)/sqrt(2).
    """
    s = 1.0 / math.sqrt(2.0)
    return np.array(
        [
            [s, -1j * s, 0.0],
            [0.0, 0.0, 1.0],
            [-s, -1j * s, 0.0],
        ],
        dtype=complex,
    )


def spherical_vector(q: int) -> np.ndarray:
    """Cartesian components of e_q."""
    if q not in (-1, 0, 1):
        raise ValueError(f"polarization index must be -1, 0 or +1, got {q}")
    return spherical_basis()[q + 1]


def to_spherical(vector: Sequence[complex]) -> np.ndarray:
    """Components v_q = e_q* . v, ordered q = -1, 0, +1."""
    v = np.asarray(vector, dtype=complex)
    return np.conj(spherical_basis()) @ v
