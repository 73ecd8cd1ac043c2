"""Wigner 3j/6j symbols and the cyclic basis."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sympy import Rational
from sympy.physics.wigner import wigner_3j, wigner_6j

from src.physics.angular import spherical_basis, spherical_vector, to_spherical, wigner3j, wigner6j


def _half(value: float) -> Rational:
    return Rational(int(round(2 * value)), 2)


def _projections(j: float):
    return [-j + k for k in range(int(round(2 * j)) + 1)]


half_integers = st.integers(min_value=0, max_value=12).map(lambda n: n / 2)


def test_known_values():
    assert wigner3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1 / np.sqrt(3), abs=1e-14)
    assert wigner3j(0.5, 0.5, 1, 0.5, -0.5, 0) == pytest.approx(1 / np.sqrt(6), abs=1e-14)
    assert wigner6j(1, 1, 1, 1, 1, 1) == pytest.approx(1 / 6, abs=1e-14)


@pytest.mark.parametrize("j1, j2", [(0.5, 0.5), (1, 1.5), (2, 1), (2.5, 1.5), (3, 1)])
def test_3j_matches_sympy(j1, j2):
    for j3 in np.arange(abs(j1 - j2), j1 + j2 + 1):
        for m1, m2 in itertools.product(_projections(j1), _projections(j2)):
            m3 = -(m1 + m2)
            if abs(m3) > j3:
                continue
            expected = float(wigner_3j(_half(j1), _half(j2), _half(j3), _half(m1), _half(m2), _half(m3)))
            assert wigner3j(j1, j2, j3, m1, m2, m3) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("args", [(1.5, 0.5, 1, 3, 4, 2.5), (1.5, 0.5, 1, 2, 3, 2.5), (2, 2, 2, 2, 2, 2), (3, 2, 1, 1, 2, 3)])
def test_6j_matches_sympy(args):
    expected = float(wigner_6j(*[_half(a) for a in args]))
    assert wigner6j(*args) == pytest.approx(expected, abs=1e-12)


def test_selection_rules_give_zero():
    assert wigner3j(1, 1, 3, 0, 0, 0) == 0.0  # triangle
    assert wigner3j(1, 1, 1, 1, 0, 0) == 0.0  # sum of m
    assert wigner3j(1, 1, 1, 0, 0, 0) == 0.0  # odd J with all m = 0
    assert wigner3j(1, 1, 1, 2, -2, 0) == 0.0  # |m| > j
    assert wigner6j(1, 1, 3, 1, 1, 1) == 0.0


@settings(max_examples=40, deadline=None)
@given(j1=half_integers, j2=half_integers)
def test_3j_orthogonality(j1, j2):
    """sum_{m1 m2} (2 j3 + 1) 3j(j3 m3) 3j(j3' m3') = delta."""
    j3_values = np.arange(abs(j1 - j2), j1 + j2 + 1)
    m3 = j3_values[0] - j3_values[0] % 1 if j3_values[0] % 1 == 0 else 0.5
    m3 = min(abs(m3), j3_values[0])
    for j3, j3p in itertools.product(j3_values, repeat=2):
        total = 0.0
        for m1 in _projections(j1):
            m2 = -m3 - m1
            if abs(m2) > j2:
                continue
            total += (2 * j3 + 1) * wigner3j(j1, j2, j3, m1, m2, m3) * wigner3j(j1, j2, j3p, m1, m2, m3)
        assert total == pytest.approx(1.0 if j3 == j3p else 0.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(a=half_integers, b=half_integers, c=half_integers)
def test_3j_permutation_symmetry(a, b, c):
    for ma in _projections(a):
        for mb in _projections(b):
            mc = -(ma + mb)
            if abs(mc) > c:
                continue
            value = wigner3j(a, b, c, ma, mb, mc)
            assert wigner3j(b, c, a, mb, mc, ma) == pytest.approx(value, abs=1e-12)
            sign = (-1) ** int(round(a + b + c))
            assert wigner3j(b, a, c, mb, ma, mc) == pytest.approx(sign * value, abs=1e-12)


def test_spherical_basis_is_unitary():
    basis = spherical_basis()
    assert np.allclose(basis @ basis.conj().T, np.eye(3), atol=1e-15)


def test_to_spherical_inverts_basis():
    for q in (-1, 0, 1):
        components = to_spherical(spherical_vector(q))
        expected = np.zeros(3)
        expected[q + 1] = 1.0
        assert np.allclose(components, expected, atol=1e-15)


def test_spherical_vector_rejects_bad_index():
    with pytest.raises(ValueError):
        spherical_vector(2)
