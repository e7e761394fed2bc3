import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qcutstack.hilbert import (
    PhaseRational,
    StateVector,
    gaussian_state,
    inner_product,
    phase_e_N,
    quadratic_phases,
    reduce_phase,
    unit_roots,
)


def test_inner_product_constant_vector():
    assert inner_product(np.ones(4), np.ones(4)) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 2, 7, 64])
def test_inner_product_scaled_delta(n):
    psi = np.zeros(n)
    psi[0] = math.sqrt(n)
    assert inner_product(psi, psi) == pytest.approx(1.0)


def test_inner_product_hand_value():
    assert abs(inner_product([1, 1j], [1j, 1])) < 1e-15


def test_inner_product_is_conjugate_linear_in_first_slot():
    psi, phi = np.array([1j, 2.0]), np.array([1.0, 1.0])
    assert inner_product(psi, phi) == pytest.approx((np.conj(1j) + 2) / 2)


def test_inner_product_dimension_mismatch():
    with pytest.raises(ValueError):
        inner_product(np.ones(3), np.ones(4))


def test_state_vector_is_read_only():
    s = StateVector(np.ones(3))
    with pytest.raises(ValueError):
        s.amps[0] = 2
    assert s.dim == 3 and s.norm() == pytest.approx(1.0)


@pytest.mark.parametrize("x,n,expected", [(0, 5, 1), (2, 4, -1), (3, 6, -1), (1, 4, 1j), (3, 4, -1j)])
def test_phase_exact_values(x, n, expected):
    assert phase_e_N(x, n) == expected


def test_phase_reduces_before_rounding():
    big = 10**18 * 7 + 1
    assert abs(phase_e_N(big, 7) - np.exp(2j * np.pi / 7)) < 1e-15


def test_phase_rejects_float():
    with pytest.raises(TypeError):
        phase_e_N(0.5, 4)


@given(st.integers(-10**9, 10**9), st.integers(1, 10**6))
def test_reduce_phase_range(x, n):
    r = reduce_phase(x, n)
    assert 0 <= r < n and (x - r) % n == 0


def test_phase_rational_reduction():
    p = PhaseRational(Fraction(-1, 2), 4)
    assert p.value == Fraction(7, 2)
    assert abs(p.unit() - np.exp(2j * np.pi * 3.5 / 4)) < 1e-15


def test_unit_roots_and_quadratic_phases():
    n = 9
    q = np.arange(n)
    assert np.allclose(quadratic_phases(n), np.exp(-2j * np.pi * q * q / n), atol=1e-13)
    assert np.allclose(unit_roots([0, 3, -3], 6), [1, -1, -1])


def test_gaussian_single_site_against_theta_series():
    # oracle: sum over all m of exp(-m^2) is the Jacobi theta value at q = e^-1
    psi = gaussian_state(0, 1)
    oracle = float(mpmath.jtheta(3, 0, mpmath.e ** -1))
    assert psi.amps[0] == pytest.approx(oracle, abs=1e-6)
    # truncation |m| <= 3 drops 2 exp(-16)
    assert abs(psi.amps[0] - oracle) <= 2.5 * math.exp(-16)


def test_gaussian_symmetry_about_half():
    n = 256
    a = gaussian_state(Fraction(1, 2), n).amps
    assert np.allclose(a[1:], a[1:][::-1], atol=1e-14)


def test_gaussian_norm_against_direct_sum():
    n, s = 64, Fraction(1, 3)
    psi = gaussian_state(s, n)
    amps = [mpmath.sqrt(n) * mpmath.nsum(lambda m: mpmath.exp(-((mpmath.mpf(Q) / n - mpmath.mpf(1) / 3 - m) ** 2) * n),
                                         [-mpmath.inf, mpmath.inf]) for Q in range(n)]
    oracle = float(sum(abs(a) ** 2 for a in amps) / n)
    assert abs(inner_product(psi, psi).real - oracle) < 1e-10


def test_gaussian_rejects_bad_centre():
    with pytest.raises(ValueError):
        gaussian_state(Fraction(3, 2), 8)
