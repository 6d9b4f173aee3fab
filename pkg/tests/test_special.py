import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from copfrac.errors import DomainError
from copfrac.special import (
    FractionalOrder,
    eta_factorial,
    fractional_log_kernel,
    gamma,
    gauss_2f1,
    inverse_mlf_log,
    kernel_from_neglog,
)

mpmath.mp.dps = 40

unit_open = st.floats(min_value=1e-300, max_value=1.0, allow_nan=False)
orders = st.floats(min_value=0.01, max_value=0.99)


def test_gamma_identities():
    assert gamma(1.0) == pytest.approx(1.0, abs=1e-15)
    assert_allclose(gamma(0.5), math.sqrt(math.pi), rtol=1e-14)
    assert_allclose(gamma(1.5), 0.5 * gamma(0.5), rtol=1e-14)
    assert_allclose(gamma(1.5), 0.8862269255, atol=1e-10, rtol=0)


def test_gamma_against_mpmath():
    xs = np.concatenate([np.linspace(0.05, 50.0, 400), [0.1, 0.49999, 0.5, 1.0, 2.0, 3.0]])
    for x in xs:
        exact = float(mpmath.gamma(mpmath.mpf(float(x))))
        assert abs(gamma(x) - exact) <= 1e-12 * exact, x


def test_gamma_recurrence():
    xs = [0.1] + list(np.arange(0.25, 10.0 + 1e-9, 0.25))
    for x in xs:
        assert_allclose(gamma(x + 1.0), x * gamma(x), rtol=1e-11)


@pytest.mark.parametrize("bad", [0.0, -1.0, -0.5, float("nan")])
def test_gamma_rejects_nonpositive(bad):
    with pytest.raises(DomainError):
        gamma(bad)


def test_gamma_large_argument_does_not_overflow():
    assert_allclose(gamma(150.0), float(mpmath.gamma(150)), rtol=1e-12)


@pytest.mark.parametrize("eta", [0.0, 1.0, -0.2, 1.5, float("nan")])
def test_fractional_order_rejects_outside_open_interval(eta):
    with pytest.raises(DomainError):
        FractionalOrder(eta)


def test_fractional_order_accepts_interior():
    order = FractionalOrder(0.25)
    assert float(order) == 0.25
    assert order.power == 4.0


def test_eta_factorial_values():
    assert_allclose(eta_factorial(0.5), 0.8862269255, atol=1e-10, rtol=0)
    assert abs(eta_factorial(0.999) - 0.9994) <= 1e-3
    assert_allclose(eta_factorial(0.5) ** (1 / 0.5), math.pi / 4, rtol=1e-13)


def test_eta_factorial_range():
    for eta in np.linspace(0.01, 0.99, 50):
        assert 0.885 < eta_factorial(eta) < 1.0


def test_inverse_mlf_log_values():
    assert inverse_mlf_log(1.0, 0.5) == 0.0
    assert_allclose(inverse_mlf_log(math.exp(-1.0), 0.5), -0.8862269255, atol=1e-10, rtol=0)
    expected = float(mpmath.gamma(1.9) * mpmath.log(0.25))
    assert_allclose(inverse_mlf_log(0.25, 0.9), expected, rtol=1e-12)
    assert_allclose(inverse_mlf_log(0.25, 0.9), -1.33329, atol=1e-5, rtol=0)


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.0000001, 2.0])
def test_inverse_mlf_log_domain(bad):
    with pytest.raises(DomainError):
        inverse_mlf_log(bad, 0.5)


def test_inverse_mlf_log_vectorised():
    x = np.array([0.1, 0.5, 1.0])
    assert_allclose(inverse_mlf_log(x, 0.3), eta_factorial(0.3) * np.log(x), rtol=1e-15)


@given(unit_open, unit_open, orders)
def test_additive_rule(u, v, eta):
    if u * v == 0.0:
        return
    lhs = inverse_mlf_log(u * v, eta)
    rhs = inverse_mlf_log(u, eta) + inverse_mlf_log(v, eta)
    assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_kernel_values():
    assert fractional_log_kernel(1.0, 0.7) == 0.0
    assert_allclose(fractional_log_kernel(math.exp(-1.0), 0.5), math.pi / 4, rtol=1e-13)
    assert_allclose(fractional_log_kernel(0.5, 0.5), (math.pi / 4) * math.log(2.0) ** 2, rtol=1e-13)
    assert_allclose(fractional_log_kernel(0.5, 0.5), 0.3773469, atol=1e-7, rtol=0)


def test_kernel_domain():
    with pytest.raises(DomainError):
        fractional_log_kernel(0.0, 0.5)


@pytest.mark.parametrize("eta", [0.1, 0.3, 0.5, 0.7, 0.95])
def test_kernel_strictly_decreasing(eta):
    x = np.linspace(1e-6, 1.0, 2000)
    k = fractional_log_kernel(x, eta)
    assert np.all(np.diff(k) < 0.0)


@given(st.floats(min_value=1e-300, max_value=1.0), orders)
def test_kernel_from_neglog_matches_kernel(x, eta):
    assert_allclose(kernel_from_neglog(-math.log(x), eta), fractional_log_kernel(x, eta), rtol=1e-12)


def test_gauss_2f1_values():
    assert gauss_2f1(4.0, 0.0) == 1.0
    z = -0.5
    closed = (6 - 6 * z + 2 * z * z) / (6 * (1 - z) ** 3)
    assert_allclose(gauss_2f1(4.0, z), closed, atol=1e-10, rtol=0)
    assert_allclose(gauss_2f1(4.0, z), 0.4691358025, atol=1e-10, rtol=0)


def _partial_sums(b, z, tol=mpmath.mpf("1e-30")):
    total, term, n = mpmath.mpf(1), mpmath.mpf(1), 0
    while True:
        term *= (b + n) * z / (n + 2)
        total += term
        n += 1
        if abs(term) < tol:
            return total


def test_gauss_2f1_b2_against_partial_sums():
    expected = float(_partial_sums(mpmath.mpf(2), mpmath.mpf(-0.5)))
    assert_allclose(gauss_2f1(2.0, -0.5), expected, atol=1e-15, rtol=0)


@pytest.mark.parametrize("b", [2.0, 3.0, 4.0, 6.0])
def test_gauss_2f1_against_mpmath(b):
    expected = float(mpmath.hyp2f1(1, b, 2, -0.5))
    assert abs(gauss_2f1(b, -0.5) - expected) <= 1e-13


@given(st.floats(min_value=0.1, max_value=8.0), st.floats(min_value=-0.6, max_value=0.6))
def test_gauss_2f1_closed_form(b, z):
    # 2F1(1, b; 2; z) = ((1 - z)^(1 - b) - 1) / ((b - 1) z)
    if abs(z) < 1e-3 or abs(b - 1.0) < 1e-3:
        return
    closed = ((1 - z) ** (1 - b) - 1) / ((b - 1) * z)
    assert_allclose(gauss_2f1(b, z), closed, rtol=1e-11)


@pytest.mark.parametrize("z", [1.0, -1.0, 1.5])
def test_gauss_2f1_domain(z):
    with pytest.raises(DomainError):
        gauss_2f1(4.0, z)


def test_gauss_2f1_rejects_nonpositive_b():
    with pytest.raises(DomainError):
        gauss_2f1(0.0, 0.1)
