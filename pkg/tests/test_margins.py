import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from copfrac.errors import CompositionError, DomainError, ParameterError
from copfrac.margins import (
    Exponential,
    PowerMode,
    PowerOfBase,
    Uniform,
    compose_cdf,
    compose_survival,
    margin_vector,
)

LEVELS = np.round(np.arange(0.01, 1.0, 0.01), 2)
FINE = np.linspace(0.0, 1.0, 1000)

MARGINS = [
    Exponential(1.0),
    Exponential(2.5),
    Uniform(0.0, 1.0),
    Uniform(-1.0, 3.0),
    PowerOfBase(Exponential(1.0), 2.0),
    PowerOfBase(Exponential(1.0), 0.5, "phr"),
    PowerOfBase(Uniform(0.0, 2.0), 3.0),
    PowerOfBase(PowerOfBase(Exponential(2.0), 1.5), 0.7, "phr"),
]
IDS = [repr(m) for m in MARGINS]


@pytest.mark.parametrize("m", MARGINS, ids=IDS)
def test_roundtrips(m):
    assert_allclose(m.cdf(m.quantile(LEVELS)), LEVELS, atol=1e-10, rtol=0)
    assert_allclose(m.sf(m.survival_quantile(LEVELS)), LEVELS, atol=1e-10, rtol=0)
    x = m.quantile(LEVELS)
    assert_allclose(m.quantile(m.cdf(x)), x, atol=1e-10, rtol=0)


@pytest.mark.parametrize("m", MARGINS, ids=IDS)
def test_cdf_shape(m):
    lo, hi = m.support()
    top = hi if math.isfinite(hi) else m.quantile(1 - 1e-12)
    xs = np.linspace(lo - 1.0, top + 1.0, 2001)
    c = m.cdf(xs)
    assert np.all(np.diff(c) >= 0.0)
    assert c[0] == 0.0 and m.cdf(1e300) == 1.0
    assert_allclose(c + m.sf(xs), 1.0, atol=1e-15, rtol=0)


@pytest.mark.parametrize("m", MARGINS, ids=IDS)
def test_endpoint_quantiles(m):
    lo, hi = m.support()
    assert m.quantile(0.0) == lo
    assert m.quantile(1.0) == hi
    assert m.survival_quantile(1.0) == lo
    assert m.survival_quantile(0.0) == hi


@pytest.mark.parametrize("m", MARGINS, ids=IDS)
def test_pdf_matches_cdf_derivative(m):
    x = m.quantile(np.linspace(0.05, 0.95, 19))
    h = 1e-6
    slope = (m.cdf(x + h) - m.cdf(x - h)) / (2 * h)
    assert_allclose(m.pdf(x), slope, rtol=1e-6)


def test_power_modes():
    base = Exponential(1.0)
    t = np.linspace(0.1, 4.0, 30)
    assert_allclose(PowerOfBase(base, 2.0).cdf(t), base.cdf(t) ** 2, rtol=1e-14)
    assert_allclose(PowerOfBase(base, 2.0, PowerMode.PHR).sf(t), base.sf(t) ** 2, rtol=1e-14)
    # PHR on an exponential is an exponential with scaled rate
    assert_allclose(PowerOfBase(base, 3.0, "phr").cdf(t), Exponential(3.0).cdf(t), rtol=1e-14)


def test_compose_examples():
    v = np.linspace(0.0, 1.0, 101)
    e1 = Exponential(1.0)
    for mu in (0.5, 2.0, 3.0):
        assert_allclose(compose_cdf(Exponential(mu), e1, v), 1 - (1 - v) ** mu, atol=1e-14, rtol=0)
        assert_allclose(compose_survival(Exponential(mu), e1, v), v**mu, atol=1e-14, rtol=0)
    for m in MARGINS:
        assert_allclose(compose_cdf(m, m, v), v, atol=1e-12, rtol=0)
        assert_allclose(compose_survival(m, m, v), v, atol=1e-12, rtol=0)


@pytest.mark.parametrize("base", [Exponential(1.0), Uniform(0.0, 2.0), Exponential(3.0)])
@pytest.mark.parametrize("g", [0.5, 2.0, 3.0])
def test_power_compositions(base, g):
    v = np.linspace(0.0, 1.0, 101)
    assert_allclose(compose_cdf(PowerOfBase(base, g), base, v), v**g, atol=1e-13, rtol=0)
    assert_allclose(compose_survival(PowerOfBase(base, g, "phr"), base, v), v**g, atol=1e-13, rtol=0)


def test_nested_power_exponents_multiply():
    base = Exponential(1.0)
    nested = PowerOfBase(PowerOfBase(base, 2.0), 1.5)
    assert_allclose(compose_cdf(nested, base, FINE), FINE**3.0, atol=1e-13, rtol=0)


@pytest.mark.parametrize("ref,truth", [(Exponential(2.0), Exponential(1.0)), (Uniform(0, 2), Uniform(0, 1)), (Uniform(0.5, 1.5), Uniform(0, 1)), (PowerOfBase(Exponential(1.0), 0.3), Exponential(2.0))])
def test_compositions_monotone(ref, truth):
    c = compose_cdf(ref, truth, FINE)
    s = compose_survival(ref, truth, FINE)
    assert np.all(np.diff(c) >= 0.0) and np.all(np.diff(s) >= 0.0)
    assert np.all((c >= 0) & (c <= 1) & (s >= 0) & (s <= 1))


def test_disjoint_supports():
    with pytest.raises(CompositionError, match="do not overlap"):
        compose_cdf(Uniform(2.0, 3.0), Uniform(0.0, 1.0), 0.5)
    # touching supports compose to a constant
    assert compose_cdf(Uniform(1.0, 2.0), Uniform(0.0, 1.0), 0.5) == 0.0


@pytest.mark.parametrize(
    "build",
    [lambda: Exponential(0.0), lambda: Exponential(-1.0), lambda: Uniform(1.0, 1.0), lambda: Uniform(0.0, math.inf),
     lambda: PowerOfBase(Exponential(1.0), 0.0), lambda: PowerOfBase(Exponential(1.0), 2.0, "other"), lambda: PowerOfBase(2.0, 1.0)],
)
def test_parameter_errors(build):
    with pytest.raises(ParameterError):
        build()


def test_probability_domain():
    with pytest.raises(DomainError):
        Exponential(1.0).quantile(1.5)
    with pytest.raises(DomainError):
        compose_cdf(Exponential(1.0), Exponential(2.0), -0.1)


def test_margin_vector():
    assert margin_vector([Exponential(1.0)] * 2, 2) == (Exponential(1.0), Exponential(1.0))
    with pytest.raises(ParameterError):
        margin_vector([Exponential(1.0)], 2)
    with pytest.raises(ParameterError):
        margin_vector([1.0])


def test_uniform_median():
    assert Uniform(-1.0, 3.0).median() == 1.0
    assert_allclose(Exponential(2.0).median(), math.log(2) / 2, rtol=1e-15)


@given(st.floats(0.0, 1.0), st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_hypothesis_exponential_composition(v, rate_truth, rate_ref):
    expected = 1 - (1 - v) ** (rate_ref / rate_truth)
    assert_allclose(compose_cdf(Exponential(rate_ref), Exponential(rate_truth), v), expected, atol=1e-12, rtol=0)
