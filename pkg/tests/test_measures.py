import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from copfrac.copulas import CopulaSpec
from copfrac.errors import DivergentIntegralError, ParameterError, UnsupportedDimensionError
from copfrac.integrate import IntegrationConfig
from copfrac.margins import Exponential, PowerOfBase, Uniform
from copfrac.measures import (
    MeasureJob,
    MeasureKind,
    ccfi_frechet_bounds,
    evaluate,
    fcpi_univariate,
    fcri_univariate,
    frechet_bound_integral,
    frechet_sandwich,
)
from copfrac.special import eta_factorial

# brute-force values from mpmath.quad at 20 digits
COCFI_PI = 0.078913715672561672548
FCPI_U01_U02 = 0.76187762641534586298
CCFI_GUMBEL_PRHR = 0.81877373262500796729

PI = CopulaSpec("independence")
E1 = Exponential(1.0)
U01 = Uniform(0.0, 1.0)


def job(kind, true_copula=PI, reference_copula=PI, truth=(E1, E1), reference=(E1, E1), eta=0.5, **kw):
    return MeasureJob(kind, truth, true_copula, reference_copula, reference, eta, **kw)


def example31(kind="ccfi", eta=0.5):
    return job(kind, CopulaSpec("gumbel", 2.0), CopulaSpec("fgm", 0.5), reference=(Exponential(2.0), Exponential(3.0)), eta=eta)


def value(j):
    return evaluate(j).value


def test_independence_anchors():
    for kind in ("ccfi", "ccfe", "scfi", "scfe"):
        assert_allclose(value(job(kind)), 3 * math.pi / 32, atol=1e-12, rtol=0)
    assert_allclose(value(job("cci")), 0.25, atol=1e-13, rtol=0)
    assert_allclose(value(job("cocfi")), COCFI_PI, atol=1e-12, rtol=0)
    assert_allclose(value(job("dcfi")), COCFI_PI, atol=1e-12, rtol=0)


def test_frechet_copula_entropies():
    m = CopulaSpec("comonotone")
    w = CopulaSpec("countermonotone")
    # s (log s)^2 against the line density of min(u, v) and of u + v - 1
    assert_allclose(value(job("ccfe", m)), (math.pi / 4) * (0.5 - 4 / 27), atol=1e-13, rtol=0)
    assert_allclose(value(job("ccfe", w)), (math.pi / 4) * (0.25 - 2 / 27), atol=1e-13, rtol=0)
    assert_allclose(value(job("dcfi", m, m)), (math.pi / 4) * (4 / 27), atol=1e-13, rtol=0)


def test_gumbel_against_brute_force():
    ref = (PowerOfBase(E1, 1.2), PowerOfBase(E1, 1.5))
    assert_allclose(value(job("ccfi", CopulaSpec("gumbel", 2.0), PI, reference=ref)), CCFI_GUMBEL_PRHR, atol=1e-9, rtol=0)


def test_example_configurations_positive_and_converged():
    frank, joe = CopulaSpec("frank", 2.0), CopulaSpec("joe", 2.0)
    refs = (Exponential(2.0), Exponential(3.0))
    jobs = [example31(), job("scfi", frank, joe, reference=refs), job("cocfi", frank, joe, reference=refs), job("dcfi", frank, joe, reference=refs)]
    for j in jobs:
        res = evaluate(j)
        assert res.value > 0.0 and math.isfinite(res.value)
        assert res.error_estimate < 1e-7


def test_example31_anchor():
    assert_allclose(value(example31()), 0.09497044490737229, atol=1e-10, rtol=0)


def test_degenerate_reference_gives_zero():
    # reference CDF is identically 1 on the truth support
    j = job("ccfi", truth=(Uniform(1.0, 2.0), Uniform(1.0, 2.0)), reference=(U01, U01))
    assert value(j) == 0.0


def test_tilde_identity_random_jobs():
    rng = np.random.default_rng(7)
    families = [("gumbel", 1.0, 4.0), ("fgm", -1.0, 1.0), ("frank", 0.5, 8.0), ("joe", 1.0, 4.0), ("amh", -0.9, 0.9)]
    for _ in range(5):
        picks = [families[i] for i in rng.integers(0, len(families), 2)]
        tc, rc = (CopulaSpec(f, rng.uniform(lo, hi)) for f, lo, hi in picks)
        refs = tuple(Exponential(r) for r in rng.uniform(0.5, 3.0, 2))
        eta = rng.uniform(0.1, 0.95)
        tilde = value(job("ccfi_tilde", tc, rc, reference=refs, eta=eta))
        plain = value(job("cci", tc, rc, reference=refs, eta=None))
        assert abs(tilde - eta_factorial(eta) * plain) <= 1e-12


def test_eta_limit():
    assert abs(value(example31(eta=0.999)) - value(example31("cci", eta=None))) <= 1e-2


def test_self_reduction_is_bitwise():
    gum = CopulaSpec("gumbel", 2.0)
    refs = (Exponential(2.0), Exponential(3.0))
    same = dict(truth=refs, reference=refs)
    assert value(job("ccfi", gum, gum, **same)) == value(job("ccfe", gum, **same))
    frank = CopulaSpec("frank", 3.0)
    assert value(job("scfi", frank, frank, **same)) == value(job("scfe", frank, **same))


@pytest.mark.parametrize("theta", [-4.0, 1.0, 3.0])
@pytest.mark.parametrize("margin", [U01, Uniform(-1.0, 3.0)])
def test_radial_symmetry(theta, margin):
    c = CopulaSpec("frank", theta)
    d = CopulaSpec("frank", 2.0)
    kwargs = dict(truth=(margin, margin), reference=(margin, margin))
    assert abs(value(job("scfi", c, d, **kwargs)) - value(job("ccfi", c, d, **kwargs))) <= 1e-6


@pytest.mark.parametrize("eta", [0.3, 0.5, 0.8])
def test_prhr_homogeneity(eta):
    gum = CopulaSpec("gumbel", 2.0)
    exps = np.array([1.2, 1.5])
    lam = 2.5

    def run(g):
        return value(job("ccfi", gum, PI, reference=tuple(PowerOfBase(E1, x) for x in g), eta=eta))

    assert_allclose(run(lam * exps), lam ** (1 / eta) * run(exps), rtol=1e-11)


def test_three_dimensional():
    pi3 = CopulaSpec("independence", dim=3)
    margins = (E1, E1, E1)
    assert_allclose(value(MeasureJob("ccfe", margins, pi3, eta=0.5)), 3 * math.pi / 32, atol=1e-10, rtol=0)
    g3 = CopulaSpec("gumbel", 2.0, dim=3)
    with pytest.raises(UnsupportedDimensionError):
        value(MeasureJob("scfi", margins, g3, g3, margins, 0.5))
    supplied = MeasureJob("scfi", margins, None, None, margins, 0.5, true_survival=pi3, reference_survival=pi3)
    assert_allclose(value(supplied), 3 * math.pi / 32, atol=1e-10, rtol=0)
    with pytest.raises(UnsupportedDimensionError):
        MeasureJob("cocfi", margins, pi3, pi3, margins, 0.5)


def test_job_validation():
    with pytest.raises(ParameterError, match="requires a fractional order"):
        MeasureJob("ccfi", (E1, E1), PI, PI, (E1, E1))
    with pytest.raises(ParameterError, match="reference margins"):
        MeasureJob("ccfi", (E1, E1), PI, PI, None, 0.5)
    with pytest.raises(ParameterError, match="differ in length"):
        MeasureJob("ccfi", (E1, E1), PI, PI, (E1,), 0.5)
    with pytest.raises(ParameterError, match="reference_copula"):
        MeasureJob("ccfi", (E1, E1), PI, None, (E1, E1), 0.5)
    with pytest.raises(ParameterError, match="exactly one"):
        MeasureJob("fcri", (E1, E1), reference_margins=(E1,), eta=0.5)
    with pytest.raises(ValueError):
        MeasureJob("entropy", (E1, E1), PI, PI, (E1, E1), 0.5)
    entropy = MeasureJob("ccfe", (E1, E1), PI, reference_margins=(Exponential(5.0), Exponential(5.0)), eta=0.5)
    assert entropy.reference_margins == (E1, E1)
    assert MeasureJob("cci", (E1, E1), PI, PI, (E1, E1)).kind is MeasureKind.CCI


def test_univariate_anchors():
    for route in ("quantile", "halfline"):
        assert_allclose(fcri_univariate(E1, E1, 0.5, route=route).value, math.pi / 2, atol=1e-8, rtol=0)
        assert_allclose(fcri_univariate(Exponential(2.0), E1, 0.5, route=route).value, math.pi / 16, atol=1e-8, rtol=0)
        assert_allclose(fcpi_univariate(U01, U01, 0.5, route=route).value, math.pi / 16, atol=1e-8, rtol=0)
        assert_allclose(fcpi_univariate(U01, Uniform(0.0, 2.0), 0.5, route=route).value, FCPI_U01_U02, atol=1e-8, rtol=0)


@pytest.mark.parametrize("g", [0.5, 2.0, 3.0])
@pytest.mark.parametrize("eta", [0.3, 0.5, 0.7])
def test_univariate_power_homogeneity(g, eta):
    base = fcri_univariate(E1, E1, eta).value
    assert_allclose(fcri_univariate(E1, PowerOfBase(E1, g, "phr"), eta).value, g ** (1 / eta) * base, rtol=1e-9)
    base = fcpi_univariate(U01, U01, eta).value
    assert_allclose(fcpi_univariate(U01, PowerOfBase(U01, g), eta).value, g ** (1 / eta) * base, rtol=1e-9)


@pytest.mark.parametrize(
    "truth,reference",
    [(E1, Exponential(2.5)), (Exponential(3.0), PowerOfBase(E1, 1.5, "phr")), (Uniform(0.5, 2.0), Exponential(1.0))],
)
def test_univariate_routes_agree(truth, reference):
    a = fcri_univariate(truth, reference, 0.6, route="quantile").value
    b = fcri_univariate(truth, reference, 0.6, route="halfline").value
    assert_allclose(a, b, rtol=1e-8)


def test_univariate_past_routes_agree():
    for truth, reference in [(U01, Uniform(0.0, 3.0)), (Uniform(0.0, 2.0), Uniform(0.0, 2.5))]:
        a = fcpi_univariate(truth, reference, 0.4, route="quantile").value
        b = fcpi_univariate(truth, reference, 0.4, route="halfline").value
        assert_allclose(a, b, rtol=1e-8)


def test_univariate_divergence():
    with pytest.raises(DivergentIntegralError):
        fcri_univariate(E1, U01, 0.5)
    with pytest.raises(DivergentIntegralError):
        fcpi_univariate(U01, Uniform(0.5, 1.5), 0.5)


def test_fcpi_exponential_anchor():
    # u = F(x) turns it into (pi/4) * integral of u (log u)^2 / (1 - u) = (pi/4) * 2 (zeta(3) - 1)
    expected = (math.pi / 4) * 2 * (float(mpmath.zeta(3)) - 1)
    for route in ("quantile", "halfline"):
        assert_allclose(fcpi_univariate(E1, E1, 0.5, route=route).value, expected, atol=1e-8, rtol=0)
    res = fcri_univariate(E1, E1, 0.5, route="halfline")
    assert res.diagnostics["tail_estimate"] < 1e-10 and res.diagnostics["truncation"] > 40


def test_univariate_through_evaluate():
    j = MeasureJob("fcri", (E1,), reference_margins=(E1,), eta=0.5)
    assert_allclose(evaluate(j).value, math.pi / 2, atol=1e-8, rtol=0)


def test_bound_closed_forms():
    b = ccfi_frechet_bounds(0.5, 2.0, 3.0)
    assert_allclose(b.w_side, (math.pi / 4) * (2 / 54) * 5, rtol=1e-14)
    assert_allclose(b.w_side, 0.1454441, atol=1e-7, rtol=0)
    assert_allclose(b.m_side, 0.8363036, atol=1e-7, rtol=0)


@pytest.mark.parametrize("eta", [0.3, 0.5, 0.7, 0.9])
@pytest.mark.parametrize("g,d", [(2.0, 3.0), (0.5, 2.0), (3.0, 0.5)])
def test_bound_closed_forms_match_additive_quadrature(eta, g, d):
    b = ccfi_frechet_bounds(eta, g, d)
    assert abs(b.w_side - frechet_bound_integral(eta, g, d, "w", additive=True).value) <= 1e-9
    assert abs(b.m_side - frechet_bound_integral(eta, g, d, "m", additive=True).value) <= 1e-9


@pytest.mark.parametrize("eta", [0.3, 0.5, 0.7, 0.9])
def test_bound_sides_ordered(eta):
    for g in (0.5, 2.0, 3.0):
        for d in (0.5, 2.0, 3.0):
            b = ccfi_frechet_bounds(eta, g, d)
            assert b.w_side <= b.m_side
            assert frechet_bound_integral(eta, g, d, "w").value <= frechet_bound_integral(eta, g, d, "m").value


def test_bound_validation():
    with pytest.raises(ParameterError):
        ccfi_frechet_bounds(0.5, 0.0, 2.0)
    with pytest.raises(ParameterError):
        frechet_bound_integral(0.5, 2.0, 3.0, "x")


@pytest.mark.parametrize("tc", [CopulaSpec("gumbel", 2.0), CopulaSpec("fgm", 0.5), CopulaSpec("frank", -3.0)])
def test_sandwich(tc):
    j = job("ccfi", tc, CopulaSpec("fgm", 0.5), reference=(Exponential(2.0), Exponential(3.0)))
    w, m = frechet_sandwich(j)
    v = value(j)
    assert w.value < v < m.value


def test_sandwich_matches_bound_integral():
    j = job("ccfi", CopulaSpec("gumbel", 2.0), PI, reference=(PowerOfBase(E1, 2.0), PowerOfBase(E1, 3.0)))
    w, m = frechet_sandwich(j)
    assert_allclose(w.value, frechet_bound_integral(0.5, 2.0, 3.0, "w").value, atol=1e-12, rtol=0)
    assert_allclose(m.value, frechet_bound_integral(0.5, 2.0, 3.0, "m").value, atol=1e-12, rtol=0)


def test_monte_carlo_route():
    cfg = IntegrationConfig(method="monte_carlo", mc_samples=200_000, seed=5)
    j = job("ccfe", integration=cfg)
    res = evaluate(j)
    assert abs(res.value - 3 * math.pi / 32) < 4 * res.error_estimate


families = st.sampled_from([("gumbel", 1.0, 5.0), ("fgm", -1.0, 1.0), ("frank", -8.0, 8.0), ("joe", 1.0, 5.0), ("amh", -1.0, 0.95)])


@settings(max_examples=25, deadline=None)
@given(
    families,
    families,
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.0),
    st.sampled_from(["ccfi", "ccfe", "scfi", "scfe", "cocfi", "dcfi", "cci"]),
    st.floats(0.1, 0.95),
    st.floats(0.3, 4.0),
)
def test_nonnegative(fa, fb, ta, tb, kind, eta, rate):
    def make(f, t):
        name, lo, hi = f
        theta = lo + t * (hi - lo)
        if name == "frank" and abs(theta) < 1e-3:
            theta = 1.0
        return CopulaSpec(name, theta)

    j = job(kind, make(fa, ta), make(fb, tb), reference=(Exponential(rate), Exponential(2.0)), eta=None if kind == "cci" else eta)
    assert value(j) >= -1e-12
