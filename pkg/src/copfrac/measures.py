"""Copula-based fractional inaccuracy and entropy measures.

Every multivariate measure has the shape

    integral over (0,1)^n of  W(v) * K(R(c(v))) dv

where ``W`` is the true structure (copula, survival copula, co- or dual
copula), ``R`` the matching reference structure, ``c`` the per-coordinate
margin composition and ``K`` the fractional log kernel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .copulas import CopulaSpec, DerivedCopula, Family, ReflectedSurvival, Transform
from .errors import DivergentIntegralError, DomainError, ParameterError, UnsupportedDimensionError
from .integrate import (
    ANTIDIAGONAL_TRIANGLES,
    DIAGONAL_TRIANGLES,
    QUARTER_TRIANGLES,
    GuardedIntegrand,
    IntegralResult,
    IntegrationConfig,
    Method,
    integrate_interval,
    integrate_triangles,
    integrate_unit_cube,
)
from .margins import Margin, compose_cdf, compose_survival, margin_vector
from .special import (
    FractionalOrder,
    as_order,
    eta_factorial,
    gamma,
    gauss_2f1,
    kernel_from_neglog,
)

__all__ = [
    "MeasureKind",
    "MeasureJob",
    "FrechetBounds",
    "evaluate",
    "ccfi",
    "ccfi_tilde",
    "cci",
    "ccfe",
    "scfi",
    "scfe",
    "cocfi",
    "dcfi",
    "fcri_univariate",
    "fcpi_univariate",
    "ccfi_frechet_bounds",
    "frechet_bound_integral",
    "frechet_sandwich",
]

CopulaLike = Union[CopulaSpec, DerivedCopula]


class MeasureKind(str, enum.Enum):
    CCFI = "ccfi"
    CCFI_TILDE = "ccfi_tilde"
    CCI = "cci"
    CCFE = "ccfe"
    SCFI = "scfi"
    SCFE = "scfe"
    COCFI = "cocfi"
    DCFI = "dcfi"
    FCRI = "fcri"
    FCPI = "fcpi"


ENTROPY_KINDS = {MeasureKind.CCFE, MeasureKind.SCFE}
UNIVARIATE_KINDS = {MeasureKind.FCRI, MeasureKind.FCPI}
BIVARIATE_ONLY = {MeasureKind.COCFI, MeasureKind.DCFI}


@dataclass(frozen=True)
class MeasureJob:
    """Everything needed to evaluate one measure.

    For entropy kinds the reference fields are ignored.  For the univariate
    kinds the copulas are unused and each margin vector has length one.
    ``true_survival`` / ``reference_survival`` supply a survival copula
    directly, which is the only way to run SCFI/SCFE with ``dim > 2``.
    """

    kind: MeasureKind
    true_margins: Sequence[Margin]
    true_copula: Optional[CopulaLike] = None
    reference_copula: Optional[CopulaLike] = None
    reference_margins: Optional[Sequence[Margin]] = None
    eta: Optional[FractionalOrder] = None
    integration: IntegrationConfig = field(default_factory=IntegrationConfig)
    true_survival: Optional[CopulaLike] = None
    reference_survival: Optional[CopulaLike] = None

    def __post_init__(self):
        kind = MeasureKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.eta is not None:
            object.__setattr__(self, "eta", as_order(self.eta))
        elif kind is not MeasureKind.CCI:
            raise ParameterError(f"{kind.value} requires a fractional order eta")
        truth = margin_vector(self.true_margins)
        object.__setattr__(self, "true_margins", truth)
        entropy = kind in ENTROPY_KINDS
        if entropy:
            ref = truth
        elif self.reference_margins is None:
            raise ParameterError(f"{kind.value} requires reference margins")
        else:
            ref = margin_vector(self.reference_margins)
        object.__setattr__(self, "reference_margins", ref)
        if kind in UNIVARIATE_KINDS:
            if len(truth) != 1 or len(ref) != 1:
                raise ParameterError(f"{kind.value} takes exactly one true and one reference margin")
            return
        dim = len(truth)
        if len(ref) != dim:
            raise ParameterError(f"margin vectors differ in length ({dim} vs {len(ref)})")
        needs = ["true_copula"] if entropy else ["true_copula", "reference_copula"]
        if kind in (MeasureKind.SCFI, MeasureKind.SCFE):
            # a directly supplied survival copula replaces the base copula
            needs = [n for n in needs if getattr(self, n.replace("copula", "survival")) is None]
        for name in needs:
            if getattr(self, name) is None:
                raise ParameterError(f"{kind.value} requires {name}")
        for name in ("true_copula", "reference_copula", "true_survival", "reference_survival"):
            c = getattr(self, name)
            if c is None or (entropy and name.startswith("reference")):
                continue
            if c.dim != dim:
                raise ParameterError(f"{name} has dim {c.dim}, margins have length {dim}")
        if kind in BIVARIATE_ONLY and dim != 2:
            raise UnsupportedDimensionError(f"{kind.value} is defined for dim = 2 only")

    @property
    def dim(self) -> int:
        return len(self.true_margins)


def _identity(v):
    return v


def _composition(reference: Sequence[Margin], truth: Sequence[Margin], compose):
    """Map v -> (compose(G_i, F_i, v_i))_i; identical margins map identically."""
    pairs = list(zip(reference, truth))
    same = [g == f for g, f in pairs]
    if all(same):
        return _identity

    def apply(v):
        cols = [v[:, i] if same[i] else compose(g, f, v[:, i]) for i, (g, f) in enumerate(pairs)]
        return np.stack(cols, axis=-1)

    return apply


def _kink(copula) -> Optional[str]:
    """Line of non-smoothness of a bivariate Fréchet-bound structure.

    Every transform maps M-based structures to ones kinked on ``u = v`` and
    W-based ones to ones kinked on ``u + v = 1``.
    """
    if isinstance(copula, (DerivedCopula, ReflectedSurvival)):
        return _kink(copula.base)
    if isinstance(copula, CopulaSpec) and copula.dim == 2:
        return {Family.COMONOTONE: "diagonal", Family.COUNTERMONOTONE: "antidiagonal"}.get(copula.family)
    return None


_SPLITS = {
    frozenset(["diagonal"]): DIAGONAL_TRIANGLES,
    frozenset(["antidiagonal"]): ANTIDIAGONAL_TRIANGLES,
    frozenset(["diagonal", "antidiagonal"]): QUARTER_TRIANGLES,
}


def _integrate(job: MeasureJob, weight, reference, composition, neglog_kernel=None, identity=False):
    cfg = job.integration
    integrand = GuardedIntegrand(
        weight=weight.evaluate,
        kernel_arg=lambda v: reference.evaluate(composition(v)),
        eta=job.eta,
        clamp_epsilon=cfg.clamp_epsilon,
        neglog_kernel=neglog_kernel,
    )
    if job.dim == 2 and cfg.resolved_method(2) is not Method.MONTE_CARLO:
        lines = {_kink(weight)}
        # the reference kink stays on the same line only under identity composition
        if identity:
            lines.add(_kink(reference))
        lines.discard(None)
        if lines:
            return integrate_triangles(integrand, _SPLITS[frozenset(lines)], cfg)
    return integrate_unit_cube(integrand, job.dim, cfg)


def _check_kind(job, *kinds):
    if job.kind not in kinds:
        names = "/".join(k.value for k in kinds)
        raise ParameterError(f"job kind {job.kind.value} passed to the {names} evaluator")


def _cumulative_terms(job):
    comp = _composition(job.reference_margins, job.true_margins, compose_cdf)
    return job.true_copula, job.reference_copula, comp


def _is_identity(job):
    return all(g == f for g, f in zip(job.reference_margins, job.true_margins))


def ccfi(job: MeasureJob) -> IntegralResult:
    """Cumulative copula fractional inaccuracy."""
    _check_kind(job, MeasureKind.CCFI)
    return _integrate(job, *_cumulative_terms(job), identity=_is_identity(job))


def ccfi_tilde(job: MeasureJob) -> IntegralResult:
    """Modified CCFI, ``-∫ C_X Ln_eta(C_Y(...))`` (no ``1/eta`` power)."""
    _check_kind(job, MeasureKind.CCFI_TILDE)
    scale = eta_factorial(job.eta)
    return _integrate(job, *_cumulative_terms(job), neglog_kernel=lambda s: scale * s, identity=_is_identity(job))


def cci(job: MeasureJob) -> IntegralResult:
    """Cumulative copula inaccuracy, ``-∫ C_X log C_Y(...)``."""
    _check_kind(job, MeasureKind.CCI)
    return _integrate(job, *_cumulative_terms(job), neglog_kernel=lambda s: s, identity=_is_identity(job))


def ccfe(job: MeasureJob) -> IntegralResult:
    """Cumulative copula fractional entropy of the true copula."""
    _check_kind(job, MeasureKind.CCFE)
    return _integrate(job, job.true_copula, job.true_copula, _identity, identity=True)


def _survival_of(copula, direct):
    if direct is not None:
        return direct
    if copula.dim != 2:
        raise UnsupportedDimensionError(
            "survival copula transform needs dim = 2; supply the survival copula directly"
        )
    if isinstance(copula, DerivedCopula) and copula.transform is Transform.SURVIVAL:
        return copula.base
    return DerivedCopula(copula, Transform.SURVIVAL)


def scfi(job: MeasureJob) -> IntegralResult:
    """Survival copula fractional inaccuracy."""
    _check_kind(job, MeasureKind.SCFI)
    weight = _survival_of(job.true_copula, job.true_survival)
    ref = _survival_of(job.reference_copula, job.reference_survival)
    comp = _composition(job.reference_margins, job.true_margins, compose_survival)
    return _integrate(job, weight, ref, comp, identity=comp is _identity)


def scfe(job: MeasureJob) -> IntegralResult:
    """Survival copula fractional entropy."""
    _check_kind(job, MeasureKind.SCFE)
    weight = _survival_of(job.true_copula, job.true_survival)
    return _integrate(job, weight, weight, _identity, identity=True)


def cocfi(job: MeasureJob) -> IntegralResult:
    """Co-copula fractional inaccuracy (bivariate)."""
    _check_kind(job, MeasureKind.COCFI)
    weight = DerivedCopula(job.true_copula, Transform.COCOPULA)
    ref = DerivedCopula(job.reference_copula, Transform.COCOPULA)
    comp = _composition(job.reference_margins, job.true_margins, compose_cdf)
    return _integrate(job, weight, ref, comp, identity=comp is _identity)


def dcfi(job: MeasureJob) -> IntegralResult:
    """Dual copula fractional inaccuracy (bivariate)."""
    _check_kind(job, MeasureKind.DCFI)
    weight = DerivedCopula(job.true_copula, Transform.DUAL)
    ref = DerivedCopula(job.reference_copula, Transform.DUAL)
    comp = _composition(job.reference_margins, job.true_margins, compose_cdf)
    return _integrate(job, weight, ref, comp, identity=comp is _identity)


# --------------------------------------------------------------------------
# univariate measures


def _nonnegative_support(*margins):
    for m in margins:
        if m.support()[0] < 0.0:
            raise DomainError("univariate measures need margins supported on [0, inf)")


def _interval_pieces(points, lo, hi):
    cuts = sorted({p for p in points if lo < p < hi} | {lo, hi})
    return list(zip(cuts[:-1], cuts[1:]))


def _sum_results(parts, **diag):
    parts = [p for p in parts if p is not None]
    return IntegralResult(
        value=math.fsum(p.value for p in parts),
        error_estimate=math.fsum(p.error_estimate for p in parts),
        evaluations=sum(p.evaluations for p in parts),
        diagnostics=diag,
    )


def _univariate(truth, reference, eta, cfg, route, past):
    order = as_order(eta)
    cfg = cfg or IntegrationConfig()
    # one-dimensional doubling is cheap, so it is the default here
    if cfg.method is None or cfg.method is Method.MONTE_CARLO:
        cfg = replace(cfg, method=Method.ADAPTIVE)
    _nonnegative_support(truth, reference)
    a, b = truth.support()
    c, d = reference.support()
    eps = cfg.clamp_epsilon

    def kern(p):
        return kernel_from_neglog(-np.log(np.clip(p, eps, 1.0)), order)

    # F weights G in the past measure, survival functions in the residual one
    weight = truth.cdf if past else truth.sf
    ref_fn = reference.cdf if past else reference.sf
    if past and c > a:
        raise DivergentIntegralError("reference CDF vanishes where the true CDF is positive")
    if not past and d < b:
        raise DivergentIntegralError("reference survival vanishes where the true survival is positive")

    def outer(x):
        return kern(ref_fn(x))

    if route == "quantile":
        if past:
            inv = truth._quantile
        else:
            inv = truth._squantile

        def f(v):
            p = v[:, 0]
            x = inv(p)
            dens = truth._pdf(x)
            with np.errstate(divide="ignore", invalid="ignore"):
                jac = np.where(dens > 0.0, p / dens, 0.0)
            val = kern(ref_fn(x))
            return np.where(jac == 0.0, 0.0, jac * val)

        parts = [integrate_unit_cube(f, 1, cfg)]
        # the substitution covers the truth support only; outside it the
        # weight is identically one on one side
        if past and math.isfinite(b) and d > b:
            parts.append(integrate_interval(outer, b, d, cfg))
        if not past and a > 0.0:
            parts.append(integrate_interval(outer, 0.0, a, cfg))
        return _sum_results(parts, route=route)

    if route != "halfline":
        raise ParameterError(f"unknown route {route!r}")

    def g(x):
        return np.where(weight(x) == 0.0, 0.0, weight(x) * kern(ref_fn(x)))

    if past:
        top = max(b, d)
        if math.isinf(top):
            q = []
            if math.isinf(b):
                q.append(truth.quantile(1.0 - 1e-16))
            if math.isinf(d):
                q.append(reference.quantile(1.0 - 1e-16))
            top = max(q + [x for x in (b, d) if math.isfinite(x)])
            tail_needed = True
        else:
            tail_needed = False
    else:
        top = b
        tail_needed = math.isinf(b)
        if tail_needed:
            top = truth.survival_quantile(1e-20)
    pieces = _interval_pieces([a, b, c, d], 0.0, top)
    parts = [integrate_interval(g, lo, hi, cfg) for lo, hi in pieces]
    tail = 0.0
    if tail_needed:
        tail = integrate_interval(g, top, 2.0 * top, cfg).value
        if tail > max(1e-10, cfg.rel_tolerance * abs(sum(p.value for p in parts))):
            raise DivergentIntegralError(f"truncated tail beyond x = {top:g} is {tail:.3g}")
    res = _sum_results(parts, route=route, truncation=top, tail_estimate=tail)
    return replace(res, error_estimate=res.error_estimate + tail)


def fcri_univariate(truth: Margin, reference: Margin, eta, cfg: IntegrationConfig = None, route="quantile"):
    """Fractional cumulative residual inaccuracy ``∫ F̄ (-Ln Ḡ)^{1/eta} dx`` on [0, inf).

    ``route="quantile"`` substitutes ``v = F̄(x)``; ``route="halfline"``
    integrates on a truncated half line and reports the tail estimate.
    """
    return _univariate(truth, reference, eta, cfg, route, past=False)


def fcpi_univariate(truth: Margin, reference: Margin, eta, cfg: IntegrationConfig = None, route="quantile"):
    """Fractional cumulative past inaccuracy ``∫ F (-Ln G)^{1/eta} dx`` on [0, inf)."""
    return _univariate(truth, reference, eta, cfg, route, past=True)


_DISPATCH = {
    MeasureKind.CCFI: ccfi,
    MeasureKind.CCFI_TILDE: ccfi_tilde,
    MeasureKind.CCI: cci,
    MeasureKind.CCFE: ccfe,
    MeasureKind.SCFI: scfi,
    MeasureKind.SCFE: scfe,
    MeasureKind.COCFI: cocfi,
    MeasureKind.DCFI: dcfi,
}


def evaluate(job: MeasureJob) -> IntegralResult:
    """Evaluate any job by its kind."""
    if job.kind is MeasureKind.FCRI:
        return fcri_univariate(job.true_margins[0], job.reference_margins[0], job.eta, job.integration)
    if job.kind is MeasureKind.FCPI:
        return fcpi_univariate(job.true_margins[0], job.reference_margins[0], job.eta, job.integration)
    return _DISPATCH[job.kind](job)


# --------------------------------------------------------------------------
# Fréchet–Hoeffding bounds


class FrechetBounds(NamedTuple):
    w_side: float  # integral against max(u + v - 1, 0)
    m_side: float  # integral against min(u, v)


def ccfi_frechet_bounds(eta, gamma_: float, delta: float) -> FrechetBounds:
    """Closed forms for independent PRHR references ``G1 = F1^gamma``, ``G2 = F2^delta``.

    These are the W- and M-weighted integrals of the kernel split
    additively across coordinates, ``gamma*K(u) + delta*K(v)``.
    """
    order = as_order(eta)
    for name, val in (("gamma", gamma_), ("delta", delta)):
        if not (val > 0.0 and math.isfinite(val)):
            raise ParameterError(f"{name} must be positive, got {val!r}")
    e = order.eta
    a = order.power
    pref = eta_factorial(order) ** a
    g1a = gamma(1.0 + a)
    w_coef = g1a / (2.0 * 3.0 ** (1.0 + a))
    w_side = pref * w_coef * (gamma_ + delta)
    gamma_coef = 3.0 ** (-a) * gamma(a) / (6.0 * e) + gamma((e + 1.0) / e) * (
        2.0 ** ((-e - 1.0) / e) - 3.0 ** ((-e - 1.0) / e)
    )
    b = (2.0 * e + 1.0) / e
    delta_coef = gamma(b) * gauss_2f1(b, -0.5) / (4.0 * 2.0**a) + w_coef
    m_side = pref * (gamma_ * gamma_coef + delta * delta_coef)
    return FrechetBounds(w_side=w_side, m_side=m_side)


def _bound_weighted(side: str, g, cfg: IntegrationConfig) -> IntegralResult:
    """∫∫ B(u,v) g(u,v) with B = W or M, split along the kink of B.

    W vanishes below the antidiagonal, so only the upper triangle is needed.
    """
    if side == "m":
        triangles = DIAGONAL_TRIANGLES

        def f(pts):
            return np.minimum(pts[:, 0], pts[:, 1]) * g(pts)

    elif side == "w":
        triangles = ANTIDIAGONAL_TRIANGLES[:1]

        def f(pts):
            return np.maximum(pts[:, 0] + pts[:, 1] - 1.0, 0.0) * g(pts)

    else:
        raise ParameterError(f"side must be 'w' or 'm', got {side!r}")
    return integrate_triangles(f, triangles, cfg)


def frechet_bound_integral(eta, gamma_, delta, side: str, *, additive=False, cfg: IntegrationConfig = None):
    """Quadrature of the W- or M-weighted kernel for independent PRHR references.

    The default kernel is the measure's own, ``K(u^gamma v^delta)``.  With
    ``additive=True`` it is ``gamma*K(u) + delta*K(v)``, the form integrated
    by :func:`ccfi_frechet_bounds`.
    """
    order = as_order(eta)
    cfg = cfg or IntegrationConfig()

    def g(pts):
        lu, lv = -np.log(pts[:, 0]), -np.log(pts[:, 1])
        if additive:
            return gamma_ * kernel_from_neglog(lu, order) + delta * kernel_from_neglog(lv, order)
        return kernel_from_neglog(gamma_ * lu + delta * lv, order)

    return _bound_weighted(side, g, cfg)


def frechet_sandwich(job: MeasureJob):
    """W- and M-weighted versions of a bivariate CCFI job's integral.

    Returns ``(w_integral, m_integral)``; every copula lies between them.
    """
    _check_kind(job, MeasureKind.CCFI)
    if job.dim != 2:
        raise UnsupportedDimensionError("Fréchet sandwich is bivariate")
    _, ref, comp = _cumulative_terms(job)
    g = GuardedIntegrand(
        weight=lambda v: np.ones(v.shape[0]),
        kernel_arg=lambda v: ref.evaluate(comp(v)),
        eta=job.eta,
        clamp_epsilon=job.integration.clamp_epsilon,
    )
    return _bound_weighted("w", g, job.integration), _bound_weighted("m", g, job.integration)
