"""Copula families, Fréchet bounds and the bivariate survival/co-/dual transforms.

All evaluators are vectorised: a point set of shape ``(..., dim)`` returns
an array of shape ``(...)``; a single point returns a float.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DomainError, ParameterError, UnsupportedDimensionError

__all__ = [
    "Family",
    "Transform",
    "CopulaSpec",
    "DerivedCopula",
    "ReflectedSurvival",
    "eval_copula",
    "eval_survival",
    "eval_cocopula",
    "eval_dualcopula",
    "survival_by_transform",
    "cocopula_by_transform",
    "frechet_envelope",
    "as_points",
]

FRANK_INDEPENDENCE_CUTOFF = 1e-8


class Family(str, enum.Enum):
    INDEPENDENCE = "independence"
    COMONOTONE = "comonotone"
    COUNTERMONOTONE = "countermonotone"
    GUMBEL = "gumbel"
    FGM = "fgm"
    FRANK = "frank"
    JOE = "joe"
    AMH = "amh"


class Transform(str, enum.Enum):
    SURVIVAL = "survival"
    COCOPULA = "cocopula"
    DUAL = "dual"


_PARAMETRIC = {Family.GUMBEL, Family.FGM, Family.FRANK, Family.JOE, Family.AMH}


def as_points(v, dim: int) -> np.ndarray:
    """Coerce ``v`` to a float array whose last axis has length ``dim``."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != dim:
        raise DomainError(f"expected points with last axis of length {dim}, got shape {arr.shape}")
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("copula arguments must lie in [0, 1]")
    return arr


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class CopulaSpec:
    """An immutable parameterised copula instance.

    ``theta`` is ignored for the parameter-free families (Independence,
    Comonotone, Countermonotone).
    """

    family: Family
    theta: Optional[float] = None
    dim: int = 2

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError:
            raise ParameterError(f"unknown copula family {self.family!r}") from None
        object.__setattr__(self, "family", family)
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 2:
            raise ParameterError(f"copula dimension must be an integer >= 2, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        if family in _PARAMETRIC:
            if self.theta is None:
                raise ParameterError(f"{family.value} requires a theta parameter")
            theta = float(self.theta)
            if not math.isfinite(theta):
                raise ParameterError(f"{family.value} requires a finite theta")
            object.__setattr__(self, "theta", theta)
            _validate_theta(family, theta, self.dim)
        else:
            object.__setattr__(self, "theta", None)
            if family is Family.COUNTERMONOTONE and self.dim != 2:
                raise UnsupportedDimensionError("countermonotone copula exists only for dim = 2")

    @property
    def name(self) -> str:
        if self.theta is None:
            return self.family.value
        return f"{self.family.value}({self.theta:g})"

    def evaluate(self, v):
        return eval_copula(self, v)

    __call__ = evaluate


def _validate_theta(family, theta, dim):
    if family is Family.GUMBEL and theta < 1.0:
        raise ParameterError("gumbel requires theta >= 1")
    if family is Family.JOE and theta < 1.0:
        raise ParameterError("joe requires theta >= 1")
    if family is Family.FGM and not -1.0 <= theta <= 1.0:
        raise ParameterError("fgm requires theta in [-1, 1]")
    if family is Family.FRANK:
        if theta == 0.0:
            raise ParameterError("frank requires theta != 0")
        if dim > 2 and theta < 0.0:
            raise ParameterError("frank requires theta > 0 for dim > 2")
    if family is Family.AMH:
        if not -1.0 <= theta < 1.0:
            raise ParameterError("amh requires theta in [-1, 1)")
        if dim > 2 and theta < 0.0:
            raise ParameterError("amh requires theta in [0, 1) for dim > 2")


def _formula(spec: CopulaSpec, u: np.ndarray) -> np.ndarray:
    """Family formula on interior points, shape (..., dim) -> (...)."""
    fam, th = spec.family, spec.theta
    if fam is Family.INDEPENDENCE:
        return np.prod(u, axis=-1)
    if fam is Family.COMONOTONE:
        return np.min(u, axis=-1)
    if fam is Family.COUNTERMONOTONE:
        return np.maximum(u[..., 0] + u[..., 1] - 1.0, 0.0)
    if fam is Family.GUMBEL:
        s = np.sum((-np.log(u)) ** th, axis=-1)
        return np.exp(-(s ** (1.0 / th)))
    if fam is Family.FGM:
        return np.prod(u, axis=-1) * (1.0 + th * np.prod(1.0 - u, axis=-1))
    if fam is Family.FRANK:
        if abs(th) < FRANK_INDEPENDENCE_CUTOFF:
            return np.prod(u, axis=-1)
        num = np.prod(np.expm1(-th * u), axis=-1)
        den = math.expm1(-th) ** (spec.dim - 1)
        q = num / den
        if spec.dim != 2:
            return -np.log1p(q) / th
        # 1 + q cancels as q -> -1; regroup as (ab - a - b + c) / (c - 1) there
        a, b = np.exp(-th * u[..., 0]), np.exp(-th * u[..., 1])
        c = math.exp(-th)
        near = q < -0.5
        ratio = np.where(near, (a * b - a - b + c) / (c - 1.0), 1.0)
        return np.where(near, -np.log(ratio) / th, -np.log1p(np.where(near, 0.0, q)) / th)
    if fam is Family.JOE:
        # 1 - (1 - p)^(1/theta) without cancellation when p is small
        log_q = th * np.log1p(-u)
        p = np.prod(-np.expm1(log_q), axis=-1)
        # near the top corner 1 - p cancels; rebuild it from the factors
        one_minus_p = -np.expm1(np.sum(np.log1p(-np.exp(log_q)), axis=-1))
        log_rest = np.where(p < 0.5, np.log1p(-p), np.log(one_minus_p))
        return -np.expm1(log_rest / th)
    if fam is Family.AMH:
        if spec.dim == 2:
            x, y = u[..., 0], u[..., 1]
            return x * y / (1.0 - th * (1.0 - x) * (1.0 - y))
        phi = np.sum(np.log((1.0 - th * (1.0 - u)) / u), axis=-1)
        return (1.0 - th) / (np.exp(phi) - th)
    raise ParameterError(f"no formula for {fam}")  # pragma: no cover


def eval_copula(spec: CopulaSpec, v):
    """Evaluate ``C(v)``.

    Boundary points are resolved from the copula axioms before the family
    formula runs, so ``C(u, 1) == u`` and ``C(0, v) == 0`` hold exactly.
    """
    u = as_points(v, spec.dim)
    zero = np.any(u == 0.0, axis=-1)
    n_ones = np.sum(u == 1.0, axis=-1)
    boundary = zero | (n_ones >= spec.dim - 1)
    safe = np.where(boundary[..., None], 0.5, u)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        out = _formula(spec, safe)
    out = np.where(n_ones >= spec.dim - 1, np.min(u, axis=-1), out)
    out = np.where(zero, 0.0, out)
    return _scalar_or_array(np.clip(out, 0.0, 1.0))


def _require_bivariate(copula):
    if copula.dim != 2:
        raise UnsupportedDimensionError(
            f"survival, co- and dual-copula transforms need dim = 2, got dim = {copula.dim}"
        )


def _evaluate(copula, v):
    return copula.evaluate(v)


def survival_by_transform(copula, v):
    """``u + v - 1 + C(1-u, 1-v)`` for any bivariate copula-like object."""
    _require_bivariate(copula)
    u = as_points(v, 2)
    out = u[..., 0] + u[..., 1] - 1.0 + np.asarray(_evaluate(copula, 1.0 - u))
    return _scalar_or_array(np.clip(out, 0.0, 1.0))


def cocopula_by_transform(copula, v):
    """``1 - C(1-u, 1-v)``."""
    _require_bivariate(copula)
    u = as_points(v, 2)
    out = 1.0 - np.asarray(_evaluate(copula, 1.0 - u))
    return _scalar_or_array(np.clip(out, 0.0, 1.0))


def _direct_survival(spec: CopulaSpec, u: np.ndarray):
    """Closed-form survival copulas; None when only the transform is known."""
    fam = spec.family
    if fam in (Family.INDEPENDENCE, Family.COMONOTONE, Family.COUNTERMONOTONE, Family.FGM, Family.FRANK):
        # radially symmetric: the survival copula is the copula itself
        return np.asarray(eval_copula(spec, u))
    if fam is Family.JOE:
        return _joe_survival(spec.theta, u[..., 0], u[..., 1])
    return None


def _joe_survival(th, x, y):
    """``x + y - (x^th + y^th - x^th y^th)^(1/th)``, rearranged as
    ``lo - hi * expm1(log1p(r)/th)`` with ``r = (lo/hi)^th (1 - hi^th)`` so
    that nothing cancels when one argument is much smaller than the other."""
    hi = np.maximum(x, y)
    lo = np.minimum(x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(hi > 0.0, (lo / np.where(hi > 0.0, hi, 1.0)) ** th, 0.0) * -np.expm1(th * np.log(np.where(hi > 0.0, hi, 1.0)))
        out = lo - hi * np.expm1(np.log1p(r) / th)
    return np.where(hi > 0.0, out, 0.0)


def eval_survival(spec: CopulaSpec, v):
    """Survival copula ``C̄(u, v)``; bivariate only."""
    _require_bivariate(spec)
    u = as_points(v, 2)
    direct = _direct_survival(spec, u)
    if direct is None:
        return survival_by_transform(spec, u)
    return _scalar_or_array(np.clip(direct, 0.0, 1.0))


def eval_cocopula(spec: CopulaSpec, v):
    """Co-copula ``Ĉ(u, v) = u + v - C̄(u, v)``; bivariate only."""
    _require_bivariate(spec)
    u = as_points(v, 2)
    out = u[..., 0] + u[..., 1] - np.asarray(eval_survival(spec, u))
    return _scalar_or_array(np.clip(out, 0.0, 1.0))


def eval_dualcopula(spec: CopulaSpec, v):
    """Dual copula ``C̃(u, v) = u + v - C(u, v)``; bivariate only."""
    _require_bivariate(spec)
    u = as_points(v, 2)
    out = u[..., 0] + u[..., 1] - np.asarray(eval_copula(spec, u))
    return _scalar_or_array(np.clip(out, 0.0, 1.0))


@dataclass(frozen=True)
class DerivedCopula:
    """A survival, co- or dual copula of ``base``."""

    base: Union[CopulaSpec, "DerivedCopula"]
    transform: Transform

    def __post_init__(self):
        object.__setattr__(self, "transform", Transform(self.transform))
        _require_bivariate(self.base)

    @property
    def dim(self) -> int:
        return 2

    @property
    def name(self) -> str:
        return f"{self.transform.value}[{self.base.name}]"

    def evaluate(self, v):
        base, t = self.base, self.transform
        if isinstance(base, CopulaSpec):
            fn = {
                Transform.SURVIVAL: eval_survival,
                Transform.COCOPULA: eval_cocopula,
                Transform.DUAL: eval_dualcopula,
            }[t]
            return fn(base, v)
        if t is Transform.SURVIVAL:
            return survival_by_transform(base, v)
        if t is Transform.COCOPULA:
            return cocopula_by_transform(base, v)
        u = as_points(v, 2)
        out = u[..., 0] + u[..., 1] - np.asarray(base.evaluate(u))
        return _scalar_or_array(np.clip(out, 0.0, 1.0))

    __call__ = evaluate


@dataclass(frozen=True)
class ReflectedSurvival:
    """Survival copula of ``base`` computed only through the reflection identity.

    Unlike :class:`DerivedCopula` it never switches to a closed form, which
    makes it an independent route for cross-checks.
    """

    base: CopulaSpec

    def __post_init__(self):
        _require_bivariate(self.base)

    @property
    def dim(self) -> int:
        return 2

    @property
    def name(self) -> str:
        return f"reflected[{self.base.name}]"

    def evaluate(self, v):
        return survival_by_transform(self.base, v)

    __call__ = evaluate


def frechet_envelope(v):
    """Return ``(W(v), M(v))``, the lower and upper Fréchet–Hoeffding bounds."""
    u = as_points(v, 2)
    lower = np.maximum(u[..., 0] + u[..., 1] - 1.0, 0.0)
    upper = np.minimum(u[..., 0], u[..., 1])
    # u + v - 1 can round one ulp above min(u, v) when an argument is 1
    lower = np.minimum(lower, upper)
    return _scalar_or_array(lower), _scalar_or_array(upper)
