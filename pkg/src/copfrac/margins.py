"""Univariate margins and the probability-scale compositions used by the measures."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import CompositionError, DomainError, ParameterError

__all__ = [
    "Margin",
    "Exponential",
    "Uniform",
    "PowerOfBase",
    "PowerMode",
    "MarginVector",
    "margin_vector",
    "compose_cdf",
    "compose_survival",
]


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _probs(p):
    arr = np.asarray(p, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("probabilities must lie in [0, 1]")
    return arr


class Margin:
    """Interface shared by all margins.

    Subclasses implement the ``_cdf``, ``_sf``, ``_quantile``, ``_squantile``
    and ``_pdf`` hooks on numpy arrays; the public methods handle
    validation and scalar/array conversion.
    """

    def support(self) -> Tuple[float, float]:
        raise NotImplementedError

    def cdf(self, x):
        return _out(self._cdf(np.asarray(x, dtype=float)))

    def sf(self, x):
        return _out(self._sf(np.asarray(x, dtype=float)))

    def pdf(self, x):
        return _out(self._pdf(np.asarray(x, dtype=float)))

    def quantile(self, p):
        """Inverse CDF; ``p = 0`` and ``p = 1`` map to the support endpoints."""
        return _out(self._quantile(_probs(p)))

    def survival_quantile(self, s):
        """Inverse survival function, ``sf(survival_quantile(s)) == s``."""
        return _out(self._squantile(_probs(s)))

    def median(self) -> float:
        return self.quantile(0.5)


@dataclass(frozen=True)
class Exponential(Margin):
    rate: float = 1.0

    def __post_init__(self):
        rate = float(self.rate)
        if not (rate > 0.0 and math.isfinite(rate)):
            raise ParameterError(f"exponential requires rate > 0, got {self.rate!r}")
        object.__setattr__(self, "rate", rate)

    def support(self):
        return 0.0, math.inf

    def _cdf(self, x):
        with np.errstate(over="ignore"):
            return np.where(x <= 0.0, 0.0, -np.expm1(-self.rate * np.maximum(x, 0.0)))

    def _sf(self, x):
        return np.where(x <= 0.0, 1.0, np.exp(-self.rate * np.maximum(x, 0.0)))

    def _pdf(self, x):
        return np.where(x < 0.0, 0.0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)))

    def _quantile(self, p):
        with np.errstate(divide="ignore"):
            return -np.log1p(-p) / self.rate

    def _squantile(self, s):
        with np.errstate(divide="ignore"):
            return np.maximum(-np.log(s) / self.rate, 0.0)


@dataclass(frozen=True)
class Uniform(Margin):
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (a < b and math.isfinite(a) and math.isfinite(b)):
            raise ParameterError(f"uniform requires finite a < b, got ({self.a!r}, {self.b!r})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def support(self):
        return self.a, self.b

    def _cdf(self, x):
        return np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)

    def _sf(self, x):
        return np.clip((self.b - x) / (self.b - self.a), 0.0, 1.0)

    def _pdf(self, x):
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def _quantile(self, p):
        return self.a + p * (self.b - self.a)

    def _squantile(self, s):
        return self.b - s * (self.b - self.a)

    def median(self):
        return 0.5 * (self.a + self.b)


class PowerMode(str, enum.Enum):
    PRHR = "prhr"  # G = F ** gamma
    PHR = "phr"  # survival_G = survival_F ** gamma


@dataclass(frozen=True)
class PowerOfBase(Margin):
    """Proportional (reversed) hazard transform of a base margin."""

    base: Margin
    gamma: float
    mode: PowerMode = PowerMode.PRHR

    def __post_init__(self):
        if not isinstance(self.base, Margin):
            raise ParameterError("power margin needs a base margin")
        g = float(self.gamma)
        if not (g > 0.0 and math.isfinite(g)):
            raise ParameterError(f"power margin requires gamma > 0, got {self.gamma!r}")
        object.__setattr__(self, "gamma", g)
        try:
            object.__setattr__(self, "mode", PowerMode(self.mode))
        except ValueError:
            raise ParameterError(f"power mode must be 'prhr' or 'phr', got {self.mode!r}") from None

    def support(self):
        return self.base.support()

    def _pow(self, p):
        with np.errstate(divide="ignore"):
            return np.exp(self.gamma * np.log(p))

    def _cdf(self, x):
        if self.mode is PowerMode.PRHR:
            return self._pow(self.base._cdf(x))
        with np.errstate(divide="ignore"):
            return -np.expm1(self.gamma * np.log(self.base._sf(x)))

    def _sf(self, x):
        if self.mode is PowerMode.PHR:
            return self._pow(self.base._sf(x))
        with np.errstate(divide="ignore"):
            return -np.expm1(self.gamma * np.log(self.base._cdf(x)))

    def _pdf(self, x):
        f = self.base._pdf(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.mode is PowerMode.PRHR:
                g = self.gamma * self.base._cdf(x) ** (self.gamma - 1.0) * f
            else:
                g = self.gamma * self.base._sf(x) ** (self.gamma - 1.0) * f
        return np.where(f > 0.0, g, 0.0)

    def _quantile(self, p):
        if self.mode is PowerMode.PRHR:
            return self.base._quantile(self._root(p))
        return self._other_tail(p)

    def _squantile(self, s):
        if self.mode is PowerMode.PHR:
            return self.base._squantile(self._root(s))
        return self._other_tail(s)

    def _other_tail(self, p):
        # base point whose untransformed tail is (1 - p)^(1/gamma); pick the
        # side of the base that keeps the small probability accurate
        with np.errstate(divide="ignore"):
            e = np.log1p(-p) / self.gamma
        keep, flip = np.exp(e), -np.expm1(e)
        small = flip < 0.5
        if self.mode is PowerMode.PRHR:
            # survival of G is 1 - F^gamma: solve F = keep
            a = self.base._quantile(np.where(small, 0.5, keep))
            b = self.base._squantile(np.where(small, flip, 0.5))
        else:
            # cdf of G is 1 - sf_F^gamma: solve sf_F = keep
            a = self.base._squantile(np.where(small, 0.5, keep))
            b = self.base._quantile(np.where(small, flip, 0.5))
        return np.where(small, b, a)

    def _root(self, p):
        with np.errstate(divide="ignore"):
            return np.exp(np.log(p) / self.gamma)


MarginVector = Tuple[Margin, ...]


def margin_vector(margins: Sequence[Margin], dim: int = None) -> MarginVector:
    out = tuple(margins)
    for m in out:
        if not isinstance(m, Margin):
            raise ParameterError(f"not a margin: {m!r}")
    if dim is not None and len(out) != dim:
        raise ParameterError(f"expected {dim} margins, got {len(out)}")
    return out


def _check_overlap(reference: Margin, truth: Margin):
    a, b = truth.support()
    c, d = reference.support()
    # touching supports are fine: the composition is then identically 0 or 1
    if b < c or d < a:
        raise CompositionError(
            f"supports do not overlap: truth on [{a:g}, {b:g}], reference on [{c:g}, {d:g}]"
        )


def compose_cdf(reference: Margin, truth: Margin, v):
    """``G(F^{-1}(v))``: reference CDF after the truth quantile."""
    _check_overlap(reference, truth)
    p = _probs(v)
    return _out(np.clip(reference._cdf(truth._quantile(p)), 0.0, 1.0))


def compose_survival(reference: Margin, truth: Margin, v):
    """``Ḡ(F̄^{-1}(v))``: reference survival after the truth survival quantile."""
    _check_overlap(reference, truth)
    s = _probs(v)
    return _out(np.clip(reference._sf(truth._squantile(s)), 0.0, 1.0))
