"""Special functions behind the fractional kernels and the bound formulas.

The inverse Mittag-Leffler logarithm ``Ln_eta`` has no closed form; it is
taken here, as a definition, to be ``Gamma(eta + 1) * log(x)``.  Every
measure in the package builds on :func:`fractional_log_kernel`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "FractionalOrder",
    "as_order",
    "gamma",
    "eta_factorial",
    "inverse_mlf_log",
    "fractional_log_kernel",
    "kernel_from_neglog",
    "gauss_2f1",
]

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class FractionalOrder:
    """Fractional exponent ``eta`` restricted to the open interval (0, 1)."""

    eta: float

    def __post_init__(self):
        eta = float(self.eta)
        if not (0.0 < eta < 1.0) or math.isnan(eta):
            raise DomainError(f"fractional order must lie in (0, 1), got {self.eta!r}")
        object.__setattr__(self, "eta", eta)

    def __float__(self):
        return self.eta

    @property
    def power(self) -> float:
        """The exponent ``1/eta`` applied to the negated log."""
        return 1.0 / self.eta


def as_order(eta) -> FractionalOrder:
    if isinstance(eta, FractionalOrder):
        return eta
    return FractionalOrder(eta)


def gamma(x: float) -> float:
    """Gamma function for positive real ``x`` (Lanczos, g=7).

    Arguments below 1/2 are shifted up by one with ``Gamma(x) = Gamma(x+1)/x``
    rather than reflected, since only the positive axis is needed.
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"gamma is only defined here for x > 0, got {x!r}")
    if x < 0.5:
        return _lanczos(x + 1.0) / x
    return _lanczos(x)


def _lanczos(x):
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    # t**(z+0.5) overflows near x ~ 143; split the power in two.
    half = t ** (0.5 * (z + 0.5))
    return _SQRT_2PI * half * (half * math.exp(-t)) * acc


@lru_cache(maxsize=256)
def _eta_factorial(eta: float) -> float:
    return gamma(eta + 1.0)


def eta_factorial(eta) -> float:
    """``eta!`` read as ``Gamma(eta + 1)``."""
    return _eta_factorial(as_order(eta).eta)


def _check_unit(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError("argument must be > 0")
    if np.any(arr > 1.0):
        raise DomainError("argument must be <= 1")
    return arr


def inverse_mlf_log(x, eta):
    """Approximate inverse Mittag-Leffler log, ``Gamma(eta+1) * log(x)``.

    Accepts scalars or arrays with entries in (0, 1].
    """
    arr = _check_unit(x)
    out = eta_factorial(eta) * np.log(arr)
    return float(out) if out.ndim == 0 else out


def kernel_from_neglog(s, eta):
    """Kernel written in terms of ``s = -log(x) >= 0``.

    Useful when ``x`` itself would underflow, e.g. ``u**gamma * v**delta``.
    """
    order = as_order(eta)
    s = np.maximum(np.asarray(s, dtype=float), 0.0)
    scale = eta_factorial(order) ** order.power
    out = scale * np.power(s, order.power)
    return float(out) if out.ndim == 0 else out


def fractional_log_kernel(x, eta):
    """``(-Ln_eta x) ** (1/eta)`` for ``x`` in (0, 1]; zero exactly at 1."""
    arr = _check_unit(x)
    return kernel_from_neglog(-np.log(arr), eta)


def gauss_2f1(b: float, z: float, *, tol: float = 1e-15, max_terms: int = 10_000) -> float:
    """``2F1(1, b; 2; z)`` by direct summation for ``|z| < 1``.

    Consecutive terms satisfy ``t[n+1] = t[n] * (b + n) * z / (n + 2)``.
    """
    b = float(b)
    z = float(z)
    if not b > 0.0:
        raise DomainError(f"b must be positive, got {b!r}")
    if not abs(z) < 1.0:
        raise DomainError(f"series requires |z| < 1, got {z!r}")
    term = 1.0
    total = 1.0
    comp = 0.0
    for n in range(max_terms):
        term *= (b + n) * z / (n + 2.0)
        # Kahan summation; alternating terms at z < 0 lose digits otherwise.
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) < tol:
            break
    return total
