"""Gamma and Euler incomplete beta functions used by the quadrature weights.

The incomplete beta here is the *non-regularized* integral

    beta(z; a, b) = int_0^z t^{a-1} (1-t)^{b-1} dt,   0 <= z <= 1, a, b > 0,

evaluated with the continued-fraction form of Numerical Recipes, split at
z = (a+1)/(a+b+2) via the symmetry beta(z;a,b) = B(a,b) - beta(1-z;b,a).
The continued fraction is vectorized over z because weight rows need it at
hundreds of points with fixed (a, b).
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ConvergenceError

_FPMIN = 1e-300


@dataclass(frozen=True)
class SpecialFnConfig:
    """Accuracy knobs for series/continued-fraction evaluation."""

    rel_tolerance: float = 1e-12
    max_iterations: int = 500

    def __post_init__(self):
        if not (0.0 < self.rel_tolerance <= 1e-6):
            raise ValueError(f"rel_tolerance must lie in (0, 1e-6], got {self.rel_tolerance}")
        if self.max_iterations < 50:
            raise ValueError(f"max_iterations must be >= 50, got {self.max_iterations}")


DEFAULT_CONFIG = SpecialFnConfig()


def gamma(x: float, config: SpecialFnConfig = DEFAULT_CONFIG) -> float:
    """Gamma function for positive real arguments."""
    if x <= 0.0:
        raise ValueError(f"gamma requires x > 0, got {x}")
    return math.gamma(x)


def complete_beta(a: float, b: float) -> float:
    """B(a,b) = Gamma(a)Gamma(b)/Gamma(a+b), computed through lgamma."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"complete_beta requires a, b > 0, got a={a}, b={b}")
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def _betacf(a: float, b: float, x: np.ndarray, config: SpecialFnConfig) -> np.ndarray:
    """Continued fraction for the incomplete beta (modified Lentz), elementwise in x."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    np.copyto(d, _FPMIN, where=np.abs(d) < _FPMIN)
    d = 1.0 / d
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, config.max_iterations + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        np.copyto(d, _FPMIN, where=np.abs(d) < _FPMIN)
        c = 1.0 + aa / c
        np.copyto(c, _FPMIN, where=np.abs(c) < _FPMIN)
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        np.copyto(d, _FPMIN, where=np.abs(d) < _FPMIN)
        c = 1.0 + aa / c
        np.copyto(c, _FPMIN, where=np.abs(c) < _FPMIN)
        d = 1.0 / d
        delta = d * c
        h *= delta
        done |= np.abs(delta - 1.0) < config.rel_tolerance
        if done.all():
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b} "
        f"within {config.max_iterations} iterations"
    )


def incomplete_beta(z, a: float, b: float, config: SpecialFnConfig = DEFAULT_CONFIG):
    """Euler incomplete beta beta(z; a, b), scalar or elementwise over an array of z."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"incomplete_beta requires a, b > 0, got a={a}, b={b}")
    x = np.asarray(z, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < 0.0) or np.any(x > 1.0):
        bad = x[(x < 0.0) | (x > 1.0)][0]
        raise ValueError(f"incomplete_beta requires 0 <= z <= 1, got {bad}")

    out = np.empty_like(x)
    big = complete_beta(a, b)
    at0 = x == 0.0
    at1 = x == 1.0
    out[at0] = 0.0
    out[at1] = big

    interior = ~(at0 | at1)
    if interior.any():
        xi = x[interior]
        res = np.empty_like(xi)
        thresh = (a + 1.0) / (a + b + 2.0)
        lo = xi < thresh
        if lo.any():
            xl = xi[lo]
            # beta(z;a,b) = z^a (1-z)^b * cf / a  (lgamma factors cancel)
            res[lo] = np.exp(a * np.log(xl) + b * np.log1p(-xl)) * _betacf(a, b, xl, config) / a
        if (~lo).any():
            xh = xi[~lo]
            tail = np.exp(b * np.log1p(-xh) + a * np.log(xh)) * _betacf(b, a, 1.0 - xh, config) / b
            res[~lo] = big - tail
        out[interior] = res
    return float(out[0]) if scalar else out
