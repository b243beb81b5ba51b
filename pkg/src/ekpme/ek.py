"""Product quadrature for the forward-nonlocal Erdelyi-Kober integral

    F_a U(eta) = 1/Gamma(1-a) * int_0^1 (1-s)^{-a} U(s^{-B} eta) ds,

discretized on the uniform grid eta_n = n h. After the substitution
z = s^{-B} eta the operator value at eta_n is an improper integral over
[eta_n, inf) that gets truncated at eta_N and approximated with piecewise
constant (rectangle) or piecewise linear (trapezoid) interpolation of U.
The kernel is absorbed into the weights exactly; only ratios i/n enter, so
weight rows are independent of the grid spacing.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

from . import special
from .special import SpecialFnConfig, incomplete_beta


class Rule(enum.Enum):
    RECTANGLE = "rect"
    TRAPEZOID = "trap"

    @classmethod
    def parse(cls, text: str) -> "Rule":
        for rule in cls:
            if rule.value == text:
                return rule
        raise ValueError(f"unknown rule {text!r}, expected 'rect' or 'trap'")


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, eta_star] with N intervals; h is always eta_star/N."""

    eta_star: float
    N: int

    def __post_init__(self):
        if self.eta_star <= 0.0:
            raise ValueError(f"eta_star must be positive, got {self.eta_star}")
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")

    @property
    def h(self) -> float:
        return self.eta_star / self.N

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.h


@dataclass(frozen=True)
class EKParams:
    """Order alpha and scaling exponents; defaults A = 1-alpha, B = alpha/2."""

    alpha: float
    B: float = None
    A: float = None
    rule: Rule = Rule.RECTANGLE

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.B is None:
            object.__setattr__(self, "B", self.alpha / 2.0)
        if self.A is None:
            object.__setattr__(self, "A", 1.0 - self.alpha)
        if self.B <= 0.0:
            raise ValueError(f"B must be positive, got {self.B}")
        if self.rule is Rule.TRAPEZOID:
            if self.alpha >= 1.0:
                raise ValueError("trapezoid rule requires alpha < 1")
            if self.B >= 1.0:
                raise ValueError(f"trapezoid rule requires B < 1, got B={self.B}")


@dataclass
class EKWeightRow:
    """Weights for nodes i = n..N; apply against samples U(eta_i)."""

    n: int
    N: int
    weights: np.ndarray

    def apply(self, samples) -> float:
        return apply_ek(samples, self)


def optimal_truncation(h: float, B: float, rule: Rule) -> int:
    """Truncation multiplier gamma so that N = gamma * n balances both error sources."""
    if not (0.0 < h < 1.0):
        raise ValueError(f"optimal_truncation requires 0 < h < 1, got {h}")
    if B <= 0.0:
        raise ValueError(f"B must be positive, got {B}")
    expo = -B if rule is Rule.RECTANGLE else -2.0 * B
    return int(math.floor(h ** expo + 1e-9)) + 1


def interval_masses(n: int, N: int, alpha: float, B: float) -> np.ndarray:
    """EK-kernel mass of each interval [eta_i, eta_{i+1}], i = n..N-1, for row n >= 1.

    Entry k is (f(n+k+1) - f(n+k)) / Gamma(2-alpha) with
    f(x) = (1 - (x/n)^{-1/B})^{1-alpha}; powers go through exp/log of the
    ratio so large indices cannot overflow. At alpha = 1 the kernel limit
    concentrates all mass in the first interval.
    """
    if n < 1:
        raise ValueError("interval_masses requires n >= 1 (row 0 is the identity row)")
    if n > N:
        raise IndexError(f"n={n} exceeds N={N}")
    if alpha == 1.0:
        masses = np.zeros(N - n)
        if N > n:
            masses[0] = 1.0
        return masses
    i = np.arange(n, N + 1, dtype=float)
    x = (-1.0 / B) * (np.log(i) - math.log(n))
    f = (-np.expm1(x)) ** (1.0 - alpha)
    f[0] = 0.0
    return np.diff(f) / special.gamma(2.0 - alpha)


def rectangle_weights(n: int, N: int, params: EKParams) -> EKWeightRow:
    """Right-endpoint product rectangle row: interval masses attached to U(eta_{i+1})."""
    if n > N:
        raise IndexError(f"n={n} exceeds N={N}")
    weights = np.zeros(N - n + 1)
    if n == 0:
        weights[0] = 1.0 / special.gamma(2.0 - params.alpha)
    elif params.alpha == 1.0:
        if N > n:
            weights[1] = 1.0
    else:
        weights[1:] = interval_masses(n, N, params.alpha, params.B)
    return EKWeightRow(n, N, weights)


def trapezoid_weights(n: int, N: int, params: EKParams,
                      config: SpecialFnConfig = special.DEFAULT_CONFIG) -> EKWeightRow:
    """Piecewise-linear product row; first moments need the incomplete beta.

    d_i is the first-moment weight of interval [eta_i, eta_{i+1}]; the row is
    exact for affine U on the truncated domain [eta_n, eta_N].
    """
    if params.rule is not Rule.TRAPEZOID:
        params = EKParams(params.alpha, params.B, params.A, Rule.TRAPEZOID)
    if n > N:
        raise IndexError(f"n={n} exceeds N={N}")
    alpha, B = params.alpha, params.B
    weights = np.zeros(N - n + 1)
    if n == 0:
        weights[0] = 1.0 / special.gamma(2.0 - alpha)
        return EKWeightRow(n, N, weights)
    if n == N:
        return EKWeightRow(n, N, weights)
    i = np.arange(n, N + 1, dtype=float)
    z = np.exp((-1.0 / B) * (np.log(i) - math.log(n)))
    z[0] = 1.0
    betas = incomplete_beta(z, 1.0 - B, 1.0 - alpha, config)
    masses = interval_masses(n, N, alpha, B)
    d = (n / special.gamma(1.0 - alpha)) * (betas[:-1] - betas[1:]) - i[:-1] * masses
    weights[0] = masses[0] - d[0]
    if N - n >= 2:
        weights[1:-1] = d[:-1] - d[1:] + masses[1:]
    weights[-1] = d[-1]
    return EKWeightRow(n, N, weights)


def apply_ek(samples, row: EKWeightRow) -> float:
    """Weighted sum approximating F_a U(eta_n) from samples U(eta_i), i = n..N."""
    values = np.asarray(samples, dtype=float)
    if values.shape != row.weights.shape:
        raise ValueError(
            f"samples cover {values.shape[0]} nodes but row n={row.n} expects "
            f"{row.weights.shape[0]} (indices {row.n}..{row.N})"
        )
    return float(np.dot(row.weights, values))


def analytic_test_pair(mu: float, alpha: float,
                       config: SpecialFnConfig = special.DEFAULT_CONFIG
                       ) -> Tuple[Callable, Callable]:
    """Test function U(eta) = min(1, eta^mu) and its closed-form EK image (B = alpha/2).

    Valid while every gamma argument in the closed form stays positive, i.e.
    alpha*mu/2 < 1 and alpha*(2+mu)/2 < 2.
    """
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    a_param = 1.0 - alpha * mu / 2.0
    g_arg = 2.0 - alpha * (2.0 + mu) / 2.0
    if a_param <= 0.0 or g_arg <= 0.0:
        raise ValueError(
            f"closed form needs alpha*mu/2 < 1 and alpha*(2+mu)/2 < 2; "
            f"got alpha={alpha}, mu={mu}"
        )
    g2a = special.gamma(2.0 - alpha)
    g1a = special.gamma(1.0 - alpha)
    gamma_ratio = special.gamma(a_param) / special.gamma(g_arg)
    inv_b = 2.0 / alpha

    def U(eta):
        e = np.asarray(eta, dtype=float)
        if np.any(e < 0.0):
            raise ValueError("U is defined for eta >= 0")
        out = np.minimum(1.0, e ** mu)
        return float(out) if out.ndim == 0 else out

    def F(eta):
        e = np.asarray(eta, dtype=float)
        if np.any(e < 0.0):
            raise ValueError("F is defined for eta >= 0")
        scalar = e.ndim == 0
        e = np.atleast_1d(e)
        out = np.full(e.shape, 1.0 / g2a)
        inner = e < 1.0
        if inner.any():
            ei = e[inner]
            s0 = ei ** inv_b
            term1 = (1.0 - (1.0 - s0) ** (1.0 - alpha)) / g2a
            term2 = ei ** mu * (gamma_ratio
                                - np.asarray(incomplete_beta(s0, a_param, 1.0 - alpha, config)) / g1a)
            out[inner] = term1 + term2
        return float(out[0]) if scalar else out

    return U, F
