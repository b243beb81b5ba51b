"""Diffusivity models D(u), their integral K(u) = int_0^u D, and its inverse.

All models are degenerate in the sense D(0) = 0 with D positive and strictly
increasing for u > 0; that combination is what produces a compactly supported
profile with a sharp wetting front. The compact-support admissibility test
checks int_0^1 D(s)/s ds < infinity numerically.
"""

import math
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import ConvergenceError, ModelSpecError

_BRACKET_CAP = 1e9


class AdmissibilityResult(NamedTuple):
    admissible: bool
    integral: Optional[float]


def _grow_bracket(f: Callable[[float], float], target_sign_change: bool = True) -> float:
    """Grow hi from 1.0 by doubling until f(hi) >= 0; error past the cap."""
    hi = 1.0
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > _BRACKET_CAP:
            raise ConvergenceError(f"bracket growth exceeded {_BRACKET_CAP:g}")
    return hi


class DiffusivityModel:
    """Base class; subclasses provide D, and optionally closed-form K and K_inv."""

    spec_string = "custom"

    def D(self, u: float) -> float:
        raise NotImplementedError

    def K(self, u: float) -> float:
        if u < 0.0:
            raise ValueError(f"K requires u >= 0, got {u}")
        if u == 0.0:
            return 0.0
        val, _ = quad(self.D, 0.0, u, epsabs=1e-14, epsrel=1e-10, limit=200)
        return val

    def K_inv(self, y: float) -> float:
        """Solve K(u) = y for the unique nonnegative root of the increasing K."""
        if y < 0.0:
            raise ValueError(f"K_inv requires y >= 0, got {y}")
        if y == 0.0:
            return 0.0
        hi = _grow_bracket(lambda u: self.K(u) - y)
        u = brentq(lambda x: self.K(x) - y, 0.0, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
        # Newton polish on the K-residual; K' = D
        for _ in range(3):
            resid = self.K(u) - y
            if abs(resid) <= 1e-12 * max(1.0, y):
                break
            d = self.D(u)
            if d <= 0.0:
                break
            u = max(u - resid / d, 0.0)
        return u

    def _validate(self, grid=None):
        if abs(self.D(0.0)) > 1e-12:
            raise ValueError(f"{self.spec_string}: D(0) = {self.D(0.0)}, expected 0")
        if grid is None:
            grid = np.logspace(-6, 1, 25)
        vals = np.array([self.D(float(u)) for u in grid])
        if np.any(vals <= 0.0):
            raise ValueError(f"{self.spec_string}: D must be positive for u > 0")
        if np.any(np.diff(vals) <= 0.0):
            raise ValueError(f"{self.spec_string}: D must be strictly increasing")


class PowerLawDiffusivity(DiffusivityModel):
    """Brooks-Corey power law D(u) = u^m, m > 0; K(u) = u^{m+1}/(m+1) exactly."""

    def __init__(self, m: float):
        if m <= 0.0:
            raise ValueError(f"power-law exponent must be positive, got m={m}")
        self.m = float(m)
        self.spec_string = f"power:m={self.m:g}"

    def D(self, u):
        if u < 0.0:
            raise ValueError(f"D requires u >= 0, got {u}")
        return u ** self.m

    def K(self, u):
        if u < 0.0:
            raise ValueError(f"K requires u >= 0, got {u}")
        return u ** (self.m + 1.0) / (self.m + 1.0)

    def K_inv(self, y):
        if y < 0.0:
            raise ValueError(f"K_inv requires y >= 0, got {y}")
        return ((self.m + 1.0) * y) ** (1.0 / (self.m + 1.0))


class ExponentialDiffusivity(DiffusivityModel):
    """Saturating model D(u) = 1 - e^{-u}; K(u) = u + e^{-u} - 1."""

    spec_string = "exp"

    def D(self, u):
        if u < 0.0:
            raise ValueError(f"D requires u >= 0, got {u}")
        return -math.expm1(-u)

    def K(self, u):
        if u < 0.0:
            raise ValueError(f"K requires u >= 0, got {u}")
        return u + math.expm1(-u)

    def K_inv(self, y):
        if y < 0.0:
            raise ValueError(f"K_inv requires y >= 0, got {y}")
        if y == 0.0:
            return 0.0
        hi = _grow_bracket(lambda u: self.K(u) - y)
        u = brentq(lambda x: self.K(x) - y, 0.0, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
        for _ in range(3):
            resid = self.K(u) - y
            if abs(resid) <= 1e-12 * max(1.0, y):
                break
            u = max(u - resid / self.D(u), 0.0)
        return u


class CustomDiffusivity(DiffusivityModel):
    """User-supplied D with optional closed-form K and K_inv; validated at construction."""

    def __init__(self, D: Callable[[float], float],
                 K: Optional[Callable[[float], float]] = None,
                 K_inv: Optional[Callable[[float], float]] = None,
                 name: str = "custom",
                 validate: bool = True):
        self._D = D
        self._K = K
        self._K_inv = K_inv
        self.spec_string = name
        if validate:
            self._validate()

    def D(self, u):
        if u < 0.0:
            raise ValueError(f"D requires u >= 0, got {u}")
        return float(self._D(u))

    def K(self, u):
        if self._K is not None:
            if u < 0.0:
                raise ValueError(f"K requires u >= 0, got {u}")
            return float(self._K(u))
        return super().K(u)

    def K_inv(self, y):
        if self._K_inv is not None:
            if y < 0.0:
                raise ValueError(f"K_inv requires y >= 0, got {y}")
            return float(self._K_inv(y))
        return super().K_inv(y)


class RegularizedDiffusivity(DiffusivityModel):
    """Floor regularization D_h(u) = max(D(u), epsilon) of a base model.

    Satisfies 0 < epsilon <= D_h everywhere and ||D_h - D||_inf <= epsilon
    because the base D is nondecreasing with D(0) = 0.
    """

    def __init__(self, base: DiffusivityModel, epsilon: float):
        if epsilon <= 0.0:
            raise ValueError(f"regularization floor must be positive, got {epsilon}")
        self.base = base
        self.epsilon = float(epsilon)
        self.spec_string = f"{base.spec_string}+floor:{epsilon:g}"
        # crossover point D(s_eps) = epsilon; +inf when D stays below the floor
        if base.D(_BRACKET_CAP) <= epsilon:
            self._s_eps = math.inf
        else:
            hi = _grow_bracket(lambda s: base.D(s) - epsilon)
            self._s_eps = brentq(lambda s: base.D(s) - epsilon, 0.0, hi,
                                 xtol=1e-15, rtol=8.9e-16, maxiter=200)

    @property
    def crossover(self) -> float:
        return self._s_eps

    def D(self, u):
        return max(self.base.D(u), self.epsilon)

    def K(self, u):
        if u < 0.0:
            raise ValueError(f"K requires u >= 0, got {u}")
        s = self._s_eps
        if u <= s:
            return self.epsilon * u
        return self.epsilon * s + self.base.K(u) - self.base.K(s)

    def K_inv(self, y):
        if y < 0.0:
            raise ValueError(f"K_inv requires y >= 0, got {y}")
        s = self._s_eps
        if math.isinf(s) or y <= self.epsilon * s:
            return y / self.epsilon
        return self.base.K_inv(y - self.epsilon * s + self.base.K(s))


def regularize(model: DiffusivityModel, h: float, eta_star: float,
               C: float = 1.0, delta: float = 0.5) -> RegularizedDiffusivity:
    """Build the floor model with epsilon(h) = C * eta_star / (delta * ln(1/h))."""
    if not (0.0 < h < 1.0):
        raise ValueError(f"regularize requires 0 < h < 1, got h={h}")
    if C <= 0.0 or eta_star <= 0.0:
        raise ValueError("regularize requires C > 0 and eta_star > 0")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"regularize requires 0 < delta < 1, got {delta}")
    epsilon = C * eta_star / (delta * math.log(1.0 / h))
    return RegularizedDiffusivity(model, epsilon)


def check_admissible(model: DiffusivityModel) -> AdmissibilityResult:
    """Test int_0^1 D(s)/s ds < infinity by Cauchy increments at delta = 10^{-k}.

    Increments over [10^{-(k+1)}, 10^{-k}] must shrink geometrically; the value
    is then the truncated integral plus a geometric tail estimate. Diagnostic
    only; returns (False, None) on detected divergence instead of raising.
    """
    integrand = lambda s: model.D(s) / s
    head, _ = quad(integrand, 1e-2, 1.0, epsabs=1e-13, epsrel=1e-11, limit=200)
    increments = []
    for k in range(2, 10):
        val, _ = quad(integrand, 10.0 ** (-(k + 1)), 10.0 ** (-k),
                      epsabs=1e-14, epsrel=1e-11, limit=200)
        if not math.isfinite(val):
            return AdmissibilityResult(False, None)
        increments.append(val)
    total = head + sum(increments)
    last, prev = increments[-1], increments[-2]
    if last <= 1e-15 * max(1.0, total):
        return AdmissibilityResult(True, total)
    ratio = last / prev if prev > 0.0 else 1.0
    if not (0.0 < ratio < 0.99):
        return AdmissibilityResult(False, None)
    tail = last * ratio / (1.0 - ratio)
    return AdmissibilityResult(True, total + tail)


def parse_model(spec: str) -> DiffusivityModel:
    """Parse the CLI grammar: ``power:m=<float>`` or ``exp``."""
    if spec == "exp":
        return ExponentialDiffusivity()
    if spec.startswith("power"):
        prefix = "power:m="
        if not spec.startswith(prefix):
            raise ModelSpecError(spec, len("power"), f"expected {prefix!r}")
        arg = spec[len(prefix):]
        try:
            m = float(arg)
        except ValueError:
            raise ModelSpecError(spec, len(prefix), f"expected float, got {arg!r}") from None
        if m <= 0.0:
            raise ModelSpecError(spec, len(prefix), f"exponent must be positive, got {m}")
        return PowerLawDiffusivity(m)
    raise ModelSpecError(spec, 0, "expected 'power:m=<float>' or 'exp'")
