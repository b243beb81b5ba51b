"""Backward eta-stepping solver for the self-similar profile equation

    K(U(eta)) = int_eta^{eta*} G(eta, z) F_a U(z) dz,
    G(eta, z) = (A + B)(z - eta) + B z,

with U(eta) = 0 for eta >= eta*, marched from the wetting front down to
eta = 0, plus the outer shooting iteration that moves eta* until U(0) = M.

Quadrature layout (rectangle). The kernel integral uses the right-endpoint
product rule, so the weight b_{jn} of F(eta_j) is the G-mass of
[eta_{j-1}, eta_j] and b_{nn} = 0 keeps the march explicit. Inside each
F(eta_j) the EK kernel mass of [eta_i, eta_{i+1}] is attached to the left
node U_i: the coefficient of U_N vanishes identically, which is what makes
the start-up equation K(U_{N-1}) = a b U_{N-1} the generic first step and
keeps every later step nonzero. At alpha = 1 the EK row degenerates to the
identity and the march reduces to the classical product scheme.

The trapezoid variant is implicit: each step solves the scalar equation
K(x) - q_n x = R_n for the unique positive root.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from . import ek
from .diffusivity import DiffusivityModel, PowerLawDiffusivity, check_admissible, regularize
from .ek import EKParams, Grid, Rule
from .errors import ConvergenceError, ShootingError

_BRACKET_DOUBLINGS = 200


@dataclass(frozen=True)
class SolverConfig:
    """Scheme parameters; defaults follow the self-similar reduction A = 1-alpha, B = alpha/2."""

    alpha: float
    N: int
    rule: Rule = Rule.RECTANGLE
    A: float = None
    B: float = None
    shooting_tol: float = 1e-8
    max_shooting_iterations: int = 100
    scalar_tol: float = 1e-12
    regularization: Optional[Tuple[float, float]] = None  # (C, delta)

    def __post_init__(self):
        if self.rule is Rule.TRAPEZOID:
            if not (0.0 < self.alpha < 1.0):
                raise ValueError("trapezoid rule requires alpha in (0, 1)")
        elif not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.N < 4:
            raise ValueError(f"N must be >= 4, got {self.N}")
        if not (0.0 < self.shooting_tol < 1.0):
            raise ValueError(f"shooting tolerance must lie in (0, 1), got {self.shooting_tol}")
        if self.max_shooting_iterations < 1:
            raise ValueError("max_shooting_iterations must be positive")
        if self.A is None:
            object.__setattr__(self, "A", 1.0 - self.alpha)
        if self.B is None:
            object.__setattr__(self, "B", self.alpha / 2.0)
        if self.B <= 0.0:
            raise ValueError(f"B must be positive, got {self.B}")
        if self.regularization is not None:
            C, delta = self.regularization
            if C <= 0.0 or not (0.0 < delta < 1.0):
                raise ValueError("regularization needs C > 0 and delta in (0, 1)")

    @property
    def ek_params(self) -> EKParams:
        return EKParams(self.alpha, self.B, self.A, self.rule)


@dataclass
class KernelWeightRow:
    """Product-quadrature weights for int G(eta_n, z) F(z) dz at nodes j = n..N."""

    n: int
    N: int
    weights: np.ndarray


def kernel_weights_rect(n: int, N: int, h: float, A: float, B: float) -> KernelWeightRow:
    """Right-endpoint rule: b_{nn} = 0, b_{jn} = (h^2/2)((A+2B)(2j-1) - 2(A+B)n)."""
    if not (0 <= n <= N):
        raise IndexError(f"n={n} out of range 0..{N}")
    if h <= 0.0:
        raise ValueError(f"h must be positive, got {h}")
    w = np.zeros(N - n + 1)
    j = np.arange(n + 1, N + 1, dtype=float)
    w[1:] = 0.5 * h * h * ((A + 2.0 * B) * (2.0 * j - 1.0) - 2.0 * (A + B) * n)
    return KernelWeightRow(n, N, w)


def kernel_trap_moment(j: int, n: int, h: float, A: float, B: float) -> float:
    """First moment (h^2/6)((A+2B)(3j-1) - 3(A+B)n) of the kernel interval ending at node j."""
    return (h * h / 6.0) * ((A + 2.0 * B) * (3.0 * j - 1.0) - 3.0 * (A + B) * n)


def kernel_weights_trap(n: int, N: int, h: float, A: float, B: float) -> KernelWeightRow:
    """Piecewise-linear product rule for the kernel integral; exact on affine F.

    Assembled from interval masses (the rectangle weights) and first moments:
    the coefficient of F(eta_j) is moment(j) - moment(j+1) + mass(j+1) in the
    interval-ending-at-j indexing of kernel_trap_moment.
    """
    if not (0 <= n <= N):
        raise IndexError(f"n={n} out of range 0..{N}")
    if h <= 0.0:
        raise ValueError(f"h must be positive, got {h}")
    w = np.zeros(N - n + 1)
    if n == N:
        return KernelWeightRow(n, N, w)
    masses = kernel_weights_rect(n, N, h, A, B).weights[1:]          # intervals ending at n+1..N
    j = np.arange(n + 1, N + 1, dtype=float)
    moments = (h * h / 6.0) * ((A + 2.0 * B) * (3.0 * j - 1.0) - 3.0 * (A + B) * n)
    w[0] = masses[0] - moments[0]
    if N - n >= 2:
        w[1:-1] = moments[:-1] - moments[1:] + masses[1:]
    w[-1] = moments[-1]
    return KernelWeightRow(n, N, w)


@dataclass
class Profile:
    """Backward-marched solution samples U_n on a grid with U_N = 0."""

    grid: Grid
    values: np.ndarray
    rule: Rule
    model: DiffusivityModel
    alpha: float
    clamp_count: int = 0

    @property
    def eta_star(self) -> float:
        return self.grid.eta_star

    def front_flux(self) -> float:
        """One-sided discrete flux -D(U_{N-1}) (U_N - U_{N-1}) / h at the front."""
        u = float(self.values[-2])
        return self.model.D(u) * u / self.grid.h

    def monotone_violation(self) -> float:
        """Largest increase U_{n+1} - U_n over the profile (<= 0 when monotone)."""
        return float(np.max(np.diff(self.values)))

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("eta,U\n")
            for eta, u in zip(self.grid.nodes, self.values):
                fh.write(f"{eta:.15g},{u:.15g}\n")


@dataclass
class ShootingOutcome:
    eta_star: float
    profile: Profile
    residual: float
    iterations: int
    bracket_history: List[Tuple[float, float]] = field(default_factory=list)

    def summary_csv(self) -> str:
        return ("eta_star,residual,iterations\n"
                f"{self.eta_star:.15g},{self.residual:.15g},{self.iterations}\n")


class _EKRowCache:
    """Node-coefficient EK rows for the marching scheme, keyed by row index.

    Rows depend only on index ratios, alpha and B, never on h or eta*, so one
    cache serves every shooting iterate at fixed N. Rectangle rows carry the
    interval masses on their left nodes (coefficient of U_N is zero).
    """

    def __init__(self, config: SolverConfig):
        self.N = config.N
        self.alpha = config.alpha
        self.B = config.B
        self.rule = config.rule
        self._params = config.ek_params
        self._rows: Dict[int, np.ndarray] = {}

    def row(self, j: int) -> np.ndarray:
        cached = self._rows.get(j)
        if cached is not None:
            return cached
        if self.rule is Rule.RECTANGLE:
            r = np.zeros(self.N - j + 1)
            if j == 0:
                r[0] = 1.0 / math.gamma(2.0 - self.alpha)
            else:
                r[:-1] = ek.interval_masses(j, self.N, self.alpha, self.B)
        else:
            r = ek.trapezoid_weights(j, self.N, self._params).weights
        self._rows[j] = r
        return r


def _positive_root_of_K_eq_linear(model: DiffusivityModel, q: float,
                                  tol: float = 1e-12, context: str = "") -> float:
    """Unique positive root of K(x) = q x (K convex, K(0) = 0, K'(0) = D(0))."""
    if q <= 0.0:
        warnings.warn(f"degenerate start: nonpositive coefficient q={q:g} {context}".strip())
        return 0.0
    if isinstance(model, PowerLawDiffusivity):
        return ((model.m + 1.0) * q) ** (1.0 / model.m)
    g = lambda x: model.K(x) - q * x
    hi = 1.0
    for _ in range(_BRACKET_DOUBLINGS):
        if g(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise ConvergenceError(f"no positive root of K(x) = {q:g} x found up to x={hi:g} {context}".strip())
    lo = min(1.0, hi)
    for _ in range(_BRACKET_DOUBLINGS * 6):
        if g(lo) < 0.0:
            break
        lo /= 2.0
    else:
        warnings.warn(f"degenerate start: K(x) >= {q:g} x down to x={lo:g} {context}".strip())
        return 0.0
    root = brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    for _ in range(3):
        resid = model.K(root) - q * root
        slope = model.D(root) - q
        if abs(resid) <= tol * max(1.0, q * root) or slope == 0.0:
            break
        root = max(root - resid / slope, 0.0)
    return root


def terminal_value(model: DiffusivityModel, a_corner: float, b_corner: float,
                   tol: float = 1e-12) -> float:
    """Starting value U_{N-1}: positive root of K(x) = (a_corner * b_corner) x."""
    return _positive_root_of_K_eq_linear(model, a_corner * b_corner, tol, context="(terminal)")


def scheme_rhs(n: int, U: np.ndarray, ek_rows, kernel_row: KernelWeightRow) -> float:
    """Two-stage sum sum_j b_{jn} Fhat_j with Fhat_j = sum_i a_{ij} U_i.

    ek_rows is callable j -> node-coefficient array over i = j..N. Equals the
    direct c_{in} = sum_j a_{ij} b_{jn} assembly up to rounding.
    """
    N = kernel_row.N
    total = 0.0
    for j in range(n, N + 1):
        b = kernel_row.weights[j - n]
        if b == 0.0:
            continue
        row = np.asarray(ek_rows(j), dtype=float)
        total += b * float(np.dot(row, U[j:N + 1]))
    return total


def step_profile(eta_star: float, config: SolverConfig, model: DiffusivityModel,
                 _cache: Optional[_EKRowCache] = None) -> Profile:
    """March U from the front at eta* down to eta = 0 with h = eta*/N."""
    if eta_star <= 0.0:
        raise ValueError(f"eta_star must be positive, got {eta_star}")
    N = config.N
    h = eta_star / N
    A, B, alpha = config.A, config.B, config.alpha
    eff_model = model
    if config.regularization is not None:
        C, delta = config.regularization
        eff_model = regularize(model, h, eta_star, C, delta)
    cache = _cache if _cache is not None else _EKRowCache(config)
    classical = config.rule is Rule.RECTANGLE and alpha == 1.0

    U = np.zeros(N + 1)
    Fhat = np.zeros(N + 1)
    clamps = 0

    if config.rule is Rule.RECTANGLE:
        a_cor = 1.0 if classical else cache.row(N - 1)[0]
        b_cor = kernel_weights_rect(N - 1, N, h, A, B).weights[-1]
        U[N - 1] = terminal_value(eff_model, a_cor, b_cor, config.scalar_tol)
        Fhat[N - 1] = a_cor * U[N - 1]
        for n in range(N - 2, -1, -1):
            bw = kernel_weights_rect(n, N, h, A, B).weights
            rhs = float(np.dot(bw[1:], Fhat[n + 1:]))
            if rhs < 0.0:
                rhs = 0.0
                clamps += 1
            U[n] = eff_model.K_inv(rhs)
            if n >= 1:
                Fhat[n] = U[n + 1] if classical else float(np.dot(cache.row(n), U[n:]))
    else:
        row_last = cache.row(N - 1)
        a_cor = row_last[0]
        b_cor = kernel_weights_trap(N - 1, N, h, A, B).weights[0]
        U[N - 1] = terminal_value(eff_model, a_cor, b_cor, config.scalar_tol)
        Fhat[N - 1] = float(np.dot(row_last, U[N - 1:]))
        for n in range(N - 2, -1, -1):
            bw = kernel_weights_trap(n, N, h, A, B).weights
            row = cache.row(n)
            a_nn = row[0]
            S = float(np.dot(row[1:], U[n + 1:]))
            R = float(np.dot(bw[1:], Fhat[n + 1:])) + bw[0] * S
            q_n = bw[0] * a_nn
            if R < 0.0:
                U[n] = 0.0
                clamps += 1
            elif R == 0.0:
                U[n] = 0.0
            else:
                g = lambda x: eff_model.K(x) - q_n * x - R
                hi = 1.0
                for _ in range(_BRACKET_DOUBLINGS):
                    if g(hi) > 0.0:
                        break
                    hi *= 2.0
                else:
                    raise ConvergenceError(f"scalar solve failed at n={n}: rhs={R:g}, q={q_n:g}")
                U[n] = brentq(g, 0.0, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
            Fhat[n] = a_nn * U[n] + S
    if clamps:
        warnings.warn(f"clamped {clamps} negative right-hand side(s) to zero at N={N}")
    return Profile(Grid(eta_star, N), U, config.rule, eff_model, alpha, clamps)


def shoot_front(M: float, config: SolverConfig, model: DiffusivityModel) -> ShootingOutcome:
    """Find eta* with |U_0(eta*) - M| < tol by bracketing plus secant/bisection.

    The map eta* -> U_0 is increasing, so a sign-change bracket always pins
    the root; secant candidates are accepted only when they fall inside the
    bracket and alternate with plain bisection for a guaranteed contraction.
    """
    if M <= 0.0:
        raise ValueError(f"M must be positive, got {M}")
    adm = check_admissible(model)
    if not adm.admissible:
        raise ShootingError(
            f"model {model.spec_string!r} fails the compact-support admissibility test"
        )
    cache = _EKRowCache(config)
    evaluations = 0

    def f(x: float) -> Tuple[float, Profile]:
        nonlocal evaluations
        evaluations += 1
        prof = step_profile(x, config, model, cache)
        return float(prof.values[0]), prof

    tol = config.shooting_tol
    history: List[Tuple[float, float]] = []

    x = 1.0
    fx, prof = f(x)
    if abs(fx - M) < tol:
        return ShootingOutcome(x, prof, abs(fx - M), evaluations, history)
    if fx < M:
        lo, flo = x, fx
        hi, fhi = x, fx
        for _ in range(_BRACKET_DOUBLINGS):
            lo, flo = hi, fhi
            hi *= 2.0
            fhi, prof = f(hi)
            if abs(fhi - M) < tol:
                return ShootingOutcome(hi, prof, abs(fhi - M), evaluations, history)
            if fhi >= M:
                break
        else:
            raise ShootingError(f"bracket growth failed: U_0({hi:g}) = {fhi:g} < M = {M:g}")
    else:
        hi, fhi = x, fx
        lo, flo = x, fx
        for _ in range(_BRACKET_DOUBLINGS):
            hi, fhi = lo, flo
            lo /= 2.0
            flo, prof = f(lo)
            if abs(flo - M) < tol:
                return ShootingOutcome(lo, prof, abs(flo - M), evaluations, history)
            if flo <= M:
                break
        else:
            raise ShootingError(f"bracket shrink failed: U_0({lo:g}) = {flo:g} > M = {M:g}")

    history.append((lo, hi))
    use_secant = False
    while evaluations < config.max_shooting_iterations:
        mid = None
        if use_secant and fhi > flo:
            cand = lo + (M - flo) * (hi - lo) / (fhi - flo)
            if lo < cand < hi:
                mid = cand
        if mid is None:
            mid = 0.5 * (lo + hi)
        use_secant = not use_secant
        fm, prof = f(mid)
        if abs(fm - M) < tol:
            return ShootingOutcome(mid, prof, abs(fm - M), evaluations, history)
        if fm < M:
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
        history.append((lo, hi))
    raise ShootingError(
        f"no convergence after {evaluations} profile evaluations: bracket "
        f"[{lo:g}, {hi:g}], residual {min(abs(flo - M), abs(fhi - M)):g}, tol {tol:g}"
    )


def apriori_bound(eta_star: float, config: SolverConfig, model: DiffusivityModel) -> float:
    """Upper bound x_lambda on sup U: positive root of K(x) = lambda x
    with lambda = (A + 2B) eta*^2 / Gamma(2 - alpha)."""
    if eta_star <= 0.0:
        raise ValueError(f"eta_star must be positive, got {eta_star}")
    lam = (config.A + 2.0 * config.B) * eta_star * eta_star / math.gamma(2.0 - config.alpha)
    return _positive_root_of_K_eq_linear(model, lam, config.scalar_tol, context="(a-priori bound)")


def reconstruct_pde_solution(profile: Profile, x: float, t: float) -> float:
    """u(x, t) = U(x t^{-alpha/2}) by linear interpolation; zero beyond the front."""
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    if x < 0.0:
        raise ValueError(f"x must be nonnegative, got {x}")
    eta = x * t ** (-profile.alpha / 2.0)
    if eta >= profile.eta_star:
        return 0.0
    return float(np.interp(eta, profile.grid.nodes, profile.values))


def front_position(profile: Profile, t: float) -> float:
    """Physical wetting-front location x_f(t) = eta* t^{alpha/2}."""
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    return profile.eta_star * t ** (profile.alpha / 2.0)
