"""Numerical experiments: discretization-error curves, empirical convergence
orders from front positions, front-error tables against an extrapolated
reference, and the trapezoid/rectangle timing ratio."""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import ek
from .diffusivity import DiffusivityModel
from .ek import EKParams, Rule, analytic_test_pair, optimal_truncation
from .solver import SolverConfig, shoot_front


@dataclass
class ErrorCurve:
    """Max-over-nodes discretization error per grid spacing, with log-log slope."""

    rule: Rule
    alpha: float
    mu: float
    points: List[Tuple[float, float]]
    slope: Optional[float]

    def __post_init__(self):
        hs = [h for h, _ in self.points]
        if any(h2 >= h1 for h1, h2 in zip(hs, hs[1:])):
            raise ValueError("h values must be strictly decreasing")
        if any(e <= 0.0 for _, e in self.points):
            raise ValueError("errors must be positive")


@dataclass
class OrderEstimate:
    """Empirical order from values at N, 2N, 4N."""

    base_N: int
    values: Tuple[float, float, float]
    order: float


def map_cells(fn: Callable, items: Sequence):
    """Run independent experiment cells, in threads when EKPME_THREADS > 1."""
    threads = int(os.environ.get("EKPME_THREADS", "0") or 0)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def rectangle_error_bound(mu: float, alpha: float, h: float) -> float:
    """Theorem bound (max|U| + max|U'|) h / Gamma(2-alpha) for U = min(1, eta^mu)."""
    return (1.0 + mu) * h / math.gamma(2.0 - alpha)


def ek_error_curve(alpha: float, mu: float, h_list: Sequence[float], rule: Rule) -> ErrorCurve:
    """Max error of the truncated EK quadrature on the analytic test pair.

    For each h the nodes eta_n = n h span [0, 1]; each row is truncated at
    N = gamma * n with gamma from the optimal-truncation formula.
    """
    B = alpha / 2.0
    params = EKParams(alpha, rule=rule)
    U, F = analytic_test_pair(mu, alpha)
    build = ek.rectangle_weights if rule is Rule.RECTANGLE else ek.trapezoid_weights
    points = []
    for h in sorted(h_list, reverse=True):
        gamma = optimal_truncation(h, B, rule)
        n_max = round(1.0 / h)
        exact = F(np.arange(1, n_max + 1) * h)
        worst = 0.0
        for n in range(1, n_max + 1):
            N = gamma * n
            row = build(n, N, params)
            samples = U(np.arange(n, N + 1) * h)
            err = abs(row.apply(samples) - exact[n - 1])
            worst = max(worst, err)
        points.append((h, worst))
    slope = None
    if len(points) >= 2:
        hs = np.array([p[0] for p in points])
        es = np.array([p[1] for p in points])
        slope = float(np.polyfit(np.log(hs), np.log(es), 1)[0])
    return ErrorCurve(rule, alpha, mu, points, slope)


def aitken_order(v_n: float, v_2n: float, v_4n: float) -> float:
    """log2 |v_2N - v_N| / |v_4N - v_2N|; raises when the denominator vanishes."""
    d1 = v_2n - v_n
    d2 = v_4n - v_2n
    if d2 == 0.0:
        raise ZeroDivisionError("successive values coincide; order estimate undefined")
    return math.log2(abs(d1 / d2))


def front_orders(alpha: float, model: DiffusivityModel, n_base: int = 300,
                 rule: Rule = Rule.RECTANGLE, M: float = 1.0,
                 shooting_tol: float = 1e-10) -> OrderEstimate:
    """Aitken order of the front position over grids N, 2N, 4N."""
    values = []
    for N in (n_base, 2 * n_base, 4 * n_base):
        config = SolverConfig(alpha=alpha, N=N, rule=rule, shooting_tol=shooting_tol)
        values.append(shoot_front(M, config, model).eta_star)
    return OrderEstimate(n_base, tuple(values), aitken_order(*values))


def richardson_reference(v_coarse: float, v_fine: float, ratio: float = 2.0,
                         order: float = 1.0) -> float:
    """First-order Richardson limit from two grids with spacing ratio > 1."""
    factor = ratio ** order
    return (factor * v_fine - v_coarse) / (factor - 1.0)


def front_error_table(n_list: Sequence[int], alpha: float, model: DiffusivityModel,
                      M: float = 1.0, reference: Union[str, float] = "auto",
                      rule: Rule = Rule.RECTANGLE,
                      shooting_tol: float = 1e-10) -> Tuple[float, List[Tuple[int, float, float]]]:
    """Front positions and absolute errors per N; reference either supplied or
    Richardson-extrapolated from the two finest grids in n_list."""
    n_sorted = sorted(n_list)
    fronts = {}
    for N in n_sorted:
        config = SolverConfig(alpha=alpha, N=N, rule=rule, shooting_tol=shooting_tol)
        fronts[N] = shoot_front(M, config, model).eta_star
    if reference == "auto":
        if len(n_sorted) < 2:
            raise ValueError("auto reference needs at least two grids")
        n1, n2 = n_sorted[-2], n_sorted[-1]
        ref = richardson_reference(fronts[n1], fronts[n2], ratio=n2 / n1)
    else:
        ref = float(reference)
    rows = [(N, fronts[N], abs(fronts[N] - ref)) for N in n_sorted]
    return ref, rows


def time_ratio(alpha: float, model: DiffusivityModel, N: int = 256, M: float = 1.0,
               runs: int = 3) -> float:
    """Wall-clock ratio trapezoid/rectangle for a full front computation.

    Best of `runs` after one discarded warmup run per rule; pinned sequential.
    """
    def best_time(rule: Rule) -> float:
        config = SolverConfig(alpha=alpha, N=N, rule=rule)
        shoot_front(M, config, model)  # warmup, discarded
        best = math.inf
        for _ in range(runs):
            start = time.perf_counter()
            shoot_front(M, config, model)
            best = min(best, time.perf_counter() - start)
        return best

    t_rect = best_time(Rule.RECTANGLE)
    t_trap = best_time(Rule.TRAPEZOID)
    return t_trap / t_rect
