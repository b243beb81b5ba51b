"""Command-line front end: solve / ek-error / order / front / bench.

Flag precedence is command line > ekpme.conf in the working directory >
built-in defaults. The config file holds plain ``key = value`` lines with
``#`` comments; keys are the long flag names without the dashes.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

import argparse
import os
import re
import sys
from typing import Dict, List, Optional

from . import analysis
from .diffusivity import parse_model
from .ek import Rule
from .errors import ConvergenceError, ModelSpecError, ShootingError
from .solver import SolverConfig, shoot_front

CONFIG_FILENAME = "ekpme.conf"


class CliError(Exception):
    """Invalid input; message names the offending flag."""


def _read_config(path: str = CONFIG_FILENAME) -> Dict[str, str]:
    conf: Dict[str, str] = {}
    if not os.path.exists(path):
        return conf
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = line.split("=", 1)
            conf[key.strip()] = value.strip()
    return conf


class _Resolver:
    """Merge parsed flags (None = not given) with config-file values and defaults."""

    def __init__(self, args: argparse.Namespace, conf: Dict[str, str]):
        self.args = vars(args)
        self.conf = conf

    def get(self, key: str, default, cast):
        cli_val = self.args.get(key.replace("-", "_"))
        if cli_val is not None:
            raw = cli_val
        elif key in self.conf:
            raw = self.conf[key]
        else:
            return default
        try:
            return cast(raw) if isinstance(raw, str) else raw
        except (TypeError, ValueError) as exc:
            raise CliError(f"--{key}: {exc}") from None


def _cast_float(text: str) -> float:
    return float(text)


def _cast_int(text: str) -> int:
    return int(text)


def _cast_float_list(text: str) -> List[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _cast_int_list(text: str) -> List[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _parse_h_spec(text: str) -> List[float]:
    """Either '2^-4..2^-9' (dyadic range) or a comma-separated float list."""
    match = re.fullmatch(r"2\^-(\d+)\.\.2\^-(\d+)", text.strip())
    if match:
        lo, hi = int(match.group(1)), int(match.group(2))
        if hi < lo:
            lo, hi = hi, lo
        return [2.0 ** -k for k in range(lo, hi + 1)]
    values = _cast_float_list(text)
    if not values or any(not (0.0 < v < 1.0) for v in values):
        raise ValueError(f"expected '2^-a..2^-b' or floats in (0,1), got {text!r}")
    return sorted(values, reverse=True)


def _validate_alpha(alpha: float, rule: Rule) -> None:
    if not (0.0 < alpha <= 1.0):
        raise CliError("--alpha: alpha must lie in (0,1]")
    if rule is Rule.TRAPEZOID and alpha >= 1.0:
        raise CliError("--rule trap requires alpha < 1")


def _parse_rule(text: str) -> Rule:
    try:
        return Rule.parse(text)
    except ValueError as exc:
        raise CliError(f"--rule: {exc}") from None


def _model_from_spec(spec: str):
    try:
        return parse_model(spec)
    except ModelSpecError as exc:
        raise CliError(f"--diff: {exc}") from None


def _parse_regularize(text: str):
    match = re.fullmatch(r"C=([^,]+),delta=(.+)", text.strip())
    if not match:
        raise CliError(f"--regularize: expected 'C=<float>,delta=<float>', got {text!r}")
    try:
        C, delta = float(match.group(1)), float(match.group(2))
    except ValueError:
        raise CliError(f"--regularize: non-numeric value in {text!r}") from None
    if C <= 0.0 or not (0.0 < delta < 1.0):
        raise CliError("--regularize: requires C > 0 and delta in (0,1)")
    return (C, delta)


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def _sanitize(spec: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", spec).strip("_")


def cmd_solve(res: _Resolver) -> int:
    rule = _parse_rule(res.get("rule", "rect", str))
    alpha = res.get("alpha", 0.5, _cast_float)
    _validate_alpha(alpha, rule)
    model = _model_from_spec(res.get("diff", "power:m=2", str))
    mass = res.get("mass", 1.0, _cast_float)
    if mass <= 0.0:
        raise CliError("--mass: must be positive")
    n = res.get("n", 256, _cast_int)
    eps = res.get("eps", 1e-8, _cast_float)
    out = res.get("out", "profile.csv", str)
    A = res.get("A", None, _cast_float)
    B = res.get("B", None, _cast_float)
    reg_text = res.get("regularize", None, str)
    regularization = _parse_regularize(reg_text) if reg_text is not None else None
    try:
        config = SolverConfig(alpha=alpha, N=n, rule=rule, A=A, B=B, shooting_tol=eps,
                              regularization=regularization)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    outcome = shoot_front(mass, config, model)
    outcome.profile.write_csv(out)
    sys.stdout.write(outcome.summary_csv())
    return 0


def cmd_ek_error(res: _Resolver) -> int:
    alpha = res.get("alpha", 0.5, _cast_float)
    if not (0.0 < alpha < 1.0):
        raise CliError("--alpha: alpha must lie in (0,1) for the analytic test pair")
    mu = res.get("mu", 2.0, _cast_float)
    try:
        h_list = res.get("h", [2.0 ** -k for k in range(4, 10)], _parse_h_spec)
    except ValueError as exc:
        raise CliError(f"--h: {exc}") from None
    rule_text = res.get("rule", "both", str)
    if rule_text not in ("both", "rect", "trap"):
        raise CliError(f"--rule: expected both|rect|trap, got {rule_text!r}")
    rules = [Rule.RECTANGLE, Rule.TRAPEZOID] if rule_text == "both" else [Rule.parse(rule_text)]
    prefix = res.get("out", "ek_error", str)
    summary_rows = []
    for rule in rules:
        curve = analysis.ek_error_curve(alpha, mu, h_list, rule)
        path = f"{prefix}_{rule.value}.csv"
        with open(path, "w") as fh:
            fh.write("h,error\n")
            for h, err in curve.points:
                fh.write(f"{_fmt(h)},{_fmt(err)}\n")
        slope_text = "NA" if curve.slope is None else _fmt(curve.slope)
        summary_rows.append((rule.value, slope_text))
        print(f"{rule.value}: wrote {path}, slope {slope_text}")
    with open(f"{prefix}_summary.csv", "w") as fh:
        fh.write("rule,slope\n")
        for name, slope in summary_rows:
            fh.write(f"{name},{slope}\n")
    return 0


def cmd_order(res: _Resolver) -> int:
    alphas = res.get("alpha-list", [0.1, 0.25, 0.5, 0.75, 0.9], _cast_float_list)
    rule = _parse_rule(res.get("rule", "rect", str))
    for alpha in alphas:
        _validate_alpha(alpha, rule)
        if rule is Rule.RECTANGLE and alpha == 1.0:
            raise CliError("--alpha-list: order estimation needs alpha < 1 or more grids")
    n_base = res.get("n-base", 300, _cast_int)
    if n_base < 4:
        raise CliError("--n-base: must be >= 4")
    mass = res.get("mass", 1.0, _cast_float)
    specs = [s for s in res.get("diff", "power:m=1,exp", str).split(",") if s]
    models = [_model_from_spec(s) for s in specs]
    out = res.get("out", "orders.csv", str)
    for spec, model in zip(specs, models):
        estimates = analysis.map_cells(
            lambda a: analysis.front_orders(a, model, n_base, rule, mass), alphas)
        path = out if len(models) == 1 else (
            f"{os.path.splitext(out)[0]}_{_sanitize(spec)}{os.path.splitext(out)[1] or '.csv'}")
        with open(path, "w") as fh:
            fh.write("alpha,order\n")
            for alpha, est in zip(alphas, estimates):
                fh.write(f"{_fmt(alpha)},{_fmt(est.order)}\n")
        print(f"{spec}: wrote {path}")
    return 0


def cmd_front(res: _Resolver) -> int:
    rule = _parse_rule(res.get("rule", "rect", str))
    alpha = res.get("alpha", 1.0, _cast_float)
    _validate_alpha(alpha, rule)
    model = _model_from_spec(res.get("diff", "power:m=1", str))
    mass = res.get("mass", 1.0, _cast_float)
    n_list = res.get("n-list", [10, 50, 100, 200, 500, 1000], _cast_int_list)
    if len(n_list) < 1:
        raise CliError("--n-list: needs at least one grid size")
    ref_text = res.get("ref", "auto", str)
    if ref_text != "auto":
        try:
            reference = float(ref_text)
        except ValueError:
            raise CliError(f"--ref: expected 'auto' or a float, got {ref_text!r}") from None
    else:
        reference = "auto"
        if len(n_list) < 2:
            raise CliError("--ref auto needs at least two grid sizes")
    out = res.get("out", "front.csv", str)
    ref, rows = analysis.front_error_table(n_list, alpha, model, mass, reference, rule)
    with open(out, "w") as fh:
        fh.write("N,eta_star,error\n")
        for N, eta, err in rows:
            fh.write(f"{N},{_fmt(eta)},{_fmt(err)}\n")
    print(f"reference eta* = {_fmt(ref)}; wrote {out}")
    return 0


def cmd_bench(res: _Resolver) -> int:
    alphas = res.get("alpha-list", [0.1, 0.5, 0.9], _cast_float_list)
    for alpha in alphas:
        if not (0.0 < alpha < 1.0):
            raise CliError("--alpha-list: bench requires alpha in (0,1) (both rules must run)")
    n = res.get("n", 256, _cast_int)
    mass = res.get("mass", 1.0, _cast_float)
    model = _model_from_spec(res.get("diff", "power:m=2", str))
    out = res.get("out", "bench.csv", str)
    with open(out, "w") as fh:
        fh.write("alpha,tau\n")
        for alpha in alphas:  # timing cells stay sequential
            tau = analysis.time_ratio(alpha, model, n, mass)
            fh.write(f"{_fmt(alpha)},{_fmt(tau)}\n")
            print(f"alpha={alpha:g}: tau={tau:.2f}")
    print(f"wrote {out}")
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "ek-error": cmd_ek_error,
    "order": cmd_order,
    "front": cmd_front,
    "bench": cmd_bench,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's default 2
        raise CliError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ekpme",
                     description="Self-similar wetting fronts of the time-fractional "
                                 "porous medium equation")
    sub = parser.add_subparsers(dest="command")

    solve = sub.add_parser("solve", help="shoot the wetting front and write the profile CSV")
    for flag in ("--alpha", "--mass", "--eps", "--A", "--B"):
        solve.add_argument(flag, type=str)
    solve.add_argument("--diff", type=str)
    solve.add_argument("--n", type=str)
    solve.add_argument("--rule", type=str)
    solve.add_argument("--out", type=str)
    solve.add_argument("--regularize", type=str)

    ek_err = sub.add_parser("ek-error", help="discretization-error curve of the EK quadrature")
    for flag in ("--alpha", "--mu", "--h", "--rule", "--out"):
        ek_err.add_argument(flag, type=str)

    order = sub.add_parser("order", help="empirical convergence orders of the front position")
    for flag in ("--alpha-list", "--diff", "--n-base", "--rule", "--mass", "--out"):
        order.add_argument(flag, type=str)

    front = sub.add_parser("front", help="front-position error table against a reference")
    for flag in ("--alpha", "--diff", "--mass", "--n-list", "--ref", "--rule", "--out"):
        front.add_argument(flag, type=str)

    bench = sub.add_parser("bench", help="trapezoid/rectangle timing ratio")
    for flag in ("--alpha-list", "--diff", "--mass", "--out"):
        bench.add_argument(flag, type=str)
    bench.add_argument("--n", type=str)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help()
            return 1
        conf = _read_config()
        return _COMMANDS[args.command](_Resolver(args, conf))
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ShootingError, ConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
