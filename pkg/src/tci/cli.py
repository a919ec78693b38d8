"""Command-line front end: ``tci <subcommand> [flags]``.

Every subcommand accepts the same flag set; unused flags are ignored. Values
come from built-in defaults, then ``--config`` (JSON object or ``key=value``
lines), then explicit flags. The seed additionally falls back to ``TCI_SEED``.

Exit codes: 0 success, 2 configuration error, 3 infeasible target,
4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from . import dividend, presets, reinsurance
from .normal import TargetDist, var_es
from .reinsurance import (ConfigurationError, InfeasibleTarget, ReinsuranceModel, NoConvergence)

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_VALIDATION = 0, 2, 3, 4

FIGURES = ("1", "dominance", "penalisation", "circle", "n3")
COMMANDS = ("dividend-plan", "survival-table", "figures", "mc-validate", "var-es",
            "reinsurance-solve", "penalisation", "three-period")

FLOAT_KEYS = {"lam", "mu", "mu2", "eta", "theta", "T", "x", "xi", "r", "M", "delta", "alpha",
              "mubar", "sigmabar", "se_multiplier"}
INT_KEYS = {"n", "paths", "seed", "samples"}
STR_KEYS = {"format", "out", "figure", "bound_mode", "method"}
LIST_KEYS = {"etas", "penalties"}
ALL_KEYS = FLOAT_KEYS | INT_KEYS | STR_KEYS | LIST_KEYS

_TABLE_DEFAULTS = {**presets.TABLE_BASE, **presets.TABLE_TARGET}
DEFAULTS = {
    "dividend-plan": dict(mubar=1.0, xi=1.0, M=0.5, delta=0.2, x=1.0, T=2.0, n=3, r=0.1),
    "survival-table": dict(_TABLE_DEFAULTS, etas=list(presets.TABLE_ETAS), method="direct"),
    "figures": dict(figure="1"),
    "mc-validate": dict(_TABLE_DEFAULTS, etas=list(presets.TABLE_ETAS), paths=100_000,
                        se_multiplier=3.0),
    "var-es": dict(M=0.0, delta=1.0, T=1.0, alpha=0.975),
    "reinsurance-solve": dict(_TABLE_DEFAULTS, eta=0.25, bound_mode="lemma-full"),
    "penalisation": dict(presets.PENALISATION_BASE, delta=presets.PENALISATION_DELTA,
                         penalties=list(presets.PENALISATION_GRID)),
    "three-period": dict(presets.CIRCLE_BASE, **presets.CIRCLE_TARGET, samples=36,
                         method="quadrature", paths=100_000),
}
FIGURE_DEFAULTS = {
    "1": dict(presets.CONTROL_BASE, **presets.CONTROL_TARGET, samples=101),
    "dominance": dict(presets.CROSSING_BASE, **presets.CROSSING_TARGET, samples=201),
    "penalisation": DEFAULTS["penalisation"],
    "circle": dict(presets.CIRCLE_BASE, **presets.CIRCLE_TARGET, samples=360),
    "n3": dict(presets.CIRCLE_BASE, **presets.CIRCLE_TARGET, samples=72),
}


class ConfigError(ValueError):
    pass


class ValidationFailed(RuntimeError):
    def __init__(self, message, payload):
        super().__init__(message)
        self.payload = payload


# --------------------------------------------------------------------------- #
# configuration
# --------------------------------------------------------------------------- #

def _normalise_key(key: str) -> str:
    key = key.strip().lstrip("-").replace("-", "_")
    return "lam" if key == "lambda" else key


def _coerce(key, value):
    try:
        if key in FLOAT_KEYS:
            return float(value)
        if key in INT_KEYS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if key in LIST_KEYS:
            if isinstance(value, str):
                return [float(v) for v in value.split(",") if v.strip()]
            return [float(v) for v in value]
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {value!r}") from None


def load_config(path: str) -> dict:
    """Read a flat JSON object or ``key=value`` lines (``#`` starts a comment)."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path}: {exc}") from None
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config {path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            raw[k] = v.strip()
    out = {}
    for k, v in raw.items():
        key = _normalise_key(k)
        if key not in ALL_KEYS or key == "config":
            raise ConfigError(f"unknown config key {k!r}")
        out[key] = _coerce(key, v)
    return out


def _positive_int_env(name):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError(f"{name}={raw!r} is not an integer") from None
    if seed < 0:
        raise ConfigError(f"{name} must be non-negative")
    return seed


def resolve(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    file_cfg = load_config(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if k in ALL_KEYS and v is not None}
    if command == "figures":
        fig = flags.get("figure", file_cfg.get("figure", cfg["figure"]))
        if fig not in FIGURES:
            raise ConfigError(f"unknown figure id {fig!r}; choose from {', '.join(FIGURES)}")
        cfg.update(FIGURE_DEFAULTS[fig])
    cfg.setdefault("seed", 0)
    env_seed = _positive_int_env("TCI_SEED")
    if env_seed is not None:
        cfg["seed"] = env_seed
    cfg.update(file_cfg)
    cfg.update(flags)
    cfg.setdefault("format", "csv")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"unknown format {cfg['format']!r}")
    return cfg


# --------------------------------------------------------------------------- #
# helpers
# --------------------------------------------------------------------------- #

def _require(cfg, *keys):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError("missing parameter(s): " + ", ".join(missing))
    return [cfg[k] for k in keys]


def _model(cfg, eta=None) -> ReinsuranceModel:
    lam, mu, mu2, theta, T = _require(cfg, "lam", "mu", "mu2", "theta", "T")
    eta = cfg.get("eta") if eta is None else eta
    if eta is None:
        raise ConfigError("missing parameter: eta")
    try:
        return ReinsuranceModel(lam, mu, mu2, eta, theta, T)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _target(cfg) -> TargetDist:
    M, delta, T = _require(cfg, "M", "delta", "T")
    try:
        return TargetDist(M, delta, T)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _clean(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else format(v, ".6g")
    return str(v)


def render(command: str, columns, rows, meta, cfg) -> str:
    if cfg["format"] == "json":
        params = {k: cfg[k] for k in sorted(cfg) if k not in ("format", "out", "config")}
        doc = {
            "command": command,
            "parameters": _clean(params),
            "meta": _clean(meta),
            "columns": list(columns),
            "rows": [_clean(dict(zip(columns, r))) for r in rows],
        }
        return json.dumps(doc, indent=2, allow_nan=False, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(_clean(v)) for v in r])
    return buf.getvalue()


def schema_for(command: str) -> dict:
    text = resources.files("tci").joinpath("schemas", f"{command}.json").read_text(encoding="utf-8")
    return json.loads(text)


# --------------------------------------------------------------------------- #
# commands; each returns (columns, rows, meta, exit_code)
# --------------------------------------------------------------------------- #

def cmd_dividend_plan(cfg):
    mubar, xi, M, delta, x, T, n, r = _require(cfg, "mubar", "xi", "M", "delta", "x", "T", "n", "r")
    sigmabar = cfg.get("sigmabar", delta)
    try:
        problem = dividend.DividendProblem(mubar, sigmabar, xi, x, T, n, r, TargetDist(M, delta, T))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    verdict = dividend.check_target(problem)
    if not verdict:
        raise ConfigError("inadmissible target: " + "; ".join(verdict.violations))
    k = dividend.kappa(problem)
    t_star = dividend.continuous_switch_time(problem)
    columns = ["objective", "value", "kappa", "t_star"] + [f"c{i}" for i in range(n)]
    rows = []
    for name, strat in (("max-dividend", dividend.max_dividend_strategy(problem)),
                        ("min-ruin", dividend.min_ruin_strategy(problem))):
        rows.append([name, dividend.value(strat, problem), k, t_star, *strat.rates])
    return columns, rows, {"admissible": True, "violations": []}, EXIT_OK


def _pair_survival(model, target, method):
    pair = reinsurance.solve_pair(model, target)
    p01 = reinsurance.survival_prob(model, target, pair.as_tuple(), method=method)
    p10 = reinsurance.survival_prob(model, target, pair.reversed(), method=method)
    return pair, p01.value, p10.value


def cmd_survival_table(cfg):
    target = _target(cfg)
    method = cfg.get("method", "direct")
    if method not in ("direct", "paper-decomposition"):
        raise ConfigError(f"survival-table method must be direct or paper-decomposition, got {method!r}")
    columns = ["eta", "b0", "b1", "p_b0_b1", "p_b1_b0", "status"]
    rows = []
    for eta in cfg["etas"]:
        model = _model(cfg, eta=eta)
        try:
            pair, p01, p10 = _pair_survival(model, target, method)
            rows.append([eta, pair.b0, pair.b1, p01, p10, "ok"])
        except InfeasibleTarget as exc:
            rows.append([eta, math.nan, math.nan, math.nan, math.nan, f"infeasible: {exc}"])
    code = EXIT_OK
    if rows and all(r[-1] != "ok" for r in rows):
        code = EXIT_INFEASIBLE
    return columns, rows, {"method": method}, code


def _figure_control(cfg):
    model, target = _model(cfg), _target(cfg)
    g1, g2 = reinsurance.hyperbolic_control_targets(model, target)
    sol = reinsurance.deterministic_control_solve(g1, g2, model.T)
    t = np.linspace(0.0, model.T, int(cfg["samples"]))
    b = reinsurance.hyperbolic_strategy(sol.A, sol.C, t)
    meta = {"A": sol.A, "C": sol.C, "g1": g1, "g2": g2, "residuals": list(sol.residuals),
            "solver": sol.method}
    return ["t", "b"], list(zip(t, b)), meta


def _figure_dominance(cfg):
    model, target = _model(cfg), _target(cfg)
    pair = reinsurance.solve_pair(model, target)
    dec = reinsurance.survival_decomposition(model, target, pair)
    top = target.mean + 4.0 * target.std
    y = np.linspace(0.0, max(top, 1e-9), int(cfg["samples"]))
    g0, g1 = reinsurance.g_integrands(model, target, pair, y)
    meta = {"b0": pair.b0, "b1": pair.b1, "rho": dec.rho, "ez0": dec.ez0, "ystar": dec.ystar}
    return ["y", "G0", "G1"], list(zip(y, g0, g1)), meta


def _figure_penalisation(cfg):
    model = _model(cfg)
    delta = _require(cfg, "delta")[0]
    try:
        rows = reinsurance.penalisation_curve(model, delta, cfg["penalties"])
        b_hat, m_prime = reinsurance.constant_strategy(model, delta)
    except ConfigurationError as exc:
        raise ConfigError(str(exc)) from None
    columns = ["P", "b0", "b1", "p_constant", "p_b0_b1", "p_b1_b0"]
    return columns, rows, {"b_hat": b_hat, "M_prime": m_prime}


def _circle(cfg):
    model, target = _model(cfg), _target(cfg)
    return model, target, reinsurance.three_period_circle(model, target, int(cfg["samples"]))


def _figure_circle(cfg):
    _, _, triples = _circle(cfg)
    return ["b0", "b1", "b2"], [t.as_tuple() for t in triples], {}


def _figure_n3(cfg):
    model, target, triples = _circle(cfg)
    method = cfg.get("method", "quadrature")
    rows = []
    for i, t in enumerate(triples):
        rep = reinsurance.three_period_survival(model, target, t, method=method,
                                                paths=int(cfg.get("paths", 100_000)),
                                                seed=int(cfg["seed"]) + i)
        rows.append([*t.as_tuple(), rep.value, rep.error_estimate, rep.method])
    best = max(rows, key=lambda r: r[3])
    meta = {"best_triple": best[:3], "best_survival": best[3],
            "largest_b0": max(t.b0 for t in triples)}
    return ["b0", "b1", "b2", "survival", "error_estimate", "method"], rows, meta


def cmd_figures(cfg):
    builders = {"1": _figure_control, "dominance": _figure_dominance,
                "penalisation": _figure_penalisation, "circle": _figure_circle, "n3": _figure_n3}
    columns, rows, meta = builders[cfg["figure"]](cfg)
    return columns, rows, {"figure": cfg["figure"], **meta}, EXIT_OK


def cmd_mc_validate(cfg):
    paths = int(cfg["paths"])
    if paths < 10_000:
        raise ConfigError("mc-validate needs at least 10000 paths")
    mult = float(cfg["se_multiplier"])
    if mult < 0:
        raise ConfigError("se-multiplier must be non-negative")
    target = _target(cfg)
    seed = int(cfg["seed"])
    columns = ["scenario", "order", "p_quadrature", "p_mc", "std_err", "z_score", "ok"]
    rows = []
    for i, eta in enumerate(cfg["etas"]):
        model = _model(cfg, eta=eta)
        try:
            pair = reinsurance.solve_pair(model, target)
        except InfeasibleTarget:
            continue
        for j, (label, order) in enumerate((("b0,b1", pair.as_tuple()), ("b1,b0", pair.reversed()))):
            q = reinsurance.survival_prob(model, target, order).value
            mc = reinsurance.survival_prob(model, target, order, method="mc", paths=paths,
                                           seed=seed + 2 * i + j)
            se = mc.error_estimate
            diff = abs(q - mc.value)
            z = diff / se if se > 0 else (0.0 if diff == 0 else math.inf)
            rows.append([f"eta={eta:g}", label, q, mc.value, se, z, diff <= mult * se])
    meta = {"paths": paths, "se_multiplier": mult, "all_ok": all(r[-1] for r in rows)}
    if not rows:
        return columns, rows, meta, EXIT_INFEASIBLE
    return columns, rows, meta, EXIT_OK if meta["all_ok"] else EXIT_VALIDATION


def cmd_var_es(cfg):
    target = _target(cfg)
    alpha = cfg["alpha"]
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    rm = var_es(target, alpha)
    return ["alpha", "var", "es"], [[rm.alpha, rm.var, rm.es]], {}, EXIT_OK


def cmd_reinsurance_solve(cfg):
    model, target = _model(cfg), _target(cfg)
    mode = cfg.get("bound_mode", "lemma-full")
    if mode not in reinsurance.BOUND_MODES:
        raise ConfigError(f"unknown bound mode {mode!r}")
    bounds = reinsurance.feasibility_bounds(model, target.M, mode=mode)
    pair, p01, p10 = _pair_survival(model, target, "direct")
    dec = reinsurance.survival_decomposition(model, target, pair)
    columns = ["b0", "b1", "rho", "gamma", "ez0", "varz0", "ystar", "delta_min", "delta_max",
               "bounds_ok", "p_b0_b1", "p_b1_b0", "cheap"]
    row = [pair.b0, pair.b1, dec.rho, dec.gamma, dec.ez0, dec.varz0, dec.ystar,
           bounds.delta_min, bounds.delta_max, bounds.ok, p01, p10,
           reinsurance.cheapness_condition(model, target)]
    return columns, [row], {"bound_mode": mode, "bound_reasons": bounds.reasons}, EXIT_OK


def cmd_penalisation(cfg):
    columns, rows, meta = _figure_penalisation(cfg)
    return columns, rows, meta, EXIT_OK


def cmd_three_period(cfg):
    method = cfg.get("method", "quadrature")
    if method not in ("quadrature", "mc"):
        raise ConfigError(f"three-period method must be quadrature or mc, got {method!r}")
    columns, rows, meta = _figure_n3(cfg)
    return columns, rows, meta, EXIT_OK


HANDLERS = {
    "dividend-plan": cmd_dividend_plan,
    "survival-table": cmd_survival_table,
    "figures": cmd_figures,
    "mc-validate": cmd_mc_validate,
    "var-es": cmd_var_es,
    "reinsurance-solve": cmd_reinsurance_solve,
    "penalisation": cmd_penalisation,
    "three-period": cmd_three_period,
}


# --------------------------------------------------------------------------- #
# argument parsing
# --------------------------------------------------------------------------- #

def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model")
    g.add_argument("--lambda", dest="lam", type=float, help="claim intensity")
    g.add_argument("--mu", type=float, help="mean claim size")
    g.add_argument("--mu2", type=float, help="second moment of claim size")
    g.add_argument("--eta", type=float, help="insurer safety loading")
    g.add_argument("--theta", type=float, help="reinsurer safety loading")
    g.add_argument("--T", type=float, help="horizon")
    g.add_argument("--x", type=float, help="initial capital (dividend problems)")
    g.add_argument("--xi", type=float, help="maximal dividend rate")
    g.add_argument("--n", type=int, help="number of dividend periods")
    g.add_argument("--r", type=float, help="discount rate")
    g.add_argument("--mubar", type=float, help="surplus drift before dividends")
    g.add_argument("--sigmabar", type=float, help="surplus volatility (defaults to --delta)")
    g = p.add_argument_group("target")
    g.add_argument("--M", type=float, help="target mean rate")
    g.add_argument("--delta", type=float, help="target volatility")
    g.add_argument("--alpha", type=float, help="VaR/ES confidence level")
    g = p.add_argument_group("run")
    g.add_argument("--paths", type=int, help="Monte Carlo paths")
    g.add_argument("--seed", type=int, help="RNG seed (default: $TCI_SEED or 0)")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--out", help="write output here instead of stdout")
    g.add_argument("--config", help="JSON object or key=value file")
    g.add_argument("--figure", help="figure id: " + ", ".join(FIGURES))
    g.add_argument("--bound-mode", dest="bound_mode", choices=reinsurance.BOUND_MODES)
    g.add_argument("--etas", help="comma-separated eta sweep")
    g.add_argument("--penalties", help="comma-separated penalty rates")
    g.add_argument("--samples", type=int, help="grid / circle sample count")
    g.add_argument("--method", help="survival method")
    g.add_argument("--se-multiplier", dest="se_multiplier", type=float,
                   help="mc-validate acceptance band in standard errors")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tci", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    helps = {
        "dividend-plan": "optimal dividend-rate vectors, value, kappa and switch time",
        "survival-table": "retention pairs and two-date survival over an eta sweep",
        "figures": "datasets for the strategy/density/penalty/circle plots",
        "mc-validate": "quadrature vs Monte Carlo agreement report",
        "var-es": "Gaussian VaR and expected shortfall of the terminal loss",
        "reinsurance-solve": "retention pair, decomposition and bounds for one target",
        "penalisation": "constant vs switching retentions under a mid-horizon penalty",
        "three-period": "three-period admissible triples and their survival",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        for key in LIST_KEYS:
            if getattr(args, key) is not None:
                setattr(args, key, _coerce(key, getattr(args, key)))
        cfg = resolve(args.command, args)
        columns, rows, meta, code = HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleTarget, dividend.InadmissibleTarget) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigurationError, NoConvergence) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text = render(args.command, columns, rows, meta, cfg)
    if cfg.get("out"):
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_VALIDATION:
        print("validation failed: Monte Carlo disagrees with quadrature", file=sys.stderr)
    elif code == EXIT_INFEASIBLE:
        print("infeasible: no scenario could be solved", file=sys.stderr)
    return code
