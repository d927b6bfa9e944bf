"""Command-line front end.

    noisy-oracle <experiment> [flags] [--config FILE] [--out PATH] [--format csv|json]
    noisy-oracle --config FILE            # experiment named inside the file

Precedence for every parameter: built-in default < config file < flag.
Exit status: 0 on success, 2 on invalid configuration, 1 on an internal
assertion failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import yaml

from . import __version__, classical, experiments, grover, robust, walk


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class Param:
    name: str
    kind: Callable[[str], Any]
    default: Any
    check: Callable[[Any], bool] | None = None
    rule: str = ""
    help: str = ""
    many: bool = False


def _positive(x):
    return x > 0


SEED = Param("seed", int, 0, lambda x: x >= 0, "must be >= 0", "master seed")
TRIALS = Param("trials", int, 1000, _positive, "must be positive", "number of trials")
GAMMA = Param("gamma", float, 0.1, lambda x: 0 < x < math.pi / 2, "must lie in (0, pi/2)", "distance bound")
DELTA = Param("delta", float, 0.1, lambda x: 0 < x <= 0.2, "must lie in (0, 0.2]", "failure probability")


def _p_half(x):
    return 0 <= x <= 0.5


@dataclass
class Experiment:
    name: str
    help: str
    params: list[Param]
    run: Callable[[dict], "Table"]


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]
    metrics: dict[str, Any] = field(default_factory=dict)
    summary: str = ""


def _freq_metric(freq: experiments.Frequency) -> dict[str, float]:
    return {"value": freq.value, "half_width_3sigma": freq.half_width(), "trials": freq.trials}


def _grover_row(res: grover.GroverResult, seed: int) -> list[Any]:
    inst = res.instance
    return [res.mode, inst.N, inst.r, res.p, res.gamma, res.delta, res.trials, res.success_freq, res.mean_queries, seed]


GROVER_COLUMNS = ["mode", "N", "r", "p", "gamma", "delta", "trials", "success_freq", "mean_queries", "seed"]


# ---------------------------------------------------------------------------
# experiments


def _concentration(c):
    t = c["t"] or robust.compute_t("F", c["gamma"], c["delta"])
    tail = walk.montecarlo_tail(t, c["gamma"], c["trials"], c["seed"])
    freq = experiments.Frequency(round(tail * c["trials"]), c["trials"])
    return Table(
        ["t", "gamma", "trials", "tail", "seed"],
        [[t, c["gamma"], c["trials"], tail, c["seed"]]],
        {"tail": _freq_metric(freq)},
        f"t={t} tail Pr[phi > {c['gamma']}] = {tail:.4g}",
    )


def _chernoff(c):
    rows = []
    for t in c["t"]:
        thr = walk.chernoff_threshold(t, c["delta"])
        tail = walk.chernoff_tail(t, c["delta"], c["trials"], c["seed"])
        rows.append([t, c["delta"], thr, c["trials"], tail, c["seed"]])
    worst = max(r[4] for r in rows)
    return Table(
        ["t", "delta", "threshold", "trials", "tail", "seed"],
        rows,
        {"max_tail": worst},
        f"max tail {worst:.4g} vs delta {c['delta']}",
    )


def _f_check(c):
    if c["mode"] == "walk":
        rows = [[t, walk.circuit_vs_walk_check(t)] for t in range(1, c["t_max"] + 1)]
        worst = max(r[1] for r in rows)
        return Table(["t", "max_discrepancy"], rows, {"max_discrepancy": worst}, f"max |circuit - walk| = {worst:.3g}")
    t = c["t"] or robust.compute_t("F", c["gamma"], c["delta"])
    freq, dist = experiments.f_concentration(t, c["gamma"], c["trials"], c["seed"], c["n"])
    return Table(
        ["level", "n", "t", "gamma", "delta", "trials", "within_gamma_freq", "max_distance", "seed"],
        [["F", c["n"], t, c["gamma"], c["delta"], c["trials"], freq.value, float(dist.max()), c["seed"]]],
        {"within_gamma_freq": _freq_metric(freq)},
        f"F t={t}: ||(F-O_f)|z,0>|| <= {c['gamma']} in {freq.value:.4f} of trials",
    )


def _g_check(c):
    level = "G" if c["m"] == 1 else "multi"
    t = c["t"] or robust.compute_t(level, c["gamma"], c["delta"], c["m"])
    freq, dist = experiments.g_concentration(t, c["gamma"], c["trials"], c["seed"], c["n"], c["m"])
    return Table(
        ["level", "n", "m", "t", "gamma", "delta", "trials", "within_gamma_freq", "max_distance", "seed"],
        [[level, c["n"], c["m"], t, c["gamma"], c["delta"], c["trials"], freq.value, float(dist.max()), c["seed"]]],
        {"within_gamma_freq": _freq_metric(freq)},
        f"{level} t={t}: ||(G-O_f)|phi,0>|| <= {c['gamma']} in {freq.value:.4f} of trials",
    )


def _robust_run(c):
    if c["algo"] != "grover":
        raise ConfigError(f"algo: unsupported algorithm {c['algo']!r}")
    inst = grover.GroverInstance(c["n"], c["k"] % (1 << c["n"]), c["iters"])
    res = grover.run_grover(inst, c["mode"], c["seed"], c["trials"], p=c["p"], gamma=c["gamma"], delta=c["delta"])
    freq = experiments.Frequency(res.successes, res.trials)
    return Table(
        GROVER_COLUMNS,
        [_grover_row(res, c["seed"])],
        {"success_freq": _freq_metric(freq), "exact_probability": grover.grover_success_prob(inst.N, inst.r)},
        f"{c['mode']} Grover N={inst.N} r={inst.r}: success {res.success_freq:.4f}",
    )


def _phase_grover(c):
    inst = grover.GroverInstance(c["n"], c["k"] % (1 << c["n"]), c["iters"])
    res = grover.run_grover(inst, "phase", c["seed"], c["trials"], p=c["p"], r_phase=c["r_phase"])
    freq = experiments.Frequency(res.successes, res.trials)
    return Table(
        GROVER_COLUMNS,
        [_grover_row(res, c["seed"])],
        {"success_freq": _freq_metric(freq), "r_phase": c["r_phase"]},
        f"phase Grover N={inst.N} r={inst.r} r_phase={c['r_phase']}: success {res.success_freq:.4f}",
    )


def _walk_enumerate(c):
    dist = walk.enumerate_distribution(c["t"], c["mode"])
    return Table(
        ["phi_multiple", "probability_numerator", "probability_denominator"],
        [list(r) for r in walk.distribution_rows(dist)],
        {},
        f"t={c['t']}: {len(dist)} distinct phi values",
    )


def _commutator(c):
    rows = []
    for N in c["N"]:
        for r in c["r"]:
            closed, numeric = grover.commutator_norm(N, r)
            rows.append([N, r, closed, numeric, abs(closed - numeric)])
    worst = max(r[4] for r in rows)
    return Table(
        ["N", "r_phase", "closed_form", "numeric", "abs_diff"],
        rows,
        {"max_abs_diff": worst},
        f"{len(rows)} (N, r) pairs, max |closed - numeric| = {worst:.3g}",
    )


def _short_runs(c):
    rows = []
    metrics = {}
    for N in c["N"]:
        results = grover.short_runs_batch(N, c["p"], c["trials"], c["seed"], c["c"])
        freq = experiments.Frequency(sum(r.success for r in results), c["trials"])
        mean_q = sum(r.total_queries for r in results) / c["trials"]
        rows.append([N, c["p"], c["c"], c["trials"], freq.value, mean_q, c["seed"]])
        metrics[f"N={N}"] = _freq_metric(freq)
    return Table(
        ["N", "p", "c", "trials", "success_freq", "mean_queries", "seed"],
        rows,
        metrics,
        "; ".join(f"N={r[0]} success {r[4]:.3f} queries {r[5]:.1f}" for r in rows),
    )


def _classical_or(c):
    if c["T"] > c["n"]:
        raise ConfigError(f"T: must not exceed n={c['n']}")
    emp, bound = classical.noisy_or_lower_experiment(c["n"], c["alpha"], c["T"], c["trials"], c["seed"])
    product = float(classical.all_zero_product(c["n"], c["alpha"], c["T"]))
    exact = float(classical.all_zero_exact(c["n"], c["alpha"], c["T"]))
    freq = experiments.Frequency(round(emp * c["trials"]), c["trials"])
    return Table(
        ["n", "alpha", "T", "trials", "empirical_all_zero", "analytic_bound", "seed"],
        [[c["n"], c["alpha"], c["T"], c["trials"], emp, bound, c["seed"]]],
        {"empirical_all_zero": _freq_metric(freq), "product_formula": product, "exact_probability": exact},
        f"all-zero frequency {emp:.4f}, bound {bound:.4f}, product {product:.4f}",
    )


def _trace_distance(c):
    dist, t = experiments.trace_distance_experiment(c["gamma"], c["delta"], c["trials"], c["seed"], c["n"])
    return Table(
        ["n", "q", "t", "gamma", "delta", "trials", "trace_distance", "bound", "seed"],
        [[c["n"], 1, t, c["gamma"], c["delta"], c["trials"], dist, c["gamma"] + c["delta"], c["seed"]]],
        {"trace_distance": dist},
        f"t={t}: trace distance {dist:.4g} (bound {c['gamma'] + c['delta']:.3g})",
    )


def _ints(text: str) -> list[int]:
    return [int(v) for v in str(text).replace(",", " ").split()]


_N_BITS = Param("n", int, 4, lambda x: 1 <= x <= 12, "must lie in [1, 12]", "index-register width")
_ITERS = Param("iters", int, 3, lambda x: x >= 0, "must be >= 0", "Grover iterations")
_K = Param("k", int, 5, lambda x: x >= 0, "must be >= 0", "marked index (taken mod N)")
_OPT_T = Param("t", int, 0, lambda x: x >= 0, "must be >= 0", "repetition count (0: from the formula)")

EXPERIMENTS: dict[str, Experiment] = {
    e.name: e
    for e in [
        Experiment(
            "concentration",
            "geometric-walk tail Pr[phi > gamma]",
            [SEED, TRIALS, GAMMA, DELTA, _OPT_T],
            _concentration,
        ),
        Experiment(
            "chernoff",
            "empirical tail of |sum X_i| against sqrt(6 t ln(2/delta))",
            [SEED, TRIALS, DELTA, Param("t", _ints, [64, 256, 1024], lambda v: all(x >= 0 for x in v), "entries must be >= 0", "walk lengths", many=True)],
            _chernoff,
        ),
        Experiment(
            "f-check",
            "F circuit against the walk model (mode walk) or its concentration (mode concentration)",
            [
                SEED,
                TRIALS,
                GAMMA,
                DELTA,
                _OPT_T,
                Param("mode", str, "walk", lambda x: x in ("walk", "concentration"), "must be walk or concentration", "check to run"),
                Param("t_max", int, 10, lambda x: 1 <= x <= walk.MAX_ENUM_T, f"must lie in [1, {walk.MAX_ENUM_T}]", "largest t to enumerate"),
                Param("n", int, 3, lambda x: 1 <= x <= 12, "must lie in [1, 12]", "index-register width"),
            ],
            _f_check,
        ),
        Experiment(
            "g-check",
            "G circuit concentration on random real inputs",
            [
                SEED,
                TRIALS,
                GAMMA,
                DELTA,
                _OPT_T,
                Param("n", int, 3, lambda x: 1 <= x <= 10, "must lie in [1, 10]", "index-register width"),
                Param("m", int, 1, lambda x: 1 <= x <= 4, "must lie in [1, 4]", "output width"),
            ],
            _g_check,
        ),
        Experiment(
            "robust-run",
            "Grover search in exact, faulty or robust mode",
            [
                SEED,
                TRIALS,
                GAMMA,
                DELTA,
                _N_BITS,
                _ITERS,
                _K,
                Param("algo", str, "grover", None, "", "algorithm (grover)"),
                Param("mode", str, "robust", lambda x: x in ("exact", "faulty", "robust"), "must be exact, faulty or robust", "oracle regime"),
                Param("p", float, 0.5, _p_half, "must lie in [0, 1/2]", "oracle error rate"),
            ],
            _robust_run,
        ),
        Experiment(
            "phase-grover",
            "Grover search with noisy fractional phase oracles",
            [
                SEED,
                TRIALS,
                _N_BITS,
                _ITERS,
                _K,
                Param("r_phase", int, 4, _positive, "must be positive", "phase denominator r"),
                Param("p", float, 0.5, lambda x: 0 <= x < 1, "must lie in [0, 1)", "oracle error rate"),
            ],
            _phase_grover,
        ),
        Experiment(
            "walk enumerate",
            "exact distribution of the final angle over all fault patterns",
            [
                Param("t", int, 2, lambda x: 1 <= x <= walk.MAX_ENUM_T, f"must lie in [1, {walk.MAX_ENUM_T}]", "walk length"),
                Param("mode", str, "geometric", lambda x: x in ("geometric", "walk", "labeled"), "must be geometric, walk or labeled", "model"),
                SEED,
            ],
            _walk_enumerate,
        ),
        Experiment(
            "commutator",
            "operator norm of [U_eta, O^{k,1/r}] in closed form and numerically",
            [
                Param("N", _ints, list(range(2, 65)), lambda v: all(x >= 2 for x in v), "entries must be >= 2", "search-space sizes", many=True),
                Param("r", _ints, list(range(1, 33)), lambda v: all(x >= 1 for x in v), "entries must be >= 1", "phase denominators", many=True),
                SEED,
            ],
            _commutator,
        ),
        Experiment(
            "short-runs",
            "repeated short faulty Grover runs with one-sided verification",
            [
                SEED,
                TRIALS,
                Param("N", _ints, [64], lambda v: all(x >= 2 and x & (x - 1) == 0 for x in v), "entries must be powers of two >= 2", "search-space sizes", many=True),
                Param("p", float, 0.5, lambda x: 0 < x <= 0.5, "must lie in (0, 1/2]", "oracle error rate"),
                Param("c", float, 8.0, _positive, "must be positive", "repetition constant"),
            ],
            _short_runs,
        ),
        Experiment(
            "classical-or",
            "all-zero probability of T distinct noisy classical queries",
            [
                SEED,
                TRIALS,
                Param("n", int, 64, _positive, "must be positive", "input length"),
                Param("alpha", float, 0.3, lambda x: 0 < x <= 1, "must lie in (0, 1]", "detection probability"),
                Param("T", int, 2, lambda x: x >= 0, "must be >= 0", "number of queries"),
            ],
            _classical_or,
        ),
        Experiment(
            "trace-distance",
            "trace distance between fault-free and robust output densities",
            [SEED, TRIALS, GAMMA, DELTA, Param("n", int, 2, lambda x: 1 <= x <= 4, "must lie in [1, 4]", "index-register width")],
            _trace_distance,
        ),
    ]
}


# ---------------------------------------------------------------------------
# configuration


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a YAML config: top-level ``experiment``, ``seed``, ``out``, ``format``
    and a one-level ``params`` mapping."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"config: parse error{where}: {getattr(exc, 'problem', exc)}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a mapping")
    allowed = {"experiment", "seed", "out", "format", "params"}
    extra = set(data) - allowed
    if extra:
        raise ConfigError(f"config: unknown key(s) {sorted(extra)}")
    params = data.get("params") or {}
    if not isinstance(params, dict) or any(isinstance(v, dict) for v in params.values()):
        raise ConfigError("config: params must be a flat mapping")
    return data


def _coerce(p: Param, raw: Any) -> Any:
    if isinstance(raw, str):
        return p.kind(raw)
    if p.many:
        return [_coerce(Param(p.name, int, None), v) for v in (raw if isinstance(raw, (list, tuple)) else [raw])]
    if isinstance(raw, bool):
        raise ValueError(raw)
    if p.kind is int and isinstance(raw, float):
        if not raw.is_integer():
            raise ValueError(raw)
        return int(raw)
    return p.kind(raw)


def resolve(experiment: Experiment, file_params: dict, flags: dict) -> dict[str, Any]:
    """Merge defaults, file values and flags, then validate each parameter."""
    known = {p.name for p in experiment.params}
    unknown = set(file_params) - known
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: not a parameter of {experiment.name}")
    out = {}
    for p in experiment.params:
        raw = flags.get(p.name)
        if raw is None:
            raw = file_params.get(p.name, p.default)
        try:
            value = _coerce(p, raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{p.name}: cannot parse {raw!r}") from None
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"{p.name}: must be finite")
        if p.check is not None and not p.check(value):
            raise ConfigError(f"{p.name}={value!r} {p.rule}")
        out[p.name] = value
    return out


# ---------------------------------------------------------------------------
# output


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return str(v)


def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return v


def render(name: str, config: dict, seed: int, table: Table, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "experiment": name,
            "version": __version__,
            "seed": seed,
            "config": _jsonable(config),
            "metrics": _jsonable(table.metrics),
            "columns": table.columns,
            "rows": _jsonable(table.rows),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    lines = [
        f"# experiment: {name}",
        f"# version: {__version__}",
        f"# seed: {seed}",
        f"# config: {json.dumps(_jsonable(config), sort_keys=True, separators=(',', ':'))}",
    ]
    for key, val in table.metrics.items():
        lines.append(f"# metric {key}: {json.dumps(_jsonable(val), sort_keys=True, separators=(',', ':'))}")
    lines.append(",".join(table.columns))
    lines.extend(",".join(_cell(v) for v in row) for row in table.rows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser, default: Any = None) -> None:
    p.add_argument("--config", default=default, help="YAML config file")
    p.add_argument("--out", default=default, help="output file (default: stdout)")
    p.add_argument("--format", default=default, choices=("csv", "json"), help="output format (default csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisy-oracle", description="Faulty-oracle robustness experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_common(parser)
    sub = parser.add_subparsers(dest="experiment", metavar="EXPERIMENT")
    for exp in EXPERIMENTS.values():
        if exp.name == "walk enumerate":
            walk_p = sub.add_parser("walk", help="walk-model utilities")
            walk_sub = walk_p.add_subparsers(dest="walk_action", metavar="ACTION", required=True)
            p = walk_sub.add_parser("enumerate", help=exp.help)
        else:
            p = sub.add_parser(exp.name, help=exp.help)
        _add_common(p, argparse.SUPPRESS)
        for param in exp.params:
            p.add_argument(_flag(param.name), dest=param.name, default=None, help=param.help)
    return parser


def _split(argv: list[str]) -> tuple[argparse.Namespace, str | None]:
    ns = build_parser().parse_args(argv)
    name = ns.experiment
    if name == "walk":
        name = "walk enumerate"
    return ns, name


def run_experiment(name: str, params: dict[str, Any]) -> Table:
    return EXPERIMENTS[name].run(params)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ns, name = _split(argv)
    try:
        file_cfg = load_config(ns.config) if ns.config else {}
        name = name or file_cfg.get("experiment")
        if isinstance(name, str) and name == "walk-enumerate":
            name = "walk enumerate"
        if name is None:
            raise ConfigError("experiment: none given on the command line or in the config")
        if name not in EXPERIMENTS:
            raise ConfigError(f"experiment: unknown experiment {name!r}")
        exp = EXPERIMENTS[name]
        file_params = dict(file_cfg.get("params") or {})
        if "seed" in file_cfg:
            file_params.setdefault("seed", file_cfg["seed"])
        flags = {p.name: getattr(ns, p.name, None) for p in exp.params}
        params = resolve(exp, file_params, flags)
        fmt = ns.format or file_cfg.get("format") or "csv"
        if fmt not in ("csv", "json"):
            raise ConfigError(f"format: must be csv or json, got {fmt!r}")
        out = ns.out or file_cfg.get("out")
        if out is not None:
            out_path = Path(out)
            if not out_path.parent.exists() or out_path.is_dir():
                raise ConfigError(f"out: cannot write to {out}")
        start = time.perf_counter()
        table = run_experiment(name, params)
        elapsed = time.perf_counter() - start
        text = render(name, params, params.get("seed", 0), table, fmt)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except (AssertionError, ArithmeticError, RuntimeError) as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    if out is None:
        sys.stdout.write(text)
    else:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            print(f"error: out: cannot write to {out}: {exc.strerror}", file=sys.stderr)
            return 2
    print(f"{name}: {table.summary} [{elapsed:.2f}s]", file=sys.stderr if out is None else sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
