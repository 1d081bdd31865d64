"""Command-line front end.

Subcommands
-----------
simulate   draw a recording from a VAR model file
estimate   estimate TE, IIE or DI between two channels of a CSV recording
infer      test every edge and write the causality graph as DOT and JSON
oracle     exact Gaussian rates or the ground-truth graph of a VAR model

Every option can also come from a JSON file given with ``--config``; keys
are the option names with underscores. Command-line flags win over the
file, unknown keys are rejected and the resolved settings are echoed in
every JSON output.

Exit codes: 0 success, 2 usage or configuration error, 3 invalid model,
4 numerical failure.
"""
import argparse
import json
import sys
from pathlib import Path

from .estimators import EstimationError, EstimatorConfig
from .gaussian_oracle import ModelError, OracleError, VarModel, analytic_rate, simulate_var, true_graph
from .graph import DIRECTED
from .inference import InferenceConfig, infer_graph
from .measures import KINDS, estimate_rate
from .timeseries import DataError, EmbeddingSpec, load_csv, standardize

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MODEL = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    """Bad flags, config values, paths or channel names."""


# Defaults of every option, per subcommand. ``None`` marks "not set".
_SPEC_DEFAULTS = {"lag": None, "target_lag": 3, "source_lag": 3, "cond_lag": 3,
                  "cond_includes_present": True}
_EST_DEFAULTS = {"k": 4, "jitter_scale": 1e-10, "method": "auto"}
_DATA_DEFAULTS = {"data": None, "no_header": False, "trim": 0, "standardize": True}

DEFAULTS = {
    "simulate": {"model": None, "T": None, "seed": 0, "burn_in": 1000, "out": None},
    "estimate": {**_DATA_DEFAULTS, **_SPEC_DEFAULTS, **_EST_DEFAULTS, "kind": "TE",
                 "source": None, "target": None, "cond": [], "seed": 0,
                 "sweep_lags": None},
    "infer": {**_DATA_DEFAULTS, **_SPEC_DEFAULTS, **_EST_DEFAULTS, "seed": 0,
              "n_surrogates": 99, "alpha": 0.05, "correction": "bh", "min_shift": 0.1,
              "out_dot": None, "out_json": None},
    "oracle": {**_SPEC_DEFAULTS, "model": None, "kind": "TE", "source": None,
               "target": None, "cond": [], "sweep_lags": None, "json": False},
}
REQUIRED = {
    "simulate": ("model", "T", "out"),
    "estimate": ("data", "source", "target"),
    "infer": ("data", "out_dot", "out_json"),
    "oracle": ("model",),
}


def _bool_flag(p, name, help_):
    p.add_argument(f"--{name.replace('_', '-')}", dest=name, action="store_true",
                   default=None, help=help_)


def _spec_flags(p):
    p.add_argument("--lag", type=int, help="set target, source and cond lags at once")
    p.add_argument("--target-lag", type=int)
    p.add_argument("--source-lag", type=int)
    p.add_argument("--cond-lag", type=int)
    p.add_argument("--no-cond-present", dest="cond_includes_present", action="store_false",
                   default=None, help="drop the present sample of conditioning channels")


def _est_flags(p):
    p.add_argument("--k", type=int, help="neighbor rank (default 4)")
    p.add_argument("--jitter-scale", type=float)
    p.add_argument("--method", choices=("auto", "tree", "brute"))


def _data_flags(p):
    p.add_argument("--data", help="CSV recording")
    _bool_flag(p, "no_header", "CSV has no header row; channels become x1, x2, ...")
    p.add_argument("--trim", type=int, help="drop this many leading samples")
    p.add_argument("--no-standardize", dest="standardize", action="store_false", default=None)


def _pair_flags(p, kinds):
    p.add_argument("--kind", type=str.upper, choices=kinds)
    p.add_argument("--source")
    p.add_argument("--target")
    p.add_argument("--cond", action="append",
                   help="conditioning channel; repeat or separate with commas")
    p.add_argument("--sweep-lags", metavar="L1..L2",
                   help="report the measure for every uniform lag in L1..L2")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dirinfo", description="Directed information measures and causality graphs.",
        epilog="exit codes: 0 ok, 2 usage/config, 3 invalid model, 4 numerical failure")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a VAR model to CSV")
    p.add_argument("--model", help="model JSON file")
    p.add_argument("--T", type=int, help="number of samples kept")
    p.add_argument("--burn-in", type=int)
    p.add_argument("--out", help="output CSV path")

    p = sub.add_parser("estimate", help="estimate one measure from a CSV recording")
    _data_flags(p)
    _pair_flags(p, KINDS)
    _spec_flags(p)
    _est_flags(p)

    p = sub.add_parser("infer", help="infer the causality graph of a CSV recording")
    _data_flags(p)
    _spec_flags(p)
    _est_flags(p)
    p.add_argument("--n-surrogates", type=int)
    p.add_argument("--alpha", type=float, help="level (Bonferroni) or FDR target (BH)")
    p.add_argument("--correction", choices=("bh", "bonferroni"))
    p.add_argument("--min-shift", type=float)
    p.add_argument("--out-dot")
    p.add_argument("--out-json")

    p = sub.add_parser("oracle", help="exact rates or true graph of a VAR model")
    p.add_argument("--model", help="model JSON file")
    _pair_flags(p, KINDS + ("GRAPH",))
    _spec_flags(p)
    _bool_flag(p, "json", "print a JSON record instead of the bare value")

    for p in sub.choices.values():
        p.add_argument("--config", help="JSON file of option values")
        p.add_argument("--seed", type=int)
    return parser


def _read_config(path, command):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    unknown = sorted(set(cfg) - set(DEFAULTS[command]))
    if unknown:
        raise UsageError(f"unknown config keys for '{command}': {', '.join(unknown)}")
    return cfg


def resolve(args):
    """Merge defaults, the config file and explicit flags, in that order."""
    command = args.command
    settings = dict(DEFAULTS[command])
    if args.config is not None:
        settings.update(_read_config(args.config, command))
    for key in settings:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    cond = settings.get("cond")
    if cond is not None:
        if isinstance(cond, str):
            cond = [cond]
        if not isinstance(cond, list):
            raise UsageError("cond must be a list of channel names")
        settings["cond"] = [c.strip() for item in cond for c in str(item).split(",") if c.strip()]
    if settings.get("lag") is not None:
        for key in ("target_lag", "source_lag", "cond_lag"):
            settings[key] = settings["lag"]
    settings.pop("lag", None)
    if "kind" in settings and isinstance(settings["kind"], str):
        settings["kind"] = settings["kind"].upper()
    missing = [k for k in REQUIRED[command] if settings.get(k) is None]
    if command == "oracle" and settings["kind"] != "GRAPH":
        missing += [k for k in ("source", "target") if settings.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): "
                         + ", ".join("--" + k.replace("_", "-") for k in missing))
    return settings


def parse_sweep(text):
    """``"1..4"`` -> ``[1, 2, 3, 4]``."""
    try:
        lo, hi = (int(v) for v in str(text).split(".."))
    except ValueError:
        raise UsageError(f"--sweep-lags expects L1..L2, got {text!r}") from None
    if not 1 <= lo <= hi:
        raise UsageError(f"--sweep-lags needs 1 <= L1 <= L2, got {text!r}")
    return list(range(lo, hi + 1))


def _typed(settings, key, kind):
    v = settings[key]
    if kind is int and (isinstance(v, bool) or not isinstance(v, int)):
        raise UsageError(f"{key} must be an integer, got {v!r}")
    if kind is float and (isinstance(v, bool) or not isinstance(v, (int, float))):
        raise UsageError(f"{key} must be a number, got {v!r}")
    if kind is bool and not isinstance(v, bool):
        raise UsageError(f"{key} must be true or false, got {v!r}")
    if kind is str and not isinstance(v, str):
        raise UsageError(f"{key} must be a string, got {v!r}")
    return v


def make_spec(s, lag=None):
    try:
        if lag is not None:
            return EmbeddingSpec.uniform(lag, cond_includes_present=_typed(s, "cond_includes_present", bool))
        return EmbeddingSpec(_typed(s, "target_lag", int), _typed(s, "source_lag", int),
                             _typed(s, "cond_lag", int), _typed(s, "cond_includes_present", bool))
    except DataError as exc:
        raise UsageError(str(exc)) from None


def make_estimator(s):
    try:
        return EstimatorConfig(k=_typed(s, "k", int), jitter_scale=float(_typed(s, "jitter_scale", float)),
                               seed=_typed(s, "seed", int), method=_typed(s, "method", str))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_out(path):
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise UsageError(f"output directory does not exist: {parent}")
    return Path(path)


def _load_model(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read model {path}: {exc.strerror}") from None
    return VarModel.from_json(text)


def _load_data(s):
    ts = load_csv(_typed(s, "data", str), has_header=not _typed(s, "no_header", bool))
    trim = _typed(s, "trim", int)
    if trim:
        ts = ts.trim(trim)
    return standardize(ts) if _typed(s, "standardize", bool) else ts


def _channels(names, s, keys=("source", "target")):
    out = []
    for key in keys:
        name = str(s[key])
        if name not in names:
            raise UsageError(f"unknown channel {name!r} (available: {', '.join(names)})")
        out.append(name)
    for name in s["cond"]:
        if name not in names:
            raise UsageError(f"unknown channel {name!r} (available: {', '.join(names)})")
    roles = out + list(s["cond"])
    if len(set(roles)) != len(roles):
        raise UsageError("source, target and conditioning channels must be distinct")
    return out


def _dump(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def cmd_simulate(s, out):
    T = _typed(s, "T", int)
    burn_in = _typed(s, "burn_in", int)
    seed = _typed(s, "seed", int)
    if T < 1 or burn_in < 0 or seed < 0:
        raise UsageError("T must be >= 1, burn_in and seed >= 0")
    target = _check_out(_typed(s, "out", str))
    model = _load_model(s["model"])
    simulate_var(model, T, seed, burn_in=burn_in).to_csv(target)
    return EXIT_OK


def cmd_estimate(s, out):
    kind = _typed(s, "kind", str)
    if kind not in KINDS:
        raise UsageError(f"kind must be one of {KINDS}")
    est = make_estimator(s)
    lags = parse_sweep(s["sweep_lags"]) if s["sweep_lags"] is not None else None
    specs = [make_spec(s, lag) for lag in lags] if lags else [make_spec(s)]
    ts = _load_data(s)
    source, target = _channels(ts.names, s)
    records = [estimate_rate(ts, kind, source, target, s["cond"], spec, est).to_dict()
               for spec in specs]
    body = {"sweep": records} if lags else dict(records[0])
    body["config"] = s
    out.write(_dump(body))
    return EXIT_OK


def summary_table(graph):
    """Fixed-width table of every tested edge."""
    rows = [("kind", "edge", "stat_nats", "p", "edge_present")]
    for (kind, pair), r in sorted(graph.results.items(),
                                   key=lambda kv: (kv[0][0] != DIRECTED,
                                                   graph.nodes.index(kv[0][1][0]),
                                                   graph.nodes.index(kv[0][1][1]))):
        arrow = " -> " if kind == DIRECTED else " -- "
        rows.append((kind, arrow.join(pair), f"{r.statistic:.6f}", f"{r.p_value:.4f}",
                     "yes" if r.reject else "no"))
    widths = [max(len(row[c]) for row in rows) for c in range(len(rows[0]))]
    return "".join("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n"
                   for row in rows)


def cmd_infer(s, out):
    spec = make_spec(s)
    est = make_estimator(s)
    try:
        cfg = InferenceConfig(spec=spec, estimator=est,
                              n_surrogates=_typed(s, "n_surrogates", int),
                              alpha=float(_typed(s, "alpha", float)),
                              correction=_typed(s, "correction", str),
                              seed=_typed(s, "seed", int),
                              min_shift=float(_typed(s, "min_shift", float)),
                              standardize=False)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    dot_path = _check_out(_typed(s, "out_dot", str))
    json_path = _check_out(_typed(s, "out_json", str))
    ts = _load_data(s)
    graph = infer_graph(ts, cfg)
    dot_path.write_text(graph.to_dot(), encoding="utf-8")
    json_path.write_text(graph.to_json(s), encoding="utf-8")
    out.write(summary_table(graph))
    return EXIT_OK


def cmd_oracle(s, out):
    kind = _typed(s, "kind", str)
    model = _load_model(_typed(s, "model", str))
    if kind == "GRAPH":
        out.write(true_graph(model).to_json(s))
        return EXIT_OK
    lags = parse_sweep(s["sweep_lags"]) if s["sweep_lags"] is not None else None
    specs = [make_spec(s, lag) for lag in lags] if lags else [make_spec(s)]
    source, target = _channels(model.names, s)
    records = []
    for spec in specs:
        rec = {"kind": kind, "source": source, "target": target, "cond": list(s["cond"]),
               "spec": spec.to_dict()}
        te = analytic_rate(model, "TE", source, target, s["cond"], spec) if kind != "IIE" else None
        iie = analytic_rate(model, "IIE", source, target, s["cond"], spec) if kind != "TE" else None
        rec["value_nats"] = {"TE": te, "IIE": iie, "DI": None}[kind]
        if kind == "DI":
            rec["value_nats"] = te + iie
        rec["te_nats"], rec["iie_nats"] = te, iie
        records.append(rec)
    if s["json"] or lags:
        body = {"sweep": records} if lags else dict(records[0])
        body["config"] = s
        out.write(_dump(body))
    else:
        rec = records[0]
        out.write(f"{rec['value_nats']!r}\n")
        if kind == "DI":
            out.write(f"te_nats {rec['te_nats']!r}\niie_nats {rec['iie_nats']!r}\n")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "infer": cmd_infer,
            "oracle": cmd_oracle}


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        settings = resolve(args)
        return COMMANDS[args.command](settings, out)
    except (UsageError, DataError) as exc:
        err.write(f"dirinfo {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except ModelError as exc:
        err.write(f"dirinfo {args.command}: invalid model: {exc}\n")
        return EXIT_MODEL
    except (EstimationError, OracleError, ArithmeticError, ValueError) as exc:
        err.write(f"dirinfo {args.command}: numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
