"""Command-line front end: generate, simulate, estimate, decide, compare, and
the end-to-end Monte-Carlo experiment.

Every run is driven by a JSON config merged over the benchmark defaults, and
every output file carries the config hash and seed, so identical invocations
produce identical trees (byte for byte, except run_info.json which records
wall-clock time).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from .errors import LrdnError
from .model import (
    GeneratorConfig,
    LrdnModel,
    model_hash,
    random_model,
    true_graph,
    validate,
)
from .model import DirectedGraph
from .sim import read_csv, simulate, write_csv
from .topology import (
    apply_partition,
    compare_graphs,
    decide_graph,
    edge_test_table,
    partition_select,
    support_graph,
    write_edge_tests_csv,
)
from .wiener import estimate_h, estimate_s, exact_filters


class ConfigError(Exception):
    """Bad or missing configuration; maps to exit code 1."""


def default_experiment_config() -> dict:
    """Benchmark defaults: 12 channels, 4 innovations, 25 edges, 200 samples."""
    return {
        "generator": {
            "m": 8,
            "l": 4,
            "degree_ml": 2,
            "degree_l": 2,
            "support_ml": 18,
            "support_l": 7,
            "coeff_min": 0.5,
            "coeff_max": 0.9,
            "max_rejections": 500,
            "rng_seed": 0,
            "lag0_offdiag": False,
            "pure_noise": [4],
            "sigma_l": None,
        },
        "sim": {"num_samples": 200, "burn_in": 500},
        "estimation": {"order_p": 2, "ridge": 0.0},
        "decision": {"alpha": 0.01, "correction": "bonferroni", "zero_tol": 1e-9},
        "partition": {"max_lag": 8, "rank_tol": 1e-4},
        "trials": 20,
        "master_seed": 1,
        "fixed_model": False,
        "outputs": "out",
    }


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path: str | None) -> dict:
    cfg = default_experiment_config()
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        cfg = _merge(cfg, user)
    if not isinstance(cfg.get("trials"), int) or cfg["trials"] < 1:
        raise ConfigError("trials must be a positive integer")
    if cfg["decision"].get("correction") not in ("none", "bonferroni"):
        raise ConfigError("decision.correction must be 'none' or 'bonferroni'")
    return cfg


def config_hash(cfg: dict) -> str:
    """Hash of the semantic config; the output location does not affect results."""
    semantic = {k: v for k, v in cfg.items() if k != "outputs"}
    return hashlib.sha256(json.dumps(semantic, sort_keys=True).encode()).hexdigest()[:12]


def derive_seed(master_seed: int, *indices: int) -> int:
    """Per-trial seed: first 64 bits of SeedSequence([master_seed, *indices]).

    A pure function of its arguments, so parallel and serial trial schedules
    see identical streams.
    """
    state = np.random.SeedSequence([int(master_seed), *map(int, indices)]).generate_state(2)
    return int(state[0]) | (int(state[1]) << 32)


# -- output helpers ------------------------------------------------------


def _write_json(path: Path, payload: dict, cfg_hash: str, seed: int) -> None:
    doc = {"meta": {"config_hash": cfg_hash, "seed": seed}}
    doc.update(payload)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _write_graph(out_dir: Path, stem: str, graph: DirectedGraph, cfg_hash: str, seed: int, formats) -> None:
    if "json" in formats:
        _write_json(out_dir / f"{stem}.json", {"graph": graph.to_dict()}, cfg_hash, seed)
    if "dot" in formats:
        dot = f"// config_hash={cfg_hash} seed={seed}\n" + graph.to_dot()
        (out_dir / f"{stem}.dot").write_text(dot)
    if "csv" in formats:
        with (out_dir / f"{stem}.csv").open("w", newline="") as fh:
            fh.write(f"# config_hash={cfg_hash} seed={seed}\n")
            writer = csv.writer(fh)
            writer.writerow(["target", "source"])
            writer.writerows(graph.sorted_edges())


def _formats(arg: str) -> set:
    return {"json", "dot", "csv"} if arg == "all" else {arg}


def _out_dir(args, cfg) -> Path:
    out = Path(args.out_dir if args.out_dir else cfg["outputs"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_model(path: str) -> LrdnModel:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model {path}: {exc}") from exc
    return LrdnModel.from_dict(doc.get("model", doc))


# -- subcommands ---------------------------------------------------------


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["generator"]["rng_seed"] = args.seed
    out = _out_dir(args, cfg)
    chash = config_hash(cfg)
    try:
        gcfg = GeneratorConfig.from_dict(cfg["generator"])
        model = random_model(gcfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"generator config rejected: {exc}") from exc
    report = validate(model)
    print(report.summary())
    seed = gcfg.rng_seed
    _write_json(out / "model.json", {"model": model.to_dict(), "model_hash": model_hash(model)}, chash, seed)
    graph = true_graph(model, zero_tol=cfg["decision"]["zero_tol"])
    _write_graph(out, "true_graph", graph, chash, seed, _formats(args.format))
    print(f"wrote model with {len(graph.edges)} edges to {out}")
    return 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    chash = config_hash(cfg)
    model = _load_model(args.model)
    seed = args.seed if args.seed is not None else cfg["master_seed"]
    ts = simulate(model, num_samples=cfg["sim"]["num_samples"], burn_in=cfg["sim"]["burn_in"], seed=seed)
    write_csv(
        ts,
        out / "data.csv",
        metadata={
            "burn_in": cfg["sim"]["burn_in"],
            "model_hash": model_hash(model),
            "config_hash": chash,
        },
    )
    print(f"wrote {ts.num_samples} samples x {ts.m + ts.l} channels to {out / 'data.csv'}")
    return 0


def cmd_estimate(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    chash = config_hash(cfg)
    try:
        raw, meta = read_csv(args.data)
    except OSError as exc:
        raise ConfigError(f"cannot read data {args.data}: {exc}") from exc
    seed = int(meta.get("seed", 0)) if meta else 0

    part = partition_select(
        raw,
        max_lag=cfg["partition"]["max_lag"],
        rank_tol=cfg["partition"]["rank_tol"],
    )
    ts = apply_partition(raw, part)
    _write_json(out / "partition.json", {"partition": part.to_dict()}, chash, seed)

    p = cfg["estimation"]["order_p"]
    ridge = cfg["estimation"]["ridge"]
    s_est = estimate_s(ts, order=p, ridge=ridge)
    h_est = estimate_h(ts, order=p, ridge=ridge) if ts.m >= 1 else None
    _write_json(out / "filter_s.json", {"estimate": s_est.to_dict()}, chash, seed)
    if h_est is not None:
        _write_json(out / "filter_h.json", {"estimate": h_est.to_dict()}, chash, seed)

    alpha = cfg["decision"]["alpha"]
    correction = cfg["decision"]["correction"]
    table = edge_test_table(h_est, s_est, alpha=alpha, correction=correction)
    edges = frozenset((r.target, r.source) for r in table if r.decision)
    graph = DirectedGraph(num_nodes=ts.m + ts.l, m=ts.m, edges=edges)
    _write_graph(out, "decided_graph", graph, chash, seed, _formats(args.format))
    write_edge_tests_csv(table, out / "edge_tests.csv", comment=f"config_hash={chash} seed={seed}")
    print(
        f"partition l_indices={list(part.l_indices)}; decided {len(graph.edges)} edges "
        f"(alpha={alpha}, correction={correction})"
    )
    return 0


def cmd_decide(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    chash = config_hash(cfg)
    model = _load_model(args.model)
    filters = exact_filters(model)
    graph = support_graph(filters, m=model.m, zero_tol=cfg["decision"]["zero_tol"])
    _write_json(
        out / "exact_filters.json",
        {
            "s": filters.s.to_dict(),
            "h": filters.h.to_dict(),
            "d": filters.d.tolist(),
        },
        chash,
        0,
    )
    _write_graph(out, "decided_graph", graph, chash, 0, _formats(args.format))
    print(f"support decision: {len(graph.edges)} edges")
    return 0


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    chash = config_hash(cfg)

    def load_graph(path):
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read graph {path}: {exc}") from exc
        return DirectedGraph.from_dict(doc.get("graph", doc))

    metrics = compare_graphs(load_graph(args.estimated), load_graph(args.truth))
    _write_json(out / "metrics.json", {"metrics": metrics.to_dict()}, chash, 0)
    print(json.dumps(metrics.to_dict(), sort_keys=True, indent=2))
    return 0


def run_experiment(cfg: dict, out_dir: Path) -> dict:
    """Monte-Carlo loop behind the run-experiment subcommand.

    Per-trial seeds derive from (master_seed, trial, stream), so the result
    tree is a pure function of the config. Per-trial failures are recorded
    and the run continues.
    """
    chash = config_hash(cfg)
    master = cfg["master_seed"]
    p = cfg["estimation"]["order_p"]
    ridge = cfg["estimation"]["ridge"]
    alpha = cfg["decision"]["alpha"]
    correction = cfg["decision"]["correction"]

    fixed_model = None
    if cfg.get("fixed_model"):
        gcfg = GeneratorConfig.from_dict({**cfg["generator"], "rng_seed": derive_seed(master, 0, 0)})
        fixed_model = random_model(gcfg)

    rows = []
    t_start = time.time()
    for trial in range(cfg["trials"]):
        trial_row = {"trial": trial, "seed": derive_seed(master, trial, 1)}
        try:
            if fixed_model is not None:
                model = fixed_model
            else:
                gcfg = GeneratorConfig.from_dict(
                    {**cfg["generator"], "rng_seed": derive_seed(master, trial, 0)}
                )
                model = random_model(gcfg)
            ts = simulate(
                model,
                num_samples=cfg["sim"]["num_samples"],
                burn_in=cfg["sim"]["burn_in"],
                seed=trial_row["seed"],
            )
            h_est = estimate_h(ts, order=p, ridge=ridge)
            s_est = estimate_s(ts, order=p, ridge=ridge)
            decided = decide_graph(h_est, s_est, alpha=alpha, correction=correction)
            metrics = compare_graphs(decided, true_graph(model, zero_tol=cfg["decision"]["zero_tol"]))
            trial_row.update(
                exact_match=int(metrics.exact_match),
                precision=metrics.precision,
                recall=metrics.recall,
                true_positives=metrics.true_positives,
                false_positives=metrics.false_positives,
                false_negatives=metrics.false_negatives,
                error="",
            )
        except LrdnError as exc:
            trial_row.update(
                exact_match="",
                precision="",
                recall="",
                true_positives="",
                false_positives="",
                false_negatives="",
                error=f"{type(exc).__name__}: {exc}",
            )
        rows.append(trial_row)
    runtime = time.time() - t_start

    fieldnames = [
        "trial",
        "seed",
        "exact_match",
        "precision",
        "recall",
        "true_positives",
        "false_positives",
        "false_negatives",
        "error",
    ]
    with (out_dir / "trials.csv").open("w", newline="") as fh:
        fh.write(f"# config_hash={chash} master_seed={master}\n")
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in sorted(rows, key=lambda r: r["trial"]):
            writer.writerow(row)

    completed = [r for r in rows if not r["error"]]
    aggregate = {
        "trials": cfg["trials"],
        "completed": len(completed),
        "failures": cfg["trials"] - len(completed),
        "exact_match_rate": float(np.mean([r["exact_match"] for r in completed])) if completed else 0.0,
        "mean_precision": float(np.mean([r["precision"] for r in completed])) if completed else 0.0,
        "mean_recall": float(np.mean([r["recall"] for r in completed])) if completed else 0.0,
    }
    _write_json(out_dir / "aggregate.json", {"aggregate": aggregate}, chash, master)
    # wall-clock time lives apart so the result tree stays reproducible
    (out_dir / "run_info.json").write_text(
        json.dumps({"runtime_seconds": runtime}, sort_keys=True, indent=2) + "\n"
    )
    return aggregate


def cmd_run_experiment(args) -> int:
    cfg = load_config(args.config)
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("trials must be a positive integer")
        cfg["trials"] = args.trials
    if args.seed is not None:
        cfg["master_seed"] = args.seed
    out = _out_dir(args, cfg)
    aggregate = run_experiment(cfg, out)
    print(json.dumps(aggregate, sort_keys=True, indent=2))
    return 0


# -- argument parsing ----------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lrdnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config merged over the defaults")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out-dir", help="output directory (default from config)")
        p.add_argument(
            "--format",
            choices=["json", "csv", "dot", "all"],
            default="all",
            help="graph export format(s)",
        )

    p = sub.add_parser("generate", help="draw a model and write it with its true graph")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="simulate a trajectory from a model file")
    common(p)
    p.add_argument("--model", required=True, help="model JSON from 'generate'")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate filters and decide a graph from CSV data")
    common(p)
    p.add_argument("--data", required=True, help="sample CSV")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("decide", help="population support decision from a model file")
    common(p)
    p.add_argument("--model", required=True, help="model JSON")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("compare", help="edge accuracy of an estimated graph against a truth graph")
    common(p)
    p.add_argument("--estimated", required=True, help="estimated graph JSON")
    p.add_argument("--truth", required=True, help="true graph JSON")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("run-experiment", help="Monte-Carlo generate/simulate/estimate/decide loop")
    common(p)
    p.add_argument("--trials", type=int, help="override the trial count")
    p.set_defaults(func=cmd_run_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except LrdnError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
