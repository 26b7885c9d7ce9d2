"""Command-line interface.

Relative input paths resolve against DIEMATCH_DATA_DIR when set; relative
cache paths resolve against DIEMATCH_CACHE_DIR. Report-producing commands
render matplotlib figures next to their delimited outputs unless
--no-figures is given.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from ..diegraph import build_graph, cluster, export_clusters, save_graph, sweep_tau
from ..evalmetrics import (
    ari,
    benchmark_report_csv,
    benchmark_report_json,
    fmi,
    pair_confusion,
    render_benchmark_table,
)
from ..register import RegistrationParams
from ..simscore import load_model, read_scores_csv, save_model, write_scores_csv
from .benchmark import run_registration_benchmark
from .cache import PairCache, config_fingerprint
from .manifest import ingest_directory, load_manifest, save_manifest
from .pairwise import default_workers, run_pairwise
from .synthetic import build_synthetic_corpus
from .training import read_labeled_pairs, train_from_labeled_pairs


def _data_path(value: str) -> Path:
    path = Path(value)
    base = os.environ.get("DIEMATCH_DATA_DIR")
    if base and not path.is_absolute():
        return Path(base) / path
    return path


def _cache_path(value: str) -> Path:
    path = Path(value)
    base = os.environ.get("DIEMATCH_CACHE_DIR")
    if base and not path.is_absolute():
        return Path(base) / path
    return path


def _registration_params(args) -> RegistrationParams:
    overrides = {}
    for name in ("seed", "n_descriptor_samples", "robust_method"):
        value = getattr(args, name.replace("-", "_"), None)
        if value is not None:
            overrides[name] = value
    return RegistrationParams(**overrides)


def _progress_printer(label: str):
    def on_progress(done, total):
        if done == total or done % 25 == 0:
            print(f"{label}: {done}/{total}", file=sys.stderr)

    return on_progress


def cmd_ingest(args) -> int:
    manifest = ingest_directory(_data_path(args.dir), labels_csv=args.labels)
    save_manifest(manifest, args.out)
    print(f"manifest with {len(manifest)} scans -> {args.out}")
    return 0


def cmd_train(args) -> int:
    manifest = load_manifest(_data_path(args.manifest))
    labeled = read_labeled_pairs(args.pairs)
    model = train_from_labeled_pairs(
        manifest,
        labeled,
        params=_registration_params(args),
        method=args.method,
        workers=args.workers,
    )
    save_model(model, args.model)
    meta = model.training_meta
    print(
        f"trained on {meta.n_positive}+{meta.n_negative} pairs, "
        f"accuracy {meta.training_accuracy:.3f} -> {args.model}"
    )
    return 0


def cmd_score(args) -> int:
    manifest = load_manifest(_data_path(args.manifest))
    model = load_model(_data_path(args.model))
    params = _registration_params(args)
    cache = None
    if args.cache:
        fingerprint = config_fingerprint(params, args.method, model)
        cache = PairCache(_cache_path(args.cache), fingerprint)
        print(f"cache: {len(cache)} usable entries", file=sys.stderr)
    scores, failures = run_pairwise(
        manifest,
        model,
        params=params,
        method=args.method,
        workers=args.workers,
        cache=cache,
        on_progress=_progress_printer("scored"),
    )
    write_scores_csv(scores, args.out)
    print(f"{len(scores)} pair scores -> {args.out}")
    if failures:
        failures_path = Path(args.out).with_suffix(".failures.csv")
        with open(failures_path, "w", encoding="utf-8") as handle:
            handle.write("id_a,id_b,stage,message\n")
            for f in failures:
                message = f.message.replace('"', "'")
                handle.write(f'{f.pair[0]},{f.pair[1]},{f.stage},"{message}"\n')
        print(f"{len(failures)} failures -> {failures_path}", file=sys.stderr)
    if not args.no_figures:
        from .reporting import save_probability_figure

        figure = Path(args.out).with_suffix(".probabilities.png")
        save_probability_figure([s.probability for s in scores], figure)
        print(f"figure -> {figure}")
    return 0


def cmd_cluster(args) -> int:
    rows = read_scores_csv(_data_path(args.scores))
    roster = sorted({r["id_a"] for r in rows} | {r["id_b"] for r in rows})
    graph = build_graph([(r["id_a"], r["id_b"], r["probability"]) for r in rows], roster)
    clustering = cluster(graph, args.tau)
    document = export_clusters(clustering, args.format)
    Path(args.out).write_text(document)
    print(f"{clustering.n_clusters()} clusters at tau={args.tau} -> {args.out}")
    if args.graph:
        save_graph(graph, args.graph)
        print(f"graph -> {args.graph}")
    if not args.no_figures:
        from .reporting import save_cluster_size_figure, save_tau_sweep_figure

        base = Path(args.out)
        save_cluster_size_figure(clustering, base.with_suffix(".sizes.png"))
        taus = [i / 50 for i in range(51)]
        save_tau_sweep_figure(sweep_tau(graph, taus), base.with_suffix(".sweep.png"))
        print(f"figures -> {base.with_suffix('.sizes.png')}, {base.with_suffix('.sweep.png')}")
    return 0


def cmd_bench_reg(args) -> int:
    manifest = load_manifest(_data_path(args.manifest))
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    run = run_registration_benchmark(
        manifest,
        methods,
        params=_registration_params(args),
        on_progress=_progress_printer("registered"),
    )
    report_dir = Path(args.report)
    report_dir.mkdir(parents=True, exist_ok=True)
    table = render_benchmark_table(run.reports)
    timing = "  ".join(f"{m}: {s:.2f}s/pair" for m, s in run.mean_seconds.items())
    (report_dir / "report.txt").write_text(table + f"\nTiming  {timing}\n")
    (report_dir / "report.csv").write_text(benchmark_report_csv(run.reports))
    (report_dir / "report.json").write_text(benchmark_report_json(run.reports))
    print(table)
    print(f"Timing  {timing}")
    if run.failures:
        print(f"{len(run.failures)} method failures (scored as identity)", file=sys.stderr)
    if not args.no_figures:
        from .reporting import save_benchmark_figure

        save_benchmark_figure(run.reports, report_dir / "report.png")
        print(f"figure -> {report_dir / 'report.png'}")
    return 0


def cmd_synth(args) -> int:
    counts = [int(c) for c in args.coins_per_die.split(",")]
    coins = counts[0] if len(counts) == 1 else counts
    overrides = {}
    if args.radius is not None:
        overrides["coin_radius"] = args.radius
    if args.spacing is not None:
        overrides["sample_spacing"] = args.spacing
    if args.amplitude is not None:
        overrides["relief_amplitude"] = args.amplitude
    manifest = build_synthetic_corpus(
        args.out,
        n_dies=args.dies,
        coins_per_die=coins,
        base_seed=args.seed,
        die_prefix=args.prefix,
        **overrides,
    )
    print(f"{len(manifest)} scans across {args.dies} dies -> {args.out}")
    return 0


def cmd_metrics(args) -> int:
    import csv as _csv
    import json as _json

    def read_assignment(path):
        with open(path, "r", encoding="utf-8", newline="") as handle:
            return {row["scan_id"]: row["cluster_id"] for row in _csv.DictReader(handle)}

    pred = read_assignment(_data_path(args.pred))
    truth = read_assignment(_data_path(args.truth))
    confusion = pair_confusion(pred, truth)
    report = {
        "fmi": fmi(pred, truth),
        "ari": ari(pred, truth),
        "tp": confusion.tp,
        "fp": confusion.fp,
        "fn": confusion.fn,
        "tn": confusion.tn,
    }
    print(
        f"FMI {report['fmi']:.4f}  ARI {report['ari']:.4f}  "
        f"TP {confusion.tp}  FP {confusion.fp}  FN {confusion.fn}  TN {confusion.tn}"
    )
    if args.out:
        Path(args.out).write_text(_json.dumps(report, indent=2, sort_keys=True) + "\n")
        print(f"report -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    manifest = load_manifest(_data_path(args.manifest)) if args.manifest else None
    ui_dir = args.ui_dir
    if ui_dir is None:
        default_ui = Path(__file__).resolve().parents[3] / "frontend" / "dist"
        ui_dir = default_ui if default_ui.is_dir() else None
    serve(
        _data_path(args.graph),
        manifest=manifest,
        scores_path=_data_path(args.scores) if args.scores else None,
        host=args.host,
        port=args.port,
        token=args.token,
        ui_dir=ui_dir,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diematch",
        description="Coin die analysis: registration, same-die scoring, clustering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a manifest from a directory of PLY scans")
    p.add_argument("--dir", required=True)
    p.add_argument("--labels", help="CSV with columns id[,die][,face][,split]")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("train", help="fit the logistic model from labeled pairs")
    p.add_argument("--manifest", required=True)
    p.add_argument("--pairs", required=True, help="CSV id_a,id_b,label")
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--method", default="fpfh", choices=["fpfh", "icp_rand"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("score", help="score all scan pairs of a corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--method", default="fpfh", choices=["fpfh", "icp_rand"])
    p.add_argument("--workers", type=int, default=default_workers())
    p.add_argument("--cache", help="resumable JSONL cache file")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("cluster", help="threshold clustering of a scores CSV")
    p.add_argument("--scores", required=True)
    p.add_argument("--tau", type=float, default=0.95)
    p.add_argument("--out", required=True)
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.add_argument("--graph", help="also persist the similarity graph JSON")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(fn=cmd_cluster)

    p = sub.add_parser("bench-reg", help="registration benchmark on a labeled corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("--methods", default="fpfh", help="comma list: gt,icp_rand,fpfh,external")
    p.add_argument("--report", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(fn=cmd_bench_reg)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--dies", type=int, required=True)
    p.add_argument("--coins-per-die", required=True, help="an int, or comma list per die")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, help="coin radius (mm)")
    p.add_argument("--spacing", type=float, help="sampling grid (mm)")
    p.add_argument("--amplitude", type=float, help="relief RMS height (mm)")
    p.add_argument("--prefix", default="D", choices=["D", "DB", "R"])
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("metrics", help="clustering agreement between two exports")
    p.add_argument("--pred", required=True, help="predicted clusters CSV")
    p.add_argument("--truth", required=True, help="ground-truth clusters CSV")
    p.add_argument("--out", help="optional JSON report path")
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("serve", help="run the graph-editing HTTP service")
    p.add_argument("--graph", required=True)
    p.add_argument("--manifest")
    p.add_argument("--scores", help="scores JSONL (pair cache) for detail views")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--token", default=os.environ.get("DIEMATCH_TOKEN"))
    p.add_argument("--ui-dir", help="static frontend bundle directory")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
