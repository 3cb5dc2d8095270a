"""Command-line entry point: synth, eval, match and bench subcommands.

All randomness lives in ``synth`` behind an explicit seed; given the same
flags and input files every command produces byte-identical output.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distance import distance_stack
from .errors import NoInformationError, VPRFuseError
from .evaluation import TimingReport, bench_query, evaluate_method
from .fusion import decide, posterior, uniform_prior
from .ingest import (
    Dataset,
    DatasetManifest,
    generate_synthetic,
    load_dataset,
    read_descriptor_file,
    write_descriptor_file,
    write_ground_truth,
    write_manifest,
)
from .methods import expand_methods, resolve_method
from .selection import DEFAULT_GAMMA
from .sequence import sequence_decide


@dataclass
class RunConfig:
    """Everything one invocation needs; field defaults are the CLI defaults."""

    manifest: Path | None = None
    method: str = "bayes-selective"
    gamma: float = DEFAULT_GAMMA
    threshold: float = 0.5
    seq_len: int = 1
    seq_velocity: float = 1.0
    out: Path | None = None
    jobs: int = 1
    # synth
    seed: int = 0
    places: int = 500
    conditions: int = 3
    dim: int = 24
    place_spread: float = 1.0
    condition_scale: float = 0.9
    query_noise: float = 0.5
    mixture: tuple[float, ...] | None = None
    gt_tolerance: int = 0
    # match
    query_file: Path | None = None
    # bench
    repetitions: int = 5
    queries: int = 32


def _fmt(x: float) -> str:
    return f"{float(x):.10g}"


def _safe_name(name: str) -> str:
    return "".join(ch if (ch.isalnum() or ch in "._-") else "_" for ch in name)


def _emit(lines: list[str], out_path: Path | None) -> None:
    text = "\n".join(lines) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        out_path.write_text(text, encoding="utf-8")


def cmd_synth(config: RunConfig) -> int:
    if config.out is None:
        raise VPRFuseError("synth requires --out <dir>")
    data = generate_synthetic(
        seed=config.seed,
        n_places=config.places,
        n_conditions=config.conditions,
        dim=config.dim,
        place_spread=config.place_spread,
        condition_scale=config.condition_scale,
        query_noise=config.query_noise,
        mixture=config.mixture,
        gt_tolerance=config.gt_tolerance,
    )
    out = config.out
    out.mkdir(parents=True, exist_ok=True)
    refs = []
    for ref in data.refs:
        path = out / f"ref_{_safe_name(ref.label)}.vprd"
        write_descriptor_file(path, ref.descriptors)
        refs.append((ref.label, path))
    query_path = out / "query.vprd"
    write_descriptor_file(query_path, data.queries)
    gt_path = out / "ground_truth.csv"
    write_ground_truth(gt_path, data.ground_truth)
    manifest_path = out / "manifest.txt"
    write_manifest(
        manifest_path,
        DatasetManifest(
            places=config.places,
            dim=config.dim,
            query_path=query_path,
            gt_tolerance=config.gt_tolerance,
            refs=refs,
            gt_path=gt_path,
        ),
    )
    print(manifest_path)
    return 0


def cmd_eval(config: RunConfig) -> int:
    dataset = load_dataset(config.manifest)
    methods = expand_methods(config.method, dataset.labels)
    if config.out is not None:
        config.out.mkdir(parents=True, exist_ok=True)
    summary = ["method,auc,n_queries"]
    for method in methods:
        result = evaluate_method(
            dataset,
            method,
            gamma=config.gamma,
            seq_len=config.seq_len,
            seq_velocity=config.seq_velocity,
            jobs=config.jobs,
        )
        lines = ["threshold,recall,precision"]
        for cutoff, (recall, precision) in zip(result.curve.thresholds, result.curve.points):
            lines.append(f"{_fmt(cutoff)},{_fmt(recall)},{_fmt(precision)}")
        if config.out is None:
            print(f"# method={method.name}")
            _emit(lines, None)
        else:
            _emit(lines, config.out / f"pr_{_safe_name(method.name)}.csv")
        summary.append(f"{method.name},{_fmt(result.curve.auc)},{len(result.records)}")
    _emit(summary, None if config.out is None else config.out / "summary.csv")
    if config.out is not None:
        for line in summary:
            print(line)
    return 0


def cmd_match(config: RunConfig) -> int:
    dataset = load_dataset(config.manifest)
    if config.query_file is None:
        raise VPRFuseError("match requires --query <file>")
    if not 0.0 < config.threshold < 1.0:
        raise VPRFuseError(
            f"--threshold must lie in (0, 1), got {config.threshold}"
        )
    query = read_descriptor_file(config.query_file)
    if query.shape[0] != 1:
        raise VPRFuseError(
            f"match expects a single-descriptor query file, got {query.shape[0]} rows"
        )
    method = resolve_method(config.method, dataset.labels)
    stack = distance_stack(query[0], dataset.refs)
    selection = method.select(stack, config.gamma)
    print(f"method: {method.name}")
    print(f"gamma: {_fmt(config.gamma)}")
    print("reference minima:")
    for u, label in enumerate(dataset.labels):
        tags = []
        if u in selection.selected:
            tags.append("selected")
        if u == selection.best:
            tags.append("best")
        suffix = f"  ({', '.join(tags)})" if tags else ""
        print(f"  [{u}] {label}: min={_fmt(selection.minima[u])}{suffix}")
    if selection.zero_limit:
        print("note: best minimum is exactly zero; kept the zero-minimum sets")
    print(f"selected sets: {list(selection.selected)}")

    if method.kind == "belief":
        try:
            belief = posterior(stack, selection, uniform_prior(stack.n_places))
        except NoInformationError as exc:
            print(f"no-information: {exc}")
            print("decision: none")
            return 0
        if belief.dropped:
            print(f"dropped degenerate sets: {list(belief.dropped)}")
        top = np.argsort(-belief.normalized, kind="stable")[:5]
        print("top beliefs:")
        for i in top:
            print(f"  place {int(i)}: {_fmt(belief.normalized[i])}")
        decision = decide(belief, config.threshold)
        if decision.matched:
            print(
                f"decision: place={decision.place} "
                f"confidence={_fmt(decision.confidence)} threshold={_fmt(config.threshold)}"
            )
        else:
            print(
                f"decision: no match (max belief {_fmt(decision.confidence)} "
                f"<= threshold {_fmt(config.threshold)})"
            )
    else:
        row = method.fuse(stack, selection)
        top = np.argsort(-row, kind="stable")[:5]
        print("top scores (negative mean distance):")
        for i in top:
            print(f"  place {int(i)}: {_fmt(row[i])}")
        scored = sequence_decide(row, method=method.name)
        print(f"decision: place={scored.place} confidence={_fmt(scored.confidence)}")
    return 0


def cmd_bench(config: RunConfig) -> int:
    dataset = load_dataset(config.manifest)
    report = bench_query(
        dataset,
        method=config.method,
        repetitions=config.repetitions,
        n_queries=config.queries,
        gamma=config.gamma,
    )
    lines = ["method,phase,mean_s,median_s"]
    for phase in TimingReport.PHASE_ORDER:
        stats = report.phases[phase]
        lines.append(
            f"{report.method},{phase},{stats.mean_s:.9f},{stats.median_s:.9f}"
        )
    _emit(lines, None if config.out is None else config.out / "timing.csv")
    return 0


def _parse_mixture(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad mixture {text!r}; expected e.g. 0.5,0.5,0")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vprfuse",
        description="Selective Bayesian fusion of multi-condition reference sets "
        "for visual place recognition.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a seeded synthetic dataset")
    synth.add_argument("--out", type=Path, required=True, help="output directory")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--places", type=int, default=500)
    synth.add_argument("--conditions", type=int, default=3)
    synth.add_argument("--dim", type=int, default=24)
    synth.add_argument("--place-spread", type=float, default=1.0)
    synth.add_argument("--condition-scale", type=float, default=0.9)
    synth.add_argument("--query-noise", type=float, default=0.5)
    synth.add_argument(
        "--mixture",
        type=_parse_mixture,
        default=None,
        help="per-condition query draw weights, e.g. 0.5,0.5,0 (default uniform)",
    )
    synth.add_argument("--gt-tolerance", type=int, default=0)

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--manifest", type=Path, required=True)
    shared.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)

    evalp = sub.add_parser("eval", parents=[shared], help="precision-recall evaluation")
    evalp.add_argument("--method", default="bayes-selective", help="method name or 'all'")
    evalp.add_argument("--seq-len", type=int, default=1)
    evalp.add_argument("--seq-velocity", type=float, default=1.0)
    evalp.add_argument("--jobs", type=int, default=1)
    evalp.add_argument("--out", type=Path, default=None, help="write CSVs here instead of stdout")

    match = sub.add_parser("match", parents=[shared], help="diagnose a single query")
    match.add_argument("--query", dest="query_file", type=Path, required=True)
    match.add_argument("--method", default="bayes-selective")
    match.add_argument("--threshold", type=float, default=0.5)

    bench = sub.add_parser("bench", parents=[shared], help="per-query timing")
    bench.add_argument("--method", default="bayes-selective")
    bench.add_argument("--repetitions", type=int, default=5)
    bench.add_argument("--queries", type=int, default=32)
    bench.add_argument("--out", type=Path, default=None)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    for name in vars(config):
        if hasattr(args, name):
            setattr(config, name, getattr(args, name))
    return config


_COMMANDS = {
    "synth": cmd_synth,
    "eval": cmd_eval,
    "match": cmd_match,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    config = _config_from_args(args)
    try:
        return _COMMANDS[args.command](config)
    except (VPRFuseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
