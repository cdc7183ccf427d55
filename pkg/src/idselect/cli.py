"""Command-line interface: select / metrics / synth / bench.

Structured output (JSON or CSV) goes to stdout; diagnostics to stderr.
Exit codes: 0 success, 1 data/validation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
import zlib
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import FormatError, ManifestError, ValidationError
from .importance import ImportanceSource, resolve_importance
from .metrics import compute_report
from .selection import Method, SelectionConfig, id_select, select
from .tensor_io import SynthSpec, load_case, read_tensor, save_case, synth_case


def _positive_int(value):
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return n


def _positive_float(value):
    x = float(value)
    if not (x > 0):
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return x


def _nonneg_float(value):
    x = float(value)
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return x


def _int_list(value):
    try:
        items = [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {value!r}")
    if not items or any(v < 1 for v in items):
        raise argparse.ArgumentTypeError(f"need positive entries: {value!r}")
    return items


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idselect",
        description="Importance-diversity token selection over exported tensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="run a selection method on a case")
    p.add_argument("--case", required=True, help="path to a case manifest (JSON)")
    p.add_argument("--budget", required=True, type=_positive_int)
    p.add_argument("--method", choices=[m.value for m in Method], default="id")
    p.add_argument("--importance", choices=[s.value for s in ImportanceSource],
                   default="cls")
    p.add_argument("--gamma", type=_positive_float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scores", help="IDSL score vector for --importance external")
    p.add_argument("--clamp-negative-source", action="store_true")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--out", help="write result JSON here instead of stdout")

    p = sub.add_parser("metrics", help="score a selection result against its case")
    p.add_argument("--case", required=True)
    p.add_argument("--selection", required=True, help="result JSON from 'select'")

    p = sub.add_parser("synth", help="generate a synthetic case directory")
    p.add_argument("--n", required=True, type=_positive_int)
    p.add_argument("--dim", required=True, type=_positive_int)
    p.add_argument("--clusters", required=True, type=_positive_int)
    p.add_argument("--spread", type=_nonneg_float, default=0.1)
    p.add_argument("--score-noise", type=_nonneg_float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("bench", help="time id_select across problem sizes")
    p.add_argument("--n-list", required=True, type=_int_list)
    p.add_argument("--t-list", required=True, type=_int_list)
    p.add_argument("--dim", type=_positive_int, default=64)
    p.add_argument("--gamma", type=_positive_float, default=20.0)
    p.add_argument("--reps", type=_positive_int, default=5)
    p.add_argument("--seed", type=int, default=0)

    return parser


def cmd_select(args) -> int:
    case = load_case(args.case)
    external = read_tensor(args.scores) if args.scores else None
    config = SelectionConfig(
        budget=args.budget,
        gamma=args.gamma,
        clamp_negative_source=args.clamp_negative_source,
        trace=args.trace,
    )
    result = select(
        case,
        ImportanceSource(args.importance),
        config,
        Method(args.method),
        seed=args.seed,
        external_scores=external,
    )
    doc = {
        "picked": result.picked,
        "retained": result.retained,
        "config": {
            "method": args.method,
            "budget": args.budget,
            "gamma": args.gamma,
            "importance": args.importance,
            "seed": args.seed,
            "clamp_negative_source": args.clamp_negative_source,
        },
    }
    if result.trace is not None:
        doc["trace"] = [asdict(step) for step in result.trace]
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_metrics(args) -> int:
    case = load_case(args.case)
    try:
        sel_doc = json.loads(Path(args.selection).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{args.selection}: not valid JSON: {exc}") from exc
    retained = sel_doc.get("retained")
    if not isinstance(retained, list) or not retained:
        raise ValidationError(f"{args.selection}: missing non-empty 'retained' list")
    n = case.n_tokens
    for idx in retained:
        if not isinstance(idx, int) or not (0 <= idx < n):
            raise ValidationError(f"selection index {idx} out of range [0, {n})")

    source = ImportanceSource(sel_doc.get("config", {}).get("importance", "cls"))
    skip = False
    scores = None
    if source is ImportanceSource.EXTERNAL:
        print("warning: external scores unavailable; skipping importance_retention",
              file=sys.stderr)
        skip = True
    else:
        scores = resolve_importance(case, source)
        if scores.size and float(scores.min()) < 0:
            print("warning: negative scores; skipping importance_retention",
                  file=sys.stderr)
            skip = True
    report = compute_report(case.tokens, scores, retained, skip_retention=skip)
    sys.stdout.write(json.dumps(asdict(report)) + "\n")
    return 0


def cmd_synth(args) -> int:
    if args.clusters > args.n:
        raise ValidationError("--clusters cannot exceed --n")
    spec = SynthSpec(
        n_tokens=args.n,
        dim=args.dim,
        n_clusters=args.clusters,
        cluster_spread=args.spread,
        seed=args.seed,
        score_noise=args.score_noise,
    )
    manifest = save_case(synth_case(spec), args.out_dir)
    print(f"wrote {manifest}", file=sys.stderr)
    return 0


def _single_threaded():
    try:
        from threadpoolctl import threadpool_limits
        return threadpool_limits(limits=1)
    except ImportError:
        import contextlib
        return contextlib.nullcontext()


def cmd_bench(args) -> int:
    writer = csv.writer(sys.stdout)
    writer.writerow(["n", "t", "dim", "reps", "median_ns", "p90_ns", "checksum"])
    with _single_threaded():
        for n in args.n_list:
            spec = SynthSpec(
                n_tokens=n,
                dim=args.dim,
                n_clusters=min(16, n),
                cluster_spread=0.25,
                seed=args.seed,
                score_noise=0.1,
            )
            case = synth_case(spec)
            scores = np.asarray(case.cls_attention, dtype=np.float64)
            for t in args.t_list:
                config = SelectionConfig(budget=t, gamma=args.gamma)
                id_select(case.tokens, scores, config)  # warm-up
                times = []
                checksum = None
                for _ in range(args.reps):
                    t0 = time.perf_counter_ns()
                    result = id_select(case.tokens, scores, config)
                    times.append(time.perf_counter_ns() - t0)
                    checksum = zlib.crc32(
                        np.asarray(result.picked, dtype="<u4").tobytes()
                    )
                median_ns = int(statistics.median(times))
                p90_ns = int(np.percentile(times, 90))
                writer.writerow([n, t, args.dim, args.reps,
                                 median_ns, p90_ns, checksum])
    return 0


_HANDLERS = {
    "select": cmd_select,
    "metrics": cmd_metrics,
    "synth": cmd_synth,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (FormatError, ManifestError, ValidationError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
