"""Command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 bad arguments or inputs.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
import time
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import agglomerate, generate, ingest
from .graph import GraphFormatError, read_edge_list, write_edge_list
from .groups import read_groups, read_partition, write_groups, write_partition
from .metrics import partition_report
from .modularity import fairness_modularity_qp, modularity_q

log = logging.getLogger("fairfn")

AUDIT_TOL = 1e-9


class UsageError(Exception):
    """Bad input detected after argument parsing; maps to exit code 2."""


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def _dist(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("distribution entries must be positive")
    if abs(sum(vals) - 1.0) > 1e-9:
        raise argparse.ArgumentTypeError(f"distribution must sum to 1 (got {sum(vals)!r})")
    return vals


def _columns(text: str) -> list[str]:
    return [c.strip() for c in text.split(",") if c.strip()]


def _nonneg(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fairfn", description="Fair modularity-based community detection.")
    p.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="synthetic graphs, groups and features")
    gsub = gen.add_subparsers(dest="kind", required=True)

    g = gsub.add_parser("lfr", help="LFR-style benchmark graph")
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--tau1", type=float, default=2.0)
    g.add_argument("--tau2", type=float, default=1.1)
    g.add_argument("--mu", type=float, default=0.1)
    g.add_argument("--min-deg", type=int, default=20)
    g.add_argument("--max-deg", type=int, default=100)
    g.add_argument("--min-community", type=int)
    g.add_argument("--max-community", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-graph", required=True)
    g.add_argument("--out-truth", required=True)

    g = gsub.add_parser("groups-iid", help="i.i.d. protected groups")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--dist", type=_dist, default=[0.5, 0.5])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    g = gsub.add_parser("groups-biased", help="community-dependent binary groups")
    g.add_argument("--truth", required=True)
    g.add_argument("--p-low", type=float, default=0.2)
    g.add_argument("--p-high", type=float, default=0.8)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    g = gsub.add_parser("blobs", help="Gaussian blob feature table")
    g.add_argument("--n", type=int, default=3000)
    g.add_argument("--centers", type=int, default=5)
    g.add_argument("--dims", type=int, default=2)
    g.add_argument("--spread", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    k = sub.add_parser("knn", help="k-nearest-neighbour graph from a feature CSV")
    k.add_argument("--input", required=True)
    k.add_argument("--columns", type=_columns)
    k.add_argument("--k", type=int, default=10)
    k.add_argument("--no-standardize", action="store_true")
    k.add_argument("--sample", type=int)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--out", required=True)

    d = sub.add_parser("detect", help="run FN or FairFN")
    d.add_argument("--algo", choices=agglomerate.MODES, default="fairfn")
    d.add_argument("--alpha", type=_nonneg, default=0.0)
    d.add_argument("--graph", required=True)
    d.add_argument("--groups")
    d.add_argument("--out-partition", required=True)
    d.add_argument("--out-trace")
    d.add_argument("--out-summary")
    d.add_argument("--best-q", action="store_true",
                   help="also write the highest-Q prefix partition to <out-partition>.bestq.csv")

    e = sub.add_parser("eval", help="metrics of a partition")
    e.add_argument("--graph", required=True)
    e.add_argument("--groups", required=True)
    e.add_argument("--partition", required=True)
    e.add_argument("--truth")
    e.add_argument("--format", choices=("csv", "text"), default="text")
    e.add_argument("--out")
    return p


def _fmt(v) -> str:
    return f"{v:.12g}" if isinstance(v, float) else str(v)


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _text_block(record: dict) -> str:
    return "".join(f"{k}: {_fmt(v)}\n" for k, v in record.items())


def _csv_block(record: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(record.keys())
    w.writerow([_fmt(v) for v in record.values()])
    return buf.getvalue()


def cmd_generate(args) -> int:
    if args.kind == "lfr":
        g, truth = generate.lfr(
            args.n, args.tau1, args.tau2, args.mu, args.min_deg, args.max_deg, args.seed,
            min_community=args.min_community, max_community=args.max_community,
        )
        write_edge_list(g, args.out_graph)
        write_partition(truth, args.out_truth)
        log.info("lfr: n=%d m=%g communities=%d", g.n, g.m, truth.k)
    elif args.kind == "groups-iid":
        write_groups(generate.assign_groups_iid(args.n, args.dist, args.seed), args.out)
    elif args.kind == "groups-biased":
        truth = read_partition(args.truth)
        write_groups(generate.assign_groups_biased(truth, args.p_low, args.p_high, args.seed), args.out)
    elif args.kind == "blobs":
        X = generate.gaussian_blobs(args.n, args.centers, args.dims, args.spread, args.seed)
        ingest.write_features(X, args.out)
    return 0


def cmd_knn(args) -> int:
    try:
        X = ingest.load_features(args.input, args.columns)
    except ingest.FeatureError as exc:
        raise UsageError(str(exc)) from None
    if args.sample is not None:
        X = ingest.sample_rows(X, args.sample, args.seed)
    if not args.no_standardize:
        X = ingest.standardize(X)
    if not 1 <= args.k < len(X):
        raise UsageError(f"--k must satisfy 1 <= k < n ({len(X)})")
    write_edge_list(ingest.knn_graph(X, args.k), args.out)
    return 0


def cmd_detect(args) -> int:
    g = read_edge_list(args.graph)
    if args.groups:
        ga = read_groups(args.groups)
    elif args.algo == "fairfn":
        raise UsageError("--groups is required for --algo fairfn")
    else:
        from .groups import GroupAssignment

        ga = GroupAssignment(np.zeros(g.n, dtype=np.int64))
    if ga.n != g.n:
        raise UsageError(f"graph has {g.n} vertices but groups file has {ga.n}")

    t0 = time.perf_counter()
    partition, trace = agglomerate.run(g, ga, args.alpha, args.algo)
    elapsed = time.perf_counter() - t0

    write_partition(partition, args.out_partition)
    # self-audit: recompute from the emitted file, never trust the accumulators
    emitted = read_partition(args.out_partition)
    q, qp = modularity_q(g, emitted), fairness_modularity_qp(ga, emitted)
    acc_q, acc_qp = (trace.records[-1].q, trace.records[-1].qp) if len(trace) else trace.initial[:2]
    if abs(q - acc_q) > AUDIT_TOL or abs(qp - acc_qp) > AUDIT_TOL:
        print(f"fairfn: internal consistency failure: accumulated (Q, Q^P) = ({acc_q!r}, {acc_qp!r}) "
              f"but recomputed ({q!r}, {qp!r})", file=sys.stderr)
        return 1
    if args.out_trace:
        _emit(trace.to_csv(), args.out_trace)

    summary = {"algo": args.algo, "alpha": args.alpha, "merges": len(trace)}
    summary.update(partition_report(g, ga, partition))
    if args.best_q:
        step = trace.best_q_step()
        best = agglomerate.partition_at(trace, step)
        write_partition(best, args.out_partition + ".bestq.csv")
        summary.update({"best_q_step": step, "best_q": modularity_q(g, best), "best_q_communities": best.k})
    # wall-clock is the one nondeterministic field; it is always the last line
    summary["runtime_s"] = round(elapsed, 3)
    if args.out_summary:
        _emit(_text_block(summary), args.out_summary)
    print(f"fairfn: {args.algo} finished in {elapsed:.3f}s, {partition.k} communities", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    g = read_edge_list(args.graph)
    ga = read_groups(args.groups)
    p = read_partition(args.partition)
    truth = read_partition(args.truth) if args.truth else None
    for name, n in (("groups", ga.n), ("partition", p.n)) + ((("truth", truth.n),) if truth else ()):
        if n != g.n:
            raise UsageError(f"graph has {g.n} vertices but {name} has {n}")
    record = partition_report(g, ga, p, truth)
    record["r"] = ga.r
    _emit(_csv_block(record) if args.format == "csv" else _text_block(record), args.out)
    return 0


COMMANDS = {"generate": cmd_generate, "knn": cmd_knn, "detect": cmd_detect, "eval": cmd_eval}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fairfn: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"fairfn: error: {exc}", file=sys.stderr)
        return 2
    except (GraphFormatError, ValueError) as exc:
        print(f"fairfn: error: {exc}", file=sys.stderr)
        return 2 if args.command in ("eval", "knn") else 1
    except generate.GenerationError as exc:
        print(f"fairfn: generation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
