"""Batch front end: ``analyze``, ``fit``, ``simulate`` and ``report``.

Every run is reproducible: randomness comes from ``--seed`` only and outputs
are written in story-id order whatever the degree of parallelism.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .cascade import build_activation_dag
from .events import LogFormatError, load_activation_log
from .fitting import FAMILIES, compare_fits
from .graph import FollowerGraph, GraphFormatError, load_follower_graph
from .metrics import (
    analyze_story,
    corpus_distributions,
    read_distribution_csv,
    write_distribution_csv,
)
from .sim import (
    ConfigError,
    ContagionConfig,
    GraphConfig,
    generate_graph,
    graph_rng,
    simulate_corpus,
    write_corpus,
)

log = logging.getLogger("cascadekit")

EXIT_OK, EXIT_INPUT = 0, 2

_worker_graph: FollowerGraph | None = None


def _init_worker(g):
    global _worker_graph
    _worker_graph = g


def _analyze_worker(seq):
    return analyze_story(_worker_graph, seq)


def _safe_name(story: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", story) or "_"


def _dump(obj, path: Path):
    with path.open("w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def analyze(graph_path, log_path, out_dir, jobs: int | None = None, export_dags: bool = False) -> dict:
    """Metrics for every story of a log; returns the summary dict."""
    t0 = time.perf_counter()
    g = load_follower_graph(graph_path)
    logs, report = load_activation_log(log_path, graph=g, with_report=True)
    out = Path(out_dir)
    (out / "metrics").mkdir(parents=True, exist_ok=True)
    (out / "distributions").mkdir(parents=True, exist_ok=True)

    seqs = [logs[k] for k in sorted(logs)]
    jobs = max(1, min(jobs or os.cpu_count() or 1, len(seqs) or 1))
    if jobs > 1:
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(g,)) as ex:
            stories = list(ex.map(_analyze_worker, seqs, chunksize=max(1, len(seqs) // (4 * jobs))))
    else:
        stories = [analyze_story(g, s) for s in seqs]

    for m in stories:
        _dump(m.to_dict(), out / "metrics" / f"{_safe_name(m.story)}.json")
    if export_dags:
        (out / "dags").mkdir(exist_ok=True)
        for s in seqs:
            _dump(build_activation_dag(g, s).to_dict(), out / "dags" / f"{_safe_name(s.story)}.json")
    for name, dist in corpus_distributions(stories).items():
        write_distribution_csv(dist, out / "distributions" / f"{name}.csv")

    summary = {
        "stories": len(stories),
        "events": report.events,
        "cascades": sum(len(m.cascades) for m in stories),
        "graph": g.summary(),
        "validation": report.to_dict(),
        "jobs": jobs,
        "wall_clock_seconds": round(time.perf_counter() - t0, 6),
    }
    _dump(summary, out / "summary.json")
    log.info("%d stories analyzed", len(stories))
    return summary


def _distribution_files(in_dir: Path) -> list[Path]:
    sub = in_dir / "distributions"
    base = sub if sub.is_dir() else in_dir
    files = []
    for f in sorted(base.glob("*.csv")):
        with f.open(encoding="utf-8") as fh:
            if fh.readline().strip().startswith("value,count"):
                files.append(f)
    return files


FIT_COLUMNS = ["metric", "rank", "family", "params", "ks", "loglik", "n", "n_dropped",
               "degenerate", "low_confidence", "error"]


def fit(in_dir, families=FAMILIES, out_dir=None) -> list[dict]:
    """Fit every distribution CSV found in ``in_dir``; one ranked block per metric."""
    in_dir = Path(in_dir)
    out = Path(out_dir or in_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for path in _distribution_files(in_dir):
        dist = read_distribution_csv(path)
        x = dist.samples()
        dropped = int(np.sum(x <= 0))
        x = x[x > 0]
        errors: dict = {}
        ranked = compare_fits(x, families, errors=errors)
        for rank, r in enumerate(ranked, 1):
            rows.append({
                "metric": dist.name, "rank": rank, "family": r.family,
                "params": json.dumps(r.params, sort_keys=True), "ks": r.ks, "loglik": r.loglik,
                "n": r.n, "n_dropped": dropped, "degenerate": int(r.degenerate),
                "low_confidence": int(r.low_confidence), "error": "",
            })
        for fam in families:
            if fam in errors:
                log.warning("%s: %s", dist.name, errors[fam])
                rows.append({
                    "metric": dist.name, "rank": "", "family": fam, "params": "", "ks": "",
                    "loglik": "", "n": int(x.size), "n_dropped": dropped, "degenerate": 1,
                    "low_confidence": 0, "error": errors[fam],
                })
    with (out / "fits.csv").open("w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, FIT_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    _dump(rows, out / "fits.json")
    return rows


def load_sim_config(path) -> tuple[GraphConfig, ContagionConfig, int | None]:
    with Path(path).open(encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    unknown = set(raw) - {"graph", "contagion", "seed"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown top-level field")
    gd = raw.get("graph", {})
    bad = set(gd) - set(GraphConfig.__dataclass_fields__)
    if bad:
        raise ConfigError("graph." + sorted(bad)[0], "unknown graph field")
    try:
        gcfg = GraphConfig(**gd).validate()
    except ConfigError as exc:
        raise ConfigError("graph." + exc.field, str(exc).split(": ", 1)[1]) from None
    try:
        ccfg = ContagionConfig.from_dict(raw.get("contagion", {}))
    except ConfigError as exc:
        raise ConfigError("contagion." + exc.field, str(exc).split(": ", 1)[1]) from None
    return gcfg, ccfg, raw.get("seed")


def simulate(config_path, out_dir, seed: int | None = None) -> dict:
    gcfg, ccfg, cfg_seed = load_sim_config(config_path)
    seed = seed if seed is not None else cfg_seed
    if seed is None:
        raise ConfigError("seed", "pass --seed or set \"seed\" in the config")
    g = generate_graph(gcfg, graph_rng(seed))
    corpus = simulate_corpus(g, ccfg, seed)
    write_corpus(out_dir, g, corpus, gcfg)
    return corpus.manifest(gcfg)


REPORT_COLUMNS = ["metric", "n", "mean", "median", "max", "best_family", "best_params", "best_ks"]


def report(in_dir, out_dir) -> list[dict]:
    """Merge corpus distributions and fits into one table per metric."""
    in_dir = Path(in_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    best = {}
    fits_path = in_dir / "fits.csv"
    if fits_path.exists():
        with fits_path.open(encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                if row["rank"] == "1":
                    best[row["metric"]] = row
    rows = []
    for path in _distribution_files(in_dir):
        dist = read_distribution_csv(path)
        x = dist.samples()
        b = best.get(dist.name, {})
        rows.append({
            "metric": dist.name,
            "n": int(x.size),
            "mean": float(x.mean()) if x.size else "",
            "median": float(np.median(x)) if x.size else "",
            "max": float(x.max()) if x.size else "",
            "best_family": b.get("family", ""),
            "best_params": b.get("params", ""),
            "best_ks": b.get("ks", ""),
        })
    with (out / "report.csv").open("w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, REPORT_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    summary_path = in_dir / "summary.json"
    doc = {"metrics": rows}
    if summary_path.exists():
        doc["summary"] = json.loads(summary_path.read_text(encoding="utf-8"))
    _dump(doc, out / "report.json")
    return rows


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cascadekit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="cascade metrics for every story of a log")
    a.add_argument("--graph", required=True, help="follower edge list")
    a.add_argument("--log", required=True, help="activation log CSV")
    a.add_argument("--out", required=True)
    a.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    a.add_argument("--dags", action="store_true", help="also export activation DAGs as JSON")

    f = sub.add_parser("fit", help="fit distribution families to corpus distributions")
    f.add_argument("--in", dest="in_dir", required=True)
    f.add_argument("--families", default=",".join(FAMILIES))
    f.add_argument("--out", default=None)

    s = sub.add_parser("simulate", help="synthetic graph and contagion corpus")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out", required=True)

    r = sub.add_parser("report", help="merge metrics and fits into one table")
    r.add_argument("--in", dest="in_dir", required=True)
    r.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "analyze":
            summary = analyze(args.graph, args.log, args.out, args.jobs, args.dags)
            print(f"{summary['stories']} stories, {summary['cascades']} cascades "
                  f"in {summary['wall_clock_seconds']:.2f}s")
        elif args.command == "fit":
            families = [x.strip() for x in args.families.split(",") if x.strip()]
            unknown = [x for x in families if x not in FAMILIES]
            if unknown:
                print(f"error: unknown family {unknown[0]!r}", file=sys.stderr)
                return EXIT_INPUT
            rows = fit(args.in_dir, families, args.out)
            print(f"{len({r['metric'] for r in rows})} metrics fitted")
        elif args.command == "simulate":
            manifest = simulate(args.config, args.out, args.seed)
            print(f"{len(manifest['promoted'])} promoted stories")
        elif args.command == "report":
            rows = report(args.in_dir, args.out)
            print(f"{len(rows)} metrics reported")
    except (GraphFormatError, LogFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigError as exc:
        print(f"error: invalid config field {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
