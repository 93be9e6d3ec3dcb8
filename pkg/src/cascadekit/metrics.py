"""Macroscopic cascade properties: per cascade, per story, per corpus.

All diameters are measured in hops.  The maximum diameter is the longest
directed path anywhere in a cascade's edge set; the minimum diameter is the
seed's eccentricity.  Story-level "global" minimum diameter uses the distance
to the nearest seed.
"""
from __future__ import annotations

import csv
import json
from collections import Counter
from collections.abc import Iterable
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ._arrays import bfs_levels, csr_from_pairs, longest_path_lengths
from .cascade import (
    ActivationDAG,
    Cascade,
    build_activation_dag,
    extract_cascades,
    principal_cascade,
)
from .graph import ccdf

__all__ = [
    "CascadeMetrics",
    "StoryMetrics",
    "Distribution",
    "CORPUS_METRICS",
    "cascade_metrics",
    "story_metrics",
    "analyze_story",
    "corpus_distributions",
    "write_distribution_csv",
    "read_distribution_csv",
]


@dataclass(frozen=True)
class CascadeMetrics:
    seed: object
    size: int
    max_diameter: int
    min_diameter: int
    spread: int


@dataclass(frozen=True)
class StoryMetrics:
    story: str
    activated: int
    n_seeds: int
    cascades: tuple
    largest_cascade_size: int
    global_max_diameter: int
    global_min_diameter: int
    global_spread: int
    community_value: int
    normalized_community_value: float
    principal: CascadeMetrics
    principal_flagged: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cascades"] = [asdict(c) for c in self.cascades]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), default=str)


def cascade_metrics(c: Cascade) -> CascadeMetrics:
    n = c.dag.n_nodes
    if c.src.size == 0:
        return CascadeMetrics(c.seed, c.size, 0, 0, 0)
    spread = int(np.bincount(c.src).max())
    longest = longest_path_lengths(n, c.src, c.dst)
    indptr, indices = csr_from_pairs(c.src, c.dst, n)
    dist = bfs_levels(indptr, indices, [c.seed_position], n)
    return CascadeMetrics(
        seed=c.seed,
        size=c.size,
        max_diameter=int(longest.max()),
        min_diameter=int(dist.max()),
        spread=spread,
    )


def story_metrics(
    d: ActivationDAG, cascades: list[Cascade] | None = None, submitter=None
) -> StoryMetrics:
    """Story-level properties of one contagion process.

    ``cascades`` defaults to :func:`extract_cascades` of ``d``; ``submitter``
    to the DAG's own submitter.
    """
    if cascades is None:
        cascades = extract_cascades(d)
    n = d.n_nodes
    if n == 0:
        raise ValueError(f"story {d.story} has no activations")
    per = tuple(cascade_metrics(c) for c in cascades)
    by_seed = {c.seed_position: m for c, m in zip(cascades, per)}

    pc = principal_cascade(d, submitter)
    principal = by_seed.get(pc.seed_position) if not pc.flagged else None
    if principal is None:
        principal = cascade_metrics(pc)

    seeds = d.seed_positions()
    nearest = bfs_levels(d.out_indptr, d.out_indices, seeds, n)
    cv = d.n_edges  # every in-edge of every participant is one possible activation
    return StoryMetrics(
        story=d.story,
        activated=n,
        n_seeds=int(seeds.size),
        cascades=per,
        largest_cascade_size=max(m.size for m in per),
        global_max_diameter=max(m.max_diameter for m in per),
        global_min_diameter=int(nearest.max()),
        global_spread=max(m.spread for m in per),
        community_value=cv,
        normalized_community_value=cv / n,
        principal=principal,
        principal_flagged=pc.flagged,
    )


def analyze_story(g, seq) -> StoryMetrics:
    """Build the DAG of ``seq`` on ``g`` and compute its story metrics."""
    return story_metrics(build_activation_dag(g, seq))


CORPUS_METRICS = {
    "global_cascade_size": lambda s: [c.size for c in s.cascades],
    "largest_cascade_size": lambda s: [s.largest_cascade_size],
    "principal_size": lambda s: [s.principal.size],
    "global_max_diameter": lambda s: [s.global_max_diameter],
    "principal_max_diameter": lambda s: [s.principal.max_diameter],
    "global_min_diameter": lambda s: [s.global_min_diameter],
    "principal_min_diameter": lambda s: [s.principal.min_diameter],
    "global_spread": lambda s: [s.global_spread],
    "principal_spread": lambda s: [s.principal.spread],
    "community_value": lambda s: [s.community_value],
    "normalized_community_value": lambda s: [s.normalized_community_value],
}


@dataclass
class Distribution:
    """Histogram of one corpus metric plus its empirical CCDF."""

    name: str
    histogram: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.histogram.values())

    def ccdf(self) -> list[tuple]:
        return ccdf(self.histogram)

    def samples(self) -> np.ndarray:
        keys = sorted(self.histogram)
        return np.repeat(np.asarray(keys, dtype=float),
                         [self.histogram[k] for k in keys])


def corpus_distributions(stories: Iterable[StoryMetrics]) -> dict[str, Distribution]:
    counters = {name: Counter() for name in CORPUS_METRICS}
    for s in stories:
        for name, pick in CORPUS_METRICS.items():
            counters[name].update(pick(s))
    return {name: Distribution(name, dict(sorted(c.items()))) for name, c in counters.items()}


def write_distribution_csv(dist: Distribution, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value", "count", "ccdf"])
        for value, count, p in dist.ccdf():
            w.writerow([value, count, repr(p)])


def _number(tok: str):
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def read_distribution_csv(path, name: str | None = None) -> Distribution:
    path = Path(path)
    hist: Counter = Counter()
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["value", "count"]:
            raise ValueError(f"{path}:1: expected header value,count,ccdf")
        for row in reader:
            if not row:
                continue
            try:
                hist[_number(row[0])] += int(row[1])
            except (ValueError, IndexError):
                raise ValueError(f"{path}:{reader.line_num}: bad row {row!r}") from None
    return Distribution(name or path.stem, dict(sorted(hist.items())))
