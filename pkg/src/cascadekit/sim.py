"""Synthetic follower graphs and contagion corpora.

Contagion follows the independent-cascade model in synchronous rounds:
a node activated in round ``t`` gets one chance, with probability ``p``, to
activate each of its followers in round ``t + 1``.  The promotion experiment
adds a front page: once a story has ``threshold`` activations, every inactive
user also adopts it with probability ``rate`` per round, for ``horizon``
rounds after the promotion round.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ._arrays import gather
from .events import ActivationSequence, write_activation_log
from .graph import FollowerGraph, save_follower_graph

__all__ = [
    "TOPOLOGIES",
    "GraphConfig",
    "PromotionConfig",
    "ContagionConfig",
    "ConfigError",
    "SimulatedStory",
    "Corpus",
    "generate_graph",
    "run_independent_cascade",
    "run_promotion_experiment",
    "simulate_corpus",
    "write_corpus",
    "story_rng",
    "graph_rng",
]

TOPOLOGIES = ("uniform-random", "preferential-attachment", "community-blocks")


class ConfigError(ValueError):
    """Invalid simulator configuration; ``field`` names the offending key."""

    def __init__(self, field: str, msg: str):
        self.field = field
        super().__init__(f"{field}: {msg}")


@dataclass(frozen=True)
class GraphConfig:
    topology: str = "uniform-random"
    n_nodes: int = 1000
    mean_degree: float = 10.0
    n_blocks: int = 1
    intra_fraction: float = 1.0

    def validate(self) -> "GraphConfig":
        if self.topology not in TOPOLOGIES:
            raise ConfigError("topology", f"expected one of {TOPOLOGIES}, got {self.topology!r}")
        if not isinstance(self.n_nodes, int) or self.n_nodes < 1:
            raise ConfigError("n_nodes", "must be an integer >= 1")
        if not self.mean_degree >= 0:
            raise ConfigError("mean_degree", "must be >= 0")
        if self.mean_degree > self.n_nodes - 1:
            raise ConfigError("mean_degree", f"infeasible for {self.n_nodes} node(s)")
        if not 0.0 <= self.intra_fraction <= 1.0:
            raise ConfigError("intra_fraction", "must lie in [0, 1]")
        if not isinstance(self.n_blocks, int) or not 1 <= self.n_blocks <= self.n_nodes:
            raise ConfigError("n_blocks", "must be an integer in [1, n_nodes]")
        return self


@dataclass(frozen=True)
class PromotionConfig:
    threshold: int = 50
    rate: float = 0.001
    horizon: int = 50

    def validate(self) -> "PromotionConfig":
        if not isinstance(self.threshold, int) or self.threshold < 1:
            raise ConfigError("promotion.threshold", "must be an integer >= 1")
        if not self.rate >= 0 or self.rate > 1:
            raise ConfigError("promotion.rate", "must lie in [0, 1]")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigError("promotion.horizon", "must be an integer >= 1")
        return self


@dataclass(frozen=True)
class ContagionConfig:
    p: float = 0.1
    seeds_per_story: int = 1
    n_stories: int = 100
    promotion: PromotionConfig | None = None

    def validate(self) -> "ContagionConfig":
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError("p", "must lie in [0, 1]")
        if not isinstance(self.seeds_per_story, int) or self.seeds_per_story < 1:
            raise ConfigError("seeds_per_story", "must be an integer >= 1")
        if not isinstance(self.n_stories, int) or self.n_stories < 0:
            raise ConfigError("n_stories", "must be an integer >= 0")
        if self.promotion is not None:
            self.promotion.validate()
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "ContagionConfig":
        d = dict(d)
        promo = d.pop("promotion", None)
        unknown = set(d) - {"p", "seeds_per_story", "n_stories"}
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown contagion field")
        if promo is not None:
            bad = set(promo) - {"threshold", "rate", "horizon"}
            if bad:
                raise ConfigError("promotion." + sorted(bad)[0], "unknown promotion field")
            promo = PromotionConfig(**promo)
        return cls(promotion=promo, **d).validate()


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def story_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent stream for story ``index`` of a corpus."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(1, index)))


def graph_rng(master_seed: int) -> np.random.Generator:
    """Stream for the synthetic graph of a run, disjoint from the story streams."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(0,)))


def _fill_edges(n, m, propose, rng, max_rounds=200):
    """Draw distinct non-loop pairs from ``propose`` until ``m`` are collected."""
    keys = np.zeros(0, dtype=np.int64)
    for _ in range(max_rounds):
        need = m - keys.size
        if need <= 0:
            break
        u, v = propose(int(need * 1.1) + 16)
        ok = u != v
        keys = np.unique(np.concatenate([keys, u[ok] * n + v[ok]]))
    else:
        raise ConfigError("mean_degree", "could not place the requested number of edges")
    if keys.size > m:
        keys = np.sort(rng.choice(keys, size=m, replace=False))
    return keys // n, keys % n


def _preferential(cfg: GraphConfig, rng) -> tuple[np.ndarray, np.ndarray]:
    # each arriving node follows existing nodes with probability ~ (followers + 1)
    n, d = cfg.n_nodes, cfg.mean_degree
    base, frac = int(math.floor(d)), d - math.floor(d)
    extra = rng.random(n) < frac
    pool = np.empty(n + int(n * (d + 1)) + 1, dtype=np.int64)
    size = 0
    src, dst = [], []
    for i in range(n):
        k = min(i, base + int(extra[i]))
        if k:
            chosen: list[int] = []
            seen = set()
            while len(chosen) < k:
                for j in pool[rng.integers(0, size, size=2 * k)].tolist():
                    if j not in seen:
                        seen.add(j)
                        chosen.append(j)
                        if len(chosen) == k:
                            break
            src.extend([i] * k)
            dst.extend(chosen)
            pool[size:size + k] = chosen
            size += k
        pool[size] = i
        size += 1
    return np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)


def generate_graph(cfg: GraphConfig, rng=None) -> FollowerGraph:
    """Random follower graph over users ``0..n-1``; deterministic given ``rng``."""
    cfg.validate()
    rng = _rng(rng)
    n = cfg.n_nodes
    m = int(round(n * cfg.mean_degree))
    labels = list(range(n))
    index = {i: i for i in labels}
    if m == 0:
        empty = np.zeros(0, dtype=np.int64)
        return FollowerGraph._from_indices(labels, index, empty, empty)

    if cfg.topology == "uniform-random":
        def propose(k):
            return rng.integers(0, n, size=k), rng.integers(0, n, size=k)

        src, dst = _fill_edges(n, m, propose, rng)
    elif cfg.topology == "preferential-attachment":
        src, dst = _preferential(cfg, rng)
    else:
        block = np.arange(n) * cfg.n_blocks // n
        starts = np.searchsorted(block, np.arange(cfg.n_blocks))
        sizes = np.bincount(block, minlength=cfg.n_blocks)

        def propose(k):
            u = rng.integers(0, n, size=k)
            b = block[u]
            intra = rng.random(k) < cfg.intra_fraction
            if cfg.n_blocks == 1:
                intra[:] = True
            inside = starts[b] + (rng.random(k) * sizes[b]).astype(np.int64)
            # uniform over the nodes outside u's block
            r = (rng.random(k) * (n - sizes[b])).astype(np.int64)
            outside = np.where(r < starts[b], r, r + sizes[b])
            return u, np.where(intra, inside, outside)

        src, dst = _fill_edges(n, m, propose, rng)
    return FollowerGraph._from_indices(labels, index, src, dst)


def _spread_round(g, frontier, active, p, rng):
    """One round of transmissions from ``frontier``; returns (infectors, new)."""
    owner, fol = gather(g.in_indptr, g.in_indices, frontier)
    if fol.size == 0:
        return owner, fol
    hit = rng.random(fol.size) < p
    hit &= ~active[fol]
    owner, fol = owner[hit], fol[hit]
    # keep the first successful infector of each newly activated follower
    _, first = np.unique(fol, return_index=True)
    first.sort()
    return frontier[owner[first]], fol[first]


@dataclass(eq=False)
class SimulatedStory:
    """One simulated story; ``per_step[t]`` counts activations in round ``t``."""

    sequence: ActivationSequence
    transmissions: list = field(default_factory=list)
    promoted: bool = False
    promotion_time: int | None = None
    per_step: list = field(default_factory=list)

    @property
    def story(self) -> str:
        return self.sequence.story

    @property
    def size(self) -> int:
        return len(self.sequence)


def _simulate_story(g, seeds_idx, p, rng, story, promotion=None):
    n = g.n_nodes
    active = np.zeros(n, dtype=bool)
    seeds_idx = np.asarray(seeds_idx, dtype=np.int64)
    active[seeds_idx] = True
    order = [seeds_idx]
    times = [np.zeros(seeds_idx.size, dtype=np.int64)]
    per_step = [int(seeds_idx.size)]
    transmissions = []
    count = int(seeds_idx.size)
    promoted_at = 0 if promotion is not None and count >= promotion.threshold else None
    frontier = seeds_idx
    t = 0
    while True:
        t += 1
        # front-page exposure lasts ``horizon`` rounds; word of mouth runs to exhaustion
        background = (promoted_at is not None and promotion.rate > 0
                      and t <= promoted_at + promotion.horizon)
        if frontier.size == 0 and not background:
            break
        src, new = _spread_round(g, frontier, active, p, rng)
        active[new] = True
        transmissions.append((src, new))
        if background:
            idle = np.flatnonzero(~active)
            extra = idle[rng.random(idle.size) < promotion.rate]
            active[extra] = True
            new = np.concatenate([new, extra])
        order.append(new)
        times.append(np.full(new.size, t, dtype=np.int64))
        per_step.append(int(new.size))
        count += int(new.size)
        frontier = new
        if promotion is not None and promoted_at is None and count >= promotion.threshold:
            promoted_at = t

    lab = g.labels
    users = tuple(lab[i] for i in np.concatenate(order).tolist())
    seq = ActivationSequence(story, users, tuple(np.concatenate(times).tolist()))
    pairs = [(lab[a], lab[b]) for s, d in transmissions for a, b in zip(s.tolist(), d.tolist())]
    return SimulatedStory(seq, pairs, promoted_at is not None, promoted_at, per_step)


def run_independent_cascade(
    g: FollowerGraph,
    seeds,
    p: float,
    rng=None,
    story: str = "0",
    return_transmissions: bool = False,
):
    """Simulate one independent cascade from ``seeds`` (user labels).

    Activation times are round indices.  With ``return_transmissions`` the
    ``(infector, infected)`` pairs actually used are returned too.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    idx = [g.index[s] for s in dict.fromkeys(seeds)]
    res = _simulate_story(g, idx, p, _rng(rng), story)
    if return_transmissions:
        return res.sequence, res.transmissions
    return res.sequence


@dataclass(eq=False)
class Corpus:
    master_seed: int
    config: ContagionConfig
    stories: list

    @property
    def sequences(self) -> dict:
        return {s.story: s.sequence for s in self.stories}

    @property
    def promoted(self) -> list:
        return [s.story for s in self.stories if s.promoted]

    def manifest(self, graph_config: GraphConfig | None = None) -> dict:
        cfg = {"contagion": asdict(self.config)}
        if graph_config is not None:
            cfg["graph"] = asdict(graph_config)
        return {"master_seed": self.master_seed, "config": cfg, "promoted": self.promoted}


def _story_id(i: int, total: int) -> str:
    return f"s{i:0{max(4, len(str(max(total - 1, 0))))}d}"


def simulate_corpus(g: FollowerGraph, cfg: ContagionConfig, seed: int) -> Corpus:
    """Run ``cfg.n_stories`` stories, each on its own stream derived from ``seed``.

    Seeds of each story are distinct users drawn uniformly at random; the
    first is the submitter.  With ``cfg.promotion`` set, stories reaching the
    threshold are promoted.
    """
    cfg.validate()
    if cfg.seeds_per_story > g.n_nodes:
        raise ConfigError("seeds_per_story", "exceeds the number of users")
    stories = []
    for i in range(cfg.n_stories):
        rng = story_rng(seed, i)
        seeds = rng.choice(g.n_nodes, size=cfg.seeds_per_story, replace=False)
        stories.append(
            _simulate_story(g, seeds, cfg.p, rng, _story_id(i, cfg.n_stories), cfg.promotion)
        )
    return Corpus(seed, cfg, stories)


def run_promotion_experiment(g: FollowerGraph, cfg: ContagionConfig, seed: int) -> Corpus:
    if cfg.promotion is None:
        raise ConfigError("promotion", "required for the promotion experiment")
    return simulate_corpus(g, cfg, seed)


def write_corpus(out_dir, g: FollowerGraph, corpus: Corpus, graph_config: GraphConfig | None = None):
    """Write ``graph.tsv``, ``log.csv`` and ``manifest.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_follower_graph(g, out / "graph.tsv")
    write_activation_log([s.sequence for s in corpus.stories], out / "log.csv")
    with (out / "manifest.json").open("w", encoding="utf-8") as fh:
        json.dump(corpus.manifest(graph_config), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out
