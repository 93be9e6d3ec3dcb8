"""Activation DAGs, seeds and cascades of a single story.

Nodes of an :class:`ActivationDAG` are identified by their *position* in the
validated activation order, so every edge ``v -> u`` satisfies
``pos(v) < pos(u)`` and position order is a topological order.
"""
from __future__ import annotations

import json
import logging
from collections.abc import Hashable
from dataclasses import dataclass, field

import numpy as np

from ._arrays import bfs_levels, csr_from_pairs, gather
from .events import ActivationSequence
from .graph import FollowerGraph

log = logging.getLogger(__name__)

__all__ = [
    "ActivationDAG",
    "Cascade",
    "ObservedForest",
    "build_activation_dag",
    "identify_seeds",
    "extract_cascades",
    "principal_cascade",
    "sample_observed_tree",
    "sample_observed_depths",
]


@dataclass(frozen=True, eq=False)
class ActivationDAG:
    """Activation edges of one story.

    ``src[k] -> dst[k]`` is an edge from an earlier activated followee to a
    later activated follower, both given as positions into ``nodes``.  Edges
    are sorted by ``(dst, src)``.
    """

    story: str
    nodes: tuple
    src: np.ndarray
    dst: np.ndarray
    submitter: Hashable = None
    in_indptr: np.ndarray = field(repr=False, default=None)
    out_indptr: np.ndarray = field(repr=False, default=None)
    out_indices: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        n = len(self.nodes)
        src = np.asarray(self.src, dtype=np.int64)
        dst = np.asarray(self.dst, dtype=np.int64)
        order = np.lexsort((src, dst))
        src, dst = src[order], dst[order]
        in_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(dst, minlength=n), out=in_indptr[1:])
        out_indptr, out_indices = csr_from_pairs(src, dst, n)
        for name, val in [("src", src), ("dst", dst), ("in_indptr", in_indptr),
                          ("out_indptr", out_indptr), ("out_indices", out_indices)]:
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return int(self.src.size)

    def position(self, user) -> int:
        try:
            return self.nodes.index(user)
        except ValueError:
            raise KeyError(user) from None

    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_indptr)

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    def edges(self) -> set[tuple]:
        """Edges as ``(earlier user, later user)`` label pairs."""
        nd = self.nodes
        return {(nd[v], nd[u]) for v, u in zip(self.src.tolist(), self.dst.tolist())}

    def in_edges(self, user) -> list:
        i = self.position(user)
        nd = self.nodes
        return [nd[v] for v in self.src[self.in_indptr[i]:self.in_indptr[i + 1]].tolist()]

    def out_edges(self, user) -> list:
        i = self.position(user)
        nd = self.nodes
        return [nd[u] for u in self.out_indices[self.out_indptr[i]:self.out_indptr[i + 1]].tolist()]

    def seed_positions(self) -> np.ndarray:
        return np.flatnonzero(self.in_degree() == 0)

    def to_dict(self) -> dict:
        nd = self.nodes
        return {
            "story_id": self.story,
            "nodes": list(nd),
            "edges": [[nd[v], nd[u]] for v, u in zip(self.src.tolist(), self.dst.tolist())],
            "seeds": [nd[i] for i in self.seed_positions().tolist()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def build_activation_dag(g: FollowerGraph, s: ActivationSequence) -> ActivationDAG:
    """Connect every activated user to the earlier activated users it follows.

    Users absent from ``g`` become isolated nodes.
    """
    n = len(s.users)
    idx = np.fromiter((g.index.get(u, -1) for u in s.users), dtype=np.int64, count=n)
    known = np.flatnonzero(idx >= 0)
    if known.size == 0 or g.n_edges == 0:
        empty = np.zeros(0, dtype=np.int64)
        return ActivationDAG(s.story, tuple(s.users), empty, empty, s.submitter)
    if known.size * 8 < g.n_nodes:
        lookup = dict(zip(idx[known].tolist(), known.tolist()))
        owner, followee = gather(g.out_indptr, g.out_indices, idx[known])
        fpos = np.fromiter((lookup.get(f, -1) for f in followee.tolist()),
                           dtype=np.int64, count=followee.size)
    else:
        pos = np.full(g.n_nodes, -1, dtype=np.int64)
        pos[idx[known]] = known
        owner, followee = gather(g.out_indptr, g.out_indices, idx[known])
        fpos = pos[followee]
    upos = known[owner]
    keep = (fpos >= 0) & (fpos < upos)
    return ActivationDAG(s.story, tuple(s.users), fpos[keep], upos[keep], s.submitter)


def identify_seeds(d: ActivationDAG) -> list:
    """Activated users with no incoming activation edge, in temporal order."""
    nd = d.nodes
    return [nd[i] for i in d.seed_positions().tolist()]


@dataclass(frozen=True, eq=False)
class Cascade:
    """A seed and everything reachable from it along activation edges.

    ``positions`` are ascending DAG positions of the members; ``src``/``dst``
    are the activation edges leaving members (all of which stay inside the
    cascade).  ``flagged`` marks a cascade rooted at a non-seed node.
    """

    dag: ActivationDAG = field(repr=False)
    seed_position: int
    positions: np.ndarray = field(repr=False)
    src: np.ndarray = field(repr=False)
    dst: np.ndarray = field(repr=False)
    flagged: bool = False

    @property
    def seed(self):
        return self.dag.nodes[self.seed_position]

    @property
    def size(self) -> int:
        return int(self.positions.size)

    @property
    def members(self) -> frozenset:
        nd = self.dag.nodes
        return frozenset(nd[i] for i in self.positions.tolist())

    @property
    def edges(self) -> set[tuple]:
        nd = self.dag.nodes
        return {(nd[v], nd[u]) for v, u in zip(self.src.tolist(), self.dst.tolist())}

    def __repr__(self) -> str:
        return f"Cascade(seed={self.seed!r}, size={self.size}, edges={self.src.size})"


def _cascade_from(d: ActivationDAG, root: int, flagged: bool = False) -> Cascade:
    mask = bfs_levels(d.out_indptr, d.out_indices, [root], d.n_nodes) >= 0
    emask = mask[d.src]
    return Cascade(d, root, np.flatnonzero(mask), d.src[emask], d.dst[emask], flagged)


def extract_cascades(d: ActivationDAG) -> list[Cascade]:
    """One cascade per seed, in seed order.  Members may be shared."""
    return [_cascade_from(d, int(s)) for s in d.seed_positions()]


def principal_cascade(d: ActivationDAG, submitter=None) -> Cascade:
    """The cascade rooted at the story's submitter.

    If the submitter is not a seed (only possible with an explicit submitter
    override) the cascade of its reachable set is returned with
    ``flagged=True``.
    """
    if submitter is None:
        submitter = d.submitter
    try:
        root = d.position(submitter)
    except KeyError:
        raise ValueError(f"submitter {submitter!r} did not activate in story {d.story}") from None
    flagged = bool(d.in_indptr[root + 1] > d.in_indptr[root])
    if flagged:
        log.warning("story %s: submitter %r has earlier activated followees", d.story, submitter)
    return _cascade_from(d, root, flagged)


@dataclass(frozen=True, eq=False)
class ObservedForest:
    """One kept in-edge per non-seed node.

    ``parent[i]`` is the parent position of node ``i`` or ``-1`` for seeds,
    ``root[i]`` the seed its chain ends at and ``depth[i]`` the hop count to it.
    """

    dag: ActivationDAG = field(repr=False)
    parent: np.ndarray
    root: np.ndarray
    depth: np.ndarray

    @property
    def edges(self) -> set[tuple]:
        nd = self.dag.nodes
        return {(nd[p], nd[i]) for i, p in enumerate(self.parent.tolist()) if p >= 0}

    def max_depth(self) -> int:
        return int(self.depth.max()) if self.depth.size else 0

    def tree_depth(self, seed) -> int:
        """Depth of the tree rooted at ``seed``."""
        r = self.dag.position(seed)
        return int(self.depth[self.root == r].max())


def sample_observed_tree(d: ActivationDAG, rng) -> ObservedForest:
    """Keep one uniformly chosen activation edge per non-seed node.

    ``rng`` is a :class:`numpy.random.Generator` (or anything with a
    ``random(size)`` method) or an integer seed.
    """
    if not hasattr(rng, "random"):
        rng = np.random.default_rng(rng)
    n = d.n_nodes
    deg = d.in_degree()
    nonseed = np.flatnonzero(deg > 0)
    parent = np.full(n, -1, dtype=np.int64)
    if nonseed.size:
        u = np.asarray(rng.random(nonseed.size), dtype=float)
        pick = np.minimum((u * deg[nonseed]).astype(np.int64), deg[nonseed] - 1)
        parent[nonseed] = d.src[d.in_indptr[nonseed] + pick]
    root = np.arange(n, dtype=np.int64)
    depth = np.zeros(n, dtype=np.int64)
    # parents precede children, so one forward pass settles everything
    par = parent.tolist()
    rt = root.tolist()
    dp = depth.tolist()
    for i in nonseed.tolist():
        p = par[i]
        rt[i] = rt[p]
        dp[i] = dp[p] + 1
    return ObservedForest(d, parent, np.array(rt, dtype=np.int64), np.array(dp, dtype=np.int64))


def sample_observed_depths(d: ActivationDAG, rng, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Roots and depths of ``k`` independently sampled observed forests.

    Returns two ``(k, n_nodes)`` arrays.  Row ``j`` equals the forest the
    ``j``-th of ``k`` successive :func:`sample_observed_tree` calls on the
    same generator would produce.
    """
    if not hasattr(rng, "random"):
        rng = np.random.default_rng(rng)
    n = d.n_nodes
    deg = d.in_degree()
    nonseed = np.flatnonzero(deg > 0)
    root = np.tile(np.arange(n, dtype=np.int64), (k, 1))
    depth = np.zeros((k, n), dtype=np.int64)
    if nonseed.size == 0:
        return root, depth
    u = np.asarray(rng.random((k, nonseed.size)), dtype=float)
    pick = np.minimum((u * deg[nonseed]).astype(np.int64), deg[nonseed] - 1)
    parent = d.src[d.in_indptr[nonseed] + pick]
    rows = np.arange(k)
    for j, i in enumerate(nonseed.tolist()):
        p = parent[:, j]
        root[:, i] = root[rows, p]
        depth[:, i] = depth[rows, p] + 1
    return root, depth
