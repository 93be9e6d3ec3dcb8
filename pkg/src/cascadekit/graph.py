"""Immutable directed follower graph.

An edge ``u -> v`` means *u follows v*: u watches v's activity, so
information flows from v to u.  Ids are interned to dense integer indices at
construction and both adjacency directions are stored as CSR arrays.
"""
from __future__ import annotations

import json
import logging
from collections.abc import Hashable, Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._arrays import csr_from_pairs

log = logging.getLogger(__name__)

__all__ = [
    "FollowerGraph",
    "GraphFormatError",
    "UnknownUserError",
    "parse_id",
    "load_follower_graph",
    "save_follower_graph",
    "followers",
    "followees",
    "degree_distribution",
    "ccdf",
]


class GraphFormatError(ValueError):
    """Malformed edge-list line."""

    def __init__(self, path, lineno: int, line: str, reason: str):
        self.path = str(path)
        self.lineno = lineno
        self.line = line
        super().__init__(f"{path}:{lineno}: {reason}: {line!r}")


class UnknownUserError(KeyError):
    pass


def parse_id(token: str) -> Hashable:
    """Canonical integers become ``int``; anything else stays a string.

    ``"007"`` is kept as a string so it never collides with ``7``.
    """
    if token.isdigit() and (token == "0" or token[0] != "0"):
        return int(token)
    return token


@dataclass(frozen=True, eq=False)
class FollowerGraph:
    """Follower graph over dense indices ``0..n-1``.

    ``labels[i]`` is the external id of node ``i``.  ``out_*`` is the
    followee adjacency (who ``i`` follows), ``in_*`` the follower adjacency.
    """

    labels: tuple
    index: dict
    out_indptr: np.ndarray
    out_indices: np.ndarray
    in_indptr: np.ndarray
    in_indices: np.ndarray
    dropped_self_loops: int = 0
    collapsed_duplicates: int = 0

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[Hashable, Hashable]],
        nodes: Iterable[Hashable] = (),
    ) -> "FollowerGraph":
        """Build from ``(follower, followee)`` pairs plus optional extra nodes."""
        index: dict = {}
        labels: list = []

        def intern(x):
            i = index.get(x)
            if i is None:
                i = index[x] = len(labels)
                labels.append(x)
            return i

        src, dst = [], []
        self_loops = 0
        for u, v in edges:
            # a self-loop line does not introduce its node
            if u == v:
                self_loops += 1
                continue
            src.append(intern(u))
            dst.append(intern(v))
        for x in nodes:
            intern(x)
        return cls._from_indices(
            labels, index, np.asarray(src, np.int64), np.asarray(dst, np.int64), self_loops
        )

    @classmethod
    def _from_indices(cls, labels, index, src, dst, self_loops=0) -> "FollowerGraph":
        n = len(labels)
        if src.size:
            key = np.unique(src * n + dst)
            duplicates = int(src.size - key.size)
            src, dst = key // n, key % n
        else:
            duplicates = 0
        out_indptr, out_indices = csr_from_pairs(src, dst, n)
        in_indptr, in_indices = csr_from_pairs(dst, src, n)
        for a in (out_indptr, out_indices, in_indptr, in_indices):
            a.setflags(write=False)
        return cls(
            tuple(labels), dict(index), out_indptr, out_indices, in_indptr, in_indices,
            self_loops, duplicates,
        )

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return int(self.out_indices.size)

    def __len__(self) -> int:
        return self.n_nodes

    def __contains__(self, user) -> bool:
        return user in self.index

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(follower, followee)`` index arrays, sorted by follower."""
        src = np.repeat(np.arange(self.n_nodes), np.diff(self.out_indptr))
        return src, self.out_indices

    def edges(self) -> set[tuple]:
        lab = self.labels
        src, dst = self.edge_arrays()
        return {(lab[u], lab[v]) for u, v in zip(src.tolist(), dst.tolist())}

    def in_degree(self) -> np.ndarray:
        """Followers per node."""
        return np.diff(self.in_indptr)

    def out_degree(self) -> np.ndarray:
        """Followees per node."""
        return np.diff(self.out_indptr)

    def follower_indices(self, i: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[i]:self.in_indptr[i + 1]]

    def followee_indices(self, i: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[i]:self.out_indptr[i + 1]]

    def summary(self) -> dict:
        return {
            "nodes": self.n_nodes,
            "edges": self.n_edges,
            "dropped_self_loops": self.dropped_self_loops,
            "collapsed_duplicates": self.collapsed_duplicates,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary())


def followers(g: FollowerGraph, v, strict: bool = False) -> set:
    """Users following ``v``.

    An unknown ``v`` gives an empty set, or :class:`UnknownUserError` when
    ``strict`` is set; callers can also test ``v in g`` first.
    """
    i = g.index.get(v)
    if i is None:
        if strict:
            raise UnknownUserError(v)
        return set()
    lab = g.labels
    return {lab[j] for j in g.follower_indices(i).tolist()}


def followees(g: FollowerGraph, u, strict: bool = False) -> set:
    """Users that ``u`` follows."""
    i = g.index.get(u)
    if i is None:
        if strict:
            raise UnknownUserError(u)
        return set()
    lab = g.labels
    return {lab[j] for j in g.followee_indices(i).tolist()}


def load_follower_graph(path, format: str = "edgelist") -> FollowerGraph:
    """Read a whitespace separated ``follower followee`` edge list.

    Lines starting with ``#`` and blank lines are skipped.  Duplicate edges
    collapse and self-loops are dropped; both are counted on the result.
    """
    if format != "edgelist":
        raise ValueError(f"unsupported graph format: {format!r}")
    path = Path(path)
    pairs = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            tok = s.split()
            if len(tok) != 2:
                raise GraphFormatError(path, lineno, s, f"expected 2 tokens, got {len(tok)}")
            pairs.append((parse_id(tok[0]), parse_id(tok[1])))
    g = FollowerGraph.from_edges(pairs)
    if g.dropped_self_loops:
        log.warning("%s: dropped %d self-loop line(s)", path, g.dropped_self_loops)
    if g.collapsed_duplicates:
        log.info("%s: collapsed %d duplicate edge(s)", path, g.collapsed_duplicates)
    return g


def save_follower_graph(g: FollowerGraph, path) -> None:
    """Write ``follower<TAB>followee`` lines; isolated nodes are not stored."""
    lab = g.labels
    src, dst = g.edge_arrays()
    with Path(path).open("w", encoding="utf-8") as fh:
        for u, v in zip(src.tolist(), dst.tolist()):
            fh.write(f"{lab[u]}\t{lab[v]}\n")


def degree_distribution(g: FollowerGraph, direction: str = "in") -> dict[int, int]:
    """Histogram ``degree -> node count``.

    ``direction="in"`` counts followers per user (fans), ``"out"`` counts
    followees per user.
    """
    if direction == "in":
        deg = g.in_degree()
    elif direction == "out":
        deg = g.out_degree()
    else:
        raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")
    values, counts = np.unique(deg, return_counts=True)
    return dict(zip(values.tolist(), counts.tolist()))


def ccdf(hist: dict) -> list[tuple]:
    """Empirical CCDF ``P(X >= value)`` rows ``(value, count, ccdf)``, ascending."""
    total = sum(hist.values())
    rows = []
    remaining = total
    for value in sorted(hist):
        count = hist[value]
        rows.append((value, count, remaining / total if total else 0.0))
        remaining -= count
    return rows
