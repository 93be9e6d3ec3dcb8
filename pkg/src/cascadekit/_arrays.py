import numpy as np


def gather(indptr: np.ndarray, indices: np.ndarray, rows: np.ndarray):
    """Concatenated CSR rows.

    Returns ``(owner, values)`` where ``owner[k]`` is the position in ``rows``
    that ``values[k]`` came from.
    """
    rows = np.asarray(rows, dtype=np.int64)
    starts = indptr[rows]
    counts = indptr[rows + 1] - starts
    total = int(counts.sum())
    if total == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    owner = np.repeat(np.arange(rows.size), counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return owner, indices[starts[owner] + offsets]


def csr_from_pairs(rows: np.ndarray, cols: np.ndarray, n: int):
    order = np.lexsort((cols, rows))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return indptr, cols[order]


def bfs_levels(indptr: np.ndarray, indices: np.ndarray, roots, n: int) -> np.ndarray:
    """Hop distance from the nearest root, ``-1`` where unreachable."""
    dist = np.full(n, -1, dtype=np.int64)
    frontier = np.unique(np.asarray(roots, dtype=np.int64))
    dist[frontier] = 0
    level = 0
    while frontier.size:
        level += 1
        _, nxt = gather(indptr, indices, frontier)
        nxt = np.unique(nxt[dist[nxt] < 0])
        dist[nxt] = level
        frontier = nxt
    return dist


def longest_path_lengths(n: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Length in edges of the longest path ending at each node of a DAG."""
    length = np.zeros(n, dtype=np.int64)
    if src.size == 0:
        return length
    while True:
        new = length.copy()
        np.maximum.at(new, dst, length[src] + 1)
        if np.array_equal(new, length):
            return length
        length = new
