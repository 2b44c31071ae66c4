"""Pure numpy/python implementations of the hot kernels.

Same contracts as the compiled extension in ``_ckern``; used when the
extension is not built or when ``BUNDLEKIT_PURE=1``.  Outputs are
bit-identical to the compiled versions (BFS distances are unique, the
four-point scan is an exact max).
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def bfs_row(indptr: np.ndarray, indices: np.ndarray, src: int) -> np.ndarray:
    """Distances from ``src`` to every vertex; -1 where unreachable."""
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int32)
    dist[src] = 0
    frontier = np.array([src], dtype=np.int64)
    d = 0
    while frontier.size:
        d += 1
        # gather all neighbors of the frontier in one shot
        starts = indptr[frontier]
        ends = indptr[frontier + 1]
        counts = ends - starts
        take = np.repeat(starts, counts) + _ranges(counts)
        nbrs = indices[take]
        nbrs = nbrs[dist[nbrs] < 0]
        if nbrs.size == 0:
            break
        frontier = np.unique(nbrs)
        dist[frontier] = d
    return dist


def _ranges(counts: np.ndarray) -> np.ndarray:
    """[0..c0), [0..c1), ... concatenated."""
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    out = np.ones(total, dtype=np.int64)
    out[0] = 0
    cuts = np.cumsum(counts)[:-1]
    out[cuts] = 1 - counts[:-1]
    return np.cumsum(out)


def bfs_rows_into(
    indptr: np.ndarray,
    indices: np.ndarray,
    sources: np.ndarray,
    out: np.ndarray,
) -> None:
    """BFS from each source s, writing row ``out[s, :]`` of the full matrix."""
    for s in sources:
        out[int(s), :] = bfs_row(indptr, indices, int(s))


def bfs_masked(indptr: np.ndarray, indices: np.ndarray, src: int,
               allowed: np.ndarray) -> np.ndarray:
    """BFS distances from src restricted to vertices with allowed != 0."""
    n = len(indptr) - 1
    ok = np.asarray(allowed, dtype=bool)
    dist = np.full(n, -1, dtype=np.int32)
    if not ok[src]:
        return dist
    dist[src] = 0
    frontier = np.array([src], dtype=np.int64)
    d = 0
    while frontier.size:
        d += 1
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        take = np.repeat(starts, counts) + _ranges(counts)
        nbrs = indices[take]
        nbrs = nbrs[ok[nbrs] & (dist[nbrs] < 0)]
        if nbrs.size == 0:
            break
        frontier = np.unique(nbrs)
        dist[frontier] = d
    return dist


def bfs_multi(indptr: np.ndarray, indices: np.ndarray, sources) -> np.ndarray:
    """Distance-to-set row: BFS from all sources at once; -1 unreachable."""
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int32)
    frontier = np.unique(np.asarray(sources, dtype=np.int64))
    dist[frontier] = 0
    d = 0
    while frontier.size:
        d += 1
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        take = np.repeat(starts, counts) + _ranges(counts)
        nbrs = indices[take]
        nbrs = nbrs[dist[nbrs] < 0]
        if nbrs.size == 0:
            break
        frontier = np.unique(nbrs)
        dist[frontier] = d
    return dist


def bfs_many_int16(
    indptr: np.ndarray,
    indices: np.ndarray,
    sources: np.ndarray,
    out: np.ndarray,
) -> None:
    """Fill out[s, :] for every s in sources."""
    bfs_rows_into(indptr, indices, sources, out)


def four_point_delta2(D: np.ndarray) -> tuple[int, tuple[int, int, int, int]]:
    """Exact four-point hyperbolicity scan.

    Returns ``(2*delta, (i, j, k, l))`` maximizing (largest pair-sum minus
    second largest) over all vertex quadruples i<j<k<l.
    """
    n = D.shape[0]
    Dw = D.astype(np.int64)
    best = -1
    wit = (0, 0, 0, 0)
    for i in range(n - 3):
        Di = Dw[i]
        for j in range(i + 1, n - 2):
            sub = Dw[j + 1 :, j + 1 :]
            u = Di[j + 1 :]
            v = Dw[j, j + 1 :]
            s1 = Di[j] + sub
            s2 = u[:, None] + v[None, :]
            s3 = u[None, :] + v[:, None]
            mx = np.maximum(np.maximum(s1, s2), s3)
            mn = np.minimum(np.minimum(s1, s2), s3)
            mid = s1 + s2 + s3 - mx - mn
            val = mx - mid
            np.fill_diagonal(val, -1)
            # upper triangle only: k < l
            val = np.triu(val, k=1)
            m = int(val.max(initial=-1))
            if m > best:
                kk, ll = np.unravel_index(int(val.argmax()), val.shape)
                best = m
                wit = (i, j, j + 1 + int(kk), j + 1 + int(ll))
    return best, wit
