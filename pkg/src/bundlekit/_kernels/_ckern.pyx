# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled BFS / four-point kernels over CSR adjacency.

Contracts match ``pyfallback``; BFS releases the GIL so callers can run
several sources on worker threads.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.stdlib cimport free, malloc
from libc.string cimport memset

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil

ctypedef unsigned long long u64

cnp.import_array()

BACKEND = "c"


cdef void _bfs_fill(const int* indptr, const int* indices, int n,
                    int src, int* dist, int* queue) nogil:
    cdef int head = 0, tail = 0, v, w, k
    for v in range(n):
        dist[v] = -1
    dist[src] = 0
    queue[tail] = src
    tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue[tail] = w
                tail += 1


cdef void _bfs_fill16(const int* indptr, const int* indices, int n,
                      int src, cnp.int16_t* dist, int* queue) nogil:
    cdef int head = 0, tail = 0, v, w, k
    cdef cnp.int16_t dv
    for v in range(n):
        dist[v] = -1
    dist[src] = 0
    queue[tail] = src
    tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        dv = dist[v] + 1
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = dv
                queue[tail] = w
                tail += 1


def bfs_row(indptr, indices, src):
    """Distances from ``src``; -1 where unreachable."""
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef int n = ip.shape[0] - 1
    cdef cnp.ndarray[cnp.int32_t, ndim=1] dist = np.empty(n, dtype=np.int32)
    cdef int* queue = <int*> malloc(n * sizeof(int))
    cdef int s = src
    if queue == NULL:
        raise MemoryError()
    try:
        with nogil:
            _bfs_fill(<const int*> ip.data, <const int*> ix.data, n, s,
                      <int*> dist.data, queue)
    finally:
        free(queue)
    return dist


def bfs_masked(indptr, indices, src, allowed):
    """BFS distances from src restricted to vertices with allowed != 0."""
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] ok = np.ascontiguousarray(allowed, dtype=np.uint8)
    cdef int n = ip.shape[0] - 1
    cdef cnp.ndarray[cnp.int32_t, ndim=1] dist = np.full(n, -1, dtype=np.int32)
    cdef int* queue = <int*> malloc(n * sizeof(int))
    if queue == NULL:
        raise MemoryError()
    cdef cnp.int32_t[:] d = dist
    cdef const cnp.uint8_t[:] a = ok
    cdef int head = 0, tail = 0, v, w, k, s = src
    try:
        with nogil:
            if a[s]:
                d[s] = 0
                queue[tail] = s
                tail += 1
            while head < tail:
                v = queue[head]
                head += 1
                for k in range(ip[v], ip[v + 1]):
                    w = ix[k]
                    if a[w] and d[w] < 0:
                        d[w] = d[v] + 1
                        queue[tail] = w
                        tail += 1
    finally:
        free(queue)
    return dist


def bfs_multi(indptr, indices, sources):
    """Distance-to-set row: BFS from all sources at once; -1 unreachable."""
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] srcs = np.ascontiguousarray(sources, dtype=np.int64)
    cdef int n = ip.shape[0] - 1
    cdef cnp.ndarray[cnp.int32_t, ndim=1] dist = np.full(n, -1, dtype=np.int32)
    cdef int* queue = <int*> malloc(n * sizeof(int))
    if queue == NULL:
        raise MemoryError()
    cdef cnp.int32_t[:] d = dist
    cdef Py_ssize_t i
    cdef int head = 0, tail = 0, v, w, k
    try:
        with nogil:
            for i in range(srcs.shape[0]):
                v = <int> srcs[i]
                if d[v] < 0:
                    d[v] = 0
                    queue[tail] = v
                    tail += 1
            while head < tail:
                v = queue[head]
                head += 1
                for k in range(ip[v], ip[v + 1]):
                    w = ix[k]
                    if d[w] < 0:
                        d[w] = d[v] + 1
                        queue[tail] = w
                        tail += 1
    finally:
        free(queue)
    return dist


def bfs_rows_into(indptr, indices, sources, out):
    """BFS from each source s, writing row ``out[s, :]`` (int16 or int32).

    ``out`` must be the full (n, n) matrix (rows indexed by absolute
    vertex id).  int16 rows are filled in place with no staging copy.
    """
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] srcs = np.ascontiguousarray(sources, dtype=np.int64)
    cdef int n = ip.shape[0] - 1
    cdef Py_ssize_t m = srcs.shape[0]
    cdef int* dist = NULL
    cdef int* queue = <int*> malloc(n * sizeof(int))
    if queue == NULL:
        raise MemoryError()
    cdef cnp.int16_t[:, :] out16
    cdef cnp.int32_t[:, :] out32
    cdef Py_ssize_t i
    cdef int v
    try:
        if out.dtype == np.int16:
            out16 = out
            with nogil:
                for i in range(m):
                    _bfs_fill16(<const int*> ip.data, <const int*> ix.data, n,
                                <int> srcs[i], &out16[srcs[i], 0], queue)
        else:
            dist = <int*> malloc(n * sizeof(int))
            if dist == NULL:
                raise MemoryError()
            out32 = out
            with nogil:
                for i in range(m):
                    _bfs_fill(<const int*> ip.data, <const int*> ix.data, n,
                              <int> srcs[i], dist, queue)
                    for v in range(n):
                        out32[srcs[i], v] = dist[v]
    finally:
        free(dist)
        free(queue)


cdef void _msbfs_batch(const int* indptr, const int* indices, int n,
                       const long* srcs, int nsrc,
                       cnp.int16_t[:, :] out,
                       u64* seen, u64* frontier, u64* nxt) nogil:
    """Bit-parallel BFS from up to 64 sources at once."""
    cdef int v, w, k, b, d
    cdef u64 m, new
    cdef bint any_active
    memset(seen, 0, n * sizeof(u64))
    memset(frontier, 0, n * sizeof(u64))
    for b in range(nsrc):
        v = <int> srcs[b]
        seen[v] |= (<u64> 1) << b
        frontier[v] |= (<u64> 1) << b
        out[srcs[b], v] = 0
    d = 0
    any_active = True
    while any_active:
        d += 1
        any_active = False
        memset(nxt, 0, n * sizeof(u64))
        for v in range(n):
            m = frontier[v]
            if m != 0:
                for k in range(indptr[v], indptr[v + 1]):
                    nxt[indices[k]] |= m
        for v in range(n):
            new = nxt[v] & ~seen[v]
            frontier[v] = new
            if new != 0:
                any_active = True
                seen[v] |= new
                while new != 0:
                    b = __builtin_ctzll(new)
                    new &= new - 1
                    out[srcs[b], v] = <cnp.int16_t> d


def bfs_many_int16(indptr, indices, sources, out):
    """Fill out[s, :] for every s in sources (bit-parallel, 64 at a time).

    All sources must be reachable from each other or distances for
    unreachable vertices stay at whatever ``out`` held (callers pass
    connected graphs).
    """
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] srcs = np.ascontiguousarray(sources, dtype=np.int64)
    cdef int n = ip.shape[0] - 1
    cdef Py_ssize_t total = srcs.shape[0]
    cdef cnp.int16_t[:, :] o = out
    cdef u64* seen = <u64*> malloc(n * sizeof(u64))
    cdef u64* frontier = <u64*> malloc(n * sizeof(u64))
    cdef u64* nxt = <u64*> malloc(n * sizeof(u64))
    if seen == NULL or frontier == NULL or nxt == NULL:
        free(seen); free(frontier); free(nxt)
        raise MemoryError()
    cdef Py_ssize_t off
    cdef int nsrc
    try:
        with nogil:
            off = 0
            while off < total:
                nsrc = <int> (64 if total - off >= 64 else total - off)
                _msbfs_batch(<const int*> ip.data, <const int*> ix.data, n,
                             (<const long*> srcs.data) + off, nsrc,
                             o, seen, frontier, nxt)
                off += nsrc
    finally:
        free(seen)
        free(frontier)
        free(nxt)


def four_point_delta2(D):
    """Exact four-point scan; returns (2*delta, witness quadruple)."""
    cdef cnp.ndarray[cnp.int32_t, ndim=2] M = np.ascontiguousarray(D, dtype=np.int32)
    cdef int n = M.shape[0]
    cdef const cnp.int32_t[:, :] d = M
    cdef long best = -1, s1, s2, s3, mx, mid, val
    cdef int bi = 0, bj = 0, bk = 0, bl = 0
    cdef int i, j, k, l
    with nogil:
        for i in range(n - 3):
            for j in range(i + 1, n - 2):
                for k in range(j + 1, n - 1):
                    for l in range(k + 1, n):
                        s1 = d[i, j] + d[k, l]
                        s2 = d[i, k] + d[j, l]
                        s3 = d[i, l] + d[j, k]
                        if s1 >= s2:
                            if s2 >= s3:
                                mx = s1; mid = s2
                            elif s1 >= s3:
                                mx = s1; mid = s3
                            else:
                                mx = s3; mid = s1
                        else:
                            if s1 >= s3:
                                mx = s2; mid = s1
                            elif s2 >= s3:
                                mx = s2; mid = s3
                            else:
                                mx = s3; mid = s2
                        val = mx - mid
                        if val > best:
                            best = val
                            bi = i; bj = j; bk = k; bl = l
    return best, (bi, bj, bk, bl)
