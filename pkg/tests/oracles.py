"""Independent brute-force oracles for the test suite.

Deliberately naive re-implementations (dict BFS, literal enumeration of
all geodesics, O(n^4) quadruple scans) kept free of any bundlekit
internals so they can certify the library's fast paths.
"""

from collections import deque
from itertools import combinations


def adj_from_edges(n, edges):
    adj = {v: set() for v in range(n)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return {v: sorted(ws) for v, ws in adj.items()}


def bfs_dict(adj, s):
    dist = {s: 0}
    q = deque([s])
    while q:
        v = q.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def all_distances(n, edges):
    adj = adj_from_edges(n, edges)
    return {v: bfs_dict(adj, v) for v in range(n)}


def all_geodesics(adj, dist_from, u, v):
    """Every geodesic vertex path u -> v (DFS over the shortest-path DAG)."""
    du, dv = dist_from[u], dist_from[v]
    out = []

    def rec(path):
        x = path[-1]
        if x == v:
            out.append(list(path))
            return
        for w in adj[x]:
            if du[w] == du[x] + 1 and du[w] + dv[w] == du[v]:
                path.append(w)
                rec(path)
                path.pop()

    rec([u])
    return out


def halfpoints(path):
    pts = []
    for i, x in enumerate(path):
        pts.append((x, x))
        if i + 1 < len(path):
            a, b = path[i], path[i + 1]
            pts.append((min(a, b), max(a, b)))
    return pts


def d2(D, p, q):
    if p == q:
        return 0
    m = min(D[p[0]][q[0]], D[p[0]][q[1]], D[p[1]][q[0]], D[p[1]][q[1]])
    return 2 * m + (p[0] != p[1]) + (q[0] != q[1])


def brute_slim_insize_thin(n, edges):
    """Exhaustive slimness / insize / thinness over all triangles and all
    geodesic choices, at half-point resolution.  Returns doubled values."""
    adj = adj_from_edges(n, edges)
    dist_from = {v: bfs_dict(adj, v) for v in range(n)}
    D = [[dist_from[u][v] for v in range(n)] for u in range(n)]
    geos = {}
    for u in range(n):
        for v in range(u, n):
            geos[(u, v)] = all_geodesics(adj, dist_from, u, v)

    def G(u, v):
        if u <= v:
            return geos[(u, v)]
        return [list(reversed(p)) for p in geos[(v, u)]]

    slim2 = ins2 = thn2 = 0
    for a, b, c in combinations(range(n), 3):
        for s_ab in G(a, b):
            for s_ac in G(a, c):
                for s_bc in G(b, c):
                    P1, P2, P3 = (halfpoints(s_ab), halfpoints(s_ac),
                                  halfpoints(s_bc))
                    for P, others in ((P1, (P2, P3)), (P2, (P1, P3)),
                                      (P3, (P1, P2))):
                        T = [q for o in others for q in o]
                        for p in P:
                            slim2 = max(slim2,
                                        min(d2(D, p, q) for q in T))
                    rho_a = D[a][b] + D[a][c] - D[b][c]
                    rho_b = D[a][b] + D[b][c] - D[a][c]
                    rho_c = D[a][c] + D[b][c] - D[a][b]
                    cab, cac, cbc = P1[rho_a], P2[rho_a], P3[rho_b]
                    ins2 = max(ins2, d2(D, cab, cac), d2(D, cab, cbc),
                               d2(D, cac, cbc))
                    R1, R2 = list(reversed(P1)), list(reversed(P2))
                    for t in range(rho_a + 1):
                        thn2 = max(thn2, d2(D, P1[t], P2[t]))
                    for t in range(rho_b + 1):
                        thn2 = max(thn2, d2(D, R1[t], P3[t]))
                    for t in range(rho_c + 1):
                        thn2 = max(thn2, d2(D, R2[t],
                                            list(reversed(P3))[t]))
    return slim2, ins2, thn2


def brute_four_point(n, edges):
    """O(n^4) quadruple scan for the four-point constant."""
    D = all_distances(n, edges)
    best = 0
    for i, j, k, l in combinations(range(n), 4):
        s = sorted([D[i][j] + D[k][l], D[i][k] + D[j][l],
                    D[i][l] + D[j][k]])
        best = max(best, s[2] - s[1])
    return best / 2


def random_connected_graph(rng, n, extra_edges):
    """Random tree plus chords; deterministic under the given rng."""
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    for _ in range(extra_edges):
        u, v = rng.choice(n, 2, replace=False)
        u, v = int(min(u, v)), int(max(u, v))
        if u != v:
            edges.append((u, v))
    return n, sorted(set(edges))
