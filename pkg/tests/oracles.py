"""Independent reference implementations used to cross-check the package.

Everything here is deliberately naive (quadratic scans, union-find, the
textbook cubic assignment algorithm) so that agreement with the fast paths
in the package is meaningful.
"""

import numpy as np


def brute_ball(points, query_row, epsilon):
    """Closed-ball neighbors by scanning every pairwise distance."""
    pts = np.asarray(points, dtype=np.float64)
    d = np.linalg.norm(pts - pts[query_row], axis=1)
    return sorted(np.nonzero(d <= epsilon)[0].tolist())


def brute_clusters(points, epsilon):
    """Connected components of the epsilon graph via union-find.

    Returns (count, labels) with labels numbered by each component's
    smallest member, matching the package convention.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        d = np.linalg.norm(pts - pts[i], axis=1)
        for j in np.nonzero(d <= epsilon)[0]:
            ri, rj = find(i), find(int(j))
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    roots = [find(i) for i in range(n)]
    order = {}
    for r in roots:
        if r not in order:
            order[r] = len(order)
    labels = np.array([order[r] for r in roots], dtype=np.int64)
    return len(order), labels


def hungarian_min_cost(cost_matrix):
    """O(n^3) Hungarian algorithm (potentials form), row -> column.

    Classic shortest-augmenting-path formulation with dual potentials u, v;
    independent of any library solver.
    """
    a = np.asarray(cost_matrix, dtype=np.float64)
    n = a.shape[0]
    assert a.shape == (n, n)
    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    match = [0] * (n + 1)  # match[j] = row assigned to column j, 1-based
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = a[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    assignment = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        assignment[match[j] - 1] = j - 1
    return assignment


def central_diff(f, x, h=1e-6):
    """Central finite-difference gradient of a scalar function on R^n."""
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for a in range(x.size):
        e = np.zeros_like(x)
        e[a] = h
        g[a] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def two_particle_closed_form(x0, y0, t):
    """Exact flow of the two-particle quadratic-cost system with a global
    cluster (epsilon = inf).

    With the cluster mean subtracted, u = X1 - X2 and w = Y1 - Y2 obey
    du/dt = 2w, dw/dt = 2u componentwise, so the solution is a cosh/sinh
    rotation; the means of X and Y are constants of motion.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    y0 = np.asarray(y0, dtype=np.float64)
    assert x0.shape[0] == 2 and y0.shape[0] == 2
    mx = x0.mean(axis=0)
    my = y0.mean(axis=0)
    u0 = x0[0] - x0[1]
    w0 = y0[0] - y0[1]
    ch, sh = np.cosh(2.0 * t), np.sinh(2.0 * t)
    u = u0 * ch + w0 * sh
    w = w0 * ch + u0 * sh
    x = np.stack([mx + 0.5 * u, mx - 0.5 * u])
    y = np.stack([my + 0.5 * w, my - 0.5 * w])
    return x, y
