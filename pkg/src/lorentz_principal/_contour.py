"""Zero-contour extraction on rectangular grids (marching squares).

Crossings on cell edges are located by linear interpolation and optionally
polished with Brent's method on the exact function. Segments are linked into
polylines through shared edges; periodic axes add wrap-around cells.
"""
from __future__ import annotations

import math
from collections import defaultdict

import numpy as np
from scipy.optimize import brentq


def _edge_point(U, V, F, a, b, func):
    """Crossing on the grid edge between nodes a=(i,j) and b=(k,l)."""
    (i, j), (k, l) = a, b
    fa, fb = F[i, j], F[k, l]
    ua, va = U[i, j], V[i, j]
    ub, vb = U[k, l], V[k, l]
    t = fa / (fa - fb) if fa != fb else 0.5
    if func is not None and fa * fb < 0:
        try:
            g = lambda s: func(ua + s * (ub - ua), va + s * (vb - va))
            ga, gb = g(0.0), g(1.0)
            if np.isfinite(ga) and np.isfinite(gb) and ga * gb < 0:
                t = brentq(g, 0.0, 1.0, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
        except (ValueError, ArithmeticError):
            pass
    return np.array([ua + t * (ub - ua), va + t * (vb - va)])


def zero_contours(U, V, F, func=None, periodic=(False, False)):
    """Polylines of the zero set of F sampled on a grid.

    U, V, F have shape (nu, nv) with U varying along axis 0. When an axis is
    periodic the grid must not repeat its first row/column at the end; the
    wrap cells use shifted coordinates so polylines stay continuous.
    Returns a list of ``(points, closed)`` with points of shape (k, 2).
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    F = np.asarray(F, dtype=float)
    nu, nv = F.shape
    pu = (U[-1, 0] - U[0, 0]) * nu / (nu - 1) if periodic[0] else None
    pv = (V[0, -1] - V[0, 0]) * nv / (nv - 1) if periodic[1] else None
    if periodic[0]:
        U = np.concatenate([U, U[:1] + pu], axis=0)
        V = np.concatenate([V, V[:1]], axis=0)
        F = np.concatenate([F, F[:1]], axis=0)
    if periodic[1]:
        U = np.concatenate([U, U[:, :1]], axis=1)
        V = np.concatenate([V, V[:, :1] + pv], axis=1)
        F = np.concatenate([F, F[:, :1]], axis=1)
    mu, mv = F.shape
    S = np.where(np.isfinite(F), F >= 0, False)
    valid = np.isfinite(F)

    def key(a, b):
        ia, ja = a[0] % nu, a[1] % nv
        ib, jb = b[0] % nu, b[1] % nv
        return tuple(sorted(((ia, ja), (ib, jb))))

    points = {}
    adj = defaultdict(list)

    def edge(a, b):
        k = key(a, b)
        if k not in points:
            points[k] = (_edge_point(U, V, F, a, b, func), a)
        return k

    for i in range(mu - 1):
        for j in range(mv - 1):
            c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            if not all(valid[p] for p in c):
                continue
            s = [S[p] for p in c]
            if all(s) or not any(s):
                continue
            edges = [(c[k], c[(k + 1) % 4]) for k in range(4) if s[k] != s[(k + 1) % 4]]
            if len(edges) == 2:
                pairs = [(edges[0], edges[1])]
            else:
                centre = sum(F[p] for p in c) / 4.0
                if (centre >= 0) == s[0]:
                    # corners 0 and 2 connect through the centre; cut off 1 and 3
                    pairs = [(edges[0], edges[1]), (edges[2], edges[3])]
                else:
                    pairs = [(edges[3], edges[0]), (edges[1], edges[2])]
            for e1, e2 in pairs:
                k1, k2 = edge(*e1), edge(*e2)
                adj[k1].append(k2)
                adj[k2].append(k1)

    used = set()
    curves = []
    for start in list(adj):
        if start in used:
            continue
        # walk to one end first if the chain is open
        chain = _walk(start, adj)
        for k in chain:
            used.add(k)
        closed = len(chain) > 2 and chain[-1] in adj[chain[0]] and len(adj[chain[0]]) == 2 \
            and len(adj[chain[-1]]) == 2
        pts = [points[k][0].copy() for k in chain]
        pts = _unwrap(pts, pu, pv)
        curves.append((np.array(pts), bool(closed)))
    return curves


def _walk(start, adj):
    # find an endpoint (degree 1) reachable from start, else use start
    prev, cur = None, start
    seen = {start}
    while True:
        nxt = [k for k in adj[cur] if k != prev and k not in seen]
        if len(adj[cur]) == 1 and cur != start:
            break
        if not nxt:
            break
        prev, cur = cur, nxt[0]
        seen.add(cur)
        if len(adj[cur]) == 1:
            break
    end = cur if len(adj[cur]) == 1 else start
    chain = [end]
    seen = {end}
    prev, cur = None, end
    while True:
        nxt = [k for k in adj[cur] if k not in seen]
        if not nxt:
            break
        prev, cur = cur, nxt[0]
        seen.add(cur)
        chain.append(cur)
    return chain


def _unwrap(pts, pu, pv):
    """Make consecutive points continuous across periodic seams."""
    out = [pts[0]]
    for p in pts[1:]:
        q = p.copy()
        if pu is not None:
            q[0] -= pu * round((q[0] - out[-1][0]) / pu)
        if pv is not None:
            q[1] -= pv * round((q[1] - out[-1][1]) / pv)
        out.append(q)
    return out


def glue_polylines(polys, tol):
    """Join 3D polylines whose endpoints coincide within ``tol``.

    ``polys`` is a list of (points_xyz, payload) where payload is a list aligned
    with the points. Returns a list of (points_xyz, payload, closed).
    """
    items = [(np.asarray(p, dtype=float), list(pl)) for p, pl in polys if len(p) >= 2]
    changed = True
    while changed:
        changed = False
        for i in range(len(items)):
            for j in range(len(items)):
                if i == j:
                    continue
                pi, li = items[i]
                pj, lj = items[j]
                joined = None
                if np.linalg.norm(pi[-1] - pj[0]) <= tol:
                    joined = (np.vstack([pi, pj[1:]]), li + lj[1:])
                elif np.linalg.norm(pi[-1] - pj[-1]) <= tol:
                    joined = (np.vstack([pi, pj[::-1][1:]]), li + lj[::-1][1:])
                elif np.linalg.norm(pi[0] - pj[0]) <= tol:
                    joined = (np.vstack([pi[::-1], pj[1:]]), li[::-1] + lj[1:])
                if joined is not None:
                    items = [it for k, it in enumerate(items) if k not in (i, j)] + [joined]
                    changed = True
                    break
            if changed:
                break
    out = []
    for p, pl in items:
        closed = len(p) > 3 and np.linalg.norm(p[0] - p[-1]) <= tol
        out.append((p, pl, closed))
    return out
