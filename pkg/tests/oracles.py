"""Independent reference computations used to freeze expected values.

Nothing here imports the algorithms under test: complexes are read only
through their face lists, and every quantity is recomputed from definitions
with plain Python, numpy and networkx.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb

import networkx as nx
import numpy as np


# ---------------------------------------------------------------- linear algebra over F2


def gf2_rank(m: np.ndarray) -> int:
    a = (np.array(m, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape if a.ndim == 2 else (0, 0)
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i, c]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def faces_of(x) -> dict[int, list[tuple]]:
    return {d: [tuple(f) for f in x.faces[d]] for d in range(-1, x.top_dim + 1)}


def boundary_matrix(x, k: int) -> np.ndarray:
    """Dense boundary C_k -> C_{k-1} from vertex deletion."""
    fs = faces_of(x)
    lower = fs.get(k - 1, [])
    upper = fs.get(k, [])
    pos = {f: i for i, f in enumerate(lower)}
    m = np.zeros((len(lower), len(upper)), dtype=np.uint8)
    for j, f in enumerate(upper):
        for i in range(len(f)):
            m[pos[f[:i] + f[i + 1:]], j] ^= 1
    return m


def reduced_betti(x, k: int) -> int:
    nk = len(x.faces.get(k, []))
    r_k = gf2_rank(boundary_matrix(x, k)) if k >= 0 else 0
    r_k1 = gf2_rank(boundary_matrix(x, k + 1)) if k + 1 <= x.top_dim else 0
    return nk - r_k - r_k1


def span(vectors: list[int]) -> set[int]:
    out = {0}
    for v in vectors:
        out |= {u ^ v for u in out}
    return out


def columns_as_ints(m: np.ndarray) -> list[int]:
    return [sum(1 << i for i in np.nonzero(m[:, j])[0].tolist()) for j in range(m.shape[1])]


def apply_int(m: np.ndarray, v: int) -> int:
    out = 0
    for j, c in enumerate(columns_as_ints(m)):
        if v >> j & 1:
            out ^= c
    return out


# ---------------------------------------------------------------- weights and expansion


def top_face_weights(x, k: int) -> tuple[list[int], int]:
    """Integer counts c(tau) = #{top faces containing tau} and the common denominator."""
    n = x.top_dim
    tops = [frozenset(f) for f in x.faces[n]]
    counts = [sum(1 for t in tops if set(f) <= t) for f in x.faces[k]]
    return counts, comb(n + 1, k + 1) * len(tops)


def exp_brute(x, k: int, kind: str = "b"):
    """min over phi outside V of w(d phi) / min_{psi in V} w(phi + psi); V = B^k or Z^k.

    Returns None when every cochain lies in V.
    """
    d = boundary_matrix(x, k + 1).T  # coboundary C^k -> C^{k+1}
    if kind == "b":
        v = span(columns_as_ints(boundary_matrix(x, k).T)) if k >= 1 else span(
            [(1 << len(x.faces[0])) - 1])
    else:
        nk = len(x.faces[k])
        v = {phi for phi in range(1 << nk) if apply_int(d, phi) == 0}
    ck, dk = top_face_weights(x, k)
    ck1, dk1 = top_face_weights(x, k + 1)

    def w(counts, mask):
        return sum(c for i, c in enumerate(counts) if mask >> i & 1)

    best = None
    dcols = columns_as_ints(d)
    for phi in range(1 << len(x.faces[k])):
        if phi in v:
            continue
        dphi = 0
        for j, c in enumerate(dcols):
            if phi >> j & 1:
                dphi ^= c
        r = Fraction(w(ck1, dphi) * dk, min(w(ck, phi ^ psi) for psi in v) * dk1)
        if best is None or r < best:
            best = r
    return best


def cheeger_brute(nverts: int, edges: list[tuple[int, int]]) -> Fraction:
    """min |E(A, A^c)| / min(deg(A), deg(A^c)) over proper nonempty A."""
    deg = [0] * nverts
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    total = sum(deg)
    best = None
    for r in range(1, nverts):
        for a in itertools.combinations(range(nverts), r):
            s = set(a)
            cut = sum(1 for u, v in edges if (u in s) != (v in s))
            vol = sum(deg[v] for v in s)
            val = Fraction(cut, min(vol, total - vol))
            if best is None or val < best:
                best = val
    return best


def graph_of(x) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(v for (v,) in x.faces[0])
    g.add_edges_from(tuple(e) for e in x.faces.get(1, []))
    return g


def radius(x) -> int:
    return nx.radius(graph_of(x))


def walk_eigenvalues(w: np.ndarray) -> np.ndarray:
    """Eigenvalues of the non-symmetric D^-1 W, real parts, descending."""
    p = w / w.sum(axis=1, keepdims=True)
    return np.sort(np.linalg.eigvals(p).real)[::-1]


# ---------------------------------------------------------------- matrices over F_p


def mat_mul_mod(a, b, p):
    n = len(a)
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(n)) % p for j in range(n)) for i in range(n))


def elementary_mod(n, i, j, r, p):
    return tuple(tuple((1 if a == b else 0) + (r % p if (a, b) == (i - 1, j - 1) else 0) for b in range(n))
                 for a in range(n))


def closure_mod(gens, p) -> set:
    n = len(gens[0])
    ident = tuple(tuple(int(a == b) for b in range(n)) for a in range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = mat_mul_mod(g, s, p)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return seen


def unip_order(n_plus_1: int, q: int) -> int:
    return q ** comb(n_plus_1, 2)


def relation_count(order: int) -> int:
    """Pairs (g1, g2) of nontrivial elements with g1 g2 nontrivial: (m - 1)(m - 2)."""
    return (order - 1) * (order - 2)


def p_poly(x: int, y: int) -> int:
    return 16 * y**2 + 6 * x**2 + 20 * x * y + 24 * y + 10 * x + 1
