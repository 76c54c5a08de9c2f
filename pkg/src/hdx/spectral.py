"""Random-walk spectra of weighted 1-skeletons and the local spectral sweep.

Convention: the walk is non-lazy and steps along an edge with probability
proportional to the edge weight, where an edge's weight is the number of top
faces of the (link) complex containing it. Its transition matrix D^-1 W is
similar to the symmetric D^-1/2 W D^-1/2, whose spectrum is computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import networkx as nx
import numpy as np

from .complex import SimplicialComplex, link, weights
from .errors import Disconnected

WALK_CONVENTION = "non-lazy walk, edge weights = top-face counts of the complex"
DENSE_LIMIT = 4096


@dataclass(frozen=True)
class WeightedGraph:
    vertices: tuple[int, ...]
    weights: np.ndarray  # symmetric (V, V)

    def nx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(len(self.vertices)))
        rows, cols = np.nonzero(np.triu(self.weights))
        g.add_edges_from(zip(rows.tolist(), cols.tolist()))
        return g


def weighted_one_skeleton(x: SimplicialComplex) -> WeightedGraph:
    """1-skeleton of x weighted by the number of top faces containing each edge."""
    verts = tuple(x.vertices)
    pos = {v: i for i, v in enumerate(verts)}
    w = np.zeros((len(verts), len(verts)))
    if x.top_dim >= 1:
        counts = weights(x).counts[1]
        for (u, v), c in zip(x.faces[1], counts):
            w[pos[u], pos[v]] = w[pos[v], pos[u]] = float(c)
    return WeightedGraph(verts, w)


def graph_from_edges(nverts: int, edges: Sequence[tuple[int, int]], edge_weights=None) -> WeightedGraph:
    w = np.zeros((nverts, nverts))
    for i, (u, v) in enumerate(edges):
        c = 1.0 if edge_weights is None else float(edge_weights[i])
        w[u, v] = w[v, u] = c
    return WeightedGraph(tuple(range(nverts)), w)


def _symmetric_walk(g: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    deg = g.weights.sum(axis=1)
    if len(deg) == 0 or (deg <= 0).any() or not nx.is_connected(g.nx()):
        raise Disconnected("walk needs a connected graph without isolated vertices")
    s = 1.0 / np.sqrt(deg)
    return g.weights * s[:, None] * s[None, :], np.sqrt(deg)


def walk_spectrum(g: WeightedGraph) -> np.ndarray:
    """All walk eigenvalues, descending."""
    m, _ = _symmetric_walk(g)
    return np.sort(np.linalg.eigvalsh(m))[::-1]


def _power_second(m: np.ndarray, top: np.ndarray, seed: int = 0, tol: float = 1e-14,
                  max_iter: int = 200000) -> tuple[float, bool]:
    """Second-largest eigenvalue by power iteration on M + I with the top eigenvector deflated."""
    u = top / np.linalg.norm(top)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(len(u))
    v -= u * (u @ v)
    v /= np.linalg.norm(v)
    shifted = m + np.eye(len(u))
    prev = None
    for _ in range(max_iter):
        w = shifted @ v
        w -= u * (u @ w)
        norm = np.linalg.norm(w)
        if norm < 1e-150:
            return -1.0, True
        v = w / norm
        lam = float(v @ (m @ v))
        if prev is not None and abs(lam - prev) < tol:
            return lam, True
        prev = lam
    return lam, False


def second_eigenvalue(g: WeightedGraph, method: str = "auto", seed: int = 0) -> float:
    """Second-largest eigenvalue of the walk; dense up to DENSE_LIMIT vertices."""
    m, top = _symmetric_walk(g)
    if len(top) < 2:
        raise Disconnected("a walk on one vertex has no second eigenvalue")
    if method == "dense" or (method == "auto" and len(top) <= DENSE_LIMIT):
        return float(np.sort(np.linalg.eigvalsh(m))[-2])
    lam, _ = _power_second(m, top, seed)
    return lam


def second_eigenvalue_power(g: WeightedGraph, seed: int = 0) -> tuple[float, bool]:
    """Power-iteration route; returns (value, converged)."""
    m, top = _symmetric_walk(g)
    return _power_second(m, top, seed)


def _psd_exact(q: list[list[int]]) -> bool:
    """Exact positive-semidefiniteness test by symmetric elimination over the rationals."""
    a = [[Fraction(v) for v in row] for row in q]
    alive = list(range(len(a)))
    while alive:
        p = max(alive, key=lambda i: a[i][i])
        d = a[p][p]
        alive.remove(p)
        if d < 0:
            return False
        rowp = a[p]
        if d == 0:
            if any(rowp[j] != 0 for j in alive):
                return False
            continue
        for i in alive:
            f = rowp[i]
            if f == 0:
                continue
            f /= d
            ai = a[i]
            for j in alive:
                if rowp[j]:
                    ai[j] -= f * rowp[j]
    return True


def certify_second_eigenvalue(g: WeightedGraph, mu: Fraction) -> bool:
    """Exact check that the walk's second eigenvalue is at most mu (integer edge weights).

    lambda_2 <= mu iff mu*D - W + (1 - mu)/vol * (D1)(D1)^T is positive
    semidefinite; the matrix is scaled to integers and tested exactly.
    """
    w = np.rint(g.weights).astype(np.int64)
    if not np.array_equal(w, g.weights):
        raise ValueError("exact certificate needs integer edge weights")
    _symmetric_walk(g)
    mu = Fraction(mu)
    deg = w.sum(axis=1)
    vol = int(deg.sum())
    p, r = mu.numerator, mu.denominator
    q = (p * vol * np.diag(deg) - r * vol * w).astype(object) + (r - p) * np.outer(deg, deg).astype(object)
    return _psd_exact(q.tolist())


def certified_second_eigenvalue_bound(g: WeightedGraph, max_den: int = 1000) -> Fraction:
    """Least rational mu with denominator <= max_den and mu >= lambda_2 - 1e-9 that certifies exactly."""
    lam = second_eigenvalue(g)
    mu = Fraction(lam - 1e-9).limit_denominator(max_den)
    step = Fraction(1, max_den)
    while mu < lam - 1e-9:
        mu += step
    for _ in range(64):
        if certify_second_eigenvalue(g, mu):
            return mu
        mu += step
    raise ArithmeticError("no certifiable bound found near the floating-point eigenvalue")


@dataclass
class LinkReport:
    face: tuple[int, ...]
    vertices: int
    connected: bool
    lambda2: float | None
    bipartite: bool
    min_eigenvalue: float | None

    def to_dict(self) -> dict:
        return {
            "face": list(self.face),
            "vertices": self.vertices,
            "connected": self.connected,
            "lambda2": None if self.lambda2 is None else round(self.lambda2, 12),
            "bipartite": self.bipartite,
            "min_eigenvalue": None if self.min_eigenvalue is None else round(self.min_eigenvalue, 12),
        }


@dataclass
class SweepReport:
    threshold: float
    links: list[LinkReport] = field(default_factory=list)

    @property
    def all_connected(self) -> bool:
        return all(r.connected for r in self.links)

    @property
    def max_lambda2(self) -> float | None:
        vals = [r.lambda2 for r in self.links if r.lambda2 is not None]
        return max(vals) if vals else None

    @property
    def is_local_spectral_expander(self) -> bool:
        return self.all_connected and all(r.lambda2 <= self.threshold + 1e-12 for r in self.links)

    def to_dict(self) -> dict:
        by_dim: dict[int, dict] = {}
        for r in self.links:
            d = by_dim.setdefault(len(r.face) - 1, {"count": 0, "lambda2_values": {}, "bipartite": 0, "connected": 0})
            d["count"] += 1
            d["bipartite"] += int(r.bipartite)
            d["connected"] += int(r.connected)
            key = "disconnected" if r.lambda2 is None else f"{r.lambda2:.12f}"
            d["lambda2_values"][key] = d["lambda2_values"].get(key, 0) + 1
        return {
            "convention": WALK_CONVENTION,
            "threshold": self.threshold,
            "all_connected": self.all_connected,
            "max_lambda2": None if self.max_lambda2 is None else round(self.max_lambda2, 12),
            "local_spectral_expander": self.is_local_spectral_expander,
            "by_dimension": {str(k): v for k, v in sorted(by_dim.items())},
        }


def local_spectral_sweep(x: SimplicialComplex, lambda_threshold: float = 1.0) -> SweepReport:
    """Connectivity and walk lambda_2 of the 1-skeleton of every link of a face of dim -1..n-2."""
    report = SweepReport(lambda_threshold)
    for k in range(-1, x.top_dim - 1):
        for tau in x.faces[k]:
            lk = link(x, tau)
            g = weighted_one_skeleton(lk)
            graph = g.nx()
            bip = nx.is_bipartite(graph) if len(g.vertices) else False
            try:
                spec = walk_spectrum(g)
                report.links.append(LinkReport(tau, len(g.vertices), True, float(spec[1]), bip, float(spec[-1])))
            except Disconnected:
                report.links.append(LinkReport(tau, len(g.vertices), False, None, bip, None))
    return report
