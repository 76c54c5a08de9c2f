"""Cone functions built by iterated homological filling, cone volume and radius.

A k-cone function with apex v assigns to every j-face tau (-1 <= j <= k) a
(j+1)-chain Cone(tau) with Cone(empty) = {v} and the cone equation

    boundary Cone(tau) = tau + Cone(boundary tau).

Cone_0(u) is a shortest edge path from the apex to u, and Cone_j(tau) for
j >= 1 is a least filling of the j-cycle tau + Cone(boundary tau). A cycle
that is not a boundary stops the construction and is returned as an
Obstruction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .complex import PermutationAction, SimplicialComplex
from .errors import DimMismatch, NoGroupAttached, NotAFace
from .homology import (
    DEFAULT_BUDGET_LOG2,
    INFINITE,
    ChainVector,
    NoFilling,
    Operators,
    _apply,
    bits_of,
    fill,
    fill_constant,
    reduced_betti,
    sys_cardinality,
)


@dataclass
class ConeFunction:
    """Cone tables: tables[j][i] is the (j+1)-chain (int bitset) assigned to the i-th j-face."""

    x: SimplicialComplex
    apex: int
    max_dim: int
    tables: dict[int, list[int]]
    optimal: bool = True  # every fill was certified least

    def cone(self, tau: Sequence[int]) -> ChainVector:
        j = len(tau) - 1
        if j > self.max_dim:
            raise DimMismatch(f"cone defined up to dim {self.max_dim}")
        return ChainVector(j + 1, self.tables[j][self.x.face_index(tau)], self.x.dim_size(j + 1))

    def apply(self, a: ChainVector) -> ChainVector:
        """Linear extension to a j-chain."""
        out = 0
        for i in bits_of(a.bits):
            out ^= self.tables[a.dim][i]
        return ChainVector(a.dim + 1, out, self.x.dim_size(a.dim + 1))

    def vol(self, k: int | None = None) -> int:
        """max |Cone(tau)| over tau in X(k), k defaulting to max_dim."""
        k = self.max_dim if k is None else k
        return max((c.bit_count() for c in self.tables[k]), default=0)

    def to_dict(self) -> dict:
        x = self.x
        out = {"apex": self.apex, "max_dim": self.max_dim, "optimal": self.optimal, "cones": {}}
        for j in range(-1, self.max_dim + 1):
            out["cones"][str(j)] = [
                {"face": list(f), "cone": [list(x.faces[j + 1][b]) for b in bits_of(c)]}
                for f, c in zip(x.faces[j], self.tables[j])
            ]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class Obstruction:
    """The j-cycle tau + Cone(boundary tau) has no filling."""

    dim: int
    face: tuple[int, ...]
    cycle: ChainVector

    def to_dict(self) -> dict:
        return {"dim": self.dim, "face": list(self.face), "cycle_size": self.cycle.size}


def _bfs_parents(x: SimplicialComplex, apex: int) -> tuple[dict[int, int], dict[int, int]]:
    """Distances from apex and parents chosen as the least-id neighbour one step closer."""
    adj = x.adjacency()
    dist = {apex: 0}
    frontier = [apex]
    while frontier:
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    nxt.append(w)
        frontier = sorted(nxt)
    parent = {}
    for v, d in dist.items():
        if d:
            parent[v] = min(w for w in adj[v] if dist.get(w) == d - 1)
    return dist, parent


class _OrbitFills:
    """Least fillings shared between translates of a cycle: fill(g c) = g fill(c).

    A cycle is keyed by the lexicographically least sorted image of its face
    indices over the whole group; vertex ids must be 0..V-1.
    """

    def __init__(self, x: SimplicialComplex, action: PermutationAction, j: int):
        self.perms = action.perms
        self.base = int(max(x.vertices)) + 1
        self.j = j
        self.faces = {d: np.asarray(x.faces[d], dtype=np.int64).reshape(-1, d + 1) for d in (j, j + 1)}
        self.sorted_codes = {}
        self.order = {}
        for d, f in self.faces.items():
            codes = self._encode(f)
            self.order[d] = np.argsort(codes)
            self.sorted_codes[d] = codes[self.order[d]]
        self.store: dict[tuple, tuple[int, bool]] = {}

    def _encode(self, f: np.ndarray) -> np.ndarray:
        powers = self.base ** np.arange(f.shape[-1], dtype=np.int64)
        return (np.sort(f, axis=-1) * powers).sum(axis=-1)

    def _image(self, d: int, idx: np.ndarray, perm: np.ndarray) -> np.ndarray:
        codes = self._encode(perm[..., self.faces[d][idx]] if perm.ndim == 1 else perm[:, self.faces[d][idx]])
        return self.order[d][np.searchsorted(self.sorted_codes[d], codes)]

    def key(self, bits: int) -> tuple[tuple, int]:
        idx = np.asarray(bits_of(bits), dtype=np.int64)
        imgs = np.sort(self._image(self.j, idx, self.perms), axis=1)
        g = int(np.lexsort(imgs.T[::-1])[0])
        return tuple(imgs[g].tolist()), g

    def translate(self, bits: int, perm: np.ndarray) -> int:
        if not bits:
            return 0
        out = 0
        for i in self._image(self.j + 1, np.asarray(bits_of(bits), dtype=np.int64), perm).tolist():
            out |= 1 << i
        return out

    def lookup(self, bits: int) -> tuple[tuple, int, tuple[int, bool] | None]:
        key, g = self.key(bits)
        hit = self.store.get(key)
        if hit is None:
            return key, g, None
        inv = np.argsort(self.perms[g])
        return key, g, (self.translate(hit[0], inv), hit[1])

    def remember(self, key: tuple, g: int, fill_bits: int, optimal: bool) -> None:
        self.store[key] = (self.translate(fill_bits, self.perms[g]), optimal)



def _orbit_fills(x: SimplicialComplex, action: PermutationAction, j: int) -> _OrbitFills:
    """One cache per (complex, action, dimension), shared by every apex."""
    cache = x.__dict__.setdefault("_hdx_orbit_fills", {})
    key = (id(action), j)
    if key not in cache or cache[key][0] is not action:
        cache[key] = (action, _OrbitFills(x, action, j))
    return cache[key][1]


def build_cone(x: SimplicialComplex, apex: int, k: int, budget_log2: float = DEFAULT_BUDGET_LOG2,
               mode: str = "exact", action: PermutationAction | None = None,
               use_symmetry: bool = True) -> ConeFunction | Obstruction:
    """Construct a k-cone with the given apex, or the first obstruction met.

    mode is passed to homology.fill for j >= 1 ("exact" raises
    SearchSpaceTooLarge when a least filling cannot be certified). With a
    symmetry group (the coset action by default) one least filling is
    computed per orbit of cycles and translated to the others.
    """
    if not x.has_face((apex,)):
        raise NotAFace(f"apex {apex} is not a vertex")
    if k < -1 or k > x.top_dim:
        raise DimMismatch(f"cone dimension must lie in -1..{x.top_dim}")
    apex_idx = x.face_index((apex,))
    tables: dict[int, list[int]] = {-1: [1 << apex_idx]}
    optimal = True
    if k >= 0:
        dist, parent = _bfs_parents(x, apex)
        eidx = x.index[1] if x.top_dim >= 1 else {}
        row = []
        memo: dict[int, int] = {apex: 0}

        def path(v: int) -> int:
            if v not in memo:
                p = parent[v]
                memo[v] = path(p) ^ (1 << eidx[(min(p, v), max(p, v))])
            return memo[v]

        for (v,) in x.faces[0]:
            if v not in dist:
                cyc = ChainVector(0, (1 << apex_idx) | (1 << x.face_index((v,))), x.dim_size(0))
                return Obstruction(0, (v,), cyc)
            row.append(path(v))
        tables[0] = row
    ops = Operators.of(x)
    if use_symmetry and action is None and x.coset_data is not None:
        action = _action_for(x, None)
    for j in range(1, k + 1):
        bmasks = ops.boundary_masks(j)
        prev = tables[j - 1]
        orbits = _orbit_fills(x, action, j) if use_symmetry and action is not None and j < x.top_dim else None
        row = []
        for i, tau in enumerate(x.faces[j]):
            c = 1 << i
            for b in bits_of(bmasks[i]):
                c ^= prev[b]
            if orbits is not None and c:
                key, g, hit = orbits.lookup(c)
                if hit is not None:
                    row.append(hit[0])
                    optimal &= hit[1]
                    continue
            cyc = ChainVector(j, c, x.dim_size(j))
            try:
                res = fill(x, j, cyc, budget_log2, mode=mode)
            except NoFilling:
                return Obstruction(j, tuple(tau), cyc)
            optimal &= res.optimal
            row.append(res.chain.bits)
            if orbits is not None and c:
                orbits.remember(key, g, res.chain.bits, res.optimal)
        tables[j] = row
    return ConeFunction(x, apex, k, tables, optimal)


@dataclass(frozen=True)
class ConeCheck:
    ok: bool
    face: tuple[int, ...] | None = None
    dim: int | None = None


def verify_cone(x: SimplicialComplex, cone: ConeFunction) -> ConeCheck:
    """Exhaustive check of the cone equation on every face of dim <= max_dim."""
    ops = Operators.of(x)
    if cone.tables[-1] != [1 << x.face_index((cone.apex,))]:
        return ConeCheck(False, (), -1)
    for j in range(0, cone.max_dim + 1):
        up = ops.boundary_masks(j + 1) if j + 1 <= x.top_dim else []
        down = ops.boundary_masks(j)
        for i, tau in enumerate(x.faces[j]):
            lhs = _apply(up, cone.tables[j][i]) if up else 0
            rhs = 1 << i
            for b in bits_of(down[i]):
                rhs ^= cone.tables[j - 1][b]
            if lhs != rhs:
                return ConeCheck(False, tuple(tau), j)
    return ConeCheck(True)


def _action_for(x: SimplicialComplex, action: PermutationAction | None) -> PermutationAction:
    if action is not None:
        return action
    if x.coset_data is None:
        raise NoGroupAttached("no group action supplied and the complex is not a coset complex")
    cache = x.__dict__.setdefault("_hdx_action", [])
    if not cache:
        cache.append(PermutationAction.from_coset_complex(x))
    return cache[0]


def act_on_cone(g: int, cone: ConeFunction, action: PermutationAction | None = None) -> ConeFunction:
    """(g.Cone)(A) = g.Cone(g^-1.A); the result has apex g.v and the same volume."""
    x = cone.x
    act = _action_for(x, action)
    ginv = act.inverse(g)
    tables = {}
    for j in range(-1, cone.max_dim + 1):
        src = x.faces[j]
        tgt = x.faces[j + 1]
        row = []
        for tau in src:
            pre = x.face_index(act.act_on_face(ginv, tau))
            c = 0
            for b in bits_of(cone.tables[j][pre]):
                c |= 1 << x.face_index(act.act_on_face(g, tgt[b]))
            row.append(c)
        tables[j] = row
    return ConeFunction(x, int(act.perm(g)[cone.apex]), cone.max_dim, tables, cone.optimal)


@dataclass
class ConeReport:
    k: int
    vol_by_apex: dict[int, int] = field(default_factory=dict)
    obstruction: Obstruction | None = None
    optimal_fills: bool = True
    m_constants: list | None = None

    @property
    def exists(self) -> bool:
        return self.obstruction is None and bool(self.vol_by_apex)

    @property
    def crad_upper(self):
        """Least constructed volume: an upper bound on Crad_k, INFINITE when obstructed."""
        if not self.exists:
            return INFINITE
        return min(self.vol_by_apex.values())

    @property
    def best_apex(self) -> int | None:
        if not self.exists:
            return None
        best = self.crad_upper
        return min(a for a, v in self.vol_by_apex.items() if v == best)

    def to_dict(self) -> dict:
        c = self.crad_upper
        return {
            "k": self.k,
            "exists": self.exists,
            "crad_upper": "inf" if c is INFINITE else c,
            "best_apex": self.best_apex,
            "apexes_tried": len(self.vol_by_apex) + (self.obstruction is not None),
            "optimal_fills": self.optimal_fills,
            "obstruction": None if self.obstruction is None else self.obstruction.to_dict(),
            "m_constants": self.m_constants,
        }


def crad_upper(x: SimplicialComplex, k: int, apex_set: Iterable[int] | None = None,
               budget_log2: float = DEFAULT_BUDGET_LOG2, mode: str = "exact") -> ConeReport:
    """min Vol(Cone_k^v) over the apexes tried (all vertices by default).

    For k = 0 the BFS cones are shortest-path trees, so the result is the
    exact radius of the 1-skeleton. For k >= 1 it is an upper bound on Crad_k.
    """
    apexes = list(x.vertices) if apex_set is None else list(apex_set)
    report = ConeReport(k)
    for v in apexes:
        c = build_cone(x, v, k, budget_log2, mode)
        if isinstance(c, Obstruction):
            report.obstruction = c
            report.vol_by_apex.clear()
            return report
        report.vol_by_apex[v] = c.vol()
        report.optimal_fills &= c.optimal
    return report


@dataclass(frozen=True)
class MConstants:
    values: dict[int, object]  # j -> M_j (int or INFINITE)
    hypotheses: dict[int, dict]  # j -> {"sys": ..., "needed": ..., "holds": bool}
    exact: bool

    @property
    def chain_holds(self) -> bool:
        return all(h["holds"] for h in self.hypotheses.values())

    def to_dict(self) -> dict:
        def enc(v):
            return "inf" if v is INFINITE else v

        return {
            "M": {str(j): enc(v) for j, v in sorted(self.values.items())},
            "hypotheses": {str(j): {kk: enc(vv) for kk, vv in h.items()} for j, h in sorted(self.hypotheses.items())},
            "chain_holds": self.chain_holds,
            "exact": self.exact,
        }


def _graph_diameter(x: SimplicialComplex):
    g = nx.Graph()
    g.add_nodes_from(x.vertices)
    g.add_edges_from(x.faces.get(1, []))
    if not nx.is_connected(g):
        return INFINITE
    return nx.diameter(g)


def m_constants(x: SimplicialComplex, k: int, budget_log2: float = DEFAULT_BUDGET_LOG2) -> MConstants:
    """M_{-1} = 1, M_j = Fill_j((j+1) M_{j-1} + 1), with the systole hypotheses per dimension.

    Fill_0(2) is the diameter of the 1-skeleton and is computed by BFS; higher
    dimensions enumerate B_j within budget.
    """
    values: dict[int, object] = {-1: 1}
    hyps: dict[int, dict] = {}
    exact = True
    for j in range(0, k + 1):
        prev = values[j - 1]
        if prev is INFINITE:
            values[j] = INFINITE
            hyps[j] = {"sys": None, "needed": INFINITE, "holds": False}
            continue
        m = (j + 1) * prev + 1
        sys_j = sys_cardinality(x, j, budget_log2)
        holds = sys_j is INFINITE or sys_j > m
        hyps[j] = {"sys": sys_j, "needed": m, "holds": holds}
        if j == 0 and m <= 3:
            values[0] = _graph_diameter(x)
        else:
            val, ex = fill_constant(x, j, m, budget_log2)
            values[j] = val
            exact &= ex
    return MConstants(values, hyps, exact)


@dataclass(frozen=True)
class EquivalenceVerdict:
    k: int
    betti: dict[int, int]
    homology_vanishes: bool
    cone_built: bool
    obstruction_dim: int | None
    consistent: bool

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "reduced_betti": {str(j): b for j, b in self.betti.items()},
            "homology_vanishes": self.homology_vanishes,
            "cone_built": self.cone_built,
            "obstruction_dim": self.obstruction_dim,
            "consistent": self.consistent,
        }


def existence_equivalence_test(x: SimplicialComplex, k: int, apexes: Iterable[int] | None = None,
                               budget_log2: float = DEFAULT_BUDGET_LOG2) -> EquivalenceVerdict:
    """A k-cone exists iff reduced homology vanishes in dims 0..k; both sides computed.

    Every apex in `apexes` (all vertices by default) is tried. With vanishing
    homology each attempt must succeed and verify; otherwise each attempt must
    stop at an obstruction in a dimension where homology is nonzero.
    """
    betti = {j: reduced_betti(x, j) for j in range(0, k + 1)}
    vanish = all(b == 0 for b in betti.values())
    built, obs_dim, consistent = False, None, True
    for v in (list(x.vertices) if apexes is None else list(apexes)):
        c = build_cone(x, v, k, budget_log2, mode="auto")
        if isinstance(c, Obstruction):
            obs_dim = c.dim if obs_dim is None else obs_dim
            # the stopping cycle must be a genuine non-boundary
            consistent &= (not vanish) and betti.get(c.dim, 1) > 0 and c.cycle.size > 0
        else:
            built = True
            consistent &= vanish and verify_cone(x, c).ok
    return EquivalenceVerdict(k, betti, vanish, built, obs_dim, consistent)


def cycles_filled_by_cone(cone: ConeFunction, cycles: Sequence[ChainVector]) -> bool:
    """For k-cycles A: boundary Cone(A) = A."""
    ops = Operators.of(cone.x)
    for a in cycles:
        c = cone.apply(a)
        if _apply(ops.boundary_masks(a.dim + 1), c.bits) != a.bits:
            return False
    return True
