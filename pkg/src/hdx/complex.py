"""Simplicial complexes, coset complexes, links and face weights.

Faces are sorted vertex tuples stored per dimension in sorted order; the empty
face is the single face of dimension -1. Vertex ids are plain ints. A coset
complex numbers its vertices type-major: all cosets of K_0 by least element id,
then all cosets of K_1, and so on.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import DimMismatch, InvariantViolation, NotAFace, NotPure
from .groups import CosetPartition, Group, SubgroupHandle, enumerate_cosets

Face = tuple


class SimplicialComplex:
    """Finite simplicial complex given by all of its faces.

    faces[d] is the sorted list of d-dimensional faces for -1 <= d <= top_dim.
    """

    def __init__(self, faces: dict[int, Iterable[Sequence[int]]], vertex_types: dict[int, int] | None = None,
                 validate: bool = True):
        clean: dict[int, list[Face]] = {}
        for d, fs in faces.items():
            d = int(d)
            if d < 0:
                continue
            lst = sorted({tuple(sorted(int(v) for v in f)) for f in fs})
            for f in lst:
                if len(f) != d + 1 or len(set(f)) != d + 1:
                    raise DimMismatch(f"face {f} listed in dimension {d}")
            if lst:
                clean[d] = lst
        self.top_dim = max(clean) if clean else -1
        self.faces: dict[int, list[Face]] = {-1: [()]}
        for d in range(self.top_dim + 1):
            self.faces[d] = clean.get(d, [])
        self.index: dict[int, dict[Face, int]] = {d: {f: i for i, f in enumerate(fs)} for d, fs in self.faces.items()}
        self.vertex_types = dict(vertex_types) if vertex_types is not None else None
        self.coset_data: CosetData | None = None
        if validate:
            self.check_downward_closed()

    # -- construction helpers

    @classmethod
    def from_maximal(cls, maximal: Iterable[Sequence[int]], vertex_types: dict[int, int] | None = None,
                     extra_vertices: Iterable[int] = ()) -> "SimplicialComplex":
        """Downward closure of a list of faces."""
        faces: dict[int, set] = {}
        for f in maximal:
            f = tuple(sorted(f))
            for r in range(1, len(f) + 1):
                faces.setdefault(r - 1, set()).update(itertools.combinations(f, r))
        for v in extra_vertices:
            faces.setdefault(0, set()).add((v,))
        return cls(faces, vertex_types, validate=False)

    # -- basic queries

    def dim_size(self, k: int) -> int:
        return len(self.faces.get(k, []))

    def f_vector(self) -> list[int]:
        return [self.dim_size(d) for d in range(self.top_dim + 1)]

    @property
    def vertices(self) -> list[int]:
        return [f[0] for f in self.faces.get(0, [])]

    def has_face(self, f: Sequence[int]) -> bool:
        f = tuple(sorted(f))
        return f in self.index.get(len(f) - 1, {})

    def face_index(self, f: Sequence[int]) -> int:
        f = tuple(sorted(f))
        try:
            return self.index[len(f) - 1][f]
        except KeyError:
            raise NotAFace(f"{f} is not a face") from None

    def check_downward_closed(self) -> None:
        for d in range(1, self.top_dim + 1):
            below = self.index[d - 1]
            for f in self.faces[d]:
                for i in range(d + 1):
                    if f[:i] + f[i + 1:] not in below:
                        raise InvariantViolation(f"face {f} is missing its facet {f[:i] + f[i + 1:]}")

    @cached_property
    def maximal_faces(self) -> list[Face]:
        covered = set()
        for d in range(1, self.top_dim + 1):
            for f in self.faces[d]:
                for i in range(d + 1):
                    covered.add(f[:i] + f[i + 1:])
        return [f for d in range(self.top_dim + 1) for f in self.faces[d] if f not in covered]

    def is_pure(self) -> bool:
        return all(len(f) == self.top_dim + 1 for f in self.maximal_faces)

    def check_partite(self) -> bool:
        """Every top face has exactly one vertex of each type 0..top_dim."""
        if self.vertex_types is None:
            return False
        want = list(range(self.top_dim + 1))
        return all(sorted(self.vertex_types[v] for v in f) == want for f in self.faces[self.top_dim])

    @cached_property
    def facet_table(self) -> dict[int, np.ndarray]:
        """facet_table[k][i, r] = index in X(k-1) of face i of X(k) with its r-th vertex removed."""
        out = {}
        for k in range(0, self.top_dim + 1):
            below = self.index[k - 1]
            arr = np.empty((len(self.faces[k]), k + 1), dtype=np.int64)
            for i, f in enumerate(self.faces[k]):
                for r in range(k + 1):
                    arr[i, r] = below[f[:r] + f[r + 1:]]
            out[k] = arr
        return out

    def adjacency(self) -> dict[int, list[int]]:
        """Neighbour lists of the 1-skeleton, sorted."""
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.faces.get(1, []):
            adj[u].append(v)
            adj[v].append(u)
        for v in adj:
            adj[v].sort()
        return adj

    def one_skeleton(self) -> "SimplicialComplex":
        return SimplicialComplex({0: self.faces.get(0, []), 1: self.faces.get(1, [])}, self.vertex_types, validate=False)

    def skeleton(self, k: int) -> "SimplicialComplex":
        return SimplicialComplex({d: self.faces[d] for d in range(min(k, self.top_dim) + 1)}, self.vertex_types,
                                 validate=False)

    def __repr__(self) -> str:
        return f"SimplicialComplex(f={self.f_vector()})"

    # -- serialization

    def to_json(self) -> str:
        data = {
            "top_dim": self.top_dim,
            "vertex_types": None if self.vertex_types is None else [self.vertex_types[v] for v in self.vertices],
            "vertices": self.vertices,
            "faces": {str(d): [list(f) for f in self.faces[d]] for d in range(self.top_dim + 1)},
        }
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SimplicialComplex":
        data = json.loads(text)
        faces = {int(d): fs for d, fs in data["faces"].items()}
        types = None
        if data.get("vertex_types") is not None:
            verts = data.get("vertices") or [f[0] for f in sorted(faces.get(0, []))]
            types = dict(zip(verts, data["vertex_types"]))
        x = cls(faces, types, validate=True)
        if x.top_dim != data["top_dim"]:
            raise DimMismatch("top_dim disagrees with the face lists")
        return x


# ---------------------------------------------------------------- cliques and links


def clique_closure(one_skeleton: SimplicialComplex, max_dim: int) -> SimplicialComplex:
    """All cliques of the 1-skeleton with at most max_dim + 1 vertices."""
    adj = one_skeleton.adjacency()
    mask = {v: sum(1 << u for u in nb) for v, nb in adj.items()}
    faces: dict[int, list] = {0: [(v,) for v in adj]}
    level = [((v,), mask[v] & ~((1 << (v + 1)) - 1)) for v in adj]
    for d in range(1, max_dim + 1):
        nxt = []
        for f, common in level:
            m = common
            while m:
                low = m & -m
                w = low.bit_length() - 1
                m ^= low
                nxt.append((f + (w,), common & mask[w] & ~((1 << (w + 1)) - 1)))
        if not nxt:
            break
        faces[d] = [f for f, _ in nxt]
        level = nxt
    return SimplicialComplex(faces, one_skeleton.vertex_types, validate=False)


def link(x: SimplicialComplex, tau: Sequence[int]) -> SimplicialComplex:
    """X_tau: faces eta disjoint from tau with tau + eta a face; vertex ids are kept."""
    tau = tuple(sorted(tau))
    if not x.has_face(tau) and tau != ():
        raise NotAFace(f"{tau} is not a face")
    if tau == ():
        return x
    t = set(tau)
    pieces = [tuple(v for v in f if v not in t) for f in x.maximal_faces if t.issubset(f)]
    pieces = [p for p in pieces if p]
    types = x.vertex_types
    if not pieces:
        lk = SimplicialComplex({}, None, validate=False)
    else:
        lk = SimplicialComplex.from_maximal(pieces)
    if types is not None:
        lk.vertex_types = {v: types[v] for v in lk.vertices}
    return lk


# ---------------------------------------------------------------- weights


@dataclass(frozen=True)
class WeightTable:
    """w(tau) = counts[k][i] / denominators[k], exact."""

    counts: dict[int, np.ndarray]
    denominators: dict[int, int]

    def weight(self, k: int, i: int) -> Fraction:
        return Fraction(int(self.counts[k][i]), self.denominators[k])

    def of_indices(self, k: int, idx: Iterable[int]) -> Fraction:
        idx = list(idx)
        return Fraction(int(self.counts[k][idx].sum()) if idx else 0, self.denominators[k])

    def of_mask(self, k: int, mask: int) -> Fraction:
        """Weight of the set of k-faces encoded by the bits of an int."""
        return self.of_indices(k, _bits(mask))

    def total(self, k: int) -> Fraction:
        return Fraction(int(self.counts[k].sum()), self.denominators[k])


def _bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def weights(x: SimplicialComplex) -> WeightTable:
    if not x.is_pure():
        raise NotPure("weights need a pure complex")
    n = x.top_dim
    top = x.faces[n]
    counts = {}
    dens = {}
    for k in range(-1, n + 1):
        c = np.zeros(x.dim_size(k), dtype=np.int64)
        idx = x.index[k]
        for f in top:
            for sub in itertools.combinations(f, k + 1):
                c[idx[sub]] += 1
        counts[k] = c
        dens[k] = comb(n + 1, k + 1) * len(top)
        if int(c.sum()) != dens[k]:
            raise InvariantViolation(f"weights in dimension {k} do not sum to 1")
    return WeightTable(counts, dens)


# ---------------------------------------------------------------- coset complexes


@dataclass(eq=False)
class CosetData:
    group: Group
    subgroups: list[SubgroupHandle]
    partitions: list[CosetPartition]
    offsets: list[int]

    def vertex_of(self, i: int, g) -> np.ndarray:
        """Vertex id of the coset g K_i (vectorized over g)."""
        return self.offsets[i] + self.partitions[i].index(g)

    def vertex_rep(self, v: int) -> tuple[int, int]:
        """(type, least coset element) of a vertex."""
        for i in range(len(self.offsets) - 1, -1, -1):
            if v >= self.offsets[i]:
                return i, int(self.partitions[i].reps[v - self.offsets[i]])
        raise NotAFace(f"vertex {v}")

    @cached_property
    def rep_array(self) -> np.ndarray:
        return np.concatenate([p.reps for p in self.partitions])

    @cached_property
    def type_array(self) -> np.ndarray:
        return np.concatenate([np.full(len(p), i) for i, p in enumerate(self.partitions)])

    def vertex_permutation(self, h: int) -> np.ndarray:
        """Action of h on vertex ids: gK_i -> hgK_i."""
        moved = self.group.left_mul_all(h, self.rep_array)
        out = np.empty_like(moved)
        for i, p in enumerate(self.partitions):
            sl = slice(self.offsets[i], self.offsets[i] + len(p))
            out[sl] = self.offsets[i] + p.index(moved[sl])
        return out


def build_coset_complex(g: Group, subgroups: Sequence[SubgroupHandle]) -> SimplicialComplex:
    """X(G, (K_i)): cosets as typed vertices, intersecting cosets of distinct types as edges, clique closure."""
    if len(subgroups) < 2:
        raise ValueError("a coset complex needs at least two subgroups")
    parts = [enumerate_cosets(g, k, i) for i, k in enumerate(subgroups)]
    offsets = list(np.cumsum([0] + [len(p) for p in parts[:-1]]).tolist())
    everything = np.arange(len(g))
    vert = [offsets[i] + p.index(everything) for i, p in enumerate(parts)]
    edges = set()
    for i, j in itertools.combinations(range(len(parts)), 2):
        pairs = np.unique(np.stack([vert[i], vert[j]], axis=1), axis=0)
        edges.update(map(tuple, pairs.tolist()))
    nverts = offsets[-1] + len(parts[-1])
    types = {v: i for i, p in enumerate(parts) for v in range(offsets[i], offsets[i] + len(p))}
    sk = SimplicialComplex({0: [(v,) for v in range(nverts)], 1: edges}, types, validate=False)
    x = clique_closure(sk, len(subgroups) - 1)
    x.vertex_types = types
    x.coset_data = CosetData(g, list(subgroups), parts, offsets)
    return x


def base_top_face(x: SimplicialComplex) -> Face:
    """The face {K_0, ..., K_n} (cosets of the identity)."""
    cd = x.coset_data
    return tuple(int(cd.vertex_of(i, 0)[()]) for i in range(len(cd.subgroups)))


def _product_set(g: Group, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.unique(g.mul(np.repeat(a, len(b)), np.tile(b, len(a))))


@dataclass
class SymmetryCertificate:
    criterion_holds: bool
    failures: list[tuple[tuple[int, ...], int]]
    orbit_size: int
    top_faces: int
    orbit_transitive: bool

    @property
    def agree(self) -> bool:
        return self.criterion_holds == self.orbit_transitive

    def to_dict(self) -> dict:
        return {
            "criterion_holds": self.criterion_holds,
            "criterion_failures": [{"tau": list(t), "i": i} for t, i in self.failures],
            "orbit_size": self.orbit_size,
            "top_faces": self.top_faces,
            "orbit_transitive": self.orbit_transitive,
            "agree": self.agree,
        }


def check_strong_symmetry(g: Group, subgroups: Sequence[SubgroupHandle], x: SimplicialComplex) -> SymmetryCertificate:
    """Evaluate the product-set criterion for transitivity on top faces and, independently, the orbit of G."""
    index_set = range(len(subgroups))
    failures = []
    for r in range(0, len(subgroups)):
        for tau in itertools.combinations(index_set, r):
            if tau:
                k_tau = subgroups[tau[0]].members
                for j in tau[1:]:
                    k_tau = np.intersect1d(k_tau, subgroups[j].members)
            for i in index_set:
                if i in tau:
                    continue
                ki = subgroups[i].members
                if not tau:
                    continue  # K_empty K_i = G equals the empty intersection G
                lhs = _product_set(g, k_tau, ki)
                rhs = None
                for j in tau:
                    pj = _product_set(g, subgroups[j].members, ki)
                    rhs = pj if rhs is None else np.intersect1d(rhs, pj)
                if not np.array_equal(lhs, rhs):
                    failures.append((tau, i))
    n = x.top_dim
    cd = x.coset_data
    everything = np.arange(len(g))
    if cd is not None and n == len(subgroups) - 1:
        cols = np.stack([cd.vertex_of(i, everything) for i in index_set], axis=1)
        orbit = {tuple(r) for r in cols.tolist()}
    else:
        orbit = set()
    orbit_size = len(orbit)
    top = x.faces.get(len(subgroups) - 1, [])
    transitive = orbit_size == len(top) and orbit.issubset(set(top)) and len(top) > 0
    return SymmetryCertificate(not failures, failures, orbit_size, len(top), transitive)


def stabilizer(g: Group, x: SimplicialComplex, v: int) -> np.ndarray:
    """Ids of elements fixing vertex v of a coset complex."""
    cd = x.coset_data
    i, rep = cd.vertex_rep(v)
    moved = g.mul(np.arange(len(g)), np.full(len(g), rep))
    return np.nonzero(cd.vertex_of(i, moved) == v)[0]


# ---------------------------------------------------------------- permutation actions


class PermutationAction:
    """A finite group acting on vertex ids, stored as the list of all its permutations.

    Element 0 is the identity. Used for complexes that are not built as coset
    complexes, and as the common interface for orbit computations.
    """

    def __init__(self, perms: np.ndarray):
        self.perms = np.asarray(perms, dtype=np.int64)
        self._lookup = {p.tobytes(): i for i, p in enumerate(self.perms)}

    @classmethod
    def generated_by(cls, gens: Sequence[Sequence[int]], nverts: int, cap: int = 100000) -> "PermutationAction":
        ident = np.arange(nverts)
        seen = {ident.tobytes(): 0}
        perms = [ident]
        frontier = [ident]
        gens = [np.asarray(s, dtype=np.int64) for s in gens]
        while frontier:
            nxt = []
            for p in frontier:
                for s in gens:
                    r = s[p]
                    key = r.tobytes()
                    if key not in seen:
                        seen[key] = len(perms)
                        perms.append(r)
                        nxt.append(r)
                        if len(perms) > cap:
                            raise ValueError("permutation group too large")
            frontier = nxt
        return cls(np.stack(perms))

    @classmethod
    def from_coset_complex(cls, x: SimplicialComplex) -> "PermutationAction":
        cd = x.coset_data
        return cls(np.stack([cd.vertex_permutation(h) for h in range(len(cd.group))]))

    def __len__(self) -> int:
        return len(self.perms)

    def perm(self, h: int) -> np.ndarray:
        return self.perms[h]

    def compose(self, a: int, b: int) -> int:
        """Id of a*b, acting as v -> a(b(v))."""
        return self._lookup[self.perms[a][self.perms[b]].tobytes()]

    def inverse(self, a: int) -> int:
        return self._lookup[np.argsort(self.perms[a]).tobytes()]

    def act_on_face(self, h: int, f: Sequence[int]) -> Face:
        p = self.perms[h]
        return tuple(sorted(int(p[v]) for v in f))

    def orbit(self, f: Sequence[int]) -> set[Face]:
        return {self.act_on_face(h, f) for h in range(len(self))}

    def is_transitive_on(self, faces: Sequence[Face]) -> bool:
        if not faces:
            return False
        return len(self.orbit(faces[0])) == len(faces)


def is_simplicial_action(action: PermutationAction, x: SimplicialComplex) -> bool:
    for h in range(len(action)):
        for d in range(1, x.top_dim + 1):
            for f in x.faces[d]:
                if not x.has_face(action.act_on_face(h, f)):
                    return False
    return True


# ---------------------------------------------------------------- reference complexes


def boundary_tetrahedron() -> SimplicialComplex:
    return SimplicialComplex.from_maximal(itertools.combinations(range(4), 3))


def octahedron() -> SimplicialComplex:
    """Boundary of the cross-polytope: antipodal pairs (0,1), (2,3), (4,5)."""
    tris = [(a, b, c) for a in (0, 1) for b in (2, 3) for c in (4, 5)]
    return SimplicialComplex.from_maximal(tris, {v: v // 2 for v in range(6)})


def torus7() -> SimplicialComplex:
    """Seven-vertex triangulated torus, 14 triangles."""
    tris = []
    for i in range(7):
        tris.append((i, (i + 1) % 7, (i + 3) % 7))
        tris.append((i, (i + 2) % 7, (i + 3) % 7))
    return SimplicialComplex.from_maximal(tris)


def two_triangles() -> SimplicialComplex:
    return SimplicialComplex.from_maximal([(0, 1, 2), (3, 4, 5)])


def cycle_graph(m: int) -> SimplicialComplex:
    return SimplicialComplex.from_maximal([(i, (i + 1) % m) for i in range(m)])


def complete_graph(m: int) -> SimplicialComplex:
    return SimplicialComplex.from_maximal(itertools.combinations(range(m), 2))


def petersen_graph() -> SimplicialComplex:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return SimplicialComplex.from_maximal(outer + spokes + inner)


def single_edge() -> SimplicialComplex:
    return SimplicialComplex.from_maximal([(0, 1)])


def full_symmetric_action(nverts: int) -> PermutationAction:
    """Sym(nverts) acting on vertex ids (for complexes invariant under it)."""
    return PermutationAction(np.array(list(itertools.permutations(range(nverts)))))


def graph_automorphisms(x: SimplicialComplex) -> PermutationAction:
    """Automorphism group of a small 1-skeleton, via networkx isomorphism search."""
    import networkx as nx
    from networkx.algorithms.isomorphism import GraphMatcher

    gr = nx.Graph()
    gr.add_nodes_from(x.vertices)
    gr.add_edges_from(x.faces.get(1, []))
    verts = x.vertices
    pos = {v: i for i, v in enumerate(verts)}
    perms = []
    for m in GraphMatcher(gr, gr).isomorphisms_iter():
        p = np.empty(len(verts), dtype=np.int64)
        for a, b in m.items():
            p[pos[a]] = pos[b]
        perms.append(p)
    perms.sort(key=lambda p: p.tolist())
    return PermutationAction(np.stack(perms))
