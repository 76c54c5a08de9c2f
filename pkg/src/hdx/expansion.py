"""Exact coboundary expansion, cosystoles, graph Cheeger constants and bound certificates.

All ratios are exact Fractions. Exp^k_b is computed by enumerating the classes
of C^k / B^k: the coboundary weight is constant on a class and the
denominator is the least weight in it. For k = 0 the constant is a weighted
ratio cut, which also has an integer-programming route and, on larger
complexes, a certified bracket: the exact lower end comes from a rational
certificate on the second walk eigenvalue, the upper end from an explicit cut.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

import networkx as nx
import numpy as np

from .complex import PermutationAction, SimplicialComplex, check_strong_symmetry, graph_automorphisms, weights
from .cones import ConeReport, crad_upper
from .errors import (
    DimMismatch,
    HypothesisUnmet,
    InvariantViolation,
    NotEdgeTransitive,
    SearchSpaceTooLarge,
    TooManyVertices,
)
from .groups import Group, SubgroupHandle, bounded_generation_diameter
from .homology import (
    INFINITE,
    BitWeights,
    ChainVector,
    EchelonBasis,
    Operators,
    _apply,
    _least_row,
    _span_table,
    from_words,
    min_weight_affine,
    space_basis,
    to_words,
)
from .presentation import p_poly
from .spectral import certified_second_eigenvalue_bound, second_eigenvalue, weighted_one_skeleton

DEFAULT_CLASS_BUDGET_LOG2 = 20
_BLOCK_LOG2 = 18
EXHAUSTIVE_VERTEX_LIMIT = 24


class NotDefined:
    """The minimum ranges over an empty set (every cochain lies in the subspace)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NOT_DEFINED"


NOT_DEFINED = NotDefined()


def fmt(v) -> str | None:
    """Rationals as "p/q" strings; INFINITE and NOT_DEFINED by name."""
    if v is None:
        return None
    if v is INFINITE:
        return "inf"
    if v is NOT_DEFINED:
        return "not_defined"
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


@dataclass
class ExpResult:
    """An expansion constant; value is set when exact, otherwise [lower, upper] brackets it."""

    k: int
    kind: str  # "b" or "z"
    value: Fraction | NotDefined | None
    witness: ChainVector | None
    method: str
    lower: Fraction | None = None
    upper: Fraction | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.value, Fraction):
            self.lower = self.upper = self.value

    @property
    def exact(self) -> bool:
        return self.value is not None

    def to_dict(self, x: SimplicialComplex | None = None) -> dict:
        out = {
            "k": self.k,
            f"exp_{self.kind}": fmt(self.value),
            "lower": fmt(self.lower),
            "upper": fmt(self.upper),
            "method": self.method,
            "exact": self.exact,
        }
        if self.witness is not None:
            out["witness"] = [list(f) for f in self.witness.faces(x)] if x is not None else self.witness.support()
        out.update(self.notes)
        return out


# ---------------------------------------------------------------- quotient enumeration


def _quotient_min(x: SimplicialComplex, k: int, sub_vectors: Sequence[int], sub_pivots: Sequence[int],
                  budget_log2: float) -> tuple[Fraction, int] | None:
    """min over nonzero classes phi + V of w(d phi) / min w(phi + V), with the least minimizing cochain.

    V is spanned by sub_vectors (independent, with leading bits sub_pivots) and
    must lie in the kernel of d_k. Returns None when V is everything.
    """
    ops = Operators.of(x)
    wt = weights(x)
    nk = x.dim_size(k)
    comp = [1 << i for i in range(nk) if i not in set(sub_pivots)]
    m, b = len(comp), len(sub_vectors)
    if m == 0:
        return None
    if m > budget_log2:
        raise SearchSpaceTooLarge(f"{m}-dimensional quotient exceeds budget 2^{budget_log2}", m, budget_log2)
    if b > budget_log2:
        raise SearchSpaceTooLarge(f"{b}-dimensional coset scan exceeds budget 2^{budget_log2}", b, budget_log2)
    dmasks = ops.coboundary_masks(k)
    for v in sub_vectors:
        if _apply(dmasks, v):
            raise InvariantViolation("coboundary is not constant on classes")
    top = k + 1 <= x.top_dim
    nk1 = x.dim_size(k + 1) if top else 0
    wk = BitWeights(wt.counts[k], nk)
    wk1 = BitWeights(wt.counts[k + 1], nk1) if top else None
    scale = Fraction(wt.denominators[k], wt.denominators[k + 1]) if top else Fraction(0)
    words_k, words_k1 = wk.words, max(1, (nk1 + 63) // 64)

    span = _span_table(to_words(list(sub_vectors), words_k)) if b <= _BLOCK_LOG2 else None
    low = min(m, max(0, _BLOCK_LOG2 - (b if span is not None else 0)))
    phi_low = _span_table(to_words(comp[:low], words_k))
    d_low = _span_table(to_words([dmasks[c.bit_length() - 1] for c in comp[:low]], words_k1))
    high = comp[low:]
    phi_high = to_words(high, words_k)
    d_high = to_words([dmasks[c.bit_length() - 1] for c in high], words_k1)

    best: tuple[Fraction, int] | None = None
    phi_shift = np.zeros(words_k, dtype=np.uint64)
    d_shift = np.zeros(words_k1, dtype=np.uint64)
    for step in range(1 << len(high)):
        if step:
            flip = (step & -step).bit_length() - 1
            phi_shift = phi_shift ^ phi_high[flip]
            d_shift = d_shift ^ d_high[flip]
        reps = phi_low ^ phi_shift
        num = wk1(d_low ^ d_shift) if top else np.zeros(len(reps), dtype=np.int64)
        if span is not None:
            cube = (reps[:, None, :] ^ span[None, :, :]).reshape(-1, words_k)
            den_all = wk(cube).reshape(len(reps), len(span))
            den = den_all.min(axis=1)
        else:
            den = np.array([min_weight_affine(from_words(r), sub_vectors, wk, budget_log2)[0] for r in reps])
        live = np.ones(len(reps), dtype=bool)
        if step == 0:
            live[0] = False  # the zero class
        if not live.any():
            continue
        ratio = np.where(live, num / np.maximum(den, 1), np.inf)
        rmin = ratio.min()
        for r in np.nonzero(live & (ratio <= rmin * (1 + 1e-12) + 1e-300))[0]:
            val = Fraction(int(num[r]), int(den[r])) * scale
            if best is not None and val > best[0]:
                continue
            if span is not None:
                rows = np.nonzero(den_all[r] == den[r])[0]
                block = reps[r] ^ span
                wit = from_words(block[_least_row(block, rows)])
            else:
                wit = min_weight_affine(from_words(reps[r]), sub_vectors, wk, budget_log2)[1]
            if best is None or val < best[0] or wit < best[1]:
                best = (val, wit)
    return best


def _check_k(x: SimplicialComplex, k: int) -> None:
    if not 0 <= k <= x.top_dim - 1:
        raise DimMismatch(f"expansion constants need 0 <= k <= n-1 = {x.top_dim - 1}")


def _exp(x: SimplicialComplex, k: int, which: str, kind: str, budget_log2: float) -> ExpResult:
    _check_k(x, k)
    sub = space_basis(x, which, k)
    res = _quotient_min(x, k, [v.bits for v in sub.basis], list(sub.echelon.rows), budget_log2)
    if res is None:
        return ExpResult(k, kind, NOT_DEFINED, None, "quotient")
    val, wit = res
    return ExpResult(k, kind, val, ChainVector(k, wit, x.dim_size(k)), "quotient")


def exp_b(x: SimplicialComplex, k: int, budget_log2: float = DEFAULT_CLASS_BUDGET_LOG2) -> ExpResult:
    """Exp^k_b by enumeration of C^k / B^k."""
    return _exp(x, k, "B^k", "b", budget_log2)


def exp_z(x: SimplicialComplex, k: int, budget_log2: float = DEFAULT_CLASS_BUDGET_LOG2) -> ExpResult:
    """Exp^k_z by enumeration of C^k / Z^k."""
    return _exp(x, k, "Z^k", "z", budget_log2)


def exp_oracle(x: SimplicialComplex, k: int, kind: str = "b") -> Fraction | NotDefined:
    """Definitional double loop: every cochain phi outside V, every psi in V."""
    _check_k(x, k)
    wt = weights(x)
    dm = Operators.of(x).coboundary_masks(k)
    sub = space_basis(x, "B^k" if kind == "b" else "Z^k", k)
    members = [0]
    for v in sub.basis:
        members += [u ^ v.bits for u in members]
    nk = x.dim_size(k)
    wk = [int(c) for c in wt.counts[k]]
    wk1 = [int(c) for c in wt.counts[k + 1]]

    def w(ws, mask):
        return sum(ws[i] for i in range(len(ws)) if mask >> i & 1)

    best = NOT_DEFINED
    for phi in range(1 << nk):
        if sub.echelon.contains(phi):
            continue
        r = Fraction(w(wk1, _apply(dm, phi)) * wt.denominators[k],
                     min(w(wk, phi ^ psi) for psi in members) * wt.denominators[k + 1])
        if best is NOT_DEFINED or r < best:
            best = r
    return best


def cosys_weight(x: SimplicialComplex, k: int, budget_log2: float = DEFAULT_CLASS_BUDGET_LOG2):
    """Sys^k: least weight of a cocycle that is not a coboundary; INFINITE when none exists."""
    _check_k(x, k)
    wt = weights(x)
    z = space_basis(x, "Z^k", k)
    b = space_basis(x, "B^k", k)
    ech = EchelonBasis()
    for v in b.basis:
        ech.add(v.bits)
    reps = [v.bits for v in z.basis if ech.add(v.bits)[0]]
    if not reps:
        return INFINITE
    if len(reps) > budget_log2:
        raise SearchSpaceTooLarge(f"{len(reps)}-dimensional cohomology exceeds budget", len(reps), budget_log2)
    wk = BitWeights(wt.counts[k], x.dim_size(k))
    best = None
    for r in range(1, 1 << len(reps)):
        off = 0
        for i, v in enumerate(reps):
            if r >> i & 1:
                off ^= v
        w, _ = min_weight_affine(off, [v.bits for v in b.basis], wk, budget_log2)
        best = w if best is None else min(best, w)
    return Fraction(best, wt.denominators[k])


# ---------------------------------------------------------------- ratio cuts (k = 0)


@dataclass(frozen=True)
class CutProblem:
    """min over proper nonempty S of cut(S) / min(vol(S), vol(V - S)), integer data."""

    nverts: int
    edges: np.ndarray  # (E, 2)
    edge_w: np.ndarray
    vert_w: np.ndarray

    @property
    def total(self) -> int:
        return int(self.vert_w.sum())

    def evaluate(self, mask: int) -> Fraction:
        bits = np.array([(mask >> v) & 1 for v in range(self.nverts)], dtype=bool)
        return self.evaluate_bits(bits)

    def evaluate_bits(self, bits: np.ndarray) -> Fraction:
        cut = int(self.edge_w[bits[self.edges[:, 0]] != bits[self.edges[:, 1]]].sum())
        vol = int(self.vert_w[bits].sum())
        return Fraction(cut, min(vol, self.total - vol))

    def lighter_side(self, mask: int) -> int:
        full = (1 << self.nverts) - 1
        vol = sum(int(self.vert_w[v]) for v in range(self.nverts) if mask >> v & 1)
        other = full ^ mask
        if 2 * vol < self.total:
            return mask
        if 2 * vol > self.total:
            return other
        return min(mask, other)


def cut_problem_of_complex(x: SimplicialComplex) -> tuple[CutProblem, Fraction]:
    """Exp^0_b as a ratio cut: returns the problem and the factor turning its ratio into Exp^0_b."""
    wt = weights(x)
    edges = np.array([[x.index[0][(u,)], x.index[0][(v,)]] for u, v in x.faces[1]], dtype=np.int64).reshape(-1, 2)
    p = CutProblem(x.dim_size(0), edges, np.asarray(wt.counts[1], dtype=np.int64),
                   np.asarray(wt.counts[0], dtype=np.int64))
    return p, Fraction(wt.denominators[0], wt.denominators[1])


def cut_problem_of_graph(x: SimplicialComplex) -> CutProblem:
    """Unweighted edges, vertex weight = degree."""
    edges = np.array([[x.index[0][(u,)], x.index[0][(v,)]] for u, v in x.faces[1]], dtype=np.int64).reshape(-1, 2)
    deg = np.bincount(edges.ravel(), minlength=x.dim_size(0)).astype(np.int64)
    return CutProblem(x.dim_size(0), edges, np.ones(len(edges), dtype=np.int64), deg)


def _exhaustive_cut(p: CutProblem) -> tuple[Fraction, int]:
    """All 2^(V-1) - 1 classes, the last vertex fixed outside S."""
    nv = p.nverts
    if nv > EXHAUSTIVE_VERTEX_LIMIT:
        raise TooManyVertices(f"{nv} vertices exceed the exhaustive limit {EXHAUSTIVE_VERTEX_LIMIT}")
    if nv < 2:
        raise DimMismatch("a cut needs at least two vertices")
    total = p.total
    best: tuple[Fraction, int] | None = None
    count = 1 << (nv - 1)
    chunk = 1 << 20
    for start in range(1, count, chunk):
        s = np.arange(start, min(count, start + chunk), dtype=np.int64)
        bits = [(s >> v) & 1 for v in range(nv - 1)] + [np.zeros_like(s)]
        cut = np.zeros(len(s), dtype=np.int64)
        for (u, v), w in zip(p.edges.tolist(), p.edge_w.tolist()):
            cut += w * (bits[u] ^ bits[v])
        vol = np.zeros(len(s), dtype=np.int64)
        for v in range(nv - 1):
            vol += int(p.vert_w[v]) * bits[v]
        den = np.minimum(vol, total - vol)
        ratio = cut / np.maximum(den, 1)
        rmin = ratio.min()
        for i in np.nonzero(ratio <= rmin * (1 + 1e-12) + 1e-300)[0]:
            val = Fraction(int(cut[i]), int(den[i]))
            wit = p.lighter_side(int(s[i]))
            if best is None or val < best[0] or (val == best[0] and wit < best[1]):
                best = (val, wit)
    return best


def _local_search(p: CutProblem, bits: np.ndarray) -> tuple[Fraction, np.ndarray]:
    r = p.evaluate_bits(bits)
    improved = True
    while improved:
        improved = False
        for v in range(p.nverts):
            bits[v] ^= True
            if 0 < bits.sum() < p.nverts:
                r2 = p.evaluate_bits(bits)
                if r2 < r:
                    r, improved = r2, True
                    continue
            bits[v] ^= True
    return r, bits


def heuristic_cut(p: CutProblem, seed: int = 0, trials: int = 64) -> tuple[Fraction, int]:
    """Spectral sweep cuts along random low eigenvector mixtures, then single-vertex local search."""
    w = np.zeros((p.nverts, p.nverts))
    for (u, v), c in zip(p.edges.tolist(), p.edge_w.tolist()):
        w[u, v] += c
        w[v, u] += c
    deg = w.sum(axis=1)
    s = 1 / np.sqrt(np.maximum(deg, 1e-300))
    vals, vecs = np.linalg.eigh(w * s[:, None] * s[None, :])
    basis = vecs[:, -min(6, p.nverts):-1] * s[:, None]
    rng = np.random.default_rng(seed)
    best_r, best_bits = None, None
    for t in range(trials):
        f = basis[:, 0] if t == 0 else basis @ rng.standard_normal(basis.shape[1])
        order = np.argsort(f, kind="stable")
        bits = np.zeros(p.nverts, dtype=bool)
        for v in order[:-1]:
            bits[v] = True
            r = p.evaluate_bits(bits)
            if best_r is None or r < best_r:
                best_r, best_bits = r, bits.copy()
    best_r, best_bits = _local_search(p, best_bits)
    mask = sum(1 << int(v) for v in np.nonzero(best_bits)[0])
    return best_r, p.lighter_side(mask)


def _milp_cut(p: CutProblem, start: tuple[Fraction, int], time_limit: float | None) -> tuple[tuple[Fraction, int], bool]:
    """Dinkelbach iterations, each an integer program solved by HiGHS; returns (best, proven)."""
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import lil_matrix

    nv, ne = p.nverts, len(p.edges)
    cons = lil_matrix((2 * ne + 2, nv + ne))
    for i, (u, v) in enumerate(p.edges.tolist()):
        cons[2 * i, nv + i] = 1
        cons[2 * i, u] = -1
        cons[2 * i, v] = 1
        cons[2 * i + 1, nv + i] = 1
        cons[2 * i + 1, u] = 1
        cons[2 * i + 1, v] = -1
    cons[2 * ne, :nv] = p.vert_w
    cons[2 * ne + 1, :nv] = 1
    lb = np.r_[np.zeros(2 * ne), -np.inf, 1]
    ub = np.r_[np.full(2 * ne, np.inf), p.total // 2, np.inf]
    integ = np.r_[np.ones(nv), np.zeros(ne)]
    a = LinearConstraint(cons.tocsr(), lb, ub)
    best = start
    opts = {"mip_rel_gap": 0, "disp": False}
    if time_limit is not None:
        opts["time_limit"] = float(time_limit)
    while True:
        lam = best[0]
        obj = np.r_[-lam.numerator * p.vert_w, lam.denominator * p.edge_w].astype(float)
        res = milp(obj, constraints=a, integrality=integ, bounds=Bounds(0, 1), options=opts)
        if res.x is None:
            return best, False
        mask = sum(1 << v for v in range(nv) if res.x[v] > 0.5)
        val = p.evaluate(mask)
        if val < lam:
            best = (val, p.lighter_side(mask))
            continue
        return best, res.status == 0


def exp0_b(x: SimplicialComplex, method: str = "auto", budget_log2: float = DEFAULT_CLASS_BUDGET_LOG2,
           time_limit: float | None = 120.0, seed: int = 0) -> ExpResult:
    """Exp^0_b by the best available route.

    "quotient": class enumeration (exact). "exhaustive": all vertex subsets (exact).
    "milp": Dinkelbach over HiGHS integer programs, exact when it finishes.
    "bracket": exact spectral lower bound and heuristic cut upper bound.
    "auto": the first of these that fits the budget and time limit.
    """
    _check_k(x, 0)
    nv = x.dim_size(0)
    p, scale = cut_problem_of_complex(x)
    if method == "quotient" or (method == "auto" and nv - 1 <= budget_log2):
        return exp_b(x, 0, budget_log2)
    if method == "exhaustive":
        val, wit = _exhaustive_cut(p)
        return ExpResult(0, "b", val * scale, ChainVector(0, wit, nv), "exhaustive")
    start = heuristic_cut(p, seed)
    if method in ("milp", "auto"):
        (val, wit), proven = _milp_cut(p, start, time_limit)
        if proven:
            return ExpResult(0, "b", val * scale, ChainVector(0, wit, nv), "milp")
        start = (val, wit)
        if method == "milp":
            return ExpResult(0, "b", None, ChainVector(0, wit, nv), "milp-timeout", None, val * scale)
    if method not in ("bracket", "auto", "milp"):
        raise ValueError(f"unknown method {method!r}")
    lower, mu = spectral_lower_bound(x)
    val, wit = start
    upper = val * scale
    exact = upper if upper == lower else None
    return ExpResult(0, "b", exact, ChainVector(0, wit, nv), "bracket", lower, upper,
                     {"certified_lambda2_upper": fmt(mu)})


def spectral_lower_bound(x: SimplicialComplex) -> tuple[Fraction, Fraction]:
    """Exact lower bound Exp^0_b >= 1 - mu, with mu an exactly certified bound on lambda_2.

    With top-face counts as edge weights each vertex has weighted degree n
    times its top-face count, so Exp^0_b(S) = 2 cut(S) / vol(S) for the lighter
    side S, and the spectral bound cut(S) >= (1 - lambda_2) vol(S) vol(V-S) / vol(V)
    gives the claim.
    """
    g = weighted_one_skeleton(x)
    mu = certified_second_eigenvalue_bound(g)
    return max(Fraction(0), 1 - mu), mu


@dataclass(frozen=True)
class CheegerResult:
    h: Fraction
    witness: tuple[int, ...]
    method: str

    def to_dict(self) -> dict:
        return {"h": fmt(self.h), "witness": list(self.witness), "method": self.method}


def cheeger_graph(g: SimplicialComplex, method: str = "exhaustive", time_limit: float | None = 600.0) -> CheegerResult:
    """h(X) = min |E(A, A')| / min(w(A), w(A')) with w the degree sum; exact.

    "exhaustive" needs at most 24 vertices (TooManyVertices otherwise);
    "milp" solves the same ratio cut by integer programming.
    """
    if not nx.is_connected(_nx_graph(g)):
        raise DimMismatch("Cheeger constant needs a connected graph")
    p = cut_problem_of_graph(g)
    if method == "exhaustive":
        val, wit = _exhaustive_cut(p)
    elif method == "milp":
        (val, wit), proven = _milp_cut(p, heuristic_cut(p), time_limit)
        if not proven:
            raise SearchSpaceTooLarge("integer program did not finish within the time limit", float("nan"), float("nan"))
    else:
        raise ValueError(f"unknown method {method!r}")
    verts = g.vertices
    return CheegerResult(val, tuple(verts[i] for i in range(p.nverts) if wit >> i & 1), method)


def _nx_graph(x: SimplicialComplex) -> nx.Graph:
    gr = nx.Graph()
    gr.add_nodes_from(x.vertices)
    gr.add_edges_from(x.faces.get(1, []))
    return gr


# ---------------------------------------------------------------- certificates


@dataclass
class BoundRecord:
    theorem: str
    k: int
    value: Fraction
    hypotheses: dict
    compared_with: str | None = None
    holds: bool | None = None

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "k": self.k,
            "value": fmt(self.value),
            "hypotheses": self.hypotheses,
            "compared_with": self.compared_with,
            "holds": self.holds,
        }


def _compare(rec: BoundRecord, exp: ExpResult | None) -> BoundRecord:
    """Exact comparison against the exact value, or against the certified lower end of a bracket."""
    if exp is None or exp.value is NOT_DEFINED:
        return rec
    if exp.value is not None:
        rec.compared_with, rec.holds = f"exact {fmt(exp.value)}", exp.value >= rec.value
    elif exp.lower is not None and exp.lower >= rec.value:
        rec.compared_with, rec.holds = f"certified lower bound {fmt(exp.lower)}", True
    elif exp.upper is not None and exp.upper < rec.value:
        rec.compared_with, rec.holds = f"witness upper bound {fmt(exp.upper)}", False
    return rec


def transitivity_on_top(x: SimplicialComplex, action: PermutationAction | None = None) -> dict:
    """Transitivity of the symmetry group on X(n): the product-set criterion and the orbit."""
    if action is None and x.coset_data is not None:
        cd = x.coset_data
        cert = check_strong_symmetry(cd.group, cd.subgroups, x)
        return {"source": "coset complex", **cert.to_dict(), "transitive": cert.orbit_transitive and cert.agree}
    if action is None:
        raise HypothesisUnmet("no group action supplied")
    top = x.faces[x.top_dim]
    orb = action.orbit(top[0])
    return {"source": "permutation action", "orbit_size": len(orb), "top_faces": len(top),
            "transitive": len(orb) == len(top) and orb.issubset(set(top))}


def certificate_theorem_crad(x: SimplicialComplex, k: int, action: PermutationAction | None = None,
                             exact: ExpResult | None = None, cones: ConeReport | None = None) -> BoundRecord:
    """Exp^k_b >= 1 / (C(n+1, k+1) Crad_k) for a complex with a group transitive on top faces."""
    hyp = transitivity_on_top(x, action)
    if not hyp["transitive"]:
        raise HypothesisUnmet("the group does not act transitively on top faces")
    rep = cones if cones is not None else crad_upper(x, k)
    crad = rep.crad_upper
    n = x.top_dim
    value = Fraction(0) if crad is INFINITE else Fraction(1, comb(n + 1, k + 1) * crad)
    hyp = {"transitive_on_top_faces": True, "crad_upper": "inf" if crad is INFINITE else crad,
           "cone_fills_optimal": rep.optimal_fills}
    return _compare(BoundRecord("crad", k, value, hyp), exact)


def certificate_theorem_n0n1(x: SimplicialComplex, group: Group, subgroups: Sequence[SubgroupHandle],
                             exact0: ExpResult | None = None, exact1: ExpResult | None = None,
                             dehn_upper: int | None = None, diameter: int | None = None) -> list[BoundRecord]:
    """Bounds for k = 0, 1 from bounded generation (N0' = 1 + diameter) and a Dehn upper estimate.

    dehn_upper is an upper estimate of Dehn(2 N0' + 1); without it the k = 1
    record carries value 0 and hypothesis "dehn": "unknown".
    """
    n = x.top_dim
    d = bounded_generation_diameter(group, subgroups) if diameter is None else diameter
    n0p = 1 + d
    hyp = {"bounded_generation_diameter": d, "N0_prime": n0p}
    out = [_compare(BoundRecord("n0n1", 0, Fraction(1, (n + 1) * n0p), dict(hyp)), exact0)]
    m = 2 * n0p + 1
    if dehn_upper is None:
        rec = BoundRecord("n0n1", 1, Fraction(0), {**hyp, "m": m, "dehn": "unknown"})
    else:
        pv = p_poly(m, dehn_upper)
        rec = _compare(BoundRecord("n0n1", 1, Fraction(1, comb(n + 1, 2) * pv),
                                   {**hyp, "m": m, "dehn_upper": dehn_upper, "p": pv}), exact1)
    out.append(rec)
    return out


@dataclass(frozen=True)
class ChungResult:
    h: Fraction
    diameter: int
    bound: Fraction
    holds: bool

    def to_dict(self) -> dict:
        return {"h": fmt(self.h), "diameter": self.diameter, "bound": fmt(self.bound), "holds": self.holds}


def is_edge_transitive(g: SimplicialComplex, action: PermutationAction | None = None) -> bool:
    act = graph_automorphisms(g) if action is None else action
    edges = [tuple(e) for e in g.faces[1]]
    return act.is_transitive_on(edges)


def verify_chung_bound(g: SimplicialComplex, action: PermutationAction | None = None,
                       method: str = "exhaustive") -> ChungResult:
    """h(X) >= 1/(2D) for an edge-transitive graph of diameter D."""
    if not is_edge_transitive(g, action):
        raise NotEdgeTransitive("the bound is only claimed for edge-transitive graphs")
    h = cheeger_graph(g, method).h
    d = nx.diameter(_nx_graph(g))
    bound = Fraction(1, 2 * d)
    return ChungResult(h, d, bound, h >= bound)


# ---------------------------------------------------------------- Evra-Kaufman hypotheses


def evra_kaufman_checklist(x: SimplicialComplex, epsilon_prime: Fraction, lam: float,
                           budget_log2: float = DEFAULT_CLASS_BUDGET_LOG2) -> dict:
    """Hypothesis report: local spectral expansion and coboundary expansion of proper links.

    Coboundary expansion of each link of a nonempty face of dim <= n-2 is
    computed exactly where the class enumeration fits the budget and marked
    "unknown" otherwise. No (epsilon, mu) values are produced.
    """
    from .complex import link
    from .spectral import local_spectral_sweep

    sweep = local_spectral_sweep(x, lam)
    links = []
    all_known, all_ok = True, True
    memo: dict[str, list] = {}
    for d in range(0, x.top_dim - 1):
        for tau in x.faces[d]:
            lk = link(x, tau)
            key = _shape_key(lk)
            if key not in memo:
                vals = []
                for j in range(0, lk.top_dim):
                    try:
                        r = exp_b(lk, j, budget_log2)
                        vals.append(r.value)
                    except SearchSpaceTooLarge:
                        vals.append(None)
                memo[key] = vals
            vals = memo[key]
            status = []
            for j, v in enumerate(vals):
                if v is None:
                    all_known = False
                    status.append({"k": j, "exp_b": "unknown"})
                else:
                    ok = v is not NOT_DEFINED and v >= epsilon_prime
                    all_ok &= ok
                    status.append({"k": j, "exp_b": fmt(v), "at_least_epsilon": ok})
            links.append({"face": list(tau), "coboundary": status})
    return {
        "lambda": lam,
        "epsilon_prime": fmt(epsilon_prime),
        "local_spectral": sweep.to_dict(),
        "links": links,
        "coboundary_hypothesis": "holds" if (all_ok and all_known) else ("fails" if not all_ok else "unknown"),
        "local_spectral_hypothesis": "holds" if sweep.is_local_spectral_expander else "fails",
    }


def _shape_key(x: SimplicialComplex) -> str:
    """Relabel vertices in sorted order; translates of a link under a coset action often coincide."""
    pos = {v: i for i, v in enumerate(x.vertices)}
    tops = sorted(tuple(sorted(pos[v] for v in f)) for f in x.maximal_faces)
    return repr(tops)


# ---------------------------------------------------------------- report


@dataclass
class ExpansionReport:
    k: int
    exp_b: ExpResult | None
    exp_z: ExpResult | None
    sys_weight: object
    bounds: list[BoundRecord] = field(default_factory=list)

    def check(self) -> bool:
        """Every bound with satisfied hypotheses lies below the exact value when both are present."""
        ok = True
        for b in self.bounds:
            if self.exp_b is not None and isinstance(self.exp_b.value, Fraction) and b.k == self.k:
                ok &= self.exp_b.value >= b.value
        return ok

    def to_dict(self, x: SimplicialComplex | None = None) -> dict:
        eb = self.exp_b.to_dict(x) if self.exp_b is not None else None
        return {
            "k": self.k,
            "exp_b": None if eb is None else eb.get("exp_b"),
            "exp_b_detail": eb,
            "exp_z": None if self.exp_z is None else fmt(self.exp_z.value),
            "sys_weight": fmt(self.sys_weight),
            "witness": None if eb is None else eb.get("witness"),
            "bounds": [b.to_dict() for b in self.bounds],
        }


def remark_consistency(x: SimplicialComplex, k: int, exp: ExpResult) -> bool:
    """Exp^k_b > 0 forces Z^k = B^k."""
    if not isinstance(exp.value, Fraction) or exp.value == 0:
        return True
    return space_basis(x, "Z^k", k).dim == space_basis(x, "B^k", k).dim
