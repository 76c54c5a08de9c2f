"""F2 chains, cochains, boundary operators, cycle spaces, systoles and fillings.

A chain or cochain on X(k) is a Python int used as a bitset: bit i is the
coefficient of the i-th face of X(k) in the complex's sorted face order. The
empty face is the single basis element of dimension -1, so the boundary of a
vertex is the empty face and homology comes out reduced.

Min-weight searches over affine spaces v + span(gens) are exhaustive and run
on numpy uint64 word arrays: a table of all combinations of the low
generators is xored with every combination of the high generators in turn.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix

from .complex import SimplicialComplex, WeightTable
from .errors import DimMismatch, HdxError, SearchSpaceTooLarge

DEFAULT_BUDGET_LOG2 = 24
_TABLE_LOG2 = 14


class NoFilling(HdxError):
    """The cycle is not a boundary."""


class Infinite:
    """Value of a systole when every cycle bounds."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "Infinite"

    def __eq__(self, other) -> bool:
        return other is self or other == float("inf")

    def __hash__(self) -> int:
        return hash(float("inf"))

    def __gt__(self, other) -> bool:
        return other is not self

    def __ge__(self, other) -> bool:
        return True

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return other is self


INFINITE = Infinite()


@dataclass(frozen=True)
class ChainVector:
    dim: int
    bits: int
    length: int

    def __add__(self, other: "ChainVector") -> "ChainVector":
        if other.dim != self.dim or other.length != self.length:
            raise DimMismatch(f"cannot add chains of dims {self.dim} and {other.dim}")
        return ChainVector(self.dim, self.bits ^ other.bits, self.length)

    def __len__(self) -> int:
        return self.bits.bit_count()

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    def support(self) -> list[int]:
        return bits_of(self.bits)

    def is_zero(self) -> bool:
        return self.bits == 0

    def faces(self, x: SimplicialComplex) -> list[tuple]:
        fs = x.faces[self.dim]
        return [fs[i] for i in self.support()]

    @classmethod
    def zero(cls, x: SimplicialComplex, k: int) -> "ChainVector":
        return cls(k, 0, x.dim_size(k))

    @classmethod
    def from_faces(cls, x: SimplicialComplex, k: int, faces: Iterable[Sequence[int]]) -> "ChainVector":
        bits = 0
        for f in faces:
            bits ^= 1 << x.face_index(f)
        return cls(k, bits, x.dim_size(k))

    @classmethod
    def from_indices(cls, x: SimplicialComplex, k: int, idx: Iterable[int]) -> "ChainVector":
        bits = 0
        for i in idx:
            bits ^= 1 << int(i)
        return cls(k, bits, x.dim_size(k))

    @classmethod
    def ones(cls, x: SimplicialComplex, k: int) -> "ChainVector":
        n = x.dim_size(k)
        return cls(k, (1 << n) - 1, n)


def bits_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(idx: Iterable[int]) -> int:
    m = 0
    for i in idx:
        m |= 1 << int(i)
    return m


# ---------------------------------------------------------------- operators


class Operators:
    """Boundary and coboundary masks of a complex, built once and cached on it."""

    def __init__(self, x: SimplicialComplex):
        self.x = x
        self._bd: dict[int, list[int]] = {}
        self._cob: dict[int, list[int]] = {}

    @classmethod
    def of(cls, x: SimplicialComplex) -> "Operators":
        ops = x.__dict__.get("_hdx_ops")
        if ops is None:
            ops = cls(x)
            x.__dict__["_hdx_ops"] = ops
        return ops

    def boundary_masks(self, k: int) -> list[int]:
        """Image of each k-face under the boundary map, as masks over X(k-1)."""
        if k not in self._bd:
            if k < 0 or k > self.x.top_dim:
                self._bd[k] = [0] * self.x.dim_size(k)
            else:
                table = self.x.facet_table[k]
                self._bd[k] = [mask_of(row) for row in table.tolist()]
        return self._bd[k]

    def coboundary_masks(self, k: int) -> list[int]:
        """Image of each k-face indicator under d_k, as masks over X(k+1)."""
        if k not in self._cob:
            out = [0] * self.x.dim_size(k)
            if 0 <= k + 1 <= self.x.top_dim:
                for j, row in enumerate(self.x.facet_table[k + 1].tolist()):
                    bit = 1 << j
                    for i in row:
                        out[i] |= bit
            self._cob[k] = out
        return self._cob[k]

    def sparse_boundary(self, k: int) -> csr_matrix:
        """Incidence matrix of the boundary map C_k -> C_{k-1} (rows: X(k-1))."""
        x = self.x
        rows = x.dim_size(k - 1)
        cols = x.dim_size(k)
        if k < 0 or k > x.top_dim:
            return csr_matrix((max(rows, 0), cols), dtype=np.int64)
        table = x.facet_table[k]
        r = table.ravel()
        c = np.repeat(np.arange(cols), k + 1)
        return csr_matrix((np.ones(len(r), dtype=np.int64), (r, c)), shape=(rows, cols))

    def sparse_coboundary(self, k: int) -> csr_matrix:
        """Matrix of d_k: C^k -> C^{k+1}, built from coface lists independently of the boundary table."""
        x = self.x
        masks = self.coboundary_masks(k)
        rows, cols = [], []
        for j, m in enumerate(masks):
            for i in bits_of(m):
                rows.append(i)
                cols.append(j)
        return csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)),
                          shape=(x.dim_size(k + 1), x.dim_size(k)))


def _apply(masks: list[int], bits: int) -> int:
    out = 0
    while bits:
        low = bits & -bits
        out ^= masks[low.bit_length() - 1]
        bits ^= low
    return out


def boundary(x: SimplicialComplex, k: int, a: ChainVector) -> ChainVector:
    if a.dim != k or k < 0:
        raise DimMismatch(f"boundary_{k} applied to a {a.dim}-chain")
    return ChainVector(k - 1, _apply(Operators.of(x).boundary_masks(k), a.bits), x.dim_size(k - 1))


def coboundary(x: SimplicialComplex, k: int, phi: ChainVector) -> ChainVector:
    if phi.dim != k:
        raise DimMismatch(f"d_{k} applied to a {phi.dim}-cochain")
    return ChainVector(k + 1, _apply(Operators.of(x).coboundary_masks(k), phi.bits), x.dim_size(k + 1))


def pair(phi: ChainVector, a: ChainVector) -> int:
    """phi(A) in F2."""
    if phi.dim != a.dim:
        raise DimMismatch("cochain and chain of different dimensions")
    return (phi.bits & a.bits).bit_count() & 1


# ---------------------------------------------------------------- GF(2) elimination


class EchelonBasis:
    """Incremental GF(2) basis keyed by leading (highest) bit, with optional combination tracking."""

    def __init__(self):
        self.rows: dict[int, int] = {}
        self.combos: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, v: int, combo: int = 0) -> tuple[int, int]:
        rows, combos = self.rows, self.combos
        while v:
            p = v.bit_length() - 1
            r = rows.get(p)
            if r is None:
                break
            v ^= r
            combo ^= combos.get(p, 0)
        return v, combo

    def add(self, v: int, combo: int = 0) -> tuple[bool, int]:
        """Insert v; returns (independent, residual combination when dependent)."""
        v, combo = self.reduce(v, combo)
        if v:
            p = v.bit_length() - 1
            self.rows[p] = v
            self.combos[p] = combo
            return True, 0
        return False, combo

    def contains(self, v: int) -> bool:
        return self.reduce(v)[0] == 0

    def vectors(self) -> list[int]:
        return [self.rows[p] for p in sorted(self.rows)]


def image_basis(masks: Sequence[int]) -> EchelonBasis:
    e = EchelonBasis()
    for m in masks:
        if m:
            e.add(m)
    return e


def kernel_basis(masks: Sequence[int]) -> list[int]:
    """Basis of the kernel of the map sending basis vector i to masks[i]."""
    e = EchelonBasis()
    out = []
    for i, m in enumerate(masks):
        indep, combo = e.add(m, 1 << i)
        if not indep:
            out.append(combo)
    return out


def solve(masks: Sequence[int], target: int) -> int | None:
    """Some A with sum of masks[i] over bits of A equal to target, or None."""
    e = EchelonBasis()
    for i, m in enumerate(masks):
        e.add(m, 1 << i)
    rest, combo = e.reduce(target)
    return combo if rest == 0 else None


@dataclass(frozen=True)
class SpaceBasis:
    which: str
    k: int
    basis: list[ChainVector]
    echelon: EchelonBasis

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: ChainVector) -> bool:
        return self.echelon.contains(v.bits)


SPACES = ("B_k", "Z_k", "B^k", "Z^k")


def space_basis(x: SimplicialComplex, which: str, k: int) -> SpaceBasis:
    """Bases of boundaries B_k, cycles Z_k, coboundaries B^k or cocycles Z^k."""
    ops = Operators.of(x)
    n = x.dim_size(k)
    if which == "B_k":
        vecs = image_basis(ops.boundary_masks(k + 1)).vectors() if k + 1 <= x.top_dim else []
    elif which == "Z_k":
        vecs = kernel_basis(ops.boundary_masks(k)) if k >= 0 else [1] * (n > 0)
    elif which == "B^k":
        vecs = image_basis(ops.coboundary_masks(k - 1)).vectors() if k >= 0 else []
    elif which == "Z^k":
        vecs = kernel_basis(ops.coboundary_masks(k))
    else:
        raise ValueError(f"unknown space {which!r}; expected one of {SPACES}")
    ech = image_basis(vecs)
    return SpaceBasis(which, k, [ChainVector(k, v, n) for v in vecs], ech)


def rank_boundary(x: SimplicialComplex, k: int) -> int:
    if k < 0 or k > x.top_dim:
        return 0
    return len(image_basis(Operators.of(x).boundary_masks(k)))


def reduced_betti(x: SimplicialComplex, k: int) -> int:
    """dim of reduced homology over F2 (equal to that of reduced cohomology)."""
    return x.dim_size(k) - rank_boundary(x, k) - rank_boundary(x, k + 1)


# ---------------------------------------------------------------- min-weight search


class BitWeights:
    """Additive integer weight of word-packed bitsets via per-byte lookup tables."""

    def __init__(self, face_weights: np.ndarray | None, nbits: int):
        self.nbits = nbits
        self.words = max(1, (nbits + 63) // 64)
        self.uniform = face_weights is None or bool(np.all(face_weights == face_weights[0]) if nbits else True)
        self.scale = int(face_weights[0]) if (face_weights is not None and nbits) else 1
        if not self.uniform:
            w = np.zeros(self.words * 64, dtype=np.int64)
            w[:nbits] = face_weights
            byte_w = w.reshape(-1, 8)
            patterns = ((np.arange(256)[:, None] >> np.arange(8)) & 1).astype(np.int64)
            self.tables = patterns @ byte_w.T  # (256, nbytes)

    def __call__(self, arr: np.ndarray) -> np.ndarray:
        if self.uniform:
            return np.bitwise_count(arr).sum(axis=1, dtype=np.int64) * self.scale
        b = arr.view(np.uint8)
        out = np.zeros(arr.shape[0], dtype=np.int64)
        for j in range(b.shape[1]):
            out += self.tables[b[:, j], j]
        return out

    def of_int(self, v: int) -> int:
        return int(self(to_words([v], self.words))[0])


def to_words(vs: Sequence[int], words: int) -> np.ndarray:
    out = np.zeros((len(vs), words), dtype=np.uint64)
    mask = (1 << 64) - 1
    for r, v in enumerate(vs):
        for w in range(words):
            out[r, w] = (v >> (64 * w)) & mask
    return out


def from_words(row: np.ndarray) -> int:
    v = 0
    for w in range(len(row) - 1, -1, -1):
        v = (v << 64) | int(row[w])
    return v


def _span_table(gens: np.ndarray) -> np.ndarray:
    table = np.zeros((1, gens.shape[1]), dtype=np.uint64)
    for g in gens:
        table = np.concatenate([table, table ^ g])
    return table


def _least_row(arr: np.ndarray, rows: np.ndarray) -> int:
    """Index (into arr) of the row with the least integer value among rows."""
    sub = arr[rows]
    order = np.lexsort(tuple(sub[:, w] for w in range(sub.shape[1])))
    return int(rows[order[0]])


def min_weight_affine(offset: int, gens: Sequence[int], weight: BitWeights,
                      budget_log2: float = DEFAULT_BUDGET_LOG2,
                      stop_at: int | None = None) -> tuple[int, int]:
    """Exact min of weight(offset + span(gens)); returns (weight, least minimizing vector).

    gens must be linearly independent. Raises SearchSpaceTooLarge when
    2^len(gens) exceeds 2^budget_log2.
    """
    r = len(gens)
    if r > budget_log2:
        raise SearchSpaceTooLarge(f"affine space of dimension {r} exceeds budget 2^{budget_log2}", r, budget_log2)
    words = weight.words
    g = to_words(list(gens), words)
    low = min(r, _TABLE_LOG2)
    table = _span_table(g[:low])
    high = g[low:]
    base = to_words([offset], words)[0]
    best_w, best_v = None, None
    shift = np.zeros(words, dtype=np.uint64)
    for step in range(1 << len(high)):
        if step:
            flip = (step & -step).bit_length() - 1
            shift = shift ^ high[flip]
        block = table ^ (base ^ shift)
        ws = weight(block)
        m = int(ws.min())
        if best_w is None or m <= best_w:
            idx = _least_row(block, np.nonzero(ws == m)[0])
            cand = from_words(block[idx])
            if best_w is None or m < best_w or cand < best_v:
                best_w, best_v = m, cand
        if stop_at is not None and best_w <= stop_at:
            break
    return best_w, best_v


# ---------------------------------------------------------------- systoles and fillings


def sys_cardinality(x: SimplicialComplex, k: int, budget_log2: float = DEFAULT_BUDGET_LOG2):
    """Least size of a k-cycle that is not a boundary; INFINITE when every cycle bounds."""
    if k > x.top_dim - 1 or k < 0:
        raise DimMismatch(f"systole needs 0 <= k <= n-1 = {x.top_dim - 1}")
    z = space_basis(x, "Z_k", k)
    b = space_basis(x, "B_k", k)
    if z.dim == b.dim:
        return INFINITE
    if z.dim > budget_log2:
        raise SearchSpaceTooLarge(f"dim Z_{k} = {z.dim} exceeds budget", z.dim, budget_log2)
    words = max(1, (x.dim_size(k) + 63) // 64)
    zs = to_words([v.bits for v in z.basis], words)
    table = _span_table(zs)
    counts = np.bitwise_count(table).sum(axis=1)
    best = None
    for i in np.argsort(counts, kind="stable"):
        c = int(counts[i])
        if c == 0 or (best is not None and c >= best):
            if best is not None and c >= best:
                break
            continue
        if not b.echelon.contains(from_words(table[i])):
            best = c
    return best


@dataclass(frozen=True)
class FillResult:
    chain: ChainVector
    size: int
    optimal: bool
    method: str


def fill(x: SimplicialComplex, k: int, b: ChainVector, budget_log2: float = DEFAULT_BUDGET_LOG2,
         mode: str = "exact") -> FillResult:
    """A least (k+1)-chain with boundary b.

    mode "exact": exhaustive over the solution coset, SearchSpaceTooLarge above budget.
    mode "milp": exact integer program (HiGHS) when the coset is too large to scan.
    mode "greedy": local descent over kernel basis vectors, flagged non-optimal.
    mode "auto": exact within budget, otherwise milp.
    """
    if b.dim != k:
        raise DimMismatch(f"fill_{k} given a {b.dim}-chain")
    ops = Operators.of(x)
    n1 = x.dim_size(k + 1)
    if b.bits == 0:
        return FillResult(ChainVector(k + 1, 0, n1), 0, True, "trivial")
    masks = ops.boundary_masks(k + 1) if k + 1 <= x.top_dim else []
    part = solve(masks, b.bits)
    if part is None:
        raise NoFilling(f"the {k}-cycle is not a boundary")
    kern = _kernel_cached(x, k + 1)
    weight = BitWeights(None, n1)
    if mode in ("exact", "auto") and len(kern) <= budget_log2:
        w, v = min_weight_affine(part, kern, weight, budget_log2)
        return FillResult(ChainVector(k + 1, v, n1), w, True, "exhaustive")
    if mode == "exact":
        raise SearchSpaceTooLarge(f"kernel of dimension {len(kern)} exceeds budget 2^{budget_log2}",
                                  len(kern), budget_log2)
    if mode in ("milp", "auto"):
        # each (k+1)-face has k+2 boundary faces, so |A| >= |b| / (k+2)
        v = _greedy_descent(part, kern)
        if v.bit_count() == -(-b.bits.bit_count() // (k + 2)):
            return FillResult(ChainVector(k + 1, v, n1), v.bit_count(), True, "greedy-at-bound")
        v = _milp_fill(x, k, b.bits)
        if v is not None:
            return FillResult(ChainVector(k + 1, v, n1), v.bit_count(), True, "milp")
    v = _greedy_descent(part, kern)
    return FillResult(ChainVector(k + 1, v, n1), v.bit_count(), False, "greedy")


def _kernel_cached(x: SimplicialComplex, k: int) -> list[int]:
    cache = x.__dict__.setdefault("_hdx_kernels", {})
    if k not in cache:
        cache[k] = kernel_basis(Operators.of(x).boundary_masks(k)) if 0 <= k <= x.top_dim else []
    return cache[k]


def _greedy_descent(v: int, kern: Sequence[int]) -> int:
    improved = True
    while improved:
        improved = False
        for z in kern:
            if (v ^ z).bit_count() < v.bit_count():
                v ^= z
                improved = True
    return v


def _milp_fill(x: SimplicialComplex, k: int, target: int) -> int | None:
    """Least (k+1)-chain A with boundary target, solved as: min sum A, D A - 2 y = target."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    d = Operators.of(x).sparse_boundary(k + 1).tocsc()
    rows, cols = d.shape
    t = np.zeros(rows)
    t[bits_of(target)] = 1
    y = -2 * np.eye(rows)
    from scipy.sparse import hstack, identity as sp_identity

    a = hstack([d, -2 * sp_identity(rows, format="csc")]).tocsr()
    c = np.concatenate([np.ones(cols), np.zeros(rows)])
    ub = np.concatenate([np.ones(cols), np.full(rows, (k + 2) * cols / 2 + 1)])
    res = milp(c, constraints=LinearConstraint(a, t, t), integrality=np.ones(cols + rows),
               bounds=Bounds(np.zeros(cols + rows), ub))
    if res.status != 0 or res.x is None:
        return None
    sol = np.round(res.x[:cols]).astype(np.int64)
    v = mask_of(np.nonzero(sol)[0])
    if _apply(Operators.of(x).boundary_masks(k + 1), v) != target:
        return None
    return v


def fill_constant(x: SimplicialComplex, k: int, m: int, budget_log2: float = DEFAULT_BUDGET_LOG2):
    """Fill_k(M): max over k-boundaries B with |B| <= M of the least filling size.

    Returns (value, exact flag). Enumerates all boundaries with |B| <= M via
    the span of B_k when dim B_k fits the budget.
    """
    bk = space_basis(x, "B_k", k)
    if bk.dim == 0:
        return 0, True
    if bk.dim > budget_log2:
        raise SearchSpaceTooLarge(f"dim B_{k} = {bk.dim} exceeds budget", bk.dim, budget_log2)
    words = max(1, (x.dim_size(k) + 63) // 64)
    table = _span_table(to_words([v.bits for v in bk.basis], words))
    counts = np.bitwise_count(table).sum(axis=1)
    best = 0
    exact = True
    for i in np.nonzero((counts > 0) & (counts <= m))[0]:
        r = fill(x, k, ChainVector(k, from_words(table[i]), x.dim_size(k)), budget_log2, mode="auto")
        exact &= r.optimal
        best = max(best, r.size)
    return best, exact


def contract_with_cone(cone, phi: ChainVector) -> ChainVector:
    """(iota phi)(A) = phi(Cone(A)) for a (j+1)-cochain phi; returns a j-cochain."""
    j = phi.dim - 1
    if j < -1 or j > cone.max_dim:
        raise DimMismatch(f"cone of max dim {cone.max_dim} cannot contract a {phi.dim}-cochain")
    table = cone.tables[j]
    bits = 0
    for i, c in enumerate(table):
        if (c & phi.bits).bit_count() & 1:
            bits |= 1 << i
    return ChainVector(j, bits, len(table))
