"""Finite matrix groups by breadth-first generator closure.

Elements are interned as packed byte keys in breadth-first insertion order, so
element ids are reproducible. Id 0 is always the identity. Queries are
vectorized over numpy id arrays: decode ids to code stacks, multiply with the
batched kernels of the algebra module, and look the results up again.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import __version__
from .algebra import (
    Ring,
    SquareMatrix,
    batch_add,
    batch_mul,
    batch_neg,
    batch_sub,
    identity_codes,
)
from .errors import (
    ForeignElement,
    GroupTooLarge,
    InvariantViolation,
    NotGenerating,
    ShapeMismatch,
    Unreachable,
)

DEFAULT_SIZE_CAP = 2**22
_CHUNK = 1 << 15


class Codec:
    """Packs (B, n, n, slots) code stacks into fixed-width byte keys and back."""

    def __init__(self, ring: Ring, size: int):
        self.ring = ring
        self.size = size
        self.bits = max(1, math.ceil(math.log2(ring.q)))
        self.ncodes = size * size * ring.slots
        self.width = (self.ncodes * self.bits + 7) // 8
        self.dtype = np.dtype(("S", self.width))

    def pack(self, codes: np.ndarray) -> np.ndarray:
        flat = codes.reshape(codes.shape[0], -1)
        bits = (flat[..., None] >> np.arange(self.bits, dtype=np.uint8)) & 1
        packed = np.packbits(bits.reshape(flat.shape[0], -1).astype(np.uint8), axis=1)
        return np.ascontiguousarray(packed)

    def keys(self, packed: np.ndarray) -> np.ndarray:
        return packed.view(self.dtype).ravel()

    def unpack(self, packed: np.ndarray) -> np.ndarray:
        bits = np.unpackbits(packed, axis=1, count=self.ncodes * self.bits)
        bits = bits.reshape(packed.shape[0], self.ncodes, self.bits)
        codes = (bits << np.arange(self.bits, dtype=np.uint8)).sum(axis=2, dtype=np.uint8)
        return codes.reshape(packed.shape[0], self.size, self.size, self.ring.slots)


class Group:
    """A finite group of square matrices, closed under its generators.

    Use `generate_closure` to build one. `packed[i]` is the key of element i,
    `layer[i]` its word length over the positive generators.
    """

    def __init__(self, ring: Ring, size: int, packed: np.ndarray, layer: np.ndarray,
                 generators: Sequence[int], size_cap: int = DEFAULT_SIZE_CAP):
        self.ring = ring
        self.size = size
        self.codec = Codec(ring, size)
        self.packed = packed
        self.layer = layer
        self.generators = tuple(int(g) for g in generators)
        self.size_cap = size_cap
        keys = self.codec.keys(packed)
        self._order = np.argsort(keys, kind="stable")
        self._sorted_keys = keys[self._order]
        self._mul_table: np.ndarray | None = None
        self._inv: np.ndarray | None = None

    def __len__(self) -> int:
        return self.packed.shape[0]

    @property
    def order(self) -> int:
        return len(self)

    @property
    def identity_id(self) -> int:
        return 0

    # -- encoding

    def codes(self, ids) -> np.ndarray:
        ids = np.atleast_1d(np.asarray(ids, dtype=np.int64))
        return self.codec.unpack(self.packed[ids])

    def element(self, gid: int) -> SquareMatrix:
        return SquareMatrix(self.codes([gid])[0], self.ring)

    def lookup_codes(self, codes: np.ndarray, strict: bool = True) -> np.ndarray:
        """Ids of a code stack; -1 (or ForeignElement when strict) for non-members."""
        keys = self.codec.keys(self.codec.pack(codes))
        pos = np.searchsorted(self._sorted_keys, keys)
        pos_c = np.minimum(pos, len(self) - 1)
        found = self._sorted_keys[pos_c] == keys
        ids = np.where(found, self._order[pos_c], -1)
        if strict and not found.all():
            raise ForeignElement(f"{int((~found).sum())} matrices are not in the group")
        return ids.astype(np.int64)

    def index_of(self, m: SquareMatrix) -> int:
        if m.ring != self.ring or m.size != self.size:
            raise ForeignElement("matrix over a different ring or of a different size")
        return int(self.lookup_codes(m.codes[None])[0])

    def contains(self, m: SquareMatrix) -> bool:
        if m.ring != self.ring or m.size != self.size:
            return False
        return int(self.lookup_codes(m.codes[None], strict=False)[0]) >= 0

    # -- arithmetic on ids

    def mul(self, a, b) -> np.ndarray:
        """Elementwise products a[i] * b[i] (broadcasting scalars)."""
        a = np.atleast_1d(np.asarray(a, dtype=np.int64))
        b = np.atleast_1d(np.asarray(b, dtype=np.int64))
        if self._mul_table is not None:
            return self._mul_table[a, b].astype(np.int64)
        a, b = np.broadcast_arrays(a, b)
        out = np.empty(a.shape, dtype=np.int64)
        for lo in range(0, a.size, _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            ca, cb = self.codes(a.ravel()[sl]), self.codes(b.ravel()[sl])
            out.ravel()[sl] = self.lookup_codes(batch_mul(self.ring, ca, cb))
        return out

    def right_mul_all(self, ids, h: int) -> np.ndarray:
        """ids[i] * h for a single element h."""
        ids = np.asarray(ids, dtype=np.int64)
        if self._mul_table is not None:
            return self._mul_table[ids, h].astype(np.int64)
        hc = self.codes([h])
        out = np.empty(ids.shape, dtype=np.int64)
        for lo in range(0, ids.size, _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            out.ravel()[sl] = self.lookup_codes(batch_mul(self.ring, self.codes(ids.ravel()[sl]), hc))
        return out

    def left_mul_all(self, g: int, ids) -> np.ndarray:
        """g * ids[i] for a single element g."""
        ids = np.asarray(ids, dtype=np.int64)
        if self._mul_table is not None:
            return self._mul_table[g, ids].astype(np.int64)
        gc = self.codes([g])
        out = np.empty(ids.shape, dtype=np.int64)
        for lo in range(0, ids.size, _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            out.ravel()[sl] = self.lookup_codes(batch_mul(self.ring, gc, self.codes(ids.ravel()[sl])))
        return out

    def inverse(self, ids) -> np.ndarray:
        ids = np.atleast_1d(np.asarray(ids, dtype=np.int64))
        if self._inv is not None:
            return self._inv[ids]
        out = np.empty(ids.shape, dtype=np.int64)
        for lo in range(0, ids.size, _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            out.ravel()[sl] = self.lookup_codes(_batch_inverse(self.ring, self.codes(ids.ravel()[sl])))
        return out

    def all_inverses(self) -> np.ndarray:
        if self._inv is None:
            self._inv = self.inverse(np.arange(len(self)))
        return self._inv

    def mul_table(self, max_order: int = 4096) -> np.ndarray:
        """Full Cayley table (int32), cached; only for small groups."""
        if self._mul_table is None:
            n = len(self)
            if n > max_order:
                raise GroupTooLarge(f"multiplication table of a group of order {n}", n, max_order)
            table = np.empty((n, n), dtype=np.int32)
            ids = np.arange(n)
            for h in range(n):
                table[:, h] = self.right_mul_all(ids, h)
            self._mul_table = table
        return self._mul_table

    def word_value(self, ids: Iterable[int]) -> int:
        acc = 0
        for g in ids:
            acc = int(self.mul(acc, g)[0])
        return acc


def _batch_inverse(ring: Ring, codes: np.ndarray) -> np.ndarray:
    n = codes.shape[1]
    ident = identity_codes(n, ring)[None]
    u = batch_sub(ring, codes, ident)
    neg_u = batch_neg(ring, u)
    total = np.broadcast_to(ident, codes.shape).copy()
    term = np.broadcast_to(ident, codes.shape).copy()
    for _ in range(n):
        term = batch_mul(ring, term, neg_u)
        total = batch_add(ring, total, term)
    check = batch_mul(ring, codes, total)
    bad = (check != ident).reshape(codes.shape[0], -1).any(axis=1)
    if bad.any():
        # Not identity plus nilpotent: fall back to g^-1 = g^(k-1) with g^k = e.
        for idx in np.nonzero(bad)[0]:
            g = codes[idx : idx + 1]
            power, prev = g, ident
            while not np.array_equal(power, ident):
                prev = power
                power = batch_mul(ring, power, g)
            total[idx] = prev[0]
    return total


def generate_closure(generators: Sequence[SquareMatrix], size_cap: int = DEFAULT_SIZE_CAP) -> Group:
    """Breadth-first closure of a generating set under right multiplication.

    Generators are sorted by key before the search; within a layer new
    elements are numbered by first appearance in (frontier id, generator)
    order. Raises GroupTooLarge once more than size_cap elements are found.
    """
    if not generators:
        raise ValueError("at least one generator is required")
    ring = generators[0].ring
    size = generators[0].size
    for g in generators:
        if g.ring != ring or g.size != size:
            raise ValueError("generators must share ring and size")
    codec = Codec(ring, size)
    gen_codes = np.stack([g.codes for g in generators])
    gen_packed = codec.pack(gen_codes)
    gen_keys = codec.keys(gen_packed)
    _, first = np.unique(gen_keys, return_index=True)
    gen_codes = gen_codes[np.sort(first)]
    gen_keys = codec.keys(codec.pack(gen_codes))
    gen_codes = gen_codes[np.argsort(gen_keys, kind="stable")]

    ident = identity_codes(size, ring)[None]
    packed_layers = [codec.pack(ident)]
    layer_of = [np.zeros(1, dtype=np.int32)]
    sorted_keys = codec.keys(packed_layers[0]).copy()
    total = 1
    frontier = packed_layers[0]
    depth = 0
    ngen = gen_codes.shape[0]
    while frontier.shape[0]:
        depth += 1
        cand_keys, cand_pos, cand_packed = [], [], []
        for lo in range(0, frontier.shape[0], _CHUNK):
            block = codec.unpack(frontier[lo : lo + _CHUNK])
            prods = np.concatenate(
                [batch_mul(ring, block, gen_codes[k : k + 1])[:, None] for k in range(ngen)], axis=1
            )
            prods = prods.reshape(-1, size, size, ring.slots)
            pk = codec.pack(prods)
            keys = codec.keys(pk)
            pos = lo * ngen + np.arange(keys.shape[0])
            keys_u, idx = np.unique(keys, return_index=True)
            at = np.searchsorted(sorted_keys, keys_u)
            old = sorted_keys[np.minimum(at, len(sorted_keys) - 1)] == keys_u
            keep = idx[~old]
            cand_keys.append(keys[keep])
            cand_pos.append(pos[keep])
            cand_packed.append(pk[keep])
            pending = sum(len(c) for c in cand_keys)
            if total + pending > size_cap:
                merged = np.unique(np.concatenate(cand_keys))
                if total + len(merged) > size_cap:
                    raise GroupTooLarge(
                        f"closure exceeded {size_cap} elements at layer {depth}",
                        total + len(merged), size_cap)
                cand_keys, cand_pos, cand_packed = _compact(cand_keys, cand_pos, cand_packed)
        if not cand_keys:
            break
        keys = np.concatenate(cand_keys)
        pos = np.concatenate(cand_pos)
        pk = np.concatenate(cand_packed)
        # Keep first occurrence of each new key, ordered by position.
        order = np.lexsort((pos, keys))
        keys, pos, pk = keys[order], pos[order], pk[order]
        first = np.ones(len(keys), dtype=bool)
        first[1:] = keys[1:] != keys[:-1]
        keys, pos, pk = keys[first], pos[first], pk[first]
        by_pos = np.argsort(pos, kind="stable")
        new_packed = pk[by_pos]
        if new_packed.shape[0] == 0:
            break
        total += new_packed.shape[0]
        if total > size_cap:
            raise GroupTooLarge(f"closure exceeded {size_cap} elements at layer {depth}", total, size_cap)
        packed_layers.append(new_packed)
        layer_of.append(np.full(new_packed.shape[0], depth, dtype=np.int32))
        sorted_keys = np.sort(np.concatenate([sorted_keys, keys]))
        frontier = new_packed
    packed = np.concatenate(packed_layers)
    layer = np.concatenate(layer_of)
    group = Group(ring, size, packed, layer, [], size_cap)
    gen_ids = group.lookup_codes(gen_codes)
    group.generators = tuple(int(g) for g in gen_ids)
    return group


def _compact(cand_keys, cand_pos, cand_packed):
    keys = np.concatenate(cand_keys)
    pos = np.concatenate(cand_pos)
    pk = np.concatenate(cand_packed)
    order = np.lexsort((pos, keys))
    keys, pos, pk = keys[order], pos[order], pk[order]
    first = np.ones(len(keys), dtype=bool)
    first[1:] = keys[1:] != keys[:-1]
    return [keys[first]], [pos[first]], [pk[first]]


# ---------------------------------------------------------------- subgroups


@dataclass(frozen=True, eq=False)
class SubgroupHandle:
    """A subgroup of a Group given by its sorted member ids."""

    parent: Group
    members: np.ndarray
    generator_spec: tuple[int, ...] = ()
    name: str = ""

    def __len__(self) -> int:
        return len(self.members)

    @property
    def order(self) -> int:
        return len(self.members)

    def contains(self, ids) -> np.ndarray:
        ids = np.atleast_1d(np.asarray(ids, dtype=np.int64))
        pos = np.minimum(np.searchsorted(self.members, ids), len(self.members) - 1)
        return self.members[pos] == ids

    def intersect(self, other: "SubgroupHandle") -> "SubgroupHandle":
        if other.parent is not self.parent:
            raise ForeignElement("subgroups of different groups")
        common = np.intersect1d(self.members, other.members)
        return SubgroupHandle(self.parent, common, (), f"{self.name}∩{other.name}")

    def nontrivial(self) -> np.ndarray:
        return self.members[self.members != 0]


def subgroup_closure(parent: Group, generators: Sequence[int], name: str = "") -> SubgroupHandle:
    gens = np.unique(np.asarray(list(generators), dtype=np.int64))
    if gens.size and (gens.min() < 0 or gens.max() >= len(parent)):
        raise ForeignElement("generator id outside the parent group")
    members = np.zeros(1, dtype=np.int64)
    frontier = members
    while frontier.size:
        new = np.concatenate([parent.right_mul_all(frontier, int(g)) for g in gens]) if gens.size else frontier[:0]
        new = np.setdiff1d(np.unique(new), members)
        members = np.union1d(members, new)
        frontier = new
    return SubgroupHandle(parent, members, tuple(int(g) for g in gens), name)


def is_closed(h: SubgroupHandle) -> bool:
    g = h.parent
    m = h.members
    a = np.repeat(m, len(m))
    b = np.tile(m, len(m))
    return bool(h.contains(g.mul(a, b)).all() and h.contains(g.inverse(m)).all())


@dataclass(frozen=True)
class CosetId:
    subgroup_index: int
    representative: int


@dataclass(frozen=True, eq=False)
class CosetPartition:
    """rep_of[g] is the least id of the coset gK; reps lists them increasingly."""

    subgroup: SubgroupHandle
    rep_of: np.ndarray
    reps: np.ndarray
    subgroup_index: int = 0

    def __len__(self) -> int:
        return len(self.reps)

    def coset_id(self, g: int) -> CosetId:
        return CosetId(self.subgroup_index, int(self.rep_of[g]))

    def index(self, g) -> np.ndarray:
        """Position (0..#cosets-1) of the coset containing each g."""
        return np.searchsorted(self.reps, self.rep_of[np.asarray(g, dtype=np.int64)])


def enumerate_cosets(parent: Group, k: SubgroupHandle, subgroup_index: int = 0) -> CosetPartition:
    """Left cosets gK, each labelled by its least element id.

    Cosets are the connected components of g -- g*s over generators s of K,
    so the cost is |G| times the number of generators rather than |G||K|.
    """
    ids = np.arange(len(parent), dtype=np.int64)
    gens = [int(h) for h in (k.generator_spec or k.members) if h != 0]
    if gens:
        src = np.concatenate([ids] * len(gens))
        dst = np.concatenate([parent.right_mul_all(ids, h) for h in gens])
        graph = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(len(ids), len(ids)))
        _, label = connected_components(graph, directed=True, connection="weak")
        least = np.full(label.max() + 1, len(ids), dtype=np.int64)
        np.minimum.at(least, label, ids)
        rep = least[label]
    else:
        rep = ids.copy()
    reps = np.unique(rep)
    counts = np.bincount(np.searchsorted(reps, rep), minlength=len(reps))
    if len(reps) * len(k) != len(parent) or not (counts == len(k)).all():
        raise InvariantViolation("coset partition fails the Lagrange check")
    return CosetPartition(k, rep, reps, subgroup_index)


# ---------------------------------------------------------------- word lengths


def alphabet_of(subgroups: Sequence[SubgroupHandle]) -> np.ndarray:
    """Sorted union of the subgroups minus the identity."""
    if not subgroups:
        return np.zeros(0, dtype=np.int64)
    alpha = np.unique(np.concatenate([s.members for s in subgroups]))
    return alpha[alpha != 0]


def factorization_lengths(parent: Group, subgroups: Sequence[SubgroupHandle],
                          partitions: Sequence[CosetPartition] | None = None) -> np.ndarray:
    """Shortest word length over the union of the subgroups for every element; -1 if unreachable.

    Breadth-first search in which one step from g reaches the whole coset gK_i,
    which is the same as one step along every letter of K_i.
    """
    if partitions is None:
        partitions = [enumerate_cosets(parent, k, i) for i, k in enumerate(subgroups)]
    labels = [p.index(np.arange(len(parent))) for p in partitions]
    dist = np.full(len(parent), -1, dtype=np.int64)
    dist[0] = 0
    frontier = np.zeros(1, dtype=np.int64)
    depth = 0
    while frontier.size and subgroups:
        depth += 1
        hit = np.zeros(len(parent), dtype=bool)
        for lab in labels:
            touched = np.zeros(lab.max() + 1, dtype=bool)
            touched[lab[frontier]] = True
            hit |= touched[lab]
        nxt = np.nonzero(hit & (dist < 0))[0]
        dist[nxt] = depth
        frontier = nxt
    return dist


def factorization_lengths_by_letters(parent: Group, subgroups: Sequence[SubgroupHandle]) -> np.ndarray:
    """Same as factorization_lengths, letter by letter over the alphabet (slow reference)."""
    alpha = alphabet_of(subgroups)
    dist = np.full(len(parent), -1, dtype=np.int64)
    dist[0] = 0
    frontier = np.zeros(1, dtype=np.int64)
    depth = 0
    while frontier.size and alpha.size:
        depth += 1
        nxt = np.unique(np.concatenate([parent.right_mul_all(frontier, int(a)) for a in alpha]))
        nxt = nxt[dist[nxt] < 0]
        dist[nxt] = depth
        frontier = nxt
    return dist


def min_factorization_length(g: int, subgroups: Sequence[SubgroupHandle],
                             lengths: np.ndarray | None = None) -> int:
    parent = subgroups[0].parent if subgroups else None
    if g == 0:
        return 0
    if parent is None:
        raise Unreachable("empty alphabet")
    if lengths is None:
        lengths = factorization_lengths(parent, subgroups)
    d = int(lengths[g])
    if d < 0:
        raise Unreachable(f"element {g} is not generated by the alphabet")
    return d


def bounded_generation_diameter(parent: Group, subgroups: Sequence[SubgroupHandle]) -> int:
    """Max over G of the shortest factorization length (N0' - 1)."""
    if len(parent) == 1:
        return 0
    if not subgroups:
        raise NotGenerating("no subgroups given")
    lengths = factorization_lengths(parent, subgroups)
    if (lengths < 0).any():
        raise NotGenerating(f"{int((lengths < 0).sum())} elements are not generated")
    return int(lengths.max())


def gauss_peel(g: int, left: SubgroupHandle, right: SubgroupHandle) -> tuple[int, int, int]:
    """Split g = g1 * g2 * residue with g1 in left, g2 in right, residue a corner matrix.

    left is expected to be the lower-right block subgroup (K_0 pattern) and
    right the upper-left block subgroup (K_{n-1} pattern).
    """
    parent = left.parent
    ring = parent.ring
    n = parent.size
    c = parent.codes([g])[0]
    ident = identity_codes(n, ring)
    lower = np.tril_indices(n)
    if not np.array_equal(c[lower], ident[lower]):
        raise ShapeMismatch("element is not upper unitriangular")
    g1c = c.copy()
    g1c[0] = ident[0]
    g1_id = int(parent.lookup_codes(g1c[None], strict=False)[0])
    if g1_id < 0 or not left.contains(g1_id)[0]:
        raise ShapeMismatch("lower-right block of g is not in the left subgroup")
    h = int(parent.mul(parent.inverse(g1_id), g)[0])
    hc = parent.codes([h])[0]
    g2c = hc.copy()
    g2c[0, n - 1] = ident[0, n - 1]
    g2_id = int(parent.lookup_codes(g2c[None], strict=False)[0])
    if g2_id < 0 or not right.contains(g2_id)[0]:
        raise ShapeMismatch("first row of g is not in the right subgroup")
    residue = int(parent.mul(parent.inverse(g2_id), h)[0])
    rc = parent.codes([residue])[0]
    mask = np.ones((n, n), dtype=bool)
    mask[0, n - 1] = False
    if not np.array_equal(rc[mask], ident[mask]):
        raise ShapeMismatch("residue is not a corner matrix")
    if int(parent.word_value([g1_id, g2_id, residue])) != g:
        raise InvariantViolation("peel does not recompose to g")
    return g1_id, g2_id, residue


# ---------------------------------------------------------------- cache files

CACHE_FORMAT = 1


def save_group(group: Group, path: str | os.PathLike) -> None:
    np.savez_compressed(
        path,
        format=np.array(CACHE_FORMAT),
        version=np.array(__version__),
        ring=np.array([group.ring.q, group.ring.slots, ["field", "quotient", "poly"].index(group.ring.mode),
                       int(group.ring.degree_bound)]),
        size=np.array(group.size),
        packed=group.packed,
        layer=group.layer,
        generators=np.array(group.generators, dtype=np.int64),
    )


def load_group(path: str | os.PathLike) -> Group:
    with np.load(path, allow_pickle=False) as data:
        if int(data["format"]) != CACHE_FORMAT or str(data["version"]) != __version__:
            raise ValueError(f"group cache {path} has a different format or version")
        q, slots, mode, bound = (int(x) for x in data["ring"])
        ring = Ring(q, slots, ["field", "quotient", "poly"][mode], bool(bound))
        return Group(ring, int(data["size"]), data["packed"], data["layer"], data["generators"].tolist())


def cache_dir() -> Path | None:
    d = os.environ.get("HDX_CACHE_DIR")
    return Path(d) if d else None


def cached_closure(name: str, generators: Sequence[SquareMatrix], size_cap: int = DEFAULT_SIZE_CAP) -> Group:
    """generate_closure, memoized on disk under $HDX_CACHE_DIR when it is set."""
    d = cache_dir()
    if d is not None:
        path = d / f"{name}.npz"
        if path.exists():
            try:
                return load_group(path)
            except (ValueError, KeyError, OSError):
                pass
    group = generate_closure(generators, size_cap)
    if d is not None:
        d.mkdir(parents=True, exist_ok=True)
        save_group(group, d / f"{name}.npz")
    return group
