"""Words over the subgroups K_i, rewriting moves and their cost ledgers.

Two alphabets appear here. A Letter is an element of one subgroup K_i (an
element id of the ambient Group). An ElemLetter is an elementary matrix
e_{i,j}(r) of a unipotent group; words in those are put into the
lexicographic normal form e_{1,2}(r_12) e_{1,3}(r_13) ... e_{n,n+1}(r_{n,n+1})
by bubble sort, counting every relation applied.

Homotopy-move traces reduce a closed word g_1 ... g_m (product e) to length
at most 2; each move is charged at the current length m and the charges add
up to an upper bound on SFill_1 of the corresponding closed path.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    Ring,
    RingElement,
    SquareMatrix,
    commutator,
    elementary_matrix,
    identity,
)
from .complex import SimplicialComplex
from .errors import (
    InvariantViolation,
    NoGroupAttached,
    NoMatch,
    PathBroken,
    TraceInvalid,
)
from .groups import Group, SubgroupHandle

# ---------------------------------------------------------------- words over the K_i


@dataclass(frozen=True)
class Letter:
    """The element `element` of K_{subgroup}, or its inverse when `inverse` is set."""

    subgroup: int
    element: int
    inverse: bool = False

    def value(self, group: Group) -> int:
        return int(group.inverse(self.element)[0]) if self.inverse else self.element

    def inverted(self) -> "Letter":
        return Letter(self.subgroup, self.element, not self.inverse)

    def to_list(self) -> list:
        return [self.subgroup, self.element, int(self.inverse)]


@dataclass(frozen=True)
class Word:
    letters: tuple[Letter, ...] = ()

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def values(self, group: Group) -> list[int]:
        return [l.value(group) for l in self.letters]

    def evaluate(self, group: Group) -> int:
        return group.word_value(self.values(group))

    def is_trivial(self, group: Group) -> bool:
        return self.evaluate(group) == group.identity_id

    def to_list(self) -> list:
        return [l.to_list() for l in self.letters]


def make_word(group: Group, subgroups: Sequence[SubgroupHandle], pairs: Iterable[tuple[int, int]]) -> Word:
    """Word from (subgroup index, element) pairs, checking membership and dropping nothing."""
    letters = []
    for i, g in pairs:
        g = int(g)
        if g == group.identity_id:
            raise ValueError("letters are nontrivial elements")
        if not bool(subgroups[i].contains(g)[0]):
            raise ValueError(f"element {g} is not in K_{i}")
        letters.append(Letter(i, g))
    return Word(tuple(letters))


@dataclass
class RelationSet:
    """All triples (g1, g2, g3) of nontrivial elements of K_i with g1 g2 g3 = e, per i."""

    triples: list[np.ndarray]  # per subgroup: (count, 3) int64

    def sizes(self) -> list[int]:
        return [len(t) for t in self.triples]

    def __len__(self) -> int:
        return sum(self.sizes())

    def contains(self, i: int, g1: int, g2: int, g3: int) -> bool:
        t = self.triples[i]
        return bool(((t[:, 0] == g1) & (t[:, 1] == g2) & (t[:, 2] == g3)).any())


def relations_from_tables(group: Group, subgroups: Sequence[SubgroupHandle]) -> RelationSet:
    """R_i from the multiplication table of each K_i; every triple is checked in G."""
    out = []
    e = group.identity_id
    for k in subgroups:
        nz = k.nontrivial()
        if len(nz) == 0:
            out.append(np.zeros((0, 3), dtype=np.int64))
            continue
        a, b = np.meshgrid(nz, nz, indexing="ij")
        a, b = a.ravel(), b.ravel()
        prod = group.mul(a, b)
        keep = prod != e
        g3 = group.inverse(prod[keep])
        trip = np.stack([a[keep], b[keep], g3], axis=1).astype(np.int64)
        check = group.mul(group.mul(trip[:, 0], trip[:, 1]), trip[:, 2])
        if (check != e).any() or not k.contains(g3).all():
            raise InvariantViolation("a relation triple does not multiply to the identity inside K_i")
        out.append(trip)
    return RelationSet(out)


# ---------------------------------------------------------------- cost ledger


@dataclass
class CostLedger:
    relation_applications: int = 0
    free_reductions: int = 0
    merges: int = 0
    commutations: int = 0
    insertions: int = 0
    sfill1_upper: int = 0
    charges: list[tuple[str, int, int]] = field(default_factory=list)  # (move, length m, charge)

    @property
    def area_upper(self) -> int:
        return self.relation_applications

    def charge(self, move: str, m: int, amount: int) -> None:
        self.charges.append((move, m, amount))
        self.sfill1_upper += amount

    def to_dict(self) -> dict:
        return {
            "relation_applications": self.relation_applications,
            "free_reductions": self.free_reductions,
            "merges": self.merges,
            "commutations": self.commutations,
            "insertions": self.insertions,
            "area_upper": self.area_upper,
            "sfill1_upper": self.sfill1_upper,
            "charges": [list(c) for c in self.charges],
        }


def free_reduce(word: Word, group: Group | None = None) -> tuple[Word, CostLedger]:
    """Cancel adjacent pairs s s^-1 (same element, opposite flags, or values inverse in G)."""
    ledger = CostLedger()
    stack: list[Letter] = []
    for l in word:
        if stack and _cancels(stack[-1], l, group):
            stack.pop()
            ledger.free_reductions += 1
        else:
            stack.append(l)
    return Word(tuple(stack)), ledger


def _cancels(a: Letter, b: Letter, group: Group | None) -> bool:
    if a.element == b.element and a.inverse != b.inverse:
        return True
    if group is None:
        return False
    return int(group.mul(a.value(group), b.value(group))[0]) == group.identity_id


def apply_relation(word: Word, at: int, rel: tuple[int, int, int, int], orientation: str = "forward",
                   group: Group | None = None, relations: RelationSet | None = None) -> Word:
    """Apply the relation g1 g2 g3 = e of R_i, rel = (i, g1, g2, g3), at position `at` (0-based).

    forward: the letters at, at+1 with values g1, g2 become the single letter g3^-1.
    backward: the letter at `at` with value g3^-1 becomes g1 g2.
    Letter values are compared in G, so `group` is required. With `relations`
    the triple must be one of R_i; without it the triple is checked in G.
    """
    if group is None:
        raise ValueError("apply_relation needs the group to compare letter values")
    i, g1, g2, g3 = (int(v) for v in rel)
    e = group.identity_id
    if relations is not None:
        if not relations.contains(i, g1, g2, g3):
            raise NoMatch(f"{(g1, g2, g3)} is not in R_{i}")
    elif e in (g1, g2, g3) or group.word_value([g1, g2, g3]) != e:
        raise NoMatch(f"{(g1, g2, g3)} is not a relation triple")
    g3inv = int(group.inverse(g3)[0])
    letters = list(word.letters)
    if orientation == "forward":
        if not 0 <= at < len(letters) - 1:
            raise NoMatch(f"no two letters at position {at}")
        if (letters[at].value(group), letters[at + 1].value(group)) != (g1, g2):
            raise NoMatch(f"letters at {at} do not read g1 g2")
        new = letters[:at] + [Letter(i, g3inv)] + letters[at + 2:]
    elif orientation == "backward":
        if not 0 <= at < len(letters):
            raise NoMatch(f"no letter at position {at}")
        if letters[at].value(group) != g3inv:
            raise NoMatch(f"letter at {at} is not g3^-1")
        new = letters[:at] + [Letter(i, g1), Letter(i, g2)] + letters[at + 1:]
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    out = Word(tuple(new))
    if out.evaluate(group) != word.evaluate(group):
        raise InvariantViolation("relation application changed the value of the word")
    return out


# ---------------------------------------------------------------- elementary words


@dataclass(frozen=True)
class ElemLetter:
    """e_{i,j}(coeff), 1-based positions with i < j."""

    i: int
    j: int
    coeff: RingElement

    @property
    def key(self) -> tuple[int, int]:
        return (self.i, self.j)

    def inverted(self) -> "ElemLetter":
        return ElemLetter(self.i, self.j, -self.coeff)

    def matrix(self, size: int, ring: Ring) -> SquareMatrix:
        return elementary_matrix(size, self.i, self.j, self.coeff, ring)

    def __repr__(self) -> str:
        return f"e{self.i}{self.j}({self.coeff!r})"


def elem_word_value(letters: Sequence[ElemLetter], size: int, ring: Ring) -> SquareMatrix:
    acc = identity(size, ring)
    for l in letters:
        acc = acc * l.matrix(size, ring)
    return acc


def elem_inverse(letters: Sequence[ElemLetter]) -> list[ElemLetter]:
    return [l.inverted() for l in reversed(letters)]


def elem_commutator(a: Sequence[ElemLetter], b: Sequence[ElemLetter]) -> list[ElemLetter]:
    """[a, b] = a^-1 b^-1 a b as a word."""
    return elem_inverse(a) + elem_inverse(b) + list(a) + list(b)


def steinberg_commutator(y: ElemLetter, x: ElemLetter) -> ElemLetter | None:
    """The letter [y, x] given by the Steinberg commutator relation, or None when it is trivial."""
    k, l = y.key
    i, j = x.key
    if l == i and j == k:
        raise ValueError("positions (k,l), (l,k) are never both above the diagonal")
    if l == i:
        return ElemLetter(k, j, y.coeff * x.coeff)
    if j == k:
        return ElemLetter(i, l, -(y.coeff * x.coeff))
    return None


@dataclass
class NormalForm:
    letters: list[ElemLetter]
    ledger: CostLedger

    @property
    def is_trivial(self) -> bool:
        return not self.letters


def steinberg_normal_form(word: Sequence[ElemLetter], size: int, ring: Ring, schedule: str = "leftmost",
                          seed: int = 0, check: bool = True) -> NormalForm:
    """Bubble-sort a word of elementary letters into lexicographic normal form.

    Every swap y x -> x y [y, x] is one commutator-relation application and
    every merge e(a) e(b) -> e(a + b) (dropping the letter when a + b = 0) is
    one additivity application; a zero-coefficient input letter costs one
    application to drop. schedule "leftmost" sorts positions one at a time in
    lexicographic order, moving the leftmost occurrence first; "random" fires
    random out-of-order adjacent pairs and reaches the same normal form.
    """
    w = [l for l in word]
    for l in w:
        if not 1 <= l.i < l.j <= size:
            raise ValueError(f"{l} is not above the diagonal of a {size}x{size} matrix")
    ledger = CostLedger()
    before = elem_word_value(w, size, ring) if check else None
    if schedule == "leftmost":
        out = _sort_leftmost(w, size, ledger)
    elif schedule == "random":
        out = _sort_random(w, ledger, random.Random(seed))
    else:
        raise ValueError(f"unknown schedule {schedule!r}")
    if check and elem_word_value(out, size, ring) != before:
        raise InvariantViolation("normal form changed the value of the word")
    return NormalForm(out, ledger)


def _drop_zeros(w: list[ElemLetter], ledger: CostLedger) -> list[ElemLetter]:
    out = []
    for l in w:
        if l.coeff.is_zero():
            ledger.relation_applications += 1
            ledger.merges += 1
        else:
            out.append(l)
    return out


def _swap(w: list[ElemLetter], t: int, ledger: CostLedger) -> None:
    """w[t-1] w[t] = y x  ->  x y [y, x]."""
    y, x = w[t - 1], w[t]
    c = steinberg_commutator(y, x)
    w[t - 1:t + 1] = [x, y] + ([c] if c is not None and not c.coeff.is_zero() else [])
    ledger.relation_applications += 1
    ledger.commutations += 1
    if c is not None and not c.coeff.is_zero():
        ledger.insertions += 1


def _merge(w: list[ElemLetter], t: int, ledger: CostLedger) -> None:
    """w[t] w[t+1] with equal positions -> one letter, or nothing if the sum is 0."""
    a, b = w[t], w[t + 1]
    s = a.coeff + b.coeff
    w[t:t + 2] = [] if s.is_zero() else [ElemLetter(a.i, a.j, s)]
    ledger.relation_applications += 1
    ledger.merges += 1


def _sort_leftmost(w: list[ElemLetter], size: int, ledger: CostLedger) -> list[ElemLetter]:
    rest = _drop_zeros(w, ledger)
    prefix: list[ElemLetter] = []
    for target in itertools.combinations(range(1, size + 1), 2):
        while True:
            start = 1 if rest and rest[0].key == target else 0
            t = next((p for p in range(start, len(rest)) if rest[p].key == target), None)
            if t is None:
                break
            while t > start:
                if rest[t - 1].key < target:
                    raise InvariantViolation("a letter below the current target appeared")
                _swap(rest, t, ledger)
                t -= 1
            if start == 1:
                _merge(rest, 0, ledger)
        if rest and rest[0].key == target:
            prefix.append(rest.pop(0))
    if rest:
        raise InvariantViolation("letters left after sorting every position")
    return prefix


def _sort_random(w: list[ElemLetter], ledger: CostLedger, rng: random.Random) -> list[ElemLetter]:
    w = _drop_zeros(w, ledger)
    while True:
        moves = [t for t in range(len(w) - 1) if w[t].key >= w[t + 1].key]
        if not moves:
            return w
        t = rng.choice(moves)
        if w[t].key == w[t + 1].key:
            _merge(w, t, ledger)
        else:
            _swap(w, t + 1, ledger)


def elementary_factorization(m: SquareMatrix) -> list[ElemLetter]:
    """The lexicographic normal-form letters of a unitriangular matrix.

    g = R_1 M_1 where M_1 is g with row 1 replaced by the unit row and
    R_1 = g M_1^-1 differs from the identity only in row 1; recurse on M_1.
    """
    if not m.is_unitriangular():
        raise ValueError("matrix is not upper unitriangular")
    size, ring = m.size, m.ring
    ident = identity(size, ring).codes
    out: list[ElemLetter] = []
    g = m
    for r in range(1, size):
        codes = np.array(g.codes)
        codes[r - 1] = ident[r - 1]
        rest = SquareMatrix(codes, ring)
        head = g * rest.inverse()
        for j in range(r + 1, size + 1):
            c = head.entry(r, j)
            if not c.is_zero():
                out.append(ElemLetter(r, j, c))
        g = rest
    if not g.is_identity():
        raise InvariantViolation("factorization did not reach the identity")
    return out


# ---------------------------------------------------------------- Steinberg verification


@dataclass
class IdentityReport:
    """Outcome of an exhaustive family of matrix identities."""

    name: str
    checked: int = 0
    failures: list[dict] = field(default_factory=list)
    by_family: dict[str, int] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.checked > 0 and not self.failures

    def record(self, family: str, ok: bool, witness: dict) -> None:
        self.checked += 1
        self.by_family[family] = self.by_family.get(family, 0) + 1
        if not ok and len(self.failures) < 20:
            self.failures.append({"family": family, **witness})

    def to_dict(self) -> dict:
        return {"name": self.name, "holds": self.holds, "checked": self.checked,
                "by_family": dict(sorted(self.by_family.items())), "failures": self.failures}


def _positions(size: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(1, size + 1), 2))


def _expected_commutator(p1, p2, a, b, e) -> SquareMatrix:
    (i1, j1), (i2, j2) = p1, p2
    if j1 == i2:
        return e(i1, j2, a * b)
    if j2 == i1:
        return e(i2, j1, -(a * b))
    return e(1, 2, a * 0)


def verify_steinberg_field(q: int, size: int = 4) -> IdentityReport:
    """(St1) and (St2) over F_q for every coefficient pair and position pattern."""
    ring = Ring.finite_field(q)
    rep = IdentityReport(f"steinberg F_{q} size {size}")
    coeffs = list(ring.all_elements())
    cache: dict = {}

    def e(i, j, r):
        key = (i, j, r)
        if key not in cache:
            cache[key] = elementary_matrix(size, i, j, r, ring)
        return cache[key]

    pos = _positions(size)
    for (i, j), a, b in itertools.product(pos, coeffs, coeffs):
        rep.record("St1", e(i, j, a) * e(i, j, b) == e(i, j, a + b), {"pos": [i, j], "a": a.value, "b": b.value})
    for p1, p2 in itertools.product(pos, pos):
        if p1 == p2 or (p1[1] == p2[0] and p2[1] == p1[0]):
            continue
        for a, b in itertools.product(coeffs, coeffs):
            lhs = commutator(e(*p1, a), e(*p2, b))
            rep.record("St2", lhs == _expected_commutator(p1, p2, a, b, e),
                       {"p1": list(p1), "p2": list(p2), "a": a.value, "b": b.value})
    return rep


def verify_steinberg_pure_degree(q: int, size: int = 4) -> IdentityReport:
    """(pdS1) and (pdS2) in the degree-bounded polynomial group: entry (i, j) of degree <= j - i."""
    n = size - 1
    ring = Ring.polynomial(q, n, degree_bound=True)
    rep = IdentityReport(f"pure-degree steinberg F_{q}[t] size {size}")
    field_vals = range(q)
    cache: dict = {}

    def mono(k, a):
        return ring.t(k, a)

    def e(i, j, r):
        key = (i, j, r)
        if key not in cache:
            cache[key] = elementary_matrix(size, i, j, r, ring)
        return cache[key]

    pos = _positions(size)
    for (i, j) in pos:
        for k in range(j - i + 1):
            for a, b in itertools.product(field_vals, field_vals):
                ok = e(i, j, mono(k, a)) * e(i, j, mono(k, b)) == e(i, j, mono(k, (a + b) % q))
                rep.record("pdS1", ok, {"pos": [i, j], "k": k, "a": a, "b": b})
    for p1, p2 in itertools.product(pos, pos):
        if p1 == p2 or (p1[1] == p2[0] and p2[1] == p1[0]):
            continue
        for k1 in range(p1[1] - p1[0] + 1):
            for k2 in range(p2[1] - p2[0] + 1):
                for a, b in itertools.product(field_vals, field_vals):
                    x, y = mono(k1, a), mono(k2, b)
                    lhs = commutator(e(*p1, x), e(*p2, y))
                    rep.record("pdS2", lhs == _expected_commutator(p1, p2, x, y, e),
                               {"p1": list(p1), "p2": list(p2), "k1": k1, "k2": k2, "a": a, "b": b})
    return rep


# ---------------------------------------------------------------- residual relations


def _corner_word(n: int, ring: Ring, a: int, k: int) -> list[ElemLetter]:
    """The defining commutator of the corner letter e_{1,n+1}(a t^k)."""
    if ring.mode == "field":
        return elem_commutator([ElemLetter(1, n, ring.one())], [ElemLetter(n, n + 1, ring.element(a))])
    if k < n:
        return elem_commutator([ElemLetter(1, n, ring.t(k, 1))], [ElemLetter(n, n + 1, ring.t(0, a))])
    return elem_commutator([ElemLetter(1, n, ring.t(k - 1, 1))], [ElemLetter(n, n + 1, ring.t(1, a))])


def residual_relation_words(n: int, ring: Ring, a: int, b: int) -> dict[str, list[list[ElemLetter]]]:
    """Each residual relation, and each corner definition, written as a word equal to e.

    The corner letter appears as the elementary letter e_{1,n+1}; its
    definition as a commutator is a separate family. In field mode only the
    degree 0 instances occur.
    """
    poly = ring.mode != "field"
    top = n + 1

    def m(k, c):
        return ring.t(k, c) if poly else ring.element(c)

    def ks(bound):
        return range(bound + 1) if poly else range(1)

    words: dict[str, list[list[ElemLetter]]] = {"type1": [], "type2": [], "type3": [], "type4": [], "corner": []}
    for j in range(2, n + 1):
        for i in range(2, top):
            if i == j:
                continue
            for k1, k2 in itertools.product(ks(j - 1), ks(top - i)):
                words["type1"].append(elem_commutator([ElemLetter(1, j, m(k1, a))], [ElemLetter(i, top, m(k2, b))]))
    for j in range(2, top):
        for k1, k2 in itertools.product(ks(j - 1), ks(top - j)):
            lhs = elem_commutator([ElemLetter(1, j, m(k1, a))], [ElemLetter(j, top, m(k2, b))])
            words["type2"].append(lhs + [ElemLetter(1, top, -(m(k1, a) * m(k2, b)))])
    for (i, j) in _positions(top):
        for k1, k2 in itertools.product(ks(j - i), ks(n)):
            words["type3"].append(elem_commutator([ElemLetter(i, j, m(k1, a))], [ElemLetter(1, top, m(k2, b))]))
    for k in ks(n):
        words["type4"].append([ElemLetter(1, top, m(k, a)), ElemLetter(1, top, m(k, b)),
                               ElemLetter(1, top, -(m(k, a) + m(k, b)))])
    for k in ks(n):
        words["corner"].append(_corner_word(n, ring, a, k) + [ElemLetter(1, top, -m(k, a))])
    return words


def verify_residual_relations(construction: str, q_list: Sequence[int], n: int = 3) -> dict:
    """Check every residual relation and corner definition as a matrix identity, for all a, b in F_q."""
    if construction not in ("unip_fq", "unip_poly"):
        raise ValueError(f"unknown construction {construction!r}")
    reports = {}
    for q in q_list:
        ring = Ring.finite_field(q) if construction == "unip_fq" else Ring.polynomial(q, n, degree_bound=True)
        rep = IdentityReport(f"residual {construction} q={q}")
        size = n + 1
        for a, b in itertools.product(range(q), range(q)):
            for fam, ws in residual_relation_words(n, ring, a, b).items():
                for w in ws:
                    ok = elem_word_value(w, size, ring).is_identity()
                    rep.record(fam, ok, {"a": a, "b": b, "word": repr(w)})
        reports[q] = rep
    return {"construction": construction, "n": n, "holds": all(r.holds for r in reports.values()),
            "by_q": {str(q): r.to_dict() for q, r in reports.items()}}


def q_independence_counts(q_list: Sequence[int], n: int = 3, a: int = 1, b: int = 1) -> dict:
    """Normal-form application counts of every residual-relation word, per q.

    The same word shapes are used for every q; the property holds when the
    count vectors coincide.
    """
    counts = {}
    for q in q_list:
        ring = Ring.finite_field(q)
        row = {}
        for fam, ws in residual_relation_words(n, ring, a, b).items():
            vals = []
            for w in ws:
                nf = steinberg_normal_form(w, n + 1, ring)
                if not nf.is_trivial:
                    raise InvariantViolation(f"residual word {w} did not reduce to the identity")
                vals.append(nf.ledger.relation_applications)
            row[fam] = vals
        counts[q] = row
    first = next(iter(counts.values()))
    return {"counts": {str(q): c for q, c in counts.items()},
            "identical": all(c == first for c in counts.values())}


# ---------------------------------------------------------------- paths and words


@dataclass
class PathWord:
    """A closed path translated to start at K_{i_0}, and its letters g_1 ... g_m.

    letters[j] lies in K_{types[j]}; g_1 ... g_j K_{types[j]} is the j-th
    vertex of the translated path, and the product of all letters is e.
    Identity letters appear where the path repeats a vertex.
    """

    translation: int
    path: tuple[int, ...]
    translated: tuple[int, ...]
    types: tuple[int, ...]
    letters: tuple[int, ...]

    def word(self) -> Word:
        return Word(tuple(Letter(i, g) for i, g in zip(self.types, self.letters) if g != 0))

    def to_dict(self) -> dict:
        return {"translation": self.translation, "path": list(self.path), "translated": list(self.translated),
                "types": list(self.types), "letters": list(self.letters)}


def _coset_members(cd, v: int) -> np.ndarray:
    i, rep = cd.vertex_rep(v)
    return np.sort(cd.group.mul(rep, cd.subgroups[i].members))


def path_to_word(x: SimplicialComplex, path: Sequence[int]) -> PathWord:
    """Letters of the (g_1, ..., g_m)-map obtained from a closed path by translation.

    The path is a cyclic vertex sequence (a repeated final vertex equal to the
    first is dropped). Among all h in f(0) ∩ f(m-1), the translation g = h^-1
    giving the lexicographically least translated path is used, so a path
    and any of its translates give the same letters.
    """
    cd = x.coset_data
    if cd is None:
        raise NoGroupAttached("path_to_word needs a coset complex")
    path = [int(v) for v in path]
    if len(path) > 1 and path[-1] == path[0]:
        path = path[:-1]
    if len(path) < 2:
        raise PathBroken("a closed path needs at least two vertices")
    nverts = len(cd.rep_array)
    for v in path:
        if not 0 <= v < nverts:
            raise PathBroken(f"vertex {v} is not in the complex")
    m = len(path)
    for a, b in zip(path, path[1:] + path[:1]):
        if a != b and not x.has_face(tuple(sorted((a, b)))):
            raise PathBroken(f"{a} and {b} are not adjacent")
    group = cd.group
    types = tuple(cd.vertex_rep(v)[0] for v in path)
    reps = np.array([cd.vertex_rep(v)[1] for v in path], dtype=np.int64)
    hs = np.intersect1d(_coset_members(cd, path[0]), _coset_members(cd, path[-1]))
    if len(hs) == 0:
        raise PathBroken("the first and last vertices do not intersect")
    best = None
    for h in hs.tolist():
        hinv = int(group.inverse(h)[0])
        moved = group.left_mul_all(hinv, reps)
        tpath = tuple(int(cd.vertex_of(types[j], moved[j:j + 1])[0]) for j in range(m))
        if best is None or tpath < best[0]:
            best = (tpath, hinv)
    tpath, g = best
    letters = []
    h_prev = group.identity_id
    for j in range(1, m):
        prev_coset = np.sort(group.mul(h_prev, cd.subgroups[types[j - 1]].members))
        cand = np.intersect1d(prev_coset, _coset_members(cd, tpath[j]))
        if len(cand) == 0:
            raise PathBroken(f"consecutive cosets {j - 1}, {j} do not intersect")
        h = h_prev if h_prev in cand else int(cand[0])
        letters.append(int(group.mul(group.inverse(h_prev), h)[0]))
        h_prev = h
    letters.append(int(group.inverse(h_prev)[0]))
    out = PathWord(g, tuple(path), tpath, types, tuple(letters))
    _replay(x, out)
    return out


def _replay(x: SimplicialComplex, pw: PathWord) -> None:
    cd = x.coset_data
    group = cd.group
    acc = group.identity_id
    for j, (t, g) in enumerate(zip(pw.types, pw.letters)):
        if not bool(cd.subgroups[t].contains(g)[0]):
            raise InvariantViolation(f"letter {j} is not in K_{t}")
        if int(cd.vertex_of(t, np.array([acc]))[0]) != pw.translated[j]:
            raise InvariantViolation(f"replayed coset {j} does not match the path")
        acc = int(group.mul(acc, g)[0])
    if acc != group.identity_id:
        raise InvariantViolation("letters of a closed path do not multiply to e")


# ---------------------------------------------------------------- homotopy moves


@dataclass(frozen=True)
class Move:
    """A homotopy move at 1-based position j.

    kind "identity": drop g_j = e. "free": drop g_j g_{j+1} with
    g_{j+1} = g_j^-1, j <= m - 2. "rel1": replace g_j g_{j+1} by their product,
    all three in K_subgroup. "rel2": split g_j into split[0] split[1], all
    three in K_subgroup.
    """

    kind: str
    j: int
    subgroup: int | None = None
    split: tuple[int, int] | None = None

    def to_list(self) -> list:
        return [self.kind, self.j, self.subgroup, None if self.split is None else list(self.split)]


def move_charge(kind: str, m: int) -> int:
    """Charge of a move applied to a word of length m."""
    if kind in ("identity", "rel1"):
        return 4 + 2 * (m - 1)
    if kind == "free":
        return 6 + 4 * (m - 1)
    if kind == "rel2":
        return 2
    raise TraceInvalid(f"unknown move {kind!r}")


def p_poly(a: int, b: int) -> int:
    """16 b^2 + 6 a^2 + 20 a b + 24 b + 10 a + 1."""
    return 16 * b * b + 6 * a * a + 20 * a * b + 24 * b + 10 * a + 1


@dataclass
class SFillBound:
    initial_length: int
    moves: list[Move]
    ledger: CostLedger
    relation_moves: int
    ceiling: int

    @property
    def bound(self) -> int:
        return self.ledger.sfill1_upper

    @property
    def within_ceiling(self) -> bool:
        return self.bound <= self.ceiling

    def to_dict(self) -> dict:
        return {"initial_length": self.initial_length, "moves": [mv.to_list() for mv in self.moves],
                "bound": self.bound, "relation_moves": self.relation_moves, "ceiling": self.ceiling,
                "within_ceiling": self.within_ceiling, "ledger": self.ledger.to_dict()}


def _in(sub: SubgroupHandle, g: int) -> bool:
    return bool(sub.contains(g)[0])


def sfill1_upper(elements: Sequence[int], trace: Sequence[Move], group: Group,
                 subgroups: Sequence[SubgroupHandle]) -> SFillBound:
    """Replay a move trace on g_1 ... g_m (product e) and add up the move charges.

    Each move needs the current length m > 2 and is charged at that m; the
    trace must end at length <= 2, which is charged 1. The ceiling is
    p(m, D) with D the number of relation moves.
    """
    e = group.identity_id
    w = [int(g) for g in elements]
    if group.word_value(w) != e:
        raise TraceInvalid("the word does not multiply to the identity")
    for g in w:
        if not any(_in(k, g) for k in subgroups):
            raise TraceInvalid(f"element {g} is in no subgroup")
    ledger = CostLedger()
    m0 = len(w)
    rel_moves = 0
    for mv in trace:
        m = len(w)
        if m <= 2:
            raise TraceInvalid("moves need a word of length greater than 2")
        j = mv.j
        if mv.kind == "identity":
            if not 1 <= j <= m or w[j - 1] != e:
                raise TraceInvalid(f"g_{j} is not the identity")
            del w[j - 1]
        elif mv.kind == "free":
            if not 1 <= j <= m - 2 or int(group.mul(w[j - 1], w[j])[0]) != e:
                raise TraceInvalid(f"g_{j} g_{j + 1} is not a cancelling pair at a valid position")
            del w[j - 1:j + 1]
            ledger.free_reductions += 1
        elif mv.kind == "rel1":
            if not 1 <= j <= m - 1:
                raise TraceInvalid(f"no pair at position {j}")
            prod = int(group.mul(w[j - 1], w[j])[0])
            ks = [mv.subgroup] if mv.subgroup is not None else range(len(subgroups))
            if not any(all(_in(subgroups[i], g) for g in (w[j - 1], w[j], prod)) for i in ks):
                raise TraceInvalid(f"g_{j}, g_{j + 1} and their product share no subgroup")
            w[j - 1:j + 1] = [prod]
            ledger.relation_applications += 1
            rel_moves += 1
        elif mv.kind == "rel2":
            if not 1 <= j <= m - 1 or mv.split is None or mv.subgroup is None:
                raise TraceInvalid("relation move 2 needs a position, a subgroup and a split")
            a, b = (int(v) for v in mv.split)
            k = subgroups[mv.subgroup]
            if int(group.mul(a, b)[0]) != w[j - 1] or not all(_in(k, g) for g in (a, b, w[j - 1])):
                raise TraceInvalid(f"split of g_{j} is not a product inside K_{mv.subgroup}")
            w[j - 1:j] = [a, b]
            ledger.relation_applications += 1
            rel_moves += 1
        else:
            raise TraceInvalid(f"unknown move {mv.kind!r}")
        ledger.charge(mv.kind, m, move_charge(mv.kind, m))
    if len(w) > 2:
        raise TraceInvalid(f"trace ends at length {len(w)} > 2")
    ledger.charge("base", len(w), 1)
    return SFillBound(m0, list(trace), ledger, rel_moves, p_poly(m0, rel_moves))


def greedy_trace(elements: Sequence[int], group: Group, subgroups: Sequence[SubgroupHandle]) -> list[Move]:
    """A deterministic reduction: leftmost identity, then leftmost free pair, then leftmost shared-subgroup pair."""
    e = group.identity_id
    w = [int(g) for g in elements]
    trace: list[Move] = []
    while len(w) > 2:
        m = len(w)
        j = next((p for p in range(m) if w[p] == e), None)
        if j is not None:
            trace.append(Move("identity", j + 1))
            del w[j]
            continue
        j = next((p for p in range(m - 2) if int(group.mul(w[p], w[p + 1])[0]) == e), None)
        if j is not None:
            trace.append(Move("free", j + 1))
            del w[j:j + 2]
            continue
        found = None
        for p in range(m - 1):
            prod = int(group.mul(w[p], w[p + 1])[0])
            for i, k in enumerate(subgroups):
                if _in(k, w[p]) and _in(k, w[p + 1]):
                    found = (p, i, prod)
                    break
            if found:
                break
        if found is None:
            raise TraceInvalid("greedy reduction is stuck: no adjacent pair shares a subgroup")
        p, i, prod = found
        trace.append(Move("rel1", p + 1, i))
        w[p:p + 2] = [prod]
    return trace


def triangle_paths(x: SimplicialComplex) -> list[tuple[int, int, int]]:
    return [tuple(t) for t in x.faces.get(2, [])]


# ---------------------------------------------------------------- Dehn estimate


@dataclass
class DehnEstimate:
    m: int
    samples: int
    max_area: int
    max_length_reached: int
    areas: list[int]
    note: str = "upper estimate: Steinberg-presentation bubble-sort area over sampled closed paths"

    def to_dict(self) -> dict:
        return {"m": self.m, "samples": self.samples, "max_area": self.max_area,
                "max_length_reached": self.max_length_reached, "note": self.note}


def closed_walks(x: SimplicialComplex, m: int, samples: int, seed: int = 0) -> list[list[int]]:
    """Random closed walks of length between 2 and m: a random walk, then a shortest way back."""
    adj = x.adjacency()
    verts = x.vertices
    rng = random.Random(seed)
    dist_cache: dict[int, dict[int, int]] = {}

    def bfs(src):
        if src not in dist_cache:
            d = {src: 0}
            dq = deque([src])
            while dq:
                u = dq.popleft()
                for v in adj[u]:
                    if v not in d:
                        d[v] = d[u] + 1
                        dq.append(v)
            dist_cache[src] = d
        return dist_cache[src]

    out = []
    for _ in range(samples):
        start = rng.choice(verts)
        d = bfs(start)
        walk = [start]
        target = rng.randint(1, max(1, m - 1))
        while len(walk) < target:
            nxt = rng.choice(adj[walk[-1]])
            if len(walk) + d[nxt] > m:
                break
            walk.append(nxt)
        # shortest way back, choosing the least neighbour one step closer
        cur = walk[-1]
        while d[cur] > 1:
            cur = min(v for v in adj[cur] if d[v] == d[cur] - 1)
            walk.append(cur)
        if len(walk) < 2:
            walk.append(min(adj[start]))
        out.append(walk)
    return out


def dehn_estimate(x: SimplicialComplex, m: int, samples: int = 200, seed: int = 0) -> DehnEstimate:
    """Largest Steinberg normal-form area among sampled trivial words of length <= m.

    Closed walks of length <= m give trivial words g_1 ... g_m over the K_i;
    each letter is written in its elementary normal form and the whole word
    is bubble-sorted back to the empty word.
    """
    cd = x.coset_data
    if cd is None:
        raise NoGroupAttached("dehn_estimate needs a coset complex")
    group = cd.group
    areas = []
    longest = 0
    for walk in closed_walks(x, m, samples, seed):
        pw = path_to_word(x, walk)
        longest = max(longest, len(pw.letters))
        letters: list[ElemLetter] = []
        for g in pw.letters:
            if g != group.identity_id:
                letters.extend(elementary_factorization(group.element(g)))
        nf = steinberg_normal_form(letters, group.size, group.ring, check=False)
        if not nf.is_trivial:
            raise InvariantViolation("a closed-path word did not reduce to the identity")
        areas.append(nf.ledger.area_upper)
    return DehnEstimate(m, len(areas), max(areas, default=0), longest, areas)
