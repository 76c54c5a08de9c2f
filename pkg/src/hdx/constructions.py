"""Named group families with their subgroup lists.

unip_fq:   Unip_{n+1}(F_q), K_i generated by e_{j,j+1}(a), j != i+1.
unip_poly: the degree-bounded unipotent group over F_q[t] generated by
           e_{j,j+1}(a + bt); for n = 3 this is the link group G_link,q.
xsq:       the 4x4 group over F_q[t]/(t^s) generated by e_12, e_23, e_34, e_41
           with entries a + bt, and its subgroups H_0..H_3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import Ring, SquareMatrix, elementary_matrix
from .errors import ConfigError
from .groups import DEFAULT_SIZE_CAP, Group, SubgroupHandle, cached_closure, subgroup_closure


@dataclass(eq=False)
class GroupFamily:
    name: str
    group: Group
    subgroups: list[SubgroupHandle]
    n: int
    q: int
    # subgroup index -> list of (i, j, coefficient codes) of its elementary generators
    generator_spec: dict[int, list[tuple[int, int, tuple[int, ...]]]] = field(default_factory=dict)

    @property
    def ring(self) -> Ring:
        return self.group.ring


def _linear_entries(ring: Ring) -> list[tuple[int, ...]]:
    """Coefficient vectors of every nonzero a + bt."""
    q = ring.q
    out = []
    for b in range(q):
        for a in range(q):
            if a or b:
                out.append((a, b))
    return out


def unip_fq(n: int, q: int, size_cap: int = DEFAULT_SIZE_CAP) -> GroupFamily:
    if n < 1:
        raise ConfigError("n must be at least 1")
    ring = Ring.finite_field(q)
    gens = [elementary_matrix(n + 1, i, i + 1, a, ring) for i in range(1, n + 1) for a in range(1, q)]
    g = cached_closure(f"unip_fq_n{n}_q{q}", gens, size_cap)
    subs, spec = [], {}
    for i in range(n):
        js = [j for j in range(1, n + 1) if j != i + 1]
        ids = [g.index_of(elementary_matrix(n + 1, j, j + 1, a, ring)) for j in js for a in range(1, q)]
        subs.append(subgroup_closure(g, ids, f"K{i}"))
        spec[i] = [(j, j + 1, (a,)) for j in js for a in range(1, q)]
    return GroupFamily(f"unip_fq(n={n},q={q})", g, subs, n, q, spec)


def unip_poly(n: int, q: int, size_cap: int = DEFAULT_SIZE_CAP) -> GroupFamily:
    if n < 1:
        raise ConfigError("n must be at least 1")
    ring = Ring.polynomial(q, n, degree_bound=True)
    entries = _linear_entries(ring)
    gens = [elementary_matrix(n + 1, i, i + 1, ring.element(list(c)), ring)
            for i in range(1, n + 1) for c in entries]
    g = cached_closure(f"unip_poly_n{n}_q{q}", gens, size_cap)
    subs, spec = [], {}
    for i in range(n):
        js = [j for j in range(1, n + 1) if j != i + 1]
        ids = [g.index_of(elementary_matrix(n + 1, j, j + 1, ring.element(list(c)), ring)) for j in js for c in entries]
        subs.append(subgroup_closure(g, ids, f"K{i}"))
        spec[i] = [(j, j + 1, c) for j in js for c in entries]
    return GroupFamily(f"unip_poly(n={n},q={q})", g, subs, n, q, spec)


def xsq_generators(q: int, s: int) -> tuple[Ring, dict[str, list[SquareMatrix]]]:
    ring = Ring.truncated(q, s)
    entries = _linear_entries(ring)

    def e(i, j):
        return [elementary_matrix(4, i, j, ring.element(list(c)), ring) for c in entries]

    blocks = {"e12": e(1, 2), "e23": e(2, 3), "e34": e(3, 4), "e41": e(4, 1)}
    return ring, blocks


def xsq(q: int, s: int, size_cap: int = DEFAULT_SIZE_CAP) -> GroupFamily:
    """G^(s)_q with H_0..H_3; raises GroupTooLarge beyond size_cap."""
    if s <= 4:
        raise ConfigError("the construction needs s > 4")
    ring, blocks = xsq_generators(q, s)
    gens = [m for b in blocks.values() for m in b]
    g = cached_closure(f"xsq_q{q}_s{s}", gens, size_cap)
    upper = ["e12", "e23", "e34"]
    subs = []
    for i in range(3):
        names = [upper[j - 1] for j in range(1, 4) if j != i + 1] + ["e41"]
        ids = [g.index_of(m) for nm in names for m in blocks[nm]]
        subs.append(subgroup_closure(g, ids, f"H{i}"))
    subs.append(subgroup_closure(g, [g.index_of(m) for nm in upper for m in blocks[nm]], "H3"))
    return GroupFamily(f"xsq(q={q},s={s})", g, subs, 3, q)


CONSTRUCTIONS = {"unip_fq": unip_fq, "unip_poly": unip_poly}
