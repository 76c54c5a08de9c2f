from __future__ import annotations

import itertools
from fractions import Fraction

import networkx as nx
import pytest

from hdx import complex as cx
from hdx.complex import (
    PermutationAction,
    SimplicialComplex,
    base_top_face,
    check_strong_symmetry,
    clique_closure,
    is_simplicial_action,
    link,
    stabilizer,
    weights,
)
from hdx.constructions import unip_fq
from hdx.errors import DimMismatch, InvariantViolation, NotAFace, NotPure

import oracles


def test_reference_f_vectors(references):
    # PAPER-independent facts about the named complexes
    assert references["tetrahedron"].f_vector() == [4, 6, 4]
    assert references["octahedron"].f_vector() == [6, 12, 8]
    assert references["torus"].f_vector() == [7, 21, 14]
    assert references["petersen"].f_vector() == [10, 15]
    assert references["k4"].f_vector() == [4, 6]
    tor = references["torus"]
    assert sum((-1) ** d * n for d, n in enumerate(tor.f_vector())) == 0


def test_downward_closure_is_enforced():
    with pytest.raises(InvariantViolation):
        SimplicialComplex({0: [(0,), (1,)], 1: [(0, 2)]})
    with pytest.raises(DimMismatch):
        SimplicialComplex({1: [(0, 1, 2)]})


def test_clique_closure_matches_networkx(references):
    for x in references.values():
        g = oracles.graph_of(x)
        closed = clique_closure(x.one_skeleton(), 3)
        cliques = {tuple(sorted(c)) for c in nx.enumerate_all_cliques(g) if len(c) <= 4}
        ours = {f for d in range(closed.top_dim + 1) for f in closed.faces[d]}
        assert ours == cliques


def test_link_of_vertex_and_edge(references):
    tet = references["tetrahedron"]
    lk = link(tet, (0,))
    assert lk.f_vector() == [3, 3]
    assert link(tet, (0, 1)).faces[0] == [(2,), (3,)]
    assert link(tet, ()) is tet
    with pytest.raises(NotAFace):
        link(tet, (0, 1, 2, 3))


def test_weights_sum_to_one_and_match_oracle(references, unip2):
    _, x = unip2
    for cpx in list(references.values()) + [x]:
        w = weights(cpx)
        for k in range(-1, cpx.top_dim + 1):
            assert w.total(k) == 1
        for k in range(0, cpx.top_dim + 1):
            counts, den = oracles.top_face_weights(cpx, k)
            assert [w.weight(k, i) for i in range(len(counts))] == [Fraction(c, den) for c in counts]


def test_weights_reject_impure():
    impure = SimplicialComplex.from_maximal([(0, 1, 2), (2, 3)])
    assert not impure.is_pure()
    with pytest.raises(NotPure):
        weights(impure)


@pytest.mark.parametrize("q", [2, 3])
def test_coset_complex_shape(q):
    fam = unip_fq(3, q)
    x = cx.build_coset_complex(fam.group, fam.subgroups)
    order = len(fam.group)
    sizes = [len(k) for k in fam.subgroups]
    assert x.f_vector()[0] == sum(order // s for s in sizes)
    assert x.f_vector()[2] == order
    assert x.is_pure() and x.check_partite()
    assert x.check_downward_closed() is None
    assert base_top_face(x) in set(x.faces[2])


@pytest.mark.parametrize("q", [2, 3])
def test_strong_symmetry_criterion_agrees_with_orbit(q):
    fam = unip_fq(3, q)
    x = cx.build_coset_complex(fam.group, fam.subgroups)
    cert = check_strong_symmetry(fam.group, fam.subgroups, x)
    assert cert.criterion_holds and cert.orbit_transitive and cert.agree
    assert cert.orbit_size == cert.top_faces == len(fam.group)


def test_stabilizer_is_conjugate_subgroup(unip2):
    fam, x = unip2
    for v in [0, 9, 31]:
        t, _ = x.coset_data.vertex_rep(v)
        assert len(stabilizer(fam.group, x, v)) == len(fam.subgroups[t])


def test_group_action_is_simplicial(unip2):
    _, x = unip2
    act = PermutationAction.from_coset_complex(x)
    assert is_simplicial_action(act, x)
    assert act.is_transitive_on(x.faces[2])


def test_graph_automorphisms_of_petersen(references):
    act = cx.graph_automorphisms(references["petersen"])
    assert len(act) == 120
    assert act.is_transitive_on(references["petersen"].faces[1])


def test_json_round_trip(references):
    for x in references.values():
        y = SimplicialComplex.from_json(x.to_json())
        assert y.faces == x.faces


def test_face_index_errors(references):
    tet = references["tetrahedron"]
    assert tet.face_index((3, 1)) == tet.face_index((1, 3))
    with pytest.raises(NotAFace):
        tet.face_index((0, 1, 2, 3))
    assert all(tet.has_face(f) for f in itertools.combinations(range(4), 3))
