from __future__ import annotations

import pytest

from hdx.complex import SimplicialComplex, full_symmetric_action, graph_automorphisms
from hdx.cones import (
    ConeFunction,
    Obstruction,
    act_on_cone,
    build_cone,
    crad_upper,
    cycles_filled_by_cone,
    existence_equivalence_test,
    m_constants,
    verify_cone,
)
from hdx.errors import DimMismatch, NotAFace
from hdx.homology import INFINITE, space_basis

import oracles

RADIUS_CASES = ["tetrahedron", "octahedron", "torus", "c6", "petersen"]


@pytest.mark.parametrize("name", RADIUS_CASES)
def test_zero_cone_volume_is_the_radius(references, name):
    x = references[name]
    assert crad_upper(x, 0).crad_upper == oracles.radius(x)


@pytest.mark.parametrize("name,k", [("tetrahedron", 1), ("octahedron", 1), ("k4", 0), ("c6", 0), ("edge", 1)])
def test_every_apex_gives_a_valid_cone(references, name, k):
    x = references[name]
    for v in x.vertices:
        c = build_cone(x, v, k)
        assert isinstance(c, ConeFunction)
        assert verify_cone(x, c).ok
        assert c.optimal


def test_corrupted_cone_fails_verification(references):
    x = references["tetrahedron"]
    c = build_cone(x, 0, 1)
    c.tables[1][0] ^= 1
    check = verify_cone(x, c)
    assert not check.ok and check.dim == 1


def test_cone_fills_cycles(references):
    x = references["octahedron"]
    c = build_cone(x, 0, 1)
    assert cycles_filled_by_cone(c, space_basis(x, "Z_k", 1).basis)


def test_group_translate_of_a_cone(references, unip3):
    tet = references["tetrahedron"]
    act = full_symmetric_action(4)
    c = build_cone(tet, 0, 1)
    for g in range(len(act)):
        moved = act_on_cone(g, c, act)
        assert verify_cone(tet, moved).ok
        assert moved.vol() == c.vol()
        assert moved.apex == int(act.perm(g)[0])
    _, x = unip3
    c0 = build_cone(x, 0, 0)
    for g in (1, 100, 728):
        moved = act_on_cone(g, c0)
        assert verify_cone(x, moved).ok and moved.vol() == c0.vol()


def test_orbit_shared_fills_match_plain_fills(references):
    for name in ("octahedron", "tetrahedron"):
        x = references[name]
        act = graph_automorphisms(x)
        for v in x.vertices:
            plain = build_cone(x, v, 1, use_symmetry=False)
            shared = build_cone(x, v, 1, action=act)
            assert verify_cone(x, shared).ok
            assert [c.bit_count() for c in shared.tables[1]] == [c.bit_count() for c in plain.tables[1]]


def test_equivalence_cases(references):
    tet = references["tetrahedron"]
    pos = existence_equivalence_test(tet, 1)
    assert pos.homology_vanishes and pos.cone_built and pos.consistent
    neg = existence_equivalence_test(tet, 2)
    assert not neg.homology_vanishes and not neg.cone_built and neg.obstruction_dim == 2 and neg.consistent
    disc = existence_equivalence_test(references["two_triangles"].skeleton(1), 0)
    assert disc.obstruction_dim == 0 and disc.consistent
    tor = existence_equivalence_test(references["torus"], 1)
    assert tor.obstruction_dim == 1 and tor.consistent


def test_first_homology_of_small_coset_complex_obstructs(unip2):
    # the q = 2 complex has two independent 1-cycles that do not bound
    _, x = unip2
    ob = build_cone(x, 0, 1, mode="auto")
    assert isinstance(ob, Obstruction) and ob.dim == 1


def test_obstruction_is_a_nonbounding_cycle(references):
    tor = references["torus"]
    ob = build_cone(tor, 0, 1)
    assert isinstance(ob, Obstruction)
    assert not space_basis(tor, "B_k", 1).contains(ob.cycle)
    assert space_basis(tor, "Z_k", 1).contains(ob.cycle)
    assert crad_upper(tor, 1).crad_upper is INFINITE


def test_build_cone_argument_checks(references):
    tet = references["tetrahedron"]
    with pytest.raises(NotAFace):
        build_cone(tet, 9, 1)
    with pytest.raises(DimMismatch):
        build_cone(tet, 0, 3)
    with pytest.raises(DimMismatch):
        build_cone(tet, 0, 0).cone((0, 1))


def test_m_constants_on_the_tetrahedron(references):
    m = m_constants(references["tetrahedron"], 1)
    # M_0 = diameter = 1; M_1 = Fill_1(3) = 1 (every short boundary is one triangle)
    assert m.values == {-1: 1, 0: 1, 1: 1}
    assert m.chain_holds and m.exact


def test_m_constants_fail_on_a_short_systole(references):
    m = m_constants(references["torus"], 1)
    assert m.hypotheses[1]["sys"] == 3 and m.hypotheses[1]["needed"] == 3
    assert not m.chain_holds


def test_cone_json_lists_every_face(references):
    x = SimplicialComplex.from_maximal([(0, 1, 2)])
    c = build_cone(x, 0, 1)
    d = c.to_dict()
    assert len(d["cones"]["1"]) == 3 and d["apex"] == 0
