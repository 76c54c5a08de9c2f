from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("default")


@pytest.fixture(scope="session")
def unip2():
    from hdx.complex import build_coset_complex
    from hdx.constructions import unip_fq

    fam = unip_fq(3, 2)
    return fam, build_coset_complex(fam.group, fam.subgroups)


@pytest.fixture(scope="session")
def unip3():
    from hdx.complex import build_coset_complex
    from hdx.constructions import unip_fq

    fam = unip_fq(3, 3)
    return fam, build_coset_complex(fam.group, fam.subgroups)


@pytest.fixture(scope="session")
def references():
    from hdx import complex as cx

    return {
        "tetrahedron": cx.boundary_tetrahedron(),
        "octahedron": cx.octahedron(),
        "torus": cx.torus7(),
        "two_triangles": cx.two_triangles(),
        "c6": cx.cycle_graph(6),
        "k4": cx.complete_graph(4),
        "petersen": cx.petersen_graph(),
        "edge": cx.single_edge(),
    }


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
