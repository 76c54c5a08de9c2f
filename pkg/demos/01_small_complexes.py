"""Walk through the small reference complexes.

For each complex we print its f-vector and reduced Betti numbers over GF(2),
then the exact coboundary expansion in degree 0 and 1, and the cone radius.
The torus shows the gap between Exp_b and Exp_z: its first cohomology is
nonzero, so Exp^1_b vanishes while Exp^1_z stays positive.
"""

from __future__ import annotations

from hdx import complex as cx
from hdx.cones import crad_upper
from hdx.expansion import exp_b, exp_z
from hdx.homology import reduced_betti

COMPLEXES = {
    "tetrahedron boundary": cx.boundary_tetrahedron(),
    "octahedron": cx.octahedron(),
    "7-vertex torus": cx.torus7(),
}


def main() -> None:
    for name, x in COMPLEXES.items():
        fvec = x.f_vector()
        top = len(fvec) - 1
        betti = [reduced_betti(x, k) for k in range(top + 1)]
        print(f"== {name}: f-vector {fvec}, reduced Betti {betti}")
        for k in range(top):
            b, z = exp_b(x, k), exp_z(x, k)
            print(f"   Exp^{k}_b = {b.value}   Exp^{k}_z = {z.value}")
        rep = crad_upper(x, 0)
        print(f"   Crad_0 (radius of the 1-skeleton) = {rep.crad_upper}")
        rep = crad_upper(x, 1)
        print(f"   Crad_1 upper bound = {rep.crad_upper}"
              + ("" if rep.exists else "  (cone obstructed by H_1)"))


if __name__ == "__main__":
    main()
