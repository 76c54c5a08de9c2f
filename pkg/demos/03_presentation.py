"""Rewrite words in elementary matrices and bound filling areas of short loops.

First we sort a word in elementary letters e_ij(a) into Steinberg normal form
and count the relations used. The counts for the residual relations are the
same over F_3, F_5 and F_7, which is the q-independence the bounds rely on.
Then we turn a closed walk in the Unip_4(F_2) coset complex into a word over
the three subgroups. We reduce it to length 2 with a trace of moves and charge
each move to get an upper bound on its filling.
"""

from __future__ import annotations

from hdx.algebra import Ring
from hdx.complex import build_coset_complex
from hdx.constructions import unip_fq
from hdx.presentation import (
    ElemLetter,
    dehn_estimate,
    greedy_trace,
    path_to_word,
    q_independence_counts,
    sfill1_upper,
    steinberg_normal_form,
    triangle_paths,
)


def normal_forms() -> None:
    r = Ring.finite_field(5)
    a, b = r.element(2), r.element(3)
    word = [ElemLetter(2, 3, b), ElemLetter(1, 2, a)]
    nf = steinberg_normal_form(word, 4, r)
    print("e23(3) e12(2) ->", " ".join(map(repr, nf.letters)),
          f"using {nf.ledger.relation_applications} relation applications")
    rep = q_independence_counts([3, 5, 7])
    print(f"residual relation counts identical for q in 3, 5, 7: {rep['identical']}")
    print(f"  counts: {rep['counts']['5']}")


def loop_fillings() -> None:
    fam = unip_fq(3, 2)
    x = build_coset_complex(fam.group, fam.subgroups)
    worst = None
    for tri in triangle_paths(x):
        pw = path_to_word(x, tri)
        trace = greedy_trace(pw.letters, fam.group, fam.subgroups)
        res = sfill1_upper(pw.letters, trace, fam.group, fam.subgroups)
        if worst is None or res.bound > worst.bound:
            worst = res
    print(f"triangle loops: largest filling bound {worst.bound}, ceiling {worst.ceiling}")
    est = dehn_estimate(x, 5, samples=50, seed=0)
    print(f"sampled closed walks of length <= 5: largest Steinberg area {est.max_area}")


if __name__ == "__main__":
    normal_forms()
    loop_fillings()
