import numpy as np
import pytest

from profusion.alperin import (
    INFINITE,
    NotSaturated,
    alp_length,
    alp_length_naive,
    alperin_decompose,
    aut_perm_group,
    essential_report,
    essential_subgroups,
    is_centric,
    is_essential,
    is_radical,
    product_closed_bounds,
    product_essential_length,
    product_growth_report,
    product_length_laws,
    product_radical_split,
    quillen_verdict,
    refine_to_essential,
)
from profusion.fusion import inclusion_map, realize, realize_product
from profusion.saturation import is_fully_normalized


def _all_isos(F):
    for P in F.subgroups():
        for m in F.maps_from(P):
            yield m


def test_gl3f2_essentials_are_the_two_kleins_and_s(catalog):
    F = catalog["systems"]["GL3F2"]["F"]
    assert sorted(int(e.order) for e in essential_subgroups(F)) == [4, 4, 8]
    rep = essential_report(F)
    kleins = [r for r in rep if r["order"] == 4 and r["essential"]]
    assert len(kleins) == 2
    assert all(r["quillen"] == "disconnected" for r in kleins)


def test_essential_implies_centric_and_radical(catalog):
    for name in ("S4", "SL2F3", "GL3F2"):
        F = catalog["systems"][name]["F"]
        for Q in essential_subgroups(F):
            if Q.order == F.S.order:
                continue
            assert is_centric(F, Q)
            assert is_radical(F, Q)
            assert quillen_verdict(F, Q) in ("disconnected", "empty")


def test_aut_perm_group_of_gl3f2_klein_is_s3(catalog):
    F = catalog["systems"]["GL3F2"]["F"]
    for V in essential_subgroups(F):
        if V.order != 4:
            continue
        A, morphs, _ = aut_perm_group(F, V)
        assert A.order == 6
        assert len(morphs) == 6
        # index arithmetic is composition
        for i in (0, 1, len(morphs) - 1):
            for j in (0, len(morphs) // 2):
                k = A.mul(i, j)
                assert np.array_equal(
                    morphs[k].mapping, morphs[i].compose(morphs[j]).mapping
                )


def test_worked_example_lengths_and_chain(gl3f2_example):
    F, phi = gl3f2_example["F"], gl3f2_example["phi"]
    assert alp_length(F, phi, "open") == 2
    assert alp_length(F, phi, "closed") == 2
    assert alp_length(F, phi, "essential") == 2
    assert alp_length_naive(F, phi, bound=3) == 2

    ch = alperin_decompose(F, phi)
    assert np.array_equal(ch.composite.mapping, phi.image_form().mapping)
    rch = refine_to_essential(F, ch)
    assert [int(q.order) for q, _ in rch.steps] == [4, 4]
    assert np.array_equal(rch.composite.mapping, phi.image_form().mapping)

    n, bfs = alp_length(F, phi, "open", return_chain=True)
    assert n == 2
    assert np.array_equal(bfs.composite.mapping, phi.image_form().mapping)


def test_lengths_match_naive_enumeration(catalog):
    for name in ("D8", "S4", "SL2F3"):
        F = catalog["systems"][name]["F"]
        for phi in _all_isos(F):
            fast = alp_length(F, phi, "open")
            slow = alp_length_naive(F, phi, bound=3)
            assert fast == slow, (name, int(phi.domain.order))


def test_variant_lengths_are_ordered(catalog):
    # at a single finite level every subgroup is both open and closed, so
    # those two variants agree; the essential variant restricts sources
    # and can only be longer
    for name in ("S4", "GL3F2"):
        F = catalog["systems"][name]["F"]
        for phi in _all_isos(F):
            lo = alp_length(F, phi, "open")
            lc = alp_length(F, phi, "closed")
            le = alp_length(F, phi, "essential")
            assert lo == lc
            assert lo <= le


def test_length_is_symmetric_under_inversion(catalog):
    F = catalog["systems"]["S4"]["F"]
    for phi in _all_isos(F):
        assert alp_length(F, phi, "open") == alp_length(F, phi.invert(), "open")


def test_inclusions_have_length_zero_and_limit_prunes(catalog):
    F = catalog["systems"]["GL3F2"]["F"]
    P = next(P for P in F.subgroups() if P.order == 2)
    assert alp_length(F, inclusion_map(P), "open") == 0
    phi = next(
        m for m in F.maps_from(P) if not np.array_equal(m.mapping, P.members)
    )
    if alp_length(F, phi, "open") > 1:
        assert alp_length(F, phi, "open", limit=1) == INFINITE


def test_decompose_refuses_unsaturated_input(witness_system):
    E = witness_system["E"]
    P = next(P for P in E.subgroups() if P.order == 2)
    phi = next(
        m for m in E.maps_from(P) if not np.array_equal(m.mapping, P.members)
    )
    with pytest.raises(NotSaturated):
        alperin_decompose(E, phi)


def test_decomposition_steps_are_essential_and_fully_normalized(catalog):
    for name in ("S4", "GL3F2"):
        F = catalog["systems"][name]["F"]
        for phi in _all_isos(F):
            rch = refine_to_essential(F, alperin_decompose(F, phi))
            assert np.array_equal(rch.composite.mapping, phi.image_form().mapping)
            for Q, psi in rch.steps:
                assert Q.order == F.S.order or is_essential(F, Q)
                assert is_fully_normalized(F, Q)
                assert np.array_equal(np.sort(psi.mapping), Q.members)


# -- product laws ----------------------------------------------------------------


@pytest.fixture(scope="module")
def s4xsl2f3(catalog):
    FA = catalog["systems"]["S4"]["F"]
    # the catalog carries SL2F3 at p = 3; the product wants its 2-fusion
    FB = realize(catalog["systems"]["SL2F3"]["G"], 2)
    FP = realize_product([FA, FB])
    return FA, FB, FP


def _first_moving_map(F):
    for P in sorted(F.subgroups(), key=lambda s: int(s.order)):
        if P.order == 1:
            continue
        for m in F.maps_from(P):
            if not np.array_equal(m.mapping, P.members):
                return m
    raise AssertionError("no moving map")


def test_product_essentials_split_by_coordinate(s4xsl2f3):
    FA, FB, FP = s4xsl2f3
    ess = essential_subgroups(FP)
    assert ess, "the product system must have essentials"
    for E in ess:
        rep = product_radical_split(FP, [FA, FB], E)
        assert rep["splits"]
        assert rep["essential_law_ok"], rep
        # at most one proper factor, every other factor the full Sylow
        proper = [
            o != int(Fi.S.order)
            for o, Fi in zip(rep["factor_orders"], (FA, FB))
        ]
        assert sum(proper) <= 1


def test_product_radical_law_on_all_subgroups(s4xsl2f3):
    FA, FB, FP = s4xsl2f3
    for P in FP.subgroups():
        rep = product_radical_split(FP, [FA, FB], P)
        assert rep["radical_law_ok"], rep


def test_product_length_laws_hold(s4xsl2f3):
    FA, FB, FP = s4xsl2f3
    phiA = _first_moving_map(FA)
    phiB = _first_moving_map(FB)
    rep = product_length_laws(FP, [FA, FB], [phiA, phiB])
    assert rep["sum_ge_open"] and rep["open_ge_sup"]
    assert rep["closed_eq_sup"] and rep["essential_eq_sum"]


def test_factor_coordinate_lengths_avoid_materializing(catalog):
    FA = catalog["systems"]["S4"]["F"]
    phi = _first_moving_map(FA)
    base_ess = alp_length(FA, phi, "essential")
    base_open = alp_length(FA, phi, "open")
    for n in (2, 3):
        assert product_essential_length([FA] * n, [phi] * n) == n * base_ess
        bounds = product_closed_bounds([FA] * n, [phi] * n)
        assert bounds["lockstep_ok"]
        assert bounds["value"] == base_open
    rows = product_growth_report(FA, phi, depth=3)["rows"]
    assert [r["essential"] for r in rows] == [base_ess * n for n in (1, 2, 3)]
    assert all(r["closed"] == base_open for r in rows)
    assert all(r["linear"] and r["closed_flat"] for r in rows)
