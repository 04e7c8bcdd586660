import numpy as np
import pytest

from profusion._util import IntegrityError
from profusion.catalog import dihedral8, symmetric
from profusion.fusion import (
    FusionMorphism,
    NoExtension,
    conj_map,
    extend_over_N,
    factorize,
    generated_system,
    inclusion_map,
    induced_image_system,
    quotient_system,
    realize,
    strongly_closed_subgroups,
    systems_equal,
)
from profusion.group import Permutation, centralizer, subgroup_generated, transporter


def test_realized_hom_sets_are_transporter_quotients(catalog):
    """|Hom(P,Q)| must equal |T_G(P,Q)| / |C_G(P)| in every realized system."""
    for name in ("S4", "GL3F2"):
        entry = catalog["systems"][name]
        G, F = entry["G"], entry["F"]
        for P in F.subgroups():
            Pg = F.to_g(P.members)
            PG = G.subgroup(Pg)
            c = centralizer(G, PG).order
            for Q in F.subgroups():
                t = len(transporter(G, PG, G.subgroup(F.to_g(Q.members))))
                assert len(F.hom_set(P, Q)) * c == t, (name, int(P.order), int(Q.order))


def test_d8_inner_subgroup_count(catalog):
    F = catalog["systems"]["D8"]["F"]
    assert len(F.subgroups()) == 10


def test_morphisms_compose_and_restrict_within_system(catalog):
    F = catalog["systems"]["S4"]["F"]
    tables = {
        (P.members.tobytes(), m.mapping.tobytes())
        for P in F.subgroups()
        for m in F.maps_from(P)
    }

    def present(m):
        mm = m.image_form()
        return (mm.domain.members.tobytes(), mm.mapping.tobytes()) in tables

    for P in F.subgroups():
        for m in F.maps_from(P):
            img = m.image()
            for m2 in F.maps_from(img)[:4]:
                assert present(m2.compose(m))
            if P.order > 1:
                sub = F.sub(P.members[:1])  # trivial subgroup
                assert present(m.restrict(sub))


def test_iso_witness_and_iso_class(catalog):
    F = catalog["systems"]["GL3F2"]["F"]
    fours = [P for P in F.subgroups() if P.order == 4]
    twos = [P for P in F.subgroups() if P.order == 2]
    for P in fours + twos:
        for Q in fours + twos:
            same = any(Q.members.tobytes() == R.members.tobytes() for R in F.iso_class(P))
            if same:
                w = F.iso_witness(P, Q)
                assert np.array_equal(np.sort(w.mapping), Q.members)
            else:
                with pytest.raises(KeyError):
                    F.iso_witness(P, Q)
    # all five involutions are conjugate in the big group, so the order-2
    # subgroups form one class; the two Klein subgroups stay separate
    # (they are the two transvection types) and the cyclic four is alone
    assert sorted(len(F.iso_class(P)) for P in twos) == [5] * 5
    assert sorted(len(F.iso_class(P)) for P in fours) == [1, 1, 1]


def test_factorize_splits_into_iso_then_inclusion(catalog):
    F = catalog["systems"]["S4"]["F"]
    P = next(P for P in F.subgroups() if P.order == 2 and len(F.iso_class(P)) > 1)
    Q = next(Q for Q in F.iso_class(P) if Q.members.tobytes() != P.members.tobytes())
    m = F.hom_set(P, F.S.whole())[1]
    iso, inc = factorize(F, m)
    assert iso.is_iso()
    assert np.array_equal(inc.mapping, iso.image().members)
    assert np.array_equal(inc.compose(iso).mapping, m.image_form().mapping)


def test_to_s_rejects_elements_outside_sylow(catalog):
    entry = catalog["systems"]["S4"]["F"]
    G = catalog["systems"]["S4"]["G"]
    outside = next(
        i for i in range(G.order) if not entry.S_sub.contains(np.array([i], dtype=np.int32)).all()
    )
    with pytest.raises(ValueError):
        entry.to_s(np.array([outside], dtype=np.int32))


def test_generated_system_without_seeds_is_inner(catalog):
    F = catalog["systems"]["D8"]["F"]
    E = generated_system(F.S, 2, [])
    eq, why = systems_equal(E, F)
    assert eq, why


def test_witness_system_adds_exactly_the_generated_maps(witness_system):
    E = witness_system["E"]
    D8 = witness_system["D8"]
    inner = generated_system(D8, 2, [])
    eq, _ = systems_equal(E, inner)
    assert not eq
    # the seed is there
    s, t = witness_system["s"], witness_system["t"]
    P = subgroup_generated(D8, [s])
    Q = subgroup_generated(D8, [t])
    assert any(np.array_equal(np.sort(m.mapping), Q.members) for m in E.hom_set(P, Q))


def test_strongly_closed_in_s4_are_trivial_klein_sylow(catalog):
    F = catalog["systems"]["S4"]["F"]
    orders = sorted(int(N.order) for N in strongly_closed_subgroups(F))
    assert orders == [1, 4, 8]


def test_quotient_equals_induced_image_on_s4_mod_klein(catalog):
    F = catalog["systems"]["S4"]["F"]
    V = next(N for N in strongly_closed_subgroups(F) if N.order == 4)
    eq, why = systems_equal(quotient_system(F, V), induced_image_system(F, V))
    assert eq, why


def test_quotient_rejects_non_strongly_closed(catalog):
    F = catalog["systems"]["S4"]["F"]
    C = next(P for P in F.subgroups() if P.order == 2 and len(F.iso_class(P)) > 1)
    with pytest.raises(ValueError):
        quotient_system(F, C)


def test_extend_over_center_succeeds_in_saturated_d8(catalog):
    F = catalog["systems"]["D8"]["F"]
    Z = next(N for N in strongly_closed_subgroups(F) if N.order == 2)
    S = F.S
    for P in F.subgroups():
        for phi in F.maps_from(P):
            ext = extend_over_N(F, phi, Z)
            PN = ext.domain
            assert P.is_subset_of(PN)
            assert Z.is_subset_of(PN)
            # the extension agrees with phi modulo Z on all of P
            back = ext.restrict(P).image_form()
            diff = S.mul_many(back.mapping, S.inv[phi.image_form().mapping])
            assert Z.contains(diff).all()


def test_extension_fails_where_saturation_fails(witness_system):
    """The reflection-fusing seed cannot extend over the center: the
    generated category has no morphism between the two Klein subgroups."""
    E = witness_system["E"]
    D8 = witness_system["D8"]
    z, s, t = witness_system["z"], witness_system["s"], witness_system["t"]
    P = subgroup_generated(D8, [s])
    Q = subgroup_generated(D8, [t])
    Z = subgroup_generated(D8, [z])
    alpha = next(
        m for m in E.hom_set(P, Q) if np.array_equal(np.sort(m.mapping), Q.members)
    )
    with pytest.raises(NoExtension):
        extend_over_N(E, alpha, Z)


def test_conj_and_inclusion_map_shapes():
    G = symmetric(4)
    P = subgroup_generated(G, [G.index_of_perm(Permutation([1, 0, 3, 2]))])
    inc = inclusion_map(P)
    assert np.array_equal(inc.mapping, P.members)
    g = G.index_of_perm(Permutation([0, 2, 1, 3]))
    cm = conj_map(G, g, P)
    assert np.array_equal(np.sort(cm.mapping), np.sort(G.conj_many(g, P.members)))


def test_every_realized_map_is_multiplicative(catalog):
    for name in ("D8", "SL2F3"):
        F = catalog["systems"][name]["F"]
        S = F.S
        for P in F.subgroups():
            for m in F.maps_from(P):
                mm = m.image_form()
                a = np.repeat(P.members, P.order)
                b = np.tile(P.members, P.order)
                prods = S.mul_many(a, b)
                pos = P.pos_of(prods)
                fa = np.repeat(mm.mapping, P.order)
                fb = np.tile(mm.mapping, P.order)
                assert np.array_equal(S.mul_many(fa, fb), mm.mapping[pos])
