import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from profusion._util import CapExceeded
from profusion.catalog import alternating4, dihedral8, gl3f2, sl2f3, symmetric
from profusion.group import (
    GroupHom,
    Permutation,
    all_subgroups,
    centralizer,
    conjugate_subgroup,
    direct_product,
    normalizer,
    p_subgroups,
    quillen_poset_connected,
    quotient_group,
    subgroup_generated,
    sylow_p,
    transporter,
)


def _s4():
    return symmetric(4)


SMALL = [("D8", dihedral8, 2), ("A4", alternating4, 2), ("S4", _s4, 2), ("SL2F3", sl2f3, 3)]


# -- brute-force oracles ---------------------------------------------------------


def brute_closure(G, seed):
    """Closure of a set of element indices under multiplication."""
    members = {0}
    frontier = list(dict.fromkeys(int(x) for x in seed))
    members.update(frontier)
    while frontier:
        nxt = []
        for a in list(members):
            for b in frontier:
                c = G.mul(a, b)
                if c not in members:
                    members.add(c)
                    nxt.append(c)
                c = G.mul(b, a)
                if c not in members:
                    members.add(c)
                    nxt.append(c)
        frontier = nxt
    return frozenset(members)


def brute_all_subgroups(G):
    """Powerset-closure enumeration: grow every known subgroup by every
    outside element until nothing new appears.  Exponential but complete;
    fine up to order 64."""
    subs = {frozenset([0])}
    frontier = [frozenset([0])]
    while frontier:
        new = []
        for H in frontier:
            for g in range(G.order):
                if g in H:
                    continue
                K = brute_closure(G, list(H) + [g])
                if K not in subs:
                    subs.add(K)
                    new.append(K)
        frontier = new
    return subs


def brute_quillen(G, p):
    subs = [H for H in brute_all_subgroups(G) if len(H) > 1]
    primes = set()
    for H in subs:
        n = len(H)
        while n % p == 0:
            n //= p
        if n == 1:
            primes.add(H)
    nodes = sorted(primes, key=sorted)
    if not nodes:
        return "empty"
    parent = list(range(len(nodes)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, A in enumerate(nodes):
        for j, B in enumerate(nodes):
            if i < j and (A <= B or B <= A):
                parent[find(i)] = find(j)
    roots = {find(i) for i in range(len(nodes))}
    return "connected" if len(roots) == 1 else "disconnected"


# -- the oracle comparisons ------------------------------------------------------


@pytest.mark.parametrize("name,builder,p", SMALL, ids=[s[0] for s in SMALL])
def test_all_subgroups_matches_powerset_closure(name, builder, p):
    G = builder()
    got = {frozenset(int(x) for x in H.members) for H in all_subgroups(G)}
    want = brute_all_subgroups(G)
    assert got == want


@pytest.mark.parametrize("name,builder,p", SMALL, ids=[s[0] for s in SMALL])
def test_quillen_poset_matches_brute_components(name, builder, p):
    G = builder()
    assert quillen_poset_connected(G, p) == brute_quillen(G, p)


def test_quillen_disconnected_and_empty_cases():
    # four disjoint cyclic Sylow 3-subgroups
    assert quillen_poset_connected(sl2f3(), 3) == "disconnected"
    assert quillen_poset_connected(symmetric(4), 2) == "connected"
    assert quillen_poset_connected(symmetric(4), 5) == "empty"


@pytest.mark.parametrize("name,builder,p", SMALL, ids=[s[0] for s in SMALL])
def test_transporter_normalizer_centralizer_against_double_loop(name, builder, p):
    G = builder()
    S = sylow_p(G, p)
    sub = subgroup_generated(G, [int(S.members[1])])
    tgt = conjugate_subgroup(G, int(G.order // 2), sub)
    got = set(int(x) for x in transporter(G, sub, tgt))
    want = set()
    for g in range(G.order):
        if all(int(x) in set(int(y) for y in tgt.members)
               for x in G.conj_many(g, sub.members)):
            want.add(g)
    assert got == want

    N = normalizer(G, sub)
    wantN = {g for g in range(G.order)
             if sorted(int(x) for x in G.conj_many(g, sub.members)) == sorted(int(x) for x in sub.members)}
    assert set(int(x) for x in N.members) == wantN

    C = centralizer(G, sub)
    wantC = {g for g in range(G.order)
             if all(G.mul(g, int(x)) == G.mul(int(x), g) for x in sub.members)}
    assert set(int(x) for x in C.members) == wantC


# -- structural sanity -----------------------------------------------------------


def test_sylow_subgroup_has_full_p_part():
    for name, builder, p in SMALL:
        G = builder()
        S = sylow_p(G, p)
        n = G.order
        part = 1
        while n % p == 0:
            n //= p
            part *= p
        assert S.order == part


def test_quotient_group_of_s4_by_klein_is_s3():
    G = symmetric(4)
    V = subgroup_generated(
        G,
        [
            G.index_of_perm(Permutation([1, 0, 3, 2])),
            G.index_of_perm(Permutation([2, 3, 0, 1])),
        ],
    )
    Q, proj = quotient_group(G, V)
    assert Q.order == 6
    assert proj.mapping.shape == (G.order,)
    # homomorphism property on a sample of pairs
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b = (int(x) for x in rng.integers(0, G.order, 2))
        assert proj.mapping[G.mul(a, b)] == Q.mul(
            int(proj.mapping[a]), int(proj.mapping[b])
        )


def test_direct_product_embeddings_commute_pointwise():
    A, B = dihedral8(), symmetric(3)
    G, embeds, projs = direct_product([A, B])
    assert G.order == A.order * B.order
    ea, eb = embeds
    for a in range(0, A.order, 3):
        for b in range(0, B.order, 2):
            x = int(ea.mapping[a])
            y = int(eb.mapping[b])
            assert G.mul(x, y) == G.mul(y, x)
    pa = projs[0]
    for a in range(A.order):
        assert int(pa.mapping[int(ea.mapping[a])]) == a


def test_group_hom_rejects_non_homomorphism():
    G = symmetric(3)
    W = G.whole()
    # swap two non-central elements of the image table
    bad = np.arange(G.order, dtype=np.int32)
    bad[1], bad[2] = bad[2], bad[1]
    with pytest.raises(ValueError):
        GroupHom(W, W, bad)


def test_group_from_generators_large_degree():
    # a quotient construction used to overflow the byte-string dedup key
    # at degree > 255; cover it with a degree-288 coset action
    from profusion.catalog import f3_matrix_perm

    SL = sl2f3()
    S4g = symmetric(4)
    GB, _, _ = direct_product([S4g, SL])
    minus = SL.index_of_perm(f3_matrix_perm([[2, 0], [0, 2]]))
    center = subgroup_generated(
        GB, [int(np.sort((np.array([minus], dtype=np.int64) * GB._strides[1]))[0])]
    )
    Q, proj = quotient_group(GB, center)
    assert Q.order == 288
    assert Q.degree > 255


def test_all_subgroups_cap_raises():
    with pytest.raises(CapExceeded):
        all_subgroups(gl3f2(), order_cap=100)
    with pytest.raises(CapExceeded):
        all_subgroups(symmetric(4), count_cap=5)


def test_subgroup_generated_matches_brute_closure():
    G = symmetric(4)
    rng = np.random.default_rng(3)
    for _ in range(12):
        seed = [int(x) for x in rng.integers(0, G.order, 2)]
        H = subgroup_generated(G, seed)
        assert set(int(x) for x in H.members) == set(brute_closure(G, seed))
        assert G.order % H.order == 0  # Lagrange


@given(st.lists(st.integers(min_value=0, max_value=23), min_size=1, max_size=3))
@settings(max_examples=40, deadline=None)
def test_generated_order_divides_group_order(seed):
    G = symmetric(4)
    H = subgroup_generated(G, seed)
    assert G.order % H.order == 0


def test_p_subgroups_closed_under_conjugacy():
    G = symmetric(4)
    subs = p_subgroups(G, 2)
    keys = {H.members.tobytes() for H in subs}
    for H in subs:
        for g in range(G.order):
            img = np.sort(G.conj_many(g, H.members))
            assert img.astype(np.int32).tobytes() in keys
