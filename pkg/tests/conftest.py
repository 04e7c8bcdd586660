"""Shared fixtures.

Everything expensive is session-scoped: the realized catalog systems,
the three towers and the relative subsystems are each built once and
reused by the unit tests and the acceptance gate alike.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from profusion.catalog import (
    BUILDERS,
    T12,
    T23,
    dihedral8,
    f2_matrix_perm,
    f3_matrix_perm,
    gl3f2,
    gl3f2_squared,
    sl2f3,
    symmetric,
)
from profusion.fusion import FusionMorphism, generated_system, realize, realize_subsystem
from profusion.group import (
    Permutation,
    Subgroup,
    direct_product,
    subgroup_generated,
    sylow_p,
)
from profusion.tower import subsystem_sequence, tower_from_group

CATALOG_NAMES = ["D8", "S4", "SL2F3", "GL3F2", "GL3F2^2"]


@pytest.fixture(scope="session")
def catalog():
    """name -> dict(G, p, F) for the five stock systems, plus wall time."""
    out = {}
    t0 = time.monotonic()
    for name in CATALOG_NAMES:
        G, p = BUILDERS[name]()
        out[name] = {"G": G, "p": p, "F": realize(G, p)}
    elapsed = time.monotonic() - t0
    return {"systems": out, "realize_seconds": elapsed}


@pytest.fixture(scope="session")
def gl3f2_example(catalog):
    """The order-168 worked example: P, P' of order 2 conjugate by g but
    not by any element of N_G(S)."""
    entry = catalog["systems"]["GL3F2"]
    G, F = entry["G"], entry["F"]
    x = G.index_of_perm(Permutation.from_cycles([(1, 2), (5, 6)], 7))
    g = G.index_of_perm(Permutation.from_cycles([(0, 1, 3), (2, 5, 4)], 7))
    P = subgroup_generated(G, [x])
    img = G.conj_many(g, P.members)
    phi = FusionMorphism(
        F.sub(F.to_s(P.members)),
        F.sub(np.sort(F.to_s(img))),
        F.to_s(img),
    )
    return {"G": G, "F": F, "P": P, "g": g, "phi": phi}


def _box2(G, strides, A, B):
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    flat = (A[:, None] * strides[0] + B[None, :] * strides[1]).ravel()
    return Subgroup(G, np.sort(flat).astype(np.int32))


def _box3(G, strides, A, B, C):
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    C = np.asarray(C, dtype=np.int64)
    flat = (
        A[:, None, None] * strides[0]
        + B[None, :, None] * strides[1]
        + C[None, None, :] * strides[2]
    ).ravel()
    return Subgroup(G, np.sort(flat).astype(np.int32))


@pytest.fixture(scope="session")
def tower2():
    """Two-level tower on GL3F2 x GL3F2 with the Sylow pinned to a
    product of factor Sylows, plus the transvection-pair morphism."""
    G2 = gl3f2_squared()
    F1g, F2g = G2.factors
    strides = [int(s) for s in G2._strides]
    N1 = _box2(G2, strides, [0], np.arange(F2g.order))
    triv = Subgroup(G2, np.array([0], dtype=np.int32))
    D8a = sylow_p(F1g, 2)
    D8b = sylow_p(F2g, 2)
    S_sub = _box2(G2, strides, D8a.members, D8b.members)
    tw = tower_from_group(G2, 2, [N1, triv], S_sub=S_sub)

    Ft = tw.limit
    I3 = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]

    def flat(m1, m2):
        a = F1g.index_of_perm(f2_matrix_perm(m1))
        b = F2g.index_of_perm(f2_matrix_perm(m2))
        return a * strides[0] + b * strides[1]

    def s_of(i):
        return int(Ft.to_s(np.array([i], dtype=np.int32))[0])

    P2 = subgroup_generated(Ft.S, [s_of(flat(T12, I3)), s_of(flat(I3, T12))])
    Q2 = subgroup_generated(Ft.S, [s_of(flat(T23, I3)), s_of(flat(I3, T23))])
    phi2 = Ft.iso_witness(P2, Q2)
    assert phi2 is not None

    H2 = _box2(G2, strides, D8a.members, np.arange(F2g.order))
    seq = subsystem_sequence(tw, [G2.whole(), H2])
    return {"tower": tw, "P": P2, "Q": Q2, "phi": phi2, "seq": seq, "G": G2}


@pytest.fixture(scope="session")
def towerB():
    """Depth-3 tower on S4 x SL2F3 (order 576): levels S4, S4 x A4,
    the whole group; small enough for every full-lattice sweep."""
    S4g, SLg = symmetric(4), sl2f3()
    GB, _, _ = direct_product([S4g, SLg])
    strides = [int(s) for s in GB._strides]
    minus_I = SLg.index_of_perm(f3_matrix_perm([[2, 0], [0, 2]]))
    N1 = _box2(GB, strides, [0], np.arange(SLg.order))
    N2 = _box2(GB, strides, [0], [0, minus_I])
    triv = Subgroup(GB, np.array([0], dtype=np.int32))
    D8 = sylow_p(S4g, 2)
    Q8 = sylow_p(SLg, 2)
    S_sub = _box2(GB, strides, D8.members, Q8.members)
    tw = tower_from_group(GB, 2, [N1, N2, triv], S_sub=S_sub)
    return {"tower": tw, "G": GB, "S_sub": S_sub}


@pytest.fixture(scope="session")
def towerA():
    """Depth-3 tower on S4 x S4 x SL2F3 (order 13824, Sylow order 512).
    The subgroup lattice of the limit is never enumerated; this subject
    exercises the staged decomposition with three genuine stages."""
    S4a, S4b, SLg = symmetric(4), symmetric(4), sl2f3()
    GA, _, _ = direct_product([S4a, S4b, SLg])
    strides = [int(s) for s in GA._strides]
    allB = np.arange(S4b.order)
    allC = np.arange(SLg.order)
    D8_1 = sylow_p(S4a, 2)
    D8_2 = sylow_p(S4b, 2)
    Q8_3 = sylow_p(SLg, 2)
    S_sub = _box3(GA, strides, D8_1.members, D8_2.members, Q8_3.members)
    N1 = _box3(GA, strides, [0], allB, allC)
    N2 = _box3(GA, strides, [0], [0], allC)
    triv = Subgroup(GA, np.array([0], dtype=np.int32))
    tw = tower_from_group(GA, 2, [N1, N2, triv], S_sub=S_sub)

    H1 = GA.whole()
    H2 = _box3(GA, strides, D8_1.members, allB, allC)
    H3 = _box3(GA, strides, D8_1.members, D8_2.members, allC)
    seq = subsystem_sequence(tw, [H1, H2, H3])

    dt1 = S4a.index_of_perm(Permutation([1, 0, 3, 2]))
    dt2 = S4a.index_of_perm(Permutation([2, 3, 0, 1]))
    quats = [int(m) for m in Q8_3.members if SLg.element_order(int(m)) == 4]
    qi = quats[0]
    qj = next(m for m in quats if m not in subgroup_generated(SLg, [qi]).members)
    Ft = tw.limit
    P3 = Subgroup(
        Ft.S,
        Ft.to_s(_box3(GA, strides, [0, dt1], [0, dt1], subgroup_generated(SLg, [qi]).members).members),
    )
    Q3 = Subgroup(
        Ft.S,
        Ft.to_s(_box3(GA, strides, [0, dt2], [0, dt2], subgroup_generated(SLg, [qj]).members).members),
    )
    phi3 = Ft.iso_witness(P3, Q3)
    assert phi3 is not None

    zD8 = next(
        int(m)
        for m in D8_1.members
        if m != 0 and all(S4a.mul(int(m), int(x)) == S4a.mul(int(x), int(m)) for x in D8_1.members)
    )
    Pz = Subgroup(Ft.S, Ft.to_s(_box3(GA, strides, [0, zD8], [0], [0]).members))
    return {"tower": tw, "seq": seq, "phi": phi3, "Pz": Pz, "G": GA}


@pytest.fixture(scope="session")
def witness_system():
    """Generated system on D8 fusing the two reflection classes through a
    single seed; famously not saturated."""
    D8 = dihedral8()
    invol = [m for m in range(D8.order) if m and D8.mul(m, m) == 0]
    z = next(m for m in invol if all(D8.mul(m, x) == D8.mul(x, m) for x in range(D8.order)))
    refl = [m for m in invol if m != z]
    s = refl[0]
    t = next(m for m in refl if m not in (s, D8.mul(z, s)))
    P = subgroup_generated(D8, [s])
    Q = subgroup_generated(D8, [t])
    mapping = np.where(P.members == 0, 0, t).astype(np.int32)
    alpha = FusionMorphism(P, Q, mapping)
    E = generated_system(D8, 2, [alpha])
    return {"E": E, "D8": D8, "z": z, "s": s, "t": t}


@pytest.fixture(scope="session")
def relative_a4(catalog):
    """E_S(A4) inside the S4 system."""
    entry = catalog["systems"]["S4"]
    G, F = entry["G"], entry["F"]
    evens = [
        i
        for i in range(G.order)
        if sum(len(c) - 1 for c in G.perm_of(i).cycles()) % 2 == 0
    ]
    A4 = subgroup_generated(G, evens)
    return {"E": realize_subsystem(F, A4), "F": F, "H": A4}


@pytest.fixture(scope="session")
def relative_gl3f2(catalog):
    """E_S(1 x GL3F2) inside the GL3F2 x GL3F2 system."""
    entry = catalog["systems"]["GL3F2^2"]
    G, F = entry["G"], entry["F"]
    fix7 = [
        i
        for i in range(G.order)
        if np.array_equal(G.perm_of(i).images[:7], np.arange(7))
    ]
    H = subgroup_generated(G, fix7)
    return {"E": realize_subsystem(F, H), "F": F, "H": H}
