"""T-subsystems: closure axioms, relative saturation, and mod-N extension.

A subsystem E of an ambient system F on the same p-group S carries a
strongly F-closed subgroup T <= S recording which conjugations E owns.
``is_T_subsystem`` checks the four closure axioms in order and names the
first one that fails (with a concrete witness); the relative saturation
sweep is the same engine as the absolute one, reading E.T throughout.
"""

from __future__ import annotations

import numpy as np

from ._util import IntegrityError
from .fusion import (
    FusionSystem,
    MaterializedSystem,
    extend_over_N,
    is_strongly_closed,
)
from .group import Subgroup
from .saturation import _conj_tables, is_saturated

__all__ = [
    "subsystem_from_maps",
    "drop_morphisms",
    "is_T_subsystem",
    "is_saturated_subsystem",
    "recover_T",
    "extend_over_N_relative",
    "subsystem_report",
]


def subsystem_from_maps(F: FusionSystem, T: Subgroup, maps, kind="materialized-sub"):
    """Package explicit morphisms of F as a candidate subsystem with its own T.

    Maps are normalized to image form and keyed by domain.  Nothing is
    closed or completed: the axiom checks judge exactly what was given,
    which is the point when building counterexamples by hand.
    """
    by_domain: dict = {}
    for m in maps:
        m = m.image_form()
        by_domain.setdefault(m.domain.key, {})[m.mapping.tobytes()] = m
    E = MaterializedSystem(F.S, F.p, by_domain, kind=kind)
    E.ambient = F
    E.T = T
    E._lattice = F._lattice
    return E


def drop_morphisms(E: FusionSystem, victims) -> MaterializedSystem:
    """Copy E without the given morphisms (counterexample construction)."""
    bad = {m.image_form().map_key() for m in victims}
    keep = []
    for P in E.subgroups():
        keep.extend(m for m in _maps_or_empty(E, P) if m.map_key() not in bad)
    return subsystem_from_maps(E.ambient, E.T, keep, kind="pruned-sub")


def _maps_or_empty(E: FusionSystem, P: Subgroup) -> tuple:
    """maps_from, with domains missing from a materialized oracle read as empty."""
    try:
        return E.maps_from(P)
    except KeyError:
        return ()


def _hom_tables(E: FusionSystem, P: Subgroup, Pp: Subgroup) -> tuple:
    """Hom_E(P, Pp) as image-form maps; memoized, order-insensitive to codomain."""
    memo = E.cache.setdefault("homtabs", {})
    got = memo.get((P.key, Pp.key))
    if got is None:
        got = tuple(m for m in _maps_or_empty(E, P) if m.image().is_subset_of(Pp))
        memo[(P.key, Pp.key)] = got
    return got


def is_T_subsystem(E: FusionSystem, F=None, T=None, full=False):
    """Check the subsystem closure axioms of E inside F; verdict plus report.

    Returns ``(ok, report)`` where the report names the first failure:
    "pre" (T not strongly closed), "containment" (a map of E is not a map
    of F), then the axioms proper --

      a: every conjugation by an element of T, on every domain, is in E;
      b: every map of E factors as an E-isomorphism followed by an
         inclusion (structural under image-form storage; swept anyway so
         foreign oracles get an honest verdict);
      c: phi|_{P'} Hom_E(P, P') = Hom_E(phi P, phi P') phi|_P for all
         P, P' <= Q and phi in Hom_F(Q, S);
      d: psi(u) u^-1 in T for every psi in E and u in its domain.

    Axiom (c) is stable under composing and restricting phi, so by default
    phi ranges only over maps out of essential subgroups and out of S (a
    generating family when F is saturated); ``full=True`` sweeps every
    ambient morphism instead.  The mode used is recorded in the report.
    """
    F = F if F is not None else E.ambient
    T = T if T is not None else E.T
    S = E.S
    report = {
        "T_order": int(T.order),
        "mode": "full" if full else "generators",
        "failing_axiom": None,
        "witness": None,
        "pairs_checked": 0,
    }

    def fail(axiom, witness):
        report["failing_axiom"] = axiom
        report["witness"] = witness
        return False, report

    if not is_strongly_closed(F, T):
        return fail("pre", "T is not strongly closed in the ambient system")

    lattice = F.subgroups()

    for P in lattice:
        have = {m.mapping.tobytes() for m in F.maps_from(P)}
        for m in _maps_or_empty(E, P):
            if m.mapping.tobytes() not in have:
                return fail("containment", {"P": P.key, "table": m.mapping.tobytes().hex()})

    # (a) all T-conjugations present
    for P in lattice:
        have = {m.mapping.tobytes() for m in _maps_or_empty(E, P)}
        tabs = _conj_tables(S, T.members, P)
        sig, first = np.unique(tabs, axis=0, return_index=True)
        for row, j in zip(sig, first):
            if np.ascontiguousarray(row, dtype=np.int32).tobytes() not in have:
                return fail("a", {"P": P.key, "t": int(T.members[int(j)])})

    # (b) iso-inclusion factorization stays inside E
    for P in lattice:
        ms = _maps_or_empty(E, P)
        have = {m.mapping.tobytes() for m in ms}
        for m in ms:
            if m.image_form().mapping.tobytes() not in have:
                return fail("b", {"P": P.key, "table": m.mapping.tobytes().hex()})

    # (c) conjugation invariance of the E-hom sets under ambient maps
    if full:
        sources = list(lattice)
    else:
        from .alperin import essential_subgroups

        sources = list(essential_subgroups(F))
        if not any(Q.order == S.order for Q in sources):
            sources.append(S.whole())
    pairs = 0
    for Q in sources:
        subs_Q = [P for P in lattice if P.is_subset_of(Q)]
        for phi in F.maps_from(Q):
            for P in subs_Q:
                phi_on_P = phi.of_many(P.members)
                for Pp in subs_Q:
                    if P.order > Pp.order:
                        continue
                    left = _hom_tables(E, P, Pp)
                    phiP = Subgroup(S, np.sort(phi_on_P))
                    phiPp = Subgroup(S, np.sort(phi.of_many(Pp.members)))
                    right = _hom_tables(E, phiP, phiPp)
                    if not left and not right:
                        continue
                    pairs += 1
                    lhs = {phi.of_many(m.mapping).tobytes() for m in left}
                    rhs = {m.of_many(phi_on_P).tobytes() for m in right}
                    if lhs != rhs:
                        report["pairs_checked"] = pairs
                        return fail(
                            "c",
                            {
                                "Q": Q.key,
                                "phi": phi.mapping.tobytes().hex(),
                                "P": P.key,
                                "P'": Pp.key,
                                "only_left": len(lhs - rhs),
                                "only_right": len(rhs - lhs),
                            },
                        )
    report["pairs_checked"] = pairs

    # (d) displacements land in T
    inv = S.inv
    for P in lattice:
        for m in _maps_or_empty(E, P):
            ok = T.contains(S.mul_many(m.mapping, inv[P.members]))
            if not np.all(ok):
                u = int(P.members[int(np.argmin(ok))])
                return fail("d", {"P": P.key, "u": u})

    return True, report


def is_saturated_subsystem(E: FusionSystem, report=False):
    """Relative saturation: every E-isomorphism class has a fully normalized member.

    Absolute and relative cases share one engine -- every normalizer and
    automizer in the saturation module reads E.T -- so this is the same
    sweep with the subsystem's own T in force.
    """
    return is_saturated(E, report=report)


def recover_T(E: FusionSystem, check=True) -> Subgroup:
    """The preimage of Aut_E(S) in S: the largest T the category admits.

    A category does not pin T down exactly: central elements conjugate
    trivially, so any T' between the stored T and this preimage satisfies
    the same axioms.  The preimage is the maximal choice; it equals the
    stored T precisely when Z(S) already sits inside it.  With ``check``
    on, a preimage that is not a subgroup or fails to contain the stored
    T raises IntegrityError.
    """
    S = E.S
    whole = S.whole()
    own = {
        m.mapping.tobytes()
        for m in _maps_or_empty(E, whole)
        if m.image().order == S.order
    }
    tabs = _conj_tables(S, whole.members, whole)
    mask = [tabs[i].tobytes() in own for i in range(S.order)]
    try:
        got = Subgroup(S, np.flatnonzero(mask).astype(np.int32))
    except ValueError as e:
        raise IntegrityError(f"recovered T is not a subgroup: {e}") from e
    if check and not E.T.is_subset_of(got):
        raise IntegrityError(
            f"recovered T (order {got.order}) does not contain the stored T (order {E.T.order})"
        )
    return got


def extend_over_N_relative(E: FusionSystem, phi, N: Subgroup):
    """Extend phi within E over a strongly closed N <= T, congruent mod N.

    The scan ranges over Hom_E(PN, QN) and returns the table-least map
    inducing the same map mod N; hypothesis violations raise before the
    scan, a failed scan raises NoExtension.
    """
    if not N.is_subset_of(E.T):
        raise IntegrityError("extension kernel must sit inside T")
    if not is_strongly_closed(E.ambient, N):
        raise IntegrityError("extension kernel must be strongly closed in the ambient system")
    return extend_over_N(E, phi, N)


def subsystem_report(E: FusionSystem, full=False) -> dict:
    """JSON-able summary: T, axiom verdicts, relative saturation, recovered T."""
    ok, rep = is_T_subsystem(E, full=full)
    out = {
        "T": [int(x) for x in E.T.members],
        "T_order": int(E.T.order),
        "axioms_ok": bool(ok),
        "failing_axiom": rep["failing_axiom"],
        "witness": rep["witness"],
        "mode": rep["mode"],
        "relative_saturated": bool(is_saturated_subsystem(E)),
    }
    if ok:
        try:
            got = recover_T(E, check=False)
            out["recovered_T_order"] = int(got.order)
            out["recovered_T_contains_T"] = bool(E.T.is_subset_of(got))
        except IntegrityError:
            out["recovered_T_order"] = None
            out["recovered_T_contains_T"] = False
    return out
