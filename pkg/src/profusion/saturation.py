"""Saturation machinery: receptivity, K-automizers, K-normalizers.

Everything is phrased against a system E together with its distinguished
subgroup T (T = S for full systems), so the absolute notions are the
T = S case of the relative ones and there is a single engine.  The key
subgroup for a morphism phi: R -> Q is

    N_phi = { x in N_T(R)R : exists y in N_T(Q)Q with
              phi(x u x^-1) = y phi(u) y^-1 for all u in R }

and receptivity of Q asks every iso onto Q to extend over its N_phi
with image inside N_T(Q)Q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import IntegrityError, p_part, short_hash
from .fusion import (
    FusionMorphism,
    FusionSystem,
    inclusion_map,
    product_subgroup,
)
from .group import Subgroup, normalizer


class NoRepresentative(RuntimeError):
    """No fully normalized member found in the isomorphism class."""


def intersect(A: Subgroup, B: Subgroup) -> Subgroup:
    return Subgroup(A.parent, np.intersect1d(A.members, B.members))


def _conj_tables(S_group, xs: np.ndarray, P: Subgroup) -> np.ndarray:
    """c_x tables over P.members for every x in xs, shape (len(xs), |P|)."""
    tbl = S_group.table
    if tbl is None:
        raise IntegrityError("saturation engine needs the S-group table")
    left = tbl[np.ix_(xs, P.members)]
    return tbl[left, S_group.inv[xs][:, None]]


class KSubgroup:
    """A subgroup K of Aut_E(Q), stored as automorphism tables."""

    def __init__(self, Q: Subgroup, morphisms, check=True):
        self.Q = Q
        ms = sorted(
            {m.mapping.tobytes(): m for m in morphisms}.values(),
            key=lambda m: m.mapping.tobytes(),
        )
        self.morphisms = tuple(ms)
        self.tables = frozenset(m.mapping.tobytes() for m in ms)
        if check:
            if Q.members.tobytes() not in self.tables:
                raise ValueError("K must contain the identity automorphism")
            for m in ms:
                if m.domain != Q or not m.is_iso() or m.image() != Q:
                    raise ValueError("K members must be automorphisms of Q")
                if m.invert().mapping.tobytes() not in self.tables:
                    raise ValueError("K must be closed under inversion")
            for a in ms:
                for b in ms:
                    if a.compose(b).mapping.tobytes() not in self.tables:
                        raise ValueError("K must be closed under composition")

    def __len__(self):
        return len(self.morphisms)

    def __iter__(self):
        return iter(self.morphisms)

    def key(self) -> str:
        return short_hash(self.Q.key.encode() + b"".join(sorted(self.tables)))

    def contains_table(self, mapping: np.ndarray) -> bool:
        return mapping.tobytes() in self.tables

    def intersect(self, other: "KSubgroup") -> "KSubgroup":
        common = self.tables & other.tables
        return KSubgroup(
            self.Q, [m for m in self.morphisms if m.mapping.tobytes() in common], check=False
        )

    def is_subset_of(self, other: "KSubgroup") -> bool:
        return self.tables <= other.tables

    def transport(self, phi: FusionMorphism) -> "KSubgroup":
        """phi K phi^-1 on phi(Q), for an iso phi out of Q."""
        if phi.domain != self.Q:
            raise ValueError("transport needs an iso out of Q")
        phi = phi.image_form()
        phi_inv = phi.invert()
        moved = [phi.compose(k.compose(phi_inv)) for k in self.morphisms]
        return KSubgroup(phi.image(), moved, check=False)

    @classmethod
    def trivial(cls, Q: Subgroup) -> "KSubgroup":
        return cls(Q, [inclusion_map(Q)], check=False)

    @classmethod
    def generated(cls, Q: Subgroup, seeds) -> "KSubgroup":
        """Closure of the seeds in Aut(Q) under composition and inversion."""
        got: dict[bytes, FusionMorphism] = {}
        queue = [inclusion_map(Q)] + [s.image_form() for s in seeds]
        while queue:
            m = queue.pop()
            b = m.mapping.tobytes()
            if b in got:
                continue
            got[b] = m
            queue.append(m.invert())
            for other in list(got.values()):
                queue.append(m.compose(other))
                queue.append(other.compose(m))
        return cls(Q, got.values(), check=False)


# -- automizer subgroups ------------------------------------------------------------


def _ntq(E: FusionSystem, Q: Subgroup) -> Subgroup:
    """N_T(Q)Q, memoized on the system."""
    key = ("NTQ", Q.key)
    got = E.cache.get(key)
    if got is None:
        NT = intersect(normalizer(E.S, Q), E.T)
        got = product_subgroup(E.S, NT, Q)
        E.cache[key] = got
    return got


def aut_T(E: FusionSystem, Q: Subgroup) -> KSubgroup:
    """Automorphisms of Q induced by conjugation from N_T(Q)."""
    key = ("autT", Q.key)
    got = E.cache.get(key)
    if got is None:
        NT = intersect(normalizer(E.S, Q), E.T)
        tables = _conj_tables(E.S, NT.members, Q)
        uniq = {t.tobytes(): t for t in tables}
        got = KSubgroup(
            Q,
            [FusionMorphism(Q, Q, t, check=False) for t in uniq.values()],
            check=False,
        )
        E.cache[key] = got
    return got


aut_S = aut_T  # absolute name: T = S for full systems


def aut_F(E: FusionSystem, Q: Subgroup) -> KSubgroup:
    key = ("autF", Q.key)
    got = E.cache.get(key)
    if got is None:
        got = KSubgroup(Q, [m.with_codomain(Q) for m in E.aut(Q)], check=False)
        E.cache[key] = got
    return got


def aut_S_K(E: FusionSystem, Q: Subgroup, K: KSubgroup) -> KSubgroup:
    return aut_T(E, Q).intersect(K)


def N_S_K(E: FusionSystem, Q: Subgroup, K: KSubgroup) -> Subgroup:
    """{x in N_T(Q) : c_x|Q in K} (equals the classical N_S^K when T = S)."""
    NT = intersect(normalizer(E.S, Q), E.T)
    tables = _conj_tables(E.S, NT.members, Q)
    keep = np.fromiter(
        (t.tobytes() in K.tables for t in tables), dtype=bool, count=NT.order
    )
    return Subgroup(E.S, NT.members[keep])


def compute_N_phi(E: FusionSystem, phi: FusionMorphism, relative_T: Subgroup | None = None):
    """The defining scan for N_phi (see the module docstring)."""
    T = relative_T if relative_T is not None else E.T
    S = E.S
    R = phi.domain
    Q = phi.image()
    phi = phi.image_form()
    NTR_R = product_subgroup(S, intersect(normalizer(S, R), T), R)
    NTQ_Q = product_subgroup(S, intersect(normalizer(S, Q), T), Q)
    # admissible targets: tables of c_y on Q for y in N_T(Q)Q
    key = ("cyQ", Q.key, T.key)
    targets = E.cache.get(key)
    if targets is None:
        targets = {t.tobytes() for t in _conj_tables(S, NTQ_Q.members, Q)}
        E.cache[key] = targets
    cx = _conj_tables(S, NTR_R.members, R)  # (n, |R|) tables over R
    # phi c_x phi^-1 over Q: reorder through phi's position permutation
    pos_in_R = R.pos_of(phi.invert().mapping)  # Q-position -> R-position
    psi = phi.of_many(cx[:, pos_in_R].reshape(-1)).reshape(cx.shape[0], Q.order)
    keep = np.fromiter(
        (row.tobytes() in targets for row in psi), dtype=bool, count=psi.shape[0]
    )
    return Subgroup(S, NTR_R.members[keep])


@dataclass
class NphiWitness:
    phi: FusionMorphism
    N_phi: Subgroup
    extension: FusionMorphism | None


def is_receptive(E: FusionSystem, Q: Subgroup, witness: bool = False):
    """Every E-iso onto Q extends over its N_phi into N_T(Q)Q."""
    cached = E.cache.get(("receptive", Q.key))
    if cached is not None and not witness:
        return cached
    target = _ntq(E, Q)
    witnesses = []
    ok = True
    for R in E.iso_class(Q):
        for phi in E.iso_set(R, Q):
            N = compute_N_phi(E, phi)
            exts = E.extensions(phi, N, target)
            if exts:
                witnesses.append(NphiWitness(phi, N, exts[0]))
            else:
                ok = False
                witnesses.append(NphiWitness(phi, N, None))
                break
        if not ok:
            break
    E.cache[("receptive", Q.key)] = ok
    return (ok, witnesses) if witness else ok


def is_fully_K_automized(E: FusionSystem, Q: Subgroup, K: KSubgroup) -> bool:
    """Aut_T(Q) meet K is Sylow in Aut_E(Q) meet K (order arithmetic)."""
    inK = len(aut_T(E, Q).intersect(K))
    whole = len(aut_F(E, Q).intersect(K))
    return inK == p_part(whole, E.p)


def is_fully_automized(E: FusionSystem, Q: Subgroup) -> bool:
    return is_fully_K_automized(E, Q, aut_F(E, Q))


def is_fully_K_normalized(E: FusionSystem, Q: Subgroup, K: KSubgroup) -> bool:
    return is_receptive(E, Q) and is_fully_K_automized(E, Q, K)


def is_fully_normalized(E: FusionSystem, Q: Subgroup) -> bool:
    key = ("fnorm", Q.key)
    got = E.cache.get(key)
    if got is None:
        got = is_fully_K_normalized(E, Q, aut_F(E, Q))
        E.cache[key] = got
    return got


def is_fully_centralized(E: FusionSystem, Q: Subgroup) -> bool:
    """The K = 1 specialization."""
    return is_fully_K_normalized(E, Q, KSubgroup.trivial(Q))


def lemma11_kappa(E: FusionSystem, Q: Subgroup, K: KSubgroup, L: KSubgroup):
    """A kappa in K making Q fully (kappa L kappa^-1)-automized.

    Exists whenever Q is fully K-automized and L <= K; scanning K in
    table order keeps the choice deterministic.
    """
    if not L.is_subset_of(K):
        raise ValueError("L must be a subgroup of K")
    for kappa in K:
        if is_fully_K_automized(E, Q, L.transport(kappa)):
            return kappa
    raise IntegrityError("no kappa found; input was not fully K-automized?")


# -- classes and representatives ---------------------------------------------------


def iso_classes(E: FusionSystem) -> list[list[Subgroup]]:
    """Partition of the subgroup lattice into E-isomorphism classes."""
    got = E.cache.get("iso_classes")
    if got is None:
        seen: set[str] = set()
        classes = []
        for P in E.subgroups():
            if P.key in seen:
                continue
            cls = E.iso_class(P)
            for R in cls:
                seen.add(R.key)
            classes.append(sorted(cls, key=lambda R: R.key))
        classes.sort(key=lambda c: (c[0].order, c[0].key))
        E.cache["iso_classes"] = classes
        got = classes
    return got


def _norm_size(E: FusionSystem, Q: Subgroup) -> int:
    return _ntq(E, Q).order


def fully_normalized_candidates(E: FusionSystem, cls: list[Subgroup]) -> list[Subgroup]:
    """Class members ordered for the fully-normalized search: by |N_T(Q)Q|
    descending, then key; the search may fall through all of them."""
    return sorted(cls, key=lambda R: (-_norm_size(E, R), R.key))


def fully_normalized_representative(E: FusionSystem, P: Subgroup):
    """(iso P -> R, R) with R fully normalized in P's class.

    P itself is preferred when it qualifies; otherwise candidates are
    scanned by size then key.  NoRepresentative signals a non-saturated
    input.
    """
    if is_fully_normalized(E, P):
        return inclusion_map(P), P
    for R in fully_normalized_candidates(E, E.iso_class(P)):
        if R.key != P.key and is_fully_normalized(E, R):
            return E.iso_witness(P, R), R
    raise NoRepresentative(f"class of a subgroup of order {P.order} has no fully normalized member")


def is_saturated(E: FusionSystem, report: bool = False):
    """Every E-isomorphism class contains a fully normalized member."""
    out = []
    ok = True
    for cls in iso_classes(E):
        found = None
        for R in fully_normalized_candidates(E, cls):
            if is_fully_normalized(E, R):
                found = R
                break
        if found is None:
            ok = False
        out.append(
            {
                "order": cls[0].order,
                "class_size": len(cls),
                "fully_normalized": found.key if found else None,
            }
        )
        if not ok and not report:
            return False
    return (ok, out) if report else ok


# -- the equivalence checks ---------------------------------------------------------


def check_lemma10(E: FusionSystem, Q: Subgroup, K: KSubgroup) -> dict:
    """Three characterizations of fully K-normalized; they must agree
    whenever Q's class has a fully normalized member (e.g. in any
    saturated system)."""
    S = E.S
    # (a) the definition
    clause_def = is_fully_K_normalized(E, Q, K)

    NK = N_S_K(E, Q, K)
    NKQ = product_subgroup(S, NK, Q)

    # (b) every morphism on N^K(Q)Q maps N^K(Q) onto the K-transported
    # normalizer of the image
    clause_surj = True
    pos_nk = NKQ.pos_of(NK.members)
    pos_q = NKQ.pos_of(Q.members)
    for m in E.maps_from(NKQ):
        phiQ_map = FusionMorphism(
            Q, Subgroup(S, np.sort(m.mapping[pos_q])), m.mapping[pos_q], check=False
        )
        Kt = K.transport(phiQ_map)
        lhs = np.sort(m.mapping[pos_nk])
        rhs = N_S_K(E, phiQ_map.image(), Kt).members
        if not np.array_equal(lhs, rhs):
            clause_surj = False
            break

    # (c) |N^K(Q)Q/Q| maximal across the class under transported K
    clause_max = True
    base = NKQ.order
    for m in E.maps_from(Q):
        Kt = K.transport(m)
        P = m.image()
        other = product_subgroup(S, N_S_K(E, P, Kt), P).order
        if other > base:
            clause_max = False
            break

    pre_ok = any(is_fully_normalized(E, R) for R in E.iso_class(Q))
    return {
        "Q_order": Q.order,
        "Q_key": Q.key,
        "K_order": len(K),
        "class_has_fully_normalized": pre_ok,
        "fully_K_normalized": clause_def,
        "surjectivity": clause_surj,
        "maximality": clause_max,
        "agree": clause_def == clause_surj == clause_max,
    }


def equiv_fnorm_witness(E: FusionSystem, Q: Subgroup, K: KSubgroup, phi: FusionMorphism):
    """For fully K-normalized Q and an iso phi: R -> Q, produce
    (psi, chi) with psi defined on N^(phi^-1 K)(R)R, image inside
    N^K(Q)Q, and psi|R = chi phi for some chi in K."""
    S = E.S
    R = phi.domain
    phi_img = phi.image_form()
    K_back = K.transport(phi_img.invert())
    dom = product_subgroup(S, N_S_K(E, R, K_back), R)
    target = product_subgroup(S, N_S_K(E, Q, K), Q)
    pos_r = dom.pos_of(R.members)
    wanted = {}
    for chi in K:
        t = chi.of_many(phi_img.mapping)
        wanted[t.tobytes()] = chi
    for psi in E.maps_from(dom):
        if not psi.image().is_subset_of(target):
            continue
        chi = wanted.get(psi.mapping[pos_r].tobytes())
        if chi is not None:
            return psi, chi
    raise IntegrityError("no (psi, chi) witness; Q was not fully K-normalized?")


def lemma16_check(E: FusionSystem, Q: Subgroup, K: KSubgroup) -> bool:
    """Images of a fully K-normalized Q under maps defined on N^K(Q)Q
    are fully (transported K)-normalized."""
    S = E.S
    NKQ = product_subgroup(S, N_S_K(E, Q, K), Q)
    pos_q = NKQ.pos_of(Q.members)
    for m in E.maps_from(NKQ):
        phiQ_map = FusionMorphism(
            Q, Subgroup(S, np.sort(m.mapping[pos_q])), m.mapping[pos_q], check=False
        )
        if not is_fully_K_normalized(E, phiQ_map.image(), K.transport(phiQ_map)):
            return False
    return True


def k_sweep(E: FusionSystem, Q: Subgroup, seed: int = 0) -> list[tuple[str, KSubgroup]]:
    """The budgeted K collection: trivial, Aut_T, Aut_E, and one
    seeded-random intermediate subgroup."""
    full = aut_F(E, Q)
    out = [
        ("trivial", KSubgroup.trivial(Q)),
        ("aut_S", aut_T(E, Q)),
        ("aut_F", full),
    ]
    if len(full) > 1:
        digest = short_hash(Q.key.encode() + seed.to_bytes(8, "little", signed=True))
        pick = int(digest, 16) % len(full)
        out.append(("random", KSubgroup.generated(Q, [full.morphisms[pick]])))
    return out


def quotient_preserves(F: FusionSystem, N: Subgroup) -> dict:
    """Fully normalized subgroups over N stay fully normalized in F/N,
    and the quotient system is saturated."""
    from .fusion import quotient_system

    FQ = quotient_system(F, N)
    qd = FQ.quotient_data
    images_ok = True
    checked = 0
    for Q in F.subgroups():
        if not N.is_subset_of(Q):
            continue
        if not is_fully_normalized(F, Q):
            continue
        checked += 1
        if not is_fully_normalized(FQ, qd.push_subgroup(Q)):
            images_ok = False
            break
    quot_sat = is_saturated(FQ)
    return {
        "N_order": N.order,
        "quotient_S_order": FQ.S.order,
        "fully_normalized_images": images_ok,
        "images_checked": checked,
        "quotient_saturated": quot_sat,
        "ok": images_ok and quot_sat,
    }
