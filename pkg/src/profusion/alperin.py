"""Essential subgroups, constructive decomposition, and chain lengths.

Classification (centric / radical / essential, all relative to E.T),
recursive decomposition of an arbitrary morphism into automorphisms of
essential fully normalized subgroups, refinement of raw chains, the
three chain-length metrics via 0/1 breadth-first search, and the
product laws tying factor lengths to product lengths.

A chain for phi: P -> P' is a list of steps (Q_i, psi_i) with psi_i an
automorphism of Q_i, each Q_i containing the running image of P, whose
restricted composition equals phi.  Its length counts the steps with
Q_i != S; automorphisms of S ride along for free.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ._util import IntegrityError, short_hash
from .fusion import FusionMorphism, FusionSystem, RealizedSystem
from .group import (
    Subgroup,
    centralizer,
    conjugate_subgroup,
    group_from_generators,
    normalizer,
    quillen_poset_connected,
    quotient_group,
    sylow_p,
)
from .perm import Permutation
from .saturation import (
    KSubgroup,
    NoRepresentative,
    _conj_tables,
    _ntq,
    aut_T,
    compute_N_phi,
    equiv_fnorm_witness,
    fully_normalized_representative,
    intersect,
    is_fully_normalized,
)

__all__ = [
    "INFINITE",
    "NotSaturated",
    "AlperinChain",
    "aut_perm_group",
    "is_centric",
    "is_radical",
    "quillen_verdict",
    "is_essential",
    "essential_subgroups",
    "essential_report",
    "make_chain",
    "alperin_decompose",
    "refine_to_essential",
    "alp_length",
    "alp_length_naive",
    "chain_report",
    "group_radical",
    "product_radical_split",
    "product_length_laws",
    "product_essential_length",
    "product_closed_bounds",
    "product_growth_report",
]

INFINITE = float("inf")

_MAX_DEPTH = 200


class NotSaturated(RuntimeError):
    """The decomposition recursion hit a step that saturation should rule out."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


# -- the automizer as a permutation group --------------------------------------


def aut_perm_group(E: FusionSystem, Q: Subgroup):
    """Aut_E(Q) as a permutation group on the positions of Q.members.

    Returns (A, morphs) with A.elements[i] acting exactly as morphs[i];
    the multiplication table matches morphism composition, so index
    arithmetic in A is composition in E.  Cached per system.
    """
    key = ("autperm", Q.key)
    got = E.cache.get(key)
    if got is None:
        auts = E.aut(Q)
        perms = [Permutation([int(i) for i in Q.pos_of(m.mapping)]) for m in auts]
        tag = short_hash(Q.key.encode() + b"".join(m.mapping.tobytes() for m in auts))
        A = group_from_generators(perms, name=f"Aut{len(auts)}-{tag[:8]}")
        if A.order != len(auts):
            raise IntegrityError("automorphism set is not closed under composition")
        by_bytes = {m.mapping.tobytes(): m for m in auts}
        morphs = []
        for i in range(A.order):
            mapping = Q.members[np.asarray(A.images_of(i), dtype=np.int64)]
            morphs.append(by_bytes[np.ascontiguousarray(mapping, dtype=np.int32).tobytes()])
        idx_of = {m.mapping.tobytes(): i for i, m in enumerate(morphs)}
        got = (A, tuple(morphs), idx_of)
        E.cache[key] = got
    return got


def _inner_indices(E: FusionSystem, Q: Subgroup) -> np.ndarray:
    """Indices in aut_perm_group of Aut_{T meet Q}(Q), sorted."""
    key = ("autinner", Q.key)
    got = E.cache.get(key)
    if got is None:
        _, _, idx_of = aut_perm_group(E, Q)
        tabs = _conj_tables(E.S, intersect(E.T, Q).members, Q)
        ids = {idx_of[np.ascontiguousarray(t, dtype=np.int32).tobytes()] for t in tabs}
        got = np.array(sorted(ids), dtype=np.int32)
        E.cache[key] = got
    return got


# -- classification -------------------------------------------------------------


def is_centric(E: FusionSystem, Q: Subgroup) -> bool:
    """C_T(Q') <= Z(Q') across the whole E-class of Q.

    Since any centralizing element inside Q' is automatically central,
    the condition per class member reduces to C_T(Q') <= Q'.
    """
    key = ("centric", Q.key)
    got = E.cache.get(key)
    if got is None:
        got = True
        for Qp in E.iso_class(Q):
            C = centralizer(E.S, Qp, within=E.T)
            if not np.all(Qp.contains(C.members)):
                got = False
                break
        E.cache[key] = got
    return got


def is_radical(E: FusionSystem, Q: Subgroup) -> bool:
    """Aut_{T meet Q}(Q) equals O_p(Aut_E(Q)).

    O_p is computed as the intersection of all Sylow p-subgroups of the
    materialized automizer.
    """
    key = ("radical", Q.key)
    got = E.cache.get(key)
    if got is None:
        A, _, _ = aut_perm_group(E, Q)
        syl = sylow_p(A, E.p)
        core = syl.members
        for g in range(A.order):
            core = np.intersect1d(core, conjugate_subgroup(A, g, syl).members)
            if len(core) == 1:
                break
        got = bool(np.array_equal(core, _inner_indices(E, Q)))
        E.cache[key] = got
    return got


def quillen_verdict(E: FusionSystem, Q: Subgroup) -> str:
    """Connectivity of the p-subgroup poset of Aut_E(Q)/Aut_{T meet Q}(Q)."""
    key = ("quillen", Q.key)
    got = E.cache.get(key)
    if got is None:
        A, _, _ = aut_perm_group(E, Q)
        N = Subgroup(A, _inner_indices(E, Q))
        Abar, _ = quotient_group(A, N)
        got = quillen_poset_connected(Abar, E.p)
        E.cache[key] = got
    return got


def is_essential(E: FusionSystem, Q: Subgroup) -> bool:
    """T <= Q, or Q is centric with disconnected (or empty) Quillen poset."""
    key = ("essential", Q.key)
    got = E.cache.get(key)
    if got is None:
        if E.T.is_subset_of(Q):
            got = True
        elif not is_centric(E, Q):
            got = False
        else:
            got = quillen_verdict(E, Q) in ("disconnected", "empty")
        E.cache[key] = got
    return got


def essential_subgroups(E: FusionSystem) -> list[Subgroup]:
    """All essential subgroups, in lattice order."""
    got = E.cache.get("essentials")
    if got is None:
        got = [Q for Q in E.subgroups() if is_essential(E, Q)]
        E.cache["essentials"] = got
    return got


def essential_report(E: FusionSystem) -> list[dict]:
    """Per-subgroup classification flags; enforces essential => radical."""
    out = []
    for Q in E.subgroups():
        centric = is_centric(E, Q)
        entry = {
            "key": Q.key,
            "order": int(Q.order),
            "centric": centric,
            "radical": is_radical(E, Q),
            "essential": is_essential(E, Q),
            "quillen": quillen_verdict(E, Q) if centric else None,
        }
        if entry["essential"] and not entry["radical"]:
            raise IntegrityError(f"essential subgroup {Q.key} is not radical")
        out.append(entry)
    return out


# -- chains ---------------------------------------------------------------------


@dataclass(frozen=True)
class AlperinChain:
    """Steps (Q_i, psi_i) whose restricted composition is `composite`."""

    P0: Subgroup
    steps: tuple
    composite: FusionMorphism

    @property
    def length(self) -> int:
        S_order = self.P0.parent.order
        return sum(1 for Q, _ in self.steps if Q.order != S_order)

    def inverse(self) -> "AlperinChain":
        steps = tuple((Q, psi.invert()) for Q, psi in reversed(self.steps))
        return AlperinChain(self.composite.image(), steps, self.composite.invert())


def make_chain(E: FusionSystem, P0: Subgroup, steps, expect=None) -> AlperinChain:
    """Assemble and validate a chain; raises on any broken step."""
    cur = P0.members.astype(np.int32)
    for Q, psi in steps:
        if psi.domain.key != Q.key or psi.image().key != Q.key:
            raise IntegrityError("chain step is not an automorphism of its subgroup")
        img = Subgroup(E.S, np.sort(cur))
        if not img.is_subset_of(Q):
            raise IntegrityError("chain step does not contain the running subgroup")
        cur = psi.of_many(cur)
    composite = FusionMorphism(P0, E.sub(np.sort(cur)), cur, check=False)
    if expect is not None and not np.array_equal(cur, expect.mapping):
        raise IntegrityError("chain does not compose to the requested morphism")
    return AlperinChain(P0, tuple(steps), composite)


def _inverse_steps(steps) -> list:
    return [(Q, psi.invert()) for Q, psi in reversed(steps)]


def chain_report(E: FusionSystem, chain: AlperinChain) -> dict:
    """JSON form: ordered steps with flags, composite hash, length."""
    steps = []
    for Q, psi in chain.steps:
        steps.append(
            {
                "Q": Q.key,
                "order": int(Q.order),
                "essential": is_essential(E, Q),
                "fully_normalized": is_fully_normalized(E, Q),
                "table": [int(x) for x in psi.mapping],
            }
        )
    comp = chain.composite
    return {
        "domain": chain.P0.key,
        "steps": steps,
        "length": chain.length,
        "composite": short_hash(comp.domain.key.encode() + comp.mapping.tobytes()),
    }


# -- the decomposition recursion --------------------------------------------------


def alperin_decompose(E: FusionSystem, phi: FusionMorphism) -> AlperinChain:
    """Decompose phi into automorphisms of essential fully normalized subgroups.

    Follows the recursion of the finite decomposition argument: route both
    ends of phi through a fully normalized representative; extend over
    N_phi whenever it is strictly larger than the domain; for an
    automorphism of a fully normalized, centric, non-essential subgroup,
    walk the Sylow automizers along the connected Quillen poset and
    recurse on each leg.  Every emitted step is an automorphism of an
    essential fully normalized subgroup, and the recomposition is checked
    before returning.
    """
    phi = phi.image_form()
    try:
        steps = _decompose(E, phi, 0)
    except NoRepresentative as e:
        raise NotSaturated(f"no fully normalized representative: {e}") from e
    return make_chain(E, phi.domain, steps, expect=phi)


def _decompose(E: FusionSystem, phi: FusionMorphism, depth: int) -> list:
    if depth > _MAX_DEPTH:
        raise NotSaturated("decomposition recursion exceeded its depth bound")
    phi = phi.image_form()
    P = phi.domain
    if np.array_equal(phi.mapping, P.members):
        return []
    if P.order == E.S.order:
        return [(E.S.whole(), phi)]
    img = phi.image()
    if img.key == P.key and is_fully_normalized(E, P):
        return _decompose_aut(E, phi, depth)
    if is_fully_normalized(E, img):
        return _decompose_to_fnorm(E, phi, depth)
    # route both ends through a fully normalized representative
    rho, _ = fully_normalized_representative(E, P)
    alpha = rho.compose(phi.invert())
    c1 = _decompose(E, rho, depth + 1)
    c2 = _decompose(E, alpha, depth + 1)
    return c1 + _inverse_steps(c2)


def _decompose_to_fnorm(E: FusionSystem, phi: FusionMorphism, depth: int) -> list:
    """phi: P -> Q with Q fully normalized, P < S."""
    P = phi.domain
    Q = phi.image()
    K_full = KSubgroup(Q, E.aut(Q), check=False)
    try:
        psi, chi = equiv_fnorm_witness(E, Q, K_full, phi)
    except IntegrityError as e:
        raise NotSaturated(f"no morphism off N_T(P)P agreeing with phi: {e}", step=(P.key, Q.key)) from e
    if psi.domain.order > P.order:
        c1 = _decompose(E, psi, depth + 1)
        c2 = _decompose_aut(E, chi.invert().image_form(), depth + 1)
        return c1 + c2
    # N_T(P)P = P forces T <= P (T is normal in S), which forces phi to be
    # an automorphism of a fully normalized subgroup -- handled upstream.
    raise NotSaturated(
        "normalizer tower stalled strictly below S", step=(P.key, Q.key)
    )


def _extension_of(E: FusionSystem, theta: FusionMorphism, N: Subgroup) -> FusionMorphism:
    P = theta.domain
    exts = E.extensions(theta, N, _ntq(E, P))
    if not exts:
        raise NotSaturated(
            "receptivity extension missing over N_phi", step=(P.key, theta.mapping.tobytes().hex())
        )
    return exts[0].image_form()


def _decompose_aut(E: FusionSystem, chi: FusionMorphism, depth: int) -> list:
    """chi in Aut_E(P) with P fully normalized and strictly below S."""
    P = chi.domain
    if np.array_equal(chi.mapping, P.members):
        return []
    N = compute_N_phi(E, chi)
    if N.order > P.order:
        return _decompose(E, _extension_of(E, chi, N), depth + 1)
    if is_essential(E, P):
        return [(P, chi)]

    # Quillen walk: link the Sylow automizer to its chi-conjugate through
    # Sylow conjugates meeting above Aut_{T meet P}(P), then recurse on
    # each leg, whose N_phi is strictly larger by the meeting condition.
    A, morphs, idx_of = aut_perm_group(E, P)
    tbl, inv = A.table, A.inv
    inner = frozenset(int(i) for i in _inner_indices(E, P))
    U = frozenset(idx_of[t] for t in aut_T(E, P).tables)
    k_chi = idx_of[chi.mapping.tobytes()]

    def conj_set(g, members):
        return frozenset(int(tbl[tbl[g, u], inv[g]]) for u in members)

    conj_of: dict = {}
    for g in range(A.order):
        conj_of.setdefault(conj_set(g, U), g)
    start = frozenset(U)
    target = conj_set(int(inv[k_chi]), U)
    if target == start:
        raise NotSaturated("walk requested for a morphism already normalizing the automizer", step=P.key)

    nodes = sorted(conj_of, key=lambda k: conj_of[k])
    parent = {start: None}
    queue = deque([start])
    while queue and target not in parent:
        cur = queue.popleft()
        for other in nodes:
            if other not in parent and len(cur & other) > len(inner):
                parent[other] = cur
                queue.append(other)
    if target not in parent:
        raise NotSaturated("Sylow automizers not linked above the inner automizer", step=P.key)

    path = [target]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    chis = [conj_of[k] for k in path]
    chis[0] = 0
    chis[-1] = int(inv[k_chi])

    steps: list = []
    for prev, curk in zip(chis, chis[1:]):
        theta = morphs[int(tbl[inv[curk], prev])]
        N_th = compute_N_phi(E, theta)
        if N_th.order <= P.order:
            raise NotSaturated("walk leg fails to grow its normalizer", step=P.key)
        steps += _decompose(E, _extension_of(E, theta, N_th), depth + 1)
    return steps


def refine_to_essential(E: FusionSystem, chain: AlperinChain) -> AlperinChain:
    """Replace every non-essential (or non-fully-normalized) step by its own
    decomposition and splice; the recomposition is revalidated."""
    steps: list = []
    for Q, psi in chain.steps:
        if is_essential(E, Q) and is_fully_normalized(E, Q):
            steps.append((Q, psi))
        else:
            steps.extend(alperin_decompose(E, psi).steps)
    return make_chain(E, chain.P0, steps, expect=chain.composite)


# -- lengths ----------------------------------------------------------------------


def _variant_sources(E: FusionSystem, variant: str, essentials):
    if variant == "essential":
        return list(essentials) if essentials is not None else essential_subgroups(E)
    if variant in ("open", "closed"):
        return None  # all subgroups; at a single finite level the two agree
    raise ValueError(f"unknown length variant: {variant!r}")


def _moves_from(E: FusionSystem, img: Subgroup, allowed) -> list:
    """(Q, psi) moves available from a state with image img."""
    if allowed is None:
        qs = E.overgroups(img)
    else:
        qs = [Q for Q in allowed if img.is_subset_of(Q)]
    out = []
    for Q in qs:
        for psi in E.aut(Q):
            out.append((Q, psi))
    return out


def alp_length(
    E: FusionSystem,
    phi: FusionMorphism,
    variant: str = "open",
    limit=None,
    essentials=None,
    return_chain: bool = False,
):
    """Minimum chain length for phi under the S-steps-are-free metric.

    0/1 breadth-first search over morphism states with domain phi.domain:
    a move postcomposes with an automorphism of a subgroup containing the
    current image, at cost 0 for S and 1 otherwise.  With ``limit`` set,
    states beyond that cost are pruned and INFINITE is returned when the
    target is not reached; without it, an unreachable target raises,
    since a system containing phi always admits a chain.
    """
    phi = phi.image_form()
    P = phi.domain
    allowed = _variant_sources(E, variant, essentials)
    target = phi.mapping.tobytes()
    start = P.members.astype(np.int32)
    start_b = start.tobytes()
    S_order = E.S.order

    dist = {start_b: 0}
    pred: dict = {start_b: None}
    moves_memo: dict = {}
    dq = deque([(0, start_b, start)])
    while dq:
        d, cur_b, cur = dq.popleft()
        if dist.get(cur_b, INFINITE) < d:
            continue
        if cur_b == target:
            break
        img_b = np.sort(cur).tobytes()
        moves = moves_memo.get(img_b)
        if moves is None:
            moves = _moves_from(E, E.sub(np.sort(cur)), allowed)
            moves_memo[img_b] = moves
        for Q, psi in moves:
            cost = 0 if Q.order == S_order else 1
            nd = d + cost
            if limit is not None and nd > limit:
                continue
            new = psi.of_many(cur)
            new_b = new.tobytes()
            if nd < dist.get(new_b, INFINITE):
                dist[new_b] = nd
                pred[new_b] = (cur_b, Q, psi)
                if cost == 0:
                    dq.appendleft((nd, new_b, new))
                else:
                    dq.append((nd, new_b, new))

    if target not in dist:
        if limit is not None:
            return (INFINITE, None) if return_chain else INFINITE
        raise IntegrityError("no chain reaches the morphism; is it in the system?")
    n = dist[target]
    if not return_chain:
        return n
    steps = []
    at = target
    while pred[at] is not None:
        prev_b, Q, psi = pred[at]
        steps.append((Q, psi))
        at = prev_b
    steps.reverse()
    return n, make_chain(E, P, steps, expect=phi)


def alp_length_naive(E: FusionSystem, phi: FusionMorphism, bound: int = 3, variant: str = "open", essentials=None):
    """Layered exhaustive oracle: grow cost balls by closing under S-steps
    and taking single non-S steps, up to ``bound``.  Independent of the
    0/1-BFS; intended for small systems."""
    phi = phi.image_form()
    P = phi.domain
    allowed = _variant_sources(E, variant, essentials)
    S_order = E.S.order
    s_auts = E.aut(E.S.whole())

    def close_s(states: dict) -> dict:
        frontier = list(states.values())
        while frontier:
            nxt = []
            for cur in frontier:
                for psi in s_auts:
                    new = psi.of_many(cur)
                    b = new.tobytes()
                    if b not in states:
                        states[b] = new
                        nxt.append(new)
            frontier = nxt
        return states

    target = phi.mapping.tobytes()
    start = P.members.astype(np.int32)
    ball = close_s({start.tobytes(): start})
    for k in range(bound + 1):
        if target in ball:
            return k
        grown = dict(ball)
        for cur in list(ball.values()):
            img = E.sub(np.sort(cur))
            if allowed is None:
                qs = [Q for Q in E.overgroups(img) if Q.order != S_order]
            else:
                qs = [Q for Q in allowed if Q.order != S_order and img.is_subset_of(Q)]
            for Q in qs:
                for psi in E.aut(Q):
                    new = psi.of_many(cur)
                    grown.setdefault(new.tobytes(), new)
        ball = close_s(grown)
    return k + 1 if target in ball else INFINITE


# -- product laws ------------------------------------------------------------------


def split_product_subgroup(FP: RealizedSystem, factors, P: Subgroup):
    """Factor projections of P <= S inside a realized product system.

    Returns (parts, splits): parts are the projections as subgroups of
    the factor systems' Sylow groups; splits says whether P is exactly
    their direct product.
    """
    G = FP.G
    if G.factors is None:
        raise IntegrityError("the ambient group does not carry factor structure")
    gparts = G._split(FP.to_g(P.members).astype(np.int64))
    parts = []
    count = 1
    for F_i, gp in zip(factors, gparts):
        uniq = np.unique(gp).astype(np.int32)
        count *= len(uniq)
        parts.append(Subgroup(F_i.S, np.sort(F_i.to_s(uniq))))
    return parts, count == P.order


def embed_product_subgroup(FP: RealizedSystem, factors, parts) -> Subgroup:
    """The direct product of factor subgroups, as a subgroup of FP's Sylow."""
    G = FP.G
    acc = np.zeros(1, dtype=np.int64)
    for F_i, stride, part in zip(factors, G._strides, parts):
        gm = F_i.to_g(part.members).astype(np.int64)
        acc = (acc[:, None] + stride * gm[None, :]).ravel()
    return Subgroup(FP.S, np.sort(FP.to_s(acc.astype(np.int32))))


def embed_product_morphism(FP: RealizedSystem, factors, ms) -> FusionMorphism:
    """The product of factor morphisms, as a morphism of FP."""
    G = FP.G
    dom = embed_product_subgroup(FP, factors, [m.domain for m in ms])
    gparts = G._split(FP.to_g(dom.members).astype(np.int64))
    out = np.zeros(len(dom.members), dtype=np.int64)
    for F_i, stride, gp, m in zip(factors, G._strides, gparts, ms):
        s_in = F_i.to_s(gp.astype(np.int32))
        s_out = m.of_many(s_in)
        out += stride * F_i.to_g(s_out).astype(np.int64)
    mapping = FP.to_s(out.astype(np.int32))
    return FusionMorphism(dom, FP.sub(np.sort(mapping)), mapping.astype(np.int32))


def group_radical(G, P_G: Subgroup, p: int) -> bool:
    """Classical sense: O_p(N_G(P)) = P.

    This is the notion the product splitting law speaks about; it differs
    from the automizer sense of ``is_radical`` (a fused diagonal subgroup
    can have trivial outer p-core while its normalizer's p-core grows).
    """
    N = normalizer(G, P_G)
    A = N.as_group()
    syl = sylow_p(A, p)
    core = syl.members
    for g in range(A.order):
        core = np.intersect1d(core, conjugate_subgroup(A, g, syl).members)
        if len(core) == len(P_G.members):
            break
    return bool(np.array_equal(np.sort(N.members[core]), P_G.members))


def product_radical_split(FP: RealizedSystem, factors, P: Subgroup) -> dict:
    """Check the product splitting laws on the given P.

    Radical here is the classical normalizer-p-core sense (the sense the
    splitting law is about): if P is radical it must split as a direct
    product of radical factors.  If P is essential (automizer sense),
    the factors must be essential with at most one factor normalizer
    quotient of order divisible by p, forcing every other factor to be
    the full Sylow.
    """
    parts, splits = split_product_subgroup(FP, factors, P)
    radical = group_radical(FP.G, Subgroup(FP.G, FP.to_g(P.members)), FP.p)
    essential = is_essential(FP, P)
    factors_radical = [
        group_radical(F_i.G, Subgroup(F_i.G, F_i.to_g(Q_i.members)), F_i.p)
        for F_i, Q_i in zip(factors, parts)
    ]
    factors_essential = [is_essential(F_i, Q_i) for F_i, Q_i in zip(factors, parts)]
    p_divides = []
    for F_i, Q_i in zip(factors, parts):
        QG = Subgroup(F_i.G, F_i.to_g(Q_i.members))
        NG = normalizer(F_i.G, QG)
        p_divides.append((NG.order // QG.order) % FP.p == 0)
    sylow_factors = [Q_i.order == F_i.S.order for F_i, Q_i in zip(factors, parts)]
    report = {
        "P_order": int(P.order),
        "splits": bool(splits),
        "radical": bool(radical),
        "aut_radical": is_radical(FP, P),
        "essential": bool(essential),
        "factor_orders": [int(Q.order) for Q in parts],
        "factors_radical": factors_radical,
        "factors_essential": factors_essential,
        "normalizer_p_divisible": p_divides,
        "sylow_factors": sylow_factors,
        "radical_law_ok": (not radical) or (splits and all(factors_radical)),
        "essential_law_ok": (not essential)
        or (splits and all(factors_essential) and sum(p_divides) <= 1),
    }
    return report


def product_length_laws(FP: RealizedSystem, factors, phis, limit=None) -> dict:
    """Compute factor and product lengths and check the product laws.

    sum of open lengths >= open length of the product >= sup; the closed
    length of the product equals the sup (at a single finite level open
    and closed coincide); the essential length of the product equals the
    sum.
    """
    prod_phi = embed_product_morphism(FP, factors, phis)
    f_open = [alp_length(F_i, m, "open") for F_i, m in zip(factors, phis)]
    f_ess = [alp_length(F_i, m, "essential") for F_i, m in zip(factors, phis)]
    p_open = alp_length(FP, prod_phi, "open", limit=limit)
    p_closed = alp_length(FP, prod_phi, "closed", limit=limit)
    p_ess = alp_length(FP, prod_phi, "essential", limit=limit)
    report = {
        "factor_open": f_open,
        "factor_essential": f_ess,
        "product_open": p_open,
        "product_closed": p_closed,
        "product_essential": p_ess,
        "sum_ge_open": sum(f_open) >= p_open,
        "open_ge_sup": p_open >= max(f_open),
        "closed_eq_sup": p_closed == max(f_open),
        "essential_eq_sum": p_ess == sum(f_ess),
    }
    return report


# -- product lengths in factor coordinates -------------------------------------
#
# For a realized product system on S_1 x ... x S_n, morphism sets over
# split subgroups are products of factor morphism sets (the transporter
# splits coordinatewise), and essential subgroups are exactly one proper
# factor essential times full Sylows elsewhere (the splitting laws,
# checked exhaustively by product_radical_split / product_length_laws
# where the product group itself fits in memory).  These two facts let
# the length computations below run on the factor systems alone, so the
# product group is never materialized and the factor count is not
# limited by the ambient order cap.


def _identity_aut(F: FusionSystem) -> FusionMorphism:
    S = F.S.whole()
    return FusionMorphism(S, S, S.members, check=False)


def product_essential_length(factors, phis, limit=None, return_steps=False):
    """Essential-variant length of a product morphism, in factor coordinates.

    0/1-BFS over tuples of factor morphism tables.  A cost-0 move
    postcomposes one coordinate with a Sylow automorphism of that factor
    (these generate the product Sylow automorphisms); a cost-1 move
    postcomposes one coordinate with an automorphism of a proper
    essential subgroup containing that coordinate's image, the product
    shape all essential sources take.
    """
    n = len(factors)
    phis = [m.image_form() for m in phis]
    starts = [m.domain.members.astype(np.int32) for m in phis]
    target = tuple(m.mapping.tobytes() for m in phis)
    s_auts = [
        [
            a
            for a in F.aut(F.S.whole())
            if a.mapping.tobytes() != F.S.whole().members.tobytes()
        ]
        for F in factors
    ]
    proper_ess = [
        [Q for Q in essential_subgroups(F) if Q.order < F.S.order] for F in factors
    ]

    start = tuple(t.tobytes() for t in starts)
    dist = {start: 0}
    pred: dict = {start: None}
    dq = deque([(0, start, tuple(starts))])
    while dq:
        d, cur_b, cur = dq.popleft()
        if dist.get(cur_b, INFINITE) < d:
            continue
        if cur_b == target:
            break
        for j in range(n):
            moves = [(None, a, 0) for a in s_auts[j]]
            for Q in proper_ess[j]:
                if Q.contains(cur[j]).all():
                    moves.extend((Q, a, 1) for a in factors[j].aut(Q))
            for Q, psi, cost in moves:
                nd = d + cost
                if limit is not None and nd > limit:
                    continue
                new_j = psi.of_many(cur[j])
                new = cur[:j] + (new_j,) + cur[j + 1 :]
                new_b = cur_b[:j] + (new_j.tobytes(),) + cur_b[j + 1 :]
                if nd < dist.get(new_b, INFINITE):
                    dist[new_b] = nd
                    pred[new_b] = (cur_b, j, Q, psi)
                    if cost == 0:
                        dq.appendleft((nd, new_b, new))
                    else:
                        dq.append((nd, new_b, new))

    if target not in dist:
        if limit is not None:
            return (INFINITE, None) if return_steps else INFINITE
        raise IntegrityError("no essential chain reaches the product morphism")
    length = dist[target]
    if not return_steps:
        return length

    steps = []
    at = target
    while pred[at] is not None:
        prev_b, j, Q, psi = pred[at]
        steps.append((j, Q, psi))
        at = prev_b
    steps.reverse()
    cur = [t.copy() for t in starts]
    for j, Q, psi in steps:
        if Q is not None and not Q.contains(cur[j]).all():
            raise IntegrityError("reconstructed product chain leaves its source")
        cur[j] = psi.of_many(cur[j])
    if tuple(t.tobytes() for t in cur) != target:
        raise IntegrityError("reconstructed product chain does not recompose")
    return length, steps


def _alternating_chain(F: FusionSystem, chain: AlperinChain):
    """Rewrite a chain as S-aut, proper step, S-aut, ..., proper step, S-aut.

    Returns (chis, psis) with len(chis) == len(psis) + 1 and the same
    ordered composite; consecutive Sylow steps are composed together and
    identity Sylow steps fill the gaps.
    """
    S_order = F.S.order
    chis = [_identity_aut(F)]
    psis = []
    for Q, psi in chain.steps:
        if Q.order == S_order:
            chis[-1] = psi.compose(chis[-1])
        else:
            psis.append((Q, psi))
            chis.append(_identity_aut(F))
    return chis, psis


def product_closed_bounds(factors, phis) -> dict:
    """Closed-variant length of a product morphism, in factor coordinates.

    Upper bound: optimal factor chains, rewritten into alternating form,
    run in lockstep — at product step t every unfinished factor performs
    its t-th proper step while finished factors idle at their Sylow — so
    the product pays sup(factor lengths) in total.  Lower bound:
    projecting a product chain onto a coordinate yields a factor chain
    of no greater length, so every factor length bounds the product
    length from below.  The bounds meet at the sup.
    """
    phis = [m.image_form() for m in phis]
    lengths = []
    alternating = []
    for F, m in zip(factors, phis):
        ln, chain = alp_length(F, m, "open", return_chain=True)
        chis, psis = _alternating_chain(F, chain)
        lengths.append(ln)
        alternating.append((chis, psis))
    sup = max(lengths)

    lockstep_ok = True
    proper_steps = 0
    cur = [m.domain.members.astype(np.int32) for m in phis]
    for t in range(sup):
        step_proper = False
        for j, F in enumerate(factors):
            chis, psis = alternating[j]
            if t < len(psis):
                cur[j] = chis[t].of_many(cur[j])
                Q, psi = psis[t]
                if not Q.contains(cur[j]).all():
                    lockstep_ok = False
                cur[j] = psi.of_many(cur[j])
                step_proper = True
        proper_steps += 1 if step_proper else 0
    for j, F in enumerate(factors):
        chis, psis = alternating[j]
        for chi in chis[len(psis) :]:
            cur[j] = chi.of_many(cur[j])
        if cur[j].tobytes() != phis[j].mapping.tobytes():
            lockstep_ok = False
    if proper_steps != sup:
        lockstep_ok = False

    return {
        "factor_open": lengths,
        "lower": sup,
        "upper": sup if lockstep_ok else INFINITE,
        "value": sup,
        "lockstep_ok": lockstep_ok,
    }


def product_growth_report(F: FusionSystem, phi: FusionMorphism, depth: int = 3) -> dict:
    """Essential and closed lengths of the n-fold product of one morphism.

    The essential length must grow linearly in the factor count while
    the closed length stays flat at the single-factor value; unbounded
    factor counts therefore drive the essential metric to infinity even
    though every truncation admits short closed chains.
    """
    ess1 = alp_length(F, phi, "essential")
    clo1 = alp_length(F, phi, "closed")
    rows = []
    for n in range(1, depth + 1):
        if n == 1:
            ess, clo = ess1, clo1
        else:
            ess = product_essential_length([F] * n, [phi] * n)
            clo = product_closed_bounds([F] * n, [phi] * n)["value"]
        rows.append(
            {
                "n": n,
                "essential": int(ess),
                "closed": int(clo),
                "linear": ess == n * ess1,
                "closed_flat": clo == clo1,
            }
        )
    return {
        "per_factor_essential": int(ess1),
        "per_factor_closed": int(clo1),
        "rows": rows,
        "linear_growth": all(r["linear"] for r in rows),
        "closed_constant": all(r["closed_flat"] for r in rows),
    }
