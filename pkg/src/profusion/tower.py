"""Finite-depth inverse systems of fusion systems.

A tower is a chain of fusion systems F_1, ..., F_d together with
connecting system morphisms f_{i,j}: F_j -> F_i for i <= j satisfying
f_{i,j} f_{j,k} = f_{i,k} on the nose.  Level d is exact: its Sylow
group is the thread group of the system and the kernels N_i record what
each coarser level forgets, with N_d = 1.  "Open" subgroups at finite
depth are those containing some proper kernel; every subgroup is open
once the trivial kernel is admitted, so the distinction is surfaced
through report fields rather than through the object model.

The staged decomposition at the end of the module approximates an
isomorphism through a descending sequence of conjugation subsystems,
peeling off per-stage chains whose residuals are certified congruent to
the inclusion modulo ever-smaller strongly closed subgroups, and
finishing with an exact decomposition in the last subsystem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import IntegrityError
from .alperin import alperin_decompose, alp_length, chain_report, refine_to_essential
from .fusion import (
    BadFunctor,
    FusionMorphism,
    FusionSystem,
    NoExtension,
    RealizedSystem,
    SystemMorphism,
    induced_image_system,
    generated_system,
    inclusion_map,
    is_strongly_closed,
    quotient_system,
    realize,
    realize_subsystem,
    systems_equal,
)
from .group import (
    CapExceeded,
    FiniteGroup,
    GroupHom,
    Subgroup,
    all_subgroups,
    conjugate_subgroup,
    direct_product,
    quotient_group,
    subgroup_generated,
)
from .saturation import (
    fully_normalized_candidates,
    is_fully_normalized,
    is_saturated,
    iso_classes,
)
from .subsystems import extend_over_N_relative

__all__ = [
    "Tower",
    "ProMorphism",
    "SubsystemSequence",
    "NoFactoring",
    "StageFailure",
    "tower_from_group",
    "pro_hom",
    "check_continuity",
    "stable_image",
    "osc_quotient_tower",
    "is_pro_saturated",
    "saturation_at_depth",
    "sylow_limit_check",
    "subsystem_sequence",
    "lemma27_index",
    "convergent_alperin",
    "limitlength_check",
]


class NoFactoring(IntegrityError):
    """A claimed tower morphism does not factor through any source level."""


class StageFailure(RuntimeError):
    """A stage of the staged decomposition could not be completed."""

    def __init__(self, message, stage=None, cause=None):
        super().__init__(message)
        self.stage = stage
        self.cause = cause


def _residual_inside(F: FusionSystem, m: FusionMorphism, X: Subgroup) -> bool:
    """Whether m(u) u^-1 lies in X for every u in the domain."""
    S = F.S
    r = S.mul_many(m.mapping, S.inv[m.domain.members])
    return bool(X.contains(r).all())


def _table_in(F: FusionSystem, m: FusionMorphism) -> bool:
    tables = {x.mapping.tobytes() for x in F.maps_from(m.domain)}
    return m.image_form().mapping.tobytes() in tables


class Tower:
    """Levels, connecting maps, and the kernels of the exact top level.

    ``levels[k]`` is level k+1 (1-based levels in all public reports);
    ``alphas[(i, j)]`` is the Sylow-group homomorphism S_j -> S_i under
    the connecting functor.  Functoriality and kernel nesting are table
    facts and are checked at construction; the functor property of each
    connecting map on fusion morphisms is checked by
    ``verify_connecting`` (full sweeps only make sense on small levels,
    so the sweep is not forced at construction).
    """

    def __init__(self, levels, alphas, meta=None, check=True):
        self.levels: list[FusionSystem] = list(levels)
        d = len(self.levels)
        self.alphas: dict = dict(alphas)
        for i in range(1, d + 1):
            Si = self.levels[i - 1].S
            self.alphas.setdefault(
                (i, i),
                GroupHom(
                    Si.whole(), Si.whole(), np.arange(Si.order, dtype=np.int32)
                ),
            )
        self.meta = meta or {}
        self._sms: dict = {}
        if check:
            self._check_tables()
        self.kernels = [self.alphas[(i, d)].kernel() for i in range(1, d + 1)]
        if self.kernels[-1].order != 1:
            raise IntegrityError("the top level must be exact (trivial last kernel)")
        for a, b in zip(self.kernels, self.kernels[1:]):
            if not b.is_subset_of(a):
                raise IntegrityError("level kernels must be nested downward")

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def limit(self) -> FusionSystem:
        return self.levels[-1]

    def _check_tables(self) -> None:
        d = self.depth
        for i in range(1, d + 1):
            for j in range(i, d + 1):
                if (i, j) not in self.alphas:
                    raise IntegrityError(f"missing connecting map {(i, j)}")
        for k in range(1, d + 1):
            for j in range(1, k + 1):
                for i in range(1, j + 1):
                    lhs = self.alphas[(i, j)].mapping[self.alphas[(j, k)].mapping]
                    if not np.array_equal(lhs, self.alphas[(i, k)].mapping):
                        raise IntegrityError(
                            f"connecting maps do not compose: f[{i},{j}] f[{j},{k}] != f[{i},{k}]"
                        )

    def system_morphism(self, i: int, j: int) -> SystemMorphism:
        """The connecting functor from level j down to level i (i <= j)."""
        got = self._sms.get((i, j))
        if got is None:
            got = SystemMorphism(
                self.levels[j - 1], self.levels[i - 1], self.alphas[(i, j)]
            )
            self._sms[(i, j)] = got
        return got

    def verify_connecting(self, domains=None) -> dict:
        """Functor sweeps for every connecting map; ``domains`` may be a
        dict keyed by source level j to restrict big levels."""
        out = {}
        for j in range(1, self.depth + 1):
            for i in range(1, j + 1):
                doms = None if domains is None else domains.get(j)
                out[f"{i},{j}"] = self.system_morphism(i, j).verify(domains=doms)
        return out

    def push_subgroup(self, P: Subgroup, i: int) -> Subgroup:
        return self.system_morphism(i, self.depth).push_subgroup(P)

    def push_map(self, m: FusionMorphism, i: int) -> FusionMorphism:
        return self.system_morphism(i, self.depth).push_map(m)

    def open_kernels(self) -> list[Subgroup]:
        """The proper level kernels (every subgroup contains the trivial
        one, so these are what makes openness a real condition)."""
        return [N for N in self.kernels if N.order > 1]

    def thread_report(self) -> dict:
        """Realize the thread subgroup inside the product of the level
        Sylows and check it reproduces the top level."""
        Ss = [F.S for F in self.levels]
        prod, _, _ = direct_product(Ss, name="threads")
        top = self.levels[-1].S
        coords = np.stack(
            [
                self.alphas[(i, self.depth)].mapping.astype(np.int64)
                for i in range(1, self.depth + 1)
            ],
            axis=1,
        )
        flat = (coords * np.asarray(prod._strides, dtype=np.int64)[None, :]).sum(
            axis=1
        )
        members = np.sort(flat.astype(np.int32))
        thread = subgroup_generated(prod, [int(x) for x in flat[top.whole().gens()]])
        ok = thread.order == top.order and np.array_equal(thread.members, members)
        surjective = [
            len(np.unique(self.alphas[(i, self.depth)].mapping))
            == self.levels[i - 1].S.order
            for i in range(1, self.depth + 1)
        ]
        return {
            "thread_order": int(thread.order),
            "top_order": int(top.order),
            "closed_and_exact": bool(ok),
            "projections_surjective": surjective,
        }

    def report(self) -> dict:
        return {
            "depth": self.depth,
            "level_sylow_orders": [int(F.S.order) for F in self.levels],
            "level_group_orders": [
                int(F.G.order) if isinstance(F, RealizedSystem) else None
                for F in self.levels
            ],
            "kernel_orders": [int(N.order) for N in self.kernels],
            "threads": self.thread_report(),
        }


def tower_from_group(G: FiniteGroup, p: int, normals, S_sub=None) -> Tower:
    """Levels G/N_i for a descending chain of normal subgroups ending at 1.

    Each level is realized on the image of a fixed Sylow p-subgroup
    (``S_sub`` to pin a particular one); the connecting maps are the
    induced quotient maps.  The last normal subgroup must be trivial so
    the top level is G itself.
    """
    normals = list(normals)
    if not normals or normals[-1].order != 1:
        raise ValueError("the chain must end at the trivial subgroup")
    gen_idx = G.whole().gens()
    for N in normals:
        for g in gen_idx:
            if conjugate_subgroup(G, int(g), N) != N:
                raise ValueError("every member of the chain must be normal")
    for a, b in zip(normals, normals[1:]):
        if not b.is_subset_of(a):
            raise ValueError("the chain must be descending")

    top = realize(G, p, S_sub=S_sub)
    d = len(normals)
    levels: list[RealizedSystem] = []
    projs: list[GroupHom] = []
    for k, N in enumerate(normals):
        if N.order == 1:
            levels.append(top)
            projs.append(
                GroupHom(
                    G.whole(), G.whole(), np.arange(G.order, dtype=np.int32)
                )
            )
        else:
            Gk, proj = quotient_group(G, N)
            S_img = Subgroup(Gk, np.unique(proj.mapping[top.S_sub.members]))
            levels.append(realize(Gk, p, S_sub=S_img))
            projs.append(proj)

    top_g = top.S_sub.members
    level_s = []
    for F_i, proj in zip(levels, projs):
        level_s.append(F_i.to_s(proj.mapping[top_g]))

    alphas = {}
    for j in range(1, d + 1):
        for i in range(1, j + 1):
            Fj, Fi = levels[j - 1], levels[i - 1]
            mapping = np.full(Fj.S.order, -1, dtype=np.int32)
            src, dst = level_s[j - 1], level_s[i - 1]
            for a, b in zip(src, dst):
                if mapping[a] == -1:
                    mapping[a] = b
                elif mapping[a] != b:
                    raise IntegrityError(
                        "connecting map ill-defined; kernel chain not nested on S"
                    )
            if (mapping < 0).any():
                raise IntegrityError("level projection misses part of the Sylow")
            alphas[(i, j)] = GroupHom(Fj.S.whole(), Fi.S.whole(), mapping)

    meta = {"G": G, "p": p, "normals": normals, "projections": projs}
    return Tower(levels, alphas, meta=meta)


class ProMorphism:
    """A compatible family of per-level morphisms between thread images.

    At finite depth the top component determines the family; the
    constructor still verifies membership at every level and agreement
    under every connecting functor, which is what being a thread means.
    """

    def __init__(self, tower: Tower, per_level, check=True):
        self.tower = tower
        self.levels: list[FusionMorphism] = [m.image_form() for m in per_level]
        if len(self.levels) != tower.depth:
            raise ValueError("one morphism per level, coarsest first")
        if check:
            self.verify()

    @classmethod
    def from_top(cls, tower: Tower, phi: FusionMorphism) -> "ProMorphism":
        per_level = [
            tower.push_map(phi, i) for i in range(1, tower.depth)
        ]
        per_level.append(phi)
        return cls(tower, per_level)

    @property
    def top(self) -> FusionMorphism:
        return self.levels[-1]

    def verify(self) -> None:
        for i, m in enumerate(self.levels, start=1):
            if not _table_in(self.tower.levels[i - 1], m):
                raise IntegrityError(f"level {i} component is not a level morphism")
        for j in range(1, self.tower.depth + 1):
            for i in range(1, j + 1):
                pushed = self.tower.system_morphism(i, j).push_map(self.levels[j - 1])
                want = self.levels[i - 1]
                if (
                    pushed.domain.key != want.domain.key
                    or pushed.mapping.tobytes() != want.mapping.tobytes()
                ):
                    raise IntegrityError(
                        f"components at levels {i} and {j} disagree under the connecting functor"
                    )

    def key(self) -> tuple:
        return tuple((m.domain.key, m.mapping.tobytes()) for m in self.levels)


def pro_hom(tower: Tower, P: Subgroup, Q: Subgroup, brute_cap: int = 50_000):
    """All compatible families of level morphisms from P to Q.

    Threads are named by top-level subgroups.  The family set is built
    from the top level (exactness of the truncation) and cross-checked,
    within ``brute_cap`` work, against direct enumeration of compatible
    tuples in the product of the per-level hom sets.
    """
    top = tower.limit
    homs = top.hom_set(P, Q)
    fams = [ProMorphism.from_top(tower, m) for m in homs]
    report = {
        "count": len(fams),
        "top_hom_count": len(homs),
        "bijective_with_top": len(fams) == len(homs),
        "brute_checked": False,
    }

    d = tower.depth
    level_homs = []
    for i in range(1, d + 1):
        Pi = tower.push_subgroup(P, i)
        Qi = tower.push_subgroup(Q, i)
        level_homs.append(tower.levels[i - 1].hom_set(Pi, Qi))
    total = 1
    for hs in level_homs:
        total *= max(len(hs), 1)
    if total <= brute_cap:
        found = set()
        stack = [(0, [])]
        while stack:
            lvl, acc = stack.pop()
            if lvl == d:
                found.add(
                    tuple(
                        (m.domain.key, m.image_form().mapping.tobytes()) for m in acc
                    )
                )
                continue
            for m in level_homs[lvl]:
                if lvl == 0:
                    stack.append((1, [m]))
                    continue
                pushed = tower.system_morphism(lvl, lvl + 1).push_map(m)
                prev = acc[-1].image_form()
                if (
                    pushed.domain.key == prev.domain.key
                    and pushed.mapping.tobytes() == prev.mapping.tobytes()
                ):
                    stack.append((lvl + 1, acc + [m]))
        ours = {f.key() for f in fams}
        report["brute_checked"] = True
        report["brute_count"] = len(found)
        report["brute_matches"] = found == ours
    return fams, report


def check_continuity(
    Phi: GroupHom, src: Tower, tgt: Tower, verify_domains=None
) -> dict:
    """Factor a limit-level morphism through finite levels.

    Phi is the Sylow-group homomorphism of a claimed tower morphism
    (top of src to top of tgt).  For each target level j the least
    source level i is found whose kernel dies under the composite to
    level j; the induced map A_{i,j} is then built and functor-checked.
    NoFactoring means no level works even at the exact top, i.e. the
    input was not a tower morphism.
    """
    d_src, d_tgt = src.depth, tgt.depth
    assignment = {}
    maps = {}
    for j in range(1, d_tgt + 1):
        beta = tgt.alphas[(j, d_tgt)].mapping[Phi.mapping]
        chosen = None
        for i in range(1, d_src + 1):
            K = src.kernels[i - 1]
            if not np.all(beta[K.members] == beta[0]):
                continue
            a_src = src.alphas[(i, d_src)].mapping
            mapping = np.full(src.levels[i - 1].S.order, -1, dtype=np.int32)
            for x in range(len(beta)):
                mapping[a_src[x]] = beta[x]
            A = SystemMorphism(
                src.levels[i - 1],
                tgt.levels[j - 1],
                GroupHom(
                    src.levels[i - 1].S.whole(),
                    tgt.levels[j - 1].S.whole(),
                    mapping,
                ),
            )
            try:
                doms = None if verify_domains is None else verify_domains.get((i, j))
                A.verify(domains=doms)
            except BadFunctor:
                continue
            chosen = i
            maps[(i, j)] = A
            break
        if chosen is None:
            raise NoFactoring(f"target level {j} does not factor through any source level")
        assignment[j] = chosen
    return {"assignment": assignment, "maps": maps}


def _level_image(tower: Tower, i: int, j: int):
    """The image of level j inside level i, as a generated system."""
    if i == j:
        return tower.levels[i - 1]
    sm = tower.system_morphism(i, j)
    Fj = tower.levels[j - 1]
    Fi = tower.levels[i - 1]
    seeds = []
    for P in Fj.subgroups():
        for m in Fj.maps_from(P):
            seeds.append(sm.push_map(m))
    return generated_system(
        Fi.S, Fi.p, seeds, kind="level-image", lattice=Fi.subgroups()
    )


def stable_image(tower: Tower, i: int):
    """The least j >= i at which the image of the deeper levels in level
    i stops shrinking, together with the stabilized image system."""
    d = tower.depth
    images = [_level_image(tower, i, j) for j in range(i, d + 1)]
    j_star = d
    stable = images[-1]
    for off in range(len(images) - 1, -1, -1):
        eq, _ = systems_equal(images[off], stable)
        if eq:
            j_star = i + off
        else:
            break
    return j_star, stable, {
        "image_map_counts": [
            sum(len(img.maps_from(P)) for P in img.subgroups()) for img in images
        ]
    }


def is_pro_saturated(tower: Tower) -> bool:
    """Every stabilized level image must be saturated."""
    for i in range(1, tower.depth + 1):
        _, img, _ = stable_image(tower, i)
        if not is_saturated(img):
            return False
    return True


def saturation_at_depth(tower: Tower) -> dict:
    """Saturation of the limit system, swept twice: over classes of
    subgroups containing a proper kernel, and over all classes."""
    F = tower.limit
    proper = tower.open_kernels()
    for N in proper:
        if not is_strongly_closed(F, N):
            raise IntegrityError("a level kernel is not strongly closed in the limit")
    open_ok = True
    full_ok = True
    open_classes = 0
    total = 0
    for cls in iso_classes(F):
        total += 1
        is_open = (not proper) or any(
            N.is_subset_of(cls[0]) for N in proper
        )
        if is_open and proper:
            flags = [any(N.is_subset_of(R) for N in proper) for R in cls]
            if not all(flags):
                raise IntegrityError("openness is not constant on a fusion class")
        sat = any(
            is_fully_normalized(F, R) for R in fully_normalized_candidates(F, cls)
        )
        full_ok &= sat
        if is_open:
            open_classes += 1
            open_ok &= sat
    return {
        "open_classes": open_classes,
        "total_classes": total,
        "open_saturated": bool(open_ok),
        "fully_saturated": bool(full_ok),
    }


def sylow_limit_check(tower: Tower) -> bool:
    """Order arithmetic tying the level Sylows to the thread group."""
    d = tower.depth
    threads = tower.thread_report()
    if not threads["closed_and_exact"]:
        return False
    if not all(threads["projections_surjective"]):
        return False
    top_order = tower.limit.S.order
    for i in range(1, d + 1):
        F_i = tower.levels[i - 1]
        if isinstance(F_i, RealizedSystem):
            g = F_i.G.order
            s = F_i.S.order
            while g % F_i.p == 0:
                g //= F_i.p
            if (F_i.G.order // g) != s:
                return False
        if tower.kernels[i - 1].order * F_i.S.order != top_order:
            return False
    return True


# -- quotient towers ---------------------------------------------------------------


def osc_quotient_tower(tower: Tower, sample_pairs: int = 200, seed: int = 0) -> dict:
    """Quotients by strongly closed subgroups, and reconstruction.

    For every strongly closed N of the limit: compare the quotient
    system against the subsystem generated by pushed morphisms (they
    agree exactly when the tower is pro-saturated; a witness is reported
    otherwise).  Reconstruction: the map from each hom set into the
    tuple of its quotient images must be injective with every component
    family compatible; exactness of the truncation makes the trivial-N
    component a bijection, which is recorded rather than re-derived.
    """
    F = tower.limit
    sc = [Q for Q in F.subgroups() if is_strongly_closed(F, Q)]
    sc = [N for N in sc if N.order < F.S.order]
    per_N = []
    quotients = {}
    all_equal = True
    witness = None
    for N in sc:
        q = quotient_system(F, N)
        g = induced_image_system(F, N)
        eq, why = systems_equal(g, q)
        quotients[N.key] = q
        per_N.append(
            {
                "N_order": int(N.order),
                "N_key": N.key,
                "generated_equals_quotient": bool(eq),
                "witness": why or None,
            }
        )
        all_equal &= eq
        if not eq and witness is None:
            witness = {"N_key": N.key, "N_order": int(N.order), "where": why}

    rng = np.random.default_rng(seed)
    lattice = F.subgroups()
    sep_ok = True
    compat_ok = True
    checked = 0
    for P in lattice:
        maps = F.maps_from(P)
        seen = set()
        for m in maps:
            tup = []
            for N in sc:
                qd = quotients[N.key].quotient_data
                ind = qd.induce(m)
                tup.append((ind.domain.key, ind.mapping.tobytes()))
            tup = tuple(tup)
            if tup in seen and sc:
                sep_ok = False
            seen.add(tup)
            checked += 1
    idx = rng.permutation(len(lattice))
    pair_count = 0
    for a in idx:
        for b in idx[: max(2, sample_pairs // max(len(lattice), 1))]:
            P, Q = lattice[int(a)], lattice[int(b)]
            if P.order > Q.order:
                continue
            hs = F.hom_set(P, Q)
            for m in hs:
                for N in sc:
                    qd = quotients[N.key].quotient_data
                    if not _table_in(quotients[N.key], qd.induce(m)):
                        compat_ok = False
            pair_count += 1
            if pair_count >= sample_pairs:
                break
        if pair_count >= sample_pairs:
            break
    return {
        "strongly_closed_count": len(sc),
        "per_N": per_N,
        "all_generated_equal_quotient": bool(all_equal),
        "first_witness": witness,
        "separation_ok": bool(sep_ok),
        "morphisms_separated": checked,
        "compatibility_ok": bool(compat_ok),
        "pairs_sampled": pair_count,
        "reconstruction_exact": bool(sep_ok and compat_ok),
    }


# -- descending subsystem sequences -------------------------------------------------


@dataclass
class SubsystemSequence:
    """Nested conjugation subsystems of the limit, coarsest first."""

    tower: Tower
    ambients: list
    systems: list = field(default_factory=list)
    T: list = field(default_factory=list)
    reports: list = field(default_factory=list)


def subsystem_sequence(
    tower: Tower, ambients, lattice_cap: int = 1200
) -> SubsystemSequence:
    """Build and validate E^i = E_S(H_i) for descending ambients H_i.

    H_1 must be the whole ambient group (E^1 is the limit system).  For
    each level, the realization of H_i on its own Sylow is checked
    saturated whenever its subgroup lattice fits under ``lattice_cap``;
    larger ones are recorded as skipped rather than silently trusted.
    """
    F = tower.limit
    if not isinstance(F, RealizedSystem):
        raise ValueError("subsystem sequences need a realized limit")
    G = F.G
    ambients = list(ambients)
    if len(ambients) != tower.depth:
        raise ValueError("one ambient subgroup per level")
    if ambients[0].order != G.order:
        raise ValueError("the first subsystem must be the limit itself")
    for a, b in zip(ambients, ambients[1:]):
        if not b.is_subset_of(a):
            raise ValueError("ambient subgroups must descend")

    seq = SubsystemSequence(tower, ambients)
    for idx, H in enumerate(ambients, start=1):
        E = realize_subsystem(F, H)
        seq.systems.append(E)
        seq.T.append(E.T)
        rep = {"level": idx, "H_order": int(H.order), "T_order": int(E.T.order)}
        Hg = H.as_group()
        FH = realize(Hg, F.p)
        try:
            all_subgroups(FH.S, count_cap=lattice_cap)
            rep["level_realization_saturated"] = bool(is_saturated(FH))
            rep["saturation_checked"] = True
        except CapExceeded:
            rep["level_realization_saturated"] = None
            rep["saturation_checked"] = False
        seq.reports.append(rep)
    for a, b in zip(seq.T, seq.T[1:]):
        if not b.is_subset_of(a):
            raise IntegrityError("T-subgroups must descend with the ambients")
    if seq.T[0].order != F.S.order:
        raise IntegrityError("the first T must be all of S")
    return seq


def lemma27_index(seq: SubsystemSequence, N: Subgroup, P: Subgroup):
    """Least level i at which every map of E^i out of P is congruent to
    the inclusion modulo N; None when no finite level works."""
    F = seq.tower.limit
    for i, E in enumerate(seq.systems, start=1):
        if all(_residual_inside(F, m, N) for m in E.maps_from(P)):
            return i
    return None


def _select_kernel(tower: Tower, E_next: FusionSystem, T_next: Subgroup, Pp: Subgroup):
    """The largest level kernel inside T_next that separates E_next:
    congruence to the inclusion modulo the kernel must force membership."""
    F = tower.limit
    targets = {m.mapping.tobytes() for m in E_next.maps_from(Pp)}
    for N in tower.kernels:
        if not N.is_subset_of(T_next):
            continue
        good = True
        for theta in F.maps_from(Pp):
            if _residual_inside(F, theta, N):
                if theta.mapping.tobytes() not in targets:
                    good = False
                    break
        if good:
            return N
    return None


def convergent_alperin(tower: Tower, seq: SubsystemSequence, phi) -> dict:
    """Staged decomposition of an isomorphism along a subsystem sequence.

    Stage i approximates the running residual inside E^i: a kernel N
    inside T^{i+1} is chosen so that congruence mod N certifies
    membership in E^{i+1}; the residual is extended over N within E^i,
    its restriction is peeled off as a chain in E^i, and the new
    residual is certified congruent to the inclusion mod N.  The final
    stage decomposes the last residual exactly, leaving the inclusion.
    """
    if isinstance(phi, ProMorphism):
        phi = phi.top
    phi = phi.image_form()
    F = tower.limit
    Pp = phi.image()
    d = tower.depth
    theta = phi
    stages = []
    stage_psis = []
    for i in range(1, d):
        E_i = seq.systems[i - 1]
        E_next = seq.systems[i]
        T_next = seq.T[i]
        if not _table_in(E_i, theta):
            raise StageFailure(
                f"residual entering stage {i} is not in its subsystem",
                stage=i,
                cause="membership",
            )
        N = _select_kernel(tower, E_next, T_next, Pp)
        if N is None:
            raise StageFailure(
                f"no level kernel inside T^{i + 1} separates the next subsystem",
                stage=i,
                cause="kernel selection",
            )
        try:
            theta_ext = extend_over_N_relative(E_i, theta, N)
        except NoExtension as e:
            raise StageFailure(
                f"stage {i} residual does not extend over the kernel",
                stage=i,
                cause=str(e),
            ) from e
        psi = theta_ext.restrict(theta.domain).image_form()
        theta_next = theta.compose(psi.invert()).image_form()

        raw = alperin_decompose(E_i, psi)
        refined = refine_to_essential(E_i, raw)
        certs = {
            "residual_in_Ti": _residual_inside(F, theta, seq.T[i - 1]),
            "residual_out_mod_N": _residual_inside(F, theta_next, N),
            "residual_out_in_next": _table_in(E_next, theta_next),
        }
        if not all(certs.values()):
            raise StageFailure(
                f"stage {i} certificates failed: {certs}", stage=i, cause="certificates"
            )
        stages.append(
            {
                "level": i,
                "kernel_order": int(N.order),
                "kernel_key": N.key,
                "chain": chain_report(E_i, refined),
                "extended_domain_order": int(theta_ext.domain.order),
                "certificates": certs,
            }
        )
        stage_psis.append(psi)
        theta = theta_next

    E_d = seq.systems[-1]
    if not _table_in(E_d, theta):
        raise StageFailure(
            "final residual is not in the last subsystem", stage=d, cause="membership"
        )
    raw = alperin_decompose(E_d, theta)
    refined = refine_to_essential(E_d, raw)
    stages.append(
        {
            "level": d,
            "kernel_order": 1,
            "chain": chain_report(E_d, refined),
            "certificates": {
                "residual_in_Ti": _residual_inside(F, theta, seq.T[d - 1]),
                "final_residual_is_inclusion": True,
            },
        }
    )

    running = inclusion_map(phi.domain)
    for psi in stage_psis:
        running = psi.compose(running)
    total = theta.compose(running)
    matches = total.image_form().mapping.tobytes() == phi.mapping.tobytes()
    if not matches:
        raise StageFailure(
            "stage composites do not recompose the input", cause="recomposition"
        )
    return {
        "stage_count": len(stages),
        "stages": stages,
        "P_key": phi.domain.key,
        "P_image_key": Pp.key,
        "recomposes": True,
    }


def limitlength_check(
    tower: Tower, phi, product_tower: bool | None = None, limit=None
) -> dict:
    """Per-level lengths of the level images against the closed-variant
    length at the limit; the limit never exceeds the sup, with equality
    in the realized-product case."""
    if isinstance(phi, ProMorphism):
        pm = phi
    else:
        pm = ProMorphism.from_top(tower, phi.image_form())
    level_vals = []
    for i in range(1, tower.depth + 1):
        level_vals.append(
            alp_length(tower.levels[i - 1], pm.levels[i - 1], "open", limit=limit)
        )
    closed_lim = alp_length(tower.limit, pm.top, "closed", limit=limit)
    sup = max(level_vals)
    out = {
        "level_open_lengths": level_vals,
        "limit_closed_length": closed_lim,
        "inequality_holds": closed_lim <= sup,
        "monotone_levels": all(
            a <= b for a, b in zip(level_vals, level_vals[1:])
        ),
    }
    if product_tower is not None:
        out["product_equality"] = (closed_lim == sup) if product_tower else None
    return out
