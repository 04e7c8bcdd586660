"""Fusion systems on a finite p-group S.

A system is an oracle for the morphism sets: all morphisms are stored in
"image form" (codomain equals the image, so every stored map is an iso
onto its image); hom_set(P, Q) re-targets them on the fly.  Two backends:

* RealizedSystem: morphisms are conjugations by a subgroup H of an
  ambient group G (H = G for the full system of G), computed by
  vectorized transporter scans and memoized per domain.
* MaterializedSystem: an explicit map table, produced by the generated
  closure, by quotients, or by hand for counterexamples.

Morphism tables are int32 arrays over S-group element indices, aligned
with domain.members.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from ._util import IntegrityError, p_part, short_hash
from .group import (
    FiniteGroup,
    GroupHom,
    Subgroup,
    all_subgroups,
    quotient_group,
    subgroup_generated,
    sylow_p,
)


class FusionMorphism:
    """An injective homomorphism between subgroups of the S-group."""

    __slots__ = ("domain", "codomain", "mapping", "_image", "_key")

    def __init__(self, domain: Subgroup, codomain: Subgroup, mapping, check=True):
        self.domain = domain
        self.codomain = codomain
        self.mapping = np.asarray(mapping, dtype=np.int32)
        self._image = None
        self._key = None
        if check:
            if self.mapping.shape != (domain.order,):
                raise ValueError("mapping must align with domain.members")
            if len(np.unique(self.mapping)) != domain.order:
                raise ValueError("fusion morphisms must be injective")
            if not np.all(codomain.contains(self.mapping)):
                raise ValueError("images must lie in the codomain")

    @property
    def key(self):
        if self._key is None:
            self._key = (self.domain.key, self.codomain.key, self.mapping.tobytes())
        return self._key

    def map_key(self):
        """Key ignoring the formal codomain (image form identity)."""
        return (self.domain.key, self.mapping.tobytes())

    def image(self) -> Subgroup:
        if self._image is None:
            self._image = Subgroup(self.domain.parent, np.sort(self.mapping))
        return self._image

    def is_iso(self) -> bool:
        return self.codomain.order == self.domain.order

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.mapping, self.domain.members)) and self.is_iso()

    def is_inclusion(self) -> bool:
        return bool(np.array_equal(self.mapping, self.domain.members))

    def of(self, idx: int) -> int:
        pos = self.domain.pos_of(np.asarray([idx], dtype=np.int32))[0]
        return int(self.mapping[pos])

    def of_many(self, idxs) -> np.ndarray:
        return self.mapping[self.domain.pos_of(np.asarray(idxs, dtype=np.int32))]

    def restrict(self, P: Subgroup) -> "FusionMorphism":
        """Restriction to P <= domain, in image form."""
        sub = self.of_many(P.members)
        img = Subgroup(self.domain.parent, np.sort(sub))
        return FusionMorphism(P, img, sub, check=False)

    def with_codomain(self, Q: Subgroup) -> "FusionMorphism":
        if not self.image().is_subset_of(Q):
            raise ValueError("image does not fit in the requested codomain")
        return FusionMorphism(self.domain, Q, self.mapping, check=False)

    def image_form(self) -> "FusionMorphism":
        if self.codomain.order == self.domain.order:
            return self
        return FusionMorphism(self.domain, self.image(), self.mapping, check=False)

    def compose(self, inner: "FusionMorphism") -> "FusionMorphism":
        """self after inner; inner's image must lie in self's domain."""
        mapped = self.of_many(inner.mapping)
        img = Subgroup(self.domain.parent, np.sort(mapped))
        return FusionMorphism(inner.domain, img, mapped, check=False)

    def invert(self) -> "FusionMorphism":
        if not self.is_iso():
            raise ValueError("only isos invert; pass the image form")
        img = self.image()
        inv_map = np.empty(self.domain.order, dtype=np.int32)
        inv_map[img.pos_of(self.mapping)] = self.domain.members
        return FusionMorphism(img, self.domain, inv_map, check=False)

    def __eq__(self, other):
        return isinstance(other, FusionMorphism) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        tag = "id" if self.is_identity() else "inc" if self.is_inclusion() else "map"
        return f"FusionMorphism({tag}, {self.domain.order}->{self.codomain.order})"


def inclusion_map(P: Subgroup, Q: Subgroup | None = None) -> FusionMorphism:
    return FusionMorphism(P, Q if Q is not None else P, P.members, check=False)


def conj_map(S_group: FiniteGroup, s: int, P: Subgroup) -> FusionMorphism:
    """c_s restricted to P, in image form (everything inside the S-group)."""
    mapped = S_group.conj_many(s, P.members)
    img = Subgroup(S_group, np.sort(mapped))
    return FusionMorphism(P, img, mapped, check=False)


class FusionSystem:
    """Shared machinery; subclasses provide maps_from (image-form isos)."""

    kind = "abstract"

    def __init__(self, S_group: FiniteGroup, p: int):
        self.S = S_group
        self.p = p
        if p_part(S_group.order, p) != S_group.order:
            raise ValueError("the base group of a fusion system must be a p-group")
        self.ambient: FusionSystem = self
        self.T: Subgroup = S_group.whole()
        self._maps: dict[str, tuple] = {}
        self._lattice = None
        self._children = None
        self._cyclic_orbit: dict[int, np.ndarray] = {}
        self.cache: dict = {}  # scratch memo space for derived analyses

    # -- subclass API ---------------------------------------------------------

    def _compute_maps(self, P: Subgroup) -> list[FusionMorphism]:
        raise NotImplementedError

    # -- morphism oracles ------------------------------------------------------

    def maps_from(self, P: Subgroup) -> tuple:
        """All morphisms with domain P in image form, sorted by table."""
        got = self._maps.get(P.key)
        if got is None:
            ms = self._compute_maps(P)
            got = tuple(sorted(ms, key=lambda m: m.mapping.tobytes()))
            self._maps[P.key] = got
        return got

    def hom_set(self, P: Subgroup, Q: Subgroup) -> tuple:
        """Hom(P, Q) with formal codomain Q, in canonical order."""
        out = [
            m.with_codomain(Q) for m in self.maps_from(P) if m.image().is_subset_of(Q)
        ]
        return tuple(out)

    def iso_set(self, P: Subgroup, Q: Subgroup) -> tuple:
        return tuple(m for m in self.maps_from(P) if m.image() == Q)

    def aut(self, Q: Subgroup) -> tuple:
        return self.iso_set(Q, Q)

    def contains(self, m: FusionMorphism) -> bool:
        if not m.image().is_subset_of(m.codomain):
            return False
        key = m.map_key()
        return any(x.map_key() == key for x in self.maps_from(m.domain))

    def iso_class(self, P: Subgroup) -> list[Subgroup]:
        """All subgroups isomorphic to P in the system, sorted by key."""
        seen = {P.key: P}
        for m in self.maps_from(P):
            img = m.image()
            seen.setdefault(img.key, img)
        return sorted(seen.values(), key=lambda s: s.key)

    def iso_witness(self, P: Subgroup, R: Subgroup) -> FusionMorphism:
        """The canonical iso P -> R (first in table order); KeyError if none."""
        for m in self.maps_from(P):
            if m.image() == R:
                return m
        raise KeyError("subgroups are not isomorphic in this system")

    def extensions(self, phi: FusionMorphism, A: Subgroup, B: Subgroup) -> tuple:
        """Morphisms A -> B restricting to phi on phi.domain."""
        pos = None
        out = []
        for m in self.maps_from(A):
            if not m.image().is_subset_of(B):
                continue
            if pos is None:
                pos = A.pos_of(phi.domain.members)
            if np.array_equal(m.mapping[pos], phi.mapping):
                out.append(m.with_codomain(B))
        return tuple(out)

    # -- the subgroup poset ------------------------------------------------------

    def subgroups(self, count_cap=None) -> list[Subgroup]:
        if self._lattice is None:
            self._lattice = all_subgroups(self.S, count_cap=count_cap)
        return self._lattice

    def maximal_subgroups(self, A: Subgroup) -> list[Subgroup]:
        """Index-p subgroups of A, via the cached lattice."""
        if self._children is None:
            self._children = {}
        got = self._children.get(A.key)
        if got is None:
            got = [
                X
                for X in self.subgroups()
                if X.order * self.p == A.order and X.is_subset_of(A)
            ]
            self._children[A.key] = got
        return got

    def overgroups(self, X: Subgroup) -> list[Subgroup]:
        """All Y with X <= Y <= S, by upward prime-coset extension (no lattice)."""
        from .group import coset_union, normalizer

        seen = {X.members.tobytes(): X}
        frontier = [X]
        while frontier:
            nxt = []
            for H in frontier:
                N = normalizer(self.S, H)
                outside = N.members[~H.contains(N.members).astype(bool)]
                for x in outside:
                    x = int(x)
                    xp = x
                    for _ in range(self.p - 1):
                        xp = self.S.mul(xp, x)
                    if not H.contains(xp):
                        continue
                    Y = coset_union(self.S, H, x, self.p)
                    b = Y.members.tobytes()
                    if b not in seen:
                        seen[b] = Y
                        nxt.append(Y)
            frontier = nxt
        return sorted(seen.values(), key=lambda s: (s.order, s.key))

    # -- elementwise fusion -------------------------------------------------------

    def element_orbit(self, x: int) -> np.ndarray:
        """All images of element x under morphisms of the system."""
        got = self._cyclic_orbit.get(x)
        if got is None:
            C = subgroup_generated(self.S, [x])
            pos = int(C.pos_of(np.asarray([x], dtype=np.int32))[0])
            vals = {int(x)}
            for m in self.maps_from(C):
                vals.add(int(m.mapping[pos]))
            got = np.array(sorted(vals), dtype=np.int32)
            for v in got:
                self._cyclic_orbit[int(v)] = got
        return got

    def sub(self, members) -> Subgroup:
        return self.S.subgroup(members)

    def describe(self) -> dict:
        return {"kind": self.kind, "p": self.p, "S_order": self.S.order, "S_key": self.S.key}


class RealizedSystem(FusionSystem):
    """Morphisms are conjugations c_h for h in a subgroup H of G."""

    def __init__(self, G: FiniteGroup, p: int, S_sub: Subgroup, H: Subgroup, ambient=None):
        self.G = G
        self.S_sub = S_sub
        self.H = H
        S_group = S_sub.as_group(name=f"Syl{p}({G.name})")
        super().__init__(S_group, p)
        self.kind = "realized" if H.order == G.order else "relative-realized"
        if ambient is not None:
            self.ambient = ambient
        # T = S meet H, in S-group indices
        inside = S_sub.members[H.contains(S_sub.members).astype(bool)]
        t_members = np.searchsorted(S_sub.members, inside)
        self.T = Subgroup(S_group, t_members.astype(np.int32))

    def to_g(self, s_idx) -> np.ndarray:
        return self.S_sub.members[np.asarray(s_idx, dtype=np.int32)]

    def to_s(self, g_idx) -> np.ndarray:
        arr = np.asarray(g_idx, dtype=np.int32)
        idx = np.searchsorted(self.S_sub.members, arr)
        got = self.S_sub.members[np.minimum(idx, self.S_sub.order - 1)]
        if not np.array_equal(got, arr):
            raise ValueError("element outside the Sylow subgroup")
        return idx.astype(np.int32)

    def _compute_maps(self, P: Subgroup) -> list[FusionMorphism]:
        if P.parent is not self.S:
            raise ValueError("domain must live in this system's S-group")
        if P.order == 1:
            return [inclusion_map(P)]
        G = self.G
        cand = self.H.members
        gens_g = self.to_g(P.gens())
        ok = np.ones(cand.size, dtype=bool)
        per_gen = []
        for xg in gens_g:
            conj = _conj_elem_by(G, cand, int(xg))
            inside = self.S_sub.contains(conj)
            ok &= inside
            per_gen.append(conj)
        kept = np.flatnonzero(ok)
        if kept.size == 0:
            return []
        sig = np.stack([c[kept] for c in per_gen], axis=1)
        _, first = np.unique(sig, axis=0, return_index=True)
        reps = cand[kept[np.sort(first)]]
        out = []
        pg = self.to_g(P.members)
        for h in reps:
            img_g = G.conj_many(int(h), pg)
            mapping = self.to_s(img_g)
            img = Subgroup(self.S, np.sort(mapping))
            out.append(FusionMorphism(P, img, mapping, check=False))
        return out

    def realizing_elements(self, m: FusionMorphism) -> np.ndarray:
        """All h in H with c_h restricted to m.domain equal to m (G indices)."""
        G = self.G
        cand = self.H.members
        gens_s = m.domain.gens()
        pos = m.domain.pos_of(gens_s)
        ok = np.ones(cand.size, dtype=bool)
        for gs, target in zip(gens_s, m.mapping[pos]):
            conj = _conj_elem_by(G, cand, int(self.to_g(int(gs))))
            ok &= conj == self.to_g(int(target))
        return cand[ok]

    def element_orbit(self, x: int) -> np.ndarray:
        """H-class of x intersected with S, by conjugation BFS over H's gens."""
        got = self._cyclic_orbit.get(x)
        if got is not None:
            return got
        G = self.G
        hgens = self.H.gens()
        start = int(self.to_g(np.asarray([x]))[0])
        seen = {start}
        frontier = np.array([start], dtype=np.int32)
        while frontier.size:
            nxt = []
            for h in hgens:
                conj = G.conj_many(int(h), frontier)
                for c in conj:
                    if int(c) not in seen:
                        seen.add(int(c))
                        nxt.append(int(c))
            frontier = np.array(nxt, dtype=np.int32)
        allc = np.array(sorted(seen), dtype=np.int32)
        inside = allc[self.S_sub.contains(allc).astype(bool)]
        got = self.to_s(inside)
        for v in got:
            self._cyclic_orbit[int(v)] = got
        return got

    def describe(self) -> dict:
        d = super().describe()
        d.update({"G_order": self.G.order, "G_name": self.G.name, "H_order": self.H.order})
        return d


def _conj_elem_by(G: FiniteGroup, gs: np.ndarray, x: int) -> np.ndarray:
    """g x g^-1 for each g in gs."""
    if gs.size == G.order:
        return G.conj_by_all(x)
    xs = np.full(gs.size, x, dtype=np.int32)
    return G.mul_many(G.mul_many(gs, xs), G.inv[gs])


def realize(G: FiniteGroup, p: int, S_sub: Subgroup | None = None) -> RealizedSystem:
    """The fusion system of G on a Sylow p-subgroup."""
    if S_sub is None:
        S_sub = sylow_p(G, p)
    if S_sub.order != p_part(G.order, p):
        raise ValueError("S must be a Sylow p-subgroup of G")
    return RealizedSystem(G, p, S_sub, G.whole())


def realize_product(factors: list[RealizedSystem]) -> RealizedSystem:
    """The realized fusion system of a product group on the product Sylow.

    The ambient group is the direct product of the factors' groups and
    the Sylow subgroup is the direct product of the factors' Sylows, so
    subgroups and morphisms of the result project coordinatewise onto the
    factor systems.
    """
    from .group import direct_product

    Gp, _, _ = direct_product([F.G for F in factors])
    acc = np.zeros(1, dtype=np.int64)
    for F, stride in zip(factors, Gp._strides):
        gm = F.S_sub.members.astype(np.int64)
        acc = (acc[:, None] + int(stride) * gm[None, :]).ravel()
    S_sub = Subgroup(Gp, acc.astype(np.int32))
    return realize(Gp, factors[0].p, S_sub=S_sub)


def realize_subsystem(F: RealizedSystem, H: Subgroup) -> RealizedSystem:
    """The conjugation subsystem E_S(H) of a realized system, sharing F's S-group.

    The result's T is S meet H; whether it is an honest T-subsystem is
    decided by the checks in the subsystems module.
    """
    E = RealizedSystem.__new__(RealizedSystem)
    E.G = F.G
    E.S_sub = F.S_sub
    E.H = H
    FusionSystem.__init__(E, F.S, F.p)
    E.kind = "relative-realized"
    E.ambient = F
    inside = F.S_sub.members[H.contains(F.S_sub.members).astype(bool)]
    E.T = Subgroup(F.S, np.searchsorted(F.S_sub.members, inside).astype(np.int32))
    # share the subgroup lattice cache with the ambient system
    E._lattice = F._lattice
    return E


class MaterializedSystem(FusionSystem):
    """A fusion system given by explicit image-form map tables."""

    def __init__(self, S_group: FiniteGroup, p: int, by_domain: dict, kind="generated"):
        super().__init__(S_group, p)
        self.kind = kind
        self._by_domain = by_domain  # key -> dict[table bytes -> FusionMorphism]

    def _compute_maps(self, P: Subgroup) -> list[FusionMorphism]:
        got = self._by_domain.get(P.key)
        if got is None:
            raise KeyError("domain outside the materialized lattice")
        return list(got.values())


def generated_system(
    S_group: FiniteGroup, p: int, seeds, kind="generated", lattice=None
) -> MaterializedSystem:
    """The smallest fusion system on S containing the seeds.

    Worklist closure over image-form isos: inner conjugations are seeded,
    then restriction to maximal subgroups, inversion and exact-image
    composition are applied to a fixed point.  Restriction to maximal
    subgroups reaches every subgroup by induction down the lattice.
    """
    if lattice is None:
        lattice = all_subgroups(S_group)
    by_key = {L.key: L for L in lattice}
    # maximal subgroups of each lattice member
    p_ = p
    maximal: dict[str, list[Subgroup]] = {L.key: [] for L in lattice}
    for L in lattice:
        for M in lattice:
            if M.order * p_ == L.order and M.is_subset_of(L):
                maximal[L.key].append(M)

    by_domain: dict[str, dict[bytes, FusionMorphism]] = {L.key: {} for L in lattice}
    by_image: dict[str, list[FusionMorphism]] = {L.key: [] for L in lattice}
    queue: deque[FusionMorphism] = deque()

    whole = S_group.whole()
    for s in range(S_group.order):
        queue.append(conj_map(S_group, s, whole))
    for m in seeds:
        queue.append(m.image_form())

    while queue:
        m = queue.popleft()
        dk = m.domain.key
        b = m.mapping.tobytes()
        if dk not in by_domain:
            raise KeyError("seed domain outside the lattice")
        if b in by_domain[dk]:
            continue
        by_domain[dk][b] = m
        ik = m.image().key
        by_image[ik].append(m)
        queue.append(m.invert())
        for M in maximal[dk]:
            queue.append(m.restrict(M))
        for m2 in by_domain[ik].values():
            queue.append(m2.compose(m))
        for m0 in by_image[dk]:
            queue.append(m.compose(m0))
    sys = MaterializedSystem(S_group, p, by_domain, kind=kind)
    sys._lattice = lattice
    return sys


def is_strongly_closed(F: FusionSystem, Q: Subgroup) -> bool:
    """No morphism moves an element of Q outside Q."""
    for x in Q.members:
        orbit = F.element_orbit(int(x))
        if not np.all(Q.contains(orbit)):
            return False
    return True


def strongly_closed_subgroups(F: FusionSystem) -> list[Subgroup]:
    return [Q for Q in F.subgroups() if is_strongly_closed(F, Q)]


def product_subgroup(S_group: FiniteGroup, A: Subgroup, B: Subgroup) -> Subgroup:
    """The set AB as a subgroup (valid when one factor normalizes the other)."""
    prods = S_group.mul_many(
        np.repeat(A.members, B.order), np.tile(B.members, A.order)
    )
    mem = np.unique(prods)
    if (A.order * B.order) % mem.size:
        raise IntegrityError("AB is not a subgroup here")
    return Subgroup(S_group, mem)


class NoExtension(RuntimeError):
    """extend_over_N found no congruent extension."""


def extend_over_N(F: FusionSystem, phi: FusionMorphism, N: Subgroup) -> FusionMorphism:
    """A morphism PN -> QN inducing the same map as phi modulo N.

    N must be strongly closed.  Deterministic: the candidate with the
    lexicographically least table is returned.
    """
    S = F.S
    P, Q = phi.domain, phi.codomain
    PN = product_subgroup(S, P, N)
    QN = product_subgroup(S, Q, N)
    pos = PN.pos_of(P.members)
    hits = []
    for m in F.maps_from(PN):
        if not m.image().is_subset_of(QN):
            continue
        diff = S.mul_many(m.mapping[pos], S.inv[phi.mapping])
        if np.all(N.contains(diff)):
            hits.append(m.with_codomain(QN))
    if not hits:
        raise NoExtension(
            f"no extension over N (|N|={N.order}) for a map {P.order}->{Q.order}"
        )
    return hits[0]


# -- quotients ---------------------------------------------------------------------


class QuotientData:
    """Bookkeeping shared by quotient and induced-image constructions."""

    def __init__(self, F: FusionSystem, N: Subgroup):
        self.F = F
        self.N = N
        self.Sbar, self.proj = quotient_group(F.S, N, name=f"{F.S.name}/N")
        self.proj_map = self.proj.mapping  # S index -> Sbar index
        # minimal preimage per Sbar element
        first = np.full(self.Sbar.order, -1, dtype=np.int32)
        for u in range(F.S.order - 1, -1, -1):
            first[self.proj_map[u]] = u
        self.first_preimage = first

    def push_subgroup(self, P: Subgroup) -> Subgroup:
        return Subgroup(self.Sbar, np.unique(self.proj_map[P.members]))

    def pull_subgroup(self, Pbar: Subgroup) -> Subgroup:
        mask = np.zeros(self.Sbar.order, dtype=bool)
        mask[Pbar.members] = True
        return Subgroup(self.F.S, np.flatnonzero(mask[self.proj_map]).astype(np.int32))

    def induce(self, m: FusionMorphism) -> FusionMorphism:
        """The map P N/N -> (im m) N/N induced by m; injective since N is
        strongly closed."""
        dom = self.push_subgroup(m.domain)
        reps = self.first_preimage[dom.members]
        # each rep lies in PN; write it as u.n with u in P to evaluate
        # cheaper: rep projects equal to some member bar; evaluate via any
        # preimage inside P: find one by scanning P's members per coset
        pbar_of_members = self.proj_map[m.domain.members]
        mapping = np.empty(dom.order, dtype=np.int32)
        for i, vbar in enumerate(dom.members):
            j = int(np.flatnonzero(pbar_of_members == vbar)[0])
            mapping[i] = self.proj_map[m.mapping[j]]
        uniq = np.unique(mapping)
        if uniq.size != dom.order:
            raise IntegrityError("induced map failed to be injective; N not strongly closed?")
        return FusionMorphism(dom, Subgroup(self.Sbar, uniq), mapping, check=False)


def quotient_system(F: FusionSystem, N: Subgroup) -> MaterializedSystem:
    """F/N: morphisms between preimage pairs, pushed down to S/N."""
    if not is_strongly_closed(F, N):
        raise ValueError("quotient systems need a strongly closed N")
    qd = QuotientData(F, N)
    lattice_bar = all_subgroups(qd.Sbar)
    by_domain: dict[str, dict[bytes, FusionMorphism]] = {L.key: {} for L in lattice_bar}
    for Lbar in lattice_bar:
        A = qd.pull_subgroup(Lbar)
        for m in F.maps_from(A):
            ind = qd.induce(m)
            by_domain[ind.domain.key].setdefault(ind.mapping.tobytes(), ind)
    sys = MaterializedSystem(qd.Sbar, F.p, by_domain, kind="quotient")
    sys._lattice = lattice_bar
    sys.quotient_of = (F, N)
    sys.quotient_data = qd
    return sys


def induced_image_system(F: FusionSystem, N: Subgroup) -> MaterializedSystem:
    """The system generated on S/N by the images of all morphisms of F."""
    if not is_strongly_closed(F, N):
        raise ValueError("induced image systems need a strongly closed N")
    qd = QuotientData(F, N)
    lattice_bar = all_subgroups(qd.Sbar)
    seeds = []
    seen = set()
    for P in F.subgroups():
        for m in F.maps_from(P):
            ind = qd.induce(m)
            k = ind.map_key()
            if k not in seen:
                seen.add(k)
                seeds.append(ind)
    sys = generated_system(qd.Sbar, F.p, seeds, kind="induced-image", lattice=lattice_bar)
    sys.quotient_of = (F, N)
    sys.quotient_data = qd
    return sys


def systems_equal(F1: FusionSystem, F2: FusionSystem) -> tuple[bool, str]:
    """Hom-set equality over a shared S-group construction."""
    if F1.S.order != F2.S.order or not np.array_equal(
        np.asarray(F1.S.elements[np.arange(F1.S.order)]),
        np.asarray(F2.S.elements[np.arange(F2.S.order)]),
    ):
        return False, "different base groups"
    l1 = {L.key for L in F1.subgroups()}
    l2 = {L.key for L in F2.subgroups()}
    if l1 != l2:
        return False, "different subgroup lattices"
    for P in F1.subgroups():
        P2 = F2.S.subgroup(P.members)
        a = {m.mapping.tobytes() for m in F1.maps_from(P)}
        b = {m.mapping.tobytes() for m in F2.maps_from(P2)}
        if a != b:
            return False, f"hom sets differ from domain of order {P.order} (key {P.key[:8]})"
    return True, ""


def factorize(F: FusionSystem, m: FusionMorphism) -> tuple[FusionMorphism, FusionMorphism]:
    """Split a morphism as (iso onto image, inclusion into the codomain)."""
    iso = m.image_form()
    inc = inclusion_map(iso.image(), m.codomain)
    return iso, inc


# -- morphisms of systems -------------------------------------------------------------


class BadFunctor(RuntimeError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SystemMorphism:
    """A group map alpha: S1 -> S2 inducing a functor F1 -> F2.

    The functor witness is checked lazily on the domains it is asked
    about; verify() sweeps a full domain list and caches the table.
    """

    def __init__(self, F1: FusionSystem, F2: FusionSystem, alpha: GroupHom):
        self.F1 = F1
        self.F2 = F2
        self.alpha = alpha  # domain: F1.S.whole(), codomain: F2.S.whole()
        self._obj: dict[str, Subgroup] = {}
        self._checked: dict[str, bool] = {}
        self.verified_domains: list[str] = []

    def push_subgroup(self, P: Subgroup) -> Subgroup:
        got = self._obj.get(P.key)
        if got is None:
            got = Subgroup(self.F2.S, np.unique(self.alpha.of_many(P.members)))
            self._obj[P.key] = got
        return got

    def push_map(self, m: FusionMorphism) -> FusionMorphism:
        """alpha . m . alpha^-1 on alpha(dom m); BadFunctor if ill-defined."""
        P = m.domain
        aP = self.push_subgroup(P)
        a_of_P = self.alpha.of_many(P.members)
        a_of_mP = self.alpha.of_many(m.mapping)
        mapping = np.empty(aP.order, dtype=np.int32)
        seenv = {}
        for j in range(P.order):
            v = int(a_of_P[j])
            w = int(a_of_mP[j])
            if v in seenv:
                if seenv[v] != w:
                    raise BadFunctor("map does not descend along alpha", witness=m)
            else:
                seenv[v] = w
        for i, v in enumerate(aP.members):
            mapping[i] = seenv[int(v)]
        if len(set(mapping.tolist())) != aP.order:
            raise BadFunctor("induced map not injective", witness=m)
        img = Subgroup(self.F2.S, np.sort(mapping))
        return FusionMorphism(aP, img, mapping, check=False)

    def check_domain(self, P: Subgroup) -> None:
        """Verify functoriality on every morphism out of P."""
        if self._checked.get(P.key):
            return
        for m in self.F1.maps_from(P):
            pushed = self.push_map(m)
            if not self.F2.contains(pushed):
                raise BadFunctor(
                    "image morphism missing from the target system", witness=m
                )
        self._checked[P.key] = True
        self.verified_domains.append(P.key)

    def verify(self, domains=None) -> dict:
        """Sweep functoriality; returns a summary table."""
        if domains is None:
            domains = self.F1.subgroups()
        count = 0
        for P in domains:
            self.check_domain(P)
            count += len(self.F1.maps_from(P))
        return {
            "domains_checked": len(domains),
            "morphisms_checked": count,
            "full": domains is None or len(domains) == len(self.F1.subgroups()),
        }


def verify_system_morphism(F1, F2, alpha: GroupHom, domains=None):
    """Build and verify a SystemMorphism; raises BadFunctor with the first
    violating morphism in canonical order."""
    sm = SystemMorphism(F1, F2, alpha)
    sm.verify(domains=domains)
    return sm
