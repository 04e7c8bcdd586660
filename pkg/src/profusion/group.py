"""Finite permutation groups with a canonical element enumeration.

Elements are stored as a lexicographically sorted (order, degree) image
array, so element index 0 is always the identity and indices are stable
across runs.  Groups built as direct products keep the factor structure
and do index arithmetic instead of materializing rows where possible.

Multiplication tables are materialized for orders up to TABLE_CAP; the
table kernels (compiled or pure, chosen at import in _kernels) run the
hot subgroup loops on them.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from ._util import CapExceeded, p_part, prime_factors, short_hash
from .perm import Permutation

ORDER_CAP = 50_000
TABLE_CAP = 4096
SUBGROUP_ORDER_CAP = 512


def _img_dtype(degree: int):
    return np.uint8 if degree <= 255 else np.uint16


class FiniteGroup:
    """A finite permutation group with lex-sorted element enumeration."""

    def __init__(self, degree, generators, elements, name="G", factors=None):
        self.degree = int(degree)
        self.generators = list(generators)
        self.elements = elements  # (order, degree), lex sorted rows
        self.order = int(elements.shape[0])
        self.name = name
        self.identity = 0  # the identity row is lex-minimal, see sort in builder
        self.factors = factors  # list[FiniteGroup] for direct products
        self._inv = None
        self._table = None
        self._index = None
        self._orders = None
        self._whole = None
        if factors is not None:
            sizes = [f.order for f in factors]
            self._strides = np.array(
                [int(np.prod(sizes[i + 1 :], dtype=np.int64)) for i in range(len(sizes))],
                dtype=np.int64,
            )
            self._deg_offsets = np.cumsum([0] + [f.degree for f in factors])
        key_src = (self.name, self.degree, self.order) + tuple(
            g.images for g in self.generators
        )
        self.key = short_hash(repr(key_src).encode())

    # -- canonical element access -------------------------------------------------

    def images_of(self, idx: int) -> np.ndarray:
        return self.elements[idx]

    def perm_of(self, idx: int) -> Permutation:
        return Permutation(self.elements[idx])

    @property
    def inv(self) -> np.ndarray:
        if self._inv is None:
            if self.factors is not None:
                parts = [f.inv[t] for f, t in zip(self.factors, self._split_all())]
                self._inv = self._combine(parts)
            else:
                self._inv = np.argsort(self.elements, axis=1).astype(np.int32)
                self._inv = self.index_of_rows(self._inv.astype(self.elements.dtype))
        return self._inv

    @property
    def table(self):
        """Full multiplication table, or None above TABLE_CAP."""
        if self._table is None and self.order <= TABLE_CAP:
            rows = np.repeat(np.arange(self.order, dtype=np.int32), self.order)
            cols = np.tile(np.arange(self.order, dtype=np.int32), self.order)
            self._table = self.mul_many(rows, cols).reshape(self.order, self.order)
        return self._table

    def element_order(self, idx: int) -> int:
        if self._orders is None:
            self._orders = np.array(
                [Permutation(row).order() for row in self.elements], dtype=np.int32
            )
        return int(self._orders[idx])

    # -- index arithmetic ---------------------------------------------------------

    def _split_all(self):
        """Per-factor index arrays for all elements (product groups only)."""
        idx = np.arange(self.order, dtype=np.int64)
        return self._split(idx)

    def _split(self, idx):
        out = []
        rem = np.asarray(idx, dtype=np.int64)
        for s, f in zip(self._strides, self.factors):
            out.append((rem // s).astype(np.int32))
            rem = rem % s
        return out

    def _combine(self, parts):
        acc = np.zeros(len(parts[0]), dtype=np.int64)
        for s, p in zip(self._strides, parts):
            acc += s * p.astype(np.int64)
        return acc.astype(np.int32)

    def index_of_rows(self, rows: np.ndarray) -> np.ndarray:
        """Element indices of image rows; raises KeyError on a foreign row."""
        rows = np.atleast_2d(rows)
        if self.factors is not None:
            parts = []
            for f, off in zip(self.factors, self._deg_offsets):
                block = rows[:, off : off + f.degree].astype(np.int64) - off
                if block.min(initial=0) < 0 or block.max(initial=0) >= f.degree:
                    raise KeyError("row is not an element of this product group")
                parts.append(f.index_of_rows(block.astype(f.elements.dtype)))
            return self._combine(parts)
        if self._index is None:
            self._index = {row.tobytes(): i for i, row in enumerate(self.elements)}
        try:
            return np.array(
                [self._index[r.tobytes()] for r in rows.astype(self.elements.dtype)],
                dtype=np.int32,
            )
        except KeyError:
            raise KeyError("row is not an element of this group") from None

    def index_of_perm(self, perm: Permutation) -> int:
        return int(self.index_of_rows(np.array([perm.images]))[0])

    # -- group operations ---------------------------------------------------------

    def mul_many(self, a, b) -> np.ndarray:
        """Elementwise product a[i] . b[i] (apply b first)."""
        a = np.atleast_1d(np.asarray(a, dtype=np.int32))
        b = np.atleast_1d(np.asarray(b, dtype=np.int32))
        if self._table is not None:
            return self._table[a, b]
        if self.factors is not None:
            pa, pb = self._split(a), self._split(b)
            return self._combine(
                [f.mul_many(x, y) for f, x, y in zip(self.factors, pa, pb)]
            )
        rows = np.take_along_axis(
            self.elements[a], self.elements[b].astype(np.int64), axis=1
        )
        return self.index_of_rows(rows)

    def mul(self, a: int, b: int) -> int:
        if self._table is not None:
            return int(self._table[a, b])
        return int(self.mul_many([a], [b])[0])

    def inv_of(self, a: int) -> int:
        return int(self.inv[a])

    def conj(self, g: int, x: int) -> int:
        return self.mul(self.mul(g, x), self.inv_of(g))

    def conj_many(self, g: int, xs) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=np.int32))
        gs = np.full(len(xs), g, dtype=np.int32)
        return self.mul_many(self.mul_many(gs, xs), np.full(len(xs), self.inv_of(g), dtype=np.int32))

    def conj_by_all(self, x: int) -> np.ndarray:
        """g x g^-1 for every g, as an (order,) index array."""
        if self._table is not None or self.table is not None:
            return self._table[self._table[:, x], self.inv]
        if self.factors is not None:
            parts = self._split(np.array([x], dtype=np.int64))
            per = [f.conj_by_all(int(p[0])) for f, p in zip(self.factors, parts)]
            grids = np.meshgrid(*per, indexing="ij")
            return self._combine([g.ravel() for g in grids])
        xrow = self.elements[x].astype(np.int64)
        inv_rows = self.elements[self.inv].astype(np.int64)
        mid = xrow[inv_rows]
        rows = np.take_along_axis(self.elements, mid, axis=1)
        return self.index_of_rows(rows)

    # -- subgroups ----------------------------------------------------------------

    def subgroup(self, members) -> "Subgroup":
        return Subgroup(self, np.asarray(sorted(set(int(m) for m in np.atleast_1d(members)))))

    def whole(self) -> "Subgroup":
        if self._whole is None:
            self._whole = Subgroup(self, np.arange(self.order, dtype=np.int32))
        return self._whole

    def trivial(self) -> "Subgroup":
        return Subgroup(self, np.array([self.identity], dtype=np.int32))

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order}, degree={self.degree})"


class Subgroup:
    """A subgroup given by its sorted member indices in a parent group."""

    __slots__ = ("parent", "members", "order", "key", "_mask", "_gens", "_pos")

    def __init__(self, parent: FiniteGroup, members: np.ndarray):
        self.parent = parent
        self.members = np.asarray(members, dtype=np.int32)
        if self.members.size == 0:
            raise ValueError("a subgroup needs at least the identity")
        # members must come sorted and unique; cheap to verify, catches many bugs
        if np.any(self.members[1:] <= self.members[:-1]):
            raise ValueError("member indices must be strictly increasing")
        if self.members[0] != parent.identity:
            raise ValueError("subgroups must contain the identity")
        if parent.order % self.members.size:
            raise ValueError("member count does not divide the group order")
        self.order = int(self.members.size)
        self.key = short_hash(parent.key.encode() + self.members.tobytes())
        self._mask = None
        self._gens = None
        self._pos = None

    def contains(self, idx) -> np.ndarray | bool:
        idx = np.asarray(idx, dtype=np.int32)
        pos = np.searchsorted(self.members, idx)
        pos = np.minimum(pos, self.order - 1)
        hit = self.members[pos] == idx
        return bool(hit) if hit.ndim == 0 else hit

    def pos_of(self, idx) -> np.ndarray:
        """Positions of element indices inside .members (must be members)."""
        pos = np.searchsorted(self.members, idx)
        if np.any(self.members[np.minimum(pos, self.order - 1)] != idx):
            raise KeyError("not a member")
        return pos

    def mask(self) -> np.ndarray:
        if self._mask is None:
            m = np.zeros(self.parent.order, dtype=np.uint8)
            m[self.members] = 1
            self._mask = m
        return self._mask

    def gens(self) -> np.ndarray:
        """A deterministic greedy generating set (element indices)."""
        if self._gens is None:
            chosen: list[int] = []
            cur = np.array([self.parent.identity], dtype=np.int32)
            for m in self.members:
                if cur.size == self.order:
                    break
                pos = np.searchsorted(cur, m)
                if pos < cur.size and cur[pos] == m:
                    continue
                chosen.append(int(m))
                cur = _closure_members(self.parent, np.array(chosen, dtype=np.int32))
            if cur.size != self.order or not np.array_equal(cur, self.members):
                raise ValueError("member set is not closed under the group operation")
            self._gens = np.array(chosen, dtype=np.int32)
        return self._gens

    def is_subset_of(self, other: "Subgroup") -> bool:
        if self.order > other.order or other.order % self.order:
            return False
        return bool(np.all(other.contains(self.members)))

    def as_group(self, name=None) -> FiniteGroup:
        """Promote to a standalone FiniteGroup sharing this parent's degree.

        Member rows are already lex sorted because parent indices are.
        """
        rows = _rows_of(self.parent, self.members)
        gens = [Permutation(self.parent.images_of(g)) for g in self.gens()]
        if not gens:
            gens = [Permutation.identity(self.parent.degree)]
        g = FiniteGroup(
            self.parent.degree,
            gens,
            rows,
            name=name or f"{self.parent.name}|{self.key[:6]}",
        )
        return g

    def __eq__(self, other):
        return (
            isinstance(other, Subgroup)
            and other.parent is self.parent
            and other.order == self.order
            and bool(np.all(other.members == self.members))
        )

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Subgroup(order={self.order}, key={self.key[:8]}, of {self.parent.name})"


class GroupHom:
    """A homomorphism between subgroups, as an image table over .domain.members."""

    __slots__ = ("domain", "codomain", "mapping", "injective")

    def __init__(self, domain: Subgroup, codomain: Subgroup, mapping, check=None):
        self.domain = domain
        self.codomain = codomain
        self.mapping = np.asarray(mapping, dtype=np.int32)
        if self.mapping.shape != (domain.order,):
            raise ValueError("mapping must align with domain.members")
        if not np.all(codomain.contains(self.mapping)):
            raise ValueError("images must lie in the codomain")
        self.injective = len(np.unique(self.mapping)) == domain.order
        if check is None:
            check = domain.order <= 2048
        if check:
            self._verify()

    def _verify(self):
        par = self.domain.parent
        n = self.domain.order
        a = np.repeat(self.domain.members, n)
        b = np.tile(self.domain.members, n)
        prod = self.domain.parent.mul_many(a, b)
        fa = np.repeat(self.mapping, n)
        fb = np.tile(self.mapping, n)
        cpar = self.codomain.parent
        want = cpar.mul_many(fa, fb)
        got = self.mapping[self.domain.pos_of(prod)]
        if not np.array_equal(want, got):
            raise ValueError("not a homomorphism")

    def of(self, idx: int) -> int:
        return int(self.mapping[self.domain.pos_of(np.asarray([idx], dtype=np.int32))[0]])

    def of_many(self, idxs) -> np.ndarray:
        return self.mapping[self.domain.pos_of(np.asarray(idxs, dtype=np.int32))]

    def image(self) -> Subgroup:
        return self.codomain.parent.subgroup(np.sort(np.unique(self.mapping)))

    def kernel(self) -> Subgroup:
        cid = self.codomain.parent.identity
        return self.domain.parent.subgroup(self.domain.members[self.mapping == cid])

    def compose(self, inner: "GroupHom") -> "GroupHom":
        """self after inner."""
        mapped = self.of_many(inner.mapping)
        return GroupHom(inner.domain, self.codomain, mapped, check=False)

    def __repr__(self):
        return (
            f"GroupHom({self.domain.order} -> {self.codomain.order},"
            f" inj={self.injective})"
        )


# -- construction ------------------------------------------------------------------


def group_from_generators(perms, name="G", order_cap=ORDER_CAP) -> FiniteGroup:
    """Enumerate the closure of the given permutations, lex-sort, wrap."""
    perms = [p if isinstance(p, Permutation) else Permutation(p) for p in perms]
    if not perms:
        raise ValueError("need at least one generator (use the identity)")
    degree = perms[0].degree
    if any(p.degree != degree for p in perms):
        raise ValueError("generators must share a degree")
    dt = _img_dtype(degree)
    gen_rows = np.array([p.images for p in perms], dtype=np.int64)
    seen = {np.arange(degree, dtype=dt).tobytes(): None}
    rows = [np.arange(degree, dtype=dt)]
    frontier = [np.arange(degree, dtype=dt)]
    while frontier:
        block = np.stack(frontier)
        frontier = []
        for g in gen_rows:
            prod = block[:, g].astype(dt)  # (x . g)(t) = x(g(t))
            for r in prod:
                b = r.tobytes()
                if b not in seen:
                    seen[b] = None
                    rows.append(r)
                    frontier.append(r)
        if order_cap is not None and len(rows) > order_cap:
            raise CapExceeded(
                f"group closure exceeded order cap {order_cap}; raise order_cap to allow"
            )
    el = np.stack(rows)
    order = np.lexsort(el.T[::-1])
    el = el[order]
    return FiniteGroup(degree, perms, el, name=name)


def direct_product(groups, name=None) -> tuple[FiniteGroup, list[GroupHom], list[GroupHom]]:
    """Direct product with coordinate embeddings and projections.

    Element index (i_1, ..., i_k) maps to sum(i_j * stride_j); this agrees
    with the lex order of concatenated image rows, so no sort is needed.
    Rows are materialized lazily via the factor structure.
    """
    groups = list(groups)
    degree = sum(g.degree for g in groups)
    order = 1
    for g in groups:
        order *= g.order
    dt = _img_dtype(degree)
    offs = np.cumsum([0] + [g.degree for g in groups])

    gens = []
    for gi, g in enumerate(groups):
        for p in g.generators:
            images = np.arange(degree, dtype=np.int64)
            images[offs[gi] : offs[gi] + g.degree] = np.asarray(p.images) + offs[gi]
            gens.append(Permutation(images))

    elements = _ProductRows(groups, offs, order, degree, dt)
    prod = FiniteGroup(degree, gens, elements, name=name or "x".join(g.name for g in groups), factors=groups)

    embeddings, projections = [], []
    for gi, g in enumerate(groups):
        stride = int(prod._strides[gi])
        emb_map = (np.arange(g.order, dtype=np.int64) * stride).astype(np.int32)
        embeddings.append(GroupHom(g.whole(), prod.whole(), emb_map, check=False))
        proj_map = prod._split_all()[gi]
        projections.append(GroupHom(prod.whole(), g.whole(), proj_map, check=False))
    return prod, embeddings, projections


class _ProductRows:
    """Lazy (order, degree) row array for direct products."""

    def __init__(self, groups, offs, order, degree, dtype):
        self.groups = groups
        self.offs = offs
        self.shape = (order, degree)
        self.dtype = dtype
        sizes = [g.order for g in groups]
        self.strides = [int(np.prod(sizes[i + 1 :], dtype=np.int64)) for i in range(len(sizes))]

    def __getitem__(self, idx):
        if isinstance(idx, tuple):  # row-and-column indexing not supported lazily
            return self._rows(np.atleast_1d(idx[0]))[(slice(None),) + idx[1:]]
        scalar = np.isscalar(idx) or (isinstance(idx, np.ndarray) and idx.ndim == 0)
        rows = self._rows(np.atleast_1d(np.asarray(idx, dtype=np.int64)))
        return rows[0] if scalar else rows

    def _rows(self, idx):
        out = np.empty((len(idx), self.shape[1]), dtype=self.dtype)
        rem = idx.astype(np.int64)
        for g, off, stride in zip(self.groups, self.offs, self.strides):
            part = rem // stride
            rem = rem % stride
            out[:, off : off + g.degree] = g.elements[part].astype(np.int64) + off
        return out

    def astype(self, dt):
        return self[np.arange(self.shape[0])].astype(dt)


def _rows_of(G: FiniteGroup, idxs: np.ndarray) -> np.ndarray:
    return np.asarray(G.elements[np.asarray(idxs, dtype=np.int64)])


# -- subgroup computations ----------------------------------------------------------


def _closure_members(G: FiniteGroup, seed: np.ndarray) -> np.ndarray:
    """Sorted member indices of <seed> inside G."""
    if G.order <= TABLE_CAP and G.table is not None:
        return K.closure(G.table, G.identity, np.asarray(seed, dtype=np.int32))
    # generator-multiplication BFS; vectorized batch per round
    seed = np.unique(np.append(np.asarray(seed, dtype=np.int32), G.identity))
    gens = np.unique(np.append(seed, G.inv[seed]))
    members = {int(G.identity)}
    frontier = np.array([G.identity], dtype=np.int32)
    while frontier.size:
        nxt = []
        for g in gens:
            prods = G.mul_many(frontier, np.full(frontier.size, g, dtype=np.int32))
            for pr in prods:
                if int(pr) not in members:
                    members.add(int(pr))
                    nxt.append(int(pr))
        frontier = np.array(nxt, dtype=np.int32)
    return np.array(sorted(members), dtype=np.int32)


def subgroup_generated(G: FiniteGroup, gens) -> Subgroup:
    gens = [G.index_of_perm(g) if isinstance(g, Permutation) else int(g) for g in np.atleast_1d(gens)]
    return Subgroup(G, _closure_members(G, np.array(gens, dtype=np.int32)))


def _filter_conjugating(G: FiniteGroup, candidates: np.ndarray, gens: np.ndarray, target: Subgroup) -> np.ndarray:
    """Candidates g with g x g^-1 in target for every x in gens."""
    if G.table is not None:
        return K.filter_conjugation(G.table, G.inv, candidates, gens, target.mask())
    keep = candidates
    full = candidates.size == G.order
    for x in gens:
        if keep.size == 0:
            break
        if full:
            conj = G.conj_by_all(int(x))[keep]
        else:
            ginv = G.inv[keep]
            conj = G.mul_many(G.mul_many(keep, np.full(keep.size, x, dtype=np.int32)), ginv)
        keep = keep[target.contains(conj)]
        full = False
    return keep


def normalizer(G: FiniteGroup, H: Subgroup, within: Subgroup | None = None) -> Subgroup:
    cand = within.members if within is not None else np.arange(G.order, dtype=np.int32)
    got = _filter_conjugating(G, cand, H.gens(), H)
    return Subgroup(G, got)


def centralizer(G: FiniteGroup, H: Subgroup, within: Subgroup | None = None) -> Subgroup:
    cand = within.members if within is not None else np.arange(G.order, dtype=np.int32)
    gens = H.gens()
    if G.table is not None:
        got = K.filter_centralizing(G.table, cand, gens)
        return Subgroup(G, got)
    keep = cand
    for x in gens:
        if keep.size == 0:
            break
        xs = np.full(keep.size, x, dtype=np.int32)
        keep = keep[G.mul_many(keep, xs) == G.mul_many(xs, keep)]
    return Subgroup(G, keep)


def transporter(G: FiniteGroup, P: Subgroup, Q: Subgroup, within: Subgroup | None = None) -> np.ndarray:
    """All g (indices) with g P g^-1 <= Q."""
    cand = within.members if within is not None else np.arange(G.order, dtype=np.int32)
    return _filter_conjugating(G, cand, P.gens(), Q)


def conjugate_subgroup(G: FiniteGroup, g: int, H: Subgroup) -> Subgroup:
    if G.table is not None:
        return Subgroup(G, K.conjugate_members(G.table, G.inv, int(g), H.members))
    return Subgroup(G, np.sort(G.conj_many(int(g), H.members)))


def coset_union(G: FiniteGroup, H: Subgroup, x: int, m: int) -> Subgroup:
    """<H, x> when x normalizes H and the coset xH has prime order m."""
    blocks = [H.members]
    cur = int(x)
    for _ in range(m - 1):
        blocks.append(G.mul_many(np.full(H.order, cur, dtype=np.int32), H.members))
        cur = G.mul(cur, int(x))
    return Subgroup(G, np.sort(np.concatenate(blocks)))


def sylow_p(G: FiniteGroup, p: int) -> Subgroup:
    """A Sylow p-subgroup, deterministic via the canonical element order.

    Grows a p-subgroup inside its normalizer: while P is not Sylow, some
    g in N_G(P) outside P has g^p in P, and <P, g> is a p-group of order
    p.|P|.  Termination: a proper p-subgroup never equals the p-part of
    its normalizer's order.
    """
    target = p_part(G.order, p)
    if target == 1:
        return G.trivial()
    if G.factors is not None:
        # Sylow of a product is the product of factor Sylows.
        parts = [sylow_p(f, p) for f in G.factors]
        grids = np.meshgrid(*[s.members for s in parts], indexing="ij")
        members = G._combine([g.ravel() for g in grids])
        return Subgroup(G, np.sort(members))

    # seed: maximal p-element, minimal index among those
    best, best_ord = G.identity, 1
    for i in range(G.order):
        o = p_part(G.element_order(i), p)
        if o > best_ord:
            best, best_ord = i, o
    seed = best
    # strip the non-p part so <seed> is a p-group
    rest = G.element_order(seed) // best_ord
    cur = seed
    for _ in range(rest - 1):
        cur = G.mul(cur, seed)
    seed = cur if rest > 1 else seed
    P = subgroup_generated(G, [seed])
    while P.order < target:
        N = normalizer(G, P)
        grown = False
        for g in N.members:
            if P.contains(int(g)):
                continue
            gp = int(g)
            for _ in range(p - 1):
                gp = G.mul(gp, int(g))
            if P.contains(gp):
                P = coset_union(G, P, int(g), p)
                grown = True
                break
        if not grown:
            raise AssertionError("sylow growth stalled; group data is inconsistent")
    return P


def is_p_group(G: FiniteGroup, p: int) -> bool:
    return p_part(G.order, p) == G.order


def _derived_series_reaches_trivial(G: FiniteGroup) -> bool:
    cur = G.whole()
    while True:
        comm = []
        mem = cur.members
        for a in mem:
            ia = G.inv_of(int(a))
            prods = G.mul_many(
                G.mul_many(np.full(mem.size, ia, dtype=np.int32), G.inv[mem]),
                G.mul_many(np.full(mem.size, a, dtype=np.int32), mem),
            )
            comm.extend(int(x) for x in prods)
        nxt = Subgroup(G, _closure_members(G, np.array(sorted(set(comm)), dtype=np.int32)))
        if nxt.order == cur.order:
            return cur.order == 1
        if nxt.order == 1:
            return True
        cur = nxt


def all_subgroups(G: FiniteGroup, order_cap=SUBGROUP_ORDER_CAP, count_cap=None) -> list[Subgroup]:
    """Every subgroup, by layered prime-coset extension.

    Each subgroup is reached along a composition series, adding one
    normalizing element of prime coset order at a time; this is complete
    for solvable groups (hence for all p-groups), which is checked.
    """
    if order_cap is not None and G.order > order_cap:
        raise CapExceeded(
            f"all_subgroups: order {G.order} above cap {order_cap}; raise order_cap to allow"
        )
    if len(prime_factors(G.order)) > 1 and not _derived_series_reaches_trivial(G):
        raise ValueError("all_subgroups requires a solvable group")
    if G.table is None:
        raise CapExceeded("all_subgroups needs a multiplication table (order <= TABLE_CAP)")

    primes = prime_factors(G.order)
    table = G.table
    seen: dict[bytes, Subgroup] = {}
    triv = G.trivial()
    seen[triv.members.tobytes()] = triv
    layer = [triv]
    while layer:
        nxt = []
        for H in layer:
            N = normalizer(G, H)
            outside = N.members[~H.contains(N.members).astype(bool)]
            for x in outside:
                x = int(x)
                # coset order = least m with x^m in H; extend only at primes
                m, cur = 1, x
                while not H.contains(cur):
                    cur = int(table[cur, x])
                    m += 1
                if m not in primes:
                    continue
                Kk = coset_union(G, H, x, m)
                b = Kk.members.tobytes()
                if b not in seen:
                    seen[b] = Kk
                    nxt.append(Kk)
                    if count_cap is not None and len(seen) > count_cap:
                        raise CapExceeded(
                            f"all_subgroups: more than {count_cap} subgroups; raise count_cap"
                        )
        layer = nxt
    return sorted(seen.values(), key=lambda s: (s.order, s.key))


def quotient_group(G: FiniteGroup, N: Subgroup, name=None) -> tuple[FiniteGroup, GroupHom]:
    """The quotient G/N as the coset permutation group, with the projection.

    Cosets are labeled by their minimal member and sorted by it; the
    quotient is rebuilt from generator images so its own element order is
    canonical.
    """
    if G.order > ORDER_CAP:
        raise CapExceeded("quotient_group: order above cap")
    # verify normality
    for gp in (G.index_of_perm(p) for p in G.generators):
        conj = G.conj_many(gp, N.members)
        if not np.all(N.contains(conj)):
            raise ValueError("N is not normal in G")
    n = G.order
    all_idx = np.arange(n, dtype=np.int32)
    # left cosets: coset_of[g] = min over h in N of g.h
    prods = G.mul_many(
        np.repeat(all_idx, N.order), np.tile(N.members, n)
    ).reshape(n, N.order)
    coset_rep = prods.min(axis=1)
    reps = np.unique(coset_rep)
    coset_id = {int(r): i for i, r in enumerate(reps)}
    m = len(reps)
    # generator action on cosets: g . (r N) = (g r) N
    qgens = []
    for p in G.generators:
        gp = G.index_of_perm(p)
        moved = G.mul_many(np.full(m, gp, dtype=np.int32), reps)
        qgens.append(Permutation([coset_id[int(coset_rep[mv])] for mv in moved]))
    Q = group_from_generators(qgens, name=name or f"{G.name}/{N.key[:6]}")
    if Q.order != G.order // N.order:
        raise AssertionError("quotient order mismatch; N was not normal?")
    # projection: g -> the coset permutation it induces
    rows = coset_rep[
        G.mul_many(np.repeat(all_idx, m), np.tile(reps, n)).reshape(n, m)
    ]
    lut = np.full(n, -1, dtype=np.int32)
    lut[reps] = np.arange(m, dtype=np.int32)
    proj_rows = lut[rows].astype(Q.elements.dtype)
    qidx = Q.index_of_rows(proj_rows)
    proj = GroupHom(G.whole(), Q.whole(), qidx, check=False)
    return Q, proj


# -- p-subgroup poset ----------------------------------------------------------------


class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[ri] = rj


def p_subgroups(G: FiniteGroup, p: int) -> list[Subgroup]:
    """All nontrivial p-subgroups: subgroups of one Sylow, closed under G-conjugacy."""
    S = sylow_p(G, p)
    if S.order == 1:
        return []
    base = all_subgroups(S.as_group())
    gidx = [G.index_of_perm(q) for q in G.generators]
    seen: dict[bytes, np.ndarray] = {}
    queue = []
    for H in base:
        if H.order == 1:
            continue
        mem = np.sort(S.members[H.members])  # lift into G indices
        b = mem.tobytes()
        if b not in seen:
            seen[b] = mem
            queue.append(mem)
    while queue:
        mem = queue.pop()
        for g in gidx:
            conj = np.sort(G.conj_many(g, mem))
            b = conj.tobytes()
            if b not in seen:
                seen[b] = conj
                queue.append(conj)
    subs = [Subgroup(G, mem) for mem in seen.values()]
    return sorted(subs, key=lambda s: (s.order, s.key))


def quillen_poset_connected(G: FiniteGroup, p: int, subs: list[Subgroup] | None = None) -> str:
    """Connectivity of the poset of nontrivial p-subgroups.

    Returns 'empty', 'connected' or 'disconnected'.  Comparability edges
    are found by bitmask inclusion tests and merged with union-find.
    """
    if subs is None:
        subs = p_subgroups(G, p)
    if not subs:
        return "empty"
    masks = []
    for s in subs:
        acc = 0
        for mbit in s.members:
            acc |= 1 << int(mbit)
        masks.append(acc)
    uf = UnionFind(len(subs))
    order = sorted(range(len(subs)), key=lambda i: subs[i].order)
    for ai in range(len(order)):
        i = order[ai]
        for bi in range(ai + 1, len(order)):
            j = order[bi]
            if subs[i].order == subs[j].order:
                continue
            if masks[i] & masks[j] == masks[i]:
                uf.union(i, j)
    root = uf.find(0)
    if all(uf.find(i) == root for i in range(len(subs))):
        return "connected"
    return "disconnected"
