"""Pure numpy fallbacks for the table kernels in _core.pyx.

Both backends operate on a materialized multiplication table (int32, n x n)
over element indices.  Signatures and results must match _core exactly; the
test suite checks the two backends element for element.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def closure(table: np.ndarray, identity: int, seed: np.ndarray) -> np.ndarray:
    """Sorted member indices of the subgroup generated by `seed`."""
    mem = np.zeros(table.shape[0], dtype=bool)
    mem[identity] = True
    mem[seed] = True
    cur = np.flatnonzero(mem)
    while True:
        prods = table[np.ix_(cur, cur)]
        mem[prods.ravel()] = True
        new = np.flatnonzero(mem)
        if new.size == cur.size:
            return new.astype(np.int32)
        cur = new


def filter_conjugation(
    table: np.ndarray,
    inv: np.ndarray,
    candidates: np.ndarray,
    gens: np.ndarray,
    member_mask: np.ndarray,
) -> np.ndarray:
    """Candidates g with g x g^-1 inside the mask for every x in gens."""
    if candidates.size == 0 or gens.size == 0:
        return candidates.astype(np.int32, copy=True)
    gx = table[np.ix_(candidates, gens)]
    conj = table[gx, inv[candidates][:, None]]
    ok = member_mask[conj].all(axis=1)
    return candidates[ok].astype(np.int32)


def filter_centralizing(
    table: np.ndarray, candidates: np.ndarray, gens: np.ndarray
) -> np.ndarray:
    """Candidates g commuting with every x in gens."""
    if candidates.size == 0 or gens.size == 0:
        return candidates.astype(np.int32, copy=True)
    gx = table[np.ix_(candidates, gens)]
    xg = table[np.ix_(gens, candidates)]
    ok = (gx == xg.T).all(axis=1)
    return candidates[ok].astype(np.int32)


def conjugate_members(
    table: np.ndarray, inv: np.ndarray, g: int, members: np.ndarray
) -> np.ndarray:
    """Sorted member indices of g M g^-1."""
    out = table[table[g, members], inv[g]]
    out = np.sort(out)
    return out.astype(np.int32)


def element_orders(table: np.ndarray, identity: int) -> np.ndarray:
    """Order of every element, read off the left translation cycles."""
    n = table.shape[0]
    out = np.empty(n, dtype=np.int32)
    for g in range(n):
        c = table[g, identity]
        k = 1
        while c != identity:
            c = table[g, c]
            k += 1
        out[g] = k
    return out
