# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the table kernels in _pure.py.

Same contracts: int32 multiplication tables over element indices, sorted
int32 outputs.  The pure module is the reference implementation.
"""

import numpy as np

BACKEND = "compiled"


def closure(table, identity, seed):
    cdef int[:, :] t = table
    cdef int n = t.shape[0]
    cdef unsigned char[:] mask = np.zeros(n, dtype=np.uint8)
    cdef int[:] queue = np.empty(n, dtype=np.int32)
    cdef int count = 0, head = 0, x, j, p
    cdef int[:] seed_v = np.ascontiguousarray(seed, dtype=np.int32)

    mask[identity] = 1
    queue[count] = identity
    count += 1
    for j in range(seed_v.shape[0]):
        x = seed_v[j]
        if not mask[x]:
            mask[x] = 1
            queue[count] = x
            count += 1
    # Pair (a, b) is multiplied when the later-queued of the two is popped,
    # so every product gets formed even as the queue grows mid-loop.
    while head < count:
        x = queue[head]
        head += 1
        j = 0
        while j < count:
            p = t[x, queue[j]]
            if not mask[p]:
                mask[p] = 1
                queue[count] = p
                count += 1
            p = t[queue[j], x]
            if not mask[p]:
                mask[p] = 1
                queue[count] = p
                count += 1
            j += 1
    out = np.asarray(queue[:count]).copy()
    out.sort()
    return out


def filter_conjugation(table, inv, candidates, gens, member_mask):
    cdef int[:, :] t = table
    cdef int[:] inv_v = inv
    cdef int[:] cand = np.ascontiguousarray(candidates, dtype=np.int32)
    cdef int[:] gens_v = np.ascontiguousarray(gens, dtype=np.int32)
    cdef unsigned char[:] mask = member_mask
    cdef int m = cand.shape[0], k = gens_v.shape[0]
    cdef int[:] out = np.empty(m, dtype=np.int32)
    cdef int cnt = 0, i, j, g, gi, ok

    for i in range(m):
        g = cand[i]
        gi = inv_v[g]
        ok = 1
        for j in range(k):
            if not mask[t[t[g, gens_v[j]], gi]]:
                ok = 0
                break
        if ok:
            out[cnt] = g
            cnt += 1
    return np.asarray(out[:cnt]).copy()


def filter_centralizing(table, candidates, gens):
    cdef int[:, :] t = table
    cdef int[:] cand = np.ascontiguousarray(candidates, dtype=np.int32)
    cdef int[:] gens_v = np.ascontiguousarray(gens, dtype=np.int32)
    cdef int m = cand.shape[0], k = gens_v.shape[0]
    cdef int[:] out = np.empty(m, dtype=np.int32)
    cdef int cnt = 0, i, j, g, ok

    for i in range(m):
        g = cand[i]
        ok = 1
        for j in range(k):
            if t[g, gens_v[j]] != t[gens_v[j], g]:
                ok = 0
                break
        if ok:
            out[cnt] = g
            cnt += 1
    return np.asarray(out[:cnt]).copy()


def conjugate_members(table, inv, g, members):
    cdef int[:, :] t = table
    cdef int[:] inv_v = inv
    cdef int[:] mem = np.ascontiguousarray(members, dtype=np.int32)
    cdef int m = mem.shape[0], i, gi
    cdef int gg = g
    out_arr = np.empty(m, dtype=np.int32)
    cdef int[:] out = out_arr
    gi = inv_v[gg]
    for i in range(m):
        out[i] = t[t[gg, mem[i]], gi]
    out_arr.sort()
    return out_arr


def element_orders(table, identity):
    cdef int[:, :] t = table
    cdef int n = t.shape[0], g, c, k
    cdef int e = identity
    out_arr = np.empty(n, dtype=np.int32)
    cdef int[:] out = out_arr
    for g in range(n):
        c = t[g, e]
        k = 1
        while c != e:
            c = t[g, c]
            k += 1
        out[g] = k
    return out_arr
