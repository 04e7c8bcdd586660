"""The compiled extension and the pure-numpy fallback must be
interchangeable: same results on every kernel, element for element."""

import numpy as np
import pytest

from profusion._kernels import BACKEND, _pure
from profusion.catalog import dihedral8, gl3f2, sl2f3, symmetric
from profusion.group import direct_product, sylow_p

try:
    from profusion._kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled backend not built")


def _subjects():
    yield "D8", dihedral8()
    yield "S4", symmetric(4)
    yield "SL2F3", sl2f3()
    yield "GL3F2", gl3f2()
    yield "S4xSL2F3", direct_product([symmetric(4), sl2f3()])[0]


SUBJECTS = list(_subjects())


@needs_core
@pytest.mark.parametrize("name,G", SUBJECTS, ids=[s[0] for s in SUBJECTS])
def test_backends_agree(name, G):
    table, inv, n = G.table, G.inv, G.order
    syl = sylow_p(G, 2)
    mask = np.zeros(n, dtype=bool)
    mask[syl.members] = True
    cand = np.arange(n, dtype=np.int32)
    gens = syl.members[: max(2, len(syl.members) // 4)].astype(np.int32)
    g = int(cand[n // 3])

    calls = [
        lambda k: k.closure(table, 0, gens[:2]),
        lambda k: k.filter_conjugation(table, inv, cand, gens, mask),
        lambda k: k.filter_centralizing(table, cand, gens),
        lambda k: k.conjugate_members(table, inv, g, syl.members),
        lambda k: k.element_orders(table, 0),
    ]
    for call in calls:
        a = call(_pure)
        b = call(_core)
        assert np.array_equal(np.asarray(a), np.asarray(b))


@needs_core
def test_default_backend_is_compiled_unless_forced_pure():
    import os

    if os.environ.get("PROFUSION_PURE"):
        assert BACKEND == "pure"
    else:
        assert BACKEND == "compiled"


@needs_core
def test_closure_against_python_reference():
    G = symmetric(4)
    gens = np.array([1, 5], dtype=np.int32)
    got = set(int(x) for x in _core.closure(G.table, 0, gens))

    members = {0, 1, 5}
    changed = True
    while changed:
        changed = False
        for a in list(members):
            for b in list(members):
                c = int(G.table[a, b])
                if c not in members:
                    members.add(c)
                    changed = True
    assert got == members
