import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from profusion.perm import Permutation


def test_identity_fixes_everything():
    e = Permutation.identity(5)
    assert [e(i) for i in range(5)] == list(range(5))
    assert e.order() == 1
    assert e.cycles() == []


def test_from_cycles_roundtrip():
    p = Permutation.from_cycles([[0, 1], [2, 4, 3]], 5)
    assert p(0) == 1 and p(1) == 0
    assert p(2) == 4 and p(4) == 3 and p(3) == 2
    assert Permutation.from_cycles(p.cycles(), 5) == p


def test_from_cycles_rejects_repeats_and_range():
    with pytest.raises(ValueError):
        Permutation.from_cycles([[0, 1], [1, 2]], 4)
    with pytest.raises(ValueError):
        Permutation.from_cycles([[0, 9]], 4)


def test_composition_applies_right_factor_first():
    a = Permutation.from_cycles([[0, 1]], 3)
    b = Permutation.from_cycles([[1, 2]], 3)
    ab = a * b
    assert ab(0) == a(b(0))
    assert ab(1) == a(b(1))
    assert ab(2) == a(b(2))


def test_order_of_product_of_disjoint_cycles():
    p = Permutation.from_cycles([[0, 1], [2, 3, 4]], 5)
    assert p.order() == 6


perms = st.permutations(list(range(6))).map(Permutation)


@given(perms, perms, perms)
@settings(max_examples=60, deadline=None)
def test_associativity_and_inverse(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * a.inverse() == Permutation.identity(6)
    assert a.inverse().inverse() == a


@given(perms)
@settings(max_examples=60, deadline=None)
def test_cycle_decomposition_reconstructs(p):
    assert Permutation.from_cycles(p.cycles(), 6) == p
    n = p.order()
    q = p
    for _ in range(n - 1):
        q = q * p
    assert q == Permutation.identity(6)
