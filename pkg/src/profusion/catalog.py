"""Standard example groups used by the tests and the CLI demos.

Matrix groups are encoded as permutations of the nonzero column vectors
of the underlying space, so faithfulness is by construction.
"""

from __future__ import annotations

from .group import FiniteGroup, direct_product, group_from_generators
from .perm import Permutation


def f2_matrix_perm(rows) -> Permutation:
    """A 3x3 matrix over F2 acting on the 7 nonzero vectors.

    Vector (v0, v1, v2) is the integer v0 + 2 v1 + 4 v2; point = integer - 1.
    """
    images = []
    for point in range(7):
        v = point + 1
        bits = [(v >> k) & 1 for k in range(3)]
        w = [sum(rows[i][j] * bits[j] for j in range(3)) % 2 for i in range(3)]
        images.append(w[0] + 2 * w[1] + 4 * w[2] - 1)
    return Permutation(images)


def f3_matrix_perm(rows) -> Permutation:
    """A 2x2 matrix over F3 acting on the 8 nonzero vectors."""
    images = []
    for point in range(8):
        n = point + 1
        v = (n // 3, n % 3)
        w = [sum(rows[i][j] * v[j] for j in range(2)) % 3 for i in range(2)]
        images.append(w[0] * 3 + w[1] - 1)
    return Permutation(images)


# transvections and the coordinate 3-cycle of GL3(F2)
T12 = [[1, 1, 0], [0, 1, 0], [0, 0, 1]]
T13 = [[1, 0, 1], [0, 1, 0], [0, 0, 1]]
T23 = [[1, 0, 0], [0, 1, 1], [0, 0, 1]]
CYC3 = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]


def cyclic(n: int) -> FiniteGroup:
    return group_from_generators([Permutation.from_cycles([list(range(n))], n)], name=f"C{n}")


def dihedral8() -> FiniteGroup:
    r = Permutation.from_cycles([[0, 1, 2, 3]], 4)
    s = Permutation.from_cycles([[1, 3]], 4)
    return group_from_generators([r, s], name="D8")


def symmetric(n: int) -> FiniteGroup:
    gens = [Permutation.from_cycles([list(range(n))], n)]
    if n > 1:
        gens.append(Permutation.from_cycles([[0, 1]], n))
    return group_from_generators(gens, name=f"S{n}")


def alternating4() -> FiniteGroup:
    a = Permutation.from_cycles([[0, 1], [2, 3]], 4)
    b = Permutation.from_cycles([[0, 1, 2]], 4)
    return group_from_generators([a, b], name="A4")


def sl2f3() -> FiniteGroup:
    a = f3_matrix_perm([[1, 1], [0, 1]])
    b = f3_matrix_perm([[0, 2], [1, 0]])
    return group_from_generators([a, b], name="SL2F3")


def gl3f2() -> FiniteGroup:
    return group_from_generators(
        [f2_matrix_perm(T12), f2_matrix_perm(CYC3)], name="GL3F2"
    )


def gl3f2_squared() -> FiniteGroup:
    return direct_product([gl3f2(), gl3f2()], name="GL3F2^2")[0]


def spec_dict(G: FiniteGroup, prime: int) -> dict:
    """The JSON group-spec form of a catalog group."""
    return {
        "name": G.name,
        "degree": G.degree,
        "prime": prime,
        "generators": [p.cycles() for p in G.generators],
    }


BUILDERS = {
    "D8": lambda: (dihedral8(), 2),
    "S4": lambda: (symmetric(4), 2),
    "A4": lambda: (alternating4(), 2),
    "SL2F3": lambda: (sl2f3(), 3),
    "GL3F2": lambda: (gl3f2(), 2),
    "GL3F2^2": lambda: (gl3f2_squared(), 2),
}
