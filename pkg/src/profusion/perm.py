"""Permutations on {0, ..., degree-1} with cycle notation helpers."""

from __future__ import annotations

from math import lcm


class Permutation:
    """Immutable permutation, stored as the tuple of images."""

    __slots__ = ("images",)

    def __init__(self, images):
        images = tuple(int(i) for i in images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation of 0..{len(images) - 1}: {images}")
        object.__setattr__(self, "images", images)

    def __setattr__(self, name, value):
        raise AttributeError("Permutation is immutable")

    @property
    def degree(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(range(degree))

    @classmethod
    def from_cycles(cls, cycles, degree: int) -> "Permutation":
        """Build from 0-based disjoint cycles, e.g. [[0, 1], [2, 4, 3]]."""
        images = list(range(degree))
        seen = set()
        for cycle in cycles:
            cycle = [int(c) for c in cycle]
            for c in cycle:
                if not 0 <= c < degree:
                    raise ValueError(f"cycle point {c} out of range for degree {degree}")
                if c in seen:
                    raise ValueError(f"point {c} appears in two cycles")
                seen.add(c)
            for i, c in enumerate(cycle):
                images[c] = cycle[(i + 1) % len(cycle)]
        return cls(images)

    def cycles(self, include_fixed: bool = False) -> list[list[int]]:
        out = []
        seen = [False] * self.degree
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            nxt = self.images[start]
            while nxt != start:
                cyc.append(nxt)
                seen[nxt] = True
                nxt = self.images[nxt]
            if len(cyc) > 1 or include_fixed:
                out.append(cyc)
        return out

    def order(self) -> int:
        return lcm(*(len(c) for c in self.cycles()), 1)

    def __mul__(self, other: "Permutation") -> "Permutation":
        """Composition acting left first by convention of (self * other)(x) = self(other(x))."""
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        return Permutation(self.images[other.images[x]] for x in range(self.degree))

    def inverse(self) -> "Permutation":
        images = [0] * self.degree
        for i, im in enumerate(self.images):
            images[im] = i
        return Permutation(images)

    def __call__(self, point: int) -> int:
        return self.images[point]

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        cyc = self.cycles()
        if not cyc:
            return f"Permutation.identity({self.degree})"
        body = "".join("(" + " ".join(map(str, c)) + ")" for c in cyc)
        return f"Perm[{body}]"
