"""Points of Z^d and Z^d_+, the L1 norm, and level sets."""

from __future__ import annotations

import enum
import itertools
from math import comb
from typing import Iterator, Sequence

LatticePoint = tuple[int, ...]


class Orthant(enum.Enum):
    FULL = "full"
    NONNEGATIVE = "nonnegative"


def norm(p: Sequence[int]) -> int:
    return sum(abs(x) for x in p)


def zero_count(p: Sequence[int]) -> int:
    """Number of zero coordinates of ``p``."""
    return sum(1 for x in p if x == 0)


def _check(d: int, n: int) -> None:
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if n < 0:
        raise ValueError(f"level must be >= 0, got {n}")


def compositions(d: int, n: int) -> Iterator[LatticePoint]:
    """Weak compositions of ``n`` into ``d`` parts, lexicographically descending."""
    if d == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in compositions(d - 1, n - first):
            yield (first,) + rest


def enumerate_level(d: int, n: int, orthant: Orthant = Orthant.NONNEGATIVE) -> Iterator[LatticePoint]:
    """Yield every point of norm exactly ``n``.

    Order is canonical: nonnegative compositions in descending lexicographic
    order; in the full lattice each composition is expanded over the signs of
    its nonzero coordinates, ``+`` before ``-``, first coordinate slowest.
    """
    _check(d, n)
    for comp in compositions(d, n):
        if orthant is Orthant.NONNEGATIVE:
            yield comp
            continue
        nonzero = [i for i, x in enumerate(comp) if x]
        for signs in itertools.product((1, -1), repeat=len(nonzero)):
            point = list(comp)
            for i, s in zip(nonzero, signs):
                point[i] *= s
            yield tuple(point)


def level_cardinality(d: int, n: int, orthant: Orthant = Orthant.NONNEGATIVE) -> int:
    """Closed-form size of the level set, valid for ``n >= 1``."""
    _check(d, n)
    if n == 0:
        raise ValueError("closed form holds for n >= 1; level 0 is the single origin")
    weight = 1 if orthant is Orthant.NONNEGATIVE else 2
    return sum(weight**i * comb(d, i) * comb(n - 1, i - 1) for i in range(1, d + 1))
