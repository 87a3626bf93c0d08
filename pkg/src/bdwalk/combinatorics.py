"""Exact rational evaluation of the binomial-sum level weights and rates.

Everything here returns :class:`fractions.Fraction`. Inputs may be ints,
Fractions or ``"p/q"`` strings; floats are converted exactly.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Union

Rational = Union[int, Fraction, str]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


def _domain(gamma: Fraction, n: int, d: int, min_d: int = 1) -> None:
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if n < 1:
        raise ValueError(f"level n must be >= 1, got {n}")
    if d < min_d:
        raise ValueError(f"dimension d must be >= {min_d}, got {d}")


def _terms(gamma: Fraction, n: int, d: int):
    # (i, gamma^i * C(d,i) * C(n-1,i-1)) for the i nonzero components
    g = Fraction(1)
    for i in range(1, d + 1):
        g *= gamma
        yield i, g * comb(d, i) * comb(n - 1, i - 1)


def c_weight(gamma: Rational, n: int, d: int) -> Fraction:
    """Weighted count of nonzero components on level ``n``: sum_i i g^i C(d,i) C(n-1,i-1)."""
    gamma = as_fraction(gamma)
    _domain(gamma, n, d)
    return sum((i * t for i, t in _terms(gamma, n, d)), Fraction(0))


def c0_weight(gamma: Rational, n: int, d: int) -> Fraction:
    """Weighted count of zero components: g * sum_{i<d} (d-i) g^i C(d,i) C(n-1,i-1)."""
    gamma = as_fraction(gamma)
    _domain(gamma, n, d)
    return gamma * sum(((d - i) * t for i, t in _terms(gamma, n, d)), Fraction(0))


def death_rate(gamma: Rational, d: int, n: int) -> Fraction:
    gamma = as_fraction(gamma)
    if n == 0:
        return Fraction(0)
    return c_weight(gamma, n, d)


def birth_rate(gamma: Rational, d: int, n: int) -> Fraction:
    """Birth rate of BD(gamma, d); level 0 uses the convention ``lambda_0 = 1``."""
    gamma = as_fraction(gamma)
    if n == 0:
        return Fraction(1)
    return c_weight(gamma, n, d) + c0_weight(gamma, n, d)


def pn_uniform_k(n: int, d: int, k: Rational) -> Fraction:
    """Up-probability at level ``n`` when every axis carries the same ratio ``k``.

    Weights are taken at ``gamma = 2k``; ``k = 1`` is the symmetric walk.
    """
    k = as_fraction(k)
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if d < 2:
        raise ValueError(f"dimension d must be >= 2, got {d}")
    if n == 0:
        return Fraction(1)
    c = c_weight(2 * k, n, d)
    c0 = c0_weight(2 * k, n, d)
    return (c0 + c) / (c0 + 2 * c)


def pn_symmetric(n: int, d: int) -> Fraction:
    """Limiting probability that the norm of a symmetric walk steps up from level ``n``.

    >>> pn_symmetric(1, 2), pn_symmetric(1, 3)
    (Fraction(3, 4), Fraction(5, 6))
    """
    return pn_uniform_k(n, d, 1)


def pn_bounds(n: int, d: int, k_low: Rational, k_high: Rational) -> tuple[Fraction, Fraction]:
    k_low, k_high = as_fraction(k_low), as_fraction(k_high)
    if not 0 < k_low <= k_high:
        raise ValueError(f"need 0 < k_low <= k_high, got ({k_low}, {k_high})")
    return pn_uniform_k(n, d, k_low), pn_uniform_k(n, d, k_high)
