"""Level up-probabilities of a system of independent coordinate chains.

Each coordinate is a birth-and-death chain on the nonnegative integers with
product-form stationary weights. The limiting probability that the sum (the
walk's norm) steps up from level ``n`` is the stationary flow ratio

    p_n = sum_v pi(v) U(v) / sum_v pi(v) (U(v) + D(v))

over all ``v`` with ``|v| = n``, where ``U`` and ``D`` are the total up and
down rates at ``v``. Two evaluation routes are provided: enumeration over the
level set, and convolution of per-coordinate weight sequences. They agree
exactly on rational input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .classifier import Extrapolation, extrapolate
from .lattice import Orthant, enumerate_level, level_cardinality
from .rates import CoordinateRates, UniformRates, WalkAxisRates
from .walks import Model, Number, WalkSpec

DEFAULT_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    def __init__(self, count: int, budget: int):
        self.count, self.budget = count, budget
        super().__init__(
            f"level set has {count} compositions, above the enumeration budget of {budget}; "
            "use the convolution route or Monte-Carlo estimation"
        )


@dataclass(frozen=True)
class CoordinateChainSpec:
    rates: CoordinateRates
    reflection_doubling: bool = False

    def up(self, m: int) -> Number:
        u = self.rates.up(m)
        return 2 * u if (m == 0 and self.reflection_doubling) else u

    def down(self, m: int) -> Number:
        return self.rates.down(m) if m > 0 else Fraction(0)

    def to_dict(self) -> dict:
        return {"rates": self.rates.to_dict(), "reflection_doubling": self.reflection_doubling}


def walk_coordinates(spec: WalkSpec) -> list[CoordinateChainSpec]:
    """Coordinate chains of the reflected version of ``spec``."""
    if spec.model is Model.MODEL1:
        return [CoordinateChainSpec(UniformRates(a), True) for a in spec.alpha]
    return [CoordinateChainSpec(WalkAxisRates(spec, i), True) for i in range(spec.d)]


def coord_stationary(spec: CoordinateChainSpec, truncation: int) -> list[Number]:
    """Unnormalised stationary weights ``pi(0..N)`` with ``pi(0) = 1``."""
    if truncation < 1:
        raise ValueError(f"truncation must be >= 1, got {truncation}")
    pi = [Fraction(1)]
    for j in range(1, truncation + 1):
        down = spec.down(j)
        if down == 0:
            raise ZeroDivisionError(f"down rate is zero at {j}")
        pi.append(pi[-1] * spec.up(j - 1) / down)
    return pi


@dataclass(frozen=True)
class LevelMeasureReport:
    level: int
    p: Number
    truncation: int
    compositions: int
    method: str

    @property
    def q(self) -> Number:
        return 1 - self.p


def _tables(specs, n_max):
    out = []
    for s in specs:
        pi = coord_stationary(s, max(n_max, 1))
        out.append((pi, [pi[m] * s.up(m) for m in range(n_max + 1)], [pi[m] * s.down(m) for m in range(n_max + 1)]))
    return out


def _convolve(a, b, n_max):
    out = []
    for n in range(n_max + 1):
        acc = 0
        for m in range(n + 1):
            acc += a[m] * b[n - m]
        out.append(acc)
    return out


def _flows_by_convolution(specs, n_max):
    """Per-level (up-flow, down-flow) sums for levels 0..n_max."""
    tabs = _tables(specs, n_max)
    d = len(specs)
    # prefix[i] = pi_0 * ... * pi_{i-1}, suffix[i] = pi_i * ... * pi_{d-1}
    one = [Fraction(1)] + [Fraction(0)] * n_max
    prefix = [one]
    for pi, _, _ in tabs:
        prefix.append(_convolve(prefix[-1], pi[: n_max + 1], n_max))
    suffix = [one]
    for pi, _, _ in reversed(tabs):
        suffix.append(_convolve(suffix[-1], pi[: n_max + 1], n_max))
    suffix.reverse()
    up = [Fraction(0)] * (n_max + 1)
    down = [Fraction(0)] * (n_max + 1)
    for i, (_, pu, pd) in enumerate(tabs):
        others = _convolve(prefix[i], suffix[i + 1], n_max)
        for n, (x, y) in enumerate(zip(_convolve(others, pu, n_max), _convolve(others, pd, n_max))):
            up[n] += x
            down[n] += y
    return up, down


def _check_specs(specs):
    if not specs:
        raise ValueError("need at least one coordinate")


def level_up_probabilities(
    specs: Sequence[CoordinateChainSpec], levels: Sequence[int]
) -> list[LevelMeasureReport]:
    """``p_n`` at each requested level via one shared convolution pass."""
    _check_specs(specs)
    if any(n < 1 for n in levels):
        raise ValueError("levels must be >= 1")
    n_max = max(levels)
    up, down = _flows_by_convolution(specs, n_max)
    d = len(specs)
    return [
        LevelMeasureReport(n, up[n] / (up[n] + down[n]), n_max, level_cardinality(d, n), "convolution")
        for n in levels
    ]


def level_up_probability(
    specs: Sequence[CoordinateChainSpec],
    n: int,
    method: str = "convolution",
    budget: int = DEFAULT_BUDGET,
) -> LevelMeasureReport:
    _check_specs(specs)
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    if method == "convolution":
        return level_up_probabilities(specs, [n])[0]
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    d = len(specs)
    count = level_cardinality(d, n)
    if count > budget:
        raise BudgetExceeded(count, budget)
    tabs = _tables(specs, n)
    num = den = Fraction(0)
    for v in enumerate_level(d, n, Orthant.NONNEGATIVE):
        w = math.prod((tabs[i][0][m] for i, m in enumerate(v)), start=Fraction(1))
        u = sum(specs[i].up(m) for i, m in enumerate(v))
        dn = sum(specs[i].down(m) for i, m in enumerate(v))
        num += w * u
        den += w * (u + dn)
    return LevelMeasureReport(n, num / den, n, count, "enumerate")


def stationary_ratio(specs: Sequence[CoordinateChainSpec], v1: Sequence[int], v2: Sequence[int]) -> Number:
    """``pi(v1) / pi(v2)`` under the product measure."""
    if len(v1) != len(specs) or len(v2) != len(specs):
        raise ValueError("points must match the number of coordinates")
    if any(x < 0 for x in list(v1) + list(v2)):
        raise ValueError("points must be nonnegative")
    top = max(list(v1) + list(v2) + [1])
    ratio = Fraction(1)
    for s, a, b in zip(specs, v1, v2):
        pi = coord_stationary(s, top)
        ratio *= pi[a] / pi[b]
    return ratio


@dataclass
class PnFit:
    z: float
    levels: list[int]
    z_n: list[float]
    extrapolation: Extrapolation


def log_odds(p: Number) -> float:
    """``log(p / (1 - p))`` via ``log1p`` of an exactly formed offset."""
    if not 0 < p < 1:
        raise ValueError(f"p must lie strictly inside (0, 1), got {p}")
    return math.log1p(float((2 * p - 1) / (1 - p)))


def fit_z_from_pn(sequence: Sequence[tuple[int, Number]]) -> PnFit:
    """Extrapolate ``n log(p_n / (1 - p_n))`` to its limit ``z``."""
    if len(sequence) < 8:
        raise ValueError(f"need at least 8 levels, got {len(sequence)}")
    ns = [n for n, _ in sequence]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("levels must be increasing")
    zs = [n * log_odds(p) for n, p in sequence]
    ex = extrapolate(ns, zs)
    return PnFit(ex.limit, ns, zs, ex)
