"""Birth and death rate sequences for one coordinate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
import numpy as np
from scipy.special import comb as fcomb

from .combinatorics import birth_rate, c0_weight, c_weight, death_rate
from .walks import Number, WalkSpec, as_number, axis_rates


class CoordinateRates:
    """Up rate ``up(n)`` for ``n >= 0`` and down rate ``down(n)`` (zero at ``n = 0``)."""

    kind = "abstract"

    def up(self, n: int) -> Number:
        raise NotImplementedError

    def down(self, n: int) -> Number:
        raise NotImplementedError

    def deviation(self, n: int) -> Number:
        """``up(n)/down(n) - 1`` formed before any logarithm is taken."""
        down = self.down(n)
        if down == 0:
            raise ZeroDivisionError(f"death rate is zero at level {n}")
        return (self.up(n) - down) / down

    def deviation_array(self, ns: np.ndarray) -> np.ndarray:
        return np.array([float(self.deviation(int(n))) for n in ns])

    def log_down_array(self, ns: np.ndarray) -> np.ndarray:
        return np.array([math.log(self.down(int(n))) for n in ns])

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class BDGamma(CoordinateRates):
    """The binomial-sum family BD(gamma, d)."""

    gamma: Fraction
    d: int
    kind = "bd_gamma"

    def __post_init__(self):
        object.__setattr__(self, "gamma", Fraction(self.gamma))
        if self.gamma <= 0 or self.d < 1:
            raise ValueError(f"BD(gamma, d) needs gamma > 0 and d >= 1, got ({self.gamma}, {self.d})")

    def up(self, n):
        return birth_rate(self.gamma, self.d, n)

    def down(self, n):
        return death_rate(self.gamma, self.d, n)

    def deviation(self, n):
        if n < 1:
            raise ZeroDivisionError("death rate is zero at level 0")
        return c0_weight(self.gamma, n, self.d) / c_weight(self.gamma, n, self.d)

    def _sums(self, ns):
        g = float(self.gamma)
        c = np.zeros(len(ns))
        c0 = np.zeros(len(ns))
        for i in range(1, self.d + 1):
            t = g**i * math.comb(self.d, i) * fcomb(ns - 1, i - 1)
            c += i * t
            c0 += g * (self.d - i) * t
        return c, c0

    def deviation_array(self, ns):
        c, c0 = self._sums(np.asarray(ns, dtype=float))
        return c0 / c

    def log_down_array(self, ns):
        c, _ = self._sums(np.asarray(ns, dtype=float))
        return np.log(c)

    def to_dict(self):
        return {"kind": self.kind, "gamma": str(self.gamma), "d": self.d}


@dataclass(frozen=True)
class RatioFamily(CoordinateRates):
    """``down(n) = n`` and ``up(n) = n + c``, so ``up/down = 1 + c/n``.

    Levels where ``n + c <= 0`` fall back to ``up(n) = n`` so every rate stays
    positive; ``up(0) = 1``.
    """

    c: Number
    kind = "ratio"

    def __post_init__(self):
        object.__setattr__(self, "c", as_number(self.c))

    def up(self, n):
        if n == 0:
            return Fraction(1)
        return n + self.c if n + self.c > 0 else Fraction(n)

    def down(self, n):
        return Fraction(n)

    def deviation(self, n):
        if n < 1:
            raise ZeroDivisionError("death rate is zero at level 0")
        return self.c / n if n + self.c > 0 else Fraction(0)

    def deviation_array(self, ns):
        ns = np.asarray(ns, dtype=float)
        c = float(self.c)
        return np.where(ns + c > 0, c / ns, 0.0)

    def log_down_array(self, ns):
        return np.log(np.asarray(ns, dtype=float))

    def to_dict(self):
        return {"kind": self.kind, "c": _num_out(self.c)}


@dataclass(frozen=True)
class UniformRates(CoordinateRates):
    """Constant rate ``alpha`` both ways: one axis of the symmetric walk."""

    alpha: Number
    kind = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_number(self.alpha))
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    def up(self, n):
        return self.alpha

    def down(self, n):
        return self.alpha if n > 0 else Fraction(0)

    def deviation_array(self, ns):
        return np.zeros(len(ns))

    def log_down_array(self, ns):
        return np.full(len(ns), math.log(self.alpha))

    def to_dict(self):
        return {"kind": self.kind, "alpha": _num_out(self.alpha)}


@dataclass(frozen=True)
class TableRates(CoordinateRates):
    """Finite rate lists; beyond the lists the tail values repeat forever.

    ``down[0]`` is ignored (treated as zero). The default tail repeats the last
    listed entry.
    """

    ups: tuple
    downs: tuple
    tail_up: Number = None
    tail_down: Number = None
    kind = "table"

    def __post_init__(self):
        ups = tuple(as_number(x) for x in self.ups)
        downs = tuple(as_number(x) for x in self.downs)
        if not ups or len(downs) < 2:
            raise ValueError("table needs at least one up rate and a down rate for level 1")
        object.__setattr__(self, "ups", ups)
        object.__setattr__(self, "downs", downs)
        object.__setattr__(self, "tail_up", ups[-1] if self.tail_up is None else as_number(self.tail_up))
        object.__setattr__(self, "tail_down", downs[-1] if self.tail_down is None else as_number(self.tail_down))
        if any(x <= 0 for x in ups) or any(x <= 0 for x in downs[1:]) or self.tail_up <= 0 or self.tail_down <= 0:
            raise ValueError("table rates must be strictly positive")

    def up(self, n):
        return self.ups[n] if n < len(self.ups) else self.tail_up

    def down(self, n):
        if n == 0:
            return Fraction(0)
        return self.downs[n] if n < len(self.downs) else self.tail_down

    def deviation_array(self, ns):
        ns = np.asarray(ns, dtype=np.int64)
        up = np.array([float(self.tail_up)] * len(ns))
        down = np.array([float(self.tail_down)] * len(ns))
        head = ns < max(len(self.ups), len(self.downs))
        for k in np.nonzero(head)[0]:
            up[k] = float(self.up(int(ns[k])))
            down[k] = float(self.down(int(ns[k])))
        return up / down - 1.0

    def log_down_array(self, ns):
        ns = np.asarray(ns, dtype=np.int64)
        out = np.full(len(ns), math.log(self.tail_down))
        for k in np.nonzero(ns < len(self.downs))[0]:
            out[k] = math.log(self.down(int(ns[k])))
        return out

    def to_dict(self):
        return {
            "kind": self.kind,
            "up": [_num_out(x) for x in self.ups],
            "down": [_num_out(x) for x in self.downs],
            "tail_up": _num_out(self.tail_up),
            "tail_down": _num_out(self.tail_down),
        }


@dataclass(frozen=True)
class WalkAxisRates(CoordinateRates):
    """Rates of axis ``axis`` of a walk, read on the nonnegative half-line."""

    spec: WalkSpec
    axis: int
    kind = "walk_axis"

    def up(self, n):
        return axis_rates(self.spec, self.axis, n)[0]

    def down(self, n):
        return axis_rates(self.spec, self.axis, n)[1] if n > 0 else Fraction(0)

    def to_dict(self):
        return {"kind": self.kind, "axis": self.axis}


def _num_out(x):
    return str(x) if isinstance(x, Fraction) else x


def rates_from_dict(doc: dict) -> CoordinateRates:
    kind = doc.get("kind")
    if kind == "bd_gamma":
        return BDGamma(Fraction(doc["gamma"]), int(doc["d"]))
    if kind == "ratio":
        return RatioFamily(doc["c"])
    if kind == "uniform":
        return UniformRates(doc["alpha"])
    if kind == "table":
        return TableRates(tuple(doc["up"]), tuple(doc["down"]), doc.get("tail_up"), doc.get("tail_down"))
    raise ValueError(f"unknown rates kind {kind!r}")


def float_rate_arrays(rates: CoordinateRates, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Float up/down rate arrays for values ``0..size-1`` (simulation input)."""
    if isinstance(rates, RatioFamily):
        n = np.arange(size, dtype=float)
        c = float(rates.c)
        up = np.where(n + c > 0, n + c, n)
        up[0] = 1.0
        return up, n.copy()
    if isinstance(rates, UniformRates):
        a = float(rates.alpha)
        down = np.full(size, a)
        down[0] = 0.0
        return np.full(size, a), down
    if isinstance(rates, BDGamma):
        n = np.arange(1, size, dtype=float)
        c, c0 = rates._sums(n)
        return np.concatenate([[1.0], c + c0]), np.concatenate([[0.0], c])
    if isinstance(rates, TableRates):
        head = max(len(rates.ups), len(rates.downs))
        up = np.full(size, float(rates.tail_up))
        down = np.full(size, float(rates.tail_down))
        for n in range(min(head, size)):
            up[n], down[n] = float(rates.up(n)), float(rates.down(n))
        return up, down
    up = np.array([float(rates.up(n)) for n in range(size)])
    down = np.array([float(rates.down(n)) for n in range(size)])
    return up, down
