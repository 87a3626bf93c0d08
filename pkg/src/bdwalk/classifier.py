"""Recurrence/transience of birth-and-death processes.

Two routes: the z-limit criterion, where ``(up_n/down_n)^n -> e^z`` and the
process is transient iff ``z > 1``; and the classical series test on the
partial sums of the rate-ratio products, used near ``z = 1`` and whenever the
z-criterion's hypotheses fail.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .rates import CoordinateRates

DEFAULT_MARGIN = 1e-2
BOUNDARY_TOL = 1e-6


def default_schedule(levels: int = 11, start: int = 1000) -> list[int]:
    return [start * 2**k for k in range(levels)]


class Verdict(str, enum.Enum):
    TRANSIENT = "transient"
    NULL_RECURRENT = "null_recurrent"
    POSITIVE_RECURRENT = "positive_recurrent"
    INCONCLUSIVE = "inconclusive"


def ratio_deviation(rates: CoordinateRates, n: int):
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    return rates.deviation(n)


@dataclass
class Extrapolation:
    limit: float
    coef: list[float]
    residual: float
    stability: float

    @property
    def converged(self) -> bool:
        return math.isfinite(self.limit) and self.stability < 1e-3


def extrapolate(ns: Sequence[float], values: Sequence[float], order: int = 2) -> Extrapolation:
    """Least-squares fit of ``values ~ L + a/n + b/n^2``; returns ``L``.

    ``stability`` is the change in ``L`` when the smallest level is dropped.
    """
    x = 1.0 / np.asarray(ns, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(x) < order + 2:
        raise ValueError(f"need at least {order + 2} points to extrapolate, got {len(x)}")

    def fit(xs, ys):
        A = np.vander(xs, order + 1, increasing=True)
        sol, *_ = np.linalg.lstsq(A, ys, rcond=None)
        return sol, ys - A @ sol

    sol, res = fit(x, y)
    keep = np.argsort(x)[:-1]
    sol2, _ = fit(x[keep], y[keep])
    return Extrapolation(
        limit=float(sol[0]),
        coef=[float(c) for c in sol[1:]],
        residual=float(np.sqrt(np.mean(res**2))),
        stability=float(abs(sol[0] - sol2[0])),
    )


@dataclass
class ZEstimate:
    z: float
    levels: list[int]
    z_n: list[float]
    deviations: list[float]
    residual: float
    stability: float
    converged: bool


def estimate_z(rates: CoordinateRates, schedule: Optional[Sequence[int]] = None) -> ZEstimate:
    """Limit of ``n * log1p(delta_n)`` by extrapolation over ``schedule``."""
    schedule = list(schedule or default_schedule())
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    if schedule[-1] < 10**4:
        raise ValueError(f"largest scheduled level must be >= 1e4, got {schedule[-1]}")
    devs = [rates.deviation(n) for n in schedule]
    fdevs = [float(x) for x in devs]
    if any(x <= -1 for x in fdevs):
        raise ValueError("up rate vanished on the schedule")
    zs = [n * math.log1p(x) for n, x in zip(schedule, fdevs)]
    tail = [abs(x) for x in fdevs[len(fdevs) // 2:]]
    if tail[-1] > 1e-2 or tail[-1] * schedule[-1] > 10 * max(1.0, tail[0] * schedule[len(fdevs) // 2]):
        # ratio not tending to 1 at rate 1/n: (up/down)^n diverges or vanishes
        z = math.copysign(math.inf, fdevs[-1]) if fdevs[-1] else 0.0
        return ZEstimate(z, schedule, zs, fdevs, math.nan, math.inf, False)
    ex = extrapolate(schedule, zs)
    return ZEstimate(ex.limit, schedule, zs, fdevs, ex.residual, ex.stability, ex.converged)


@dataclass
class SeriesDiagnostics:
    truncation: int
    log_s1: float
    log_s2: float
    birth_exponent: float
    birth_exponent_err: float
    death_exponent: float
    death_exponent_err: float
    s1_diverges: Optional[bool]
    s2_diverges: Optional[bool]

    @property
    def s1(self) -> float:
        return math.exp(self.log_s1) if self.log_s1 < 700 else math.inf

    @property
    def s2(self) -> float:
        return math.exp(self.log_s2) if self.log_s2 < 700 else math.inf


def _product_exponent(log_prod: np.ndarray) -> tuple[float, float]:
    """Exponent ``e`` of ``prod_n ~ n^e`` from doubling-block slopes, extrapolated in 1/n."""
    n_max = len(log_prod)
    # per-step rates over the last two doubling blocks: a power law halves them, a geometric product keeps them
    r1 = (log_prod[n_max // 2 - 1] - log_prod[n_max // 4 - 1]) / (n_max // 4)
    r2 = (log_prod[n_max - 1] - log_prod[n_max // 2 - 1]) / (n_max - n_max // 2)
    if abs(r2) > 1e-6 and r1 * r2 > 0 and r2 / r1 > 0.75:
        return math.copysign(math.inf, r2), 0.0
    ns, slopes = [], []
    n = n_max
    while n >= 64 and len(ns) < 12:
        slopes.append((log_prod[n - 1] - log_prod[n // 2 - 1]) / math.log(n / (n // 2)))
        ns.append(n)
        n //= 2
    ex = extrapolate(ns, slopes)
    return ex.limit, ex.stability + ex.residual


def _diverges(exponent: float, err: float) -> Optional[bool]:
    # sum of n^e diverges iff e >= -1; an exponent indistinguishable from -1 counts as divergent
    tol = max(BOUNDARY_TOL, 3 * err)
    gap = exponent + 1
    if gap > tol:
        return True
    if gap < -tol:
        return False
    return True if err <= BOUNDARY_TOL else None


def km_series(rates: CoordinateRates, truncation: int = 2**20) -> SeriesDiagnostics:
    """Partial sums ``S1 = sum prod up_{j-1}/down_j`` and ``S2 = sum prod down_j/up_j`` in log space."""
    if truncation < 1000:
        raise ValueError(f"truncation must be >= 1000, got {truncation}")
    ns = np.arange(1, truncation + 1, dtype=float)
    dev = rates.deviation_array(ns)
    if np.any(dev <= -1):
        raise ValueError("up rate vanished below the truncation level")
    log_ratio = np.log1p(dev)  # log(up_n / down_n)
    log_p2 = np.cumsum(-log_ratio)
    log_down = rates.log_down_array(ns)
    steps = np.empty(truncation)
    steps[0] = math.log(float(rates.up(0))) - log_down[0]
    steps[1:] = log_ratio[:-1] + log_down[:-1] - log_down[1:]
    log_p1 = np.cumsum(steps)
    e1, u1 = _product_exponent(log_p1)
    e2, u2 = _product_exponent(log_p2)
    return SeriesDiagnostics(
        truncation=truncation,
        log_s1=float(logsumexp(log_p1)),
        log_s2=float(logsumexp(log_p2)),
        birth_exponent=e1,
        birth_exponent_err=u1,
        death_exponent=e2,
        death_exponent_err=u2,
        s1_diverges=_diverges(e1, u1),
        s2_diverges=_diverges(e2, u2),
    )


@dataclass
class Classification:
    verdict: Verdict
    z: float
    z_estimate: ZEstimate
    birth_exceeds_death: bool
    ratio_tends_to_one: bool
    decided_by: str
    series: Optional[SeriesDiagnostics] = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["verdict"] = self.verdict.value
        return out


def _series_verdict(diag: SeriesDiagnostics) -> Verdict:
    if diag.s2_diverges is None or diag.s1_diverges is None:
        return Verdict.INCONCLUSIVE
    if not diag.s2_diverges:
        return Verdict.TRANSIENT
    return Verdict.NULL_RECURRENT if diag.s1_diverges else Verdict.POSITIVE_RECURRENT


def classify(
    rates: CoordinateRates,
    margin: float = DEFAULT_MARGIN,
    schedule: Optional[Sequence[int]] = None,
    truncation: int = 2**20,
) -> Classification:
    zest = estimate_z(rates, schedule)
    tail = zest.deviations[len(zest.deviations) // 2:]
    birth_exceeds = all(x > 0 for x in tail)
    to_one = zest.converged and abs(tail[-1]) < 1e-2
    notes = []
    if birth_exceeds and to_one:
        if zest.z > 1 + margin:
            return Classification(Verdict.TRANSIENT, zest.z, zest, True, True, "z-criterion")
        if zest.z < 1 - margin:
            return Classification(Verdict.NULL_RECURRENT, zest.z, zest, True, True, "z-criterion")
        notes.append(f"z within {margin} of 1; deferring to series test")
    else:
        notes.append("z-criterion hypotheses not met; using series test")
    diag = km_series(rates, truncation)
    verdict = _series_verdict(diag)
    if verdict is Verdict.INCONCLUSIVE:
        notes.append("series exponents indistinguishable from the boundary -1")
    return Classification(verdict, zest.z, zest, birth_exceeds, to_one, "series", diag, notes)
