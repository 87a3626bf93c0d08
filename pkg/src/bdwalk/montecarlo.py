"""Seeded simulation of walks and coordinate-chain systems.

Every replicate owns a counter-based Philox stream keyed by
``(seed, replicate index)``, so results do not depend on how replicates are
scheduled across threads. Walks run in discrete time; coordinate-chain systems
run as their embedded jump chain (the next event is picked with probability
proportional to its rate, holding times are never drawn).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba as nb
import numpy as np
from scipy.stats import norm as _normal

from .combinatorics import pn_bounds
from .levelchain import CoordinateChainSpec
from .rates import CoordinateRates, float_rate_arrays
from .walks import Model, WalkSpec, axis_rates, k_range, table_support, validate


@dataclass(frozen=True)
class SimConfig:
    steps: int
    walks: int = 1
    burn_in: Optional[int] = None
    n_max: int = 10
    seed: int = 0
    radius: int = 100
    checkpoints: tuple[int, ...] = ()
    threads: int = 1

    def __post_init__(self):
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.steps // 10)
        if not self.steps > self.burn_in >= 0:
            raise ValueError(f"need steps > burn_in >= 0, got steps={self.steps}, burn_in={self.burn_in}")
        if self.walks < 1 or self.n_max < 1:
            raise ValueError("walks and n_max must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if any(c < 1 or c > self.steps for c in self.checkpoints):
            raise ValueError("checkpoints must lie in [1, steps]")
        object.__setattr__(self, "checkpoints", tuple(sorted(self.checkpoints)))

    @property
    def horizons(self) -> tuple[int, ...]:
        return self.checkpoints or (self.steps,)


def replicate_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


@nb.njit(nogil=True, cache=True)
def _run(up_tab, down_tab, offset, reflected, jump_chain, u, state, burn_in, n_max,
         horizons, ups, downs, returns_at, interior, path):
    d = state.shape[0]
    width = up_tab.shape[1]
    level = 0
    for i in range(d):
        level += abs(state[i])
    returns = 0
    hi = 0
    n_path = 0
    for t in range(u.shape[0]):
        total = 0.0
        if jump_chain:
            for i in range(d):
                k = min(max(state[i] + offset, 0), width - 1)
                total += up_tab[i, k] + down_tab[i, k]
        else:
            total = 1.0
        x = u[t] * total
        acc = 0.0
        move = 0
        all_nonzero = True
        for i in range(d):
            s = state[i]
            if s == 0:
                all_nonzero = False
            k = min(max(s + offset, 0), width - 1)
            pu = up_tab[i, k]
            pd = down_tab[i, k]
            if reflected and s == 0:
                pu += pd
                pd = 0.0
            acc += pu
            if move == 0 and x < acc:
                move = i + 1
            acc += pd
            if move == 0 and x < acc:
                move = -(i + 1)
        if all_nonzero:
            interior[0] += 1
            if move == 0:
                interior[1] += 1
        new_level = level
        if move != 0:
            i = abs(move) - 1
            before = abs(state[i])
            if move > 0:
                state[i] += 1
            else:
                state[i] -= 1
            new_level = level - before + abs(state[i])
        if new_level != level:
            if t >= burn_in and level <= n_max:
                if new_level > level:
                    ups[level] += 1
                else:
                    downs[level] += 1
            if new_level == 0:
                returns += 1
            if path.shape[0] > 0:
                path[n_path] = new_level
                n_path += 1
            level = new_level
        while hi < horizons.shape[0] and t + 1 == horizons[hi]:
            returns_at[hi] = returns
            hi += 1
    return n_path


@dataclass
class _Kernel:
    up: np.ndarray
    down: np.ndarray
    offset: int
    reflected: bool
    jump_chain: bool
    d: int


def _walk_kernel(spec: WalkSpec, reflected: bool) -> _Kernel:
    k = table_support(spec) + 1
    values = range(-k, k + 1)
    up = np.array([[float(axis_rates(spec, i, s)[0]) for s in values] for i in range(spec.d)])
    down = np.array([[float(axis_rates(spec, i, s)[1]) for s in values] for i in range(spec.d)])
    return _Kernel(up, down, k, reflected, False, spec.d)


def _chain_kernel(chains: Sequence[CoordinateChainSpec], steps: int) -> _Kernel:
    size = steps + 2
    ups, downs = [], []
    for ch in chains:
        up, down = float_rate_arrays(ch.rates, size)
        if ch.reflection_doubling:
            up = up.copy()
            up[0] *= 2
        down = down.copy()
        down[0] = 0.0
        ups.append(up)
        downs.append(down)
    return _Kernel(np.array(ups), np.array(downs), 0, False, True, len(chains))


@dataclass
class SimRun:
    """Raw per-replicate output of a batch of simulations."""

    config: SimConfig
    ups: np.ndarray  # (n_max + 1,) summed over replicates
    downs: np.ndarray
    final_states: np.ndarray  # (walks, d)
    returns_at: np.ndarray  # (walks, len(horizons))
    interior_steps: int
    interior_stays: int
    paths: Optional[list[np.ndarray]] = None

    @property
    def final_norms(self) -> np.ndarray:
        return np.abs(self.final_states).sum(axis=1)


def _simulate(kernel: _Kernel, cfg: SimConfig, record_path: bool = False) -> SimRun:
    horizons = np.array(cfg.horizons, dtype=np.int64)

    def one(r: int):
        u = replicate_stream(cfg.seed, r).random(cfg.steps)
        state = np.zeros(kernel.d, dtype=np.int64)
        ups = np.zeros(cfg.n_max + 1, dtype=np.int64)
        downs = np.zeros(cfg.n_max + 1, dtype=np.int64)
        ret = np.zeros(len(horizons), dtype=np.int64)
        interior = np.zeros(2, dtype=np.int64)
        path = np.zeros(cfg.steps if record_path else 0, dtype=np.int64)
        n = _run(kernel.up, kernel.down, kernel.offset, kernel.reflected, kernel.jump_chain, u, state,
                 cfg.burn_in, cfg.n_max, horizons, ups, downs, ret, interior, path)
        return state, ups, downs, ret, interior, (path[:n] if record_path else None)

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            results = list(pool.map(one, range(cfg.walks)))
    else:
        results = [one(r) for r in range(cfg.walks)]
    interior = sum(r[4] for r in results)
    return SimRun(
        config=cfg,
        ups=sum(r[1] for r in results),
        downs=sum(r[2] for r in results),
        final_states=np.array([r[0] for r in results]),
        returns_at=np.array([r[3] for r in results]),
        interior_steps=int(interior[0]),
        interior_stays=int(interior[1]),
        paths=[r[5] for r in results] if record_path else None,
    )


def simulate_walk(spec: WalkSpec, cfg: SimConfig, reflected: bool = False, record_path: bool = False) -> SimRun:
    """Run ``cfg.walks`` replicates of ``spec`` from the origin."""
    validate(spec)
    return _simulate(_walk_kernel(spec, reflected), cfg, record_path)


def simulate_chains(chains: Sequence[CoordinateChainSpec], cfg: SimConfig, record_path: bool = False) -> SimRun:
    """Run independent coordinate chains through their embedded jump chain."""
    return _simulate(_chain_kernel(chains, cfg.steps), cfg, record_path)


def sample_jumps(chains: Sequence[CoordinateChainSpec], state: Sequence[int], count: int, seed: int) -> np.ndarray:
    """Draw ``count`` first jumps from ``state``; returns signed axis moves."""
    kernel = _chain_kernel(chains, max(state) + 2)
    u = replicate_stream(seed, 0).random(count)
    out = np.empty(count, dtype=np.int64)
    _first_moves(kernel.up, kernel.down, np.array(state, dtype=np.int64), u, out)
    return out


@nb.njit(cache=True)
def _first_moves(up_tab, down_tab, state, u, out):
    d = state.shape[0]
    total = 0.0
    for i in range(d):
        total += up_tab[i, state[i]] + down_tab[i, state[i]]
    for t in range(u.shape[0]):
        x = u[t] * total
        acc = 0.0
        out[t] = 0
        for i in range(d):
            acc += up_tab[i, state[i]]
            if x < acc:
                out[t] = i + 1
                break
            acc += down_tab[i, state[i]]
            if x < acc:
                out[t] = -(i + 1)
                break


# -- tables and reports ----------------------------------------------------


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class LevelRow:
    level: int
    up: int
    down: int
    p_hat: float
    ci_low: float
    ci_high: float

    @property
    def visits(self) -> int:
        return self.up + self.down


@dataclass
class EmpiricalTransitionTable:
    rows: list[LevelRow]
    absent_levels: list[int]
    confidence: float
    seed: int
    walks: int
    steps: int
    burn_in: int

    def row(self, level: int) -> Optional[LevelRow]:
        for r in self.rows:
            if r.level == level:
                return r
        return None

    def interval(self, level: int, z: float) -> tuple[float, float]:
        r = self.row(level)
        if r is None:
            raise KeyError(f"level {level} was not visited")
        return wilson_interval(r.up, r.visits, z)


def table_from_run(run: SimRun, confidence: float = 0.95) -> EmpiricalTransitionTable:
    z = float(_normal.ppf(0.5 + confidence / 2))
    rows, absent = [], []
    for n in range(1, run.config.n_max + 1):
        up, down = int(run.ups[n]), int(run.downs[n])
        if up + down == 0:
            absent.append(n)
            continue
        lo, hi = wilson_interval(up, up + down, z)
        rows.append(LevelRow(n, up, down, up / (up + down), lo, hi))
    cfg = run.config
    return EmpiricalTransitionTable(rows, absent, confidence, cfg.seed, cfg.walks, cfg.steps, cfg.burn_in)


def empirical_transition_table(spec: WalkSpec, cfg: SimConfig, confidence: float = 0.95) -> EmpiricalTransitionTable:
    """Up/down tallies of the norm process at active instants after burn-in."""
    return table_from_run(simulate_walk(spec, cfg), confidence)


@dataclass
class ReturnReport:
    horizons: list[int]
    returns: np.ndarray  # (walks, len(horizons))
    escaped: np.ndarray  # (walks,) bool, norm > radius at the final horizon
    radius: int

    @property
    def mean_returns(self) -> list[float]:
        return [float(x) for x in self.returns.mean(axis=0)]

    @property
    def escape_fraction(self) -> float:
        return float(self.escaped.mean())

    def to_dict(self) -> dict:
        return {
            "horizons": self.horizons,
            "mean_returns": self.mean_returns,
            "escape_fraction": self.escape_fraction,
            "radius": self.radius,
            "per_replicate": [
                {"replicate": r, "returns": [int(x) for x in self.returns[r]], "escaped": bool(self.escaped[r])}
                for r in range(len(self.escaped))
            ],
        }


def report_from_run(run: SimRun) -> ReturnReport:
    return ReturnReport(list(run.config.horizons), run.returns_at, run.final_norms > run.config.radius, run.config.radius)


def return_statistics(system, cfg: SimConfig) -> ReturnReport:
    """Returns of the norm to 0 and escape beyond ``cfg.radius``.

    ``system`` is a :class:`WalkSpec` or a sequence of coordinate chains.
    """
    run = simulate_walk(system, cfg) if isinstance(system, WalkSpec) else simulate_chains(system, cfg)
    return report_from_run(run)


def simulate_bd_sum(d: int, rates: CoordinateRates, cfg: SimConfig, confidence: float = 0.95):
    """Sum of ``d`` independent copies of a birth-and-death chain."""
    chains = [CoordinateChainSpec(rates, False)] * d
    run = simulate_chains(chains, cfg)
    return table_from_run(run, confidence), report_from_run(run)


@dataclass
class LevelComparison:
    level: int
    p_a: Optional[float]
    p_b: Optional[float]
    z: Optional[float]
    p_value: Optional[float]
    significant: bool
    excluded: bool
    sandwich: Optional[dict] = None


@dataclass
class ConservativenessReport:
    levels: list[LevelComparison]
    alpha: float
    tested: int
    consistent: bool
    sandwich_ok: Optional[bool] = None
    table_a: Optional[EmpiricalTransitionTable] = field(default=None, repr=False)
    table_b: Optional[EmpiricalTransitionTable] = field(default=None, repr=False)


def two_proportion_z(up_a: int, n_a: int, up_b: int, n_b: int) -> float:
    pooled = (up_a + up_b) / (n_a + n_b)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n_a + 1 / n_b))
    if se == 0:
        return 0.0
    return (up_a / n_a - up_b / n_b) / se


def _sandwich(spec: WalkSpec, row: LevelRow, z: float) -> Optional[dict]:
    if spec.model not in (Model.MODEL2, Model.MODEL3):
        return None
    lo, hi = pn_bounds(row.level, spec.d, *k_range(spec))
    ci = wilson_interval(row.up, row.visits, z)
    return {"lower": float(lo), "upper": float(hi), "ci": ci, "ok": ci[1] >= float(lo) and ci[0] <= float(hi)}


def compare_families(
    spec_a: WalkSpec, spec_b: WalkSpec, cfg: SimConfig, alpha: float = 0.01, min_visits: int = 100, band_z: float = 4.0
) -> ConservativenessReport:
    """Per-level two-proportion tests between two members of a family, Bonferroni corrected."""
    if spec_a.d != spec_b.d:
        raise ValueError("specs must share the dimension")
    ta = empirical_transition_table(spec_a, cfg)
    tb = ta if spec_b == spec_a else empirical_transition_table(spec_b, cfg)
    rows = []
    for n in range(1, cfg.n_max + 1):
        ra, rb = ta.row(n), tb.row(n)
        if ra is None or rb is None or ra.visits < min_visits or rb.visits < min_visits:
            rows.append(LevelComparison(n, ra and ra.p_hat, rb and rb.p_hat, None, None, False, True))
            continue
        zstat = two_proportion_z(ra.up, ra.visits, rb.up, rb.visits)
        pval = float(2 * _normal.sf(abs(zstat)))
        sandwich = {k: v for k, v in (("a", _sandwich(spec_a, ra, band_z)), ("b", _sandwich(spec_b, rb, band_z))) if v}
        rows.append(LevelComparison(n, ra.p_hat, rb.p_hat, zstat, pval, False, False, sandwich or None))
    tested = [r for r in rows if not r.excluded]
    for r in tested:
        r.significant = r.p_value < alpha / len(tested)
    bands = [s["ok"] for r in tested for s in (r.sandwich or {}).values()]
    return ConservativenessReport(
        levels=rows,
        alpha=alpha,
        tested=len(tested),
        consistent=bool(tested) and not any(r.significant for r in tested),
        sandwich_ok=all(bands) if bands else None,
        table_a=ta,
        table_b=tb,
    )
