"""Walk families on Z^d: parameter validation and one-step kernels.

A walk moves by ``+1_i``, ``-1_i`` or stays put. Every family handled here has
independent per-axis behaviour: the chance of moving along axis ``i`` depends
only on the current value ``s`` of coordinate ``i``. :func:`axis_rates` is the
single place that encodes each model; the kernels, the level-chain reduction
and the simulator all go through it.

Moves are encoded as signed axis numbers: ``+(i+1)`` for ``+1_i``, ``-(i+1)``
for ``-1_i`` and ``0`` for staying put.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

Number = Union[Fraction, float]


def as_number(x) -> Number:
    """Parse a parameter: ints and ``"p/q"`` strings become exact, floats stay floats."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (Fraction, float)):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a number")


class Model(str, enum.Enum):
    MODEL1 = "model1"
    MODEL2 = "model2"
    MODEL3 = "model3"
    MODEL4 = "model4"
    MODEL5 = "model5"
    MODEL_B1 = "modelB1"


@dataclass(frozen=True)
class Violation:
    constraint: str
    message: str
    axis: Optional[int] = None

    def __str__(self) -> str:
        where = f"axis {self.axis + 1}: " if self.axis is not None else ""
        return f"[{self.constraint}] {where}{self.message}"


class SpecError(ValueError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class AxisTable:
    """State-dependent step probabilities for one axis; ``None`` means the base rate."""

    up: Mapping[int, Number] = field(default_factory=dict)
    down: Optional[Mapping[int, Number]] = None


@dataclass(frozen=True)
class WalkSpec:
    model: Model
    d: int
    alpha: tuple[Number, ...]
    delta: Optional[tuple[Number, ...]] = None
    c: Optional[Number] = None
    big_m: Optional[int] = None
    rate_tables: Optional[tuple[AxisTable, ...]] = None
    rho: Optional[Number] = None

    @classmethod
    def build(cls, model, d: int, alpha, delta=None, c=None, big_m=None, rate_tables=None, rho=None) -> "WalkSpec":
        tables = None
        if rate_tables is not None:
            tables = tuple(
                t if isinstance(t, AxisTable) else AxisTable(
                    up={int(s): as_number(v) for s, v in (t.get("up") or {}).items()},
                    down=None if t.get("down") is None else {int(s): as_number(v) for s, v in t["down"].items()},
                )
                for t in rate_tables
            )
        return cls(
            model=Model(model),
            d=int(d),
            alpha=tuple(as_number(a) for a in alpha),
            delta=None if delta is None else tuple(as_number(x) for x in delta),
            c=None if c is None else as_number(c),
            big_m=None if big_m is None else int(big_m),
            rate_tables=tables,
            rho=None if rho is None else as_number(rho),
        )

    def is_exact(self) -> bool:
        values = list(self.alpha) + list(self.delta or ()) + [self.c, self.rho]
        for t in self.rate_tables or ():
            values += list(t.up.values()) + list((t.down or {}).values())
        return all(v is None or isinstance(v, Fraction) for v in values)


# -- per-axis rates --------------------------------------------------------


def _b1_star(spec: WalkSpec, i: int) -> Number:
    # alpha* solves alpha*/(2 alpha - alpha*) = rho
    return 2 * spec.alpha[i] * spec.rho / (1 + spec.rho)


def axis_rates(spec: WalkSpec, i: int, s: int) -> tuple[Number, Number]:
    """Probabilities of ``+1_i`` and ``-1_i`` when coordinate ``i`` equals ``s``."""
    a = spec.alpha[i]
    m = spec.model
    if m is Model.MODEL1:
        return a, a
    if m is Model.MODEL2:
        r = a if s == 0 else a - spec.delta[i] / 2
        return r, r
    if m is Model.MODEL3:
        r = a - spec.delta[i] / 2 if s == 0 else a
        return r, r
    if m is Model.MODEL_B1 and spec.rho is not None and spec.rate_tables is None:
        if s == 0 or abs(s) > spec.big_m:
            return a, a
        star = _b1_star(spec, i)
        return (star, 2 * a - star) if s > 0 else (2 * a - star, star)
    table = spec.rate_tables[i] if spec.rate_tables else AxisTable()
    up = table.up.get(s, a)
    if m is Model.MODEL4:
        return up, up
    down = (table.down or {}).get(s, a)
    return up, down


def table_support(spec: WalkSpec) -> int:
    """Largest |s| at which some axis deviates from its base rate."""
    if spec.model is Model.MODEL_B1 and spec.rho is not None and spec.rate_tables is None:
        return spec.big_m
    if spec.model in (Model.MODEL2, Model.MODEL3, Model.MODEL1):
        return 0
    keys = [0]
    for t in spec.rate_tables or ():
        keys += [abs(s) for s in t.up] + [abs(s) for s in (t.down or {})]
    return max(keys)


# -- validation ------------------------------------------------------------


def _check_tables(spec: WalkSpec, out: list[Violation]) -> None:
    m = spec.model
    tables = spec.rate_tables
    if tables is not None and len(tables) != spec.d:
        out.append(Violation("shape", f"rate_tables has {len(tables)} axes, expected {spec.d}"))
        return
    for i in range(spec.d):
        a = spec.alpha[i]
        t = tables[i] if tables else AxisTable()
        states = sorted(set(t.up) | set(t.down or {}) | {-s for s in t.up} | {-s for s in (t.down or {})} | {0})
        for s in states:
            up, down = axis_rates(spec, i, s)
            if m is Model.MODEL4:
                if not spec.c <= up <= a:
                    out.append(Violation("model4-bounds", f"need c <= up({s}) <= alpha_{i + 1}, got {up}", i))
            elif up <= 0 or down <= 0:
                out.append(Violation("positive", f"step probabilities at s={s} must be > 0", i))
            if m is Model.MODEL5:
                if up < spec.c or down < spec.c:
                    out.append(Violation("model5-lower", f"up({s}), down({s}) must be >= c", i))
                if up + down > 2 * a:
                    out.append(Violation("model5-sum", f"up({s}) + down({s}) <= 2 alpha_{i + 1} violated", i))
            if m is Model.MODEL_B1 and up + down != 2 * a:
                out.append(Violation("b1-sum", f"up({s}) + down({s}) must equal 2 alpha_{i + 1}", i))
            up_mirror, _ = axis_rates(spec, i, -s)
            if up_mirror != down:
                out.append(Violation("mirror-symmetry", f"up({-s}) != down({s}): mirror symmetry violated", i))
            if spec.big_m is not None and abs(s) > spec.big_m and (up != a or down != a):
                out.append(Violation("tail", f"rates at |s|={abs(s)} > M must equal alpha_{i + 1}", i))


def violations(spec: WalkSpec) -> list[Violation]:
    out: list[Violation] = []
    if spec.d < 1:
        return [Violation("dimension", f"d must be >= 1, got {spec.d}")]
    if len(spec.alpha) != spec.d:
        return [Violation("shape", f"alpha has {len(spec.alpha)} entries, expected {spec.d}")]
    for i, a in enumerate(spec.alpha):
        if a <= 0:
            out.append(Violation("alpha-positive", f"alpha_{i + 1} must be > 0", i))
    total = 2 * sum(spec.alpha)
    exact = all(isinstance(a, Fraction) for a in spec.alpha)
    if (total != 1) if exact else abs(total - 1) > 1e-12:
        out.append(Violation("sum-alpha", f"2 * sum(alpha) must equal 1, got {total}"))
    m = spec.model
    if m in (Model.MODEL2, Model.MODEL3):
        if spec.delta is None or len(spec.delta) != spec.d:
            out.append(Violation("shape", f"{m.value} needs delta with {spec.d} entries"))
        else:
            for i, (a, dl) in enumerate(zip(spec.alpha, spec.delta)):
                if dl < 0:
                    out.append(Violation("delta-nonnegative", f"delta_{i + 1} must be >= 0", i))
                if a - dl / 2 <= 0:
                    out.append(Violation("alpha-delta", f"alpha_{i + 1} - delta_{i + 1}/2 <= 0", i))
    if m in (Model.MODEL4, Model.MODEL5):
        if spec.c is None or spec.c <= 0:
            out.append(Violation("lower-bound", f"{m.value} needs c > 0"))
        elif not spec.c < min(spec.alpha):
            out.append(Violation("lower-bound", "c must be < min(alpha)"))
    if m is Model.MODEL_B1:
        if spec.rate_tables is None:
            if spec.rho is None or spec.rho <= 0 or spec.big_m is None or spec.big_m < 0:
                out.append(Violation("b1-params", "modelB1 needs rate_tables, or rho > 0 with M >= 0"))
    if out:
        return out
    if m in (Model.MODEL4, Model.MODEL5, Model.MODEL_B1):
        _check_tables(spec, out)
    return out


def validate(spec: WalkSpec) -> WalkSpec:
    found = violations(spec)
    if found:
        raise SpecError(found)
    return spec


# -- kernels ---------------------------------------------------------------


@dataclass(frozen=True)
class StepDistribution:
    entries: tuple[tuple[int, Number], ...]

    def prob(self, move: int) -> Number:
        for mv, p in self.entries:
            if mv == move:
                return p
        return Fraction(0)

    def total(self) -> Number:
        return sum((p for _, p in self.entries), Fraction(0))

    def as_dict(self) -> dict[int, Number]:
        return dict(self.entries)


def _assemble(pairs: list[tuple[int, Number]]) -> StepDistribution:
    total = sum((p for _, p in pairs), Fraction(0))
    stay = 1 - total
    if isinstance(stay, float) and abs(stay) < 1e-12:
        stay = 0.0
    if stay < 0:
        raise ValueError(f"step probabilities exceed 1 (total {total})")
    pairs = pairs + [(0, stay)]
    return StepDistribution(tuple((mv, p) for mv, p in pairs if p > 0))


def _check_state(spec: WalkSpec, state: Sequence[int]) -> None:
    if len(state) != spec.d:
        raise ValueError(f"state has dimension {len(state)}, spec has d={spec.d}")


def step_distribution(spec: WalkSpec, state: Sequence[int]) -> StepDistribution:
    """Exact law of the next increment from ``state``, including the stay-put mass."""
    _check_state(spec, state)
    pairs = []
    for i, s in enumerate(state):
        up, down = axis_rates(spec, i, s)
        pairs += [(i + 1, up), (-(i + 1), down)]
    return _assemble(pairs)


def reflected_axis_rates(spec: WalkSpec, i: int, s: int) -> tuple[Number, Number]:
    up, down = axis_rates(spec, i, s)
    if s == 0:
        return up + down, Fraction(0)
    return up, down


def reflected_step_distribution(spec: WalkSpec, state: Sequence[int]) -> StepDistribution:
    """Law of the reflected walk's increment: a move to -1 is folded onto +1."""
    _check_state(spec, state)
    if any(s < 0 for s in state):
        raise ValueError(f"reflected walk lives in Z^d_+, got {tuple(state)}")
    pairs = []
    for i, s in enumerate(state):
        up, down = reflected_axis_rates(spec, i, s)
        pairs += [(i + 1, up), (-(i + 1), down)]
    return _assemble(pairs)


def k_range(spec: WalkSpec) -> tuple[Number, Number]:
    """Extreme per-axis ratios ``k_i`` for Models 2 and 3."""
    if spec.model is Model.MODEL2:
        ks = [2 * a / (2 * a - dl) for a, dl in zip(spec.alpha, spec.delta)]
    elif spec.model is Model.MODEL3:
        ks = [(2 * a - dl) / (2 * a) for a, dl in zip(spec.alpha, spec.delta)]
    else:
        raise ValueError(f"k range is defined for model2/model3, not {spec.model.value}")
    return min(ks), max(ks)
