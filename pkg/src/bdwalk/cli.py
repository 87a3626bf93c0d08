"""Command-line entry point.

Usage:
    bdwalk pn-exact --d 3 --n-max 100 --format csv --out reports/
    bdwalk level-chain --config walk.json --n-max 30
    bdwalk classify --family bd-gamma --gamma 2 --d 3
    bdwalk simulate --config walk.json --steps 100000 --walks 200 --seed 7
    bdwalk conserve-check --config family.json --steps 100000 --walks 2000
    bdwalk examples78 --example 1 --c 1 --d 2 --n-max 200

Exit status is 0 on success and 2 on any validation problem, in which case a
JSON error document is printed to stderr (and written to ``--out`` if given).
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .classifier import Verdict, classify
from .combinatorics import pn_bounds, pn_uniform_k
from .config import ConfigBundle, ConfigError, load_config, sim_from_dict, sim_to_dict, walk_to_dict
from .levelchain import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    CoordinateChainSpec,
    fit_z_from_pn,
    level_up_probabilities,
    level_up_probability,
    walk_coordinates,
)
from .montecarlo import (
    compare_families,
    report_from_run,
    simulate_chains,
    simulate_walk,
    table_from_run,
)
from .rates import BDGamma, RatioFamily, UniformRates
from .reports import Report, emit_report, exact_cell, render_csv, render_json
from .walks import Model, SpecError


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config document (schema_version 1)")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, help="directory for report files; stdout if omitted")
    p.add_argument("--format", choices=["json", "csv", "both"], help="default csv for pn-exact, json otherwise")
    p.add_argument("--threads", type=int, default=1)


def _sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--steps", type=int)
    p.add_argument("--walks", type=int)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--radius", type=int)
    p.add_argument("--checkpoints", type=int, nargs="+")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bdwalk", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"bdwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pn-exact", help="exact level up-probabilities of the symmetric or uniform-k walk")
    _common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--k", type=_fraction, default=Fraction(1))
    p.add_argument("--k-low", type=_fraction)
    p.add_argument("--k-high", type=_fraction)

    p = sub.add_parser("level-chain", help="level up-probabilities of a system of coordinate chains")
    _common(p)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--family", choices=["ratio", "uniform"], help="identical coordinates instead of --config")
    p.add_argument("--c", type=_fraction)
    p.add_argument("--alpha", type=_fraction)
    p.add_argument("--d", type=int)
    p.add_argument("--doubling", action="store_true", help="double the up rate at 0")
    p.add_argument("--method", choices=["convolution", "enumerate"], default="convolution")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    p = sub.add_parser("classify", help="recurrence/transience verdict for a birth-and-death process")
    _common(p)
    p.add_argument("--family", choices=["bd-gamma", "ratio", "uniform"])
    p.add_argument("--gamma", type=_fraction)
    p.add_argument("--d", type=int)
    p.add_argument("--c", type=_fraction)
    p.add_argument("--alpha", type=_fraction)
    p.add_argument("--margin", type=float, default=1e-2)

    p = sub.add_parser("simulate", help="empirical transition table and return statistics")
    _common(p)
    _sim_flags(p)
    p.add_argument("--reflected", action="store_true")
    p.add_argument("--confidence", type=float, default=0.95)

    p = sub.add_parser("conserve-check", help="compare family members level by level")
    _common(p)
    _sim_flags(p)
    p.add_argument("--significance", type=float, default=0.01)
    p.add_argument("--min-visits", type=int, default=100)

    p = sub.add_parser("examples78", help="sums of independent birth-and-death chains")
    _common(p)
    p.add_argument("--example", type=int, choices=[1, 2], required=True)
    p.add_argument("--c", type=_fraction, required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--simulate", action="store_true", help="add nested-horizon Monte-Carlo evidence")
    p.add_argument("--horizon", type=int, default=250_000)
    p.add_argument("--walks", type=int, default=16)
    p.add_argument("--radius", type=int, default=100)
    p.add_argument("--margin", type=float, default=1e-2)
    return parser


# -- commands --------------------------------------------------------------


def _bundle(args) -> ConfigBundle:
    return load_config(args.config) if args.config else ConfigBundle()


def cmd_pn_exact(args, bundle: ConfigBundle) -> Report:
    if args.d < 2 or args.n_max < 1:
        raise UsageError("need --d >= 2 and --n-max >= 1")
    bounds = args.k_low is not None or args.k_high is not None
    rows = []
    for n in range(1, args.n_max + 1):
        if bounds:
            if args.k_low is None or args.k_high is None:
                raise UsageError("--k-low and --k-high go together")
            lo, hi = pn_bounds(n, args.d, args.k_low, args.k_high)
            rows.append({"n": n, "lower_exact": str(lo), "lower": float(lo), "upper_exact": str(hi), "upper": float(hi)})
        else:
            p = pn_uniform_k(n, args.d, args.k)
            rows.append({"n": n, "p_exact": str(p), "p": float(p)})
    config = {"d": args.d, "n_max": args.n_max}
    config.update({"k_low": str(args.k_low), "k_high": str(args.k_high)} if bounds else {"k": str(args.k)})
    return Report("pn-exact", config, {"d": args.d}, {"table": "combinatorics.pn_uniform_k"}, table=rows)


def _coordinates(args, bundle: ConfigBundle) -> list[CoordinateChainSpec]:
    if args.family:
        if args.d is None:
            raise UsageError("--family needs --d")
        if args.family == "ratio":
            if args.c is None:
                raise UsageError("--family ratio needs --c")
            rates = RatioFamily(args.c)
        else:
            if args.alpha is None:
                raise UsageError("--family uniform needs --alpha")
            rates = UniformRates(args.alpha)
        return [CoordinateChainSpec(rates, args.doubling)] * args.d
    if bundle.coordinates:
        return bundle.coordinates
    if bundle.walk is not None:
        return walk_coordinates(bundle.walk)
    raise UsageError("level-chain needs --family or a config with 'coordinates' or a walk")


def cmd_level_chain(args, bundle: ConfigBundle) -> Report:
    chains = _coordinates(args, bundle)
    if args.n_max < 1:
        raise UsageError("--n-max must be >= 1")
    levels = list(range(1, args.n_max + 1))
    if args.method == "enumerate":
        reports = [level_up_probability(chains, n, "enumerate", args.budget) for n in levels]
    else:
        reports = level_up_probabilities(chains, levels)
    rows = []
    for r in reports:
        exact, value = exact_cell(r.p)
        rows.append({"n": r.level, "p_exact": exact, "p": value, "compositions": r.compositions})
    payload = {"d": len(chains), "method": args.method}
    if len(reports) >= 8:
        tail = [(r.level, r.p) for r in reports[len(reports) // 2:]]
        if len(tail) >= 8:
            fit = fit_z_from_pn(tail)
            payload["z_fit"] = {"z": fit.z, "levels": fit.levels, "z_n": fit.z_n, "residual": fit.extrapolation.residual}
    config = {"n_max": args.n_max, "coordinates": [c.to_dict() for c in chains]}
    if bundle.walk is not None and not args.family and not bundle.coordinates:
        config["walk"] = walk_to_dict(bundle.walk)
    return Report("level-chain", config, payload, {"table": f"levelchain.{args.method}"}, table=rows)


def cmd_classify(args, bundle: ConfigBundle) -> Report:
    if args.family == "bd-gamma":
        if args.gamma is None or args.d is None:
            raise UsageError("--family bd-gamma needs --gamma and --d")
        rates = BDGamma(args.gamma, args.d)
    elif args.family == "ratio":
        if args.c is None:
            raise UsageError("--family ratio needs --c")
        rates = RatioFamily(args.c)
    elif args.family == "uniform":
        if args.alpha is None:
            raise UsageError("--family uniform needs --alpha")
        rates = UniformRates(args.alpha)
    elif bundle.rates is not None:
        rates = bundle.rates
    else:
        raise UsageError("classify needs --family or a config with 'rates'")
    result = classify(rates, margin=args.margin)
    payload = {
        "verdict": result.verdict.value,
        "z": result.z,
        "decided_by": result.decided_by,
        "hypotheses": {"birth_exceeds_death": result.birth_exceeds_death, "ratio_tends_to_one": result.ratio_tends_to_one},
        "z_estimate": result.z_estimate,
        "series": result.series,
        "notes": result.notes,
    }
    rows = [{"n": n, "z_n": z, "deviation": dv} for n, z, dv in zip(result.z_estimate.levels, result.z_estimate.z_n, result.z_estimate.deviations)]
    return Report("classify", {"rates": rates.to_dict(), "margin": args.margin}, payload, {"verdict": "classifier.classify"}, table=rows)


def _sim_config(args, bundle: ConfigBundle):
    return sim_from_dict(
        bundle.sim,
        steps=args.steps,
        walks=args.walks,
        burn_in=args.burn_in,
        n_max=args.n_max,
        seed=args.seed,
        radius=args.radius,
        checkpoints=tuple(args.checkpoints) if args.checkpoints else None,
        threads=args.threads,
    )


def _table_rows(table) -> list[dict]:
    return [
        {"n": r.level, "up": r.up, "down": r.down, "p_hat": r.p_hat, "ci_low": r.ci_low, "ci_high": r.ci_high}
        for r in table.rows
    ]


def cmd_simulate(args, bundle: ConfigBundle) -> Report:
    cfg = _sim_config(args, bundle)
    if bundle.walk is not None:
        run = simulate_walk(bundle.walk, cfg, reflected=args.reflected)
        system = {"walk": walk_to_dict(bundle.walk), "reflected": args.reflected}
    elif bundle.coordinates:
        run = simulate_chains(bundle.coordinates, cfg)
        system = {"coordinates": [c.to_dict() for c in bundle.coordinates]}
    else:
        raise UsageError("simulate needs a config with a walk or 'coordinates'")
    table = table_from_run(run, args.confidence)
    returns = report_from_run(run)
    payload = {
        "returns": returns.to_dict(),
        "absent_levels": table.absent_levels,
        "interior": {"steps": run.interior_steps, "stays": run.interior_stays},
        "final_states": run.final_states,
    }
    notes = [f"levels {table.absent_levels} had no visits and are omitted"] if table.absent_levels else []
    config = {**system, "sim": sim_to_dict(cfg), "confidence": args.confidence}
    return Report("simulate", config, payload, {"table": "montecarlo.simulate"}, cfg.seed, _table_rows(table), notes)


def cmd_conserve_check(args, bundle: ConfigBundle) -> Report:
    family = list(bundle.walks) or ([bundle.walk] if bundle.walk else [])
    if len(family) < 2:
        raise UsageError("conserve-check needs a config with at least two entries in 'walks'")
    cfg = _sim_config(args, bundle)
    pairs, rows, consistent, bands = [], [], True, []
    for (i, a), (j, b) in itertools.combinations(enumerate(family), 2):
        rep = compare_families(a, b, cfg, alpha=args.significance, min_visits=args.min_visits)
        consistent &= rep.consistent
        if rep.sandwich_ok is not None:
            bands.append(rep.sandwich_ok)
        pairs.append({"a": i, "b": j, "consistent": rep.consistent, "tested_levels": rep.tested, "sandwich_ok": rep.sandwich_ok})
        for lv in rep.levels:
            rows.append({
                "a": i, "b": j, "n": lv.level, "p_a": lv.p_a, "p_b": lv.p_b, "z": lv.z,
                "p_value": lv.p_value, "significant": lv.significant, "excluded": lv.excluded,
            })
    payload = {"pairs": pairs, "consistent": consistent, "sandwich_ok": all(bands) if bands else None}
    config = {"walks": [walk_to_dict(w) for w in family], "sim": sim_to_dict(cfg), "significance": args.significance}
    return Report("conserve-check", config, payload, {"comparison": "montecarlo.compare_families"}, cfg.seed, rows)


def cmd_examples78(args, bundle: ConfigBundle) -> Report:
    d = args.d or (2 if args.example == 1 else 3)
    if args.example == 2 and d < 3:
        raise UsageError("example 2 needs --d >= 3")
    if args.n_max < 16:
        raise UsageError("--n-max must be >= 16 for the z fit")
    rates = RatioFamily(args.c)
    chains = [CoordinateChainSpec(rates, False)] * d
    step = args.n_max // 8
    levels = [step * k for k in range(1, 9)]
    reports = level_up_probabilities(chains, levels)
    fit = fit_z_from_pn([(r.level, r.p) for r in reports])
    if fit.z > 1 + args.margin:
        verdict = Verdict.TRANSIENT.value
    elif fit.z < 1 - args.margin:
        verdict = "recurrent"
    else:
        verdict = Verdict.INCONCLUSIVE.value
    coordinate = classify(rates)
    payload = {
        "example": args.example,
        "d": d,
        "c": str(args.c),
        "z": fit.z,
        "verdict": verdict,
        "coordinate_verdict": coordinate.verdict.value,
        "z_fit": {"levels": fit.levels, "z_n": fit.z_n, "residual": fit.extrapolation.residual},
    }
    rows = [{"n": r.level, "p_exact": exact_cell(r.p)[0], "p": float(r.p)} for r in reports]
    config = {"example": args.example, "d": d, "c": str(args.c), "n_max": args.n_max, "margin": args.margin}
    seed = None
    if args.simulate:
        from .montecarlo import SimConfig

        seed = args.seed or 0
        horizons = (args.horizon, 2 * args.horizon, 4 * args.horizon)
        cfg = SimConfig(steps=4 * args.horizon, walks=args.walks, n_max=1, seed=seed, radius=args.radius,
                        checkpoints=horizons, threads=args.threads)
        payload["montecarlo"] = report_from_run(simulate_chains(chains, cfg)).to_dict()
        config["sim"] = sim_to_dict(cfg)
    return Report("examples78", config, payload, {"z": "levelchain.fit_z_from_pn"}, seed, rows)


COMMANDS = {
    "pn-exact": cmd_pn_exact,
    "level-chain": cmd_level_chain,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "conserve-check": cmd_conserve_check,
    "examples78": cmd_examples78,
}


def _fail(message: str, kind: str, out: Optional[Path], details=None) -> int:
    doc = {"error": kind, "message": message}
    if details:
        doc["details"] = details
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text, file=sys.stderr)
    if out is not None:
        from .reports import atomic_write

        atomic_write(out / "error.json", text + "\n")
    return 2


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = None
    try:
        args = build_parser().parse_args(argv)
        out = args.out
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        if args.format is None:
            args.format = "csv" if args.command == "pn-exact" else "json"
        report = COMMANDS[args.command](args, _bundle(args))
    except UsageError as exc:
        return _fail(str(exc), "usage", out)
    except ConfigError as exc:
        return _fail(str(exc), "config", out, exc.to_dict()["errors"])
    except SpecError as exc:
        return _fail(str(exc), "spec", out, [str(v) for v in exc.violations])
    except BudgetExceeded as exc:
        return _fail(str(exc), "budget", out, {"count": exc.count, "budget": exc.budget})
    except (ValueError, ZeroDivisionError) as exc:
        return _fail(str(exc), "validation", out)
    if out is None:
        sys.stdout.write(render_csv(report) if args.format == "csv" else render_json(report))
        if args.format == "both":
            sys.stdout.write(render_csv(report))
    else:
        for path in emit_report(report, out, args.format):
            print(path)
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
