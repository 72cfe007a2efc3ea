"""``leadsupply`` command line.

Exit status: 0 success, 1 data or model error, 2 usage error.
Datasets are file paths or ``fixture:<band>`` for a bundled fixture.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

from .config import parse_policy, parse_scenario
from .domain import OVERALL, SUBGROUP_VIEWS, Band, Segment, round_half_away
from .equilibrium import DEFAULT_EPSILON, Column, gap_report
from .errors import LeadSupplyError, ParseError, PolicyError
from .ingest import DatasetFile, combine, fixture_path, parse
from .poolmodel import PoolPolicy, diverse_hire_rate, gap_to_nominal, hire_rate_monte_carlo, parse_probs
from .projection import FlowScaling, Scenario, first_feasible_year, project
from .report import (
    EXTENSIONS,
    FORMATS,
    artifact_name,
    render_demographics,
    render_gap_table,
    render_supply_chart,
    render_trajectory,
)

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2
VIEW_CHOICES = ("all", "overall", "white_female", "minority")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse already exits 2; keep the stable contract explicit
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _probs(text: str) -> dict[int, float]:
    try:
        return parse_probs(text)
    except PolicyError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _global_flags(p: argparse.ArgumentParser, defaults: bool) -> None:
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=d(42), help="random seed for Monte Carlo estimates (default 42)")
    p.add_argument("--jobs", type=_pos_int, default=d(1), help="worker threads; output does not depend on it")
    p.add_argument("--precision", type=_nonneg_int, default=d(0), help="decimal places for percentages")
    p.add_argument("--epsilon", type=float, default=d(DEFAULT_EPSILON), help="equilibrium band around r30 = 0")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="leadsupply", description="Leadership supply and demand under the 30% rule.")
    _global_flags(p, defaults=True)
    # the same flags are accepted after the subcommand; SUPPRESS keeps earlier values
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, defaults=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    add = lambda name, **kw: sub.add_parser(name, parents=[common], **kw)  # noqa: E731

    v = add("validate", help="check dataset files")
    v.add_argument("datasets", nargs="+")

    g = add("gap", help="gap tables, chart and r30 summary for one dataset")
    g.add_argument("dataset")
    g.add_argument("--view", choices=VIEW_CHOICES, default="all")
    g.add_argument("--format", choices=FORMATS, default="text")
    g.add_argument("--out", type=Path, help="directory for table and chart files")

    pr = add("project", help="multi-year projection and feasibility horizon")
    pr.add_argument("dataset")
    pr.add_argument("--scenario", type=Path, help="scenario file")
    pr.add_argument("--years", type=_pos_int, help="override the scenario horizon (default 30)")
    pr.add_argument("--growth", type=float, help="override annual entry growth")
    pr.add_argument("--scaling", choices=[s.value for s in FlowScaling], help="override flow scaling")
    pr.add_argument("--view", choices=("white_female", "minority"), default="minority")
    pr.add_argument("--out", type=Path, help="directory for trajectory chart and data")

    po = add("pool", help="diverse hire rate of a candidate-slate policy")
    po.add_argument("--policy", type=Path, help="policy file (flags override its fields)")
    po.add_argument("--pool-size", type=_pos_int)
    po.add_argument("--share", type=float)
    po.add_argument("--pools", type=_pos_int)
    po.add_argument("--probs", type=_probs, help="e.g. 1:0,2:0.5 or hbr-2016")
    po.add_argument("--trials", type=_pos_int, default=1_000_000)

    r = add("report", help="write every table and chart for one or more datasets")
    r.add_argument("datasets", nargs="+")
    r.add_argument("--out", type=Path, required=True)
    return p


def _read(spec: str) -> tuple[bytes, str]:
    if spec.startswith("fixture:"):
        path = fixture_path(Band.parse(spec.split(":", 1)[1]))
    else:
        path = Path(spec)
    return path.read_bytes(), str(path)


def _load(spec: str) -> DatasetFile:
    data, source = _read(spec)
    return parse(data, source)


def _views(choice: str) -> tuple[Segment, ...]:
    if choice == "all":
        return (OVERALL, *SUBGROUP_VIEWS)
    return (Segment.parse(choice),)


def _fixed(x: float, digits: int) -> str:
    return f"{round_half_away(x, digits):.{digits}f}"


def _write(out: Path, name: str, data: bytes) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_bytes(data)
    return path


def cmd_validate(args) -> int:
    status = EXIT_OK
    for spec in args.datasets:
        try:
            ds = _load(spec)
        except ParseError as exc:
            status = EXIT_DATA
            for issue in exc.issues:
                print(f"{spec}:{issue.line}: {issue.message}")
            continue
        except (OSError, LeadSupplyError) as exc:
            status = EXIT_DATA
            print(f"{spec}: {exc}")
            continue
        flows = "with flows" if ds.rates is not None else "population only"
        print(f"{spec}: ok ({ds.meta.band.band.value}, {ds.meta.year}, total {ds.population.total():.0f}, {flows})")
    return status


def _require_rates(ds: DatasetFile, spec: str):
    if ds.rates is None:
        raise LeadSupplyError(f"{spec}: dataset has no flow records")
    return ds.rates


def cmd_gap(args) -> int:
    ds = _load(args.dataset)
    rates = _require_rates(ds, args.dataset)
    band = ds.meta.band.band
    views = _views(args.view)
    report = gap_report(rates, ds.population, epsilon=args.epsilon, band=band, views=views)
    tag = args.view
    if args.out:
        ext = EXTENSIONS[args.format]
        _write(args.out, artifact_name(band.value, tag, "table", ext), render_gap_table(report, args.format, args.precision))
        _write(args.out, artifact_name(band.value, tag, "chart", "svg"), render_supply_chart(report))
    digits = 2 + args.precision
    for view in views:
        m = report.metric(Column.TOTAL, view)
        print(f"{band.value} {view.value} r30={_fixed(m.r30, digits)} {m.classification.value}")
    return EXIT_OK


def cmd_project(args) -> int:
    ds = _load(args.dataset)
    rates = _require_rates(ds, args.dataset)
    if args.scenario:
        sc = parse_scenario(args.scenario.read_bytes(), str(args.scenario))
    else:
        sc = Scenario(label="default")
    changes = {
        "years": args.years if args.years is not None else sc.years,
        "annual_growth": args.growth if args.growth is not None else sc.annual_growth,
        "flow_scaling": args.scaling if args.scaling is not None else sc.flow_scaling,
    }
    sc = Scenario(
        flow_multipliers=sc.flow_multipliers, label=sc.label, max_years=sc.max_years, **changes
    )
    view = Segment.parse(args.view)
    traj = project(ds.population, rates, sc)
    horizon = first_feasible_year(traj, view)
    if args.out:
        svg, csv_bytes = render_trajectory(traj, view, sc.label)
        band = ds.meta.band.band.value
        _write(args.out, artifact_name(band, view.value, "projection", "svg"), svg)
        _write(args.out, artifact_name(band, view.value, "projection", "csv"), csv_bytes)
    print(f"feasible_at={'never' if horizon is None else horizon}")
    return EXIT_OK


def _policy(args, parser) -> PoolPolicy:
    base = {}
    if args.policy:
        pol = parse_policy(args.policy.read_bytes(), str(args.policy))
        base = {
            "pool_size": pol.pool_size,
            "diversity_share": pol.diversity_share,
            "num_pools": pol.num_pools,
            "hire_prob_by_diverse_count": dict(pol.hire_prob_by_diverse_count),
        }
    for flag, key in (("pool_size", "pool_size"), ("share", "diversity_share"), ("pools", "num_pools"), ("probs", "hire_prob_by_diverse_count")):
        value = getattr(args, flag)
        if value is not None:
            base[key] = value
    missing = [f for f, k in (("--pool-size", "pool_size"), ("--share", "diversity_share"), ("--pools", "num_pools")) if k not in base]
    if missing:
        parser.error(f"pool needs {', '.join(missing)} (or a --policy file)")
    try:
        return PoolPolicy(**base)
    except PolicyError as exc:
        parser.error(str(exc))


def cmd_pool(args, parser) -> int:
    policy = _policy(args, parser)
    exact = diverse_hire_rate(policy)
    mc = hire_rate_monte_carlo(policy, seed=args.seed, trials=args.trials, jobs=args.jobs)
    d = 3 + args.precision
    print(f"exact={_fixed(exact, d)}")
    print(f"monte_carlo={_fixed(mc.mean, d + 1)} ± {_fixed(mc.stderr, d + 1)} (trials={mc.trials}, seed={args.seed})")
    print(f"gap={_fixed(gap_to_nominal(policy), d)}")
    return EXIT_OK


def _report_artifacts(ds: DatasetFile, args) -> list[tuple[str, bytes]]:
    band = ds.meta.band.band
    report = gap_report(ds.rates, ds.population, epsilon=args.epsilon, band=band)
    out = []
    for fmt in FORMATS:
        out.append((artifact_name(band.value, "all", "table", EXTENSIONS[fmt]), render_gap_table(report, fmt, args.precision)))
    out.append((artifact_name(band.value, "all", "chart", "svg"), render_supply_chart(report)))
    for view in SUBGROUP_VIEWS:
        sub = gap_report(ds.rates, ds.population, epsilon=args.epsilon, band=band, views=(view,))
        out.append((artifact_name(band.value, view.value, "table", "csv"), render_gap_table(sub, "csv", args.precision)))
        out.append((artifact_name(band.value, view.value, "chart", "svg"), render_supply_chart(sub)))
    out.append((artifact_name(band.value, "all", "demographics", "txt"), render_demographics(ds.population, "text", args.precision)))
    return out


def cmd_report(args) -> int:
    datasets = [_load(s) for s in args.datasets]
    for ds, spec in zip(datasets, args.datasets):
        _require_rates(ds, spec)
    if args.jobs > 1 and len(datasets) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            batches = list(pool.map(lambda d: _report_artifacts(d, args), datasets))
    else:
        batches = [_report_artifacts(d, args) for d in datasets]
    files = [item for batch in batches for item in batch]
    if len(datasets) > 1:
        files.append(("combined-all-demographics.txt", render_demographics(combine(datasets), "text", args.precision)))
    for name, data in files:
        print(_write(args.out, name, data))
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "gap":
            return cmd_gap(args)
        if args.command == "project":
            return cmd_project(args)
        if args.command == "pool":
            return cmd_pool(args, parser)
        return cmd_report(args)
    except ParseError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DATA
    except (LeadSupplyError, OSError, ValueError) as exc:
        print(f"leadsupply: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
