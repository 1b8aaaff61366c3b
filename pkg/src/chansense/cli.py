"""Command-line surface: eval, solve, sweep, simulate, and asymptote.

Every subcommand is a thin adapter over the library: it loads a YAML
run configuration, calls the corresponding module, and serializes the
results as CSV (and optionally SVG). No numeric logic lives here.

Exit codes: 0 success (infeasible results are data, not failure),
2 config/parse error, 3 invariant violation, 4 internal numeric
failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

from . import asymptotics, montecarlo, plotting, solvers
from .config import ConfigError, RunConfig, format_number, load_config, scheme_name
from .core import DomainError, ReliabilityTarget, ScenarioParams, watts_to_dbm
from .schemes import (
    AdaSenseConfig,
    BmacConfig,
    PerfReport,
    SinglePhaseConfig,
    eval_adasense,
    eval_bmac,
    eval_single_phase,
)

SWEEP_COLUMNS = (
    "n",
    "P_dbm",
    "p1",
    "alpha",
    "beta",
    "scheme",
    "feasible",
    "l1",
    "l2",
    "p_r1_w",
    "p_r2_w",
    "eta1",
    "eta2",
    "p_fa",
    "p_miss",
    "energy_wsamples",
    "p_continue",
    "savings_vs_bmac_pct",
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_NUMERIC = 4


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _config_fields(cfg: Any) -> dict[str, Any]:
    """Map a scheme config onto the shared CSV columns. Single-stage
    schemes occupy the phase-1 slots; phase-2 cells stay absent."""
    if cfg is None:
        return {}
    if isinstance(cfg, AdaSenseConfig):
        return {
            "l1": cfg.l1,
            "l2": cfg.l2,
            "p_r1_w": cfg.p_r1,
            "p_r2_w": cfg.p_r2,
            "eta1": cfg.eta1,
            "eta2": cfg.eta2,
        }
    return {
        "l1": cfg.n,
        "p_r1_w": cfg.receiver_power_watts,
        "eta1": cfg.threshold,
    }


def _sweep_row(row: dict[str, Any]) -> list[str]:
    scenario: ScenarioParams = row["scenario"]
    target: ReliabilityTarget = row["target"]
    result: solvers.OptimizationResult = row["result"]
    report: PerfReport | None = result.report
    cells: dict[str, Any] = {
        "n": scenario.preamble_len,
        "P_dbm": watts_to_dbm(scenario.received_power_watts),
        "p1": scenario.prior_p1,
        "alpha": target.alpha,
        "beta": target.beta,
        "scheme": row["scheme"],
        "feasible": result.feasible,
    }
    if result.feasible:
        cells.update(_config_fields(result.config))
        cells["p_fa"] = report.p_fa
        cells["p_miss"] = report.p_miss
        cells["energy_wsamples"] = result.objective_energy
        cells["p_continue"] = report.p_continue
    cells["savings_vs_bmac_pct"] = row.get("savings_vs_bmac_pct")
    return [
        cells["scheme"] if col == "scheme" else format_number(cells.get(col))
        for col in SWEEP_COLUMNS
    ]


def _report_lines(report: PerfReport, energy_label: str = "energy_wsamples") -> list[str]:
    pairs = [
        ("p_fa", report.p_fa),
        ("p_miss", report.p_miss),
        (energy_label, report.energy),
        ("log_p_fa", report.log_p_fa),
        ("log_p_miss", report.log_p_miss),
    ]
    if report.p_continue is not None:
        pairs.append(("p_continue", report.p_continue))
    width = max(len(k) for k, _ in pairs)
    return [f"{k.ljust(width)}  {format_number(v)}" for k, v in pairs]


def _evaluate(cfg: Any, scenario: ScenarioParams, profile: Any) -> PerfReport:
    if isinstance(cfg, SinglePhaseConfig):
        return eval_single_phase(cfg, scenario, profile)
    if isinstance(cfg, BmacConfig):
        return eval_bmac(cfg, scenario, profile)
    return eval_adasense(cfg, scenario, profile)


def cmd_eval(run: RunConfig, quiet: bool) -> int:
    if run.scheme_config is None:
        raise ConfigError("eval: config must provide a scheme_config block")
    scenario = run.scenarios[0]
    report = _evaluate(run.scheme_config, scenario, run.profile)
    if not quiet:
        print(f"scheme: {scheme_name(run.scheme_config)}")
        for line in _report_lines(report):
            print(line)
    if "csv" in run.output.formats:
        row = {
            "n": scenario.preamble_len,
            "P_dbm": watts_to_dbm(scenario.received_power_watts),
            "p1": scenario.prior_p1,
            "scheme": scheme_name(run.scheme_config),
            "feasible": True,
            "p_fa": report.p_fa,
            "p_miss": report.p_miss,
            "energy_wsamples": report.energy,
            "p_continue": report.p_continue,
        }
        row.update(_config_fields(run.scheme_config))
        _write_csv(
            run.output.directory / "eval.csv",
            SWEEP_COLUMNS,
            [[
                row.get("scheme") if col == "scheme" else format_number(row.get(col))
                for col in SWEEP_COLUMNS
            ]],
        )
    return EXIT_OK


def cmd_solve(run: RunConfig, quiet: bool) -> int:
    rows = solvers.sweep(run.scenarios, run.profile, run.targets, run.schemes)
    csv_rows = [_sweep_row(row) for row in rows]
    if "csv" in run.output.formats:
        _write_csv(run.output.directory / "solve.csv", SWEEP_COLUMNS, csv_rows)
    if not quiet:
        for row in rows:
            result = row["result"]
            energy = format_number(result.objective_energy) if result.feasible else "infeasible"
            print(f"{row['scheme']}: {energy}")
    return EXIT_OK


def _panel_key(row: dict[str, Any]) -> tuple[int, float, float]:
    scenario: ScenarioParams = row["scenario"]
    return (
        scenario.preamble_len,
        scenario.received_power_watts,
        row["target"].alpha,
    )


def _panel_name(key: tuple[int, float, float]) -> str:
    n, power, alpha = key
    return f"sweep_n{n}_{watts_to_dbm(power):g}dBm_alpha{alpha:g}"


def cmd_sweep(run: RunConfig, quiet: bool) -> int:
    rows = solvers.sweep(run.scenarios, run.profile, run.targets, run.schemes)
    panels: dict[tuple[int, float, float], list[dict[str, Any]]] = {}
    for row in rows:
        panels.setdefault(_panel_key(row), []).append(row)
    for key, panel_rows in panels.items():
        name = _panel_name(key)
        if "csv" in run.output.formats:
            _write_csv(
                run.output.directory / f"{name}.csv",
                SWEEP_COLUMNS,
                [_sweep_row(row) for row in panel_rows],
            )
        if "svg" in run.output.formats:
            series: dict[str, tuple[list[float], list[float]]] = {}
            for row in panel_rows:
                result = row["result"]
                if not result.feasible:
                    continue
                betas, energies = series.setdefault(row["scheme"], ([], []))
                betas.append(row["target"].beta)
                energies.append(result.objective_energy)
            n, power, alpha = key
            title = f"n={n}, P={watts_to_dbm(power):g} dBm, alpha={alpha:g}"
            plotting.render_energy_panel(
                series, title, run.output.directory / f"{name}.svg"
            )
        if not quiet:
            print(f"panel {name}: {len(panel_rows)} rows")
    return EXIT_OK


def cmd_simulate(run: RunConfig, quiet: bool) -> int:
    if run.scheme_config is None:
        raise ConfigError("simulate: config must provide a scheme_config block")
    scenario = run.scenarios[0]
    report = _evaluate(run.scheme_config, scenario, run.profile)
    if min(report.p_fa, report.p_miss) < 1e-4 and not quiet:
        print(
            "warning: closed-form probabilities below 1e-4; "
            "Monte-Carlo comparison will be noisy",
            file=sys.stderr,
        )
    settings = montecarlo.McSettings(
        trials_per_hypothesis=run.mc_trials, seed=run.mc_seed
    )
    est = montecarlo.estimate(run.scheme_config, scenario, run.profile, settings)
    quantities = [
        ("p_fa", est.p_fa_hat, est.p_fa_se, report.p_fa),
        ("p_miss", est.p_miss_hat, est.p_miss_se, report.p_miss),
        ("mixed_energy_wsamples", est.mixed_energy_hat, est.mixed_energy_se, report.energy),
    ]
    if est.p_continue_hat is not None:
        quantities.append(
            ("p_continue", est.p_continue_hat, est.p_continue_se, report.p_continue)
        )
    rows = []
    for name, hat, se, closed in quantities:
        within = bool(abs(hat - closed) <= 3.0 * se)
        rows.append(
            [
                name,
                format_number(hat),
                format_number(se),
                format_number(closed),
                format_number(within),
            ]
        )
        if not quiet:
            print(f"{name}: hat={hat:.6e} se={se:.3e} closed={closed:.6e} ok={within}")
    if "csv" in run.output.formats:
        _write_csv(
            run.output.directory / "simulate.csv",
            ("quantity", "estimate", "standard_error", "closed_form", "within_3_se"),
            rows,
        )
    return EXIT_OK


def cmd_asymptote(run: RunConfig, quiet: bool) -> int:
    settings = run.asymptote
    scenario = run.scenarios[0]
    power = scenario.received_power_watts
    out = run.output.directory
    want_csv = "csv" in run.output.formats
    want_svg = "svg" in run.output.formats

    fit = asymptotics.check_single_phase_slope(
        run.profile, power, settings.p_r, settings.beta, settings.alphas
    )
    if want_csv:
        _write_csv(
            out / "asymptote_slope_points.csv",
            ("alpha", "energy_wsamples"),
            [
                [format_number(a), format_number(e)]
                for a, e in zip(fit.alphas, fit.energies)
            ],
        )
        _write_csv(
            out / "asymptote_slope_fit.csv",
            ("fitted_slope", "fitted_intercept", "r_squared", "reference_slope", "slope_ratio"),
            [[
                format_number(fit.fitted_slope),
                format_number(fit.fitted_intercept),
                format_number(fit.r_squared),
                format_number(fit.reference_slope),
                format_number(fit.slope_ratio),
            ]],
        )
    if want_svg:
        xs = [math.log(1.0 / a) for a in fit.alphas]
        plotting.render_line(
            xs,
            {"single-phase": list(fit.energies)},
            "ln(1/alpha)",
            "energy (W·samples)",
            "single-phase energy scaling",
            out / "asymptote_slope.svg",
        )

    ratios = asymptotics.check_bmac_lower_bound(
        run.profile, scenario, settings.beta, settings.alphas
    )
    if want_csv:
        _write_csv(
            out / "asymptote_bmac_bound.csv",
            ("alpha", "exact_energy", "bound", "ratio", "feasible"),
            [
                [
                    format_number(r.alpha),
                    format_number(r.exact_energy),
                    format_number(r.bound),
                    format_number(r.ratio),
                    format_number(r.feasible),
                ]
                for r in ratios
            ],
        )
    if want_svg:
        feasible = [r for r in ratios if r.feasible]
        plotting.render_line(
            [r.alpha for r in feasible],
            {"energy/bound": [r.ratio for r in feasible]},
            "alpha",
            "exact energy / asymptotic bound",
            "sequential-scheme bound ratio",
            out / "asymptote_bmac_bound.svg",
            logx=True,
        )

    points = asymptotics.check_adasense_sparsity(
        run.profile,
        power,
        settings.sparsity_beta,
        settings.sparsity_alpha,
        settings.p1s,
        preamble_len=scenario.preamble_len,
    )
    if want_csv:
        _write_csv(
            out / "asymptote_sparsity.csv",
            ("p1", "optimal_energy_wsamples", "p_continue", "feasible"),
            [
                [
                    format_number(p.p1),
                    format_number(p.optimal_energy),
                    format_number(p.p_continue),
                    format_number(p.feasible),
                ]
                for p in points
            ],
        )
    if want_svg:
        feas = [p for p in points if p.feasible]
        plotting.render_line(
            [p.p1 for p in feas],
            {"adasense optimum": [p.optimal_energy for p in feas]},
            "prior p1",
            "optimal energy (W·samples)",
            "two-phase optimum vs sparsity",
            out / "asymptote_sparsity.svg",
            logx=True,
        )
    if not quiet:
        print(f"slope_ratio={fit.slope_ratio:.4f} r2={fit.r_squared:.5f}")
        print(f"bound ratios: {[round(r.ratio, 3) for r in ratios if r.feasible]}")
        print(f"sparsity energies: {[format_number(p.optimal_energy) for p in points]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chansense",
        description="Energy modeling of channel-sensing schemes",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("eval", "solve", "sweep", "simulate", "asymptote"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="YAML run configuration")
        cmd.add_argument("--out", default=None, help="output directory override")
        cmd.add_argument(
            "--format", default=None, help="comma-separated subset of csv,svg"
        )
        cmd.add_argument("--seed", type=int, default=None, help="Monte-Carlo seed override")
        cmd.add_argument("--threads", type=int, default=1, help="worker count (results are thread-count invariant)")
        cmd.add_argument("--quiet", action="store_true")
    return parser


def _apply_overrides(run: RunConfig, args: argparse.Namespace) -> RunConfig:
    output = run.output
    if args.out is not None:
        output = replace(output, directory=Path(args.out))
    if args.format is not None:
        wanted = [f.strip() for f in args.format.split(",") if f.strip()]
        bad = set(wanted) - {"csv", "svg"}
        if bad or not wanted:
            raise ConfigError(f"--format: unsupported formats {sorted(bad) or wanted}")
        output = replace(output, formats=tuple(f for f in ("csv", "svg") if f in wanted))
    run = replace(run, output=output)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed: must fit in an unsigned 64-bit integer")
        run = replace(run, mc_seed=args.seed)
    if args.threads < 1:
        raise ConfigError("--threads: must be >= 1")
    return run


_COMMANDS = {
    "eval": cmd_eval,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "asymptote": cmd_asymptote,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = _apply_overrides(load_config(args.config), args)
        return _COMMANDS[args.command](run, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (FloatingPointError, OverflowError, ZeroDivisionError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
