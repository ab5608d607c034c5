"""Command-line surface.

Subcommands: eval, sweep, tables, plot, simulate. Exit codes: 0 success,
2 validation failure, 3 degenerate scenario, 4 I/O failure. All commands
are deterministic given their inputs (plus the seed, for simulate).
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, figures, mc, sweep
from .classify import CheckResult, SubcaseRow
from .errors import (
    ConfigError,
    ConstantPolicy,
    DegenerateScenario,
    OpmDeployError,
)
from .report import DeploymentReport, evaluate_scenario
from .scenario import OutcomePolarity, ScenarioParams, parse_polarity

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4

_CONFIG_KEYS = ("p_x", "pi0", "beta0", "beta_x", "beta_t", "beta_xt", "polarity")


def _tool_stamp() -> dict:
    return {"name": "opmdeploy", "version": __version__}


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: not valid JSON ({exc})"]) from None


def _scenario_from_args(args) -> tuple[ScenarioParams, float | None, dict]:
    raw = {}
    if args.config:
        loaded = _load_json(args.config)
        if not isinstance(loaded, dict):
            raise ConfigError([f"{args.config}: expected a JSON object"])
        raw.update(loaded)
    for key in _CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    if getattr(args, "lam", None) is not None:
        raw["lambda"] = args.lam

    missing = [k for k in _CONFIG_KEYS if k not in raw]
    if missing:
        raise ConfigError([f"{k}: missing" for k in missing])
    unknown = sorted(set(raw) - set(_CONFIG_KEYS) - {"lambda"})
    if unknown:
        raise ConfigError([f"{k}: unknown config key" for k in unknown])

    params = ScenarioParams(
        p_x=raw["p_x"],
        pi0=raw["pi0"],
        beta0=raw["beta0"],
        beta_x=raw["beta_x"],
        beta_t=raw["beta_t"],
        beta_xt=raw["beta_xt"],
        polarity=parse_polarity(raw["polarity"]),
    )
    lam = raw.get("lambda")
    if lam is not None and not isinstance(lam, (int, float)):
        raise ConfigError([f"lambda: must be a real number, got {lam!r}"])
    return params, (None if lam is None else float(lam)), raw


def _load_grid(source: str) -> sweep.GridSpec:
    if source == "default":
        return sweep.default_grid()
    raw = _load_json(source)
    if not isinstance(raw, dict):
        raise ConfigError([f"{source}: expected a JSON object"])
    expected = {
        "p_x_values", "pi0_values", "beta0_values", "beta_x_values",
        "beta_t_values", "beta_xt_values", "polarities",
    }
    missing = sorted(expected - set(raw))
    if missing:
        raise ConfigError([f"{k}: missing" for k in missing])
    try:
        polarities = tuple(parse_polarity(p) for p in raw["polarities"])
    except TypeError:
        raise ConfigError(["polarities: expected a list"]) from None
    return sweep.GridSpec(
        p_x_values=raw["p_x_values"],
        pi0_values=raw["pi0_values"],
        beta0_values=raw["beta0_values"],
        beta_x_values=raw["beta_x_values"],
        beta_t_values=raw["beta_t_values"],
        beta_xt_values=raw["beta_xt_values"],
        polarities=polarities,
    )


def _grid_echo(grid: sweep.GridSpec) -> dict:
    return {
        "p_x_values": list(grid.p_x_values),
        "pi0_values": list(grid.pi0_values),
        "beta0_values": list(grid.beta0_values),
        "beta_x_values": list(grid.beta_x_values),
        "beta_t_values": list(grid.beta_t_values),
        "beta_xt_values": list(grid.beta_xt_values),
        "polarities": [p.value for p in grid.polarities],
    }


def _records_from_args(args) -> tuple[list[sweep.ScenarioRecord], dict]:
    if getattr(args, "csv", None):
        records = sweep.read_records_csv(args.csv)
        source = {"csv": str(args.csv)}
    else:
        grid = _load_grid(args.grid)
        records = sweep.run_sweep(grid)
        source = {"grid": _grid_echo(grid)}
    return records, source


# ---------------------------------------------------------------------------
# eval


def _check_to_json(check) -> dict:
    if isinstance(check, CheckResult):
        return {"status": check.status.value, "detail": check.detail}
    if isinstance(check, SubcaseRow):
        return {
            "changed_group": check.changed_group,
            "pi0": check.pi0,
            "direction": check.direction,
            "expected_self_fulfilling": check.expected_self_fulfilling,
            "observed_self_fulfilling": check.observed_self_fulfilling,
            "consistent": check.consistent,
        }
    raise TypeError(type(check))


def _dist_block(report: DeploymentReport, which: str) -> dict:
    dist = report.pre if which == "pre" else report.post
    disc = (
        report.discrimination_pre if which == "pre" else report.discrimination_post
    )
    return {
        "mu": list(dist.mu),
        "p_y1": dist.p_y1,
        "sens": disc.sens,
        "spec": disc.spec,
        "auc": disc.auc,
    }


def _calibration_block(calib) -> dict:
    return {
        "levels": [
            {"alpha": l.alpha, "conditional_mean": l.conditional_mean, "mass": l.mass}
            for l in calib.levels
        ],
        "max_gap": calib.max_gap,
        "is_calibrated": calib.is_calibrated,
    }


def report_to_json(report: DeploymentReport, config_echo: dict) -> dict:
    return {
        "tool": _tool_stamp(),
        "config": config_echo,
        "potential_outcomes": {
            "q": [list(row) for row in report.po.q],
            "cate": list(report.po.cate),
        },
        "opm": {"f": list(report.opm.f), "lambda": report.opm.lam},
        "policies": {
            "historic": list(report.policy_pre.assign),
            "deployed": list(report.policy_post.assign),
        },
        "pre": _dist_block(report, "pre"),
        "post": _dist_block(report, "post"),
        "auc_delta": report.auc_delta,
        "auc_sign": report.auc_sign,
        "self_fulfilling": report.self_fulfilling,
        "calibration": {
            "pre": _calibration_block(report.calibration_pre),
            "post": _calibration_block(report.calibration_post),
        },
        "harm": {
            "outcome_shift": list(report.harm.outcome_shift),
            "changed_group": report.harm.changed_group,
            "harmful_group": list(report.harm.harmful_group),
            "harmful_marginal": report.harm.harmful_marginal,
        },
        "verdict": report.verdict.value,
        "sign_verdict": report.sign_verdict.value,
        "checks": {name: _check_to_json(c) for name, c in report.checks().items()},
    }


def _print_report(report: DeploymentReport) -> None:
    p = report.params
    q = report.po.q
    print(f"scenario: p_x={p.p_x!r} pi0={p.pi0} polarity={p.polarity.value}")
    print(
        f"  betas: beta0={p.beta0!r} beta_x={p.beta_x!r} "
        f"beta_t={p.beta_t!r} beta_xt={p.beta_xt!r}"
    )
    print("potential outcomes p(Y_t=1|X=x):")
    for t in (0, 1):
        print(f"  t={t}: x=0 {q[t][0]:.6f}   x=1 {q[t][1]:.6f}")
    print(f"  effect per group: x=0 {report.po.cate[0]:+.6f}   x=1 {report.po.cate[1]:+.6f}")
    print(f"fitted predictor: f=({report.opm.f[0]:.6f}, {report.opm.f[1]:.6f})  lambda={report.opm.lam:.6f}")
    print(f"policies: historic={report.policy_pre.assign}  deployed={report.policy_post.assign}")
    for which, dist, disc in (
        ("pre ", report.pre, report.discrimination_pre),
        ("post", report.post, report.discrimination_post),
    ):
        print(
            f"{which}: mu=({dist.mu[0]:.6f}, {dist.mu[1]:.6f})  p(Y=1)={dist.p_y1:.6f}"
            f"  sens={disc.sens:.6f} spec={disc.spec:.6f} auc={disc.auc:.6f}"
        )
    print(
        f"auc_delta={report.auc_delta:+.6f} (sign {report.auc_sign:+d})  "
        f"self_fulfilling={str(report.self_fulfilling).lower()}"
    )
    print(
        f"calibration: pre max_gap={report.calibration_pre.max_gap:.3e} "
        f"({'yes' if report.calibration_pre.is_calibrated else 'no'})  "
        f"post max_gap={report.calibration_post.max_gap:.3e} "
        f"({'yes' if report.calibration_post.is_calibrated else 'no'})"
    )
    harm = report.harm
    print(
        f"harm: shift=({harm.outcome_shift[0]:+.6f}, {harm.outcome_shift[1]:+.6f})  "
        f"changed_group={harm.changed_group}  harmful_group={list(harm.harmful_group)}  "
        f"marginal={str(harm.harmful_marginal).lower()}"
    )
    print(f"verdict: {report.verdict.value}  (sign lookup: {report.sign_verdict.value})")
    for name, check in report.checks().items():
        if isinstance(check, CheckResult):
            print(f"check {name}: {check.status.value}  {check.detail}")
        else:
            print(
                f"check {name}: changed_group={check.changed_group} "
                f"direction={check.direction!r} expected_sf={check.expected_self_fulfilling} "
                f"consistent={check.consistent}"
            )


def cmd_eval(args) -> int:
    params, lam, raw = _scenario_from_args(args)
    report = evaluate_scenario(params, lam)
    _print_report(report)
    if args.out:
        payload = report_to_json(report, raw)
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def _sweep_manifest(grid: sweep.GridSpec, records) -> dict:
    removed = grid.cardinality - len(records)
    sign_table = sweep.aggregate_sign_table(records)
    return {
        "tool": _tool_stamp(),
        "grid": _grid_echo(grid),
        "counts": {
            "cardinality": grid.cardinality,
            "removed_degenerate": removed,
            "retained": len(records),
        },
        "reference_delta": sweep.reference_delta(sign_table, len(records)),
        "timestamp": _timestamp(),
    }


def cmd_sweep(args) -> int:
    grid = _load_grid(args.grid)
    records = sweep.run_sweep(grid)
    sweep.write_records_csv(records, args.out)
    manifest = _sweep_manifest(grid, records)
    manifest_path = str(args.out) + ".manifest.json"
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    c = manifest["counts"]
    print(
        f"grid settings: {c['cardinality']}  removed: {c['removed_degenerate']}  "
        f"retained: {c['retained']}"
    )
    print(f"wrote {args.out}")
    print(f"wrote {manifest_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# tables


def _sign_table_lines(table) -> list[str]:
    lines = ["sign(beta_t)  sign(beta_t+beta_xt)  self_fulfilling(N)  not_self_fulfilling(N)"]
    for (sbt, sbtx), (sf, nsf) in table.items():
        lines.append(f"{sbt:>11d}  {sbtx:>20d}  {sf:>18d}  {nsf:>22d}")
    return lines


def _harm_table_lines(table) -> list[str]:
    polarity_word = {
        OutcomePolarity.UNDESIRABLE: "worse",
        OutcomePolarity.DESIRABLE: "better",
    }
    lines = ["higher_y_is  pi0  self_fulfilling  n     harmful_fraction"]
    for (pol, pi0, sf), (harmed, total) in table.items():
        frac = "" if total == 0 else repr(harmed / total)
        lines.append(
            f"{polarity_word[pol]:<11s}  {pi0:<3d}  {str(sf).lower():<15s}  "
            f"{total:<4d}  {frac}"
        )
    return lines


def _delta_lines(delta: dict) -> list[str]:
    lines = [
        "reference tabulation cross-check:",
        f"  retained here: {delta['retained']}   reference total: "
        f"{delta['reference_total']}   count delta: {delta['count_delta']}",
        f"  cell count differences after orientation swap: "
        f"{delta['cell_deltas_after_orientation_swap'] or 'none'}",
        f"  note: {delta['orientation_note']}",
    ]
    return lines


def cmd_tables(args) -> int:
    records, source = _records_from_args(args)
    sign_table = sweep.aggregate_sign_table(records)
    harm_table = sweep.aggregate_harm_table(records)
    delta = sweep.reference_delta(sign_table, len(records))

    print("\n".join(_sign_table_lines(sign_table)))
    print()
    print("\n".join(_harm_table_lines(harm_table)))
    print()
    print("\n".join(_delta_lines(delta)))

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sign_table.csv", "w", newline="") as fh:
            fh.write("sign_bt,sign_bt_plus_bxt,self_fulfilling_n,not_self_fulfilling_n\n")
            for (sbt, sbtx), (sf, nsf) in sign_table.items():
                fh.write(f"{sbt},{sbtx},{sf},{nsf}\n")
        polarity_word = {
            OutcomePolarity.UNDESIRABLE: "worse",
            OutcomePolarity.DESIRABLE: "better",
        }
        with open(out / "harm_table.csv", "w", newline="") as fh:
            fh.write("higher_y_is,pi0,self_fulfilling,n,harmful_fraction\n")
            for (pol, pi0, sf), (harmed, total) in harm_table.items():
                frac = "" if total == 0 else repr(harmed / total)
                fh.write(
                    f"{polarity_word[pol]},{pi0},{str(sf).lower()},{total},{frac}\n"
                )
        manifest = {
            "tool": _tool_stamp(),
            "source": source,
            "reference_delta": delta,
            "timestamp": _timestamp(),
        }
        with open(out / "tables_manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
        print(f"\nwrote {out / 'sign_table.csv'}, {out / 'harm_table.csv'}, "
              f"{out / 'tables_manifest.json'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# plot


def cmd_plot(args) -> int:
    records, source = _records_from_args(args)
    if args.subset == "avg-beneficial":
        records = sweep.filter_avg_beneficial(records)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def manifest(name: str, subset: str) -> dict:
        return {
            "tool": _tool_stamp(),
            "figure": name,
            "source": source,
            "subset": subset,
            "points": None,  # filled per figure below
        }

    beneficial = sweep.filter_avg_beneficial(records)
    jobs = [
        (
            "fig-bt-vs-diff.svg",
            beneficial,
            "beta_t",
            "beta_xt",
            "treatment odds ratio exp(beta_t)",
            "exp(beta_xt)",
            "AUC change after deployment (treatment beneficial on average)",
        ),
        (
            "fig-bt-vs-diff-all.svg",
            records,
            "beta_t",
            "beta_xt",
            "treatment odds ratio exp(beta_t)",
            "exp(beta_xt)",
            "AUC change after deployment (all settings)",
        ),
        (
            "fig-bxt-vs-diff.svg",
            beneficial,
            "beta_xt",
            "beta_t",
            "interaction odds ratio exp(beta_xt)",
            "exp(beta_t)",
            "AUC change vs effect heterogeneity (treatment beneficial on average)",
        ),
    ]
    written = []
    for name, recs, x_field, c_field, x_label, c_label, title in jobs:
        m = manifest(name, "avg-beneficial" if recs is beneficial else args.subset)
        m["points"] = len(recs)
        svg = figures.odds_ratio_panels(
            recs, x_field, c_field, x_label, c_label, title, m
        )
        with open(out / name, "w") as fh:
            fh.write(svg)
        written.append(name)

    m = manifest("fig-auc-pre-vs-diff.svg", args.subset)
    m["points"] = len(records)
    svg = figures.auc_pre_panel(
        records, "Discrimination before deployment vs change after", m
    )
    with open(out / "fig-auc-pre-vs-diff.svg", "w") as fh:
        fh.write(svg)
    written.append("fig-auc-pre-vs-diff.svg")

    for name in written:
        print(f"wrote {out / name}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def _empirical_block(m: mc.EmpiricalMetrics) -> dict:
    return {
        "mu_hat": list(m.mu_hat),
        "sens_hat": m.sens_hat,
        "spec_hat": m.spec_hat,
        "auc_hat": m.auc_hat,
        "n_pos": m.n_pos,
        "n_neg": m.n_neg,
        "insufficient_cases": m.insufficient_cases,
    }


def _abs_err(a, b):
    if a is None or b is None:
        return None
    return abs(a - b)


def cmd_simulate(args) -> int:
    params, lam, raw = _scenario_from_args(args)
    report = evaluate_scenario(params, lam)
    cfg = mc.McConfig(
        n_samples=args.samples,
        master_seed=args.seed,
        scenario_index=args.scenario_index,
    )
    blocks = {}
    for which, policy, dist, disc in (
        ("pre", report.policy_pre, report.pre, report.discrimination_pre),
        ("post", report.policy_post, report.post, report.discrimination_post),
    ):
        table = mc.sample(params, policy, cfg)
        emp = mc.empirical_metrics(table, report.opm)
        if args.dump_samples:
            path = f"{args.dump_samples}.{which}.csv"
            mc.write_sample_csv(table, path)
            print(f"wrote {path}")
            dump_manifest = {
                "tool": _tool_stamp(),
                "config": raw,
                "policy": list(policy.assign),
                "mc": {
                    "n_samples": cfg.n_samples,
                    "master_seed": cfg.master_seed,
                    "scenario_index": cfg.scenario_index,
                },
            }
            with open(f"{args.dump_samples}.{which}.manifest.json", "w") as fh:
                json.dump(dump_manifest, fh, indent=2)
                fh.write("\n")
        blocks[which] = {
            "closed_form": {
                "mu": list(dist.mu),
                "p_y1": dist.p_y1,
                "sens": disc.sens,
                "spec": disc.spec,
                "auc": disc.auc,
            },
            "empirical": _empirical_block(emp),
            "agreement": {
                "mu0_abs_err": _abs_err(emp.mu_hat[0], dist.mu[0]),
                "mu1_abs_err": _abs_err(emp.mu_hat[1], dist.mu[1]),
                "sens_abs_err": _abs_err(emp.sens_hat, disc.sens),
                "spec_abs_err": _abs_err(emp.spec_hat, disc.spec),
                "auc_abs_err": _abs_err(emp.auc_hat, disc.auc),
            },
        }

    auc_hats = (blocks["pre"]["empirical"]["auc_hat"],
                blocks["post"]["empirical"]["auc_hat"])
    payload = {
        "tool": _tool_stamp(),
        "config": raw,
        "mc": {
            "n_samples": cfg.n_samples,
            "master_seed": cfg.master_seed,
            "scenario_index": cfg.scenario_index,
        },
        "pre": blocks["pre"],
        "post": blocks["post"],
        "auc_delta": {
            "closed_form": report.auc_delta,
            "empirical": (
                None if None in auc_hats else auc_hats[1] - auc_hats[0]
            ),
        },
        "self_fulfilling": report.self_fulfilling,
        "harmful_marginal": report.harm.harmful_marginal,
    }
    text = json.dumps(payload, indent=2)
    print(text)
    for which in ("pre", "post"):
        if blocks[which]["empirical"]["insufficient_cases"]:
            print(
                f"note: {which} sample is missing an outcome class; "
                "rank metrics unavailable (insufficient cases)",
                file=sys.stderr,
            )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
            fh.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_scenario_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON scenario config path")
    parser.add_argument("--p-x", dest="p_x", type=float, help="p(X=1)")
    parser.add_argument("--pi0", type=int, help="historic assignment, 0 or 1")
    parser.add_argument("--beta0", type=float, help="log-odds intercept")
    parser.add_argument("--beta-x", dest="beta_x", type=float, help="log-odds for X")
    parser.add_argument("--beta-t", dest="beta_t", type=float, help="log-odds for T")
    parser.add_argument(
        "--beta-xt", dest="beta_xt", type=float, help="log-odds for the X:T interaction"
    )
    parser.add_argument("--polarity", help="desirable | undesirable")
    parser.add_argument(
        "--lambda", dest="lam", type=float,
        help="decision threshold override (default: midpoint of fitted values)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opmdeploy",
        description=(
            "Closed-form analysis of an outcome prediction model deployed as "
            "a treatment policy: discrimination and calibration before and "
            "after deployment, harm classification, the full grid experiment, "
            "and a seeded Monte Carlo cross-check."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate one scenario end to end")
    _add_scenario_arguments(p)
    p.add_argument("--out", help="also write the report as JSON to this path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="run a parameter grid, write records CSV")
    p.add_argument("--grid", default="default", help="'default' or a JSON grid path")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tables", help="aggregate sign and harm tables")
    p.add_argument("--csv", help="existing sweep CSV (otherwise runs the grid)")
    p.add_argument("--grid", default="default", help="'default' or a JSON grid path")
    p.add_argument("--out", help="directory for table CSVs and manifest")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("plot", help="emit SVG figures from sweep records")
    p.add_argument("--csv", help="existing sweep CSV (otherwise runs the grid)")
    p.add_argument("--grid", default="default", help="'default' or a JSON grid path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--subset", choices=("all", "avg-beneficial"), default="all",
        help="restrict every figure to this subset first (default: all)",
    )
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser(
        "simulate", help="Monte Carlo sample a scenario, compare with closed form"
    )
    _add_scenario_arguments(p)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--samples", type=int, default=100_000, help="patients to draw")
    p.add_argument(
        "--scenario-index", type=int, default=0,
        help="substream index (parallel runs use distinct indices)",
    )
    p.add_argument("--out", help="also write the comparison report JSON here")
    p.add_argument(
        "--dump-samples", help="write drawn samples to PREFIX.pre.csv / PREFIX.post.csv"
    )
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DegenerateScenario, ConstantPolicy) as exc:
        print(f"degenerate scenario: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OpmDeployError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
