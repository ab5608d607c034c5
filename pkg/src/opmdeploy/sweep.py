"""The grid experiment: expand, filter, evaluate, aggregate.

The default grid crosses two X prevalences, both constant historic
policies, one intercept, five X effects, eleven treatment effects, eleven
interaction effects, and both outcome polarities: 4840 settings. Settings
whose historic conditionals coincide (a constant fitted predictor) are
removed structurally before evaluation.

Aggregations reproduce two published reference tables; where this tool's
structural filter and self-fulfilling orientation differ from the
reference tabulation, the delta is computed and surfaced, never hidden
(see `reference_delta`).
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, fields

from .classify import Verdict
from .errors import ConfigError, DegenerateScenario
from .report import DeploymentReport, evaluate_scenario
from .scenario import (
    EPS_EQ,
    OutcomePolarity,
    ScenarioParams,
    sign_with_band,
)

# Odds ratios behind the default grid's log-odds values.
_OR_STEPS = (1.1, 1.45, 1.8, 2.15, 2.5)


def _symmetric_log_odds() -> tuple[float, ...]:
    # Negations of the same float, not log(1/v): matched beta_x + beta_xt
    # pairs then cancel exactly and the degenerate filter is structural.
    down = tuple(-math.log(v) for v in reversed(_OR_STEPS))
    up = tuple(math.log(v) for v in _OR_STEPS)
    return down + (0.0,) + up


@dataclass(frozen=True)
class GridSpec:
    p_x_values: tuple[float, ...]
    pi0_values: tuple[int, ...]
    beta0_values: tuple[float, ...]
    beta_x_values: tuple[float, ...]
    beta_t_values: tuple[float, ...]
    beta_xt_values: tuple[float, ...]
    polarities: tuple[OutcomePolarity, ...]

    def __post_init__(self):
        problems = []
        for f in fields(self):
            values = getattr(self, f.name)
            object.__setattr__(self, f.name, tuple(values))
            if len(getattr(self, f.name)) == 0:
                problems.append(f"{f.name}: must be nonempty")
        if problems:
            raise ConfigError(problems)

    @property
    def cardinality(self) -> int:
        return (
            len(self.p_x_values)
            * len(self.pi0_values)
            * len(self.beta0_values)
            * len(self.beta_x_values)
            * len(self.beta_t_values)
            * len(self.beta_xt_values)
            * len(self.polarities)
        )


def default_grid() -> GridSpec:
    return GridSpec(
        p_x_values=(0.2, 0.5),
        pi0_values=(0, 1),
        beta0_values=(-0.5,),
        beta_x_values=tuple(math.log(v) for v in _OR_STEPS),
        beta_t_values=_symmetric_log_odds(),
        beta_xt_values=_symmetric_log_odds(),
        polarities=(OutcomePolarity.DESIRABLE, OutcomePolarity.UNDESIRABLE),
    )


def is_degenerate(pi0: int, beta_x: float, beta_xt: float) -> bool:
    """Historic conditionals coincide: mu0(0) = mu0(1).

    Under pi0=0 that is beta_x = 0; under pi0=1 it is beta_x + beta_xt = 0.
    Checked structurally on the coefficients (with a rounding band) rather
    than on logistic outputs, so grids built from ln(1/v) floats are still
    caught.
    """
    if pi0 == 0:
        return abs(beta_x) <= EPS_EQ
    return abs(beta_x + beta_xt) <= EPS_EQ


def expand_and_filter(grid: GridSpec) -> list[ScenarioParams]:
    """Cartesian product in the canonical order of the grid lists, minus
    degenerate settings."""
    out = []
    for p_x, pi0, b0, bx, bt, bxt, pol in itertools.product(
        grid.p_x_values,
        grid.pi0_values,
        grid.beta0_values,
        grid.beta_x_values,
        grid.beta_t_values,
        grid.beta_xt_values,
        grid.polarities,
    ):
        if is_degenerate(pi0, bx, bxt):
            continue
        out.append(
            ScenarioParams(
                p_x=p_x, pi0=pi0, beta0=b0, beta_x=bx, beta_t=bt,
                beta_xt=bxt, polarity=pol,
            )
        )
    return out


@dataclass(frozen=True)
class ScenarioRecord:
    """Flattened per-scenario sweep row; exactly the fields the aggregate
    tables and figures need."""

    p_x: float
    pi0: int
    beta0: float
    beta_x: float
    beta_t: float
    beta_xt: float
    polarity: OutcomePolarity
    cate0: float
    cate1: float
    auc_pre: float
    auc_post: float
    auc_delta: float
    self_fulfilling: bool
    sign_bt: int
    sign_bt_plus_bxt: int
    harmful_marginal: bool
    verdict: Verdict
    calibrated_post: bool
    avg_treatment_beneficial: bool


CSV_COLUMNS = tuple(f.name for f in fields(ScenarioRecord))


def record_from_report(report: DeploymentReport) -> ScenarioRecord:
    p = report.params
    cate = report.po.cate
    avg_effect = p.p_x * cate[1] + (1.0 - p.p_x) * cate[0]
    return ScenarioRecord(
        p_x=p.p_x,
        pi0=p.pi0,
        beta0=p.beta0,
        beta_x=p.beta_x,
        beta_t=p.beta_t,
        beta_xt=p.beta_xt,
        polarity=p.polarity,
        cate0=cate[0],
        cate1=cate[1],
        auc_pre=report.discrimination_pre.auc,
        auc_post=report.discrimination_post.auc,
        auc_delta=report.auc_delta,
        self_fulfilling=report.self_fulfilling,
        # Probability-scale per-group effect signs; by logistic monotonicity
        # these equal the signs of beta_t and beta_t + beta_xt.
        sign_bt=sign_with_band(p.beta_t),
        sign_bt_plus_bxt=sign_with_band(p.beta_t + p.beta_xt),
        harmful_marginal=report.harm.harmful_marginal,
        verdict=report.verdict,
        calibrated_post=report.calibration_post.is_calibrated,
        avg_treatment_beneficial=sign_with_band(
            p.polarity.favorable_sign * avg_effect
        )
        > 0,
    )


def run_sweep(grid: GridSpec) -> list[ScenarioRecord]:
    """Evaluate every retained scenario, in canonical order.

    Evaluations are independent (pure functions) and could run in parallel;
    the full default grid takes milliseconds sequentially, so this runs
    in-order and the output order is the expansion order by construction.
    Settings the structural filter keeps but whose fitted values still tie
    (possible only in hand-built grids with sub-band coefficients) are
    excluded, never raised.
    """
    records = []
    for params in expand_and_filter(grid):
        try:
            records.append(record_from_report(evaluate_scenario(params)))
        except DegenerateScenario:
            continue
    return records


SIGN_CELLS = tuple((a, b) for a in (-1, 0, 1) for b in (-1, 0, 1))


def aggregate_sign_table(
    records: list[ScenarioRecord],
) -> dict[tuple[int, int], tuple[int, int]]:
    """Counts of (self-fulfilling, not) per (sign beta_t, sign beta_t+beta_xt)."""
    sf = {cell: 0 for cell in SIGN_CELLS}
    nsf = {cell: 0 for cell in SIGN_CELLS}
    for r in records:
        cell = (r.sign_bt, r.sign_bt_plus_bxt)
        if r.self_fulfilling:
            sf[cell] += 1
        else:
            nsf[cell] += 1
    return {cell: (sf[cell], nsf[cell]) for cell in SIGN_CELLS}


HARM_ROWS = tuple(
    (pol, pi0, sf)
    for pol in (OutcomePolarity.UNDESIRABLE, OutcomePolarity.DESIRABLE)
    for pi0 in (0, 1)
    for sf in (True, False)
)


def aggregate_harm_table(
    records: list[ScenarioRecord],
) -> dict[tuple[OutcomePolarity, int, bool], tuple[int, int]]:
    """(harmful, total) counts per (polarity, pi0, self-fulfilling), with
    no-change scenarios excluded so each row is purely one orientation."""
    table = {row: (0, 0) for row in HARM_ROWS}
    for r in records:
        if r.verdict is Verdict.NO_CHANGE:
            continue
        key = (r.polarity, r.pi0, r.self_fulfilling)
        harmed, total = table[key]
        table[key] = (harmed + int(r.harmful_marginal), total + 1)
    return table


def filter_avg_beneficial(records: list[ScenarioRecord]) -> list[ScenarioRecord]:
    """Scenarios whose prevalence-weighted treatment effect is strictly
    favorable; the realistic subset (treatments reach the market only after
    demonstrating average benefit)."""
    return [r for r in records if r.avg_treatment_beneficial]


# ---------------------------------------------------------------------------
# Cross-check against the published reference tabulation of this experiment.

# Reference sign-table counts as printed: columns (self-fulfilling, not).
REFERENCE_SIGN_TABLE = {
    (-1, -1): (1508, 0),
    (-1, 0): (100, 100),
    (-1, 1): (200, 200),
    (0, -1): (140, 40),
    (0, 0): (0, 40),
    (0, 1): (0, 200),
    (1, -1): (320, 44),
    (1, 0): (0, 180),
    (1, 1): (0, 1560),
}
REFERENCE_SIGN_TOTAL = 4632  # sum of the printed counts

ORIENTATION_NOTE = (
    "The reference tabulation's self-fulfilling columns are oriented the "
    "opposite way (its printed table matches this one with the two count "
    "columns exchanged, i.e. it counted AUC strictly decreasing); this tool "
    "follows the definition 'AUC stays equal or rises', under which "
    "uniformly nonnegative treatment effects are always self-fulfilling."
)


def reference_delta(
    sign_table: dict[tuple[int, int], tuple[int, int]],
    retained: int,
) -> dict:
    """Per-cell comparison with the reference tabulation.

    Compares the reference against this table with columns exchanged (the
    orientation difference) and reports every remaining count difference,
    plus the total gap; the reference's equality filter retained a few
    settings this tool removes structurally.
    """
    cell_deltas = {}
    for cell in SIGN_CELLS:
        ours_sf, ours_nsf = sign_table[cell]
        ref_sf, ref_nsf = REFERENCE_SIGN_TABLE[cell]
        d = (ref_sf - ours_nsf, ref_nsf - ours_sf)
        if d != (0, 0):
            cell_deltas[cell] = d
    return {
        "retained": retained,
        "reference_total": REFERENCE_SIGN_TOTAL,
        "count_delta": REFERENCE_SIGN_TOTAL - retained,
        "cell_deltas_after_orientation_swap": {
            f"({a},{b})": list(d) for (a, b), d in sorted(cell_deltas.items())
        },
        "orientation_note": ORIENTATION_NOTE,
    }


# ---------------------------------------------------------------------------
# CSV round trip. Floats use repr (shortest round-trip form) so reruns are
# byte-identical; booleans are true/false, signs -1/0/1.


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (OutcomePolarity, Verdict)):
        return value.value
    return str(value)


def records_to_csv_rows(records: list[ScenarioRecord]):
    yield list(CSV_COLUMNS)
    for r in records:
        yield [_format_value(getattr(r, c)) for c in CSV_COLUMNS]


def write_records_csv(records: list[ScenarioRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(records_to_csv_rows(records))


_BOOL_FIELDS = {"self_fulfilling", "harmful_marginal", "calibrated_post",
                "avg_treatment_beneficial"}
_INT_FIELDS = {"pi0", "sign_bt", "sign_bt_plus_bxt"}


def _parse_value(column: str, text: str):
    if column in _BOOL_FIELDS:
        if text not in ("true", "false"):
            raise ConfigError([f"{column}: expected true/false, got {text!r}"])
        return text == "true"
    if column in _INT_FIELDS:
        return int(text)
    if column == "polarity":
        return OutcomePolarity(text)
    if column == "verdict":
        return Verdict(text)
    return float(text)


def read_records_csv(path) -> list[ScenarioRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(CSV_COLUMNS):
            raise ConfigError([f"unexpected CSV header: {header!r}"])
        return [
            ScenarioRecord(
                **{c: _parse_value(c, cell) for c, cell in zip(CSV_COLUMNS, row)}
            )
            for row in reader
        ]
