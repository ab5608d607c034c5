"""Seeded Monte Carlo sampler: an independent, finite-sample check on the
closed-form engine.

Streams are derived as PCG64(SeedSequence((master_seed, scenario_index))),
a documented, platform-stable scheme: identical (master_seed,
scenario_index) pairs replay identical samples, and distinct scenario
indices give independent substreams safe for parallel sweeps.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .scenario import Opm, Policy, ScenarioParams, potential_outcomes


@dataclass(frozen=True)
class McConfig:
    n_samples: int
    master_seed: int
    scenario_index: int = 0

    def __post_init__(self):
        problems = []
        if not (isinstance(self.n_samples, int) and self.n_samples >= 1):
            problems.append(f"n_samples: must be a positive integer, got {self.n_samples!r}")
        if not (isinstance(self.master_seed, int) and 0 <= self.master_seed < 2**64):
            problems.append(f"master_seed: must be a 64-bit unsigned integer, got {self.master_seed!r}")
        if not (isinstance(self.scenario_index, int) and self.scenario_index >= 0):
            problems.append(f"scenario_index: must be a nonnegative integer, got {self.scenario_index!r}")
        if problems:
            raise ConfigError(problems)

    def rng(self) -> np.random.Generator:
        seq = np.random.SeedSequence((self.master_seed, self.scenario_index))
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class EmpiricalMetrics:
    """Plug-in metrics on a finite sample. auc_hat is the tie-adjusted
    rank statistic (ties count one half), evaluated at the same operating
    point as the closed form; None when a class is empty."""

    auc_hat: float | None
    sens_hat: float | None
    spec_hat: float | None
    mu_hat: tuple[float | None, float | None]
    n_pos: int
    n_neg: int

    @property
    def insufficient_cases(self) -> bool:
        return self.n_pos == 0 or self.n_neg == 0


def sample(params: ScenarioParams, policy: Policy, cfg: McConfig) -> np.ndarray:
    """Draw (x, t, y) rows: x ~ Bernoulli(p_x), t = assign(x), y ~
    Bernoulli(q[t][x]). Returns an (n, 3) uint8 array.

    Uniform draws happen in a fixed order (all x, then all y), so a given
    config replays the same patients under any policy.
    """
    q = potential_outcomes(params).q
    rng = cfg.rng()
    n = cfg.n_samples
    x = (rng.random(n) < params.p_x).astype(np.uint8)
    assign = np.array(policy.assign, dtype=np.uint8)
    t = assign[x]
    p_y = np.where(
        x == 0,
        np.where(t == 0, q[0][0], q[1][0]),
        np.where(t == 0, q[0][1], q[1][1]),
    )
    y = (rng.random(n) < p_y).astype(np.uint8)
    return np.column_stack([x, t, y])


def empirical_metrics(table: np.ndarray, opm: Opm) -> EmpiricalMetrics:
    """Rank-based AUC plus plug-in sens/spec/group means for a sample.

    The predictor takes two values, so the rank statistic reduces to cell
    counts: with a the higher-predicted group, P(f+ > f-) + P(f+ = f-)/2
    over positive/negative pairs.
    """
    x = table[:, 0].astype(np.int64)
    y = table[:, 2].astype(np.int64)
    a = 1 if opm.f[1] > opm.f[0] else 0

    n_x1 = int(x.sum())
    n = len(x)
    counts = {
        (xv, yv): int(((x == xv) & (y == yv)).sum())
        for xv in (0, 1)
        for yv in (0, 1)
    }
    n_pos = counts[(0, 1)] + counts[(1, 1)]
    n_neg = n - n_pos

    mu_hat = (
        counts[(0, 1)] / (n - n_x1) if n - n_x1 > 0 else None,
        counts[(1, 1)] / n_x1 if n_x1 > 0 else None,
    )
    if n_pos == 0 or n_neg == 0:
        return EmpiricalMetrics(
            auc_hat=None, sens_hat=None, spec_hat=None,
            mu_hat=mu_hat, n_pos=n_pos, n_neg=n_neg,
        )

    pos_a, pos_b = counts[(a, 1)], counts[(1 - a, 1)]
    neg_a, neg_b = counts[(a, 0)], counts[(1 - a, 0)]
    if opm.f[0] == opm.f[1]:
        auc_hat = 0.5  # all pairs tie
    else:
        auc_hat = (pos_a * neg_b + 0.5 * (pos_a * neg_a + pos_b * neg_b)) / (
            n_pos * n_neg
        )
    return EmpiricalMetrics(
        auc_hat=auc_hat,
        sens_hat=pos_a / n_pos,
        spec_hat=neg_b / n_neg,
        mu_hat=mu_hat,
        n_pos=n_pos,
        n_neg=n_neg,
    )


def write_sample_csv(table: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "t", "y"])
        writer.writerows(table.tolist())
