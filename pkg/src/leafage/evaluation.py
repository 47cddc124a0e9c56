"""Quantitative local-fidelity protocol.

For every test instance, a per-instance hyper-sphere is grown until it
reaches the ceil(p * n_enemy)-th nearest test instance of the opposite
predicted class; the surrogate's scores are then compared against the
black box's labels inside that sphere with the AUC.  Per-setting means
are compared across strategies with a paired Wilcoxon signed-rank test
under Bonferroni correction.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from . import models
from .core import (
    LeafageConfig,
    LocalSurrogate,
    closest_enemy,
    fit_local_linear,
    sample_local_training_set,
)
from .data import Dataset, Standardizer, standardized
from .errors import DataError, NoEnemiesError
from .lime import LimeConfig, lime_fit

__all__ = [
    "FidelityConfig",
    "FidelitySummary",
    "WilcoxonResult",
    "auc",
    "wilcoxon_signed_rank",
    "fidelity_sphere",
    "local_fidelity",
    "run_setting",
    "results_table",
    "write_results_csv",
    "format_mean_std",
    "STRATEGIES",
]

STRATEGIES = ("leafage", "lime", "baseline")

# Sign patterns are enumerated exactly up to this many non-zero
# differences; beyond it the normal approximation with tie correction
# takes over.
WILCOXON_EXACT_LIMIT = 25


@dataclass(frozen=True)
class FidelityConfig:
    """Sphere inclusion fraction and rule."""

    p: float = 0.95
    seed: int = 0
    sphere_rule: str = "enemy-count"

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise DataError("p must lie strictly between 0 and 1")
        if self.sphere_rule not in ("enemy-count", "enemy-share"):
            raise DataError("sphere_rule must be 'enemy-count' or 'enemy-share'")


@dataclass
class FidelitySummary:
    """Per-instance AUC scores for one (dataset, class, classifier,
    strategy) setting; skipped instances are NaN."""

    setting: tuple[str, str, str, str]
    per_instance_auc: np.ndarray
    mean: float
    stddev: float
    n_scored: int
    n_skipped: int

    @classmethod
    def from_scores(
        cls, setting: tuple[str, str, str, str], scores: np.ndarray
    ) -> "FidelitySummary":
        scored = scores[~np.isnan(scores)]
        return cls(
            setting=setting,
            per_instance_auc=scores,
            mean=float(scored.mean()) if scored.size else float("nan"),
            stddev=float(scored.std()) if scored.size else float("nan"),
            n_scored=int(scored.size),
            n_skipped=int(scores.size - scored.size),
        )

    @property
    def strategy(self) -> str:
        return self.setting[3]


def _rank_average(values: np.ndarray) -> np.ndarray:
    """Fractional ranks (1-based); tied values share the mean rank."""
    order = np.argsort(values, kind="stable")
    sv = values[order]
    boundary = np.concatenate(([True], sv[1:] != sv[:-1]))
    group = np.cumsum(boundary) - 1
    starts = np.flatnonzero(boundary)
    ends = np.append(starts[1:], values.size)
    mean_rank = (starts + ends - 1) / 2.0 + 1.0
    ranks = np.empty(values.size)
    ranks[order] = mean_rank[group]
    return ranks


def auc(labels: np.ndarray, scores: np.ndarray) -> float:
    """Area under the ROC curve via the rank-sum identity.

    Equivalent to (concordant + 0.5 * tied) / (n_pos * n_neg) over all
    positive/negative pairs, so tied scores contribute one half.
    """
    labels = np.asarray(labels).astype(bool)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise DataError("labels and scores must have equal length")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC needs at least one positive and one negative label")
    ranks = _rank_average(scores)
    rank_sum = float(ranks[labels].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass(frozen=True)
class WilcoxonResult:
    """Signed-rank test outcome; ``p_value`` is None when inconclusive."""

    statistic: float
    p_value: float | None
    n_nonzero: int
    inconclusive: bool
    method: str = ""


def _exact_signed_rank_p(ranks: np.ndarray, stat: float) -> float:
    """Two-sided p by enumerating all sign patterns.

    Works on doubled ranks so tied (half-integer) ranks stay integral;
    the count array is a full convolution over rank polynomials.
    """
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    denom = 2.0 ** len(ranks)
    t2 = int(np.rint(2.0 * stat))
    p_le = counts[: t2 + 1].sum() / denom
    p_ge = counts[t2:].sum() / denom
    return min(1.0, 2.0 * min(p_le, p_ge))


def _normal_signed_rank_p(ranks: np.ndarray, stat: float) -> float:
    """Two-sided normal approximation with tie-corrected variance."""
    n = ranks.size
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var -= float((tie_counts**3 - tie_counts).sum()) / 48.0
    if var <= 0:
        return 1.0
    z = (stat - mean) / math.sqrt(var)
    return math.erfc(abs(z) / math.sqrt(2.0))


def wilcoxon_signed_rank(a: np.ndarray, b: np.ndarray) -> WilcoxonResult:
    """Paired two-sided signed-rank test on a - b.

    Zero differences are dropped; fewer than 6 remaining pairs is marked
    inconclusive.  Small samples (n <= 25) are scored by exact sign
    enumeration, larger ones by the tie-corrected normal approximation.
    The statistic is the positive-rank sum.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DataError("paired vectors must have equal length")
    diff = a - b
    diff = diff[diff != 0.0]
    n = diff.size
    if n < 6:
        return WilcoxonResult(
            statistic=float("nan"),
            p_value=None,
            n_nonzero=n,
            inconclusive=True,
            method="inconclusive",
        )
    ranks = _rank_average(np.abs(diff))
    stat = float(ranks[diff > 0].sum())
    if n <= WILCOXON_EXACT_LIMIT:
        p = _exact_signed_rank_p(ranks, stat)
        method = "exact"
    else:
        p = _normal_signed_rank_p(ranks, stat)
        method = "normal"
    return WilcoxonResult(
        statistic=stat, p_value=p, n_nonzero=n, inconclusive=False, method=method
    )


def fidelity_sphere(
    features: np.ndarray,
    predicted: np.ndarray,
    z_index: int,
    p: float,
    rule: str = "enemy-count",
) -> np.ndarray:
    """Indices of test rows inside the per-instance evaluation ball.

    Default rule: the radius reaches the ceil(p * n_enemy)-th nearest row
    whose predicted label differs from the centre's.  The alternative
    'enemy-share' rule grows the ball until the fraction of enemies among
    included rows reaches p (falling back to all rows when unattainable).
    The centre itself is excluded; the ball is closed.
    """
    predicted = np.asarray(predicted)
    z = features[z_index]
    c_z = predicted[z_index]
    dist = np.sqrt(np.einsum("ij,ij->i", features - z, features - z))
    others = np.arange(features.shape[0]) != z_index
    enemy = (predicted != c_z) & others
    n_enemy = int(enemy.sum())
    if n_enemy == 0:
        raise NoEnemiesError("no test instance has the opposite predicted label")
    if rule == "enemy-count":
        enemy_dist = np.sort(dist[enemy])
        radius = enemy_dist[math.ceil(p * n_enemy) - 1]
    elif rule == "enemy-share":
        order = np.flatnonzero(others)[np.argsort(dist[others], kind="stable")]
        share = np.cumsum(enemy[order]) / np.arange(1, order.size + 1)
        reached = np.flatnonzero(share >= p)
        radius = dist[order[reached[0]]] if reached.size else dist[order[-1]]
    else:
        raise DataError(f"unknown sphere rule {rule!r}")
    return np.flatnonzero((dist <= radius) & others)


def local_fidelity(
    surrogate: LocalSurrogate, blackbox_labels: np.ndarray, sphere_rows: np.ndarray
) -> float | None:
    """AUC of surrogate scores against black-box labels on the sphere.

    None (skipped) when the sphere is single-class; a degenerate
    surrogate's constant scores land on 0.5 through tie handling.
    """
    labels = np.asarray(blackbox_labels) == 1
    if labels.all() or not labels.any():
        return None
    return auc(labels, surrogate.score(sphere_rows))


def _derived_seed(base: int, index: int) -> int:
    return int(np.random.SeedSequence([base, index]).generate_state(1)[0])


def run_setting(
    train: Dataset,
    test: Dataset,
    classifier: str,
    strategies: tuple[str, ...] = STRATEGIES,
    *,
    dataset_name: str | None = None,
    leafage_cfg: LeafageConfig | None = None,
    lime_cfg: LimeConfig | None = None,
    fidelity_cfg: FidelityConfig | None = None,
    hyperparams: dict | None = None,
    model_seed: int = 0,
) -> list[FidelitySummary]:
    """Train one classifier and score every strategy on every test row.

    The baseline strategy stands in for a constant predictor (it always
    emits the majority predicted class as its score), which pins its AUC
    at 0.5 on every scored instance.  Skips (no test enemies, or a
    single-class sphere) are shared by all strategies, so the per-instance
    vectors stay aligned for paired significance testing.
    """
    for strategy in strategies:
        if strategy not in STRATEGIES:
            raise DataError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if len(train.class_names) != 2 or len(test.class_names) != 2:
        raise DataError("run_setting requires binary datasets")
    leafage_cfg = leafage_cfg or LeafageConfig()
    lime_cfg = lime_cfg or LimeConfig()
    fidelity_cfg = fidelity_cfg or FidelityConfig()
    dataset_name = train.name if dataset_name is None else dataset_name

    scaler = Standardizer.fit(train.features)
    model = models.fit(classifier, standardized(train, scaler), hyperparams, model_seed)
    X_train = scaler.transform(train.features)
    X_test = scaler.transform(test.features)
    pred_train = model.predict_labels(X_train)
    pred_test = model.predict_labels(X_test)

    majority_predicted = float(np.bincount(pred_test, minlength=2).argmax())
    scores = {s: np.full(test.n, np.nan) for s in strategies}
    for i in range(test.n):
        try:
            sphere = fidelity_sphere(
                X_test, pred_test, i, fidelity_cfg.p, fidelity_cfg.sphere_rule
            )
        except NoEnemiesError:
            continue
        sphere_rows = X_test[sphere]
        sphere_labels = pred_test[sphere]
        if (sphere_labels == 1).all() or (sphere_labels == 0).all():
            continue
        z = X_test[i]
        c_z = int(pred_test[i])
        for strategy in strategies:
            if strategy == "baseline":
                surrogate = LocalSurrogate(
                    weights=np.zeros(test.d),
                    intercept=majority_predicted,
                    degenerate=True,
                )
            elif strategy == "leafage":
                try:
                    x_border = closest_enemy(X_train, pred_train, z, c_z)
                except NoEnemiesError:
                    continue
                local = sample_local_training_set(
                    X_train, pred_train, x_border, leafage_cfg
                )
                surrogate = fit_local_linear(
                    X_train, pred_train, local, seed=leafage_cfg.seed
                )
            else:
                cfg_i = replace(lime_cfg, seed=_derived_seed(lime_cfg.seed, i))
                surrogate = lime_fit(model, z, cfg_i)
            value = local_fidelity(surrogate, sphere_labels, sphere_rows)
            if value is not None:
                scores[strategy][i] = value

    positive = train.class_names[1]
    return [
        FidelitySummary.from_scores(
            (dataset_name, positive, classifier, strategy), scores[strategy]
        )
        for strategy in strategies
    ]


def format_mean_std(mean: float, stddev: float) -> str:
    """Table cell rendering: percentages to one decimal place."""
    if math.isnan(mean):
        return "n/a"
    return f"{mean * 100:.1f} ({stddev * 100:.1f})"


def _group_key(summary: FidelitySummary) -> tuple[str, str, str]:
    return summary.setting[:3]


def bold_flags(
    summaries: list[FidelitySummary], alpha: float = 0.05
) -> dict[tuple[str, str, str, str], bool]:
    """Which (setting, strategy) cells are emphasized.

    Within a setting: the highest mean, plus every strategy whose paired
    signed-rank test against it is not significant at the Bonferroni
    corrected level alpha / (n_strategies - 1).  Inconclusive tests
    (fewer than 6 non-zero paired differences) cannot establish a
    difference, so those strategies stay emphasized too.
    """
    groups: dict[tuple[str, str, str], list[FidelitySummary]] = {}
    for s in summaries:
        groups.setdefault(_group_key(s), []).append(s)
    flags: dict[tuple[str, str, str, str], bool] = {}
    for members in groups.values():
        means = [(-math.inf if math.isnan(m.mean) else m.mean) for m in members]
        best = members[int(np.argmax(means))]
        corrected = alpha / max(1, len(members) - 1)
        for m in members:
            if m is best:
                flags[m.setting] = not math.isnan(m.mean)
                continue
            if math.isnan(m.mean):
                flags[m.setting] = False
                continue
            paired = ~np.isnan(best.per_instance_auc) & ~np.isnan(m.per_instance_auc)
            result = wilcoxon_signed_rank(
                best.per_instance_auc[paired], m.per_instance_auc[paired]
            )
            flags[m.setting] = result.inconclusive or result.p_value > corrected
    return flags


def results_table(summaries: list[FidelitySummary], alpha: float = 0.05) -> str:
    """Aligned text table; emphasized cells are wrapped in ``**``."""
    flags = bold_flags(summaries, alpha)
    header = ["dataset", "positive", "classifier", "strategy", "fidelity"]
    rows = [header]
    for s in summaries:
        cell = format_mean_std(s.mean, s.stddev)
        if flags[s.setting]:
            cell = f"**{cell}**"
        rows.append([*s.setting, cell])
    widths = [max(len(r[j]) for r in rows) for j in range(len(header))]
    lines = ["  ".join(r[j].ljust(widths[j]) for j in range(len(header))) for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def write_results_csv(
    summaries: list[FidelitySummary], path: str, alpha: float = 0.05
) -> None:
    """Machine-readable results, one row per setting and strategy."""
    flags = bold_flags(summaries, alpha)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["setting", "strategy", "mean_auc", "std_auc", "n", "n_skipped", "bold"]
        )
        for s in summaries:
            writer.writerow(
                [
                    "|".join(s.setting[:3]),
                    s.strategy,
                    repr(s.mean),
                    repr(s.stddev),
                    s.n_scored,
                    s.n_skipped,
                    str(flags[s.setting]).lower(),
                ]
            )
