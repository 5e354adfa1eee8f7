"""Out-of-sample evaluation of fitted rankings.

The protocol: fit on the chronologically first fraction of the data, then
on the held-out remainder (a) check that predicted defendant-win
propensities are calibrated against empirical win rates in equal-count
propensity bins, and (b) measure balanced prediction accuracy, where the
majority outcome class is downsampled to 50/50 so that an uninformative
scoring earns exactly 0.5.  External rankings are plugged into the same
accuracy harness by treating rank as score (no privilege offset).
"""

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import kendalltau as _scipy_kendalltau

from .errors import InvalidArgumentError, UndefinedResultError, UnknownReferenceError
from .model import InteractionRecord, ModelParams, favored_probability, win_probability

__all__ = [
    "CalibrationBin",
    "CalibrationReport",
    "ExternalRanking",
    "temporal_split",
    "scorable_subset",
    "predict_defendant_propensity",
    "calibration_report",
    "balanced_accuracy",
    "kendall_tau",
    "kendall_tau_scores",
]


@dataclass(frozen=True)
class ExternalRanking:
    """A published ranking: ordered (best-first) firm names with ranks."""

    name: str
    entries: tuple[tuple[str, float], ...]  # (canonical firm name, rank or score)

    def __post_init__(self):
        ranks = [r for _, r in self.entries]
        if len(set(ranks)) != len(ranks):
            raise InvalidArgumentError(f"ranking {self.name!r} has duplicate ranks")

    @property
    def ordered_labels(self) -> list[str]:
        return [label for label, _ in sorted(self.entries, key=lambda e: e[1])]

    def rank_of(self, label: str) -> float | None:
        for entry_label, rank in self.entries:
            if entry_label == label:
                return rank
        return None


def temporal_split(
    records: Sequence[InteractionRecord], train_fraction: float
) -> tuple[list[InteractionRecord], list[InteractionRecord]]:
    """Chronological split: first ceil(f*N) records to train, rest to test.

    Ordering is a stable sort on timestamp, so same-date records keep
    their input order.
    """
    if not (0.0 < train_fraction < 1.0):
        raise InvalidArgumentError("train_fraction must lie in (0, 1)")
    ordered = sorted(records, key=lambda r: r.timestamp)
    cut = int(np.ceil(train_fraction * len(ordered)))
    return ordered[:cut], ordered[cut:]


def scorable_subset(
    records: Sequence[InteractionRecord], params: ModelParams, n_types: int | None = None
) -> tuple[list[InteractionRecord], int]:
    """Keep records whose entities and type have fitted parameters.

    Returns the kept records and the number excluded; the exclusion count
    belongs in any report built from the subset.
    """
    if n_types is None:
        n_types = params.n_types
    kept = [
        r
        for r in records
        if r.plaintiff.id < params.n_entities
        and r.defendant.id < params.n_entities
        and r.itype.id < n_types
    ]
    return kept, len(records) - len(kept)


def predict_defendant_propensity(record: InteractionRecord, params: ModelParams) -> float:
    """Two-stage probability that the defendant wins this record."""
    if record.plaintiff.id >= params.n_entities or record.defendant.id >= params.n_entities:
        raise UnknownReferenceError("record references an entity without a fitted score")
    if record.itype.id >= params.n_types:
        raise UnknownReferenceError("record references a type without fitted parameters")
    s_pla = float(params.scores[record.plaintiff.id])
    s_def = float(params.scores[record.defendant.id])
    eps = float(params.privileges[record.itype.id])
    q = float(params.valences[record.itype.id])
    rho_def = 1.0 - favored_probability(s_pla, s_def, eps)
    return win_probability(rho_def, q)


def defendant_propensities(records: Sequence[InteractionRecord], params: ModelParams) -> np.ndarray:
    """Vectorized :func:`predict_defendant_propensity` over a record list."""
    return np.array([predict_defendant_propensity(r, params) for r in records])


@dataclass(frozen=True)
class CalibrationBin:
    """One propensity bin: predicted vs. empirical defendant win rate."""

    lower: float
    upper: float
    n_cases: int
    mean_predicted: float
    empirical_defendant_winrate: float
    bootstrap_sd: float


@dataclass(frozen=True)
class CalibrationReport:
    bins: tuple[CalibrationBin, ...]
    baseline_winrate: float
    n_cases: int
    n_excluded: int = 0


def _bin_boundaries(sorted_props: np.ndarray, n_bins: int) -> list[int]:
    """Equal-count boundaries, extended so ties never straddle a boundary."""
    n = len(sorted_props)
    bounds = [0]
    for b in range(1, n_bins):
        cut = round(b * n / n_bins)
        cut = max(cut, bounds[-1])
        # push the cut forward past any run of equal propensities
        while 0 < cut < n and sorted_props[cut] == sorted_props[cut - 1]:
            cut += 1
        if cut > bounds[-1] and cut < n:
            bounds.append(cut)
    bounds.append(n)
    return bounds


def calibration_report(
    records: Sequence[InteractionRecord],
    params: ModelParams,
    n_bins: int = 6,
    n_bootstrap: int = 100,
    seed: int = 0,
    n_excluded: int = 0,
) -> CalibrationReport:
    """Quantile-bin the predicted defendant propensities against outcomes.

    Bins hold (nearly) equal case counts with equal propensities kept in
    one bin; each bin reports the mean prediction, the empirical defendant
    win rate, and a bootstrap standard deviation of that rate over
    ``n_bootstrap`` within-bin case resamples.
    """
    if not records:
        raise InvalidArgumentError("cannot calibrate on an empty test set")
    props = defendant_propensities(records, params)
    wins = np.array([r.winner_is_defendant for r in records], dtype=np.float64)
    order = np.argsort(props, kind="stable")
    props_sorted = props[order]
    wins_sorted = wins[order]

    bounds = _bin_boundaries(props_sorted, n_bins)
    if len(bounds) - 1 < n_bins:
        warnings.warn(
            f"only {len(bounds) - 1} distinct propensity bins available "
            f"(requested {n_bins}); bins were collapsed",
            stacklevel=2,
        )
    rng = np.random.default_rng(seed)
    bins = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        outcomes = wins_sorted[lo:hi]
        size = hi - lo
        resample_means = rng.choice(outcomes, size=(n_bootstrap, size), replace=True).mean(axis=1)
        bins.append(
            CalibrationBin(
                lower=float(props_sorted[lo]),
                upper=float(props_sorted[hi - 1]),
                n_cases=size,
                mean_predicted=float(props_sorted[lo:hi].mean()),
                empirical_defendant_winrate=float(outcomes.mean()),
                bootstrap_sd=float(resample_means.std(ddof=0)),
            )
        )
    return CalibrationReport(
        bins=tuple(bins),
        baseline_winrate=float(wins.mean()),
        n_cases=len(records),
        n_excluded=n_excluded,
    )


def _predictions_from_params(
    records: Sequence[InteractionRecord], params: ModelParams
) -> tuple[np.ndarray, np.ndarray]:
    wins = np.array([r.winner_is_defendant for r in records], dtype=bool)
    preds = np.array(
        [
            params.scores[r.defendant.id] + params.privileges[r.itype.id]
            >= params.scores[r.plaintiff.id]
            for r in records
        ],
        dtype=bool,
    )
    return preds, wins


def _predictions_from_ranking(
    records: Sequence[InteractionRecord], ranking: ExternalRanking
) -> tuple[np.ndarray, np.ndarray]:
    rank_by_label = {label: rank for label, rank in ranking.entries}
    preds, wins = [], []
    for r in records:
        rp = rank_by_label.get(r.plaintiff.label)
        rd = rank_by_label.get(r.defendant.label)
        if rp is None or rd is None:
            continue  # cases with unranked firms are excluded
        preds.append(rd < rp)  # lower rank number is the stronger firm; no privilege offset
        wins.append(r.winner_is_defendant)
    return np.array(preds, dtype=bool), np.array(wins, dtype=bool)


def balanced_accuracy(
    records: Sequence[InteractionRecord],
    scoring: ModelParams | ExternalRanking,
    n_bootstrap: int = 100,
    seed: int = 0,
) -> tuple[float, float]:
    """Prediction accuracy after balancing the outcome classes to 50/50.

    Each of ``n_bootstrap`` rounds resamples the test cases with
    replacement, then downsamples the majority class to the minority count
    and scores the prediction rule (defendant wins iff its
    privilege-adjusted score is at least the plaintiff's, or iff it is the
    better-ranked firm for an external ranking).  Returns the mean and the
    standard deviation over rounds; both include the downsampling noise.
    """
    if isinstance(scoring, ExternalRanking):
        preds, wins = _predictions_from_ranking(records, scoring)
    else:
        preds, wins = _predictions_from_params(records, scoring)
    if len(wins) == 0 or wins.all() or not wins.any():
        raise InvalidArgumentError(
            "balanced accuracy needs scored cases from both outcome classes"
        )
    rng = np.random.default_rng(seed)
    n = len(wins)
    correct = preds == wins
    accuracies = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        for _ in range(100):
            idx = rng.integers(0, n, size=n)
            d_idx = idx[wins[idx]]
            p_idx = idx[~wins[idx]]
            if len(d_idx) and len(p_idx):
                break
        else:
            raise InvalidArgumentError("bootstrap resamples keep losing an outcome class")
        k = min(len(d_idx), len(p_idx))
        if len(d_idx) > k:
            d_idx = rng.choice(d_idx, size=k, replace=False)
        elif len(p_idx) > k:
            p_idx = rng.choice(p_idx, size=k, replace=False)
        balanced = np.concatenate([d_idx, p_idx])
        accuracies[b] = correct[balanced].mean()
    return float(accuracies.mean()), float(accuracies.std(ddof=1))


def kendall_tau(ranking_a: Sequence, ranking_b: Sequence) -> float:
    """Tie-adjusted Kendall correlation of two orderings' common subset.

    Inputs are best-first sequences of hashable labels.  Only labels
    present in both orderings contribute.
    """
    pos_a = {label: i for i, label in enumerate(ranking_a)}
    pos_b = {label: i for i, label in enumerate(ranking_b)}
    common = [label for label in ranking_a if label in pos_b]
    if len(common) < 2:
        raise UndefinedResultError(
            f"rank correlation needs an overlap of at least 2 labels, got {len(common)}"
        )
    xa = np.array([pos_a[label] for label in common])
    xb = np.array([pos_b[label] for label in common])
    return kendall_tau_scores(xa, xb)


def kendall_tau_scores(a: np.ndarray, b: np.ndarray) -> float:
    """Tie-adjusted Kendall correlation of two aligned numeric vectors."""
    tau = _scipy_kendalltau(a, b).statistic
    if np.isnan(tau):
        raise UndefinedResultError("rank correlation undefined (constant input)")
    return float(tau)
