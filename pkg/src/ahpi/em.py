"""Bayesian EM fitting of scores, privileges, and valences.

The three parameter families are estimated from observed winners by
expectation-maximization on the complete-data posterior, with
standard-logistic priors on scores and privileges:

* E-step: for every record, the posterior probability ``pi`` that the
  winner was the favored side,
  pi = q * Bu * lu / (q * Bu * lu + (1 - q) * Bv * lv),
  where lu/lv are the winner's/loser's exponential scores and Bu/Bv are
  exp(eps) for whichever side is the defendant (1 for the other side).
* M-step, in order: valences (per-type mean of pi, closed form),
  privileges (scalar root of the stationarity condition, bracketed Brent),
  and scores (fixed-point sweeps on the exponential scores, iterated to a
  relative tolerance).  Each block update maximizes the same surrogate, so
  the log posterior never decreases.

Iteration stops once the ranking of two consecutive iterations agrees
(tie-adjusted Kendall correlation above the configured threshold) AND the
largest absolute change in any score, valence, or privilege falls below
the configured tolerance.  Because the model has an exact mirror symmetry
(see :func:`ahpi.model.symmetry_map`), a fit may converge to the inverted
branch; when the interaction-weighted mean valence ends up below 0.5 the
map is applied once so that reported valences always sit in [0.5, 1].

One wrinkle needs care: the all-equal initialization with valences at
exactly 0.5 is a stationary saddle of the EM map (a 0.5 valence makes the
winner carry no information, which keeps the scores flat, which keeps the
valences at 0.5).  Escape from the saddle rides on round-off-scale
asymmetries and takes dozens of near-stationary iterations during which
the stopping rule can fire spuriously.  :func:`fit` therefore runs a
second, deterministic start with the valence initialization nudged off the
symmetric point whenever the configured start sits exactly on the saddle,
and returns whichever run ends at the higher log posterior.  On data where
0.5 valences are the genuine optimum both runs agree and the configured
start wins the tie.
"""

import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.stats import kendalltau as _scipy_kendalltau

from .errors import InvalidArgumentError, NumericalFailureError, UnknownReferenceError
from .model import (
    ModelParams,
    RecordArrays,
    log_posterior,
    sigmoid,
    symmetry_map,
)

__all__ = [
    "FitConfig",
    "FitTrace",
    "posterior_stance",
    "stance_posteriors",
    "update_valences",
    "update_privilege",
    "update_lambdas",
    "fit",
]

# Privilege roots are bracketed here; the sigmoid saturates past double
# precision well before |eps| reaches 20.
_EPS_BRACKET = 20.0
_LAMBDA_MIN = 1e-12
_LAMBDA_MAX = 1e12


def _as_vector(value, length: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(length, float(arr))
    if arr.shape != (length,):
        raise InvalidArgumentError(f"{name} must be a scalar or a length-{length} vector")
    return arr


@dataclass(frozen=True)
class FitConfig:
    """Knobs for :func:`fit`.

    ``fixed_privileges`` / ``fixed_valences`` freeze those parameter
    families at the given scalar or per-type values (useful for reducing
    the model to plain Bradley-Terry); frozen valences also disable the
    final symmetry-breaking flip, since the orientation was chosen by the
    caller.
    """

    init_lambda: float = 0.9
    init_q: float = 0.5
    init_eps: float = 0.0
    rank_corr_threshold: float = 0.999
    param_abs_tol: float = 0.01
    max_iters: int = 10000
    eps_root_tol: float = 1e-10
    lambda_inner_tol: float = 1e-10
    max_inner_iters: int = 100_000
    fixed_privileges: float | Sequence[float] | None = None
    fixed_valences: float | Sequence[float] | None = None

    def __post_init__(self):
        if self.init_lambda <= 0:
            raise InvalidArgumentError("init_lambda must be positive")
        if not (0.0 <= self.init_q <= 1.0):
            raise InvalidArgumentError("init_q must lie in [0, 1]")
        for name in ("rank_corr_threshold", "param_abs_tol", "eps_root_tol", "lambda_inner_tol"):
            if getattr(self, name) <= 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.max_iters < 1 or self.max_inner_iters < 1:
            raise InvalidArgumentError("iteration limits must be at least 1")


@dataclass
class FitTrace:
    """Per-iteration convergence diagnostics produced by :func:`fit`.

    ``log_posteriors[0]`` is the initial state; one entry follows per EM
    iteration and the sequence is non-decreasing (up to round-off).
    """

    iterations: int = 0
    log_posteriors: list[float] = field(default_factory=list)
    max_deltas: list[float] = field(default_factory=list)
    rank_correlations: list[float] = field(default_factory=list)
    converged: bool = False
    symmetry_flipped: bool = False


def _compiled(records, params: ModelParams) -> RecordArrays:
    if isinstance(records, RecordArrays):
        if records.n_entities > params.n_entities or records.n_types > params.n_types:
            raise UnknownReferenceError(
                "records reference more entities/types than the parameters cover"
            )
        return records
    return RecordArrays.from_records(records, params.n_entities, params.n_types)


def _stance_posteriors_arrays(
    arr: RecordArrays, scores: np.ndarray, privileges: np.ndarray, valences: np.ndarray
) -> np.ndarray:
    c = np.where(arr.winner_is_defendant, 1.0, -1.0)
    with np.errstate(divide="ignore"):
        logit_q = np.log(valences) - np.log1p(-valences)  # +-inf at q = 1 / q = 0
    logits = logit_q[arr.itype] + scores[arr.winner] - scores[arr.loser] + privileges[arr.itype] * c
    return sigmoid(logits)


def stance_posteriors(records, params: ModelParams) -> np.ndarray:
    """Vector of posterior probabilities that each record's winner was favored."""
    arr = _compiled(records, params)
    return _stance_posteriors_arrays(arr, params.scores, params.privileges, params.valences)


def posterior_stance(record, params: ModelParams) -> float:
    """Posterior probability that this record's winner was the favored side."""
    arr = RecordArrays.from_records([record], params.n_entities, params.n_types)
    return float(
        _stance_posteriors_arrays(arr, params.scores, params.privileges, params.valences)[0]
    )


def update_valences(records, pis: np.ndarray, params: ModelParams) -> np.ndarray:
    """Closed-form valence update: per-type mean of the stance posteriors.

    Types with no records keep their previous value and trigger a warning.
    """
    arr = _compiled(records, params)
    pis = np.asarray(pis, dtype=np.float64)
    if pis.shape != (len(arr),):
        raise InvalidArgumentError("need exactly one posterior per record")
    counts = np.bincount(arr.itype, minlength=arr.n_types).astype(np.float64)
    sums = np.bincount(arr.itype, weights=pis, minlength=arr.n_types)
    empty = counts == 0
    if np.any(empty):
        warnings.warn(
            f"{int(empty.sum())} interaction type(s) have no records; keeping previous valences",
            stacklevel=2,
        )
    q_new = np.where(empty, params.valences[: arr.n_types], sums / np.maximum(counts, 1.0))
    return q_new


def update_privilege(
    type_id: int,
    records,
    pis: np.ndarray,
    params: ModelParams,
    root_tol: float = 1e-10,
) -> float:
    """Privilege update for one type: root of the stationarity condition.

    The condition is -tanh(eps/2) (the logistic-prior pull toward 0) plus,
    for every record of the type, pi*c - c*sigmoid(c*eps + S_winner -
    S_loser), with c = +1 when the winner is the defendant and -1
    otherwise.  The left side is strictly decreasing in eps, so the root
    is unique; it is found by Brent iteration on [-20, 20].  With no
    records the prior alone puts the root at exactly 0.
    """
    arr = _compiled(records, params)
    pis = np.asarray(pis, dtype=np.float64)
    mask = arr.itype == type_id
    if not np.any(mask):
        return 0.0
    c = np.where(arr.winner_is_defendant[mask], 1.0, -1.0)
    gap = params.scores[arr.winner[mask]] - params.scores[arr.loser[mask]]
    pc = float(np.dot(pis[mask], c))

    def g(eps: float) -> float:
        return -np.tanh(eps / 2.0) + pc - float(np.dot(c, sigmoid(c * eps + gap)))

    lo, hi = -_EPS_BRACKET, _EPS_BRACKET
    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo > 0.0 > g_hi):
        raise NumericalFailureError(
            "privilege stationarity condition has no sign change in the bracket",
            type_id=type_id,
            g_lo=g_lo,
            g_hi=g_hi,
            n_records=int(mask.sum()),
        )
    return float(brentq(g, lo, hi, xtol=root_tol))


def update_lambdas(
    records,
    pis: np.ndarray,
    params: ModelParams,
    inner_tol: float = 1e-10,
    max_inner_iters: int = 100_000,
) -> np.ndarray:
    """Score update: fixed-point sweeps on the exponential scores.

    One sweep maps every lambda_k to numerator / denominator, where the
    numerator is 1 plus the posterior-expected number of times entity k
    was favored, and the denominator is the prior term 2 / (1 + lambda_k)
    plus one privilege-scaled pairwise term per record the entity appears
    in.  Sweeps are Jacobi style (all entities from the previous iterate)
    and repeat until the largest relative lambda change falls below
    ``inner_tol``.  The surrogate being maximized is strictly concave in
    the log scores, so the fixed point is unique; convergence is
    accelerated with guarded squared-extrapolation (SQUAREM-style) cycles
    in log space, which reach the same point in far fewer sweeps.  Returns
    the converged positive lambda vector.
    """
    arr = _compiled(records, params)
    pis = np.asarray(pis, dtype=np.float64)
    if pis.shape != (len(arr),):
        raise InvalidArgumentError("need exactly one posterior per record")
    k = params.n_entities
    numerator = (
        1.0
        + np.bincount(arr.winner, weights=pis, minlength=k)
        + np.bincount(arr.loser, weights=1.0 - pis, minlength=k)
    )
    du = arr.winner_is_defendant.astype(np.float64)
    b_u = np.exp(params.privileges[arr.itype] * du)
    b_v = np.exp(params.privileges[arr.itype] * (1.0 - du))

    def sweep(s: np.ndarray) -> np.ndarray:
        lam = np.exp(s)
        total = b_u * lam[arr.winner] + b_v * lam[arr.loser]
        denominator = (
            2.0 / (1.0 + lam)
            + np.bincount(arr.winner, weights=b_u / total, minlength=k)
            + np.bincount(arr.loser, weights=b_v / total, minlength=k)
        )
        lam_new = numerator / denominator
        if (
            not np.all(np.isfinite(lam_new))
            or lam_new.min() < _LAMBDA_MIN
            or lam_new.max() > _LAMBDA_MAX
        ):
            raise NumericalFailureError(
                "score fixed point left the supported range",
                lambda_min=float(lam_new.min()),
                lambda_max=float(lam_new.max()),
            )
        return np.log(lam_new)

    def rel_change(s_new: np.ndarray, s_old: np.ndarray) -> float:
        return float(np.max(np.abs(np.expm1(s_new - s_old))))

    s0 = np.log(params.lambdas)
    sweeps = 0
    while sweeps < max_inner_iters:
        s1 = sweep(s0)
        sweeps += 1
        if rel_change(s1, s0) < inner_tol:
            return np.exp(s1)
        s2 = sweep(s1)
        sweeps += 1
        if rel_change(s2, s1) < inner_tol:
            return np.exp(s2)
        r = s1 - s0
        v = s2 - 2.0 * s1 + s0
        vnorm = float(np.linalg.norm(v))
        if vnorm == 0.0:
            s0 = s2
            continue
        # alpha <= -1; alpha == -1 reproduces the plain two-sweep step
        alpha = max(-100.0, min(-1.0, -float(np.linalg.norm(r)) / vnorm))
        s_extrapolated = s0 - 2.0 * alpha * r + alpha * alpha * v
        try:
            s_next = sweep(s_extrapolated)
            sweeps += 1
        except NumericalFailureError:
            s0 = s2  # extrapolation overshot; keep the plain step
            continue
        if rel_change(s_next, s_extrapolated) < inner_tol:
            return np.exp(s_next)
        s0 = s_next
    raise NumericalFailureError(
        "score fixed point did not converge",
        max_inner_iters=max_inner_iters,
    )


def _rank_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Tie-adjusted Kendall correlation; 0 when undefined (constant input)."""
    tau = _scipy_kendalltau(a, b).statistic
    if np.isnan(tau):
        return 0.0
    return float(tau)


# Off-saddle valence start used by fit() when the configured initialization
# sits exactly on the symmetric stationary point.
_SADDLE_ESCAPE_Q = 0.75


def fit(records, config: FitConfig = FitConfig()) -> tuple[ModelParams, FitTrace]:
    """Fit scores, privileges, and valences to observed interactions.

    Returns the fitted parameters and a :class:`FitTrace`.  Non-convergence
    within ``config.max_iters`` is not an error: the trace comes back with
    ``converged=False`` and the caller decides.
    """
    if isinstance(records, RecordArrays):
        arr = records
    else:
        records = list(records)
        if not records:
            raise InvalidArgumentError("records must be non-empty")
        arr = RecordArrays.from_records(records)

    params, trace = _fit_once(arr, config)
    on_saddle = config.fixed_valences is None and config.init_q == 0.5
    if on_saddle:
        alt_params, alt_trace = _fit_once(arr, replace(config, init_q=_SADDLE_ESCAPE_Q))
        if alt_trace.log_posteriors[-1] > trace.log_posteriors[-1]:
            params, trace = alt_params, alt_trace
    return params, trace


def _fit_once(arr: RecordArrays, config: FitConfig) -> tuple[ModelParams, FitTrace]:
    k, m = arr.n_entities, arr.n_types

    scores = np.full(k, np.log(config.init_lambda))
    eps_frozen = config.fixed_privileges is not None
    q_frozen = config.fixed_valences is not None
    privileges = (
        _as_vector(config.fixed_privileges, m, "fixed_privileges")
        if eps_frozen
        else np.full(m, config.init_eps)
    )
    valences = (
        _as_vector(config.fixed_valences, m, "fixed_valences")
        if q_frozen
        else np.full(m, config.init_q)
    )

    type_counts = arr.type_counts
    n_empty = int(np.sum(type_counts == 0))
    if n_empty:
        warnings.warn(
            f"{n_empty} interaction type(s) have no records; their privilege stays 0 "
            "and their valence keeps its initial value",
            stacklevel=2,
        )

    params = ModelParams(scores, privileges, valences)
    trace = FitTrace()
    trace.log_posteriors.append(log_posterior(arr, params))

    for iteration in range(1, config.max_iters + 1):
        pis = _stance_posteriors_arrays(arr, params.scores, params.privileges, params.valences)

        if q_frozen:
            q_new = params.valences
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")  # empty types already reported once
                q_new = update_valences(arr, pis, params)
        if eps_frozen:
            eps_new = params.privileges
        else:
            eps_new = np.array(
                [
                    update_privilege(t, arr, pis, params, config.eps_root_tol)
                    if type_counts[t]
                    else 0.0
                    for t in range(m)
                ]
            )
        stage = ModelParams(params.scores, eps_new, q_new)
        lam_new = update_lambdas(
            arr, pis, stage, config.lambda_inner_tol, config.max_inner_iters
        )
        scores_new = np.log(lam_new)

        delta = max(
            float(np.max(np.abs(scores_new - params.scores))),
            float(np.max(np.abs(q_new - params.valences))),
            float(np.max(np.abs(eps_new - params.privileges))),
        )
        tau = _rank_correlation(params.scores, scores_new)

        params = ModelParams(scores_new, eps_new, q_new)
        trace.iterations = iteration
        trace.max_deltas.append(delta)
        trace.rank_correlations.append(tau)
        trace.log_posteriors.append(log_posterior(arr, params))

        if tau > config.rank_corr_threshold and delta < config.param_abs_tol:
            trace.converged = True
            break

    if not q_frozen:
        weighted_mean_q = float(np.average(params.valences, weights=type_counts))
        if weighted_mean_q < 0.5:
            params = symmetry_map(params)
            trace.symmetry_flipped = True
    return params, trace
