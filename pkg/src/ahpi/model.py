"""Forward model for asymmetric, heterogeneous pairwise win/loss interactions.

Each interaction pits an unprivileged side (the plaintiff) against a
privileged side (the defendant) and is of one of M types.  The outcome is
modeled in two stages:

1. A *favored* side is drawn: the plaintiff is favored with probability
   sigmoid(S_plaintiff - (S_defendant + eps)), where ``eps`` is the
   per-type privilege (home-field advantage) added to the defendant's
   latent score.
2. The favored side wins with the per-type *valence* probability q; with
   probability 1 - q the unfavored side wins instead.  q = 0.5 means the
   scores carry no information about the outcome, q = 1 means the favored
   side always wins.

Scores are kept in log space (S) as the source of truth; the exponential
scores lambda = exp(S) are derived on demand.  The model carries a
standard-logistic prior on every score and every privilege, which is what
the log-posterior helpers below add on top of the data likelihood.

The whole parameterization has an exact mirror symmetry: mapping
(S, eps, q) -> (-S, -eps, 1 - q) leaves the likelihood of every dataset
unchanged (see :func:`symmetry_map`); fitting breaks the tie by convention
(valences >= 0.5).
"""

import math
from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.special import expit

from .errors import InvalidArgumentError, UnknownReferenceError

__all__ = [
    "Winner",
    "EntityId",
    "InteractionType",
    "InteractionRecord",
    "ModelParams",
    "RecordArrays",
    "sigmoid",
    "favored_probability",
    "win_probability",
    "symmetry_map",
    "data_log_likelihood",
    "log_prior",
    "log_posterior",
    "reindex_records",
]


class Winner(Enum):
    """Which side of an interaction won."""

    PLAINTIFF = "P"
    DEFENDANT = "D"


@dataclass(frozen=True, slots=True)
class EntityId:
    """Opaque integer handle plus canonical display label for one entity."""

    id: int
    label: str


@dataclass(frozen=True, slots=True)
class InteractionType:
    """One of the M interaction (case) types."""

    id: int
    name: str


@dataclass(frozen=True, slots=True)
class InteractionRecord:
    """One pairwise game: plaintiff vs. defendant (the privileged side)."""

    plaintiff: EntityId
    defendant: EntityId
    itype: InteractionType
    winner: Winner
    timestamp: date

    def __post_init__(self):
        if self.plaintiff.id == self.defendant.id:
            raise InvalidArgumentError(
                f"plaintiff and defendant must differ (both have id {self.plaintiff.id})"
            )

    @property
    def winner_is_defendant(self) -> bool:
        return self.winner is Winner.DEFENDANT

    @property
    def winner_entity(self) -> EntityId:
        return self.defendant if self.winner_is_defendant else self.plaintiff

    @property
    def loser_entity(self) -> EntityId:
        return self.plaintiff if self.winner_is_defendant else self.defendant


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidArgumentError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelParams:
    """Fitted (or ground-truth) parameter state.

    Attributes:
        scores: per-entity latent scores S_k (log space, source of truth).
        privileges: per-type defendant bias eps_m.
        valences: per-type valence probability q_m in [0, 1].
    """

    scores: np.ndarray
    privileges: np.ndarray
    valences: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "scores", _frozen_array(self.scores, "scores"))
        object.__setattr__(self, "privileges", _frozen_array(self.privileges, "privileges"))
        object.__setattr__(self, "valences", _frozen_array(self.valences, "valences"))
        if len(self.privileges) != len(self.valences):
            raise InvalidArgumentError(
                "privileges and valences must have one entry per interaction type"
            )
        if np.any(self.valences < 0.0) or np.any(self.valences > 1.0):
            raise InvalidArgumentError("valences must lie in [0, 1]")

    @property
    def lambdas(self) -> np.ndarray:
        """Exponential scores lambda_k = exp(S_k), derived on demand."""
        return np.exp(self.scores)

    @property
    def n_entities(self) -> int:
        return len(self.scores)

    @property
    def n_types(self) -> int:
        return len(self.valences)


def sigmoid(x):
    """Branch-stable logistic function 1 / (1 + exp(-x)).

    Evaluates exp only on the negative half-axis (scipy's ``expit``), so it
    neither overflows nor loses the complementarity identity
    sigmoid(-x) == 1 - sigmoid(x) for |x| up to and beyond 700.  Accepts
    scalars or arrays; scalars come back as float.
    """
    out = expit(x)
    if np.isscalar(x) or getattr(x, "ndim", 1) == 0:
        return float(out)
    return out


def favored_probability(score_a: float, score_b: float, privilege: float) -> float:
    """Probability that side A is favored over the privileged side B.

    Side B's effective score is score_b + privilege; the result is
    sigmoid(score_a - (score_b + privilege)).
    """
    for name, value in (("score_a", score_a), ("score_b", score_b), ("privilege", privilege)):
        if not math.isfinite(value):
            raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
    return sigmoid(score_a - (score_b + privilege))


def win_probability(rho_a: float, valence: float) -> float:
    """Probability that A wins given its favored-probability and the valence q."""
    if not (0.0 <= rho_a <= 1.0):
        raise InvalidArgumentError(f"rho_a must lie in [0, 1], got {rho_a!r}")
    if not (0.0 <= valence <= 1.0):
        raise InvalidArgumentError(f"valence must lie in [0, 1], got {valence!r}")
    return valence * rho_a + (1.0 - valence) * (1.0 - rho_a)


def symmetry_map(params: ModelParams) -> ModelParams:
    """The exact mirror map (S, eps, q) -> (-S, -eps, 1 - q).

    Applying it twice is the identity, and it leaves the likelihood of
    every dataset unchanged.
    """
    return ModelParams(
        scores=-params.scores,
        privileges=-params.privileges,
        valences=1.0 - params.valences,
    )


@dataclass(frozen=True)
class RecordArrays:
    """Columnar view of a record list, for vectorized likelihood work.

    ``winner``/``loser`` hold entity ids, ``itype`` type ids, and
    ``winner_is_defendant`` marks which records the privileged side won.
    """

    winner: np.ndarray
    loser: np.ndarray
    itype: np.ndarray
    winner_is_defendant: np.ndarray
    n_entities: int
    n_types: int

    @classmethod
    def from_records(
        cls,
        records: Sequence[InteractionRecord],
        n_entities: int | None = None,
        n_types: int | None = None,
    ) -> "RecordArrays":
        if not records:
            raise InvalidArgumentError("records must be non-empty")
        winner = np.fromiter(
            (r.winner_entity.id for r in records), dtype=np.int64, count=len(records)
        )
        loser = np.fromiter(
            (r.loser_entity.id for r in records), dtype=np.int64, count=len(records)
        )
        itype = np.fromiter((r.itype.id for r in records), dtype=np.int64, count=len(records))
        windef = np.fromiter(
            (r.winner_is_defendant for r in records), dtype=bool, count=len(records)
        )
        if np.any(winner < 0) or np.any(loser < 0) or np.any(itype < 0):
            raise InvalidArgumentError("entity and type ids must be non-negative")
        k = int(max(winner.max(), loser.max())) + 1
        m = int(itype.max()) + 1
        if n_entities is None:
            n_entities = k
        elif k > n_entities:
            raise UnknownReferenceError(
                f"record references entity id {k - 1} but only {n_entities} entities exist"
            )
        if n_types is None:
            n_types = m
        elif m > n_types:
            raise UnknownReferenceError(
                f"record references type id {m - 1} but only {n_types} types exist"
            )
        for arr in (winner, loser, itype, windef):
            arr.setflags(write=False)
        return cls(winner, loser, itype, windef, int(n_entities), int(n_types))

    def __len__(self) -> int:
        return len(self.winner)

    @property
    def type_counts(self) -> np.ndarray:
        return np.bincount(self.itype, minlength=self.n_types)


def _as_arrays(records, params: ModelParams) -> RecordArrays:
    if isinstance(records, RecordArrays):
        arrays = records
        if arrays.n_entities > params.n_entities or arrays.n_types > params.n_types:
            raise UnknownReferenceError(
                "records reference more entities/types than the parameters cover"
            )
        return arrays
    return RecordArrays.from_records(records, params.n_entities, params.n_types)


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def data_log_likelihood(records, params: ModelParams) -> float:
    """Log-likelihood of the observed winners under the two-stage model.

    Accepts a record sequence or a prebuilt :class:`RecordArrays`.
    Stable in log space; valences of exactly 0 or 1 are handled.
    """
    arr = _as_arrays(records, params)
    s = params.scores
    eps = params.privileges
    q = params.valences
    du = arr.winner_is_defendant.astype(np.float64)
    dv = 1.0 - du
    x = s[arr.winner] + eps[arr.itype] * du  # log of winner's privilege-scaled lambda
    y = s[arr.loser] + eps[arr.itype] * dv
    with np.errstate(divide="ignore"):
        log_q = np.log(q)
        log_1mq = np.log1p(-q)
    num = np.logaddexp(log_q[arr.itype] + x, log_1mq[arr.itype] + y)
    den = np.logaddexp(x, y)
    return float(np.sum(num - den))


def log_prior(params: ModelParams) -> float:
    """Standard-logistic log prior density over scores and privileges."""
    s = params.scores
    e = params.privileges
    return float(np.sum(s - 2.0 * _softplus(s)) + np.sum(e - 2.0 * _softplus(e)))


def log_posterior(records, params: ModelParams) -> float:
    """Unnormalized log posterior: data log-likelihood plus log prior."""
    return data_log_likelihood(records, params) + log_prior(params)


def reindex_records(
    records: Iterable[InteractionRecord],
) -> tuple[list[InteractionRecord], list[EntityId], list[InteractionType]]:
    """Re-key entities and types to dense ids in order of first appearance.

    Returns the rebuilt records plus the new entity and type tables.
    Labels are preserved; only the integer handles change.
    """
    entity_ids: dict[str, int] = {}
    entities: list[EntityId] = []
    type_ids: dict[str, int] = {}
    types: list[InteractionType] = []

    def _entity(e: EntityId) -> EntityId:
        idx = entity_ids.get(e.label)
        if idx is None:
            idx = len(entities)
            entity_ids[e.label] = idx
            entities.append(EntityId(idx, e.label))
        return entities[idx]

    def _type(t: InteractionType) -> InteractionType:
        idx = type_ids.get(t.name)
        if idx is None:
            idx = len(types)
            type_ids[t.name] = idx
            types.append(InteractionType(idx, t.name))
        return types[idx]

    out = [
        InteractionRecord(
            plaintiff=_entity(r.plaintiff),
            defendant=_entity(r.defendant),
            itype=_type(r.itype),
            winner=r.winner,
            timestamp=r.timestamp,
        )
        for r in records
    ]
    return out, entities, types
