"""Interaction network and dense-core extraction via the Q-factor.

The Q-factor of a network is N/K: interactions per entity.  Sparse
networks give unreliable score fits, so the fitting pipeline trims to a
target Q by repeatedly deleting the entity with the fewest interactions
(ties broken by ascending entity id) together with all its interactions,
stopping the first time N/K reaches the target.  The deletion order does
not depend on the target, so trims at increasing targets are nested.
"""

import heapq
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import InfeasibleTargetError, InvalidArgumentError
from .model import EntityId, InteractionRecord

__all__ = ["InteractionNetwork", "QReport", "q_factor", "trim_to_q"]


class InteractionNetwork:
    """Entities plus the interactions among them, with degree bookkeeping.

    ``entities`` may include isolated entities (degree 0); they count
    toward K.  Degrees count interactions, parallel edges included.
    """

    def __init__(
        self,
        interactions: Iterable[InteractionRecord],
        entities: Iterable[EntityId] | None = None,
    ):
        self._interactions: tuple[InteractionRecord, ...] = tuple(interactions)
        by_id: dict[int, EntityId] = {}
        degree: dict[int, int] = {}
        if entities is not None:
            for e in entities:
                by_id[e.id] = e
                degree[e.id] = 0
        for rec in self._interactions:
            for e in (rec.plaintiff, rec.defendant):
                if e.id not in by_id:
                    if entities is not None:
                        raise InvalidArgumentError(
                            f"interaction references entity {e.id} outside the entity set"
                        )
                    by_id[e.id] = e
                    degree[e.id] = 0
                degree[e.id] += 1
        self._entities = by_id
        self._degree = degree

    @property
    def interactions(self) -> tuple[InteractionRecord, ...]:
        return self._interactions

    @property
    def entities(self) -> list[EntityId]:
        return [self._entities[i] for i in sorted(self._entities)]

    @property
    def degrees(self) -> Mapping[int, int]:
        return dict(self._degree)

    @property
    def n_interactions(self) -> int:
        return len(self._interactions)

    @property
    def k_entities(self) -> int:
        return len(self._entities)


@dataclass(frozen=True)
class QReport:
    """Outcome of one trim: achieved density, sizes, and the deletion order."""

    q_achieved: float
    n_interactions: int
    k_entities: int
    removal_order: tuple[EntityId, ...]

    def to_json_dict(self) -> dict:
        return {
            "q_achieved": self.q_achieved,
            "n": self.n_interactions,
            "k": self.k_entities,
            "removed": [e.label for e in self.removal_order],
        }


def q_factor(net: InteractionNetwork) -> float:
    """Interactions per entity, N/K."""
    if net.k_entities == 0:
        raise InvalidArgumentError("Q-factor is undefined for an empty network")
    return net.n_interactions / net.k_entities


def trim_to_q(net: InteractionNetwork, target_q: float) -> tuple[InteractionNetwork, QReport]:
    """Extract the dense core meeting ``target_q`` by minimum-degree deletion.

    One entity is removed per step (lowest degree, then lowest id), its
    interactions are dropped, and degrees are updated, until N/K >= target.
    Deterministic; raises :class:`InfeasibleTargetError` if the network
    empties first.
    """
    if target_q <= 0:
        raise InvalidArgumentError("target_q must be positive")
    if q_factor(net) >= target_q:
        return net, QReport(q_factor(net), net.n_interactions, net.k_entities, ())

    records = net.interactions
    incident: dict[int, list[int]] = {eid: [] for eid in net.degrees}
    for idx, rec in enumerate(records):
        incident[rec.plaintiff.id].append(idx)
        incident[rec.defendant.id].append(idx)

    degree = dict(net.degrees)
    alive_entity = {eid: True for eid in degree}
    alive_record = [True] * len(records)
    entity_by_id = {e.id: e for e in net.entities}
    n_live = len(records)
    k_live = len(degree)

    heap: list[tuple[int, int]] = [(d, eid) for eid, d in degree.items()]
    heapq.heapify(heap)
    removed: list[EntityId] = []

    while True:
        while heap:
            d, eid = heapq.heappop(heap)
            if alive_entity[eid] and degree[eid] == d:
                break
        else:
            raise InfeasibleTargetError(
                f"network exhausted before reaching Q={target_q}"
            )
        alive_entity[eid] = False
        removed.append(entity_by_id[eid])
        k_live -= 1
        for idx in incident[eid]:
            if not alive_record[idx]:
                continue
            alive_record[idx] = False
            n_live -= 1
            rec = records[idx]
            other = rec.defendant.id if rec.plaintiff.id == eid else rec.plaintiff.id
            if alive_entity[other]:
                degree[other] -= 1
                heapq.heappush(heap, (degree[other], other))
        if k_live == 0:
            raise InfeasibleTargetError(f"network exhausted before reaching Q={target_q}")
        if n_live / k_live >= target_q:
            break

    surviving_records = [rec for idx, rec in enumerate(records) if alive_record[idx]]
    surviving_entities = [entity_by_id[eid] for eid in sorted(degree) if alive_entity[eid]]
    trimmed = InteractionNetwork(surviving_records, surviving_entities)
    report = QReport(
        q_achieved=n_live / k_live,
        n_interactions=n_live,
        k_entities=k_live,
        removal_order=tuple(removed),
    )
    return trimmed, report


