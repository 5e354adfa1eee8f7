"""Interaction-network and Q-factor trimming tests."""

import pytest

from ahpi.errors import InfeasibleTargetError, InvalidArgumentError
from ahpi.model import EntityId
from ahpi.network import InteractionNetwork, q_factor, trim_to_q

from conftest import make_entities, make_record, make_types


def star_network():
    """Hub entity 0 with 10 spokes: 10 interactions over 11 entities."""
    entities = make_entities(11)
    types = make_types(1)
    records = [make_record(entities, types, i, 0, 0, "D", day=i) for i in range(1, 11)]
    return InteractionNetwork(records), records


def core_plus_spokes():
    """Dense 5-entity round-robin core plus 10 degree-1 spokes.

    N=50 over K=15 (Q=10/3); trimming sheds the spokes first and the
    density climbs, so targets modestly above 10/3 are feasible.
    """
    entities = make_entities(15)
    types = make_types(1)
    records = []
    day = 0
    for a in range(5):
        for b in range(a + 1, 5):
            for _ in range(4):
                records.append(make_record(entities, types, a, b, 0, "D", day))
                day += 1
    for spoke in range(5, 15):
        records.append(make_record(entities, types, spoke, 0, 0, "P", day))
        day += 1
    return InteractionNetwork(records), records


def simulate_trim(net: InteractionNetwork, target: float):
    """Reference simulation: literal re-scan of degrees each step."""
    entities = {e.id for e in net.entities}
    records = list(net.interactions)
    removed = []
    while True:
        if entities and len(records) / len(entities) >= target:
            return entities, records, removed
        if not entities:
            raise InfeasibleTargetError("exhausted")
        degree = {e: 0 for e in entities}
        for r in records:
            degree[r.plaintiff.id] += 1
            degree[r.defendant.id] += 1
        victim = min(entities, key=lambda e: (degree[e], e))
        entities.remove(victim)
        removed.append(victim)
        records = [
            r for r in records if r.plaintiff.id != victim and r.defendant.id != victim
        ]
        if not entities:
            raise InfeasibleTargetError("exhausted")


class TestQFactor:
    def test_full_dataset_shape(self):
        # 167,439 interactions over 54,541 entities: Q rounds to 3.1
        entities = make_entities(3)
        net = InteractionNetwork([], entities=[EntityId(i, f"e{i}") for i in range(54_541)])
        assert net.k_entities == 54_541
        assert q_factor(net) == 0.0
        assert round(167_439 / 54_541, 1) == 3.1

    def test_zero_interactions(self):
        net = InteractionNetwork([], entities=[EntityId(0, "a"), EntityId(1, "b")])
        assert q_factor(net) == 0.0

    def test_empty_network_rejected(self):
        with pytest.raises(InvalidArgumentError):
            q_factor(InteractionNetwork([]))

    def test_counts(self):
        net, records = star_network()
        assert net.n_interactions == 10
        assert net.k_entities == 11
        assert q_factor(net) == pytest.approx(10 / 11)
        assert net.degrees[0] == 10
        assert net.degrees[3] == 1


class TestTrim:
    def test_noop_when_already_dense(self):
        net, _ = star_network()
        trimmed, report = trim_to_q(net, 0.5)
        assert report.removal_order == ()
        assert trimmed.n_interactions == net.n_interactions
        assert trimmed.k_entities == net.k_entities

    def test_star_agrees_with_simulation_on_infeasibility(self):
        # spoke removal always deletes one interaction with one entity, so
        # N/K = (10-r)/(11-r) only falls; any target above 10/11 exhausts
        net, _ = star_network()
        with pytest.raises(InfeasibleTargetError):
            trim_to_q(net, 1.2)
        with pytest.raises(InfeasibleTargetError):
            simulate_trim(net, 1.2)

    def test_core_plus_spokes_matches_simulation(self):
        net, _ = core_plus_spokes()
        trimmed, report = trim_to_q(net, 4.0)
        sim_entities, sim_records, sim_removed = simulate_trim(net, 4.0)
        assert {e.id for e in trimmed.entities} == sim_entities
        assert trimmed.n_interactions == len(sim_records)
        assert [e.id for e in report.removal_order] == sim_removed
        assert report.q_achieved >= 4.0
        # spokes (degree 1) go first, in ascending id order
        assert [e.id for e in report.removal_order] == [5, 6, 7, 8]

    def test_random_networks_match_simulation(self, rng):
        from conftest import random_records

        for _ in range(10):
            records, _, _ = random_records(rng, 12, 2, 40)
            net = InteractionNetwork(records)
            target = float(rng.uniform(1.0, 3.4))
            try:
                trimmed, report = trim_to_q(net, target)
            except InfeasibleTargetError:
                with pytest.raises(InfeasibleTargetError):
                    simulate_trim(net, target)
                continue
            sim_entities, sim_records, sim_removed = simulate_trim(net, target)
            assert {e.id for e in trimmed.entities} == sim_entities
            assert trimmed.n_interactions == len(sim_records)
            assert [e.id for e in report.removal_order] == sim_removed

    def test_postcondition_q(self):
        net, _ = core_plus_spokes()
        for target in (3.5, 4.0, 4.4):
            trimmed, report = trim_to_q(net, target)
            assert q_factor(trimmed) >= target
            assert report.q_achieved == pytest.approx(q_factor(trimmed))

    def test_nested_across_targets(self):
        from dataclasses import replace

        from ahpi.synth import generate_with_truth, litigation_config

        config = replace(litigation_config(4000, 400, 5), activity_exponent=1.0)
        net = InteractionNetwork(generate_with_truth(config).records)
        previous = None
        sizes = []
        for target in (12.0, 16.0, 20.0, 24.0):
            trimmed, _ = trim_to_q(net, target)
            current = {e.id for e in trimmed.entities}
            sizes.append((trimmed.n_interactions, trimmed.k_entities))
            if previous is not None:
                assert current <= previous
            previous = current
        ns, ks = zip(*sizes)
        assert list(ns) == sorted(ns, reverse=True)
        assert list(ks) == sorted(ks, reverse=True)

    def test_degrees_consistent_after_trim(self):
        net, _ = core_plus_spokes()
        trimmed, _ = trim_to_q(net, 4.0)
        recount = {e.id: 0 for e in trimmed.entities}
        for r in trimmed.interactions:
            recount[r.plaintiff.id] += 1
            recount[r.defendant.id] += 1
        assert recount == dict(trimmed.degrees)

    def test_no_dangling_interactions(self):
        net, _ = core_plus_spokes()
        trimmed, report = trim_to_q(net, 4.0)
        removed_ids = {e.id for e in report.removal_order}
        for r in trimmed.interactions:
            assert r.plaintiff.id not in removed_ids
            assert r.defendant.id not in removed_ids

    def test_infeasible_target(self):
        net, _ = star_network()
        with pytest.raises(InfeasibleTargetError):
            trim_to_q(net, 1000.0)

    def test_invalid_target(self):
        net, _ = star_network()
        with pytest.raises(InvalidArgumentError):
            trim_to_q(net, 0.0)

    def test_report_json_keys(self):
        net, _ = core_plus_spokes()
        _, report = trim_to_q(net, 4.0)
        payload = report.to_json_dict()
        assert set(payload) == {"q_achieved", "n", "k", "removed"}
        assert all(isinstance(label, str) for label in payload["removed"])

    def test_entity_outside_declared_set_rejected(self):
        entities = make_entities(3)
        types = make_types(1)
        records = [make_record(entities, types, 0, 2, 0, "D")]
        with pytest.raises(InvalidArgumentError):
            InteractionNetwork(records, entities=entities[:2])
