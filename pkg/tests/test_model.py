"""Forward-model unit tests: sigmoid axioms, two-stage probabilities, symmetry."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ahpi.errors import InvalidArgumentError, UnknownReferenceError
from ahpi.model import (
    EntityId,
    InteractionRecord,
    InteractionType,
    ModelParams,
    RecordArrays,
    Winner,
    data_log_likelihood,
    favored_probability,
    log_posterior,
    reindex_records,
    sigmoid,
    symmetry_map,
    win_probability,
)

from conftest import make_entities, make_record, make_types, random_params, random_records


class TestSigmoid:
    def test_monotone(self):
        xs = np.linspace(-30, 30, 2001)
        ys = sigmoid(xs)
        assert np.all(np.diff(ys) > 0)

    def test_limits(self):
        assert sigmoid(-50.0) < 1e-21
        assert sigmoid(50.0) >= 1 - 1e-21

    @given(st.floats(min_value=-700, max_value=700, allow_nan=False))
    @settings(max_examples=300)
    def test_complementarity(self, x):
        assert abs(sigmoid(x) + sigmoid(-x) - 1.0) <= 1e-12

    def test_stable_at_700(self):
        with np.errstate(all="raise"):
            lo = sigmoid(-700.0)
            hi = sigmoid(700.0)
        assert 0.0 <= lo < hi <= 1.0
        assert math.isfinite(lo) and math.isfinite(hi)


class TestFavoredProbability:
    def test_symmetric_case(self):
        assert favored_probability(0.0, 0.0, 0.0) == 0.5

    def test_privilege_penalty(self):
        # direct scalar evaluation, privilege 2.03
        expected = 1.0 / (1.0 + math.exp(2.03))
        assert favored_probability(0.0, 0.0, 2.03) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.1160, abs=5e-4)

    @given(
        st.floats(-20, 20, allow_nan=False),
        st.floats(-20, 20, allow_nan=False),
        st.floats(-20, 20, allow_nan=False),
    )
    @settings(max_examples=200)
    def test_complementary_pair(self, x, y, e):
        total = favored_probability(x, y, e) + favored_probability(y + e, x - e, e)
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_monotonicity(self):
        base = favored_probability(0.3, -0.2, 0.5)
        assert favored_probability(0.4, -0.2, 0.5) > base
        assert favored_probability(0.3, -0.1, 0.5) < base
        assert favored_probability(0.3, -0.2, 0.6) < base

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), float("-inf")])
    def test_nonfinite_rejected(self, bad):
        with pytest.raises(InvalidArgumentError):
            favored_probability(bad, 0.0, 0.0)
        with pytest.raises(InvalidArgumentError):
            favored_probability(0.0, bad, 0.0)
        with pytest.raises(InvalidArgumentError):
            favored_probability(0.0, 0.0, bad)


class TestWinProbability:
    def test_pure_luck(self):
        assert win_probability(0.9, 0.5) == pytest.approx(0.5)

    def test_pure_skill(self):
        assert win_probability(0.7, 1.0) == pytest.approx(0.7)

    def test_two_stage_value(self):
        rho = 1.0 / (1.0 + math.exp(2.03))
        expected = 0.86 * rho + 0.14 * (1.0 - rho)
        assert win_probability(rho, 0.86) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.2235, abs=5e-4)

    @given(st.floats(0, 1, allow_nan=False), st.floats(0.5, 1, allow_nan=False))
    @settings(max_examples=200)
    def test_affine_with_nonnegative_slope(self, rho, q):
        # win_probability(rho, q) = (1-q) + (2q-1) * rho
        assert win_probability(rho, q) == pytest.approx((1 - q) + (2 * q - 1) * rho, abs=1e-12)
        assert win_probability(min(1.0, rho + 0.1), q) >= win_probability(rho, q) - 1e-12

    @pytest.mark.parametrize("rho,q", [(-0.1, 0.5), (1.1, 0.5), (0.5, -0.01), (0.5, 1.01)])
    def test_out_of_range_rejected(self, rho, q):
        with pytest.raises(InvalidArgumentError):
            win_probability(rho, q)


class TestSymmetryMap:
    def test_componentwise(self):
        params = ModelParams(scores=[0.3, -0.3], privileges=[1.0], valences=[0.9])
        mapped = symmetry_map(params)
        np.testing.assert_allclose(mapped.scores, [-0.3, 0.3])
        np.testing.assert_allclose(mapped.privileges, [-1.0])
        np.testing.assert_allclose(mapped.valences, [0.1])

    def test_involution(self, rng):
        for _ in range(20):
            params = random_params(rng, 5, 3)
            twice = symmetry_map(symmetry_map(params))
            np.testing.assert_allclose(twice.scores, params.scores, atol=1e-15)
            np.testing.assert_allclose(twice.privileges, params.privileges, atol=1e-15)
            np.testing.assert_allclose(twice.valences, params.valences, atol=1e-15)

    def test_likelihood_invariant(self, rng):
        records, _, _ = random_records(rng, 3, 2, 10)
        for _ in range(20):
            params = random_params(rng, 3, 2)
            ll = data_log_likelihood(records, params)
            ll_mapped = data_log_likelihood(records, symmetry_map(params))
            assert ll_mapped == pytest.approx(ll, rel=1e-9)

    def test_log_posterior_invariant(self, rng):
        records, _, _ = random_records(rng, 4, 2, 15)
        params = random_params(rng, 4, 2)
        assert log_posterior(records, symmetry_map(params)) == pytest.approx(
            log_posterior(records, params), rel=1e-9
        )


class TestModelParams:
    def test_lambda_consistency(self, rng):
        params = random_params(rng, 6, 2)
        np.testing.assert_allclose(params.lambdas, np.exp(params.scores), rtol=1e-12)
        assert np.all(params.lambdas > 0)

    def test_immutable(self, rng):
        params = random_params(rng, 3, 1)
        with pytest.raises(ValueError):
            params.scores[0] = 1.0

    def test_valence_range_enforced(self):
        with pytest.raises(InvalidArgumentError):
            ModelParams(scores=[0.0], privileges=[0.0], valences=[1.2])

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidArgumentError):
            ModelParams(scores=[float("nan")], privileges=[0.0], valences=[0.5])


class TestRecords:
    def test_self_play_rejected(self):
        entities = make_entities(2)
        types = make_types(1)
        with pytest.raises(InvalidArgumentError):
            InteractionRecord(
                plaintiff=entities[0],
                defendant=EntityId(0, "other-label"),
                itype=types[0],
                winner=Winner.PLAINTIFF,
                timestamp=make_record(entities, types, 0, 1, 0, "P").timestamp,
            )

    def test_record_arrays_shape(self, rng):
        records, _, _ = random_records(rng, 5, 2, 30)
        arr = RecordArrays.from_records(records)
        assert len(arr) == 30
        assert arr.n_entities == 5
        assert arr.n_types == 2
        assert arr.type_counts.sum() == 30

    def test_record_arrays_unknown_entity(self, rng):
        records, _, _ = random_records(rng, 5, 2, 10)
        with pytest.raises(UnknownReferenceError):
            RecordArrays.from_records(records, n_entities=3)

    def test_reindex_dense_by_first_appearance(self):
        entities = [EntityId(10, "a"), EntityId(99, "b"), EntityId(7, "c")]
        types = [InteractionType(5, "t0")]
        original = [
            make_record(
                {10: entities[0], 99: entities[1], 7: entities[2]}, {5: types[0]}, 99, 7, 5, "D"
            )
        ]
        rebuilt, new_entities, new_types = reindex_records(original)
        assert [e.label for e in new_entities] == ["b", "c"]
        assert [e.id for e in new_entities] == [0, 1]
        assert new_types[0].id == 0
        assert rebuilt[0].plaintiff.label == "b"
