"""Shared fixtures and dataset builders for the test suite."""

from datetime import date, timedelta

import numpy as np
import pytest

from ahpi.model import (
    EntityId,
    InteractionRecord,
    InteractionType,
    ModelParams,
    Winner,
)

DAY0 = date(2010, 1, 1)


def make_entities(k: int) -> list[EntityId]:
    return [EntityId(i, f"firm-{i:03d}") for i in range(k)]


def make_types(m: int) -> list[InteractionType]:
    return [InteractionType(i, f"type-{i}") for i in range(m)]


def make_record(entities, types, pla: int, dfd: int, t: int, winner: str, day: int = 0):
    return InteractionRecord(
        plaintiff=entities[pla],
        defendant=entities[dfd],
        itype=types[t],
        winner=Winner(winner),
        timestamp=DAY0 + timedelta(days=day),
    )


def random_records(rng: np.random.Generator, k: int, m: int, n: int):
    """Arbitrary (not model-driven) records over k entities and m types."""
    entities = make_entities(k)
    types = make_types(m)
    records = []
    for i in range(n):
        pla = int(rng.integers(0, k))
        dfd = int((pla + 1 + rng.integers(0, k - 1)) % k)
        records.append(
            make_record(
                entities,
                types,
                pla,
                dfd,
                int(rng.integers(0, m)),
                "D" if rng.random() < 0.5 else "P",
                day=i,
            )
        )
    return records, entities, types


def random_params(rng: np.random.Generator, k: int, m: int) -> ModelParams:
    return ModelParams(
        scores=rng.normal(0.0, 1.0, size=k),
        privileges=rng.normal(0.0, 1.0, size=m),
        valences=rng.uniform(0.05, 0.95, size=m),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240211)
