"""Shared fixtures: the small markets used throughout the tests."""

from __future__ import annotations

import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from multimatch.market import (
    ComplementarityPattern,
    DiscreteMeasure,
    MarketInstance,
    MatchingMeasure,
    Quadratic,
)

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = Path(__file__).parent / "data"

T = [(10, 10), (10, 20), (20, 10), (20, 20)]

INTRO_FIRMS = {(10, 10): 4, (10, 20): 1, (20, 10): 1, (20, 20): 4}
INTRO_WORKERS = {(10, 10): 1, (10, 20): 4, (20, 10): 4, (20, 20): 1}
INTRO_COUNTS = [[1, 0, 3, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 3, 0, 1]]

PP = ComplementarityPattern([(1, 1), (2, 2)])


def unit_scheme(partner: dict) -> MatchingMeasure:
    return MatchingMeasure.from_dict({(x, y): 1 for x, y in partner.items()})


# the three four-couple schemes on the market with one agent of each type
SCHEME1 = {T[0]: T[3], T[1]: T[1], T[2]: T[2], T[3]: T[0]}
SCHEME2 = {t: t for t in T}
SCHEME3 = {T[0]: T[1], T[1]: T[3], T[2]: T[0], T[3]: T[2]}


@pytest.fixture
def intro_market() -> MarketInstance:
    return MarketInstance(DiscreteMeasure.from_dict(INTRO_FIRMS), DiscreteMeasure.from_dict(INTRO_WORKERS))


@pytest.fixture
def intro_q() -> Quadratic:
    return Quadratic([[1, 0], [0, 2]])


@pytest.fixture
def intro_counts() -> MatchingMeasure:
    return MatchingMeasure.from_matrix(T, T, INTRO_COUNTS)


@pytest.fixture
def pattern_pp() -> ComplementarityPattern:
    return PP


def two_type_market(firms, workers) -> MarketInstance:
    return MarketInstance(DiscreteMeasure.from_dict({f: 1 for f in firms}),
                          DiscreteMeasure.from_dict({w: 1 for w in workers}))


@pytest.fixture
def mixed_market() -> MarketInstance:
    return two_type_market([(10, 10), (20, 20)], [(10, 20), (20, 10)])


@pytest.fixture
def swapped_market() -> MarketInstance:
    return two_type_market([(10, 20), (20, 10)], [(10, 20), (20, 10)])


# cross couplings of the mixed market: M pairs on the first attribute, M' on the second
CROSS_M = MatchingMeasure.from_dict({((10, 10), (10, 20)): 1, ((20, 20), (20, 10)): 1})
CROSS_MP = MatchingMeasure.from_dict({((10, 10), (20, 10)): 1, ((20, 20), (10, 20)): 1})
