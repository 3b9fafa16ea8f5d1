from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

from repairkit.textio import parse_constraints, parse_database, parse_query

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

KEYS_TEXT = "key R : 1\nkey R : 2\n"


@pytest.fixture
def keys12():
    return parse_constraints(KEYS_TEXT)


@pytest.fixture
def worked_db():
    """Three facts whose conflicts form a path of length 2."""
    return parse_database("R(a,b)\nR(c,b)\nR(c,d)\n")


@pytest.fixture
def ex1_db():
    return parse_database("R(a,b)\nR(c,b)\nR(c,d)\nR(e,d)\nR(e,f)\n")


@pytest.fixture
def ex1_query():
    return parse_query("R(a,b)\n")
