"""Shared fixtures: keyed suites are built once per session and reused."""

import pytest

from nmextract.plans import get_plan, suite_for_plan

MASTER = b"smoke-master"


@pytest.fixture(scope="session")
def suites():
    cache = {}

    def build(plan_name: str, master: bytes = MASTER):
        key = (plan_name, master)
        if key not in cache:
            cache[key] = suite_for_plan(get_plan(plan_name), master)
        return cache[key]

    return build
