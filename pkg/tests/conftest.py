"""
Shared fixtures for the blow-up laboratory tests.
"""

import pytest

from blowup_lab.core.model import DOMAIN_BALL, DOMAIN_INTERVAL, FunctionSpec, ProblemSpec


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="run solver-backed acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def make_spec(p=2.0, V=1.0, domain=DOMAIN_INTERVAL, N=1, extent=1.0, potential=None, profile=None):
    return ProblemSpec(
        N=N,
        p=p,
        domain_kind=domain,
        extent=extent,
        potential=potential or FunctionSpec.constant(V),
        profile=profile or FunctionSpec.cosine_cap(),
    )


@pytest.fixture
def interval_spec():
    return make_spec()


@pytest.fixture
def ball_spec():
    return make_spec(domain=DOMAIN_BALL, N=3)


MINIMAL_CONFIG = """\
[problem]
N = 1
p = 2
domain_kind = interval
extent = 1.0
V.kind = constant
V.value = 1.0
phi.kind = cosine_cap
"""


@pytest.fixture
def minimal_config_text():
    return MINIMAL_CONFIG
