import math

import pytest
from hypothesis import HealthCheck, settings

from scaled_homology import from_point_cloud

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    if config.acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in config.acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    return request.config.acceptance_lines


@pytest.fixture(scope="session")
def hexagon():
    return from_point_cloud([(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)])


@pytest.fixture(scope="session")
def collinear():
    return from_point_cloud([0, 1, 2])
