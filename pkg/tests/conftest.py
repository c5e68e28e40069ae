import pytest

from rangeshift import (
    DomainKind,
    DomainSpec,
    EnvelopeSpec,
    GrowthModel,
    GrowthVariant,
    SolverConfig,
    build_domain,
    rasterize,
)
from rangeshift.experiments import Scenario


# Acceptance tests append their per-criterion result lines here; the
# terminal summary prints them even when output capture is on.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# Small, quick-to-solve habitat used by most solver/experiment tests.
MINI = DomainSpec(kind=DomainKind.TYPE2, width=8.0, south_length=10.0,
                  corridor_width=2.0, corridor_length=2.0, north_extent=40.0)


@pytest.fixture(scope="session")
def mini_grid():
    return rasterize(build_domain(MINI), 0.5)


@pytest.fixture(scope="session")
def mini_rect_grid():
    spec = DomainSpec(kind=DomainKind.TYPE1, width=8.0, north_extent=40.0)
    return rasterize(build_domain(spec), 0.5)


@pytest.fixture
def mini_scenario():
    return Scenario(
        domain=MINI,
        model=GrowthModel(variant=GrowthVariant.LOGISTIC),
        envelope=EnvelopeSpec(thickness=8.0, speed=1.0),
        solver=SolverConfig(D=2.0, dt=0.02, end_time=8.0),
        dx=0.5,
        cadence=0.5,
    )
