import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tresca.assembly import ProblemSpec, build_system
from tresca.benchmarks import SLIP, STICK
from tresca.mesh import generate_unit_square
from tresca.mixed_solver import solve_pdas

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def _bench(params, n):
    spec = ProblemSpec(**params)
    m = generate_unit_square(n)
    sys = build_system(m, spec)
    return m, spec, sys


@pytest.fixture(scope="module")
def slip16():
    m, spec, sys = _bench(SLIP, 16)
    return m, spec, sys, solve_pdas(sys, spec)


@pytest.fixture(scope="module")
def stick16():
    m, spec, sys = _bench(STICK, 16)
    return m, spec, sys, solve_pdas(sys, spec)


@pytest.fixture(params=["slip", "stick"])
def bench16(request, slip16, stick16):
    return slip16 if request.param == "slip" else stick16


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"ACCEPTANCE {criterion} {'PASS' if passed else 'FAIL'}  {detail}")
