import os
import sys

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("pegeom", deadline=None, max_examples=25, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "pegeom"))


@pytest.fixture(scope="session")
def s2():
    from pegeom.catalog import resolve
    return resolve("sphere(2,1)")


@pytest.fixture(scope="session")
def h2():
    from pegeom.catalog import resolve
    return resolve("hyperbolic(2,1)")


@pytest.fixture(scope="session")
def s2s2():
    from pegeom.catalog import resolve
    return resolve("einstein_product(sphere(2,1),sphere(2,1),1)")


@pytest.fixture(scope="session")
def amb_s2h2(s2, h2):
    from pegeom.constructions import ambient_metric
    return ambient_metric(s2, h2)


@pytest.fixture(scope="session")
def poincare_s2h2(s2, h2):
    from pegeom.constructions import poincare_metric
    return poincare_metric(s2, h2)


@pytest.fixture(scope="session")
def killing_s2h2(poincare_s2h2):
    from pegeom.constructions import special_killing_form
    return special_killing_form(poincare_s2h2)


@pytest.fixture(scope="session")
def cone_pair_s2h2(s2, h2):
    from pegeom.constructions import cone_product, metric_cone
    return cone_product(metric_cone(s2, "s1"), metric_cone(h2, "s2"))


@pytest.fixture(scope="session")
def cone_s2s2(s2s2):
    from pegeom.constructions import metric_cone
    return metric_cone(s2s2)


@pytest.fixture
def plan():
    from pegeom.verifier import SamplePlan
    return SamplePlan(seed=0, count=8)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for text in mod.summary_lines():
        terminalreporter.write_line(text)
