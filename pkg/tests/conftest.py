import pytest
from hypothesis import HealthCheck, settings

from subdyn.spectrum import cat_pair, cat_pair_center, common_eigenstructure, tensor_pair

settings.register_profile(
    "subdyn", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("subdyn")


@pytest.fixture(scope="session")
def cat():
    spec = cat_pair()
    return spec, common_eigenstructure(spec)


@pytest.fixture(scope="session")
def cat_center():
    spec = cat_pair_center()
    return spec, common_eigenstructure(spec)


@pytest.fixture(scope="session")
def tensor():
    spec = tensor_pair()
    return spec, common_eigenstructure(spec)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
