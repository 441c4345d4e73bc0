import pytest

from model import SystemParams

GAMMA0 = 1e-3


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run large-N, full-scan and runtime-scaling regressions")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def make_params():
    """SystemParams from N and lambda in units of gamma0."""
    def make(n_atoms: int, ratio: float = 0.0, **kwargs) -> SystemParams:
        return SystemParams(n_atoms=n_atoms, gamma0=GAMMA0, lam=ratio * GAMMA0, **kwargs)
    return make
