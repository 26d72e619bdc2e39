import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))

FIXTURES = TESTS_DIR.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture()
def worked_example():
    """The two-setting symmetric example: theta_s = 1 each, nu = [-1, 1],
    rho = [1/2, 2]."""
    import hetbounds as hb

    estimates = [hb.SettingEstimate("j", 1.0), hb.SettingEstimate("k", 1.0)]
    nus = [hb.BiasBound(-1.0, 1.0), hb.BiasBound(-1.0, 1.0)]
    m = hb.RhoMatrix(("j", "k"))
    m.set_pair("j", "k", hb.Restricted(0.5, 2.0))
    return estimates, nus, m
