import pytest

from read_config import build_config
from skr import IRREDUCIBLE, REDUCIBLE, polynomial_profile

# Shared profiles and run configurations.


def worked_config_data(**profile_overrides):
    profile = {"mode": IRREDUCIBLE, "phi": [0.5, 0.25], "c_bar": -1.0, "tau_min": -0.5, "a": 1.0,
               "base_curvature": 2.0}
    profile.update(profile_overrides)
    return {
        "profile": profile,
        "numerics": {"series_order": 16, "quadrature_nodes": 32, "fd_step": 1e-4},
        "topology": {"signature": 0, "base_area": 1.0},
    }


def reducible_config_data(q=(1.0, 0.5, -0.25), signature=0):
    return {
        "profile": {"mode": REDUCIBLE, "q": list(q), "tau_min": -1.0, "base_curvature": 1.0},
        "numerics": {"series_order": 16, "quadrature_nodes": 16, "fd_step": 1e-4},
        "topology": {"signature": signature, "base_area": 1.0},
    }


@pytest.fixture
def worked_profile():
    # phi = (tau + 2)/4, c_bar = -1, base curvature 2
    return polynomial_profile(IRREDUCIBLE, [0.5, 0.25], c_bar=-1.0, tau_min=-0.5, base_curv=2.0)


@pytest.fixture
def flat_profile():
    return polynomial_profile(IRREDUCIBLE, [0.5, 0.25], c_bar=-1.0, tau_min=-0.5, base_curv=0.0)


@pytest.fixture
def reducible_profile():
    return polynomial_profile(REDUCIBLE, [1.0, 0.5, -0.25], tau_min=-1.0, base_curv=1.0)


@pytest.fixture
def worked_config(tmp_path):
    data = worked_config_data()
    data["output"] = {"directory": str(tmp_path / "out")}
    return build_config(data)


@pytest.fixture
def reducible_config(tmp_path):
    data = reducible_config_data()
    data["output"] = {"directory": str(tmp_path / "out")}
    return build_config(data)
