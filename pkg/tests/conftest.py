import pytest

from isingqei import (BumpProfile, FockStateSpec, Model, QuadratureConfig,
                      SmearingFunction, TwoBumpParams, make_two_bump)


@pytest.fixture(scope="session")
def cfg():
    return QuadratureConfig()


@pytest.fixture(scope="session")
def gaussian_profile():
    return BumpProfile.gaussian()


@pytest.fixture(scope="session")
def fig1_packet(cfg, gaussian_profile):
    """The two-bump packet used throughout: alpha=0.5, beta=-0.04, gamma=5."""
    return make_two_bump(TwoBumpParams(0.5, -0.04, 5.0), gaussian_profile, cfg)


@pytest.fixture(scope="session")
def tame_packet(cfg, gaussian_profile):
    """Low-rapidity packet for checks where oscillation cost matters."""
    return make_two_bump(TwoBumpParams(0.8, 0.5, 1.0), gaussian_profile, cfg)


@pytest.fixture(scope="session")
def fig1_state(fig1_packet):
    return FockStateSpec.product(1, fig1_packet)


@pytest.fixture(scope="session")
def default_bump():
    return SmearingFunction.bump()


@pytest.fixture(scope="session")
def ising():
    return Model.ising()


@pytest.fixture(scope="session")
def free():
    return Model.free_boson()
