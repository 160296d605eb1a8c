import pytest

from renormlab.paramgeo import enumerate_windows

D = 50


@pytest.fixture(scope="session")
def windows3():
    return enumerate_windows(P=3, dps=D)


@pytest.fixture(scope="session")
def windows4():
    return enumerate_windows(P=4, dps=D)


@pytest.fixture(scope="session")
def c_feigenbaum():
    from renormlab.hyper import feigenbaum_parameter
    return feigenbaum_parameter(dps=D)


@pytest.fixture(scope="session")
def gstar():
    from renormlab.hyper import periodic_germ
    return periodic_germ((2,), 40, D)


@pytest.fixture(scope="session")
def gstar_jacobian(gstar):
    from renormlab.germ import jacobian
    return jacobian(gstar, (2,))
