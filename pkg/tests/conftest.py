import pytest

from flexwing import certificates as cert
from flexwing.model import ControlLaw, default_model


@pytest.fixture(scope="session")
def model():
    return default_model()


@pytest.fixture(scope="session")
def certificate(model):
    return cert.feasibility_search(model, gains=(10.0, 4.0), seed=0)


@pytest.fixture(scope="session")
def certified_law(certificate):
    p = certificate.witness_params
    return ControlLaw(10.0, 4.0, p.eps1, p.eps2)
