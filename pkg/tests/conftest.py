import pytest

from online_supervisor.dfa import translate
from online_supervisor.product import build_product
from online_supervisor.ranking import compute_ranking
from online_supervisor.surveillance import build_surveillance_example


@pytest.fixture(scope="session")
def surveillance():
    return build_surveillance_example()


@pytest.fixture(scope="session")
def plant(surveillance):
    return surveillance[0]


@pytest.fixture(scope="session")
def spec(surveillance):
    return surveillance[1]


@pytest.fixture(scope="session")
def spec_dfa(plant, spec):
    return translate(spec, ap=plant.ap)


@pytest.fixture(scope="session")
def product(plant, spec_dfa):
    return build_product(plant, spec_dfa)


@pytest.fixture(scope="session")
def ranking(product):
    return compute_ranking(product)
