"""
Shared fixtures: settings isolated per test, example documents and an API client.
"""
import json

import pytest

from app.config import get_settings
from app.epidemic import EpidemicParams
from app.periods import PeriodDistribution


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    monkeypatch.setenv("SEIRKIT_THREADS", "1")
    monkeypatch.setenv("SEIRKIT_OUTPUT_DIR", str(tmp_path / "runs"))
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def seir_document():
    """lambda = 1.8, L ~ Exp(2), I ~ Exp(1), 100 susceptibles."""
    return {
        "model": "SEIR",
        "params": {"lambda": 1.8, "nu": 2.0, "gamma": 1.0},
        "population": 100,
    }


@pytest.fixture
def reed_frost_document():
    return {
        "model": "SIR",
        "params": {"lambda": 2.0},
        "infectious": {"kind": "constant", "value": 1.0},
        "population": 10,
    }


@pytest.fixture
def measles_document():
    return {
        "model": "SIR-demography",
        "params": {"lambda": 750.0, "gamma": 3749.0 / 75.0, "mu": 1.0 / 75.0},
        "population": 10_000_000,
    }


@pytest.fixture
def sis_document():
    return {"model": "SIS", "params": {"lambda": 2.0, "gamma": 1.0}, "population": 30,
            "initial_infectives": 15}


@pytest.fixture
def write_document(tmp_path):
    def write(document, name="model.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path
    return write


@pytest.fixture
def markov_sir():
    def build(contact_rate, population, initial_infectives=1, gamma=1.0):
        return EpidemicParams(
            contact_rate=contact_rate,
            infectious=PeriodDistribution.exponential(gamma),
            population=population,
            initial_infectives=initial_infectives,
        )
    return build


@pytest.fixture
def reed_frost():
    def build(contact_rate, population, initial_infectives=1):
        return EpidemicParams(
            contact_rate=contact_rate,
            infectious=PeriodDistribution.constant(1.0),
            population=population,
            initial_infectives=initial_infectives,
        )
    return build


@pytest.fixture
def client():
    from fastapi.testclient import TestClient

    from app.main import app

    return TestClient(app)
