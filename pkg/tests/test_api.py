import pytest
from fastapi.testclient import TestClient

from app.config import settings
from app.factory import create_app
from app.lab.scenarios import BUILTIN_SCENARIOS
from app.lab.verify import IDENTITIES

SMALL = {"replicates": 40, "n_grid": "4,8,16", "refine": 2, "strict": False, "seed": 5}


@pytest.fixture
def client(no_rate_limit):
    with TestClient(create_app()) as client:
        yield client


def test_root_and_health(client):
    assert client.get("/").json()["status"] == "running"
    health = client.get("/health").json()
    assert health["status"] == "healthy"
    assert health["scenarios_loaded"] == len(BUILTIN_SCENARIOS)
    assert health["scenarios_failed"] == []


def test_list_scenarios(client):
    response = client.get("/scenarios/")
    assert response.status_code == 200
    assert {s["name"] for s in response.json()} == set(BUILTIN_SCENARIOS)


def test_verify_identities(client):
    response = client.post("/scenarios/verify", json={"seeds": 2})
    assert response.status_code == 200
    body = response.json()
    assert body["passed"]
    assert len(body["identities"]) == len(IDENTITIES)


def test_invalid_requests_return_field_errors(client):
    response = client.post("/scenarios/run", json={"scenario": "poisson"})
    assert response.status_code == 422
    assert response.json()["detail"][0]["field"] == "scenario"

    response = client.post("/scenarios/run", json={"scenario": "scalar-wz", "overrides": {"n_grid": "16,8"}})
    assert response.status_code == 422
    assert "n_grid" in [item["field"] for item in response.json()["detail"]]


def test_run_returns_report(client):
    response = client.post("/scenarios/run", json={"scenario": "scalar-wz", "overrides": SMALL, "write": False})
    assert response.status_code == 200
    report = response.json()
    assert report["scenario"] == "scalar-wz"
    assert [level["n"] for level in report["levels"]] == [4, 8, 16]
    assert not (settings.output_path / "scalar-wz").exists()


def test_failed_run_returns_conflict_with_report(client, monkeypatch):
    monkeypatch.setattr(settings, "blowup_threshold", 1.5)
    response = client.post("/scenarios/run", json={"scenario": "scalar-wz", "overrides": SMALL, "write": False})
    assert response.status_code == 409
    detail = response.json()["detail"]
    assert "report" in detail
    assert any(level["aborted"] > 0 for level in detail["report"]["levels"])
