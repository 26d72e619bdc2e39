import json

import pytest
from fastapi.testclient import TestClient

from hetbounds import load_problem, solve_problem
from hetbounds.server import create_app


@pytest.fixture
def worked_client(fixtures_dir):
    problem = load_problem(fixtures_dir / "worked_example.json")
    return TestClient(create_app(problem)), problem


@pytest.fixture
def years_client(fixtures_dir):
    problem = load_problem(fixtures_dir / "college_years.json")
    return TestClient(create_app(problem)), problem


class TestHealth:
    def test_ok(self, worked_client):
        client, _ = worked_client
        resp = client.get("/api/health")
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["status"] == "ok"
        assert len(doc["snapshot"]) == 12


class TestModel:
    def test_matches_solver(self, years_client):
        client, problem = years_client
        resp = client.get("/api/model")
        assert resp.status_code == 200
        doc = resp.json()
        expected = json.loads(solve_problem(problem).to_json())
        assert doc["feasible"] is True
        assert doc["univariate_table"] == expected["univariate_table"]
        assert doc["settings"] == problem.labels
        assert len(doc["rho"]["pairs"]) == 10

    def test_unknown_snapshot_404(self, worked_client):
        client, _ = worked_client
        resp = client.get("/api/model", params={"snapshot": "ffffffffffff"})
        assert resp.status_code == 404

    def test_byte_identical_responses(self, years_client):
        client, _ = years_client
        assert client.get("/api/model").content == client.get("/api/model").content


class TestPin:
    def test_value_pin(self, worked_client):
        client, _ = worked_client
        resp = client.post("/api/pin", json={"setting": "j", "value": 0.0})
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["feasible"] is True
        assert doc["conditional"]["k"] == [0.0, 1.0]
        assert doc["conditional"]["j"] == [0.0, 0.0]

    def test_fraction_pin(self, worked_client):
        client, _ = worked_client
        resp = client.post("/api/pin", json={"setting": "j", "fraction": 1.0})
        doc = resp.json()
        assert doc["pinned_value"] == 2.0
        assert doc["conditional"]["k"] == [1.0, 2.0]

    def test_outside_marginal_reports_infeasible(self, worked_client):
        client, _ = worked_client
        resp = client.post("/api/pin", json={"setting": "j", "value": 5.0})
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["feasible"] is False
        assert doc["conditional"] is None

    def test_both_value_and_fraction_422(self, worked_client):
        client, _ = worked_client
        resp = client.post("/api/pin", json={"setting": "j", "value": 0.0, "fraction": 0.5})
        assert resp.status_code == 422

    def test_neither_422(self, worked_client):
        client, _ = worked_client
        assert client.post("/api/pin", json={"setting": "j"}).status_code == 422

    def test_fraction_range_422(self, worked_client):
        client, _ = worked_client
        resp = client.post("/api/pin", json={"setting": "j", "fraction": 1.5})
        assert resp.status_code == 422

    def test_unknown_setting_404(self, worked_client):
        client, _ = worked_client
        resp = client.post("/api/pin", json={"setting": "zzz", "value": 0.0})
        assert resp.status_code == 404


class TestRhoEdits:
    def test_edit_creates_new_snapshot(self, worked_client):
        client, _ = worked_client
        base = client.get("/api/model").json()["snapshot"]
        resp = client.post(
            "/api/rho",
            json={"edits": [{"j": "j", "k": "k", "rho_l": 0.9, "rho_u": 1.1}]},
        )
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["feasible"] is True
        assert doc["snapshot"] != base
        model = client.get("/api/model", params={"snapshot": doc["snapshot"]}).json()
        [pair] = model["rho"]["pairs"]
        assert pair["rho_l"] == 0.9 and pair["rho_u"] == 1.1

    def test_base_snapshot_untouched(self, worked_client):
        client, _ = worked_client
        before = client.get("/api/model").content
        client.post(
            "/api/rho",
            json={"edits": [{"j": "j", "k": "k", "rho_l": 0.99, "rho_u": 1.01}]},
        )
        assert client.get("/api/model").content == before

    def test_unrestricted_edit(self, worked_client):
        client, _ = worked_client
        resp = client.post(
            "/api/rho", json={"edits": [{"j": "j", "k": "k", "unrestricted": True}]}
        )
        model = client.get("/api/model", params={"snapshot": resp.json()["snapshot"]}).json()
        assert model["rho"]["pairs"] == []

    def test_same_edit_same_snapshot_id(self, worked_client):
        client, _ = worked_client
        body = {"edits": [{"j": "j", "k": "k", "rho_l": 0.8, "rho_u": 1.25}]}
        one = client.post("/api/rho", json=body).json()["snapshot"]
        two = client.post("/api/rho", json=body).json()["snapshot"]
        assert one == two

    def test_pin_against_edited_snapshot(self, worked_client):
        client, _ = worked_client
        snap = client.post(
            "/api/rho",
            json={"edits": [{"j": "j", "k": "k", "rho_l": 1.0, "rho_u": 1.0}]},
        ).json()["snapshot"]
        resp = client.post(
            "/api/pin", json={"setting": "j", "value": 0.5, "snapshot": snap}
        )
        doc = resp.json()
        assert doc["feasible"] is True
        # with rho fixed at 1 the bias difference is zero, so pinning j pins
        # k at the same distance from its estimate
        assert doc["conditional"]["k"] == [0.5, 0.5]

    def test_invalid_bounds_422(self, worked_client):
        client, _ = worked_client
        resp = client.post(
            "/api/rho", json={"edits": [{"j": "j", "k": "k", "rho_l": 2.0, "rho_u": 0.5}]}
        )
        assert resp.status_code == 422

    def test_partial_bounds_422(self, worked_client):
        client, _ = worked_client
        resp = client.post("/api/rho", json={"edits": [{"j": "j", "k": "k", "rho_l": 0.9}]})
        assert resp.status_code == 422

    def test_unknown_setting_404(self, worked_client):
        client, _ = worked_client
        resp = client.post(
            "/api/rho", json={"edits": [{"j": "j", "k": "zzz", "rho_l": 0.9, "rho_u": 1.1}]}
        )
        assert resp.status_code == 404
