"""
HTTP API
"""
import inspect
import logging

import pytest
from fastapi.routing import APIRoute
from fastapi.testclient import TestClient

from app.core.dependencies import get_jacobian_service
from app.main import app

FLAT = {"vD0": 0.0, "vQ0": 1.0}
DROOP = {"kind": "droop", "params": {"k_pf": 10.0, "k_qv": 20.0, "tau": 0.002}, "operating_point": FLAT}


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as test_client:
        yield test_client


@pytest.fixture(scope="module")
def scan_rows(client):
    response = client.post("/api/devices/scan", json={"device": DROOP})
    assert response.status_code == 200
    return response.json()["rows"]


def test_health(client):
    response = client.get("/api/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"
    assert float(response.headers["X-Compute-Time"]) >= 0.0


def test_device_kinds(client):
    assert client.get("/api/devices/kinds").json() == ["droop", "vsg", "load"]


class TestDevices:
    def test_scan(self, client):
        response = client.post("/api/devices/scan", json={"device": DROOP, "points": 50})
        body = response.json()
        assert body["columns"][0] == "freq_hz"
        assert len(body["rows"]) == 50

    def test_model_two(self, client):
        response = client.post("/api/devices/model", params={"kind": "II"}, json=DROOP)
        assert response.status_code == 200
        document = response.json()
        assert document["kind"] == "II"
        assert document["D"][1][1] == pytest.approx(20.0)

    def test_model_three_is_not_offered(self, client):
        response = client.post("/api/devices/model", params={"kind": "III"}, json=DROOP)
        assert response.status_code == 422
        assert response.json()["error"] == "validation_error"

    def test_invalid_parameters(self, client):
        device = dict(DROOP, params={"k_pf": -1.0, "k_qv": 20.0})
        response = client.post("/api/devices/scan", json={"device": device})
        assert response.status_code == 422
        assert response.json()["error"] == "validation_error"


    def test_malformed_body_uses_the_error_layout(self, client):
        response = client.post("/api/devices/scan", json={"device": DROOP, "points": 1})
        assert response.status_code == 422
        body = response.json()
        assert body["error"] == "validation_error"
        assert body["details"][0]["loc"][-1] == "points"


class TestModels:
    def test_fit(self, client, scan_rows):
        response = client.post("/api/models/fit", json={"rows": scan_rows, "config": {"order": 1}})
        assert response.status_code == 200
        body = response.json()
        assert body["model"]["order"] == 1
        assert body["report"]["max_rel_error"] < 1e-6

    def test_check(self, client):
        model = client.post("/api/devices/model", json=DROOP).json()
        response = client.post("/api/models/check", json={"model": model, "range": "low"})
        assert response.status_code == 200
        verdict = response.json()
        assert verdict["overall"] is False
        assert verdict["psd_ok"] is False

    def test_transform(self, client):
        model = client.post("/api/devices/model", json=DROOP).json()
        response = client.post("/api/models/transform", json={
            "model": model, "to": "III", "operating_point": FLAT, "tau": 0.01, "kqvc": 0.4
        })
        assert response.status_code == 200
        assert response.json()["kind"] == "III"

    def test_model_three_has_no_way_back(self, client):
        model = {"order": 0, "D": [[1.0, 0.0], [0.0, 1.0]], "kind": "III"}
        response = client.post("/api/models/transform", json={"model": model, "to": "II"})
        assert response.status_code == 422
        assert response.json()["error"] == "validation_error"

    def test_pole_identity(self, client):
        device = client.post("/api/devices/model", json=DROOP).json()
        network = {"order": 0, "D": [[2.0, 0.0], [0.0, 2.0]]}
        response = client.post("/api/models/pole-identity", json={
            "network": network, "device": device, "operating_point": {"vD0": 0.1, "vQ0": 1.0, "iD0": 0.2, "iQ0": 0.4}
        })
        assert response.status_code == 200
        assert response.json()["poles_match"] is True


class TestNetwork:
    NETWORK = {
        "buses": [{"id": 1, "vm": 1.0}, {"id": 2, "vm": 1.0, "bs": 0.3}],
        "branches": [{"from": 1, "to": 2, "x": 0.5}],
    }

    def test_jacobian(self, client):
        body = client.post("/api/network/jacobian", json={"network": self.NETWORK}).json()
        assert body["psd"] is False
        compensated = client.post(
            "/api/network/jacobian", json={"network": self.NETWORK, "contributions": {"2": 0.6}}
        ).json()
        assert compensated["psd"] is True

    def test_unknown_bus(self, client, caplog):
        with caplog.at_level(logging.WARNING, logger="app.api.network"):
            response = client.post("/api/network/jacobian", json={"network": self.NETWORK, "contributions": {"9": 0.6}})
        assert response.status_code == 404
        assert response.json()["error"] == "unknown_bus"
        records = [r for r in caplog.records if r.name == "app.api.network"]
        assert records and records[-1].levelno == logging.WARNING
        assert "[unknown_bus]" in records[-1].getMessage()

    def test_unexpected_failure_is_logged_with_traceback(self, caplog):
        class FailingJacobians:
            def build_jlf(self, network):
                raise RuntimeError("assembly failed")

        app.dependency_overrides[get_jacobian_service] = FailingJacobians
        try:
            with TestClient(app, raise_server_exceptions=False) as failing_client:
                with caplog.at_level(logging.ERROR, logger="app.api.network"):
                    response = failing_client.post("/api/network/jacobian", json={"network": self.NETWORK})
        finally:
            app.dependency_overrides.clear()
        assert response.status_code == 500
        assert response.json()["error"] == "internal_error"
        records = [r for r in caplog.records if r.name == "app.api.network" and r.levelno == logging.ERROR]
        assert records
        assert records[-1].exc_info is not None
        assert records[-1].exc_info[0] is RuntimeError

    def test_reference_network(self, client):
        body = client.get("/api/network/wscc9").json()
        assert body["bus_ids"] == list(range(1, 10))

    def test_origin_pole(self, client):
        response = client.post("/api/network/jnd-pole", params={"tau": 0.01}, json={"network": self.NETWORK})
        assert response.status_code == 200
        assert response.json()["passed"] is False

    def test_feedthrough(self, client):
        response = client.post("/api/network/feedthrough", json={
            "d1": [[1.0, -0.5], [-0.5, 2.0]],
            "operating_points": [{"vD0": 0.1, "vQ0": 1.0, "iD0": 0.3, "iQ0": 0.2}],
        })
        assert response.status_code == 200
        body = response.json()
        assert body["trace_zero"] is True
        assert body["passive_model_ii"] is False


class TestCompliance:
    def test_compliant_scan(self, client, scan_rows):
        response = client.post("/api/compliance/run", json={
            "rows": scan_rows, "operating_point": FLAT, "tau": 0.01, "kqvc": 0.4, "order": 1, "series_r": 0.05
        })
        assert response.status_code == 200
        report = response.json()
        assert report["overall"] is True
        assert [step["step"] for step in report["steps"]] == list(range(1, 9))

    def test_failed_criterion_is_not_an_http_error(self, client, scan_rows):
        response = client.post("/api/compliance/run", json={
            "rows": scan_rows, "operating_point": FLAT, "order": 1
        })
        assert response.status_code == 200
        assert response.json()["overall"] is False

    def test_needs_one_source(self, client):
        response = client.post("/api/compliance/run", json={"operating_point": FLAT})
        assert response.status_code == 422
        assert response.json()["error"] == "validation_error"


@pytest.mark.parametrize("path", [
    "/api/devices/scan",
    "/api/devices/model",
    "/api/models/fit",
    "/api/models/check",
    "/api/network/jacobian",
    "/api/compliance/run",
])
def test_numerical_routes_run_in_the_threadpool(path):
    routes = [route for route in app.routes if isinstance(route, APIRoute) and route.path == path]
    assert routes
    assert not inspect.iscoroutinefunction(routes[0].endpoint)
