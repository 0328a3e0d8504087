"""HTTP service endpoints and error envelopes."""

from __future__ import annotations

import numpy as np
import pytest
from fastapi.testclient import TestClient

from shapley_r2 import __version__
from shapley_r2.service import app
from shapley_r2.studies import RESULT_COLUMNS

from conftest import dataset_csv


@pytest.fixture(scope="module")
def client():
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


class TestHealth:
    def test_healthz(self, client):
        resp = client.get("/healthz")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok", "version": __version__}


class TestAnalyze:
    def test_asymptotic_analysis(self, client):
        resp = client.post(
            "/analyze", json={"csv_text": dataset_csv(), "method": "asymptotic"}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["n"] == 80
        assert body["d"] == 3
        assert body["response"] == "Z0"
        assert 0.0 <= body["r_squared"] <= 1.0
        assert body["kappa"] > 0.0
        assert body["lambdas"] is None
        assert body["rejected_rows"] == 0
        assert body["excluded_columns"] == []
        covs = body["covariates"]
        assert [c["name"] for c in covs] == ["Z1", "Z2", "Z3"]
        total = sum(c["shapley"] for c in covs)
        assert total == pytest.approx(body["r_squared"], abs=1e-10)
        assert sum(c["share"] for c in covs) == pytest.approx(1.0, abs=1e-10)
        for c in covs:
            assert c["bootstrap"] is None
            lo, hi = c["asymptotic"]["lower"], c["asymptotic"]["upper"]
            assert lo <= c["shapley"] <= hi

    def test_both_methods_and_seeded_bootstrap(self, client):
        payload = {
            "csv_text": dataset_csv(2),
            "method": "both",
            "bootstrap_n": 60,
            "seed": 5,
        }
        first = client.post("/analyze", json=payload).json()
        second = client.post("/analyze", json=payload).json()
        assert first == second
        for c in first["covariates"]:
            assert c["asymptotic"] is not None
            assert c["bootstrap"] is not None
            assert c["bootstrap"]["lower"] < c["bootstrap"]["upper"]

    def test_transform_reports_lambdas(self, client):
        resp = client.post(
            "/analyze",
            json={"csv_text": dataset_csv(3), "transform": "yeo-johnson"},
        )
        body = resp.json()
        assert set(body["lambdas"]) == {"Z0", "Z1", "Z2", "Z3"}

    def test_response_column_selection(self, client):
        resp = client.post(
            "/analyze", json={"csv_text": dataset_csv(4), "response": "Z2"}
        )
        body = resp.json()
        assert body["response"] == "Z2"
        assert [c["name"] for c in body["covariates"]] == ["Z0", "Z1", "Z3"]

    def test_rejected_rows_and_excluded_columns_reported(self, client):
        text = (
            "y,region,x1,x2\n"
            "1.0,north,0.5,1.2\n"
            "2.0,south,,0.7\n"
            "1.5,east,0.9,0.1\n"
            "0.5,west,1.4,0.8\n"
            "2.5,north,0.2,1.9\n"
        )
        body = client.post("/analyze", json={"csv_text": text}).json()
        assert body["rejected_rows"] == 1
        assert body["excluded_columns"] == ["region"]
        assert body["n"] == 4

    def test_data_error_envelope(self, client):
        resp = client.post("/analyze", json={"csv_text": "y,x1\n1,2\n"})
        assert resp.status_code == 422
        body = resp.json()
        assert body["category"] == "data"
        assert body["error"] == "ParseError"
        assert body["message"]

    def test_numeric_error_envelope(self, client):
        rng = np.random.default_rng(6)
        y = rng.standard_normal(30)
        x = rng.standard_normal(30)
        rows = "\n".join(
            f"{float(y[i])!r},{float(x[i])!r},{float(2 * x[i])!r}" for i in range(30)
        )
        resp = client.post("/analyze", json={"csv_text": f"y,x1,x2\n{rows}\n"})
        assert resp.status_code == 500
        body = resp.json()
        assert body["category"] == "numeric"

    def test_config_error_envelope(self, client):
        resp = client.post(
            "/analyze", json={"csv_text": dataset_csv(), "alpha": 1.5}
        )
        assert resp.status_code == 422
        assert resp.json()["category"] == "config"

    def test_request_validation_is_422(self, client):
        resp = client.post("/analyze", json={"csv_text": dataset_csv(), "method": "magic"})
        assert resp.status_code == 422


class TestPairTest:
    def test_basic(self, client):
        resp = client.post(
            "/pairtest", json={"csv_text": dataset_csv(7), "j": "Z1", "k": "Z3"}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["j"] == "Z1" and body["k"] == "Z3"
        assert 0.0 <= body["p_value"] <= 1.0
        assert not body["degenerate"]
        assert body["n"] == 80
        swapped = client.post(
            "/pairtest", json={"csv_text": dataset_csv(7), "j": "Z3", "k": "Z1"}
        ).json()
        assert swapped["statistic"] == pytest.approx(-body["statistic"])

    def test_unknown_name(self, client):
        resp = client.post(
            "/pairtest", json={"csv_text": dataset_csv(7), "j": "Z1", "k": "bogus"}
        )
        assert resp.status_code == 422
        assert resp.json()["category"] == "config"

    def test_same_covariate_rejected(self, client):
        resp = client.post(
            "/pairtest", json={"csv_text": dataset_csv(7), "j": "Z2", "k": "Z2"}
        )
        assert resp.status_code == 422

    def test_response_cannot_be_tested(self, client):
        resp = client.post(
            "/pairtest", json={"csv_text": dataset_csv(7), "j": "Z0", "k": "Z1"}
        )
        assert resp.status_code == 422


class TestSimulate:
    def test_single_cell(self, client):
        resp = client.post(
            "/simulate",
            json={
                "study": "A",
                "d": 2,
                "c": 0.3,
                "n": 40,
                "replicates": 8,
                "methods": ["asymptotic"],
                "seed": 2,
            },
        )
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert len(rows) == 1
        assert tuple(rows[0]) == RESULT_COLUMNS
        assert rows[0]["study"] == "A"
        assert rows[0]["n"] == 40
        assert rows[0]["N"] == 8

    def test_desk_grid_when_cell_unspecified(self, client):
        resp = client.post(
            "/simulate",
            json={
                "study": "A",
                "d": 2,
                "replicates": 2,
                "methods": ["asymptotic"],
            },
        )
        rows = resp.json()["rows"]
        # Desk grid: 3 sample sizes by 4 correlations.
        assert len(rows) == 12
        assert {r["n"] for r in rows} == {10, 50, 500}
        assert {r["c"] for r in rows} == {0.0, 0.1, 0.3, 0.9}

    def test_invalid_nu_envelope(self, client):
        resp = client.post(
            "/simulate",
            json={"study": "B", "nu": 1.5, "c": 0.3, "n": 30, "replicates": 4},
        )
        assert resp.status_code == 422
        assert resp.json()["category"] == "data"


class TestBenchmark:
    def test_smoke(self, client):
        resp = client.post(
            "/benchmark",
            json={"n_grid": [200], "reps": 1, "bootstrap_n": 40},
        )
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert len(rows) == 1
        assert rows[0]["n"] == 200
        assert rows[0]["time_ratio"] > 1.0
