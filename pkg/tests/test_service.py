import json

import pytest
from fastapi.testclient import TestClient

from lifeline_iim import resolve_scenario
from lifeline_iim.service.app import app

client = TestClient(app)


def test_health():
    r = client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok"
    assert "version" in body


def test_list_scenarios():
    r = client.get("/scenarios")
    assert r.status_code == 200
    names = [s["name"] for s in r.json()["scenarios"]]
    assert "fukushima-detailed" in names
    assert "example1" in names


def test_validate_ok():
    r = client.post("/validate", json={"scenario": "example2"})
    assert r.status_code == 200
    assert r.json() == {"ok": True, "violations": []}


def test_validate_reports_violations():
    doc = json.loads(json.dumps(resolve_scenario("example1").raw))
    # two pumps marked as one redundancy group but only one present: make
    # an orphan dependency edge instead — target endpoint removed
    doc["model"]["dependencies"][0]["edges"] = [["feeder", "pump1"]]
    doc["model"]["networks"][1]["nodes"] = [
        n for n in doc["model"]["networks"][1]["nodes"] if n["id"] != "pump1"
    ]
    doc["model"]["networks"][1]["configurations"][0]["edges"] = [
        e for e in doc["model"]["networks"][1]["configurations"][0]["edges"]
        if e[0] != "pump1"
    ]
    r = client.post("/validate", json={"document": doc})
    assert r.status_code in (200, 422)
    if r.status_code == 200:
        body = r.json()
        assert not body["ok"]
        assert body["violations"]


def test_run_returns_report_and_checkpoints():
    r = client.post("/run", json={"scenario": "fukushima-simplified"})
    assert r.status_code == 200
    body = r.json()
    assert body["scenario"] == "fukushima-simplified"
    assert body["autonomy_mode"] == "dominant"
    cps = body["checkpoints"]
    dc = cps["post_tsunami"]["networks"]["electric"]["p_occ"]["dc"]
    assert dc == pytest.approx(0.085, abs=5e-3)
    assert body["report"]["steps"][0]["networks"]["electric"]["loc"] == 0.0


def test_run_with_overrides():
    r = client.post(
        "/run",
        json={"scenario": "example3", "dt": 1.0, "autonomy_mode": "expected"},
    )
    assert r.status_code == 200
    assert r.json()["report"]["times"] == [0.0, 1.0]


def test_run_unknown_scenario_404():
    r = client.post("/run", json={"scenario": "bogus"})
    assert r.status_code == 404


def test_scenario_xor_document_enforced():
    r = client.post("/run", json={})
    assert r.status_code == 422
    r = client.post(
        "/run", json={"scenario": "example1", "document": {"schema_version": 1}}
    )
    assert r.status_code == 422


def test_malformed_document_422_with_errors():
    r = client.post("/validate", json={"document": {"schema_version": 1}})
    assert r.status_code == 422
    detail = r.json()["detail"]
    assert any("model" in str(e) for e in detail)


def test_importance_endpoint():
    r = client.post(
        "/importance",
        json={"scenario": "example1", "node": "grid", "target": "b1"},
    )
    assert r.status_code == 200
    body = r.json()
    assert body["node"] == "grid"
    assert len(body["times"]) == len(body["importance"])
    assert body["peak"] > 0.0


def test_importance_unknown_node_404():
    r = client.post(
        "/importance",
        json={"scenario": "example1", "node": "nope", "target": "b1"},
    )
    assert r.status_code == 404


def test_compare_pra_match():
    r = client.post("/compare-pra", json={"scenario": "example3"})
    assert r.status_code == 200
    body = r.json()
    assert body["ok"] is True
    assert body["max_diff"] <= 1e-12


def test_compare_pra_designed_mismatch():
    r = client.post("/compare-pra", json={"scenario": "example4"})
    assert r.status_code == 200
    body = r.json()
    assert body["ok"] is False
    # the conditioned operator-recovery branch diverges by 0.04
    diffs = {c["id"]: c for c in body["comparisons"]}
    assert diffs["target-loss"]["match"] is True
    assert diffs["operator-recovery"]["match"] is False
    assert diffs["operator-recovery"]["max_diff"] == pytest.approx(0.04, abs=1e-12)
