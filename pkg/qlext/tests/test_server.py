"""
Tests for the HTTP solver server
"""
import sys

import pytest
from fastapi.testclient import TestClient

from qlext.config import SolverConfig
from qlext.models.files import InstanceFile
from qlext.models.layout import PageAssignment, QueueLayout
from qlext.models.result import Algorithm, BranchStats, SolveStatus
from qlext.services import solver_service
from qlext.solver_server import create_app

from .conftest import make_instance


def document(inst):
    return InstanceFile.from_instance(inst).to_json()


@pytest.fixture
def client(tmp_path):
    config = SolverConfig(jobs=1, solution_output_dir=tmp_path / "solutions")
    return TestClient(create_app(config))


def test_health(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_validate_instance(client, nested_pair):
    response = client.post("/validate", json=document(nested_pair))
    assert response.status_code == 200
    assert response.json() == {"valid": True}


def test_validate_rejects_bad_instance(client, nested_pair):
    payload = document(nested_pair)
    payload["pages_h"] = [3]
    response = client.post("/validate", json=payload)
    assert response.status_code == 422
    assert response.json()["detail"]["key"] == "pages_h"


def test_validate_with_solution(client, nested_pair):
    payload = document(nested_pair)
    payload["solution"] = {"spine": ["a", "b", "c", "d"], "pages": {"a--d": 1, "b--c": 1}}
    body = client.post("/validate", json=payload).json()
    assert body["valid"] is False
    assert body["extends_h"] is True
    assert body["violations"] == ["page 1: a--d and b--c nest"]


def test_solve_persists_solution(client, one_new_vertex):
    response = client.post("/solve", params={"algo": "xp"}, json=document(one_new_vertex))
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "solved"
    assert body["solution"]["algorithm"] == "xp"

    listed = client.get("/solutions").json()["solutions"]
    assert listed == [body["saved_as"]]
    stored = client.get(f"/solutions/{body['saved_as']}")
    assert stored.status_code == 200
    assert stored.json()["spine"] == body["solution"]["spine"]

    assert client.get("/solutions/nothing.json").status_code == 404


def test_solve_unsolvable(client):
    inst = make_instance(
        ell=1, h_spine=["a", "b", "c", "d"], h_pages=[(("a", "d"), 1)], new_edges=[("b", "c")]
    )
    body = client.post("/solve", json=document(inst)).json()
    assert body == {"status": "unsolvable", "solution": None}


def test_solve_rejects_unmet_preconditions(client, one_new_vertex):
    response = client.post("/solve", params={"algo": "two-vertex"}, json=document(one_new_vertex))
    assert response.status_code == 422
    assert response.json()["detail"]["key"] is None


def test_solve_reports_budget_exhaustion(two_new_vertices):
    client = TestClient(create_app(SolverConfig(jobs=1, oracle_max_branches=2)))
    body = client.post("/solve", params={"algo": "oracle"}, json=document(two_new_vertices)).json()
    assert body["status"] == "budget_exhausted"
    assert body["solution"] is None
    assert client.get("/solutions").json() == {"solutions": []}


def test_solver_failure_is_server_error(client, monkeypatch, nested_pair):
    def broken(inst, config):
        entries = ((("a", "d"), 1), (("b", "c"), 1))
        layout = QueueLayout(inst.layout_h.spine, PageAssignment(entries, inst.ell))
        return SolveStatus.SOLVED, layout, BranchStats()

    monkeypatch.setitem(solver_service.SOLVERS, Algorithm.XP, broken)
    response = client.post("/solve", params={"algo": "xp"}, json=document(nested_pair))
    assert response.status_code == 500


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
