from pathlib import Path
import json

from fastapi.testclient import TestClient

from hdts.main import app


client = TestClient(app)
DATA = Path(__file__).resolve().parent.parent / "hdts" / "data"


def _document(name: str) -> dict:
    return json.loads((DATA / name).read_text(encoding="utf-8"))


def test_health_check() -> None:
    response = client.get("/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["service"] == "hdts"


def test_commands_are_listed() -> None:
    response = client.get("/commands")
    assert response.status_code == 200
    assert "saturate" in response.json()["commands"]


def test_validate_fig1() -> None:
    response = client.post("/commands/validate", json={"document": _document("fig1.json")})
    assert response.status_code == 200
    body = response.json()
    assert body["ok"] is True
    assert body["exit_code"] == 0
    assert body["document"]["report"]["command"] == "validate"


def test_classify_pure_square_is_negative() -> None:
    response = client.post("/commands/classify", json={"document": _document("pure2.json")})
    assert response.status_code == 200
    body = response.json()
    assert body["ok"] is False
    assert body["exit_code"] == 1
    assert body["report"]["intermediate_state"] is False


def test_make_without_a_document() -> None:
    payload = {"options": {"kind": "double", "labels": ["a"]}}
    response = client.post("/commands/make", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert body["document"]["systems"]["double[a]"]["states"] == ["1", "2", "3", "4"]


def test_saturate_seed_over_http() -> None:
    payload = {"document": _document("seed.json"), "options": {"operands": ["seed"]}}
    response = client.post("/commands/saturate", json=payload)
    assert response.status_code == 200
    saturated = response.json()["document"]

    response = client.post("/commands/collapse-check", json={"document": saturated, "options": {"operands": ["seed.insertion"]}})
    assert response.status_code == 200
    assert response.json()["ok"] is True


def test_dot_text_is_returned_in_the_report() -> None:
    response = client.post("/commands/dot", json={"document": _document("fig1.json")})
    assert response.status_code == 200
    assert response.json()["report"]["text"].startswith('digraph "fig1"')


def test_errors_map_to_http_statuses() -> None:
    assert client.post("/commands/teleport", json={}).status_code == 404

    broken = {"sigma": ["a"], "systems": {"X": {"states": ["0"], "colour": "red"}}}
    response = client.post("/commands/validate", json={"document": broken})
    assert response.status_code == 400
    assert "Invalid document" in response.json()["detail"]

    response = client.post("/commands/regularize", json={"document": _document("pure2.json")})
    assert response.status_code == 400

    response = client.post("/commands/saturate", json={"document": _document("seed.json"), "options": {"rounds": 99}})
    assert response.status_code == 422
