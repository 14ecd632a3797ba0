import pytest
from fastapi.testclient import TestClient

from coomforge import load_explanations
from coomforge.service import create_app

from conftest import FIXTURES, fixture_source, load_space


@pytest.fixture
def client():
    space = load_space("travel-bike")
    sidecar = (FIXTURES / "travel-bike.explanations.json").read_text()
    explanations, _ = load_explanations(space, sidecar)
    return TestClient(create_app(space, explanations))


def new_session(client, **body) -> str:
    response = client.post("/sessions", json=body) if body else client.post("/sessions")
    assert response.status_code == 201, response.text
    return response.json()["sessionId"]


def post_assumption(client, sid, action, target, value=None):
    body = {"action": action, "target": target}
    if value is not None:
        body["value"] = value
    return client.post(f"/sessions/{sid}/assumptions", json=body)


def attribute(view, var_id):
    return next(a for a in view["attributes"] if a["id"] == var_id)


def test_create_session_returns_initial_view(client):
    response = client.post("/sessions")
    assert response.status_code == 201
    body = response.json()
    assert body["view"]["satisfiable"]
    assert attribute(body["view"], "root.color[0]")["validValues"] == [
        "Green", "Red", "Yellow"]


def test_create_session_with_inline_model(client):
    sid = new_session(client, model=fixture_source("mini-color"))
    view = client.get(f"/sessions/{sid}/view").json()
    assert attribute(view, "root.color[0]")["validValues"] == [
        "Green", "Red", "Yellow"]


def test_create_session_requires_model_when_no_default():
    client = TestClient(create_app())
    response = client.post("/sessions")
    assert response.status_code == 400
    assert response.json()["code"] == "NoModel"


def test_create_session_parse_error(client):
    response = client.post("/sessions", json={"model": "product {"})
    assert response.status_code == 422
    body = response.json()
    assert body["code"] == "ParseError"
    assert body["diagnostics"]


def test_create_session_validation_error(client):
    response = client.post("/sessions", json={"model": "product { Ghost g }"})
    assert response.status_code == 422
    assert response.json()["code"] == "ValidationError"


def test_create_session_with_user_input(client):
    response = client.post("/sessions", json={
        "userInput": "set color[0] = Red\nset ghost[0] = 1"})
    assert response.status_code == 201
    body = response.json()
    assert any("UnknownVariable" in w for w in body["warnings"])
    color = attribute(body["view"], "root.color[0]")
    assert color["selectedValue"] == "Red"


def test_assumption_lifecycle_and_inference(client):
    sid = new_session(client)
    view = post_assumption(client, sid, "fix", "root.color[0]", "Red").json()
    assert attribute(view, "root.frontWheel[0]")["inferredValue"] == "W20"

    view = post_assumption(client, sid, "fix", "root.frontWheel[0]", "W16").json()
    assert not view["satisfiable"]
    mus = view["mus"]
    assert mus["constraintIds"] == ["c0"]
    assert mus["messages"] == [
        "If the color is red, then the size of the front wheel should be 20."]
    # the conflicting assumptions stay listed so the client can retract
    w16 = next(a for a in view["assumptions"]
               if a["target"] == "root.frontWheel[0]")

    response = client.delete(f"/sessions/{sid}/assumptions/{w16['id']}")
    assert response.status_code == 200
    assert response.json()["satisfiable"]


def test_unfix_removes_assumptions_by_target(client):
    sid = new_session(client)
    post_assumption(client, sid, "fix", "root.color[0]", "Red")
    post_assumption(client, sid, "fix", "root.frontWheel[0]", "W16")
    view = post_assumption(client, sid, "unfix", "root.frontWheel[0]").json()
    assert view["satisfiable"]


def test_include_makes_part_removable(client):
    sid = new_session(client)
    view = post_assumption(
        client, sid, "include", "root.carrier[0].bag[0]").json()
    bag = next(p for p in view["parts"] if p["id"] == "root.carrier[0].bag[0]")
    assert bag["shown"] and bag["removable"]


def test_assumption_validation(client):
    sid = new_session(client)
    assert post_assumption(
        client, sid, "levitate", "root.color[0]").status_code == 400
    assert post_assumption(
        client, sid, "fix", "root.color[0]").status_code == 400
    response = post_assumption(client, sid, "fix", "root.ghost[0]", 1)
    assert response.status_code == 409
    assert response.json()["code"] == "UnknownVariable"


def test_browse_and_solution(client):
    sid = new_session(client, model=fixture_source("mini-color"))
    seen = []
    for _ in range(3):
        body = client.post(f"/sessions/{sid}/browse",
                           json={"direction": "next"}).json()
        assert not body["exhausted"]
        seen.append(body["model"]["values"]["root.color[0]"])
    assert seen == ["Green", "Red", "Yellow"]
    body = client.post(f"/sessions/{sid}/browse", json={"direction": "next"}).json()
    assert body["exhausted"] and body["model"] is None

    body = client.post(f"/sessions/{sid}/browse", json={"direction": "reset"}).json()
    assert body["model"]["values"]["root.color[0]"] == "Green"

    response = client.get(f"/sessions/{sid}/solution")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("text/plain")
    assert response.text.startswith("add root")
    assert "set color[0] = Green" in response.text


def test_browse_and_solution_unsat(client):
    sid = new_session(client)
    post_assumption(client, sid, "fix", "root.color[0]", "Red")
    post_assumption(client, sid, "fix", "root.frontWheel[0]", "W16")
    response = client.post(f"/sessions/{sid}/browse", json={"direction": "next"})
    assert response.status_code == 409
    response = client.get(f"/sessions/{sid}/solution")
    assert response.status_code == 409
    assert response.json()["code"] == "Unsatisfiable"


def test_model_endpoint(client):
    sid = new_session(client)
    doc = client.get(f"/sessions/{sid}/model").json()
    assert {v["id"] for v in doc["variable"]} >= {"root", "root.color[0]"}


def test_session_deletion_and_missing_session(client):
    sid = new_session(client)
    assert client.delete(f"/sessions/{sid}").status_code == 200
    assert client.get(f"/sessions/{sid}/view").status_code == 404
    assert client.delete(f"/sessions/{sid}").status_code == 404


def test_sessions_are_isolated(client):
    sid_a = new_session(client)
    sid_b = new_session(client)
    post_assumption(client, sid_a, "fix", "root.color[0]", "Red")
    view_b = client.get(f"/sessions/{sid_b}/view").json()
    assert view_b["assumptions"] == []


def test_view_reproducible_from_assumption_list(client):
    # the same model and assumption sequence yields the same view
    sid_a = new_session(client)
    sid_b = new_session(client)
    for sid in (sid_a, sid_b):
        post_assumption(client, sid, "fix", "root.color[0]", "Red")
    view_a = client.get(f"/sessions/{sid_a}/view").json()
    view_b = client.get(f"/sessions/{sid_b}/view").json()
    assert view_a == view_b


def test_bad_json_body(client):
    sid = new_session(client)
    response = client.post(f"/sessions/{sid}/browse",
                           content=b"not json",
                           headers={"content-type": "application/json"})
    assert response.status_code == 400
