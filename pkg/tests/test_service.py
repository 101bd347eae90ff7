"""HTTP API tests: session lifecycle over JSON, error status mapping,
and independent replay of the downloadable log."""

import pytest
from fastapi.testclient import TestClient

from phantomrla.service import create_app
from phantomrla.session import config_to_payload, replay

from tests.conftest import small_vote_of


@pytest.fixture
def client():
    return TestClient(create_app())


@pytest.fixture
def comparison_payload(comparison_config):
    return config_to_payload(comparison_config)


@pytest.fixture
def polling_payload(polling_config):
    return config_to_payload(polling_config)


def create(client, payload):
    r = client.post("/sessions", json=payload)
    assert r.status_code == 200, r.text
    return r.json()


def interp_json(cand):
    votes = [cand] if cand else []
    return {"contests": {"mayor": {"votes": votes}}, "provenance": "human"}


def walk_to_verdict(client, sid, vote_of, max_steps=200):
    """Drive the session over HTTP, reading each retrieved ballot with
    `vote_of`, until the service reports a terminal evaluation."""
    for _ in range(max_steps):
        body = client.post(f"/sessions/{sid}/draws").json()
        if not body["auto_resolved"]:
            loc = body["location"]
            assert loc["kind"] == "listed"
            cand = vote_of(loc["group_id"], loc["index_within_group"])
            r = client.post(
                f"/sessions/{sid}/interpretations",
                json={"outcome": "found", "interpretation": interp_json(cand)},
            )
            assert r.status_code == 200, r.text
            body = r.json()
        ev = body["evaluation"]
        assert ev is not None
        if ev["decision"] != "continue_sampling":
            return ev, body["state"]
    raise AssertionError("no verdict within the step budget")


class TestSessionLifecycle:
    def test_create_returns_state_and_schemas(self, client, comparison_payload):
        body = create(client, comparison_payload)
        assert body["session_id"]
        state = body["state"]
        assert state["status"] == "active"
        assert state["method"] == "comparison"
        assert state["sampling_upper_bound"] == 90
        assert state["phantom_ballots"] == 5
        assert state["draws_issued"] == 0
        assert state["p_value"] == 1.0
        [schema] = body["contests"]
        assert schema["contest_id"] == "mayor"
        assert schema["candidates"] == ["alice", "bob", "carol"]
        assert schema["winners"] == ["alice"]

    def test_get_state_round_trip(self, client, comparison_payload):
        sid = create(client, comparison_payload)["session_id"]
        r = client.get(f"/sessions/{sid}")
        assert r.status_code == 200
        assert r.json()["state"]["status"] == "active"

    def test_sessions_are_independent(self, client, comparison_payload):
        a = create(client, comparison_payload)["session_id"]
        b = create(client, comparison_payload)["session_id"]
        assert a != b
        client.post(f"/sessions/{a}/draws")
        assert client.get(f"/sessions/{b}").json()["state"]["draws_issued"] == 0
        assert client.get(f"/sessions/{a}").json()["state"]["draws_issued"] == 1

    def test_comparison_walk_to_confirmation(self, client, comparison_payload):
        sid = create(client, comparison_payload)["session_id"]
        ev, state = walk_to_verdict(client, sid, small_vote_of)
        assert ev["decision"] == "stop_confirmed"
        assert ev["p_value"] <= 0.10
        assert state["status"] == "stopped_confirmed"
        # terminal sessions refuse further draws
        assert client.post(f"/sessions/{sid}/draws").status_code == 409

    def test_draw_issues_instruction(self, client, comparison_payload):
        sid = create(client, comparison_payload)["session_id"]
        body = client.post(f"/sessions/{sid}/draws").json()
        assert body["counter"] == 0
        assert 1 <= body["draw_number"] <= 90
        if body["location"]["kind"] == "listed":
            assert body["location"]["group_id"] in {"box-1", "box-2"}
            assert body["evaluation"] is None
            assert body["state"]["pending"]["counter"] == 0


class TestPhantomDraws:
    def test_phantom_auto_resolves(self, client, comparison_payload):
        # seed 0023 draws ballot 88 first: beyond the 85 listed
        payload = dict(comparison_payload, seed_hex="0023")
        sid = create(client, payload)["session_id"]
        body = client.post(f"/sessions/{sid}/draws").json()
        assert body["draw_number"] == 88
        assert body["auto_resolved"]
        assert body["location"] == {"kind": "phantom", "draw_number": 88}
        assert body["evaluation"]["decision"] == "continue_sampling"
        assert body["state"]["phantom_events"] == 1
        assert body["state"]["p_value"] == 1.0  # one worst-case ballot, capped


class TestEscalation:
    def test_cap_recommends_full_hand_count(self, client, polling_payload):
        payload = dict(polling_payload, escalation_cap=2)
        sid = create(client, payload)["session_id"]
        last = None
        for _ in range(2):
            body = client.post(f"/sessions/{sid}/draws").json()
            if not body["auto_resolved"]:
                body = client.post(
                    f"/sessions/{sid}/interpretations",
                    json={"outcome": "found", "interpretation": interp_json("alice")},
                ).json()
            last = body["evaluation"]
        assert last["decision"] == "recommend_full_hand_count"
        assert last["status"] == "escalated_full_hand_count"
        assert client.post(f"/sessions/{sid}/draws").status_code == 409


class TestNotFoundOutcome:
    def test_not_found_is_zombie_substituted(self, client, comparison_payload):
        sid = create(client, comparison_payload)["session_id"]
        body = client.post(f"/sessions/{sid}/draws").json()
        assert not body["auto_resolved"]
        r = client.post(
            f"/sessions/{sid}/interpretations",
            json={"outcome": "not_found", "note": "box empty"},
        )
        assert r.status_code == 200
        state = r.json()["state"]
        assert state["phantom_events"] == 1
        assert state["p_value"] == 1.0


class TestErrorMapping:
    def test_unknown_session_is_404(self, client):
        for method, path in [
            ("get", "/sessions/nope"),
            ("post", "/sessions/nope/draws"),
            ("get", "/sessions/nope/trajectory"),
            ("get", "/sessions/nope/log"),
        ]:
            r = getattr(client, method)(path)
            assert r.status_code == 404
            assert r.json()["error"] == "UnknownSession"
        r = client.post("/sessions/nope/interpretations", json={"outcome": "not_found"})
        assert r.status_code == 404

    def test_malformed_config_is_400(self, client):
        r = client.post("/sessions", json={"method": "comparison"})
        assert r.status_code == 400
        assert r.json()["error"] == "InvalidConfig"

    def test_scenario_halt_carries_decision(self, client, comparison_payload):
        payload = dict(comparison_payload)
        payload["counts"] = {"n_manifest": 85, "n_upper": 90, "n_oracle": 80}
        r = client.post("/sessions", json=payload)
        assert r.status_code == 400
        body = r.json()
        assert body["error"] == "ScenarioHalt"
        assert body["decision"]["kind"] == "halt_stuffing_evidence"
        assert body["decision"]["excess"] == 5

    def test_margin_gate_requires_acknowledgement(self, client, comparison_payload):
        payload = dict(comparison_payload)
        payload["contests"] = [dict(payload["contests"][0])]
        payload["contests"][0]["reported_tallies"] = {"alice": 45, "bob": 42, "carol": 3}
        r = client.post("/sessions", json=payload)
        assert r.status_code == 400
        assert r.json()["error"] == "MarginRiskUnacknowledged"
        payload["acknowledge_margin_risk"] = True
        body = create(client, payload)
        assert body["state"]["margin_warning"]["outcome_at_risk"] is True

    def test_draw_while_pending_is_409(self, client, comparison_payload):
        sid = create(client, comparison_payload)["session_id"]
        body = client.post(f"/sessions/{sid}/draws").json()
        assert not body["auto_resolved"]
        r = client.post(f"/sessions/{sid}/draws")
        assert r.status_code == 409
        assert r.json()["error"] == "PendingInterpretation"

    def test_interpretation_without_pending_is_409(self, client, comparison_payload):
        sid = create(client, comparison_payload)["session_id"]
        r = client.post(f"/sessions/{sid}/interpretations", json={"outcome": "not_found"})
        assert r.status_code == 409
        assert r.json()["error"] == "NoPendingDraw"

    def test_interpretation_schema_errors(self, client, comparison_payload):
        sid = create(client, comparison_payload)["session_id"]
        client.post(f"/sessions/{sid}/draws")
        bad = [
            {"outcome": "bogus"},
            {"outcome": "found"},
            {"outcome": "not_found", "note": 5},
            {"outcome": "found", "interpretation": {"contests": {"mayor": "scribble"}}},
        ]
        for payload in bad:
            r = client.post(f"/sessions/{sid}/interpretations", json=payload)
            assert r.status_code == 400, payload
        # machine provenance is not an operator reading
        r = client.post(
            f"/sessions/{sid}/interpretations",
            json={
                "outcome": "found",
                "interpretation": {
                    "contests": {"mayor": {"votes": ["alice"]}},
                    "provenance": "machine",
                },
            },
        )
        assert r.status_code == 400
        assert r.json()["error"] == "InterpretationSchemaMismatch"
        # the pending draw survived every rejected submission
        r = client.post(
            f"/sessions/{sid}/interpretations",
            json={"outcome": "found", "interpretation": interp_json("alice")},
        )
        assert r.status_code == 200


class TestTrajectoryAndLog:
    def test_trajectory_annotates_zombies(self, client, comparison_payload):
        payload = dict(comparison_payload, seed_hex="0023")
        sid = create(client, payload)["session_id"]
        client.post(f"/sessions/{sid}/draws")  # phantom 88, auto-resolved
        body = client.post(f"/sessions/{sid}/draws").json()
        assert not body["auto_resolved"]
        client.post(
            f"/sessions/{sid}/interpretations",
            json={"outcome": "found", "interpretation": interp_json("alice")},
        )
        traj = client.get(f"/sessions/{sid}/trajectory").json()
        kinds = [p["kind"] for p in traj["points"]]
        assert kinds == ["zombie_unlisted_phantom", "human"]
        assert traj["points"][0]["draw_number"] == 88
        assert traj["points"][1]["n_sampled"] == 2
        assert traj["status"] == "active"

    def test_log_replays_to_served_state(self, client, comparison_payload):
        sid = create(client, comparison_payload)["session_id"]
        ev, state = walk_to_verdict(client, sid, small_vote_of)
        r = client.get(f"/sessions/{sid}/log")
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("application/jsonl")
        replayed = replay(r.text.splitlines())
        assert replayed.status.value == state["status"]
        assert replayed.p_value() == pytest.approx(state["p_value"], rel=1e-12)
        assert replayed.state_json() == state

    def test_log_of_active_session_replays(self, client, polling_payload):
        sid = create(client, polling_payload)["session_id"]
        body = client.post(f"/sessions/{sid}/draws").json()
        if not body["auto_resolved"]:
            client.post(
                f"/sessions/{sid}/interpretations",
                json={"outcome": "found", "interpretation": interp_json("bob")},
            )
        text = client.get(f"/sessions/{sid}/log").text
        replayed = replay(text.splitlines())
        assert replayed.status.value == "active"
        served = client.get(f"/sessions/{sid}").json()["state"]
        assert replayed.state_json() == served
