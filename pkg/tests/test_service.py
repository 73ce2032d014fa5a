"""HTTP routes, error mapping, atomicity, and parity with the offline engine."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from botbench.errors import RoleOrderError
from botbench.fixtures import build_fixture_store, fixture_mock_script, no_skip_template
from botbench.graph import build_dag, export_dag
from botbench.llm import MockBackend, MockScript
from botbench.regression import run_regression
from botbench.service import ServiceConfig, Workbench, create_app
from botbench.store import load_store, persist_store


@pytest.fixture()
def store_dir(tmp_path):
    directory = tmp_path / "store"
    persist_store(build_fixture_store(), directory)
    return directory


@pytest.fixture()
def client(store_dir):
    app = create_app(
        ServiceConfig(store_path=store_dir, lm_backend="unused"),
        backend=MockBackend(fixture_mock_script()),
    )
    return TestClient(app)


class TestCrudRoutes:
    def test_list_tasks(self, client):
        body = client.get("/tasks").json()
        assert [t["id"] for t in body] == ["exercise-task"]

    def test_create_task_generates_id(self, client):
        response = client.post(
            "/tasks",
            json={
                "name": "n",
                "description": "d",
                "items": [],
                "steps": [{"title": "t", "details": "x"}],
            },
        )
        assert response.status_code == 200
        assert response.json()["id"]

    def test_templates_roundtrip(self, client):
        template = no_skip_template().to_dict()
        template["id"] = "candidate"
        assert client.post("/templates", json=template).status_code == 200
        listed = {t["id"] for t in client.get("/templates").json()}
        assert "candidate" in listed
        template["name"] = "renamed"
        assert client.put("/templates/candidate", json=template).status_code == 200
        got = next(t for t in client.get("/templates").json() if t["id"] == "candidate")
        assert got["name"] == "renamed"

    def test_invalid_template_is_400(self, client):
        template = no_skip_template().to_dict()
        template["id"] = "broken"
        template["preamble_template"] = "no placeholder"
        response = client.post("/templates", json=template)
        assert response.status_code == 400
        assert "MissingTaskPlaceholder" in response.json()["detail"]

    def test_conversation_fetch(self, client):
        body = client.get("/conversations/conv-01").json()
        assert body["id"] == "conv-01"
        assert len(body["turns"]) == 6

    def test_missing_ids_are_404(self, client):
        assert client.get("/conversations/ghost").status_code == 404
        assert (
            client.post(
                "/conversations", json={"task_id": "ghost", "template_id": "baseline-template"}
            ).status_code
            == 404
        )

    def test_conversation_listing_with_filters(self, client):
        assert len(client.get("/conversations").json()) == 12
        skip = client.get("/conversations", params={"tag": "skip"}).json()
        assert [c["id"] for c in skip] == ["conv-01", "conv-02", "conv-08"]


class TestCollection:
    def test_turn_submission_returns_pair(self, client):
        conv = client.post(
            "/conversations",
            json={"task_id": "exercise-task", "template_id": "wait-aware-template"},
        ).json()
        response = client.post(
            f"/conversations/{conv['id']}/turns",
            json={"text": "Ok hang on while I get a chair"},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["user_turn"]["index"] == 0
        assert body["bot_turn"]["index"] == 1
        assert body["bot_turn"]["text"].startswith("Once you have your chair")

    def test_backend_failure_appends_nothing(self, store_dir):
        app = create_app(
            ServiceConfig(store_path=store_dir, lm_backend="unused"),
            backend=MockBackend(MockScript(rules=[], strict=True)),
        )
        client = TestClient(app)
        conv = client.post(
            "/conversations",
            json={"task_id": "exercise-task", "template_id": "baseline-template"},
        ).json()
        response = client.post(
            f"/conversations/{conv['id']}/turns", json={"text": "hello there"}
        )
        assert response.status_code == 502
        assert client.get(f"/conversations/{conv['id']}").json()["turns"] == []

    def test_empty_text_is_400(self, client):
        conv = client.post(
            "/conversations",
            json={"task_id": "exercise-task", "template_id": "baseline-template"},
        ).json()
        assert (
            client.post(f"/conversations/{conv['id']}/turns", json={"text": ""}).status_code
            == 400
        )

    def test_mutations_are_persisted(self, client, store_dir):
        conv = client.post(
            "/conversations",
            json={"task_id": "exercise-task", "template_id": "wait-aware-template"},
        ).json()
        client.post(
            f"/conversations/{conv['id']}/turns",
            json={"text": "Ok hang on while I get a chair"},
        )
        reloaded = load_store(store_dir)
        assert len(reloaded.get_conversation(conv["id"]).turns) == 2

    def test_generate_bot_reply_role_order(self, store_dir):
        bench = Workbench(store_dir, MockBackend(fixture_mock_script()))
        conv = bench.mutate(
            lambda s: s.create_conversation("exercise-task", "baseline-template", "web")
        )
        turn = bench.generate_bot_reply(conv.id)  # bot may open the conversation
        assert turn.role == "bot" and turn.index == 0
        with pytest.raises(RoleOrderError):
            bench.generate_bot_reply(conv.id)


class TestAnnotation:
    def test_tag_and_untag(self, client):
        response = client.post(
            "/conversations/conv-10/turns/1/tags",
            json={"name": "good", "polarity": "success"},
        )
        assert response.status_code == 200
        assert response.json()["tags"][-1]["name"] == "good"
        response = client.delete("/conversations/conv-10/turns/1/tags/good")
        assert response.status_code == 200
        assert response.json()["tags"] == []

    def test_duplicate_tag_is_409(self, client):
        client.post("/conversations/conv-10/turns/1/tags", json={"name": "x"})
        assert (
            client.post("/conversations/conv-10/turns/1/tags", json={"name": "x"}).status_code
            == 409
        )

    def test_whitespace_tag_is_400(self, client):
        response = client.post(
            "/conversations/conv-10/turns/1/tags", json={"name": "too hard"}
        )
        assert response.status_code == 400

    def test_missing_tag_delete_is_404(self, client):
        assert client.delete("/conversations/conv-10/turns/1/tags/none").status_code == 404

    def test_fork_route(self, client):
        body = client.post("/conversations/conv-01/fork", json={"turn_index": 3}).json()
        assert body["parent"] == {"conversation_id": "conv-01", "fork_turn_index": 3}
        assert len(body["turns"]) == 4
        assert client.post(
            "/conversations/conv-01/fork", json={"turn_index": 99}
        ).status_code == 404


class TestGraphRoute:
    def test_json_matches_offline_export(self, client, store_dir):
        online = client.get("/graph").content
        store = load_store(store_dir)
        offline = export_dag(build_dag(store.filter_conversations()))
        assert online == offline

    def test_tag_filter_matches_offline(self, client, store_dir):
        online = client.get("/graph", params={"tag": "skip"}).content
        store = load_store(store_dir)
        offline = export_dag(
            build_dag(store.filter_conversations(tag_names={"skip"}))
        )
        assert online == offline

    def test_dot_format(self, client):
        response = client.get("/graph", params={"format": "dot"})
        assert response.headers["content-type"].startswith("text/vnd.graphviz")
        assert response.text.startswith("digraph")

    def test_bad_format_rejected(self, client):
        assert client.get("/graph", params={"format": "png"}).status_code == 422


class TestRegressionRoute:
    def test_cases_route_lists_tagged_bot_turns(self, client):
        cases = client.get("/regression/cases", params={"tag": "skip"}).json()
        assert [(c["conversation_id"], c["turn_index"]) for c in cases] == [
            ("conv-01", 3),
            ("conv-02", 5),
            ("conv-08", 1),
        ]
        dual = next(c for c in cases if c["conversation_id"] == "conv-02")
        assert dual["tag_names"] == ["skip", "unsympathetic"]
        assert dual["original"].startswith("Now lift both legs")
        assert len(dual["context_before"]) == 2 and dual["context_after"] == []

    def test_run_and_fetch_report(self, client, store_dir):
        response = client.post(
            "/regression/run",
            json={"template": no_skip_template().to_dict(), "tag": "skip"},
        )
        assert response.status_code == 200
        report = response.json()
        skip_group = next(g for g in report["groups"] if g["tag"] == "skip")
        assert sum(r["changed"] for r in skip_group["results"]) == 3
        listed = client.get("/reports").json()
        assert report["id"] in {entry["id"] for entry in listed}
        fetched = client.get(f"/reports/{report['id']}")
        assert fetched.status_code == 200
        assert json.loads(fetched.content) == report

    def test_matches_offline_engine(self, client, store_dir):
        online = client.post(
            "/regression/run",
            json={"template": no_skip_template().to_dict(), "tag": "skip"},
        ).json()
        offline = run_regression(
            load_store(store_dir),
            no_skip_template(),
            MockBackend(fixture_mock_script()),
            tag_names={"skip"},
        ).to_dict()
        for data in (online, offline):
            data["id"] = data["created_at"] = None
        assert online == offline

    def test_invalid_template_is_400(self, client):
        template = no_skip_template().to_dict()
        template["preamble_template"] = "nope"
        response = client.post("/regression/run", json={"template": template})
        assert response.status_code == 400

    def test_store_untouched_by_individual_run(self, client, store_dir):
        before = (store_dir / "store.json").read_bytes()
        client.post(
            "/regression/run", json={"template": no_skip_template().to_dict(), "tag": "skip"}
        )
        assert (store_dir / "store.json").read_bytes() == before

    def test_missing_report_is_404(self, client):
        assert client.get("/reports/doesnotexist").status_code == 404


class TestConfig:
    def test_port_validation(self, tmp_path):
        with pytest.raises(ValueError):
            ServiceConfig(store_path=tmp_path, port=0).validate()

    def test_fresh_directory_gets_empty_store(self, tmp_path):
        app = create_app(
            ServiceConfig(store_path=tmp_path / "new"),
            backend=MockBackend(MockScript(rules=[])),
        )
        client = TestClient(app)
        assert client.get("/tasks").json() == []
        assert (tmp_path / "new" / "store.json").is_file()

    def test_wait_aware_demo_reply(self, client):
        # The shipped script reproduces the published wait-aware exchange.
        conv = client.post(
            "/conversations",
            json={"task_id": "exercise-task", "template_id": "wait-aware-template"},
        ).json()
        body = client.post(
            f"/conversations/{conv['id']}/turns",
            json={"text": "Ok hang on while I get a chair"},
        ).json()
        assert (
            body["bot_turn"]["text"]
            == "Once you have your chair, scoot to the front of it, with both hands facing forward."
        )
