"""Store operations, persistence, and the filter/fork/round-trip properties."""

from __future__ import annotations

import json
import random

import pytest

from botbench.errors import (
    ReferentialIntegrityError,
    SchemaVersionError,
    StoreIOError,
    TurnIndexError,
    UnknownConversationError,
    UnknownTaskError,
    UnknownTemplateError,
)
from botbench.store import Store, dump_store_json, load_store, persist_store, store_path

from conftest import random_store


def brute_filter(
    store: Store,
    source: str | None = None,
    tag_names: set[str] | None = None,
    polarity: str | None = None,
) -> list[str]:
    """Independent linear-scan oracle for filter_conversations."""
    hits = []
    for cid in sorted(store.conversations):
        conv = store.conversations[cid]
        if source is not None and conv.source != source:
            continue
        if tag_names is not None or polarity is not None:
            ok = False
            for turn in conv.turns:
                for tag in turn.tags:
                    name_ok = tag_names is None or tag.name in tag_names
                    pol_ok = polarity is None or tag.polarity == polarity
                    if name_ok and pol_ok:
                        ok = True
            if not ok:
                continue
        hits.append(cid)
    return hits


class TestCreateConversation:
    def test_creates_empty_conversation(self, exercise_store):
        conv = exercise_store.create_conversation("exercise-task", "baseline-template", "web")
        assert conv.turns == []
        assert conv.parent is None

    def test_unknown_task(self, exercise_store):
        with pytest.raises(UnknownTaskError):
            exercise_store.create_conversation("missing-task-id", "baseline-template", "web")

    def test_unknown_template(self, exercise_store):
        with pytest.raises(UnknownTemplateError):
            exercise_store.create_conversation("exercise-task", "missing", "web")

    def test_fresh_unique_ids(self, exercise_store):
        a = exercise_store.create_conversation("exercise-task", "baseline-template", "web")
        b = exercise_store.create_conversation("exercise-task", "baseline-template", "web")
        assert a.id != b.id

    def test_append_through_store_persists(self, exercise_store):
        conv = exercise_store.create_conversation("exercise-task", "baseline-template", "web")
        turn = exercise_store.append_turn(conv.id, "user", "Ok hang on while I get a chair")
        assert turn.index == 0
        assert exercise_store.get_conversation(conv.id).turns[0].text == turn.text

    def test_append_to_unknown_conversation(self, exercise_store):
        with pytest.raises(UnknownConversationError):
            exercise_store.append_turn("nope", "user", "hello")


class TestFork:
    def test_fork_copies_prefix_inclusive(self, exercise_store):
        fork = exercise_store.fork_conversation("conv-01", 3)
        parent = exercise_store.get_conversation("conv-01")
        assert len(fork.turns) == 4
        assert fork.parent.conversation_id == "conv-01"
        assert fork.parent.fork_turn_index == 3
        for i in range(4):
            assert fork.turns[i].text == parent.turns[i].text
            assert fork.turns[i].role == parent.turns[i].role

    def test_fork_drops_tags(self, exercise_store):
        fork = exercise_store.fork_conversation("conv-01", 3)
        assert exercise_store.get_conversation("conv-01").turns[3].tag_names() == ["skip"]
        assert fork.turns[3].tags == []

    def test_fork_keeps_refs_and_source(self, exercise_store):
        fork = exercise_store.fork_conversation("conv-01", 2)
        assert fork.task_id == "exercise-task"
        assert fork.template_id == "baseline-template"
        assert fork.source == "web"

    def test_fork_out_of_range(self, exercise_store):
        with pytest.raises(TurnIndexError):
            exercise_store.fork_conversation("conv-01", 6)

    def test_fixture_has_six_forks_of_the_parent(self, exercise_store):
        parents = [
            c.parent.conversation_id
            for c in exercise_store.list_conversations()
            if c.parent is not None
        ]
        assert parents == ["conv-01"] * 6

    def test_fork_prefix_property_all_stored_forks(self, exercise_store):
        for conv in exercise_store.list_conversations():
            if conv.parent is None:
                continue
            parent = exercise_store.get_conversation(conv.parent.conversation_id)
            k = conv.parent.fork_turn_index
            assert k < len(parent.turns)
            for i in range(k + 1):
                assert conv.turns[i].text == parent.turns[i].text
                assert conv.turns[i].role == parent.turns[i].role


class TestFilter:
    def test_no_criteria_returns_all(self, exercise_store):
        assert len(exercise_store.filter_conversations()) == 12

    def test_skip_tag_filter_matches_frozen_expectation(self, exercise_store):
        # Frozen from the brute-force scan oracle over the fixture.
        got = [c.id for c in exercise_store.filter_conversations(tag_names={"skip"})]
        assert got == ["conv-01", "conv-02", "conv-08"]
        assert got == brute_filter(exercise_store, tag_names={"skip"})

    def test_source_and_tag_intersection(self, exercise_store):
        got = [
            c.id
            for c in exercise_store.filter_conversations(source="web", tag_names={"skip"})
        ]
        web = set(brute_filter(exercise_store, source="web"))
        skip = set(brute_filter(exercise_store, tag_names={"skip"}))
        assert got == sorted(web & skip)

    def test_source_filter(self, exercise_store):
        assert [c.id for c in exercise_store.filter_conversations(source="cli")] == ["conv-09"]
        assert [c.id for c in exercise_store.filter_conversations(source="import")] == ["conv-11"]

    def test_polarity_filter(self, exercise_store):
        got = [c.id for c in exercise_store.filter_conversations(polarity="success")]
        assert got == ["conv-11"]

    def test_random_criteria_match_brute_force(self):
        rng = random.Random(20260810)
        for _ in range(30):
            store = random_store(rng)
            vocabulary = {
                t.name for c in store.conversations.values() for u in c.turns for t in u.tags
            }
            for _ in range(10):
                source = rng.choice([None, "web", "cli", "import"])
                tag_names = None
                if vocabulary and rng.random() < 0.6:
                    tag_names = set(rng.sample(sorted(vocabulary), rng.randint(1, len(vocabulary))))
                polarity = rng.choice([None, "error", "success"])
                got = [
                    c.id
                    for c in store.filter_conversations(
                        source=source, tag_names=tag_names, polarity=polarity
                    )
                ]
                assert got == brute_filter(store, source, tag_names, polarity)


class TestPersistence:
    def test_round_trip_fixture(self, exercise_store, tmp_path):
        persist_store(exercise_store, tmp_path)
        again = load_store(tmp_path)
        assert again.to_dict() == exercise_store.to_dict()

    def test_round_trip_random_stores(self, tmp_path):
        rng = random.Random(7)
        for i in range(20):
            store = random_store(rng)
            directory = tmp_path / f"s{i}"
            persist_store(store, directory)
            assert load_store(directory).to_dict() == store.to_dict()

    def test_schema_version_mismatch(self, exercise_store, tmp_path):
        persist_store(exercise_store, tmp_path)
        data = json.loads(store_path(tmp_path).read_text(encoding="utf-8"))
        data["schema_version"] = 2
        store_path(tmp_path).write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(SchemaVersionError):
            load_store(tmp_path)

    def test_dangling_task_ref(self, exercise_store, tmp_path):
        persist_store(exercise_store, tmp_path)
        data = json.loads(store_path(tmp_path).read_text(encoding="utf-8"))
        data["conversations"]["conv-08"]["task_id"] = "ghost"
        store_path(tmp_path).write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(ReferentialIntegrityError):
            load_store(tmp_path)

    def test_dangling_parent_ref(self, exercise_store, tmp_path):
        persist_store(exercise_store, tmp_path)
        data = json.loads(store_path(tmp_path).read_text(encoding="utf-8"))
        data["conversations"]["conv-02"]["parent"]["conversation_id"] = "ghost"
        store_path(tmp_path).write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(ReferentialIntegrityError):
            load_store(tmp_path)

    def test_broken_fork_prefix(self, exercise_store, tmp_path):
        persist_store(exercise_store, tmp_path)
        data = json.loads(store_path(tmp_path).read_text(encoding="utf-8"))
        data["conversations"]["conv-02"]["turns"][1]["text"] = "tampered"
        store_path(tmp_path).write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(ReferentialIntegrityError):
            load_store(tmp_path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(StoreIOError):
            load_store(tmp_path / "nowhere")

    def test_garbage_file(self, tmp_path):
        store_path(tmp_path).parent.mkdir(parents=True, exist_ok=True)
        store_path(tmp_path).write_text("not json", encoding="utf-8")
        with pytest.raises(StoreIOError):
            load_store(tmp_path)

    def test_dump_is_deterministic(self, exercise_store):
        assert dump_store_json(exercise_store) == dump_store_json(exercise_store)


class TestSnapshots:
    def test_returned_conversations_are_copies(self, exercise_store):
        conv = exercise_store.get_conversation("conv-01")
        conv.turns[0].text = "mutated"
        assert exercise_store.get_conversation("conv-01").turns[0].text != "mutated"

    def test_alternation_holds_for_all_stored_conversations(self, exercise_store):
        for conv in exercise_store.list_conversations():
            for a, b in zip(conv.turns, conv.turns[1:]):
                assert a.role != b.role

    def test_random_store_invariants(self):
        rng = random.Random(99)
        for _ in range(10):
            store = random_store(rng)
            store.check_integrity()
            for conv in store.conversations.values():
                for a, b in zip(conv.turns, conv.turns[1:]):
                    assert a.role != b.role
                for turn in conv.turns:
                    names = turn.tag_names()
                    assert len(names) == len(set(names))
