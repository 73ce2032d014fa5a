"""Shared fixtures: the ExerciseBot store, scripted backends, and random
generators for property tests."""

from __future__ import annotations

import random

import pytest

from botbench.fixtures import (
    BASELINE_TEMPLATE_ID,
    TASK_ID,
    baseline_template,
    build_fixture_store,
    exercise_task,
    fixture_mock_script,
)
from botbench.llm import GenerationParams, MockBackend, MockRule, MockScript
from botbench.model import Conversation, Step, Tag, Task, Turn
from botbench.store import Store
from botbench.templates import ChatbotTemplate, render_prompt


@pytest.fixture()
def exercise_store() -> Store:
    return build_fixture_store()


@pytest.fixture()
def mock_backend() -> MockBackend:
    return MockBackend(fixture_mock_script())


class RecordingBackend:
    """Wraps another backend and captures every prompt it sees."""

    def __init__(self, inner):
        self.inner = inner
        self.prompts: list[str] = []

    def complete(self, prompt: str, params: GenerationParams) -> str:
        self.prompts.append(prompt)
        return self.inner.complete(prompt, params)


# --- replay-mode scenario -----------------------------------------------------

CASCADE_ORIGINALS = {
    1: "The first step is to sit down on your sturdy chair.",
    3: "Now place both hands on the seat beside your hips.",
    5: "Slide your butt off the edge and bend your elbows slowly.",
}
CASCADE_REGENERATED_T1 = "Let us begin by sitting down on the sturdy chair."

_CASCADE_USER_TEXTS = {
    0: "Could you tell me what the first step is?",
    2: "Alright, I am sitting down now, what is next?",
    4: "Done, my hands are on the seat, please continue.",
}


def cascade_scenario() -> tuple[Store, MockBackend]:
    """A 6-turn conversation plus an exact-rule mock that alters bot turn 1
    and reproduces turns 3 and 5 under either replay mode's context."""
    store = Store()
    store.add_task(exercise_task())
    store.add_template(baseline_template())
    store.create_conversation(TASK_ID, BASELINE_TEMPLATE_ID, "web", conversation_id="cascade-01")
    for i in range(6):
        if i % 2 == 0:
            store.append_turn("cascade-01", "user", _CASCADE_USER_TEXTS[i])
        else:
            store.append_turn("cascade-01", "bot", CASCADE_ORIGINALS[i])
    store.add_tag("cascade-01", 3, Tag("cascade", "error"))

    task, template = exercise_task(), baseline_template()
    turns = store.get_conversation("cascade-01").turns
    regenerated_t1 = Turn(index=1, role="bot", text=CASCADE_REGENERATED_T1)
    cascaded_t3_ctx = [turns[0], regenerated_t1, turns[2]]
    cascaded_t5_ctx = [turns[0], regenerated_t1, turns[2], turns[3], turns[4]]
    rules = [
        # identical in both modes: only turn 0 precedes turn 1
        MockRule("exact", render_prompt(template, task, turns[:1]), CASCADE_REGENERATED_T1),
        # total mode: prompts carry the regenerated turn 1
        MockRule("exact", render_prompt(template, task, cascaded_t3_ctx), CASCADE_ORIGINALS[3]),
        MockRule("exact", render_prompt(template, task, cascaded_t5_ctx), CASCADE_ORIGINALS[5]),
        # individual mode: prompts carry the original prefix
        MockRule("exact", render_prompt(template, task, turns[:3]), CASCADE_ORIGINALS[3]),
        MockRule("exact", render_prompt(template, task, turns[:5]), CASCADE_ORIGINALS[5]),
    ]
    return store, MockBackend(MockScript(rules=rules, strict=True))


# --- random data for property tests ------------------------------------------

_WORDS = (
    "chair stretch breathe forward slowly gently exercise repeat steady "
    "shoulder posture balance lift hold lower relax water ready desk knees"
).split()

SHORT_UTTERANCES = [
    "OK",
    "Done",
    "Sure",
    "What's next?",
    "Next please",
    "Go on",
    "Ready",
    "Hmm",
    "Yes",
    "And then?",
]

LONG_UTTERANCES = [
    "Scoot to the front of your chair and get ready.",
    "Grab the sides of the chair with both hands now.",
    "Lift both legs until they are parallel to the floor.",
    "Hold that position for five seconds and breathe.",
    "Stand up slowly and then sit back down again.",
    "That was great, you finished the whole first set.",
    "Could you explain the next exercise to me please?",
    "I think I need a short break before the next one.",
    "My arms are getting tired, can we slow this down?",
    "Keep your back straight while you do this exercise.",
    "Is it normal for this stretch to feel a bit tight?",
    "Place both palms flat on the seat beside your hips.",
    "Step forward until your knees are bent at a right angle.",
    "Remember to keep breathing evenly through the movement.",
    "You can shake your arms out between the repetitions.",
]


def random_text(rng: random.Random, min_words: int = 1, max_words: int = 8) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(rng.randint(min_words, max_words)))


def random_conversation_set(rng: random.Random) -> list[Conversation]:
    """Conversations for graph property tests: utterances straddle the 20-char
    merge threshold and repeat freely across (and within) conversations."""
    conversations = []
    for i in range(rng.randint(1, 20)):
        conv = Conversation(id=f"c{i:02d}", task_id="task", template_id="tpl", source="web")
        role = rng.choice(["user", "bot"])
        for _ in range(rng.randint(1, 30)):
            pool = LONG_UTTERANCES if rng.random() < 0.7 else SHORT_UTTERANCES
            conv.append_turn(role, rng.choice(pool))
            role = "user" if role == "bot" else "bot"
        conversations.append(conv)
    return conversations


def random_store(rng: random.Random) -> Store:
    """A structurally valid random store for round-trip and filter tests."""
    store = Store()
    task_ids, template_ids = [], []
    for i in range(rng.randint(1, 3)):
        tid = f"task-{i}"
        store.add_task(
            Task(
                id=tid,
                name=random_text(rng, 2, 4),
                description=random_text(rng, 3, 10),
                items=[random_text(rng, 1, 3) for _ in range(rng.randint(0, 3))],
                steps=[
                    Step(random_text(rng, 1, 3), random_text(rng, 4, 12))
                    for _ in range(rng.randint(1, 4))
                ],
            )
        )
        task_ids.append(tid)
    for i in range(rng.randint(1, 3)):
        tid = f"tpl-{i}"
        store.add_template(
            ChatbotTemplate(id=tid, name=f"template {i}", preamble_template="T {task_text} T")
        )
        template_ids.append(tid)

    tag_pool = ["skip", "rude", "vague", "good", "crisp"]
    for i in range(rng.randint(0, 10)):
        source = rng.choice(["web", "cli", "import"])
        conv = store.create_conversation(
            rng.choice(task_ids), rng.choice(template_ids), source, conversation_id=f"conv-{i:02d}"
        )
        role = rng.choice(["user", "bot"])
        for _ in range(rng.randint(0, 12)):
            store.append_turn(conv.id, role, random_text(rng, 1, 10))
            role = "user" if role == "bot" else "bot"
        fresh = store.get_conversation(conv.id)
        for turn in fresh.turns:
            if rng.random() < 0.15:
                store.add_tag(
                    conv.id,
                    turn.index,
                    Tag(rng.choice(tag_pool), rng.choice(["error", "success"])),
                )
    # fork a few of the conversations that have turns
    candidates = [c for c in store.list_conversations() if c.turns]
    for i, parent in enumerate(candidates):
        if rng.random() < 0.4:
            fork = store.fork_conversation(
                parent.id, rng.randrange(len(parent.turns)), fork_id=f"fork-{i:02d}"
            )
            if rng.random() < 0.5:
                last_role = store.get_conversation(fork.id).turns[-1].role
                next_role = "user" if last_role == "bot" else "bot"
                store.append_turn(fork.id, next_role, random_text(rng, 1, 8))
    return store
