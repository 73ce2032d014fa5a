"""ExerciseBot fixture: a deterministic, self-contained demo and test dataset.

Ships one desk-exercise task, three chatbot templates (baseline, a "Don't skip
any steps." variant, and a wait-aware variant), twelve collected conversations
(half forked from a shared prefix), error/success annotations, and a mock LM
script whose rules reproduce every stored bot utterance under the baseline
template and answer variant prompts with the corrected first step.
"""

from __future__ import annotations

import json
from pathlib import Path

from .llm import GenerationParams, MockRule, MockScript
from .model import Step, Tag, Task, Turn
from .store import Store, persist_store
from .templates import ChatbotTemplate, ExtractionRules, TaskFormat, TurnFormat, render_prompt

TASK_ID = "exercise-task"
BASELINE_TEMPLATE_ID = "baseline-template"
NO_SKIP_TEMPLATE_ID = "no-skip-template"
WAIT_AWARE_TEMPLATE_ID = "wait-aware-template"

PARENT_CONVERSATION_ID = "conv-01"
FORK_TURN_INDEX = 3

BASELINE_PREAMBLE = (
    "Consider the following set of exercises:\n"
    "{task_text}\n"
    "Instruct the user in completing each exercise step-by-step."
)
NO_SKIP_INSTRUCTION = "Don't skip any steps."
WAIT_INSTRUCTION = (
    "If the user asks you to wait, explain that this is not a problem "
    "and tell them what the next step will be."
)

CORRECT_FIRST_STEP = (
    "Scoot to the front of your chair, with both hands facing forward, "
    "and place your palms flat on the seat."
)
WAIT_ACKNOWLEDGEMENT = (
    "Once you have your chair, scoot to the front of it, with both hands facing forward."
)
CATCH_ALL_RESPONSE = "Let's move on to the next step of the exercise together."


def exercise_task() -> Task:
    return Task(
        id=TASK_ID,
        name="Desk Exercises",
        description="A short strength routine you can do at your desk with a sturdy chair.",
        items=["a sturdy chair", "a bottle of water"],
        steps=[
            Step("Tricep Dips", CORRECT_FIRST_STEP),
            Step(
                "Seated Leg Lifts",
                "Grab the sides of your chair and lift both legs until they are "
                "parallel to the floor, then hold for five seconds.",
            ),
            Step(
                "Chair Squats",
                "Step forward until your butt clears the chair, bend your knees to "
                "ninety degrees, then stand up and sit back down slowly.",
            ),
        ],
    )


def _template(template_id: str, name: str, preamble: str) -> ChatbotTemplate:
    return ChatbotTemplate(
        id=template_id,
        name=name,
        preamble_template=preamble,
        task_format=TaskFormat(
            include_name=False,
            include_description=False,
            include_items=False,
            step_prefix_pattern="{n}. ",
        ),
        turn_format=TurnFormat(user_prefix="User: ", bot_prefix="Bot: ", separator="\n"),
        generation=GenerationParams(
            model="text-davinci-001", temperature=0.0, max_tokens=256, stop=["\nUser:"]
        ),
        extraction=ExtractionRules(stop_markers=["\nUser:"], trim_whitespace=True),
    )


def baseline_template() -> ChatbotTemplate:
    return _template(BASELINE_TEMPLATE_ID, "Baseline", BASELINE_PREAMBLE)


def no_skip_template() -> ChatbotTemplate:
    return _template(
        NO_SKIP_TEMPLATE_ID,
        "Baseline + don't skip steps",
        BASELINE_PREAMBLE + "\n" + NO_SKIP_INSTRUCTION,
    )


def wait_aware_template() -> ChatbotTemplate:
    return _template(
        WAIT_AWARE_TEMPLATE_ID,
        "Baseline + wait acknowledgement",
        BASELINE_PREAMBLE + "\n" + WAIT_INSTRUCTION,
    )


# Parent conversation: the bot skips the first step after the user fetches a
# chair, then brushes off a request for an easier exercise.
_PARENT_TURNS = [
    ("user", "Hi, I'm ready to start my desk exercises now."),
    (
        "bot",
        "Great! The first exercise is called Tricep Dips. "
        "You will need a sturdy chair for this one.",
    ),
    ("user", "Ok hang on while I get a chair"),
    (
        "bot",
        "Step forward until your butt clears the chair and your knees "
        "are bent at ninety degrees.",
    ),
    ("user", "That step sounds painful, can we try an easier one?"),
    ("bot", "Five more seconds, keep holding the position until I tell you to stop."),
]

# Continuations appended to the six forks of conv-01 (forked after turn 3).
# conv-07 stays a bare rollback with no continuation.
_FORK_CONTINUATIONS: dict[str, list[tuple[str, str]]] = {
    "conv-02": [
        ("user", "Ow, that hurt! Can we do something gentler?"),
        (
            "bot",
            "Now lift both legs until they are parallel to the floor "
            "and hold for five seconds.",
        ),
    ],
    "conv-03": [
        ("user", "What's next?"),
        ("bot", "Remember to keep breathing evenly while you hold the position."),
    ],
    "conv-04": [
        ("user", "Done"),
        ("bot", "Remember to keep breathing evenly while you hold the position."),
    ],
    "conv-05": [
        ("user", "How many repetitions of this should I do?"),
        ("bot", "Aim for five repetitions of each exercise before moving on."),
    ],
    "conv-06": [
        ("user", "Can I rest for a minute first?"),
        ("bot", "Aim for five repetitions of each exercise before moving on."),
    ],
    "conv-07": [],
}

_SPREAD_OUT_REPLY = (
    "It is fine to spread the exercises out over the day, "
    "pick whatever pace feels comfortable."
)
_ALL_REPS_REPLY = "That's ok, just try to complete all five reps of every exercise."

# Independent conversations. conv-11 and conv-12 reuse two long bot utterances
# in opposite orders, so the merged graph needs one decycling split.
_INDEPENDENT_CONVERSATIONS: list[tuple[str, str, list[tuple[str, str]]]] = [
    (
        "conv-08",
        "web",
        [
            ("user", "Hello ExerciseBot, what is the first exercise?"),
            (
                "bot",
                "Lift both legs until they are parallel to the floor "
                "and hold the position for five seconds.",
            ),
            ("user", "Should I not start with the tricep dips first?"),
            (
                "bot",
                "You can do the exercises in any order you like, "
                "the sequence does not matter very much.",
            ),
        ],
    ),
    (
        "conv-09",
        "cli",
        [
            ("user", "Ready."),
            (
                "bot",
                "Great! The first exercise is called Tricep Dips. "
                "You will need a sturdy chair for this one.",
            ),
            ("user", "Done."),
            (
                "bot",
                "Nice work! Grab the sides of your chair and lift both legs "
                "until they are parallel to the floor.",
            ),
        ],
    ),
    (
        "conv-10",
        "web",
        [
            ("user", "What do I do first?"),
            ("bot", CORRECT_FIRST_STEP),
            ("user", "OK"),
            (
                "bot",
                "Now slide your butt off the edge of the seat and bend your "
                "elbows to lower yourself slowly.",
            ),
        ],
    ),
    (
        "conv-11",
        "import",
        [
            ("user", "Is it more effective to do all exercises at once?"),
            ("bot", _SPREAD_OUT_REPLY),
            ("user", "At my age I'm going to have to break them up."),
            ("bot", _ALL_REPS_REPLY),
        ],
    ),
    (
        "conv-12",
        "web",
        [
            ("user", "Can I take breaks between the different exercises?"),
            ("bot", _ALL_REPS_REPLY),
            ("user", "Good, because I will need them at my age for sure."),
            ("bot", _SPREAD_OUT_REPLY),
        ],
    ),
]

# (conversation id, turn index, tag)
_ANNOTATIONS = [
    (
        "conv-01",
        3,
        Tag("skip", "error", "Skipped the scoot-to-the-front step of the tricep dips."),
    ),
    (
        "conv-01",
        5,
        Tag("unsympathetic", "error", "Ignores the user's request for an easier exercise."),
    ),
    (
        "conv-02",
        5,
        Tag("skip", "error", "Jumped to leg lifts without the grab-the-chair setup."),
    ),
    (
        "conv-02",
        5,
        Tag("unsympathetic", "error", "Ignores the user's expression of pain."),
    ),
    (
        "conv-08",
        1,
        Tag("skip", "error", "Started at step two, skipping tricep dips entirely."),
    ),
    (
        "conv-11",
        3,
        Tag("sympathetic", "success", "Accommodates the user's pacing without dropping the goal."),
    ),
]


def build_fixture_store() -> Store:
    """Assemble the full fixture store through the public store operations."""
    store = Store()
    store.add_task(exercise_task())
    store.add_template(baseline_template())
    store.add_template(no_skip_template())
    store.add_template(wait_aware_template())

    store.create_conversation(
        TASK_ID, BASELINE_TEMPLATE_ID, "web", conversation_id=PARENT_CONVERSATION_ID
    )
    for role, text in _PARENT_TURNS:
        store.append_turn(PARENT_CONVERSATION_ID, role, text)

    for fork_id, continuation in _FORK_CONTINUATIONS.items():
        store.fork_conversation(PARENT_CONVERSATION_ID, FORK_TURN_INDEX, fork_id=fork_id)
        for role, text in continuation:
            store.append_turn(fork_id, role, text)

    for cid, source, turns in _INDEPENDENT_CONVERSATIONS:
        store.create_conversation(TASK_ID, BASELINE_TEMPLATE_ID, source, conversation_id=cid)
        for role, text in turns:
            store.append_turn(cid, role, text)

    for cid, turn_index, tag in _ANNOTATIONS:
        store.add_tag(cid, turn_index, tag)
    return store


def fixture_mock_script() -> MockScript:
    """Deterministic mock rules for the fixture.

    Order matters: the variant rule (keyed on the added instruction) comes
    first so replays under the no-skip template regenerate the corrected first
    step; exact-prompt rules then reproduce every stored bot utterance under
    the baseline template; a catch-all keeps free-form chat flowing.
    """
    task = exercise_task()
    baseline = baseline_template()
    rules = [
        MockRule(match="substring", pattern=NO_SKIP_INSTRUCTION, response=CORRECT_FIRST_STEP),
        MockRule(
            match="exact",
            pattern=render_prompt(
                wait_aware_template(),
                task,
                [Turn(index=0, role="user", text="Ok hang on while I get a chair")],
            ),
            response=WAIT_ACKNOWLEDGEMENT,
        ),
    ]
    seen_prompts: set[str] = set()
    for conv in build_fixture_store().list_conversations():
        for turn in conv.turns:
            if turn.role != "bot":
                continue
            prompt = render_prompt(baseline, task, conv.turns[: turn.index])
            if prompt in seen_prompts:
                continue
            seen_prompts.add(prompt)
            rules.append(MockRule(match="exact", pattern=prompt, response=turn.text))
    rules.append(MockRule(match="substring", pattern="Bot:", response=CATCH_ALL_RESPONSE))
    return MockScript(rules=rules, strict=True)


def write_fixture_files(directory: str | Path) -> dict[str, Path]:
    """Materialize the fixture into a store directory: store.json, the mock
    script, and one JSON file per template (handy for `botbench test`)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {"store": persist_store(build_fixture_store(), directory)}

    script_path = directory / "mock_script.json"
    script_path.write_text(
        json.dumps(fixture_mock_script().to_dict(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    paths["mock_script"] = script_path

    for template in (baseline_template(), no_skip_template(), wait_aware_template()):
        path = directory / f"{template.id.replace('-', '_')}.json"
        path.write_text(
            json.dumps(template.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
        paths[template.id] = path
    return paths
