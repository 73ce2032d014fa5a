"""Replay annotated bot utterances under a candidate template and report which
ones changed, grouped by tag.

Individual replay holds every prior turn verbatim and regenerates only the
addressed utterance; total replay regenerates every bot turn in sequence, with
user turns held verbatim and regenerated bot turns cascading into later
prompts. Change detection is normalized textual inequality; semantic
equivalence is out of scope.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from .errors import BotBenchError, InvalidTemplateError
from .graph import normalize_utterance
from .llm import CompletionBackend
from .model import Conversation, Task, Turn, new_id
from .store import Store
from .templates import ChatbotTemplate, extract_utterance, render_prompt, validate_template

CONTEXT_WINDOW = 2  # turns of context kept on each side of a tagged utterance

# Total replay covers untagged bot turns too; their results land in a group
# with this sentinel tag (real tag names are nonempty).
UNTAGGED_GROUP = ""


@dataclass
class TestCase:
    """One tagged bot utterance plus its surrounding context."""

    conversation_id: str
    turn_index: int
    tag_names: list[str] = field(default_factory=list)
    context_before: list[Turn] = field(default_factory=list)
    context_after: list[Turn] = field(default_factory=list)


@dataclass
class ReplayResult:
    case: TestCase
    original: str
    regenerated: str | None = None
    changed: bool = False
    error: str | None = None
    tainted: bool = False  # an earlier bot turn errored during total replay

    def to_dict(self) -> dict:
        return {
            "conversation_id": self.case.conversation_id,
            "turn_index": self.case.turn_index,
            "context_before": [
                {"role": t.role, "text": t.text} for t in self.case.context_before
            ],
            "original": self.original,
            "regenerated": self.regenerated,
            "changed": self.changed,
            "error": self.error,
            "tainted": self.tainted,
            "context_after": [
                {"role": t.role, "text": t.text} for t in self.case.context_after
            ],
        }


@dataclass
class ReportGroup:
    tag: str
    results: list[ReplayResult] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"tag": self.tag, "results": [r.to_dict() for r in self.results]}


@dataclass
class RegressionReport:
    id: str
    template_id: str
    mode: str
    created_at: str
    groups: list[ReportGroup] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "id": self.id,
            "template_id": self.template_id,
            "mode": self.mode,
            "created_at": self.created_at,
            "groups": [g.to_dict() for g in self.groups],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"

    def any_errors(self) -> bool:
        return any(r.error is not None for g in self.groups for r in g.results)


def utterance_changed(a: str, b: str) -> bool:
    """True iff the texts differ after merge-key normalization (NFC, trimmed,
    whitespace runs collapsed)."""
    return normalize_utterance(a) != normalize_utterance(b)


def _turn_matches(
    turn: Turn,
    tag_names: set[str] | None,
    polarity: str | None,
) -> bool:
    return any(
        (tag_names is None or tag.name in tag_names)
        and (polarity is None or tag.polarity == polarity)
        for tag in turn.tags
    )


def _case_for(conversation: Conversation, turn: Turn) -> TestCase:
    i = turn.index
    return TestCase(
        conversation_id=conversation.id,
        turn_index=i,
        tag_names=list(turn.tag_names()),
        context_before=conversation.turns[max(0, i - CONTEXT_WINDOW) : i],
        context_after=conversation.turns[i + 1 : i + 1 + CONTEXT_WINDOW],
    )


def collect_cases(
    store: Store,
    tag_names: Iterable[str] | None = None,
    source: str | None = None,
    polarity: str | None = None,
) -> list[TestCase]:
    """One case per tagged bot turn matching the filter, ordered by
    (conversation id, turn index)."""
    names = set(tag_names) if tag_names is not None else None
    cases = []
    for conv in store.filter_conversations(source=source):
        for turn in conv.turns:
            if turn.role != "bot" or not turn.tags:
                continue
            if not _turn_matches(turn, names, polarity):
                continue
            cases.append(_case_for(conv, turn))
    cases.sort(key=lambda c: (c.conversation_id, c.turn_index))
    return cases


def replay_individual(
    case: TestCase,
    conversation: Conversation,
    task: Task,
    template: ChatbotTemplate,
    backend: CompletionBackend,
) -> ReplayResult:
    """Regenerate one tagged utterance with all prior turns held verbatim.
    Backend failures land in result.error; the stored conversation is never
    touched."""
    original = conversation.turns[case.turn_index].text
    prompt = render_prompt(template, task, conversation.turns[: case.turn_index])
    try:
        regenerated = extract_utterance(template, backend.complete(prompt, template.generation))
    except BotBenchError as exc:
        return ReplayResult(case=case, original=original, error=f"{type(exc).__name__}: {exc}")
    return ReplayResult(
        case=case,
        original=original,
        regenerated=regenerated,
        changed=utterance_changed(original, regenerated),
    )


def replay_total(
    conversation: Conversation,
    template: ChatbotTemplate,
    task: Task,
    backend: CompletionBackend,
    cascade: bool = True,
) -> list[ReplayResult]:
    """Regenerate every bot turn in order, one result per bot turn.

    User turns are copied verbatim. With cascade (the default), regenerated
    bot turns feed the prompts of later turns; a turn whose regeneration
    failed falls back to its original text and taints everything after it.
    With cascade off, every turn replays against the original prefix.
    """
    results = []
    history: list[Turn] = []
    tainted = False
    for turn in conversation.turns:
        if turn.role == "user":
            history.append(Turn(index=len(history), role="user", text=turn.text))
            continue
        context = conversation.turns[: turn.index] if not cascade else history
        prompt = render_prompt(template, task, context)
        result = ReplayResult(
            case=_case_for(conversation, turn), original=turn.text, tainted=tainted
        )
        replayed_text = turn.text
        try:
            regenerated = extract_utterance(
                template, backend.complete(prompt, template.generation)
            )
        except BotBenchError as exc:
            result.error = f"{type(exc).__name__}: {exc}"
            tainted = True
        else:
            result.regenerated = regenerated
            result.changed = utterance_changed(turn.text, regenerated)
            replayed_text = regenerated
        results.append(result)
        history.append(Turn(index=len(history), role="bot", text=replayed_text))
    return results


def _group_results(results: Iterable[ReplayResult]) -> list[ReportGroup]:
    groups: dict[str, ReportGroup] = {}
    for result in results:
        for tag in result.case.tag_names or [UNTAGGED_GROUP]:
            group = groups.get(tag)
            if group is None:
                group = groups[tag] = ReportGroup(tag=tag)
            group.results.append(result)
    return [groups[tag] for tag in sorted(groups)]


def run_regression(
    store: Store,
    template: ChatbotTemplate,
    backend: CompletionBackend,
    tag_names: Iterable[str] | None = None,
    source: str | None = None,
    polarity: str | None = None,
    mode: str = "individual",
    reports_dir: str | Path | None = None,
) -> RegressionReport:
    """Replay every matching case under the candidate template and group the
    results by tag (a result with n tags appears in n groups).

    Individual mode replays each tagged utterance in isolation; total mode
    replays every conversation that contains a matching case end to end.
    Backend errors are embedded per result; an invalid template aborts. When
    reports_dir is given the report is persisted there as `<id>.json`.
    """
    if mode not in ("individual", "total"):
        raise ValueError(f"mode must be 'individual' or 'total', got {mode!r}")
    violations = validate_template(template)
    if violations:
        raise InvalidTemplateError(
            "template invalid: " + "; ".join(str(v) for v in violations)
        )

    cases = collect_cases(store, tag_names=tag_names, source=source, polarity=polarity)
    results: list[ReplayResult] = []
    if mode == "individual":
        for case in cases:
            conversation = store.get_conversation(case.conversation_id)
            task = store.get_task(conversation.task_id)
            results.append(replay_individual(case, conversation, task, template, backend))
    else:
        for cid in sorted({c.conversation_id for c in cases}):
            conversation = store.get_conversation(cid)
            task = store.get_task(conversation.task_id)
            results.extend(replay_total(conversation, template, task, backend))

    report = RegressionReport(
        id=new_id(),
        template_id=template.id,
        mode=mode,
        created_at=datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        groups=_group_results(results),
    )
    if reports_dir is not None:
        write_report(report, reports_dir)
    return report


def write_report(report: RegressionReport, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{report.id}.json"
    path.write_text(report.to_json(), encoding="utf-8")
    return path


def list_reports(directory: str | Path) -> list[dict]:
    """Summaries of persisted reports, newest last (sorted by created_at, id)."""
    directory = Path(directory)
    if not directory.is_dir():
        return []
    summaries = []
    for path in sorted(directory.glob("*.json")):
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError):
            continue
        summaries.append(
            {
                "id": data.get("id", path.stem),
                "template_id": data.get("template_id"),
                "mode": data.get("mode"),
                "created_at": data.get("created_at"),
                "groups": [
                    {"tag": g.get("tag"), "results": len(g.get("results", []))}
                    for g in data.get("groups", [])
                ],
            }
        )
    summaries.sort(key=lambda s: (s.get("created_at") or "", s.get("id") or ""))
    return summaries
