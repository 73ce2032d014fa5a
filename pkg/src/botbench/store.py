"""The persistent collection of tasks, templates, and conversations.

A store lives in one directory as `store.json` (UTF-8, schema_version 1) plus
an append-only `reports/` subdirectory written by regression runs. Mutations
go through Store methods so invariants (role alternation, tag uniqueness,
referential integrity) hold at all times; everything handed out is a deep
copy, safe to pass between threads.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any, Iterable

from .errors import (
    DuplicateIdError,
    ReferentialIntegrityError,
    SchemaVersionError,
    StoreIOError,
    TurnIndexError,
    UnknownConversationError,
    UnknownTaskError,
    UnknownTemplateError,
)
from .model import Conversation, ForkRef, Tag, Task, Turn, check_source, new_id
from .templates import ChatbotTemplate

SCHEMA_VERSION = 1
STORE_FILENAME = "store.json"
REPORTS_DIRNAME = "reports"


class Store:
    """In-memory store with a single-writer discipline; persistence is explicit
    via persist_store/load_store."""

    def __init__(self) -> None:
        self.schema_version = SCHEMA_VERSION
        self.tasks: dict[str, Task] = {}
        self.templates: dict[str, ChatbotTemplate] = {}
        self.conversations: dict[str, Conversation] = {}

    # --- tasks and templates -------------------------------------------------

    def add_task(self, task: Task) -> Task:
        task.validate()
        if task.id in self.tasks:
            raise DuplicateIdError(f"task {task.id!r} already exists")
        self.tasks[task.id] = copy.deepcopy(task)
        return copy.deepcopy(task)

    def add_template(self, template: ChatbotTemplate) -> ChatbotTemplate:
        if not template.id:
            raise ValueError("template id must be nonempty")
        if template.id in self.templates:
            raise DuplicateIdError(f"template {template.id!r} already exists")
        self.templates[template.id] = copy.deepcopy(template)
        return copy.deepcopy(template)

    def replace_template(self, template: ChatbotTemplate) -> ChatbotTemplate:
        if template.id not in self.templates:
            raise UnknownTemplateError(f"no template {template.id!r}")
        self.templates[template.id] = copy.deepcopy(template)
        return copy.deepcopy(template)

    def get_task(self, task_id: str) -> Task:
        if task_id not in self.tasks:
            raise UnknownTaskError(f"no task {task_id!r}")
        return copy.deepcopy(self.tasks[task_id])

    def get_template(self, template_id: str) -> ChatbotTemplate:
        if template_id not in self.templates:
            raise UnknownTemplateError(f"no template {template_id!r}")
        return copy.deepcopy(self.templates[template_id])

    def list_tasks(self) -> list[Task]:
        return [copy.deepcopy(t) for _, t in sorted(self.tasks.items())]

    def list_templates(self) -> list[ChatbotTemplate]:
        return [copy.deepcopy(t) for _, t in sorted(self.templates.items())]

    # --- conversations --------------------------------------------------------

    def _conversation(self, conversation_id: str) -> Conversation:
        if conversation_id not in self.conversations:
            raise UnknownConversationError(f"no conversation {conversation_id!r}")
        return self.conversations[conversation_id]

    def get_conversation(self, conversation_id: str) -> Conversation:
        return copy.deepcopy(self._conversation(conversation_id))

    def list_conversations(self) -> list[Conversation]:
        return [copy.deepcopy(c) for _, c in sorted(self.conversations.items())]

    def create_conversation(
        self,
        task_id: str,
        template_id: str,
        source: str = "web",
        conversation_id: str | None = None,
    ) -> Conversation:
        if task_id not in self.tasks:
            raise UnknownTaskError(f"no task {task_id!r}")
        if template_id not in self.templates:
            raise UnknownTemplateError(f"no template {template_id!r}")
        check_source(source)
        cid = conversation_id or new_id()
        if cid in self.conversations:
            raise DuplicateIdError(f"conversation {cid!r} already exists")
        conv = Conversation(id=cid, task_id=task_id, template_id=template_id, source=source)
        self.conversations[cid] = conv
        return copy.deepcopy(conv)

    def append_turn(self, conversation_id: str, role: str, text: str) -> Turn:
        turn = self._conversation(conversation_id).append_turn(role, text)
        return copy.deepcopy(turn)

    def fork_conversation(
        self,
        conversation_id: str,
        turn_index: int,
        fork_id: str | None = None,
    ) -> Conversation:
        """Copy a conversation up to (and including) turn_index into a new one.

        Copied turns keep text and role but drop tags: a fork is a fresh
        annotation surface. The fork keeps the parent's task, template, and
        source, and records its lineage in `parent`.
        """
        parent = self._conversation(conversation_id)
        if not 0 <= turn_index < len(parent.turns):
            raise TurnIndexError(
                f"conversation {conversation_id}: fork index {turn_index} out of range "
                f"(have {len(parent.turns)} turns)"
            )
        cid = fork_id or new_id()
        if cid in self.conversations:
            raise DuplicateIdError(f"conversation {cid!r} already exists")
        fork = Conversation(
            id=cid,
            task_id=parent.task_id,
            template_id=parent.template_id,
            source=parent.source,
            parent=ForkRef(conversation_id=conversation_id, fork_turn_index=turn_index),
            turns=[
                Turn(index=t.index, role=t.role, text=t.text, tags=[])
                for t in parent.turns[: turn_index + 1]
            ],
        )
        self.conversations[cid] = fork
        return copy.deepcopy(fork)

    def add_tag(self, conversation_id: str, turn_index: int, tag: Tag) -> Turn:
        turn = self._conversation(conversation_id).add_tag(turn_index, copy.deepcopy(tag))
        return copy.deepcopy(turn)

    def remove_tag(self, conversation_id: str, turn_index: int, name: str) -> Turn:
        turn = self._conversation(conversation_id).remove_tag(turn_index, name)
        return copy.deepcopy(turn)

    def filter_conversations(
        self,
        source: str | None = None,
        tag_names: Iterable[str] | None = None,
        polarity: str | None = None,
    ) -> list[Conversation]:
        """Conversations matching ALL provided criteria, in stable id order.

        The tag criterion matches when any turn carries any named tag with the
        requested polarity; omitted criteria are no-ops.
        """
        names = set(tag_names) if tag_names is not None else None
        matched = []
        for cid in sorted(self.conversations):
            conv = self.conversations[cid]
            if source is not None and conv.source != source:
                continue
            if names is not None or polarity is not None:
                if not any(
                    (names is None or tag.name in names)
                    and (polarity is None or tag.polarity == polarity)
                    for turn in conv.turns
                    for tag in turn.tags
                ):
                    continue
            matched.append(copy.deepcopy(conv))
        return matched

    # --- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tasks": {tid: t.to_dict() for tid, t in sorted(self.tasks.items())},
            "templates": {tid: t.to_dict() for tid, t in sorted(self.templates.items())},
            "conversations": {
                cid: c.to_dict() for cid, c in sorted(self.conversations.items())
            },
        }

    @classmethod
    def from_dict(cls, data: Any) -> "Store":
        if not isinstance(data, dict):
            raise StoreIOError("store: expected a JSON object at top level")
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaVersionError(
                f"store schema_version {version!r} unsupported; this build reads version {SCHEMA_VERSION}"
            )
        store = cls()
        for section in ("tasks", "templates", "conversations"):
            if not isinstance(data.get(section), dict):
                raise StoreIOError(f"store: missing or invalid '{section}' map")
        for tid, raw in data["tasks"].items():
            task = Task.from_dict(raw, f"tasks[{tid}]")
            if task.id != tid:
                raise StoreIOError(f"tasks[{tid}]: object id {task.id!r} disagrees with key")
            store.tasks[tid] = task
        for tid, raw in data["templates"].items():
            try:
                template = ChatbotTemplate.from_dict(raw)
            except ValueError as exc:
                raise StoreIOError(f"templates[{tid}]: {exc}") from exc
            if template.id != tid:
                raise StoreIOError(
                    f"templates[{tid}]: object id {template.id!r} disagrees with key"
                )
            store.templates[tid] = template
        for cid, raw in data["conversations"].items():
            conv = Conversation.from_dict(raw, f"conversations[{cid}]")
            if conv.id != cid:
                raise StoreIOError(
                    f"conversations[{cid}]: object id {conv.id!r} disagrees with key"
                )
            store.conversations[cid] = conv
        store.check_integrity()
        return store

    def check_integrity(self) -> None:
        """Verify referential integrity and fork-prefix identity for every
        stored conversation."""
        for cid, conv in self.conversations.items():
            if conv.task_id not in self.tasks:
                raise ReferentialIntegrityError(
                    f"conversation {cid}: dangling task_id {conv.task_id!r}"
                )
            if conv.template_id not in self.templates:
                raise ReferentialIntegrityError(
                    f"conversation {cid}: dangling template_id {conv.template_id!r}"
                )
            if conv.parent is None:
                continue
            parent = self.conversations.get(conv.parent.conversation_id)
            if parent is None:
                raise ReferentialIntegrityError(
                    f"conversation {cid}: dangling parent {conv.parent.conversation_id!r}"
                )
            k = conv.parent.fork_turn_index
            if not 0 <= k < len(parent.turns):
                raise ReferentialIntegrityError(
                    f"conversation {cid}: fork_turn_index {k} out of range for parent "
                    f"{parent.id} with {len(parent.turns)} turns"
                )
            if len(conv.turns) < k + 1:
                raise ReferentialIntegrityError(
                    f"conversation {cid}: has fewer turns than its fork prefix length {k + 1}"
                )
            for i in range(k + 1):
                ours, theirs = conv.turns[i], parent.turns[i]
                if ours.role != theirs.role or ours.text != theirs.text:
                    raise ReferentialIntegrityError(
                        f"conversation {cid}: fork prefix diverges from parent at turn {i}"
                    )


def store_path(directory: str | Path) -> Path:
    return Path(directory) / STORE_FILENAME


def reports_dir(directory: str | Path) -> Path:
    return Path(directory) / REPORTS_DIRNAME


def dump_store_json(store: Store) -> str:
    return json.dumps(store.to_dict(), ensure_ascii=False, indent=2) + "\n"


def persist_store(store: Store, directory: str | Path) -> Path:
    """Write `store.json` into the directory (created if needed). The write is
    atomic: temp file then rename."""
    path = store_path(directory)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(dump_store_json(store), encoding="utf-8")
        tmp.replace(path)
    except OSError as exc:
        raise StoreIOError(f"cannot write store to {path}: {exc}") from exc
    return path


def load_store(directory: str | Path) -> Store:
    path = store_path(directory)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StoreIOError(f"cannot read store at {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except ValueError as exc:
        raise StoreIOError(f"{path} is not valid JSON: {exc}") from exc
    return Store.from_dict(data)
