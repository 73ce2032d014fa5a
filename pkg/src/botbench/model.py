"""Domain types: tasks, turns, tags, conversations.

All types serialize to the snake_case JSON shapes used by the on-disk store
and the HTTP API. Deserialization is strict about structure (missing keys,
wrong types) and raises StoreIOError with the offending location.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from typing import Any

from .errors import (
    DuplicateTagError,
    EmptyTextError,
    InvalidTagNameError,
    RoleAlternationError,
    StoreIOError,
    TagNotFoundError,
    TurnIndexError,
)

ROLES = ("user", "bot")
POLARITIES = ("error", "success")
SOURCES = ("web", "cli", "import")


def new_id() -> str:
    """Random 128-bit hex id; opaque to callers."""
    return uuid.uuid4().hex


def _require(data: Any, key: str, where: str) -> Any:
    if not isinstance(data, dict):
        raise StoreIOError(f"{where}: expected an object, got {type(data).__name__}")
    if key not in data:
        raise StoreIOError(f"{where}: missing key '{key}'")
    return data[key]


def _require_str(data: Any, key: str, where: str) -> str:
    value = _require(data, key, where)
    if not isinstance(value, str):
        raise StoreIOError(f"{where}.{key}: expected string, got {type(value).__name__}")
    return value


def _require_int(data: Any, key: str, where: str) -> int:
    value = _require(data, key, where)
    if not isinstance(value, int) or isinstance(value, bool):
        raise StoreIOError(f"{where}.{key}: expected integer, got {type(value).__name__}")
    return value


def _require_list(data: Any, key: str, where: str) -> list:
    value = _require(data, key, where)
    if not isinstance(value, list):
        raise StoreIOError(f"{where}.{key}: expected list, got {type(value).__name__}")
    return value


def check_role(role: str) -> str:
    if role not in ROLES:
        raise ValueError(f"role must be one of {ROLES}, got {role!r}")
    return role


def check_polarity(polarity: str) -> str:
    if polarity not in POLARITIES:
        raise ValueError(f"polarity must be one of {POLARITIES}, got {polarity!r}")
    return polarity


def check_source(source: str) -> str:
    if source not in SOURCES:
        raise ValueError(f"source must be one of {SOURCES}, got {source!r}")
    return source


def check_tag_name(name: str) -> str:
    """Tag names are single tokens: nonempty, no whitespace characters."""
    if not name or any(ch.isspace() for ch in name):
        raise InvalidTagNameError(
            f"tag name must be a nonempty single token without whitespace, got {name!r}"
        )
    return name


@dataclass
class Step:
    title: str
    details: str

    def to_dict(self) -> dict:
        return {"title": self.title, "details": self.details}

    @classmethod
    def from_dict(cls, data: Any, where: str = "step") -> "Step":
        return cls(
            title=_require_str(data, "title", where),
            details=_require_str(data, "details", where),
        )


@dataclass
class Task:
    """Structured instructional content the chatbot walks a user through.

    Invariants: nonempty id, nonempty steps, nonempty step titles.
    """

    id: str
    name: str
    description: str
    items: list[str] = field(default_factory=list)
    steps: list[Step] = field(default_factory=list)

    def validate(self) -> None:
        if not self.id:
            raise ValueError("task id must be nonempty")
        if not self.steps:
            raise ValueError(f"task {self.id!r} must have at least one step")
        for i, step in enumerate(self.steps):
            if not step.title:
                raise ValueError(f"task {self.id!r} step {i} has an empty title")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "items": list(self.items),
            "steps": [s.to_dict() for s in self.steps],
        }

    @classmethod
    def from_dict(cls, data: Any, where: str = "task") -> "Task":
        items = _require_list(data, "items", where)
        steps = _require_list(data, "steps", where)
        task = cls(
            id=_require_str(data, "id", where),
            name=_require_str(data, "name", where),
            description=_require_str(data, "description", where),
            items=[str(x) for x in items],
            steps=[Step.from_dict(s, f"{where}.steps[{i}]") for i, s in enumerate(steps)],
        )
        return task


@dataclass
class Tag:
    """Single-word annotation on a turn; polarity marks errors vs. strong replies."""

    name: str
    polarity: str = "error"
    note: str | None = None

    def to_dict(self) -> dict:
        return {"name": self.name, "polarity": self.polarity, "note": self.note}

    @classmethod
    def from_dict(cls, data: Any, where: str = "tag") -> "Tag":
        note = data.get("note") if isinstance(data, dict) else None
        if note is not None and not isinstance(note, str):
            raise StoreIOError(f"{where}.note: expected string or null")
        tag = cls(
            name=_require_str(data, "name", where),
            polarity=_require_str(data, "polarity", where),
            note=note,
        )
        check_polarity(tag.polarity)
        return tag


@dataclass
class Turn:
    """One utterance by one party. Index equals position in the conversation."""

    index: int
    role: str
    text: str
    tags: list[Tag] = field(default_factory=list)

    def tag_names(self) -> list[str]:
        return [t.name for t in self.tags]

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "role": self.role,
            "text": self.text,
            "tags": [t.to_dict() for t in self.tags],
        }

    @classmethod
    def from_dict(cls, data: Any, where: str = "turn") -> "Turn":
        tags = _require_list(data, "tags", where)
        turn = cls(
            index=_require_int(data, "index", where),
            role=_require_str(data, "role", where),
            text=_require_str(data, "text", where),
            tags=[Tag.from_dict(t, f"{where}.tags[{i}]") for i, t in enumerate(tags)],
        )
        check_role(turn.role)
        return turn


@dataclass
class ForkRef:
    """Lineage pointer: this conversation copies its parent's turns 0..fork_turn_index."""

    conversation_id: str
    fork_turn_index: int

    def to_dict(self) -> dict:
        return {
            "conversation_id": self.conversation_id,
            "fork_turn_index": self.fork_turn_index,
        }

    @classmethod
    def from_dict(cls, data: Any, where: str = "parent") -> "ForkRef":
        return cls(
            conversation_id=_require_str(data, "conversation_id", where),
            fork_turn_index=_require_int(data, "fork_turn_index", where),
        )


@dataclass
class Conversation:
    """Ordered user/bot turns bound to one task and one template.

    Turn roles strictly alternate (either party may open); indices are
    contiguous from 0. The append/tag helpers enforce those invariants so a
    conversation built through them is always well-formed.
    """

    id: str
    task_id: str
    template_id: str
    source: str = "web"
    parent: ForkRef | None = None
    turns: list[Turn] = field(default_factory=list)

    def append_turn(self, role: str, text: str) -> Turn:
        check_role(role)
        if not text:
            raise EmptyTextError("turn text must be nonempty")
        if self.turns and self.turns[-1].role == role:
            raise RoleAlternationError(
                f"conversation {self.id}: two consecutive {role!r} turns"
            )
        turn = Turn(index=len(self.turns), role=role, text=text)
        self.turns.append(turn)
        return turn

    def turn_at(self, index: int) -> Turn:
        if not 0 <= index < len(self.turns):
            raise TurnIndexError(
                f"conversation {self.id}: turn index {index} out of range "
                f"(have {len(self.turns)} turns)"
            )
        return self.turns[index]

    def add_tag(self, turn_index: int, tag: Tag) -> Turn:
        turn = self.turn_at(turn_index)
        check_tag_name(tag.name)
        check_polarity(tag.polarity)
        if tag.name in turn.tag_names():
            raise DuplicateTagError(
                f"conversation {self.id} turn {turn_index} already carries tag {tag.name!r}"
            )
        turn.tags.append(tag)
        return turn

    def remove_tag(self, turn_index: int, name: str) -> Turn:
        turn = self.turn_at(turn_index)
        for i, tag in enumerate(turn.tags):
            if tag.name == name:
                del turn.tags[i]
                return turn
        raise TagNotFoundError(
            f"conversation {self.id} turn {turn_index} has no tag {name!r}"
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "task_id": self.task_id,
            "template_id": self.template_id,
            "source": self.source,
            "parent": self.parent.to_dict() if self.parent else None,
            "turns": [t.to_dict() for t in self.turns],
        }

    @classmethod
    def from_dict(cls, data: Any, where: str = "conversation") -> "Conversation":
        parent_data = _require(data, "parent", where)
        parent = None if parent_data is None else ForkRef.from_dict(parent_data, f"{where}.parent")
        turns_data = _require_list(data, "turns", where)
        conv = cls(
            id=_require_str(data, "id", where),
            task_id=_require_str(data, "task_id", where),
            template_id=_require_str(data, "template_id", where),
            source=_require_str(data, "source", where),
            parent=parent,
            turns=[Turn.from_dict(t, f"{where}.turns[{i}]") for i, t in enumerate(turns_data)],
        )
        check_source(conv.source)
        for i, turn in enumerate(conv.turns):
            if turn.index != i:
                raise StoreIOError(
                    f"{where}.turns[{i}]: index {turn.index} not contiguous from 0"
                )
            if i > 0 and turn.role == conv.turns[i - 1].role:
                raise StoreIOError(
                    f"{where}.turns[{i}]: role {turn.role!r} repeats the previous turn's role"
                )
        return conv
