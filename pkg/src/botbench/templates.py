"""Chatbot templates: build the full LM prompt from task + dialogue history,
and pull the bot's utterance back out of a raw completion.

A template bundles the prompt preamble (with a single `{task_text}` slot), the
task-to-text formatting rules, per-turn prefixes, generation parameters, and
extraction stop markers. Rendering is byte-deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import EmptyUtteranceError, InvalidTemplateError
from .llm import GenerationParams
from .model import Task, Turn

TASK_PLACEHOLDER = "{task_text}"
STEP_PLACEHOLDER = "{n}"


@dataclass
class TaskFormat:
    include_name: bool = False
    include_description: bool = False
    include_items: bool = False
    step_prefix_pattern: str = "{n}. "

    def to_dict(self) -> dict:
        return {
            "include_name": self.include_name,
            "include_description": self.include_description,
            "include_items": self.include_items,
            "step_prefix_pattern": self.step_prefix_pattern,
        }

    @classmethod
    def from_dict(cls, data: Any) -> "TaskFormat":
        if not isinstance(data, dict):
            raise ValueError("task_format must be an object")
        return cls(
            include_name=bool(data.get("include_name", False)),
            include_description=bool(data.get("include_description", False)),
            include_items=bool(data.get("include_items", False)),
            step_prefix_pattern=str(data.get("step_prefix_pattern", "{n}. ")),
        )


@dataclass
class TurnFormat:
    user_prefix: str = "User: "
    bot_prefix: str = "Bot: "
    separator: str = "\n"

    def prefix_for(self, role: str) -> str:
        return self.user_prefix if role == "user" else self.bot_prefix

    def to_dict(self) -> dict:
        return {
            "user_prefix": self.user_prefix,
            "bot_prefix": self.bot_prefix,
            "separator": self.separator,
        }

    @classmethod
    def from_dict(cls, data: Any) -> "TurnFormat":
        if not isinstance(data, dict):
            raise ValueError("turn_format must be an object")
        return cls(
            user_prefix=str(data.get("user_prefix", "User: ")),
            bot_prefix=str(data.get("bot_prefix", "Bot: ")),
            separator=str(data.get("separator", "\n")),
        )


@dataclass
class ExtractionRules:
    stop_markers: list[str] = field(default_factory=lambda: ["\nUser:"])
    trim_whitespace: bool = True

    def to_dict(self) -> dict:
        return {
            "stop_markers": list(self.stop_markers),
            "trim_whitespace": self.trim_whitespace,
        }

    @classmethod
    def from_dict(cls, data: Any) -> "ExtractionRules":
        if not isinstance(data, dict):
            raise ValueError("extraction must be an object")
        markers = data.get("stop_markers", [])
        if not isinstance(markers, list):
            raise ValueError("extraction.stop_markers must be a list")
        return cls(
            stop_markers=[str(m) for m in markers],
            trim_whitespace=bool(data.get("trim_whitespace", True)),
        )


@dataclass
class ChatbotTemplate:
    """One point design for the chatbot: how prompts are built and parsed."""

    id: str
    name: str
    preamble_template: str
    task_format: TaskFormat = field(default_factory=TaskFormat)
    turn_format: TurnFormat = field(default_factory=TurnFormat)
    generation: GenerationParams = field(default_factory=GenerationParams)
    extraction: ExtractionRules = field(default_factory=ExtractionRules)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "preamble_template": self.preamble_template,
            "task_format": self.task_format.to_dict(),
            "turn_format": self.turn_format.to_dict(),
            "generation": self.generation.to_dict(),
            "extraction": self.extraction.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Any) -> "ChatbotTemplate":
        if not isinstance(data, dict):
            raise ValueError("template must be an object")
        if "id" not in data or not isinstance(data["id"], str) or not data["id"]:
            raise ValueError("template must carry a nonempty string id")
        return cls(
            id=data["id"],
            name=str(data.get("name", data["id"])),
            preamble_template=str(data.get("preamble_template", "")),
            task_format=TaskFormat.from_dict(data.get("task_format", {})),
            turn_format=TurnFormat.from_dict(data.get("turn_format", {})),
            generation=GenerationParams.from_dict(data.get("generation", {})),
            extraction=ExtractionRules.from_dict(data.get("extraction", {})),
        )


def load_template(path: str | Path) -> ChatbotTemplate:
    with open(path, encoding="utf-8") as fh:
        return ChatbotTemplate.from_dict(json.load(fh))


@dataclass
class Violation:
    """One broken template rule; field names which part of the template."""

    field: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule} ({self.message})"


def render_task_text(task: Task, fmt: TaskFormat) -> str:
    """Flatten a structured task to plain text.

    Lines, in order: name (optional), description (optional), items (optional,
    "Items: a, b"), then one line per step: prefix with `{n}` replaced by the
    1-based step number, the title, ". ", and the details.
    """
    lines: list[str] = []
    if fmt.include_name:
        lines.append(task.name)
    if fmt.include_description:
        lines.append(task.description)
    if fmt.include_items:
        lines.append("Items: " + ", ".join(task.items))
    for n, step in enumerate(task.steps, start=1):
        prefix = fmt.step_prefix_pattern.replace(STEP_PLACEHOLDER, str(n))
        lines.append(f"{prefix}{step.title}. {step.details}")
    return "\n".join(lines)


def render_prompt(template: ChatbotTemplate, task: Task, turns: list[Turn]) -> str:
    """Assemble the full prompt: preamble, then each turn as
    separator + role prefix + text, then the trailing generation cue
    (separator + bot prefix)."""
    if template.preamble_template.count(TASK_PLACEHOLDER) != 1:
        raise InvalidTemplateError(
            f"template {template.id}: preamble must contain {TASK_PLACEHOLDER} exactly once"
        )
    tf = template.turn_format
    parts = [
        template.preamble_template.replace(
            TASK_PLACEHOLDER, render_task_text(task, template.task_format)
        )
    ]
    for turn in turns:
        parts.append(f"{tf.separator}{tf.prefix_for(turn.role)}{turn.text}")
    parts.append(f"{tf.separator}{tf.bot_prefix}")
    return "".join(parts)


def extract_utterance(template: ChatbotTemplate, completion: str) -> str:
    """Truncate the completion at the earliest stop marker, then optionally trim."""
    cut = len(completion)
    for marker in template.extraction.stop_markers:
        if not marker:
            continue
        pos = completion.find(marker)
        if pos != -1:
            cut = min(cut, pos)
    utterance = completion[:cut]
    if template.extraction.trim_whitespace:
        utterance = utterance.strip()
    if not utterance:
        raise EmptyUtteranceError("extraction yielded an empty utterance")
    return utterance


def validate_template(template: ChatbotTemplate) -> list[Violation]:
    """Check every template invariant; empty list means the template is usable.

    Covers the placeholder rules, prefix collision, separator and stop-marker
    presence, and the nested generation parameter bounds.
    """
    violations: list[Violation] = []
    count = template.preamble_template.count(TASK_PLACEHOLDER)
    if count == 0:
        violations.append(
            Violation(
                "preamble_template",
                "MissingTaskPlaceholder",
                f"preamble must contain {TASK_PLACEHOLDER}",
            )
        )
    elif count > 1:
        violations.append(
            Violation(
                "preamble_template",
                "MultipleTaskPlaceholders",
                f"preamble contains {TASK_PLACEHOLDER} {count} times; exactly one allowed",
            )
        )
    if STEP_PLACEHOLDER not in template.task_format.step_prefix_pattern:
        violations.append(
            Violation(
                "task_format.step_prefix_pattern",
                "MissingStepNumberPlaceholder",
                f"step prefix must contain {STEP_PLACEHOLDER}",
            )
        )
    if template.turn_format.user_prefix == template.turn_format.bot_prefix:
        violations.append(
            Violation(
                "turn_format",
                "PrefixCollision",
                "user_prefix and bot_prefix must differ",
            )
        )
    if not template.turn_format.separator:
        violations.append(
            Violation("turn_format.separator", "EmptySeparator", "separator must be nonempty")
        )
    if not template.extraction.stop_markers:
        violations.append(
            Violation(
                "extraction.stop_markers",
                "NoStopMarkers",
                "at least one stop marker required",
            )
        )
    elif any(not m for m in template.extraction.stop_markers):
        violations.append(
            Violation(
                "extraction.stop_markers",
                "EmptyStopMarker",
                "stop markers must be nonempty",
            )
        )
    if template.generation.temperature < 0:
        violations.append(
            Violation(
                "generation.temperature",
                "NegativeTemperature",
                "temperature must be >= 0",
            )
        )
    if template.generation.max_tokens < 1:
        violations.append(
            Violation(
                "generation.max_tokens",
                "NonPositiveMaxTokens",
                "max_tokens must be >= 1",
            )
        )
    return violations
