"""Completion backends: a deterministic scripted mock and an OpenAI-compatible
remote endpoint, behind one `complete(prompt, params)` interface.

At temperature 0 the most likely next token is always selected, so mock-backed
runs are byte-deterministic; remote backends may still vary and are never used
by the acceptance suite.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol

import httpx

from .errors import (
    AuthError,
    BackendUnavailableError,
    NoMatchingRuleError,
    ProtocolError,
    RateLimitedError,
)

MATCH_MODES = ("exact", "substring")

# Returned by a non-strict mock when no rule matches; survives extraction so
# interactive sessions keep flowing instead of erroring out.
UNSCRIPTED_RESPONSE = "(no scripted response)"

ENV_BASE_URL = "LM_BASE_URL"
ENV_API_KEY = "LM_API_KEY"
ENV_MODEL = "LM_MODEL"


@dataclass
class GenerationParams:
    """Sampling configuration passed through to the backend.

    temperature stays in [0, 2]; the default 0 keeps replays deterministic.
    stop mirrors the owning template's stop markers.
    """

    model: str = ""
    temperature: float = 0.0
    max_tokens: int = 256
    stop: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "stop": list(self.stop),
        }

    @classmethod
    def from_dict(cls, data: Any) -> "GenerationParams":
        if not isinstance(data, dict):
            raise ValueError("generation params must be an object")
        stop = data.get("stop", [])
        if not isinstance(stop, list):
            raise ValueError("generation.stop must be a list of strings")
        return cls(
            model=str(data.get("model", "")),
            temperature=float(data.get("temperature", 0.0)),
            max_tokens=int(data.get("max_tokens", 256)),
            stop=[str(s) for s in stop],
        )


class CompletionBackend(Protocol):
    def complete(self, prompt: str, params: GenerationParams) -> str:
        """Return the raw completion text for a prompt."""
        ...


@dataclass
class MockRule:
    match: str  # "exact" or "substring"
    pattern: str
    response: str

    def matches(self, prompt: str) -> bool:
        if self.match == "exact":
            return prompt == self.pattern
        return self.pattern in prompt

    def to_dict(self) -> dict:
        return {"match": self.match, "pattern": self.pattern, "response": self.response}


@dataclass
class MockScript:
    """Ordered response rules; the first matching rule wins."""

    rules: list[MockRule] = field(default_factory=list)
    strict: bool = True

    def validate(self) -> None:
        for i, rule in enumerate(self.rules):
            if rule.match not in MATCH_MODES:
                raise ValueError(f"rule {i}: match must be one of {MATCH_MODES}")
            if not rule.pattern:
                raise ValueError(f"rule {i}: pattern must be nonempty")

    def to_dict(self) -> dict:
        return {"strict": self.strict, "rules": [r.to_dict() for r in self.rules]}

    @classmethod
    def from_dict(cls, data: Any) -> "MockScript":
        if not isinstance(data, dict):
            raise ValueError("mock script must be an object")
        raw_rules = data.get("rules", [])
        if not isinstance(raw_rules, list):
            raise ValueError("mock script 'rules' must be a list")
        rules = []
        for i, raw in enumerate(raw_rules):
            if not isinstance(raw, dict):
                raise ValueError(f"rule {i}: expected an object")
            rules.append(
                MockRule(
                    match=str(raw.get("match", "substring")),
                    pattern=str(raw.get("pattern", "")),
                    response=str(raw.get("response", "")),
                )
            )
        script = cls(rules=rules, strict=bool(data.get("strict", True)))
        script.validate()
        return script


def load_script(path: str | Path) -> MockScript:
    with open(path, encoding="utf-8") as fh:
        return MockScript.from_dict(json.load(fh))


class MockBackend:
    """Deterministic scripted backend for tests and offline work."""

    def __init__(self, script: MockScript):
        script.validate()
        self.script = script

    def complete(self, prompt: str, params: GenerationParams) -> str:
        for rule in self.script.rules:
            if rule.matches(prompt):
                return rule.response
        if self.script.strict:
            raise NoMatchingRuleError(
                f"no mock rule matches prompt of {len(prompt)} chars "
                f"(tail: {prompt[-80:]!r})"
            )
        return UNSCRIPTED_RESPONSE


class RemoteBackend:
    """OpenAI-compatible completions client. One POST per call, never retries;
    retry policy belongs to callers."""

    def __init__(
        self,
        base_url: str,
        api_key: str = "",
        model: str = "",
        client: httpx.Client | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.model = model  # fallback when params.model is empty
        self._client = client or httpx.Client(timeout=60.0)

    @classmethod
    def from_env(cls, client: httpx.Client | None = None) -> "RemoteBackend":
        base_url = os.environ.get(ENV_BASE_URL, "")
        if not base_url:
            raise BackendUnavailableError(f"{ENV_BASE_URL} is not set")
        return cls(
            base_url=base_url,
            api_key=os.environ.get(ENV_API_KEY, ""),
            model=os.environ.get(ENV_MODEL, ""),
            client=client,
        )

    def complete(self, prompt: str, params: GenerationParams) -> str:
        body = {
            "model": params.model or self.model,
            "prompt": prompt,
            "max_tokens": params.max_tokens,
            "temperature": params.temperature,
            "stop": params.stop if params.stop else None,
        }
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = self._client.post(
                f"{self.base_url}/v1/completions", json=body, headers=headers
            )
        except httpx.HTTPError as exc:
            raise BackendUnavailableError(f"completions request failed: {exc}") from exc
        if response.status_code == 401:
            raise AuthError("completions endpoint rejected credentials (401)")
        if response.status_code == 429:
            raise RateLimitedError("completions endpoint rate limited the request (429)")
        if response.status_code >= 500:
            raise BackendUnavailableError(
                f"completions endpoint returned {response.status_code}"
            )
        if response.status_code != 200:
            raise ProtocolError(
                f"unexpected status {response.status_code}: {response.text[:200]}"
            )
        try:
            payload = response.json()
        except ValueError as exc:
            raise ProtocolError(f"response body is not JSON: {exc}") from exc
        choices = payload.get("choices") if isinstance(payload, dict) else None
        if not isinstance(choices, list) or not choices:
            raise ProtocolError("response has no choices")
        first = choices[0]
        if not isinstance(first, dict) or not isinstance(first.get("text"), str):
            raise ProtocolError("first choice has no text field")
        return first["text"]


def backend_from_spec(spec: str) -> CompletionBackend:
    """Build a backend from a CLI/service spec string: `mock:<script path>` or `remote`."""
    if spec == "remote":
        return RemoteBackend.from_env()
    if spec.startswith("mock:"):
        path = spec[len("mock:"):]
        if not path:
            raise ValueError("mock backend spec needs a script path: mock:<path>")
        return MockBackend(load_script(path))
    raise ValueError(f"unknown LM backend spec {spec!r}; use mock:<script> or remote")
