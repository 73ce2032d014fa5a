"""Exception hierarchy shared across the workbench.

Every domain error derives from BotBenchError so callers (HTTP layer, CLI)
can map failures to status codes / exit codes without chasing stdlib types.
"""

from __future__ import annotations


class BotBenchError(Exception):
    """Base class for all workbench errors."""


# --- store / domain model ---------------------------------------------------


class UnknownTaskError(BotBenchError):
    """Referenced task id does not exist in the store."""


class UnknownTemplateError(BotBenchError):
    """Referenced template id does not exist in the store."""


class UnknownConversationError(BotBenchError):
    """Referenced conversation id does not exist in the store."""


class DuplicateIdError(BotBenchError):
    """An entity with this id is already stored."""


class RoleAlternationError(BotBenchError):
    """Appending a turn whose role matches the previous turn's role."""


class EmptyTextError(BotBenchError):
    """Turn text must be nonempty."""


class TurnIndexError(BotBenchError):
    """Turn index is outside the conversation's turn range."""


class DuplicateTagError(BotBenchError):
    """The turn already carries a tag with this name."""


class InvalidTagNameError(BotBenchError):
    """Tag names are single tokens: nonempty, no whitespace."""


class TagNotFoundError(BotBenchError):
    """No tag with this name on the addressed turn."""


class UnknownReportError(BotBenchError):
    """Referenced regression report id has no persisted file."""


class StoreIOError(BotBenchError):
    """Store file could not be read, parsed, or written."""


class SchemaVersionError(BotBenchError):
    """Store file declares an unsupported schema version."""


class ReferentialIntegrityError(BotBenchError):
    """Store contains a dangling task/template/parent reference or a broken fork prefix."""


# --- template engine --------------------------------------------------------


class InvalidTemplateError(BotBenchError):
    """Template violates its invariants (see validate_template for the list)."""


class EmptyUtteranceError(BotBenchError):
    """Extraction produced an empty utterance."""


# --- LM gateway -------------------------------------------------------------


class BackendUnavailableError(BotBenchError):
    """Completion backend unreachable or failing (network error / 5xx)."""


class AuthError(BotBenchError):
    """Completion backend rejected the credentials (HTTP 401)."""


class RateLimitedError(BotBenchError):
    """Completion backend rate limit hit (HTTP 429)."""


class NoMatchingRuleError(BotBenchError):
    """Strict mock script has no rule matching the prompt."""


class ProtocolError(BotBenchError):
    """Completion backend returned a malformed or unexpected response body."""


# --- conversation graph -----------------------------------------------------


class IrreducibleCycleError(BotBenchError):
    """A cycle contains no multi-member node to split (defensive; unreachable
    when same-conversation turns are never merged)."""


# --- orchestration ----------------------------------------------------------


class RoleOrderError(BotBenchError):
    """Bot reply requested while the conversation's last turn is already a bot turn."""
