"""botbench: collect, annotate, visualize, and regression-test LM chatbot
conversations across prompt templates."""

__version__ = "0.1.0"

from .graph import ConversationDag, build_dag, decycle, export_dag, merge_key
from .llm import GenerationParams, MockBackend, MockScript, RemoteBackend
from .model import Conversation, Step, Tag, Task, Turn
from .regression import RegressionReport, collect_cases, run_regression, utterance_changed
from .store import Store, load_store, persist_store
from .templates import (
    ChatbotTemplate,
    extract_utterance,
    render_prompt,
    render_task_text,
    validate_template,
)

__all__ = [
    "ChatbotTemplate",
    "Conversation",
    "ConversationDag",
    "GenerationParams",
    "MockBackend",
    "MockScript",
    "RegressionReport",
    "RemoteBackend",
    "Step",
    "Store",
    "Tag",
    "Task",
    "Turn",
    "build_dag",
    "collect_cases",
    "decycle",
    "export_dag",
    "extract_utterance",
    "load_store",
    "merge_key",
    "persist_store",
    "render_prompt",
    "render_task_text",
    "run_regression",
    "utterance_changed",
    "validate_template",
]
