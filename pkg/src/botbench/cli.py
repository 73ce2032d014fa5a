"""Headless driver: serve the API, chat in the terminal, export graphs, run
regressions, and move stores around.

Exit codes: 0 success; 1 invalid input or any delegated error; `test`
additionally exits 2 when the run completed but some case hit a backend error
(so CI can distinguish broken setup from flaky replays).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import BotBenchError
from .fixtures import write_fixture_files
from .graph import build_dag, export_dag
from .llm import backend_from_spec
from .regression import run_regression
from .service import ServiceConfig, Workbench, serve
from .store import (
    Store,
    dump_store_json,
    load_store,
    persist_store,
    reports_dir,
    store_path,
)
from .templates import load_template, validate_template

UNTAGGED_DISPLAY = "(untagged)"


def _fail(message: str) -> int:
    print(f"botbench: {message}", file=sys.stderr)
    return 1


def _require_lm(args) -> str:
    if not args.lm:
        raise BotBenchError("this command needs --lm mock:<script> or --lm remote")
    return args.lm


def _write_bytes(payload: bytes, out: str | None) -> None:
    if out and out != "-":
        Path(out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)


def cmd_serve(args) -> int:
    config = ServiceConfig(store_path=args.store, lm_backend=_require_lm(args), port=args.port)
    serve(config)
    return 0


def cmd_chat(args) -> int:
    bench = Workbench(args.store, backend_from_spec(_require_lm(args)))
    conversation = bench.mutate(
        lambda s: s.create_conversation(args.task, args.template, source="cli")
    )
    print(f"conversation {conversation.id} (Ctrl-D to finish)", file=sys.stderr)
    for line in sys.stdin:
        text = line.rstrip("\n")
        if not text:
            continue
        _, bot_turn = bench.submit_user_turn(conversation.id, text)
        print(bot_turn.text)
        sys.stdout.flush()
    return 0


def cmd_graph(args) -> int:
    store = load_store(args.store)
    conversations = store.filter_conversations(
        source=args.source, tag_names={args.tag} if args.tag else None
    )
    _write_bytes(export_dag(build_dag(conversations), format=args.format), args.out)
    return 0


def cmd_test(args) -> int:
    store = load_store(args.store)
    template = load_template(args.template)
    violations = validate_template(template)
    if violations:
        for violation in violations:
            print(f"invalid template: {violation}", file=sys.stderr)
        return 1
    backend = backend_from_spec(_require_lm(args))
    report = run_regression(
        store,
        template,
        backend,
        tag_names={args.tag} if args.tag else None,
        source=args.source,
        polarity=args.polarity,
        mode=args.mode,
        reports_dir=reports_dir(args.store),
    )
    Path(args.out).write_text(report.to_json(), encoding="utf-8")
    for group in report.groups:
        changed = sum(r.changed for r in group.results)
        name = group.tag or UNTAGGED_DISPLAY
        print(f"{name}: {changed}/{len(group.results)} changed")
    return 2 if report.any_errors() else 0


def cmd_export(args) -> int:
    store = load_store(args.store)
    payload = dump_store_json(store).encode("utf-8")
    _write_bytes(payload, args.path)
    return 0


def cmd_import(args) -> int:
    if args.path == "-":
        data = json.load(sys.stdin)
    else:
        with open(args.path, encoding="utf-8") as fh:
            data = json.load(fh)
    store = Store.from_dict(data)
    if store_path(args.store).exists() and not args.force:
        return _fail(f"{store_path(args.store)} already exists (use --force to overwrite)")
    persist_store(store, args.store)
    print(
        f"imported {len(store.tasks)} tasks, {len(store.templates)} templates, "
        f"{len(store.conversations)} conversations into {args.store}"
    )
    return 0


def cmd_fixture(args) -> int:
    if store_path(args.store).exists() and not args.force:
        return _fail(f"{store_path(args.store)} already exists (use --force to overwrite)")
    paths = write_fixture_files(args.store)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="botbench",
        description="Collect, annotate, visualize, and regression-test chatbot conversations.",
    )
    parser.add_argument("--store", required=True, help="store directory (holds store.json)")
    parser.add_argument(
        "--lm",
        default=None,
        help="completion backend: mock:<script.json> or remote "
        "(remote reads LM_BASE_URL / LM_API_KEY / LM_MODEL)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP API (and UI, if built)")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("chat", help="chat on stdin/stdout; persists the conversation")
    p.add_argument("--task", required=True, help="task id")
    p.add_argument("--template", required=True, help="template id")
    p.set_defaults(fn=cmd_chat)

    p = sub.add_parser("graph", help="export the merged conversation graph")
    p.add_argument("--tag", default=None)
    p.add_argument("--source", default=None, choices=["web", "cli", "import"])
    p.add_argument("--format", default="json", choices=["json", "dot"])
    p.add_argument("--out", default="-", help="output path, - for stdout")
    p.set_defaults(fn=cmd_graph)

    p = sub.add_parser("test", help="replay tagged utterances under a candidate template")
    p.add_argument("--template", required=True, help="path to a template JSON file")
    p.add_argument("--tag", default=None)
    p.add_argument("--source", default=None, choices=["web", "cli", "import"])
    p.add_argument("--polarity", default=None, choices=["error", "success"])
    p.add_argument("--mode", default="individual", choices=["individual", "total"])
    p.add_argument("--out", required=True, help="where to write the report JSON")
    p.set_defaults(fn=cmd_test)

    p = sub.add_parser("export", help="write the store as a single JSON file")
    p.add_argument("path", help="output path, - for stdout")
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("import", help="load a store JSON file into the store directory")
    p.add_argument("path", help="input path, - for stdin")
    p.add_argument("--force", action="store_true")
    p.set_defaults(fn=cmd_import)

    p = sub.add_parser("fixture", help="materialize the ExerciseBot demo fixture")
    p.add_argument("--force", action="store_true")
    p.set_defaults(fn=cmd_fixture)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BotBenchError as exc:
        return _fail(str(exc))
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    raise SystemExit(main())
