"""Terminal REPL for playing and debugging a world.

Fully usable without the web client: non-meta input runs a turn and prints
the narration plus a compact notice for every rejected change, so the gap
between what the model predicted and what the engine accepted stays
visible. Meta commands (/state, /debug, ...) inspect and manage the session.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import generation
from .gateway import (
    BackendConfig,
    ConfigError,
    EmptyInputError,
    GenerationError,
    default_fewshot,
    load_fewshot,
    make_backend,
)
from .render import render_state
from .session import (
    Session,
    SessionBusyError,
    SessionFileError,
    TranscriptWriter,
    TurnError,
    load_session,
    save_session,
)
from .world import UnknownComponentError, WorldFileError, asymmetry_warnings, load_world

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_USAGE = 2

META_HELP = """\
/state            show the rendered world state
/debug            show the last turn report (parsed/applied/rejected)
/genitem [brief]  generate one item in the current location
/save <file>      save the session
/load <file>      load a session (restarts the script for scripted backends)
/quit             leave the game"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fabular",
        description="Grounded interactive storytelling: play a world from your terminal.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    play = sub.add_parser("play", help="start an interactive session on a world file")
    play.add_argument("--world", required=True, help="world file (JSON)")
    play.add_argument(
        "--backend",
        choices=["scripted", "http"],
        default=None,
        help="text-generation backend (default: from --config, else scripted)",
    )
    play.add_argument("--script", help="canned-responses file for the scripted backend (JSON)")
    play.add_argument("--config", help="backend config file (JSON, keys as documented)")
    play.add_argument("--transcript", help="append one JSON line per turn to this file")
    play.add_argument("--seed", type=int, default=None, help="seed for session-id generation")
    play.add_argument("--fewshot", help="custom few-shot example file")
    play.add_argument(
        "--quiet-rejections",
        action="store_true",
        help="do not print rejected-change notices after each turn",
    )
    return parser


def load_script_file(path: str) -> dict:
    with open(path, encoding="utf-8") as handle:
        script = json.load(handle)
    if not isinstance(script, dict) or not all(
        isinstance(v, list) and all(isinstance(x, str) for x in v) for v in script.values()
    ):
        raise ConfigError(f"script file {path} must map prompt kinds to lists of strings")
    return script


def _load_config(args) -> BackendConfig:
    data: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as handle:
            data = json.load(handle)
        if not isinstance(data, dict):
            raise ConfigError(f"config file {args.config} must be a JSON object")
    if args.backend:
        data["kind"] = args.backend
    data.setdefault("kind", "scripted")
    return BackendConfig.from_dict(data)


def _print_rejections(report, quiet: bool) -> None:
    if quiet:
        return
    for rejection in report.rejections:
        print(f"rejected: {rejection.line} ({rejection.reason.value}: {rejection.detail})")


def _run_repl(session: Session, script: dict | None, args) -> int:
    transcript = TranscriptWriter(args.transcript) if args.transcript else None
    try:
        while True:
            try:
                line = input("> ")
            except EOFError:
                return EXIT_OK
            line = line.strip()
            if not line:
                continue
            if line.startswith("/"):
                command, _, rest = line.partition(" ")
                rest = rest.strip()
                if command == "/quit":
                    return EXIT_OK
                if command == "/help":
                    print(META_HELP)
                elif command == "/state":
                    print(render_state(session.world, session.world.player).text)
                elif command == "/debug":
                    if session.last_report is None:
                        print("no turns yet")
                    else:
                        print(json.dumps(session.last_report.to_dict(), indent=2, ensure_ascii=False))
                elif command == "/genitem":
                    _genitem(session, rest)
                elif command == "/save":
                    if not rest:
                        print("usage: /save <file>")
                    else:
                        save_session(session, rest)
                        print(f"saved session to {rest}")
                elif command == "/load":
                    if not rest:
                        print("usage: /load <file>")
                    else:
                        try:
                            session = load_session(rest, script=script)
                            print(f"loaded session {session.session_id}")
                        except (SessionFileError, WorldFileError, ConfigError) as exc:
                            print(f"load failed: {exc}")
                else:
                    print(f"unknown command {command}; try /help")
                continue

            try:
                report = session.run_turn(line)
            except (TurnError, SessionBusyError, EmptyInputError) as exc:
                print(f"turn failed: {exc}")
                continue
            print(report.narration)
            _print_rejections(report, args.quiet_rejections)
            if transcript:
                transcript.append(report)
    finally:
        if transcript:
            transcript.close()


def _genitem(session: Session, brief: str) -> None:
    try:
        player = session.world.characters[session.world.player]
        location = session.world.locations[player.location].name
        item = generation.generate_item(session, location, brief)
    except (generation.ItemGenerationError, GenerationError, SessionBusyError) as exc:
        print(f"item generation failed: {exc}")
        return
    print(
        json.dumps(
            {
                "name": item.name,
                "descriptions": list(item.descriptions),
                "gettable": item.gettable,
            },
            ensure_ascii=False,
        )
    )


def cmd_play(args) -> int:
    try:
        world = load_world(args.world)
    except WorldFileError as exc:
        print(f"cannot load world: {exc}", file=sys.stderr)
        return EXIT_FATAL

    for warning in asymmetry_warnings(world):
        print(f"warning: {warning}", file=sys.stderr)

    try:
        config = _load_config(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"bad configuration: {exc}", file=sys.stderr)
        return EXIT_FATAL

    script = None
    if config.kind == "scripted":
        if not args.script:
            print("a scripted backend needs --script <file>", file=sys.stderr)
            return EXIT_USAGE
        try:
            script = load_script_file(args.script)
        except (ConfigError, OSError, json.JSONDecodeError) as exc:
            print(f"bad script file: {exc}", file=sys.stderr)
            return EXIT_FATAL

    try:
        backend = make_backend(config, script=script)
        fewshot = load_fewshot(args.fewshot) if args.fewshot else default_fewshot()
    except (ConfigError, OSError, ValueError) as exc:
        print(f"bad configuration: {exc}", file=sys.stderr)
        return EXIT_FATAL

    rng = random.Random(args.seed)
    session_id = f"{rng.getrandbits(48):012x}" if args.seed is not None else None
    session = Session(
        world=world,
        backend=backend,
        config=config,
        fewshot=fewshot,
        session_id=session_id,
        fewshot_ref=args.fewshot,
    )
    try:
        return _run_repl(session, script, args)
    except UnknownComponentError as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return EXIT_FATAL


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "play":
        return cmd_play(args)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
