"""HTTP facade over worlds and sessions.

A thin adapter: every endpoint delegates to the same engine calls the CLI
uses, and a turn response is byte-for-byte the transcript record the CLI
would have written. State is held in memory; an optional snapshot directory
persists sessions on shutdown. One turn per session at a time — concurrent
turn posts to the same session get a conflict status.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from contextlib import asynccontextmanager
from pathlib import Path

import uvicorn
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import generation
from .gateway import (
    BackendConfig,
    ConfigError,
    EmptyInputError,
    GenerationError,
    default_fewshot,
    make_backend,
)
from .render import render_state
from .session import Session, SessionBusyError, TurnError, save_session
from .world import (
    UnknownComponentError,
    World,
    WorldFileError,
    from_document,
    scope_of,
)


class SessionRequest(BaseModel):
    world_id: str
    backend: dict = {}
    script: dict[str, list[str]] | None = None


class TurnRequest(BaseModel):
    input: str


class GenerateItemRequest(BaseModel):
    location: str
    brief: str = ""


class Store:
    """In-memory registries for uploaded worlds and live sessions."""

    def __init__(self) -> None:
        self.worlds: dict[str, World] = {}
        self.sessions: dict[str, Session] = {}
        self._world_ids = itertools.count(1)
        self._session_ids = itertools.count(1)

    def add_world(self, world: World) -> str:
        world_id = f"w{next(self._world_ids)}"
        self.worlds[world_id] = world
        return world_id

    def add_session(self, session: Session) -> str:
        session_id = f"s{next(self._session_ids)}"
        session.session_id = session_id
        self.sessions[session_id] = session
        return session_id


def _error(status: int, code: str, detail: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "detail": detail, **extra}})


def _scope_view(world: World) -> dict:
    """Structured companion to the text rendering, for UIs that build panels."""
    scope = scope_of(world, world.player)
    location = world.locations[scope.location]

    def item_view(key: str) -> dict:
        item = world.items[key]
        return {
            "name": item.name,
            "descriptions": list(item.descriptions),
            "gettable": item.gettable,
        }

    exits = [
        {"name": world.locations[k].name, "blocked": False} for k in sorted(location.connecting)
    ] + [{"name": world.locations[k].name, "blocked": True} for k in sorted(location.blocked)]

    characters = []
    for key in sorted(scope.characters):
        ch = world.characters[key]
        characters.append(
            {
                "name": ch.name,
                "descriptions": list(ch.descriptions),
                "is_player": key == world.player,
                "inventory": [item_view(k) for k in sorted(ch.inventory)],
            }
        )

    return {
        "location": {"name": location.name, "descriptions": list(location.descriptions)},
        "exits": exits,
        "items": [item_view(k) for k in sorted(scope.items)],
        "characters": characters,
    }


def create_app(
    store: Store | None = None,
    cors: bool = False,
    redact_raw: bool = False,
    snapshot_dir: str | None = None,
) -> FastAPI:
    store = store if store is not None else Store()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        if snapshot_dir:
            directory = Path(snapshot_dir)
            directory.mkdir(parents=True, exist_ok=True)
            for session_id, session in store.sessions.items():
                save_session(session, directory / f"{session_id}.json")

    app = FastAPI(title="fabular", lifespan=lifespan)
    app.state.store = store
    if cors:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.post("/worlds")
    async def upload_world(request: Request):
        try:
            doc = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(400, "bad-json", f"request body is not JSON: {exc}")
        try:
            world = from_document(doc)
        except WorldFileError as exc:
            return _error(
                400,
                "invalid-world",
                "world document failed validation",
                violations=[str(v) for v in exc.violations] or [str(exc)],
            )
        world_id = store.add_world(world)
        return {"world_id": world_id}

    @app.get("/worlds")
    def list_worlds():
        return {
            "worlds": [
                {
                    "id": world_id,
                    "player": world.characters[world.player].name,
                    "locations": len(world.locations),
                    "items": len(world.items),
                    "characters": len(world.characters),
                }
                for world_id, world in store.worlds.items()
            ]
        }

    @app.post("/sessions")
    def create_session(body: SessionRequest):
        world = store.worlds.get(body.world_id)
        if world is None:
            return _error(404, "unknown-world", f"no world {body.world_id!r}")
        try:
            config = BackendConfig.from_dict(body.backend)
            if config.kind == "scripted" and body.script is None:
                raise ConfigError("scripted backend requires a script")
            backend = make_backend(config, script=body.script)
        except ConfigError as exc:
            return _error(400, "bad-backend", str(exc))
        session = Session(world=world, backend=backend, config=config, fewshot=default_fewshot())
        session_id = store.add_session(session)
        return {"session_id": session_id}

    @app.post("/sessions/{session_id}/turn")
    def run_turn(session_id: str, body: TurnRequest):
        session = store.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown-session", f"no session {session_id!r}")
        try:
            report = session.run_turn(body.input)
        except SessionBusyError as exc:
            return _error(409, "turn-in-flight", str(exc))
        except EmptyInputError as exc:
            return _error(400, "empty-input", str(exc))
        except TurnError as exc:
            return _error(502, "backend-failure", str(exc))
        record = report.to_dict()
        if redact_raw:
            record["raw_output"] = "[redacted]"
        return record

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        session = store.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown-session", f"no session {session_id!r}")
        world = session.world
        return {
            "rendering": render_state(world, world.player).text,
            "scope": _scope_view(world),
        }

    @app.post("/sessions/{session_id}/generate-item")
    def generate_item(session_id: str, body: GenerateItemRequest):
        session = store.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown-session", f"no session {session_id!r}")
        try:
            item = generation.generate_item(session, body.location, body.brief)
        except UnknownComponentError as exc:
            return _error(404, "unknown-location", str(exc.args[0]) if exc.args else str(exc))
        except SessionBusyError as exc:
            return _error(409, "turn-in-flight", str(exc))
        except generation.ItemGenerationError as exc:
            return _error(502, "generation-failed", str(exc))
        except GenerationError as exc:
            return _error(502, "backend-failure", str(exc))
        return {
            "name": item.name,
            "descriptions": list(item.descriptions),
            "gettable": item.gettable,
        }

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        if session_id not in store.sessions:
            return _error(404, "unknown-session", f"no session {session_id!r}")
        del store.sessions[session_id]

    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fabular-service", description="Serve worlds and play sessions over HTTP/JSON."
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--cors", action="store_true", help="allow cross-origin requests (local UI dev)")
    parser.add_argument("--redact-raw", action="store_true", help="hide raw model text in turn responses")
    parser.add_argument("--snapshot-dir", help="save sessions here on shutdown")
    args = parser.parse_args(argv)
    app = create_app(cors=args.cors, redact_raw=args.redact_raw, snapshot_dir=args.snapshot_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
