"""Turn orchestration: the full predict-check-apply-narrate pipeline.

A session owns one world and drives it turn by turn. The structured world
is the only dialogue state: every turn re-renders it from scratch, so a
hallucinated change rejected last turn simply never existed. Each turn
produces a TurnReport, the audit record that exposes the gap between what
the model predicted and what the engine accepted.
"""

from __future__ import annotations

import json
import threading
import uuid
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterator, Sequence

from .changes import (
    Rejection,
    Reason,
    WorldChange,
    apply_changes,
    format_change,
    parse_changes,
    validate_change,
)
from .gateway import (
    Backend,
    BackendConfig,
    FewshotExample,
    GenerationError,
    build_narrator_prompt,
    build_update_prompt,
    default_fewshot,
    load_fewshot,
)
from .render import render_state
from .world import World, from_document, to_document, world_digest

SESSION_SCHEMA_VERSION = 1
TURN_SCHEMA_VERSION = 1


class SessionBusyError(RuntimeError):
    """Another turn is already in flight for this session."""


class TurnError(RuntimeError):
    """The turn aborted; the session's world is unchanged and still usable."""


class SessionFileError(ValueError):
    """A session file is malformed or inconsistent."""


class ReplayError(ValueError):
    """Recorded applied changes no longer replay cleanly."""


@dataclass
class TurnReport:
    """Everything one turn did, from raw model text to rejected changes."""

    turn: int
    player_input: str
    raw_output: str
    parsed: list[WorldChange]
    applied: list[WorldChange]
    rejections: list[Rejection]
    narration: str
    digest_before: str
    digest_after: str

    def to_dict(self) -> dict:
        return {
            "schema_version": TURN_SCHEMA_VERSION,
            "turn": self.turn,
            "input": self.player_input,
            "raw_output": self.raw_output,
            "parsed": [format_change(c) for c in self.parsed],
            "applied": [format_change(c) for c in self.applied],
            "rejected": [
                {"line": r.line, "reason": r.reason.value, "detail": r.detail}
                for r in self.rejections
            ],
            "narration": self.narration,
            "digest_before": self.digest_before,
            "digest_after": self.digest_after,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TurnReport":
        if data.get("schema_version") != TURN_SCHEMA_VERSION:
            raise SessionFileError(
                f"unsupported turn schema version {data.get('schema_version')!r}"
            )
        try:
            return cls(
                turn=data["turn"],
                player_input=data["input"],
                raw_output=data["raw_output"],
                parsed=[_parse_one(line) for line in data["parsed"]],
                applied=[_parse_one(line) for line in data["applied"]],
                rejections=[
                    Rejection(line=r["line"], reason=Reason(r["reason"]), detail=r["detail"])
                    for r in data["rejected"]
                ],
                narration=data["narration"],
                digest_before=data["digest_before"],
                digest_after=data["digest_after"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SessionFileError(f"malformed turn record: {exc}") from exc


def _parse_one(line: str) -> WorldChange:
    parsed, rejections = parse_changes(line)
    if rejections or len(parsed) != 1:
        raise SessionFileError(f"recorded change does not parse: {line!r}")
    return parsed[0]


class Session:
    """One playthrough: a world, a backend, and the turn history.

    A single writer at a time: concurrent turns on the same session are
    refused with SessionBusyError rather than queued. Distinct sessions are
    fully independent.
    """

    def __init__(
        self,
        world: World,
        backend: Backend | None,
        config: BackendConfig,
        fewshot: Sequence[FewshotExample] | None = None,
        session_id: str | None = None,
        fewshot_ref: str | None = None,
    ):
        self.session_id = session_id or uuid.uuid4().hex[:12]
        self.world = world
        self.backend = backend
        self.config = config
        self.fewshot = tuple(fewshot) if fewshot is not None else default_fewshot()
        self.fewshot_ref = fewshot_ref
        self.history: list[TurnReport] = []
        self._lock = threading.Lock()

    @contextmanager
    def exclusive(self) -> Iterator[None]:
        if not self._lock.acquire(blocking=False):
            raise SessionBusyError(f"session {self.session_id} has a turn in flight")
        try:
            yield
        finally:
            self._lock.release()

    @property
    def last_report(self) -> TurnReport | None:
        return self.history[-1] if self.history else None

    def run_turn(self, player_input: str) -> TurnReport:
        """Run one full turn; on any backend failure the world is untouched."""
        with self.exclusive():
            if self.backend is None:
                raise TurnError("session has no backend to generate with")
            world_before = self.world
            digest_before = world_digest(world_before)

            rendered = render_state(world_before, world_before.player)
            update_prompt = build_update_prompt(rendered, player_input, self.fewshot)
            try:
                raw = self.backend.generate(update_prompt).text
            except GenerationError as exc:
                raise TurnError(f"world-update call failed: {exc}") from exc

            parsed, parse_rejections = parse_changes(raw)
            new_world, applied, check_rejections = apply_changes(world_before, parsed)
            rejections = parse_rejections + check_rejections

            narrator_prompt = build_narrator_prompt(rendered, applied, rejections, player_input)
            try:
                narration = self.backend.generate(narrator_prompt).text
            except GenerationError as exc:
                raise TurnError(f"narrator call failed: {exc}") from exc

            report = TurnReport(
                turn=len(self.history) + 1,
                player_input=player_input,
                raw_output=raw,
                parsed=parsed,
                applied=applied,
                rejections=rejections,
                narration=narration,
                digest_before=digest_before,
                digest_after=world_digest(new_world),
            )
            # Commit only now: everything above worked.
            self.world = new_world
            self.history.append(report)
            return report


def replay_applied(initial: World, reports: Sequence[TurnReport]) -> World:
    """Re-apply every recorded applied change from the initial world.

    Replay goes through the same validation path as live turns; a recorded
    change that no longer validates means the record and the world diverged.
    """
    current = initial
    for report in reports:
        for change in report.applied:
            outcome = validate_change(current, change)
            if isinstance(outcome, Rejection):
                raise ReplayError(
                    f"turn {report.turn}: recorded change {format_change(change)!r} "
                    f"rejected on replay: {outcome.detail}"
                )
            current, applied, _ = apply_changes(current, [outcome])
            if not applied:
                raise ReplayError(f"turn {report.turn}: change {format_change(change)!r} did not apply")
    return current


# ---------------------------------------------------------------------------
# Persistence


def save_session(session: Session, path: str | Path) -> None:
    """Write the whole session as one JSON document (no credential values)."""
    doc = {
        "schema_version": SESSION_SCHEMA_VERSION,
        "session_id": session.session_id,
        "config": session.config.to_dict(),
        "fewshot": session.fewshot_ref,
        "world": to_document(session.world),
        "history": [report.to_dict() for report in session.history],
    }
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_session(
    path: str | Path,
    backend: Backend | None = None,
    script: dict | None = None,
) -> Session:
    """Load a session file, re-validating the world and its digest trail."""
    from .gateway import ScriptedBackend, make_backend

    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SessionFileError(f"cannot read session file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema_version") != SESSION_SCHEMA_VERSION:
        raise SessionFileError("unsupported or missing session schema version")

    try:
        config = BackendConfig.from_dict(doc["config"])
        world = from_document(doc["world"])
        history = [TurnReport.from_dict(r) for r in doc.get("history", [])]
        session_id = doc["session_id"]
        fewshot_ref = doc.get("fewshot")
    except KeyError as exc:
        raise SessionFileError(f"session file is missing {exc}") from exc

    if history:
        expected = history[-1].digest_after
        actual = world_digest(world)
        if actual != expected:
            raise SessionFileError(
                f"world digest {actual} does not match last turn's digest {expected}"
            )

    if backend is None:
        if config.kind == "scripted":
            # Without a script the session loads fine for inspection; only
            # run_turn needs a backend.
            backend = ScriptedBackend(script) if script is not None else None
        else:
            backend = make_backend(config)

    fewshot = load_fewshot(fewshot_ref) if fewshot_ref else None
    session = Session(
        world=world,
        backend=backend,
        config=config,
        fewshot=fewshot,
        session_id=session_id,
        fewshot_ref=fewshot_ref,
    )
    session.history = history
    return session


class TranscriptWriter:
    """Append-only JSON-lines transcript, one TurnReport per line, crash-safe."""

    def __init__(self, path: str | Path):
        self._file: IO[str] = open(path, "a", encoding="utf-8")

    def append(self, report: TurnReport) -> None:
        self._file.write(json.dumps(report.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
        self._file.flush()

    def close(self) -> None:
        self._file.close()

    def __enter__(self) -> "TranscriptWriter":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
