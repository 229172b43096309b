"""Typed world-change instructions and the consistency check.

The language model answers the world-update prompt in a line-oriented wire
grammar (documented in docs/change_grammar.abnf). This module parses that
text into typed changes, validates each one against the current world, and
applies the survivors through the primitive mutators. Failures are never
exceptions: a change that does not fit the world becomes a Rejection and the
world stays untouched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Union

from . import world as world_model
from .world import Key, World, key_of


class Reason(Enum):
    """Closed set of rejection reason codes."""

    UNKNOWN_NAME = "unknown-name"
    NOT_CONNECTED = "not-connected"
    BLOCKED_PATH = "blocked-path"
    NOT_GETTABLE = "not-gettable"
    NOT_PRESENT = "not-present"
    NOT_IN_INVENTORY = "not-in-inventory"
    NOT_CO_LOCATED = "not-co-located"
    NOT_BLOCKED = "not-blocked"
    PARSE_ERROR = "parse-error"


@dataclass(frozen=True)
class Move:
    character: str
    destination: str


@dataclass(frozen=True)
class Take:
    item: str
    character: str


@dataclass(frozen=True)
class Drop:
    item: str
    character: str


@dataclass(frozen=True)
class Give:
    item: str
    giver: str
    receiver: str


@dataclass(frozen=True)
class Unblock:
    target: str
    location: str


@dataclass(frozen=True)
class NoChange:
    pass


WorldChange = Union[Move, Take, Drop, Give, Unblock, NoChange]


@dataclass(frozen=True)
class Rejection:
    """A change that was refused, with the line it came from and why."""

    line: str
    reason: Reason
    detail: str
    change: WorldChange | None = None


# Quoted names may contain anything but a double quote. Keywords are
# uppercase; a line whose first token is a keyword must parse completely.
_NAME = r'"([^"\n]+)"'
_PATTERNS: dict[str, re.Pattern[str]] = {
    "MOVE": re.compile(rf"^MOVE\s+{_NAME}\s+TO\s+{_NAME}$"),
    "TAKE": re.compile(rf"^TAKE\s+{_NAME}\s+BY\s+{_NAME}$"),
    "DROP": re.compile(rf"^DROP\s+{_NAME}\s+BY\s+{_NAME}$"),
    "GIVE": re.compile(rf"^GIVE\s+{_NAME}\s+FROM\s+{_NAME}\s+TO\s+{_NAME}$"),
    "UNBLOCK": re.compile(rf"^UNBLOCK\s+{_NAME}\s+FROM\s+{_NAME}$"),
    "NONE": re.compile(r"^NONE$"),
}
KEYWORDS = frozenset(_PATTERNS)

_USAGE = {
    "MOVE": 'MOVE "<character>" TO "<location>"',
    "TAKE": 'TAKE "<item>" BY "<character>"',
    "DROP": 'DROP "<item>" BY "<character>"',
    "GIVE": 'GIVE "<item>" FROM "<character>" TO "<character>"',
    "UNBLOCK": 'UNBLOCK "<location>" FROM "<location>"',
    "NONE": "NONE",
}


def _build(keyword: str, groups: tuple[str, ...]) -> WorldChange:
    if keyword == "MOVE":
        return Move(character=groups[0], destination=groups[1])
    if keyword == "TAKE":
        return Take(item=groups[0], character=groups[1])
    if keyword == "DROP":
        return Drop(item=groups[0], character=groups[1])
    if keyword == "GIVE":
        return Give(item=groups[0], giver=groups[1], receiver=groups[2])
    if keyword == "UNBLOCK":
        return Unblock(target=groups[0], location=groups[1])
    return NoChange()


def parse_changes(llm_output: str) -> tuple[list[WorldChange], list[Rejection]]:
    """Parse predicted-outcome text into typed changes.

    Blank lines, code fences and prose are skipped. A line whose first token
    is one of the uppercase keywords must match its form exactly or it
    becomes a parse-error rejection.
    """
    changes: list[WorldChange] = []
    rejections: list[Rejection] = []
    for raw in llm_output.splitlines():
        line = raw.strip()
        if not line or line.startswith("```"):
            continue
        token = line.split(None, 1)[0]
        if token not in KEYWORDS:
            continue
        match = _PATTERNS[token].match(line)
        if match is None:
            rejections.append(
                Rejection(
                    line=line,
                    reason=Reason.PARSE_ERROR,
                    detail=f"expected {_USAGE[token]}",
                )
            )
            continue
        changes.append(_build(token, match.groups()))
    return changes, rejections


def format_change(change: WorldChange) -> str:
    """Inverse of parse_changes for a single change; round-trips exactly."""

    def q(name: str) -> str:
        if '"' in name or "\n" in name or not name:
            raise ValueError(f"name cannot be written in the change grammar: {name!r}")
        return f'"{name}"'

    if isinstance(change, Move):
        return f"MOVE {q(change.character)} TO {q(change.destination)}"
    if isinstance(change, Take):
        return f"TAKE {q(change.item)} BY {q(change.character)}"
    if isinstance(change, Drop):
        return f"DROP {q(change.item)} BY {q(change.character)}"
    if isinstance(change, Give):
        return f"GIVE {q(change.item)} FROM {q(change.giver)} TO {q(change.receiver)}"
    if isinstance(change, Unblock):
        return f"UNBLOCK {q(change.target)} FROM {q(change.location)}"
    if isinstance(change, NoChange):
        return "NONE"
    raise TypeError(f"not a world change: {change!r}")


# ---------------------------------------------------------------------------
# Consistency check


def _reject(change: WorldChange, reason: Reason, detail: str) -> Rejection:
    return Rejection(line=format_change(change), reason=reason, detail=detail, change=change)


def _resolve_item(world: World, name: str) -> world_model.Item | None:
    return world.items.get(key_of(name))


def _resolve_location(world: World, name: str) -> world_model.Location | None:
    return world.locations.get(key_of(name))


def _resolve_character(world: World, name: str) -> world_model.Character | None:
    return world.characters.get(key_of(name))


def validate_change(world: World, change: WorldChange) -> WorldChange | Rejection:
    """Resolve names and check the change against the current world.

    On success the same change variant comes back with every name in its
    canonical spelling, ready for the mutators. On failure a Rejection with
    one of the closed reason codes comes back and nothing is modified.

    Structural checks only: whether the fiction justifies an unblock (say,
    possessing the right key) is the language model's call, not ours. Richer
    precondition rules can be hooked in here later.
    """
    if isinstance(change, NoChange):
        return change

    if isinstance(change, Move):
        ch = _resolve_character(world, change.character)
        if ch is None:
            return _reject(change, Reason.UNKNOWN_NAME, f"no character named {change.character!r}")
        dest = _resolve_location(world, change.destination)
        if dest is None:
            return _reject(change, Reason.UNKNOWN_NAME, f"no location named {change.destination!r}")
        current = world.locations[ch.location]
        dest_key = key_of(dest.name)
        if dest_key in current.blocked:
            return _reject(
                change,
                Reason.BLOCKED_PATH,
                f"the way from {current.name!r} to {dest.name!r} is blocked",
            )
        if dest_key not in current.connecting:
            return _reject(
                change,
                Reason.NOT_CONNECTED,
                f"{dest.name!r} does not connect to {current.name!r}",
            )
        return Move(character=ch.name, destination=dest.name)

    if isinstance(change, Take):
        item = _resolve_item(world, change.item)
        if item is None:
            return _reject(change, Reason.UNKNOWN_NAME, f"no item named {change.item!r}")
        ch = _resolve_character(world, change.character)
        if ch is None:
            return _reject(change, Reason.UNKNOWN_NAME, f"no character named {change.character!r}")
        current = world.locations[ch.location]
        if key_of(item.name) not in current.items:
            return _reject(
                change,
                Reason.NOT_PRESENT,
                f"{item.name!r} is not lying in {current.name!r}",
            )
        if not item.gettable:
            return _reject(change, Reason.NOT_GETTABLE, f"{item.name!r} cannot be picked up")
        return Take(item=item.name, character=ch.name)

    if isinstance(change, Drop):
        item = _resolve_item(world, change.item)
        if item is None:
            return _reject(change, Reason.UNKNOWN_NAME, f"no item named {change.item!r}")
        ch = _resolve_character(world, change.character)
        if ch is None:
            return _reject(change, Reason.UNKNOWN_NAME, f"no character named {change.character!r}")
        if key_of(item.name) not in ch.inventory:
            return _reject(
                change,
                Reason.NOT_IN_INVENTORY,
                f"{ch.name!r} does not carry {item.name!r}",
            )
        return Drop(item=item.name, character=ch.name)

    if isinstance(change, Give):
        item = _resolve_item(world, change.item)
        if item is None:
            return _reject(change, Reason.UNKNOWN_NAME, f"no item named {change.item!r}")
        giver = _resolve_character(world, change.giver)
        if giver is None:
            return _reject(change, Reason.UNKNOWN_NAME, f"no character named {change.giver!r}")
        receiver = _resolve_character(world, change.receiver)
        if receiver is None:
            return _reject(change, Reason.UNKNOWN_NAME, f"no character named {change.receiver!r}")
        if key_of(item.name) not in giver.inventory:
            return _reject(
                change,
                Reason.NOT_IN_INVENTORY,
                f"{giver.name!r} does not carry {item.name!r}",
            )
        if giver.location != receiver.location:
            return _reject(
                change,
                Reason.NOT_CO_LOCATED,
                f"{giver.name!r} and {receiver.name!r} are not in the same location",
            )
        return Give(item=item.name, giver=giver.name, receiver=receiver.name)

    if isinstance(change, Unblock):
        target = _resolve_location(world, change.target)
        if target is None:
            return _reject(change, Reason.UNKNOWN_NAME, f"no location named {change.target!r}")
        origin = _resolve_location(world, change.location)
        if origin is None:
            return _reject(change, Reason.UNKNOWN_NAME, f"no location named {change.location!r}")
        player = world.characters[world.player]
        if key_of(origin.name) != player.location:
            return _reject(
                change,
                Reason.NOT_BLOCKED,
                f"{origin.name!r} is not where {player.name!r} currently is",
            )
        if key_of(target.name) not in origin.blocked:
            return _reject(
                change,
                Reason.NOT_BLOCKED,
                f"{target.name!r} is not blocked from {origin.name!r}",
            )
        return Unblock(target=target.name, location=origin.name)

    raise TypeError(f"not a world change: {change!r}")


def _apply_one(world: World, change: WorldChange) -> World:
    if isinstance(change, Move):
        return world_model.move_character(world, change.character, change.destination)
    if isinstance(change, Take):
        return world_model.take(world, change.item, change.character)
    if isinstance(change, Drop):
        return world_model.drop(world, change.item, change.character)
    if isinstance(change, Give):
        return world_model.give(world, change.item, change.giver, change.receiver)
    if isinstance(change, Unblock):
        return world_model.unblock(world, change.location, change.target)
    return world


def apply_changes(
    world: World, changes: list[WorldChange]
) -> tuple[World, list[WorldChange], list[Rejection]]:
    """Validate and apply changes in order against the evolving world.

    Each change is checked against the state left by its predecessors, so an
    unblock followed by a move through the freed passage works in one turn.
    Rejected changes never touch the world. NoChange entries validate but
    are neither applied nor rejected; they exist so a turn can explicitly
    report that nothing happened.
    """
    current = world
    applied: list[WorldChange] = []
    rejections: list[Rejection] = []
    for change in changes:
        if isinstance(change, NoChange):
            continue
        outcome = validate_change(current, change)
        if isinstance(outcome, Rejection):
            rejections.append(outcome)
            continue
        current = _apply_one(current, outcome)
        applied.append(outcome)
    return current, applied, rejections
