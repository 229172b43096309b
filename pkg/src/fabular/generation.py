"""Supervised creation of new items that must fit the structured world.

Creation is deliberately not part of the player turn path: the model cannot
conjure objects during play, it can only propose them here, where every
reply is checked against a strict JSON schema and name collisions before
anything enters the world. All or nothing: either a valid item lands in the
target location, or the world keeps its previous digest.
"""

from __future__ import annotations

import json
from dataclasses import replace

from .gateway import build_item_prompt
from .render import render_location
from .session import Session
from .world import Item, UnknownComponentError, World, key_of, validate_world

ITEM_KEYS = {"name", "descriptions", "gettable"}
DEFAULT_RETRIES = 2


class ItemReplyError(ValueError):
    """The model's reply does not satisfy the item schema."""


class ItemGenerationError(RuntimeError):
    """No schema-valid, collision-free item came back within the retry limit."""


def _strip_fences(text: str) -> str:
    stripped = text.strip()
    if stripped.startswith("```"):
        lines = stripped.splitlines()
        if lines and lines[-1].strip().startswith("```"):
            lines = lines[:-1]
        stripped = "\n".join(lines[1:]).strip()
    return stripped


def parse_item_reply(text: str) -> dict:
    """Parse a reply into the exact item schema or raise with the defect.

    The object must carry exactly the keys name / descriptions / gettable:
    a non-empty string, a non-empty array of non-empty strings, a boolean.
    """
    stripped = _strip_fences(text)
    try:
        data = json.loads(stripped)
    except json.JSONDecodeError:
        start, end = stripped.find("{"), stripped.rfind("}")
        if start < 0 or end <= start:
            raise ItemReplyError("reply contains no JSON object") from None
        try:
            data = json.loads(stripped[start : end + 1])
        except json.JSONDecodeError as exc:
            raise ItemReplyError(f"reply is not valid JSON: {exc}") from None

    if not isinstance(data, dict):
        raise ItemReplyError("reply JSON is not an object")
    if set(data) != ITEM_KEYS:
        raise ItemReplyError(
            f"object must have exactly the keys {sorted(ITEM_KEYS)}, got {sorted(data)}"
        )
    name = data["name"]
    if not isinstance(name, str) or not name.strip():
        raise ItemReplyError("name must be a non-empty string")
    if '"' in name or any(ch in "\r\n\t" for ch in name):
        raise ItemReplyError("name must not contain quotes or control characters")
    descriptions = data["descriptions"]
    if (
        not isinstance(descriptions, list)
        or not descriptions
        or not all(isinstance(d, str) and d.strip() for d in descriptions)
    ):
        raise ItemReplyError("descriptions must be a non-empty array of non-empty strings")
    if type(data["gettable"]) is not bool:
        raise ItemReplyError("gettable must be a boolean")
    return data


def place_new_item(world: World, item: Item, location: str) -> World:
    """New world with the item registered and lying in the given location."""
    loc_key = key_of(location)
    if loc_key not in world.locations:
        raise UnknownComponentError(f"no location named {location!r}")
    item_key = key_of(item.name)
    if item_key in world.items:
        raise ValueError(f"item name {item.name!r} already exists")
    loc = world.locations[loc_key]
    return replace(
        world,
        items={**world.items, item_key: item},
        locations={**world.locations, loc_key: replace(loc, items=loc.items | {item_key})},
    )


def generate_item(
    session: Session, location: str, brief: str = "", retries: int = DEFAULT_RETRIES
) -> Item:
    """Ask the backend for one new item and install it in the target location.

    Schema violations and name collisions consume retries; backend failures
    abort immediately. On any failure the session's world is unchanged.
    """
    with session.exclusive():
        if session.backend is None:
            raise ItemGenerationError("session has no backend to generate with")
        world = session.world
        loc_key = key_of(location)
        if loc_key not in world.locations:
            raise UnknownComponentError(f"no location named {location!r}")

        prompt = build_item_prompt(render_location(world, loc_key), brief)
        attempts = retries + 1
        last_error = "no attempt made"
        for _ in range(attempts):
            raw = session.backend.generate(prompt).text
            try:
                data = parse_item_reply(raw)
            except ItemReplyError as exc:
                last_error = str(exc)
                continue
            if key_of(data["name"]) in world.items:
                last_error = f"item name {data['name']!r} already exists"
                continue
            item = Item(
                name=data["name"],
                descriptions=tuple(data["descriptions"]),
                gettable=data["gettable"],
            )
            new_world = place_new_item(world, item, loc_key)
            violations = validate_world(new_world)
            if violations:
                last_error = "; ".join(str(v) for v in violations)
                continue
            session.world = new_world
            return item
        raise ItemGenerationError(f"no valid item after {attempts} attempts: {last_error}")
