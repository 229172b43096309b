"""Structured world model: the minimal state the engine keeps consistent.

The world stores as structured data only what consistency checking needs:
where every item sits, how locations connect, who stands where and carries
what. Every other detail of a component lives in its free-text descriptions.

Worlds are immutable snapshots. Every mutator returns a new ``World``; the
originals are never edited in place, so worlds can be shared freely across
threads and hashed for audit digests.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator

# Canonical identifier for a component: its casefolded display name. Display
# names are unique case-insensitively within a namespace, so the mapping is
# bijective. Items, locations and characters each have their own namespace.
Key = str


def key_of(name: str) -> Key:
    return name.casefold()


class UnknownComponentError(KeyError):
    """An identifier is absent from the world. A programming bug, not gameplay."""


class MutationError(RuntimeError):
    """A primitive mutator was asked for an edit its preconditions forbid."""


class WorldFileError(ValueError):
    """A world document failed to load. Carries every violation found."""

    def __init__(self, message: str, violations: Iterable[Violation] = ()):
        super().__init__(message)
        self.violations = list(violations)

    def __str__(self) -> str:
        base = super().__str__()
        if not self.violations:
            return base
        lines = "\n".join(f"  - {v}" for v in self.violations)
        return f"{base}\n{lines}"


@dataclass(frozen=True)
class Item:
    name: str
    descriptions: tuple[str, ...] = ()
    gettable: bool = False


@dataclass(frozen=True)
class Location:
    name: str
    descriptions: tuple[str, ...] = ()
    items: frozenset[Key] = frozenset()
    connecting: frozenset[Key] = frozenset()
    blocked: frozenset[Key] = frozenset()


@dataclass(frozen=True)
class Character:
    name: str
    descriptions: tuple[str, ...] = ()
    location: Key = ""
    inventory: frozenset[Key] = frozenset()


@dataclass(frozen=True)
class World:
    """The complete fictional state.

    Items live in one global registry; locations and characters hold item
    *identifiers*, never item objects, so placement uniqueness is checkable
    in a single pass. The registries are plain dicts treated as immutable.
    """

    items: dict[Key, Item]
    locations: dict[Key, Location]
    characters: dict[Key, Character]
    player: Key


@dataclass(frozen=True)
class Violation:
    rule: str
    component: str
    detail: str

    def __str__(self) -> str:
        return f"{self.rule}({self.component}): {self.detail}"


@dataclass(frozen=True)
class ScopeSet:
    """What a viewpoint character can currently see or access.

    Full-detail members are the current location, the items lying there, the
    co-located characters and everything those characters carry. Adjacent
    locations (connecting or blocked) are visible by name only.
    """

    location: Key
    items: frozenset[Key]
    characters: frozenset[Key]
    carried_items: frozenset[Key]
    name_only_locations: frozenset[Key]

    def contains(self, kind: str, key: Key) -> bool:
        if kind == "location":
            return key == self.location or key in self.name_only_locations
        if kind == "item":
            return key in self.items or key in self.carried_items
        if kind == "character":
            return key in self.characters
        raise ValueError(f"unknown component kind: {kind!r}")


# ---------------------------------------------------------------------------
# Validation


def _name_problems(kind: str, name: str) -> list[Violation]:
    problems = []
    if not name.strip():
        problems.append(Violation("empty-name", f"{kind}:{name!r}", "display name is empty"))
    if '"' in name or any(ch in "\r\n\t" for ch in name):
        problems.append(
            Violation(
                "invalid-name",
                f"{kind}:{name!r}",
                "display name contains a double quote or control character",
            )
        )
    return problems


def validate_world(world: World) -> list[Violation]:
    """Check every structural invariant; an empty list means the world is sound.

    Violations are data, not exceptions: callers decide whether a broken
    world is fatal (loading) or a test failure (fuzzing).
    """
    violations: list[Violation] = []

    registries = (
        ("item", world.items),
        ("location", world.locations),
        ("character", world.characters),
    )
    for kind, registry in registries:
        for key, component in registry.items():
            violations.extend(_name_problems(kind, component.name))
            if key != key_of(component.name):
                violations.append(
                    Violation(
                        "registry-key",
                        component.name,
                        f"{kind} is registered under {key!r}, not its own key",
                    )
                )
            for text in component.descriptions:
                if not isinstance(text, str) or not text.strip():
                    violations.append(
                        Violation("empty-description", component.name, "description is empty")
                    )

    for loc in world.locations.values():
        own = key_of(loc.name)
        overlap = loc.connecting & loc.blocked
        for other in sorted(overlap):
            violations.append(
                Violation(
                    "connecting-blocked-overlap",
                    loc.name,
                    f"{other!r} is listed as both connecting and blocked",
                )
            )
        if own in loc.connecting or own in loc.blocked:
            violations.append(Violation("self-reference", loc.name, "location connects to itself"))
        for ref in sorted(loc.connecting | loc.blocked):
            if ref not in world.locations:
                violations.append(
                    Violation("dangling-reference", loc.name, f"adjacent location {ref!r} does not exist")
                )
        for ref in sorted(loc.items):
            if ref not in world.items:
                violations.append(
                    Violation("dangling-reference", loc.name, f"item {ref!r} does not exist")
                )

    for ch in world.characters.values():
        if ch.location not in world.locations:
            violations.append(
                Violation("dangling-reference", ch.name, f"location {ch.location!r} does not exist")
            )
        for ref in sorted(ch.inventory):
            if ref not in world.items:
                violations.append(
                    Violation("dangling-reference", ch.name, f"inventory item {ref!r} does not exist")
                )

    if world.player not in world.characters:
        violations.append(
            Violation("unknown-player", world.player, "player character does not exist")
        )

    # Placement uniqueness: each item in exactly one location or inventory.
    containers: dict[Key, list[str]] = {key: [] for key in world.items}
    for loc in world.locations.values():
        for item_key in loc.items:
            if item_key in containers:
                containers[item_key].append(f"location {loc.name!r}")
    for ch in world.characters.values():
        for item_key in ch.inventory:
            if item_key in containers:
                containers[item_key].append(f"character {ch.name!r}")
    for item_key in sorted(containers):
        holders = containers[item_key]
        name = world.items[item_key].name
        if not holders:
            violations.append(Violation("placement-uniqueness", name, "item is not placed anywhere"))
        elif len(holders) > 1:
            violations.append(
                Violation(
                    "placement-uniqueness",
                    name,
                    "item is placed more than once: " + ", ".join(sorted(holders)),
                )
            )

    return violations


def asymmetry_warnings(world: World) -> list[str]:
    """Lint for likely authoring mistakes: one-way adjacency between locations.

    A pair counts as symmetric when each side appears in the other's
    connecting or blocked set, so a door blocked from one side and open from
    the other is not flagged. One-way passages stay legal; this only warns.
    """
    warnings = []
    for key in sorted(world.locations):
        loc = world.locations[key]
        for other_key in sorted(loc.connecting | loc.blocked):
            other = world.locations.get(other_key)
            if other is None:
                continue
            if key not in (other.connecting | other.blocked):
                warnings.append(
                    f"one-way passage: {loc.name!r} leads to {other.name!r} but not back"
                )
    return warnings


# ---------------------------------------------------------------------------
# Scope


def scope_of(world: World, viewpoint: str) -> ScopeSet:
    """Everything the viewpoint character can see or access right now.

    Only the current location's contents and adjacency are touched, never the
    rest of the world, which is what keeps prompts bounded on huge worlds.
    """
    ch = world.characters.get(key_of(viewpoint))
    if ch is None:
        raise UnknownComponentError(f"no character named {viewpoint!r}")
    loc = world.locations.get(ch.location)
    if loc is None:
        raise UnknownComponentError(f"character {ch.name!r} is in unknown location {ch.location!r}")

    loc_key = key_of(loc.name)
    here = frozenset(
        key for key, other in world.characters.items() if other.location == loc_key
    )
    carried: set[Key] = set()
    for char_key in here:
        carried.update(world.characters[char_key].inventory)
    return ScopeSet(
        location=loc_key,
        items=loc.items,
        characters=here,
        carried_items=frozenset(carried),
        name_only_locations=loc.connecting | loc.blocked,
    )


# ---------------------------------------------------------------------------
# Primitive mutators. Preconditions are the change engine's job; these only
# guard against structurally impossible edits (programming bugs).


def _item(world: World, name: str) -> tuple[Key, Item]:
    key = key_of(name)
    if key not in world.items:
        raise UnknownComponentError(f"no item named {name!r}")
    return key, world.items[key]


def _location(world: World, name: str) -> tuple[Key, Location]:
    key = key_of(name)
    if key not in world.locations:
        raise UnknownComponentError(f"no location named {name!r}")
    return key, world.locations[key]


def _character(world: World, name: str) -> tuple[Key, Character]:
    key = key_of(name)
    if key not in world.characters:
        raise UnknownComponentError(f"no character named {name!r}")
    return key, world.characters[key]


def move_character(world: World, character: str, destination: str) -> World:
    char_key, ch = _character(world, character)
    dest_key, _ = _location(world, destination)
    new_char = replace(ch, location=dest_key)
    return replace(world, characters={**world.characters, char_key: new_char})


def take(world: World, item: str, character: str) -> World:
    item_key, _ = _item(world, item)
    char_key, ch = _character(world, character)
    loc_key, loc = _location(world, ch.location)
    if item_key not in loc.items:
        raise MutationError(f"item {item!r} is not lying in {loc.name!r}")
    new_loc = replace(loc, items=loc.items - {item_key})
    new_char = replace(ch, inventory=ch.inventory | {item_key})
    return replace(
        world,
        locations={**world.locations, loc_key: new_loc},
        characters={**world.characters, char_key: new_char},
    )


def drop(world: World, item: str, character: str) -> World:
    item_key, _ = _item(world, item)
    char_key, ch = _character(world, character)
    loc_key, loc = _location(world, ch.location)
    if item_key not in ch.inventory:
        raise MutationError(f"character {ch.name!r} does not carry {item!r}")
    new_char = replace(ch, inventory=ch.inventory - {item_key})
    new_loc = replace(loc, items=loc.items | {item_key})
    return replace(
        world,
        locations={**world.locations, loc_key: new_loc},
        characters={**world.characters, char_key: new_char},
    )


def give(world: World, item: str, giver: str, receiver: str) -> World:
    item_key, _ = _item(world, item)
    giver_key, giving = _character(world, giver)
    receiver_key, receiving = _character(world, receiver)
    if item_key not in giving.inventory:
        raise MutationError(f"character {giving.name!r} does not carry {item!r}")
    if giver_key == receiver_key:
        return world
    new_giver = replace(giving, inventory=giving.inventory - {item_key})
    new_receiver = replace(receiving, inventory=receiving.inventory | {item_key})
    return replace(
        world,
        characters={**world.characters, giver_key: new_giver, receiver_key: new_receiver},
    )


def unblock(world: World, at: str, target: str) -> World:
    """Turn a blocked adjacency of ``at`` into a connecting one."""
    at_key, loc = _location(world, at)
    target_key, _ = _location(world, target)
    if target_key not in loc.blocked:
        raise MutationError(f"{target!r} is not blocked from {loc.name!r}")
    new_loc = replace(
        loc,
        blocked=loc.blocked - {target_key},
        connecting=loc.connecting | {target_key},
    )
    return replace(world, locations={**world.locations, at_key: new_loc})


# ---------------------------------------------------------------------------
# World document (file format), canonical serialization, digest


def to_document(world: World) -> dict:
    """Canonical document form: arrays sorted by key, references by display name."""

    def item_name(key: Key) -> str:
        if key not in world.items:
            raise UnknownComponentError(f"dangling item key {key!r}")
        return world.items[key].name

    def location_name(key: Key) -> str:
        if key not in world.locations:
            raise UnknownComponentError(f"dangling location key {key!r}")
        return world.locations[key].name

    if world.player not in world.characters:
        raise UnknownComponentError(f"dangling player key {world.player!r}")

    return {
        "items": [
            {
                "name": it.name,
                "descriptions": list(it.descriptions),
                "gettable": it.gettable,
            }
            for it in (world.items[k] for k in sorted(world.items))
        ],
        "locations": [
            {
                "name": loc.name,
                "descriptions": list(loc.descriptions),
                "items": [item_name(k) for k in sorted(loc.items)],
                "connecting": [location_name(k) for k in sorted(loc.connecting)],
                "blocked": [location_name(k) for k in sorted(loc.blocked)],
            }
            for loc in (world.locations[k] for k in sorted(world.locations))
        ],
        "characters": [
            {
                "name": ch.name,
                "descriptions": list(ch.descriptions),
                "location": location_name(ch.location),
                "inventory": [item_name(k) for k in sorted(ch.inventory)],
            }
            for ch in (world.characters[k] for k in sorted(world.characters))
        ],
        "player": world.characters[world.player].name,
    }


def world_digest(world: World) -> str:
    """Stable hash of the canonical serialization, for audit and non-mutation checks."""
    canonical = json.dumps(to_document(world), sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


_ITEM_FIELDS = {"name", "descriptions", "gettable"}
_LOCATION_FIELDS = {"name", "descriptions", "items", "connecting", "blocked"}
_CHARACTER_FIELDS = {"name", "descriptions", "location", "inventory"}
_TOP_FIELDS = {"items", "locations", "characters", "player"}


def _shape(violations: list[Violation], component: str, detail: str) -> None:
    violations.append(Violation("document-shape", component, detail))


def _str_list(value, component: str, field_name: str, violations: list[Violation]) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        _shape(violations, component, f"{field_name} must be an array of strings")
        return []
    return value


def _entries(doc: dict, section: str, violations: list[Violation]) -> Iterator[dict]:
    value = doc.get(section)
    if not isinstance(value, list):
        _shape(violations, section, "must be an array of objects")
        return
    for entry in value:
        if not isinstance(entry, dict) or not isinstance(entry.get("name"), str):
            _shape(violations, section, f"entry {entry!r} must be an object with a string name")
            continue
        yield entry


def from_document(doc: dict) -> World:
    """Build and validate a world from its document form.

    Name references are resolved case-insensitively. Any problem at all
    aborts the load; the raised error lists every violation found, not just
    the first.
    """
    violations: list[Violation] = []
    if not isinstance(doc, dict):
        raise WorldFileError("world document must be a JSON object")
    extra = set(doc) - _TOP_FIELDS
    missing = _TOP_FIELDS - set(doc)
    if extra:
        _shape(violations, "document", f"unknown top-level keys: {sorted(extra)}")
    if missing:
        _shape(violations, "document", f"missing top-level keys: {sorted(missing)}")

    items: dict[Key, Item] = {}
    locations: dict[Key, Location] = {}
    characters: dict[Key, Character] = {}

    def check_fields(entry: dict, allowed: set[str], kind: str) -> None:
        unknown = set(entry) - allowed
        if unknown:
            _shape(violations, f"{kind} {entry.get('name')!r}", f"unknown keys: {sorted(unknown)}")

    def register(registry: dict, kind: str, name: str) -> bool:
        key = key_of(name)
        if key in registry:
            violations.append(
                Violation("duplicate-name", name, f"{kind} name collides case-insensitively")
            )
            return False
        return True

    for entry in _entries(doc, "items", violations):
        name = entry["name"]
        check_fields(entry, _ITEM_FIELDS, "item")
        if not register(items, "item", name):
            continue
        gettable = entry.get("gettable", False)
        if not isinstance(gettable, bool):
            _shape(violations, name, "gettable must be a boolean")
            gettable = False
        items[key_of(name)] = Item(
            name=name,
            descriptions=tuple(_str_list(entry.get("descriptions", []), name, "descriptions", violations)),
            gettable=gettable,
        )

    for entry in _entries(doc, "locations", violations):
        name = entry["name"]
        check_fields(entry, _LOCATION_FIELDS, "location")
        if not register(locations, "location", name):
            continue
        locations[key_of(name)] = Location(
            name=name,
            descriptions=tuple(_str_list(entry.get("descriptions", []), name, "descriptions", violations)),
            items=frozenset(key_of(n) for n in _str_list(entry.get("items", []), name, "items", violations)),
            connecting=frozenset(
                key_of(n) for n in _str_list(entry.get("connecting", []), name, "connecting", violations)
            ),
            blocked=frozenset(
                key_of(n) for n in _str_list(entry.get("blocked", []), name, "blocked", violations)
            ),
        )

    for entry in _entries(doc, "characters", violations):
        name = entry["name"]
        check_fields(entry, _CHARACTER_FIELDS, "character")
        if not register(characters, "character", name):
            continue
        location = entry.get("location", "")
        if not isinstance(location, str):
            _shape(violations, name, "location must be a string")
            location = ""
        characters[key_of(name)] = Character(
            name=name,
            descriptions=tuple(_str_list(entry.get("descriptions", []), name, "descriptions", violations)),
            location=key_of(location),
            inventory=frozenset(
                key_of(n) for n in _str_list(entry.get("inventory", []), name, "inventory", violations)
            ),
        )

    player = doc.get("player", "")
    if not isinstance(player, str):
        _shape(violations, "player", "player must be a character name")
        player = ""

    world = World(items=items, locations=locations, characters=characters, player=key_of(player))
    violations.extend(validate_world(world))
    if violations:
        raise WorldFileError("world document is invalid", violations)
    return world


def load_world(path: str | Path) -> World:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise WorldFileError(f"cannot read world file {path}: {exc}") from exc
    return from_document(doc)


def save_world(world: World, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(to_document(world), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
