"""Compact world builders and independent oracles shared across the tests."""

from __future__ import annotations

from fabular.world import Character, Item, Location, World, key_of


def item(name, *descriptions, gettable=False):
    return Item(name=name, descriptions=tuple(descriptions), gettable=gettable)


def location(name, *descriptions, items=(), connecting=(), blocked=()):
    return Location(
        name=name,
        descriptions=tuple(descriptions),
        items=frozenset(key_of(n) for n in items),
        connecting=frozenset(key_of(n) for n in connecting),
        blocked=frozenset(key_of(n) for n in blocked),
    )


def character(name, *descriptions, location="", inventory=()):
    return Character(
        name=name,
        descriptions=tuple(descriptions),
        location=key_of(location),
        inventory=frozenset(key_of(n) for n in inventory),
    )


def world(items=(), locations=(), characters=(), player=""):
    return World(
        items={key_of(i.name): i for i in items},
        locations={key_of(l.name): l for l in locations},
        characters={key_of(c.name): c for c in characters},
        player=key_of(player),
    )


def naive_scope(w, viewpoint):
    """Scope by brute-force enumeration of the definition, as plain name sets.

    Deliberately independent of fabular's scope_of implementation: walk every
    registry and collect what the definition says should be visible.
    """
    view = w.characters[key_of(viewpoint)]
    loc_key = view.location
    visible_items = set()
    visible_chars = set()
    for k, loc in w.locations.items():
        if k == loc_key:
            visible_items |= set(loc.items)
    for k, ch in w.characters.items():
        if ch.location == loc_key:
            visible_chars.add(k)
            visible_items |= set(ch.inventory)
    adjacent = set(w.locations[loc_key].connecting) | set(w.locations[loc_key].blocked)
    return {
        "location": loc_key,
        "items": visible_items,
        "characters": visible_chars,
        "adjacent_names": adjacent,
    }
