"""Render the scoped world state as standardized simple sentences.

The rendering is the engine's half of the conversation with the language
model: deterministic, local to what the viewpoint character can see, and
with every free-text description passed through verbatim. All sentence
wording lives in one template table so experiments on phrasing touch a
single file, not code.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path

from .world import Key, World, key_of, scope_of

DEFAULT_TEMPLATES_RESOURCE = "templates.txt"


class TemplateError(ValueError):
    """The template table is missing a key or cannot be parsed."""


@dataclass(frozen=True)
class RenderedState:
    """The standardized text plus the components it mentions.

    ``mentioned`` holds (kind, key) pairs so tests can assert the rendering
    never reaches outside the viewpoint's scope.
    """

    text: str
    mentioned: frozenset[tuple[str, Key]]


class TemplateTable:
    """Keyed sentence templates loaded from a ``key = template`` text file."""

    def __init__(self, mapping: dict[str, str]):
        self._templates = dict(mapping)

    @classmethod
    def from_text(cls, text: str) -> "TemplateTable":
        mapping: dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise TemplateError(f"line {lineno}: expected 'key = template', got {raw!r}")
            key, _, template = line.partition("=")
            mapping[key.strip()] = template.strip()
        return cls(mapping)

    @classmethod
    def from_path(cls, path: str | Path) -> "TemplateTable":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls) -> "TemplateTable":
        text = (
            importlib.resources.files("fabular")
            .joinpath("data", DEFAULT_TEMPLATES_RESOURCE)
            .read_text(encoding="utf-8")
        )
        return cls.from_text(text)

    def __contains__(self, key: str) -> bool:
        return key in self._templates

    def render(self, key: str, **values: str) -> str:
        try:
            template = self._templates[key]
        except KeyError:
            raise TemplateError(f"template table has no key {key!r}") from None
        try:
            return template.format(**values)
        except (KeyError, IndexError) as exc:
            raise TemplateError(f"template {key!r} needs placeholder {exc}") from None


_DEFAULT_TABLE: TemplateTable | None = None


def default_templates() -> TemplateTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = TemplateTable.default()
    return _DEFAULT_TABLE


def _sentence(text: str) -> str:
    return text if text.endswith((".", "!", "?")) else text + "."


def _with_descriptions(lead: str, descriptions: tuple[str, ...]) -> str:
    return " ".join([lead, *(_sentence(d) for d in descriptions)])


def _inventory_entries(world: World, item_keys: list[Key], templates: TemplateTable) -> str:
    entries = []
    for key in item_keys:
        item = world.items[key]
        if item.descriptions:
            descriptions = " ".join(_sentence(d) for d in item.descriptions)
            entries.append(templates.render("inventory_entry", name=item.name, descriptions=descriptions))
        else:
            entries.append(templates.render("inventory_entry_bare", name=item.name))
    return ", ".join(entries)


def render_location(
    world: World,
    location: str,
    viewpoint: str | None = None,
    templates: TemplateTable | None = None,
) -> RenderedState:
    """Standardized rendering of one location and its contents.

    ``viewpoint`` names the character to be addressed as "You"; passing None
    renders a detached view (used when generating content for a location the
    player is not in).
    """
    templates = templates or default_templates()
    loc_key = key_of(location)
    loc = world.locations.get(loc_key)
    if loc is None:
        raise KeyError(f"no location named {location!r}")
    viewpoint_key = key_of(viewpoint) if viewpoint is not None else None

    mentioned: set[tuple[str, Key]] = {("location", loc_key)}
    lines: list[str] = []

    intro_key = "location" if viewpoint_key is not None else "location_other"
    lines.append(_with_descriptions(templates.render(intro_key, name=loc.name), loc.descriptions))

    connecting = sorted(loc.connecting)
    if connecting:
        names = ", ".join(world.locations[k].name for k in connecting)
        lines.append(templates.render("exits", names=names))
    else:
        lines.append(templates.render("exits_none"))
    mentioned.update(("location", k) for k in connecting)

    blocked = sorted(loc.blocked)
    if blocked:
        names = ", ".join(
            templates.render("blocked_name", name=world.locations[k].name) for k in blocked
        )
        lines.append(templates.render("blocked_exits", names=names))
        mentioned.update(("location", k) for k in blocked)

    for item_key in sorted(loc.items):
        item = world.items[item_key]
        pickup = templates.render("item_gettable" if item.gettable else "item_not_gettable")
        intro = templates.render("item_intro", name=item.name)
        lines.append(_with_descriptions(intro, item.descriptions) + " " + pickup)
        mentioned.add(("item", item_key))

    here = [k for k, ch in world.characters.items() if ch.location == loc_key]
    ordered = sorted(here)
    if viewpoint_key in ordered:
        ordered.remove(viewpoint_key)
        ordered.insert(0, viewpoint_key)
    for char_key in ordered:
        ch = world.characters[char_key]
        is_viewpoint = char_key == viewpoint_key
        intro = templates.render("viewpoint_intro" if is_viewpoint else "character_intro", name=ch.name)
        lines.append(_with_descriptions(intro, ch.descriptions))
        carried = sorted(ch.inventory)
        if carried:
            entries = _inventory_entries(world, carried, templates)
            if is_viewpoint:
                lines.append(templates.render("inventory_you", entries=entries))
            else:
                lines.append(templates.render("inventory", name=ch.name, entries=entries))
        else:
            if is_viewpoint:
                lines.append(templates.render("inventory_you_empty"))
            else:
                lines.append(templates.render("inventory_empty", name=ch.name))
        mentioned.add(("character", char_key))
        mentioned.update(("item", k) for k in carried)

    return RenderedState(text="\n".join(lines), mentioned=frozenset(mentioned))


def render_state(
    world: World, viewpoint: str, templates: TemplateTable | None = None
) -> RenderedState:
    """Render what ``viewpoint`` can see, addressing that character as "You"."""
    scope = scope_of(world, viewpoint)  # also validates the viewpoint
    rendered = render_location(world, scope.location, viewpoint=viewpoint, templates=templates)
    return rendered


def _changes_module():
    # Imported lazily: changes.py needs nothing from here, but the fact
    # templates need change payloads, and a top-level import would cycle.
    from . import changes

    return changes


def render_change_fact(change, templates: TemplateTable | None = None) -> str:
    """One applied change phrased as a completed fact."""
    templates = templates or default_templates()
    changes = _changes_module()
    if isinstance(change, changes.Move):
        return templates.render("fact_move", character=change.character, destination=change.destination)
    if isinstance(change, changes.Take):
        return templates.render("fact_take", character=change.character, item=change.item)
    if isinstance(change, changes.Drop):
        return templates.render("fact_drop", character=change.character, item=change.item)
    if isinstance(change, changes.Give):
        return templates.render(
            "fact_give", giver=change.giver, item=change.item, receiver=change.receiver
        )
    if isinstance(change, changes.Unblock):
        return templates.render("fact_unblock", location=change.location, target=change.target)
    if isinstance(change, changes.NoChange):
        return templates.render("fact_none")
    raise TypeError(f"not a world change: {change!r}")


def render_changes(applied, rejected, templates: TemplateTable | None = None) -> str:
    """One line per change: applied ones as facts, rejected ones with reasons."""
    templates = templates or default_templates()
    lines = [render_change_fact(change, templates) for change in applied]
    for rejection in rejected:
        lines.append(
            templates.render(
                "rejected_change",
                line=rejection.line,
                reason=rejection.reason.value,
                detail=rejection.detail,
            )
        )
    return "\n".join(lines)
