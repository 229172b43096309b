import importlib.resources

import pytest
from hypothesis import given, settings

from fabular.changes import Move, NoChange, Reason, Rejection, Take
from fabular.render import (
    TemplateError,
    TemplateTable,
    default_templates,
    render_changes,
    render_location,
    render_state,
)
from fabular.world import scope_of

from strategies import valid_worlds
from util import character, item, location, world


def two_location_unconnected_world():
    return world(
        items=[item("Gem", "It glitters.", gettable=True)],
        locations=[
            location("Camp", "A ring of stones around cold ashes."),
            location("Cave", items=["Gem"]),
        ],
        characters=[character("Scout", "Quick on their feet.", location="Camp")],
        player="Scout",
    )


# ---------------------------------------------------------------------------
# render_state


def test_character_descriptions_are_verbatim(mary_world):
    rendered = render_state(mary_world, "Player")
    assert "She knows how to cast lightning bolts" in rendered.text
    # inside Mary's block, not the viewpoint's
    mary_block = [line for line in rendered.text.splitlines() if line.startswith("A character called Mary")]
    assert len(mary_block) == 1
    assert "She knows how to cast lightning bolts." in mary_block[0]


def test_item_descriptions_are_verbatim(mansion_world):
    rendered = render_state(mansion_world, "Player")
    assert "It is just a toy and you cannot break anything with it" in rendered.text


def test_unconnected_location_never_mentioned():
    rendered = render_state(two_location_unconnected_world(), "Scout")
    assert "Cave" not in rendered.text
    assert "Gem" not in rendered.text


def test_rendering_is_deterministic(mansion_world):
    a = render_state(mansion_world, "Player")
    b = render_state(mansion_world, "Player")
    assert a.text == b.text
    assert a.mentioned == b.mentioned


def test_rendering_ignores_out_of_scope_content(mansion_world):
    padded = world(
        items=list(mansion_world.items.values()) + [item("Distant relic")],
        locations=list(mansion_world.locations.values())
        + [location("Far tower", "Unreachable.", items=["Distant relic"])],
        characters=list(mansion_world.characters.values()) + [character("Hermit", location="Far tower")],
        player="Player",
    )
    assert render_state(padded, "Player").text == render_state(mansion_world, "Player").text


def test_blocked_exits_are_marked(mansion_world):
    text = render_state(mansion_world, "Player").text
    assert "Kitchen (blocked)" in text


def test_no_blocked_line_when_nothing_blocked(mary_world):
    text = render_state(mary_world, "Player").text
    assert "(blocked)" not in text
    assert "Exits: Meadow." in text


def test_viewpoint_is_rendered_as_you(mary_world):
    text = render_state(mary_world, "Player").text
    assert "You are Player." in text
    assert "You are carrying nothing." in text
    assert "A character called Player" not in text
    # and the other character is named normally, with inventory descriptions
    assert "A character called Mary is here." in text
    assert "Mary is carrying: Apple (It looks ripe.), Sword (It is sharp.)." in text


def test_descriptions_get_terminating_periods():
    w = world(
        locations=[location("Room", "No trailing period here", "Already has one.", "Really?!")],
        characters=[character("Hero", location="Room")],
        player="Hero",
    )
    text = render_state(w, "Hero").text
    assert "No trailing period here." in text
    assert "Already has one." in text
    assert "Really?!" in text and "Really?!." not in text


def test_gettable_sentence_varies():
    w = world(
        items=[item("Pebble", gettable=True), item("Boulder", gettable=False)],
        locations=[location("Field", items=["Pebble", "Boulder"])],
        characters=[character("Hero", location="Field")],
        player="Hero",
    )
    lines = render_state(w, "Hero").text.splitlines()
    pebble = next(l for l in lines if "Pebble" in l)
    boulder = next(l for l in lines if "Boulder" in l)
    assert pebble.endswith("It can be picked up.")
    assert boulder.endswith("It cannot be picked up.")


def test_every_in_scope_description_appears_exactly_once(mansion_world):
    rendered = render_state(mansion_world, "Player")
    scope = scope_of(mansion_world, "Player")
    in_scope = (
        [mansion_world.locations[scope.location]]
        + [mansion_world.items[k] for k in scope.items | scope.carried_items]
        + [mansion_world.characters[k] for k in scope.characters]
    )
    for component in in_scope:
        for description in component.descriptions:
            assert rendered.text.count(description) == 1, description


def test_mentioned_is_within_scope(mansion_world, mary_world):
    for w in (mansion_world, mary_world):
        rendered = render_state(w, "Player")
        scope = scope_of(w, "Player")
        for kind, key in rendered.mentioned:
            assert scope.contains(kind, key)


@given(valid_worlds())
@settings(max_examples=40)
def test_rendering_mentions_stay_in_scope(w):
    rendered = render_state(w, w.player)
    scope = scope_of(w, w.player)
    for kind, key in rendered.mentioned:
        assert scope.contains(kind, key)


def test_render_unknown_viewpoint(mansion_world):
    with pytest.raises(KeyError):
        render_state(mansion_world, "Ghost")


def test_render_location_without_viewpoint(mansion_world):
    rendered = render_location(mansion_world, "Kitchen")
    assert "This is Kitchen." in rendered.text
    assert "Silver spoon" in rendered.text
    assert "You" not in rendered.text


# ---------------------------------------------------------------------------
# render_changes


def test_render_changes_empty_is_empty():
    assert render_changes([], []) == ""


def test_render_changes_one_applied_move():
    text = render_changes([Move(character="Player", destination="Kitchen")], [])
    assert text == "Player moved to Kitchen."


def test_render_changes_rejection_has_name_and_reason():
    rejection = Rejection(
        line='TAKE "bazooka" BY "player"',
        reason=Reason.UNKNOWN_NAME,
        detail="no item named 'bazooka'",
    )
    text = render_changes([], [rejection])
    assert text.count("\n") == 0
    assert "bazooka" in text
    assert "unknown-name" in text


def test_render_changes_applied_then_rejected_order():
    applied = [Take(item="Old key", character="Player"), Move(character="Player", destination="Kitchen")]
    rejected = [Rejection(line="NONE", reason=Reason.PARSE_ERROR, detail="x")]
    lines = render_changes(applied, rejected).splitlines()
    assert lines[0] == "Player picked up Old key."
    assert lines[1] == "Player moved to Kitchen."
    assert lines[2].startswith("Rejected: NONE")


def test_render_changes_none_change_fact():
    assert render_changes([NoChange()], []) == "Nothing in the world changed."


# ---------------------------------------------------------------------------
# template table


def test_template_table_parses_comments_and_blanks():
    table = TemplateTable.from_text("# comment\n\ngreeting = Hello, {name}!\n")
    assert table.render("greeting", name="you") == "Hello, you!"


def test_template_table_missing_key():
    with pytest.raises(TemplateError):
        TemplateTable.from_text("a = b").render("missing")


def test_template_table_bad_line():
    with pytest.raises(TemplateError):
        TemplateTable.from_text("not a template line")


def test_template_table_missing_placeholder_value():
    table = TemplateTable.from_text("x = {who} waves")
    with pytest.raises(TemplateError):
        table.render("x")


def test_default_table_has_all_keys_used_by_renderer():
    table = default_templates()
    for key in (
        "location",
        "location_other",
        "exits",
        "exits_none",
        "blocked_exits",
        "blocked_name",
        "item_intro",
        "item_gettable",
        "item_not_gettable",
        "character_intro",
        "viewpoint_intro",
        "inventory",
        "inventory_empty",
        "inventory_you",
        "inventory_you_empty",
        "inventory_entry",
        "inventory_entry_bare",
        "fact_move",
        "fact_take",
        "fact_drop",
        "fact_give",
        "fact_unblock",
        "fact_none",
        "rejected_change",
    ):
        assert key in table


def test_custom_templates_change_wording(mary_world):
    default_text = (
        importlib.resources.files("fabular").joinpath("data", "templates.txt").read_text(encoding="utf-8")
    )
    table = TemplateTable.from_text(default_text.replace("You are in {name}.", "Standing in {name}."))
    text = render_state(mary_world, "Player", templates=table).text
    assert text.startswith("Standing in Hill.")
