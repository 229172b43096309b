import json

import pytest

from fabular.gateway import BackendConfig, GenerationError, ScriptedBackend
from fabular.generation import (
    ItemGenerationError,
    ItemReplyError,
    generate_item,
    parse_item_reply,
    place_new_item,
)
from fabular.session import Session
from fabular.world import Item, UnknownComponentError, validate_world, world_digest


def item_session(world, replies):
    config = BackendConfig(kind="scripted")
    backend = ScriptedBackend({"item-generation": replies})
    return Session(world=world, backend=backend, config=config)


RUSTY_KEY = '{"name":"Rusty Key","descriptions":["It opens old locks."],"gettable":true}'


# ---------------------------------------------------------------------------
# reply parsing


def test_parse_valid_reply():
    data = parse_item_reply(RUSTY_KEY)
    assert data == {"name": "Rusty Key", "descriptions": ["It opens old locks."], "gettable": True}


def test_parse_reply_strips_code_fences():
    fenced = f"```json\n{RUSTY_KEY}\n```"
    assert parse_item_reply(fenced)["name"] == "Rusty Key"


def test_parse_reply_tolerates_surrounding_prose():
    chatty = f"Here is your item!\n{RUSTY_KEY}\nHope you like it."
    assert parse_item_reply(chatty)["name"] == "Rusty Key"


@pytest.mark.parametrize(
    "reply",
    [
        '{"name":""}',
        '{"name":"X","descriptions":[],"gettable":true}',
        '{"name":"X","descriptions":[""],"gettable":true}',
        '{"name":"X","descriptions":["ok"],"gettable":"yes"}',
        '{"name":"X","descriptions":["ok"],"gettable":1}',
        '{"name":"X","descriptions":["ok"],"gettable":true,"extra":1}',
        '{"name":"X","descriptions":["ok"]}',
        '{"name":"has \\"quote\\"","descriptions":["ok"],"gettable":true}',
        '["not","an","object"]',
        "no json at all",
        '{"name": unparseable}',
    ],
)
def test_parse_invalid_replies(reply):
    with pytest.raises(ItemReplyError):
        parse_item_reply(reply)


# ---------------------------------------------------------------------------
# placement


def test_place_new_item_is_all_or_nothing(mansion_world):
    new_item = Item(name="Rusty Key", descriptions=("It opens old locks.",), gettable=True)
    after = place_new_item(mansion_world, new_item, "Kitchen")
    assert "rusty key" in after.locations["kitchen"].items
    assert validate_world(after) == []
    assert "rusty key" not in mansion_world.items  # original untouched
    with pytest.raises(ValueError):
        place_new_item(after, new_item, "Kitchen")
    with pytest.raises(UnknownComponentError):
        place_new_item(mansion_world, new_item, "Atlantis")


# ---------------------------------------------------------------------------
# generate_item


def test_generate_item_success(mansion_world):
    session = item_session(mansion_world, [RUSTY_KEY])
    item = generate_item(session, "Kitchen")
    assert item.name == "Rusty Key"
    assert "rusty key" in session.world.locations["kitchen"].items
    assert validate_world(session.world) == []


def test_generated_item_behaves_like_an_authored_one(mansion_world):
    from fabular.changes import Take, apply_changes

    session = item_session(mansion_world, [RUSTY_KEY])
    generate_item(session, "Mansion hall")
    after, applied, rejections = apply_changes(
        session.world, [Take(item="Rusty Key", character="Player")]
    )
    assert rejections == []
    assert "rusty key" in after.characters["player"].inventory


def test_invalid_replies_exhaust_retries_without_mutation(mansion_world):
    digest = world_digest(mansion_world)
    session = item_session(mansion_world, ['{"name":""}'] * 3)
    with pytest.raises(ItemGenerationError) as excinfo:
        generate_item(session, "Kitchen", retries=2)
    assert "3 attempts" in str(excinfo.value)
    assert world_digest(session.world) == digest


def test_name_collision_is_retried_then_fails(mansion_world):
    collision = '{"name":"green hammer","descriptions":["Another toy."],"gettable":true}'
    session = item_session(mansion_world, [collision] * 3)
    with pytest.raises(ItemGenerationError) as excinfo:
        generate_item(session, "Mansion hall", retries=2)
    assert "already exists" in str(excinfo.value)
    assert len(session.world.items) == len(mansion_world.items)


def test_retry_recovers_from_one_bad_reply(mansion_world):
    session = item_session(mansion_world, ["not json", RUSTY_KEY])
    item = generate_item(session, "Kitchen", retries=1)
    assert item.name == "Rusty Key"


def test_backend_failure_aborts_immediately(mansion_world):
    digest = world_digest(mansion_world)
    session = item_session(mansion_world, [])  # empty queue: backend failure
    with pytest.raises(GenerationError):
        generate_item(session, "Kitchen")
    assert world_digest(session.world) == digest


def test_unknown_location_is_an_error(mansion_world):
    session = item_session(mansion_world, [RUSTY_KEY])
    with pytest.raises(UnknownComponentError):
        generate_item(session, "Atlantis")


def test_generation_respects_session_lock(mansion_world):
    session = item_session(mansion_world, [RUSTY_KEY])
    with session.exclusive():
        from fabular.session import SessionBusyError

        with pytest.raises(SessionBusyError):
            generate_item(session, "Kitchen")


def test_retries_parametrized_attempt_count(mansion_world):
    session = item_session(mansion_world, ["bad"] * 5 + [RUSTY_KEY])
    with pytest.raises(ItemGenerationError):
        generate_item(session, "Kitchen", retries=0)
    item = generate_item(session, "Kitchen", retries=4)
    assert item.name == "Rusty Key"
