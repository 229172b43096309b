import json
from pathlib import Path

import pytest

from fabular.world import load_world

ROOT = Path(__file__).resolve().parents[1]
WORLDS = ROOT / "worlds"
SCRIPTS = ROOT / "scripts"


@pytest.fixture
def mansion_world():
    return load_world(WORLDS / "mansion.json")


@pytest.fixture
def mary_world():
    return load_world(WORLDS / "mary.json")


@pytest.fixture
def mansion_path():
    return WORLDS / "mansion.json"


@pytest.fixture
def bazooka_script():
    return json.loads((SCRIPTS / "bazooka.script").read_text(encoding="utf-8"))


@pytest.fixture
def tour_script():
    return json.loads((SCRIPTS / "tour.script").read_text(encoding="utf-8"))
