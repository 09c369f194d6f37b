import pytest

from robosec.harness import learn_map
from robosec.scenario import builtin


@pytest.fixture(scope="session")
def door_rooms():
    return builtin("door_rooms")


@pytest.fixture(scope="session")
def cabinet_room():
    return builtin("cabinet_room")


@pytest.fixture(scope="session")
def map_door(door_rooms):
    return learn_map(door_rooms)


@pytest.fixture(scope="session")
def map_cabinet(cabinet_room):
    return learn_map(cabinet_room)
