import pathlib

import pytest

from intentbus.assets import AssetResolver, fetch_manifest
from intentbus.broker import Broker
from intentbus.registry import Registry

REPO_ROOT = pathlib.Path(__file__).resolve().parents[1]
TESTDATA = REPO_ROOT / "testdata"
GOLDEN = TESTDATA / "golden"
SCENARIOS = REPO_ROOT / "scenarios"
ROBOT_MANIFEST = TESTDATA / "repo" / "robots" / "manifest.json"
OBJECT_MANIFEST = TESTDATA / "repo" / "objects" / "manifest.json"


@pytest.fixture
def broker() -> Broker:
    return Broker()


@pytest.fixture
def registry(broker) -> Registry:
    return Registry(broker)


@pytest.fixture(scope="session")
def robot_manifest():
    return fetch_manifest(str(ROBOT_MANIFEST))


@pytest.fixture(scope="session")
def object_manifest():
    return fetch_manifest(str(OBJECT_MANIFEST))


@pytest.fixture(scope="session")
def resolver(robot_manifest) -> AssetResolver:
    return AssetResolver(robot_manifest)
