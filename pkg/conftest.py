"""Shared fixtures: small named networks and seeded random ones."""

import json
from pathlib import Path

import pytest

from secalloc.dynamics import build_system
from secalloc.graph import generate_erdos_renyi, make_network, to_document


PINS_PATH = Path(__file__).resolve().parent / "regression_pins.json"


def pytest_addoption(parser):
    parser.addoption("--update-pins", action="store_true", default=False,
                     help="Re-record the seeded regression values in regression_pins.json")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-scale protocol runs (deselect with -m 'not slow')")


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for name in ("SECALLOC_WORKERS", "SECALLOC_SEED", "SECALLOC_OUT"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def p3():
    """Path 1 - 2 - 3 with θ = 0.5 and δ = 1."""
    return make_network(3, [(0, 1), (1, 2)])


@pytest.fixture
def k3():
    return make_network(3, [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def star():
    """Star with center 1 and four leaves."""
    return make_network(5, [(0, 1), (0, 2), (0, 3), (0, 4)])


@pytest.fixture
def p3_system(p3):
    return build_system(p3)


@pytest.fixture
def er_small():
    return generate_erdos_renyi(6, 0.5, 3)


@pytest.fixture
def network_file(tmp_path, p3):
    def write(net=None, name="network.json"):
        path = tmp_path / name
        path.write_text(json.dumps(to_document(net if net is not None else p3)))
        return path
    return write


class Pins:
    """Seeded regression values recorded in regression_pins.json.

    A key seen for the first time (or any key under --update-pins) is
    recorded; afterwards the value must not move.
    """

    def __init__(self, path: Path, update: bool):
        self.path = path
        self.update = update
        self.values = json.loads(path.read_text()) if path.exists() else {}
        self.dirty = False

    def check(self, key: str, value, rel: float = 1e-9):
        value = json.loads(json.dumps(value))
        if self.update or key not in self.values:
            if self.values.get(key) != value:
                self.values[key] = value
                self.dirty = True
            return
        assert value == pytest.approx(self.values[key], rel=rel), \
            f"{key} moved from its recorded value {self.values[key]}"

    def save(self):
        if self.dirty:
            self.path.write_text(json.dumps(self.values, indent=2, sort_keys=True) + "\n")


@pytest.fixture(scope="session")
def pins(request):
    store = Pins(PINS_PATH, request.config.getoption("--update-pins"))
    yield store
    store.save()
