# tests/conftest.py - PyTest configuration and shared fixtures

import json
import os
import shutil
import sys
import tempfile

import pytest
from typer.testing import CliRunner

# Add backend/src to path
sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from upg_kolchin.config.settings import RunConfig
from upg_kolchin.core.automorphisms.automorphism import Automorphism
from upg_kolchin.core.graphs.marked_graph import rose
from upg_kolchin.core.graphs.triangular_map import from_automorphism
from upg_kolchin.core.trees.tree_space import SimplicialTree
from upg_kolchin.core.words.word_core import Basis, Word


def W(text: str, rank: int = 4) -> Word:
    """Parse a word in the standard basis a, b, c, d"""
    return Basis.standard(rank).parse(text)


@pytest.fixture
def parse():
    return W


@pytest.fixture(scope="session")
def run_config():
    """Default run bounds"""
    return RunConfig()


@pytest.fixture(scope="session")
def h():
    """a ↦ a, b ↦ ba"""
    return Automorphism.parse(["a", "ba"], ["a", "bA"])


@pytest.fixture(scope="session")
def h1():
    """a ↦ a, b ↦ ba, c ↦ c"""
    return Automorphism.parse(["a", "ba", "c"], ["a", "bA", "c"])


@pytest.fixture(scope="session")
def h2():
    """a ↦ a, b ↦ b, c ↦ Babc"""
    return Automorphism.parse(["a", "b", "Babc"], ["a", "b", "BAbc"])


@pytest.fixture(scope="session")
def staircase():
    """F_3: a ↦ a, b ↦ ba, c ↦ cb"""
    return Automorphism.parse(["a", "ba", "cb"], ["a", "bA", "cB"])


@pytest.fixture(scope="session")
def h_map(h):
    return from_automorphism(h)


@pytest.fixture(scope="session")
def staircase_map(staircase):
    return from_automorphism(staircase)


@pytest.fixture(scope="session")
def t0():
    """Rose with petals a, b, bc; the a-petal collapsed to the vertex ⟨a⟩"""
    host = rose(3, [W("a"), W("b"), W("bc")])
    return SimplicialTree(host, frozenset({1}))


@pytest.fixture(scope="session")
def loop_b_tree():
    """Loop b at the vertex ⟨a⟩"""
    return SimplicialTree(rose(2), frozenset({1}))


@pytest.fixture
def temp_dir():
    """Create temporary directory for test files"""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir)


@pytest.fixture
def cli_runner():
    return CliRunner()


@pytest.fixture
def kolchin_input(temp_dir):
    """Write a kolchin input file and return its path"""
    def _write(payload, name="input.json"):
        path = os.path.join(temp_dir, name)
        with open(path, "w") as f:
            json.dump(payload, f)
        return path
    return _write


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch):
    """Keep KOLCHIN_* variables from the developer shell out of the tests"""
    for key in list(os.environ):
        if key.startswith("KOLCHIN_"):
            monkeypatch.delenv(key, raising=False)
