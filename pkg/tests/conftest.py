import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from config import settings
from src.core.graph_core import load_graph, load_patterns, parse_graph


@pytest.fixture(scope="session")
def corpus():
    """Load a bundled graph by file stem."""
    root = Path(settings.corpus_path)

    def load(name: str):
        return load_graph(root / f"{name}.graph")

    return load


@pytest.fixture(scope="session")
def patterns():
    return load_patterns()


@pytest.fixture
def rng():
    return random.Random(settings.seed)


@pytest.fixture
def path3():
    return parse_graph("v 0\nv 1\nv 2\ne 0 1\ne 1 2\n", "P3")


@pytest.fixture
def clean_settings():
    """Undo budget and braid index overrides pushed by the CLI."""
    saved = dict(vars(settings))
    yield settings
    vars(settings).clear()
    vars(settings).update(saved)
