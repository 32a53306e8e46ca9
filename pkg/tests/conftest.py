import shutil
from pathlib import Path

import pytest

from semschema.evolution import TransformSet
from semschema.registry import load_repo

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "semschema" / "fixtures"
REPO_DIR = FIXTURES / "repo"
CHECKS_DIR = FIXTURES / "checks"


@pytest.fixture(scope="session")
def repo_dir() -> Path:
    return REPO_DIR


@pytest.fixture(scope="session")
def checks_dir() -> Path:
    return CHECKS_DIR


@pytest.fixture(scope="session")
def registry():
    """Shared read-only view of the bundled repo; clone() before mutating."""
    return load_repo(REPO_DIR)


@pytest.fixture(scope="session")
def transforms(registry):
    return TransformSet.load(registry, REPO_DIR / "transforms")


@pytest.fixture
def scratch_repo(tmp_path) -> Path:
    """Writable copy of the bundled repo."""
    target = tmp_path / "repo"
    shutil.copytree(REPO_DIR, target)
    return target
