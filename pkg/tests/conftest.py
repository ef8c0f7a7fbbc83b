import dataclasses
from pathlib import Path

import pytest

from intersim import load_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="session")
def batch_base():
    return load_config(CONFIGS / "batch_base.yaml")


@pytest.fixture(scope="session")
def fixture_configs():
    return {name: load_config(CONFIGS / f"fixture_{name}.yaml")
            for name in ("nosc", "rss", "sc")}


@pytest.fixture()
def configs_dir():
    return CONFIGS


def replace(obj, **kw):
    return dataclasses.replace(obj, **kw)
