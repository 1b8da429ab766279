import os

import pytest

from engines.settings import load_config


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running table scans (set DIHEDRALIS_SLOW=1)")


def pytest_collection_modifyitems(config, items):
    if os.getenv("DIHEDRALIS_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set DIHEDRALIS_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def run_config(tmp_path):
    return load_config(cache_dir=str(tmp_path / "cache"), seed=0)
