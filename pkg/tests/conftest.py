import sys

import pytest

from groklab.config import RunConfig
from groklab.experiments import run_training
from groklab.tasks import make_split


@pytest.fixture(scope="session")
def grok_config():
    """The documented grokking experiment: p=29, add, half split, Gaussian init."""
    return RunConfig()


@pytest.fixture(scope="session")
def grok_run(grok_config):
    return run_training(grok_config, seed=0)


@pytest.fixture(scope="session")
def grok_split(grok_config):
    return make_split(grok_config.task_spec())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key, (ok, detail) in results.items():
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")
