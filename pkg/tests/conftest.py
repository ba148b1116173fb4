import json
from pathlib import Path

import pytest

from admissible.arena import MooreStrategy, parse_arena
from admissible.objectives import normalize

DATA = Path(__file__).resolve().parents[1] / "src" / "admissible" / "data"


def load_strategy(name: str) -> MooreStrategy:
    return MooreStrategy.from_json(json.loads((DATA / f"{name}.json").read_text()))


@pytest.fixture(scope="session")
def running():
    return parse_arena((DATA / "running.game").read_text())


@pytest.fixture(scope="session")
def running_norm(running):
    return normalize(running)


@pytest.fixture(scope="session")
def sigmas():
    return {k: load_strategy(k) for k in ("sigma1", "sigma2", "sigma3", "sigma3prime")}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}



@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when not in ("setup", "call"):
        return
    number, title = mark.args
    results = item.config._criteria
    if report.failed or (report.when == "call" and number not in results):
        results[number] = ("PASS" if report.passed else "FAIL", title)


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_criteria", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        verdict, title = results[number]
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {title}")
