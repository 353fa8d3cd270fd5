from __future__ import annotations

from pathlib import Path

import pytest

from textkg.gateway import FixtureBackend, request_digest
from textkg.prompts import TemplateSet, render_messages

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURES_DIR = REPO_ROOT / "fixtures"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def templates() -> TemplateSet:
    return TemplateSet.load()


def script(backend: FixtureBackend, template, response: str, system=None, user=None) -> None:
    """Register a scripted response for the exact request the code will render."""
    messages = render_messages(template, system, user)
    backend.responses[request_digest(messages)] = response


# ---------------------------------------------------------------------------
# Acceptance criteria reporting: one pass/fail line per criterion at the end
# of the run.
# ---------------------------------------------------------------------------

_acceptance_results: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        name = marker.args[0] if marker.args else item.name
        _acceptance_results[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _acceptance_results.items():
        terminalreporter.write_line(f"{status}  {name}")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): acceptance criterion test")
