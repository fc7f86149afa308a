from __future__ import annotations

import pytest

from codenames_bench import game
from codenames_bench.game import Board, Identity

SEED0_WORDS = {
    "alien", "battery", "berlin", "boot", "calf", "card", "centaur", "cliff", "cricket",
    "field", "file", "fire", "force", "icecream", "lion", "net", "rock", "school", "spell",
    "table", "tower", "unicorn", "wake", "washer", "web",
}


@pytest.fixture(scope="session")
def wordlist() -> list[str]:
    return game.load_wordlist()


@pytest.fixture(scope="session")
def seed0_board(wordlist) -> Board:
    return game.generate_board(wordlist, 0)


def small_board() -> Board:
    """Six cards: 2 red, 2 blue, 1 civilian, 1 assassin."""
    return Board.from_pairs([
        ("apple", Identity.RED), ("bread", Identity.RED),
        ("chair", Identity.BLUE), ("dress", Identity.BLUE),
        ("eagle", Identity.CIVILIAN), ("flute", Identity.ASSASSIN),
    ])


# --- acceptance reporting -----------------------------------------------------

_criteria: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion id")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    n, title = marker.args
    entry = _criteria.setdefault(n, (title, []))
    entry[1].append("pass" if rep.passed else ("skip" if rep.skipped else "fail"))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, results = _criteria[n]
        status = "PASS" if results and all(r == "pass" for r in results) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status} - {title}")
