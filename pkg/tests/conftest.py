import random

import pytest

from ludoeval.board import GameState
from ludoeval.spots import SpotScenario

SAFE = {0, 8, 13, 21, 26, 34, 39, 47}


def random_state(rng: random.Random, players=None, current=None) -> GameState:
    """A valid state built by placing tokens one at a time around conflicts."""
    if players is None:
        players = tuple(sorted(rng.sample(range(4), rng.choice((2, 3, 4)))))
    taken: dict[int, int] = {}  # main square -> owner, for non-safe squares
    tokens = {}
    for p in players:
        home_first = 52 + 6 * p
        mine: list[int] = []
        for _ in range(4):
            kind = rng.random()
            if kind < 0.25:
                mine.append(-1)
                continue
            if kind < 0.4:
                free = [h for h in range(home_first, home_first + 6) if h not in mine or h == home_first + 5]
            else:
                free = [s for s in range(52) if s not in mine and (s in SAFE or taken.get(s) in (None, p))]
            pos = rng.choice(free)
            mine.append(pos)
            if pos < 52 and pos not in SAFE:
                taken[pos] = p
        tokens[p] = mine
    if current is None:
        current = rng.choice(players)
    return GameState.from_tokens(tokens, current, players)


CVS_SAMPLE = {
    "id": "cvs_2p_001",
    "scenario": "capture_vs_safe",
    "players": [0, 1],
    "llm_player_id": 1,
    "current_player": 1,
    "dice": 6,
    "tokens": {"0": [49, -1, -1, -1], "1": [43, 41, -1, -1]},
    "note": "One capture option and one safe-square option.",
}


@pytest.fixture
def cvs_spot():
    return SpotScenario.from_dict(CVS_SAMPLE)


@pytest.fixture
def cvs_state(cvs_spot):
    return cvs_spot.state


def pytest_terminal_summary(terminalreporter):
    from .acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
