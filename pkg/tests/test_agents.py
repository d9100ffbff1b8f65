import random
from collections import Counter

from ludoeval.agents import heuristic_decide, heuristic_score, random_decide
from ludoeval.board import GameState, legal_moves


def test_random_single_move():
    s = GameState.from_tokens({0: [10, -1, -1, -1], 1: [-1] * 4}, 0)
    rng = random.Random(1)
    assert all(random_decide(s, 0, 3, rng).token_index == 0 for _ in range(50))


def test_random_no_move():
    assert random_decide(GameState.initial(), 0, 2, random.Random(0)) is None


def test_random_is_uniform():
    s = GameState.from_tokens({0: [2, 15, 30, 44], 1: [-1] * 4}, 0)
    assert len(legal_moves(s, 0, 1)) == 4
    rng = random.Random(12345)
    counts = Counter(random_decide(s, 0, 1, rng).token_index for _ in range(100_000))
    for i in range(4):
        assert abs(counts[i] / 100_000 - 0.25) <= 0.01


def test_random_reproducible():
    s = GameState.from_tokens({0: [2, 15, 30, 44], 1: [-1] * 4}, 0)
    a = [random_decide(s, 0, 1, random.Random(7)).token_index for _ in range(5)]
    b = [random_decide(s, 0, 1, random.Random(7)).token_index for _ in range(5)]
    assert a == b


def test_heuristic_scores_capture_vs_safe(cvs_state):
    scores = [heuristic_score(cvs_state, 1, 6, m) for m in legal_moves(cvs_state, 1, 6)]
    assert scores == [136, 54, 50, 50]
    d = heuristic_decide(cvs_state, 1, 6)
    assert d.token_index == 0 and d.value == 136


def test_heuristic_leave_base_tie():
    d = heuristic_decide(GameState.initial((0, 1)), 0, 6)
    assert d.token_index == 0 and d.move.is_leave_base


def test_heuristic_home_path_beats_main_track():
    # token 0 at rel 50 enters home with a 4; token 1 at rel 40 -> 44
    s = GameState.from_tokens({0: [50, 40, -1, -1], 1: [-1] * 4}, 0)
    d = heuristic_decide(s, 0, 4)
    assert d.token_index == 0
    assert d.move.to_pos == 54
    assert d.value == 55  # 52 + (54 - 52 + 1)


def test_heuristic_within_home_path():
    s = GameState.from_tokens({0: [53, -1, -1, -1], 1: [-1] * 4}, 0)
    (m,) = legal_moves(s, 0, 2)
    assert heuristic_score(s, 0, 2, m) == 52 + (55 - 52 + 1)
