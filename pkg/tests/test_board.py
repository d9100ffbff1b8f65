import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ludoeval.board import (
    BASE,
    LAYOUT,
    GameState,
    IllegalMoveError,
    InvalidPositionError,
    InvalidStateError,
    abs_position,
    adjudicate_by_progress,
    apply_move,
    legal_moves,
    next_player,
    rel_progress,
    validate_state,
    winner,
)

from .conftest import random_state
from .oracle import brute_moves, engine_moves


def test_layout_invariants():
    for p in range(4):
        assert LAYOUT.start(p) in LAYOUT.safe_squares
        assert LAYOUT.home_end(p) - LAYOUT.home_start(p) == 5
        assert LAYOUT.home_start(p) >= 52
    ranges = [set(range(LAYOUT.home_start(p), LAYOUT.home_end(p) + 1)) for p in range(4)]
    assert sum(len(r) for r in ranges) == len(set().union(*ranges)) == 24
    assert all(s < 52 for s in LAYOUT.safe_squares)


@pytest.mark.parametrize("player,pos,expected", [(1, 43, 30), (0, 0, 0), (1, 60, 54), (3, 38, 51), (2, 69, 57)])
def test_rel_progress(player, pos, expected):
    assert rel_progress(player, pos) == expected
    assert abs_position(player, expected) == pos


def test_rel_progress_rejects_foreign_home():
    with pytest.raises(InvalidPositionError):
        rel_progress(0, 60)


def test_capture_vs_safe_moves(cvs_state):
    moves = legal_moves(cvs_state, 1, 6)
    assert [m.token_index for m in moves] == [0, 1, 2, 3]
    cap, safe, out2, out3 = moves
    assert cap.to_pos == 49 and cap.capture_victim == (0, 0)
    assert safe.to_pos == 47 and safe.lands_safe and safe.capture_victim is None
    for m in (out2, out3):
        assert m.is_leave_base and m.to_pos == 13 and m.from_pos == BASE


def test_capture_vs_safe_capture_applied(cvs_state):
    cap = legal_moves(cvs_state, 1, 6)[0]
    after = apply_move(cvs_state, 1, 6, cap)
    assert after.tokens[0] == (-1, -1, -1, -1)
    assert after.tokens[1] == (49, 41, -1, -1)
    assert after.current_player == 1


def test_base_needs_six():
    s = GameState.initial((0, 1))
    assert legal_moves(s, 0, 3) == []
    assert len(legal_moves(s, 0, 6)) == 4


def test_overshoot_excluded():
    s = GameState.from_tokens({0: [55, -1, -1, -1], 1: [-1] * 4}, 0)
    assert legal_moves(s, 0, 3) == []
    assert [m.to_pos for m in legal_moves(s, 0, 2)] == [57]
    assert legal_moves(s, 0, 2)[0].finishes


def test_home_end_may_stack():
    s = GameState.from_tokens({0: [57, 54, -1, -1], 1: [-1] * 4}, 0)
    assert validate_state(s) == []
    (m,) = legal_moves(s, 0, 3)
    assert m.to_pos == 57 and m.finishes


def test_own_block_on_main_track():
    s = GameState.from_tokens({0: [10, 12, -1, -1], 1: [-1] * 4}, 0)
    assert [m.token_index for m in legal_moves(s, 0, 2)] == [1]


def test_safe_square_shared_without_capture():
    s = GameState.from_tokens({0: [5, -1, -1, -1], 1: [8, -1, -1, -1]}, 0)
    (m,) = legal_moves(s, 0, 3)
    assert m.to_pos == 8 and m.capture_victim is None and m.lands_safe


def test_third_party_capture_in_four_player_game():
    s = GameState.from_tokens({0: [3, -1, -1, -1], 1: [-1] * 4, 2: [5, -1, -1, -1], 3: [-1] * 4}, 0)
    (m,) = legal_moves(s, 0, 2)
    assert m.capture_victim == (2, 0)


def test_main_to_home_transition():
    # P1 at relative 50 (square 11); a 4 goes 51 -> 52 (home start 58) -> 59 -> 60
    s = GameState.from_tokens({0: [-1] * 4, 1: [11, -1, -1, -1]}, 1)
    (m,) = legal_moves(s, 1, 4)
    assert m.to_pos == 60 and m.enters_home and m.in_home


def test_apply_rejects_illegal(cvs_state):
    six_move = legal_moves(cvs_state, 1, 6)[1]
    with pytest.raises(IllegalMoveError):
        apply_move(cvs_state, 1, 5, six_move)


def test_legal_moves_validates_state():
    bad = GameState.from_tokens({0: [5, 5, -1, -1], 1: [-1] * 4}, 0)
    with pytest.raises(InvalidStateError):
        legal_moves(bad, 0, 1)
    with pytest.raises(InvalidStateError):
        legal_moves(GameState.initial((0, 1)), 1, 6)


def test_validate_state_messages(cvs_state):
    assert validate_state(cvs_state) == []
    stack = GameState.from_tokens({0: [5, 5, -1, -1], 1: [-1] * 4}, 0)
    assert any("own stacking off home_end" in v for v in validate_state(stack))
    foreign = GameState.from_tokens({0: [60, -1, -1, -1], 1: [-1] * 4}, 0)
    assert any("foreign home range" in v for v in validate_state(foreign))
    clash = GameState.from_tokens({0: [5, -1, -1, -1], 1: [5, -1, -1, -1]}, 0)
    assert validate_state(clash)


def test_next_player():
    two = GameState.initial((0, 1), current_player=1)
    assert next_player(two, 4, True) == 0
    assert next_player(two, 6, True) == 1
    assert next_player(two, 6, False) == 1
    four = GameState.initial((0, 1, 2, 3), current_player=3)
    assert next_player(four, 2, False) == 0
    gap = GameState.initial((0, 2), current_player=2)
    assert next_player(gap, 1) == 0


def test_winner():
    assert winner(GameState.from_tokens({0: [57] * 4, 1: [-1] * 4}, 0)) == 0
    assert winner(GameState.initial()) is None
    assert winner(GameState.from_tokens({0: [57, 57, 57, 56], 1: [-1] * 4}, 0)) is None


def test_adjudication_ties_go_low():
    s = GameState.from_tokens({0: [5, -1, -1, -1], 1: [18, -1, -1, -1]}, 0)
    assert adjudicate_by_progress(s) == 0
    s = GameState.from_tokens({0: [5, -1, -1, -1], 1: [19, -1, -1, -1]}, 0)
    assert adjudicate_by_progress(s) == 1


def test_oracle_on_random_states():
    rng = random.Random(17)
    for _ in range(2000):
        s = random_state(rng)
        for d in range(1, 7):
            assert engine_moves(legal_moves(s, s.current_player, d)) == brute_moves(
                s.token_map(), s.current_player, d
            )


states = st.randoms(use_true_random=False).map(random_state)
dice = st.integers(1, 6)


@settings(max_examples=300, deadline=None)
@given(states, dice)
def test_closure_and_conservation(s, d):
    p = s.current_player
    for m in legal_moves(s, p, d):
        after = apply_move(s, p, d, m)
        assert validate_state(after) == []
        changed = sum(a != b for q in s.players for a, b in zip(s.tokens[q], after.tokens[q]))
        assert changed == (2 if m.capture_victim else 1)
        assert all(len(after.tokens[q]) == 4 for q in s.players)


@settings(max_examples=300, deadline=None)
@given(states, dice)
def test_move_flags(s, d):
    p = s.current_player
    moves = legal_moves(s, p, d)
    assert [m.token_index for m in moves] == sorted(m.token_index for m in moves)
    for m in moves:
        assert m.to_pos <= LAYOUT.home_end(p)
        if m.capture_victim:
            assert m.to_pos < 52 and m.to_pos not in LAYOUT.safe_squares
            q, j = m.capture_victim
            assert s.tokens[q][j] == m.to_pos
        if m.is_leave_base:
            assert m.from_pos == BASE and m.to_pos == LAYOUT.start(p)
        assert m.finishes == (m.to_pos == LAYOUT.home_end(p))
        assert m.lands_safe == (m.to_pos in LAYOUT.safe_squares)


@settings(max_examples=100, deadline=None)
@given(states, dice)
def test_pure(s, d):
    p = s.current_player
    assert legal_moves(s, p, d) == legal_moves(s, p, d)
    for m in legal_moves(s, p, d):
        assert apply_move(s, p, d, m) == apply_move(s, p, d, m)
