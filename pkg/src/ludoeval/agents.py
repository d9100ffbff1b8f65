"""Baseline policies: uniform random and the greedy one-step heuristic.

The depth-limited search agent lives in :mod:`ludoeval.search`. Every
``decide`` function returns ``None`` when the roll leaves no legal move; the
caller passes the turn.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .board import LAYOUT, BoardLayout, GameState, Move, legal_moves, rel_progress

LEAVE_BASE_SCORE = 50
CAPTURE_BONUS = 100
SAFE_BONUS = 20


@dataclass(frozen=True)
class Decision:
    move: Move
    value: float | None = None
    rationale: str | None = None

    @property
    def token_index(self) -> int:
        return self.move.token_index


def random_decide(state: GameState, player: int, dice: int, rng: random.Random) -> Decision | None:
    moves = legal_moves(state, player, dice)
    if not moves:
        return None
    return Decision(moves[rng.randrange(len(moves))], rationale="uniform random legal move")


def heuristic_score(
    state: GameState, player: int, dice: int, move: Move, layout: BoardLayout = LAYOUT
) -> float:
    if move.is_leave_base:
        # fixed; the start square being safe earns no bonus
        return LEAVE_BASE_SCORE
    if move.in_home:
        score = layout.main_track_len + (move.to_pos - layout.home_start(player) + 1)
    else:
        score = rel_progress(player, move.from_pos, layout) + dice
    if move.capture_victim is not None:
        score += CAPTURE_BONUS
    if move.lands_safe:
        score += SAFE_BONUS
    return score


def heuristic_decide(
    state: GameState, player: int, dice: int, layout: BoardLayout = LAYOUT
) -> Decision | None:
    best = None
    best_score = None
    for move in legal_moves(state, player, dice, layout):
        score = heuristic_score(state, player, dice, move, layout)
        # strict comparison keeps the lowest token index on ties
        if best_score is None or score > best_score:
            best, best_score = move, score
    if best is None:
        return None
    return Decision(best, float(best_score), f"highest heuristic score {best_score}")
