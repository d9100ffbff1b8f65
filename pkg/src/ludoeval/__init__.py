"""Ludo engine, baseline agents and a spot-suite harness for model evaluation."""

from .board import GameState, Move, legal_moves, apply_move, next_player, winner
from .search import SearchConfig, EvalWeights, gt_decide
from .spots import SpotScenario, generate_corpus, load_spots, validate_spot

__version__ = "0.1.0"

__all__ = [
    "GameState",
    "Move",
    "legal_moves",
    "apply_move",
    "next_player",
    "winner",
    "SearchConfig",
    "EvalWeights",
    "gt_decide",
    "SpotScenario",
    "generate_corpus",
    "load_spots",
    "validate_spot",
]
