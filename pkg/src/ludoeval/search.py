"""Depth-limited expectiminimax (2 players) and Expectimax-MaxN (3-4 players).

Decision nodes alternate with chance nodes that average over the six die
faces. Depth counts decision plies and drops by one on every decision to
chance step, including extra-turn chains after a six, so repeated sixes
cannot recurse forever. At depth zero a linear evaluator scores the board.

Two-player values are scalars from the root player's point of view; with
more players every value is a tuple with one entry per active player, in
``state.players`` order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from .agents import Decision
from .board import (
    BASE,
    LAYOUT,
    BoardLayout,
    GameState,
    _apply,
    _moves,
    legal_moves,
    winner,
)

Value = Union[float, tuple[float, ...]]


@dataclass(frozen=True)
class EvalWeights:
    progress: float = 0.0025
    finished: float = 0.20
    base: float = 0.05
    safe: float = 0.01

    def __post_init__(self):
        for name in ("progress", "finished", "base", "safe"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"weight {name} must be finite")


@dataclass(frozen=True)
class SearchConfig:
    depth: int = 2
    weights: EvalWeights = field(default_factory=EvalWeights)
    clip: float = 0.999
    memo_enabled: bool = True

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if not 0 < self.clip < 1:
            raise ValueError("clip must lie in (0, 1)")


class MemoKey(NamedTuple):
    node_kind: str  # "chance" or "decision"
    fingerprint: tuple
    player: int
    dice: int | None
    depth: int


class MemoCache:
    """Transposition table for one root decision."""

    def __init__(self):
        self._table: dict[MemoKey, Value] = {}
        self.hits = 0
        self.misses = 0

    def get(self, key: MemoKey) -> Value | None:
        value = self._table.get(key)
        if value is None:
            self.misses += 1
        else:
            self.hits += 1
        return value

    def put(self, key: MemoKey, value: Value) -> None:
        self._table[key] = value

    def __len__(self):
        return len(self._table)


def memo_get(cache: MemoCache, key: MemoKey) -> Value | None:
    return cache.get(key)


def memo_put(cache: MemoCache, key: MemoKey, value: Value) -> None:
    cache.put(key, value)


def feature_counts(state: GameState, player: int, layout: BoardLayout = LAYOUT) -> tuple[int, int, int, int]:
    """(progress, finished, in base, on safe squares) for one player.

    Progress sums relative progress over tokens out of base; a finished token
    contributes its full 57.
    """
    start = layout.start(player)
    hs = layout.home_start(player)
    he = hs + 5
    n = layout.main_track_len
    safe_squares = layout.safe_squares
    prog = fin = base = safe = 0
    for pos in state.tokens[player]:
        if pos == BASE:
            base += 1
        elif pos < n:
            prog += (pos - start) % n
            if pos in safe_squares:
                safe += 1
        else:
            prog += n + pos - hs
            if pos == he:
                fin += 1
    return prog, fin, base, safe


def _clip(x: float, bound: float) -> float:
    if x > bound:
        return bound
    if x < -bound:
        return -bound
    return x


def _raw_2p(config: SearchConfig, state: GameState, root: int, layout: BoardLayout) -> float:
    opp = state.players[1] if state.players[0] == root else state.players[0]
    rp, rf, rb, rs = feature_counts(state, root, layout)
    op, of, ob, os_ = feature_counts(state, opp, layout)
    w = config.weights
    return w.progress * (rp - op) + w.finished * (rf - of) - w.base * (rb - ob) + w.safe * (rs - os_)


def evaluate_2p(
    config: SearchConfig, state: GameState, root: int, layout: BoardLayout = LAYOUT
) -> float:
    """Static value of ``state`` for ``root``, clipped.

    Terminal states are scored like any other; the search itself substitutes
    the terminal value before ever reaching the evaluator.
    """
    if len(state.players) != 2:
        raise ValueError("evaluate_2p needs exactly two active players")
    return _clip(_raw_2p(config, state, root, layout), config.clip)


def _raw_maxn(config: SearchConfig, state: GameState, layout: BoardLayout) -> list[float]:
    w = config.weights
    raw = []
    for p in state.players:
        prog, fin, base, safe = feature_counts(state, p, layout)
        raw.append(w.progress * prog + w.finished * fin - w.base * base + w.safe * safe)
    if all(r == raw[0] for r in raw):
        return [0.0] * len(raw)  # sum/n can round away from the common value
    mean = math.fsum(raw) / len(raw)
    return [r - mean for r in raw]


def evaluate_maxn(
    config: SearchConfig, state: GameState, layout: BoardLayout = LAYOUT, clip: bool = True
) -> tuple[float, ...]:
    if len(state.players) < 3:
        raise ValueError("evaluate_maxn needs 3 or 4 active players; use evaluate_2p")
    centered = _raw_maxn(config, state, layout)
    if not clip:
        return tuple(centered)
    return tuple(_clip(c, config.clip) for c in centered)


def terminal_value(state: GameState, won_by: int, root: int) -> Value:
    if len(state.players) == 2:
        return 1.0 if won_by == root else -1.0
    loser = -1.0 / (len(state.players) - 1)
    return tuple(1.0 if p == won_by else loser for p in state.players)


class Searcher:
    """Mutually recursive chance/decision evaluation for one root player."""

    def __init__(
        self,
        config: SearchConfig,
        root: int,
        layout: BoardLayout = LAYOUT,
        cache: MemoCache | None = None,
    ):
        self.config = config
        self.root = root
        self.layout = layout
        if cache is None and config.memo_enabled:
            cache = MemoCache()
        self.cache = cache if config.memo_enabled else None
        self.decision_nodes = 0

    def evaluate(self, state: GameState) -> Value:
        if len(state.players) == 2:
            return _clip(_raw_2p(self.config, state, self.root, self.layout), self.config.clip)
        return tuple(_clip(c, self.config.clip) for c in _raw_maxn(self.config, state, self.layout))

    def chance(self, state: GameState, player: int, depth: int) -> Value:
        state = state.with_current(player)
        key = None
        if self.cache is not None:
            key = MemoKey("chance", state.fingerprint(), player, None, depth)
            hit = self.cache.get(key)
            if hit is not None:
                return hit
        won_by = winner(state, self.layout)
        if won_by is not None:
            value = terminal_value(state, won_by, self.root)
        elif depth <= 0:
            value = self.evaluate(state)
        else:
            outcomes = [self.decision(state, player, d, depth) for d in range(1, 7)]
            value = mean_value(outcomes)
        if key is not None:
            self.cache.put(key, value)
        return value

    def successors(self, state: GameState, player: int, dice: int):
        """(move, successor state, next mover) for each legal move."""
        players = state.players
        nxt = player if dice == 6 else players[(players.index(player) + 1) % len(players)]
        for move in _moves(state, player, dice, self.layout):
            yield move, _apply(state, player, move).with_current(nxt), nxt

    def decision(self, state: GameState, player: int, dice: int, depth: int) -> Value:
        state = state.with_current(player)
        key = None
        if self.cache is not None:
            key = MemoKey("decision", state.fingerprint(), player, dice, depth)
            hit = self.cache.get(key)
            if hit is not None:
                return hit
        self.decision_nodes += 1
        best = None
        best_key = None
        two_player = len(state.players) == 2
        idx = state.players.index(player)
        maximize = player == self.root
        for _, child, nxt in self.successors(state, player, dice):
            v = self.chance(child, nxt, depth - 1)
            if two_player:
                k = v if maximize else -v
            else:
                k = v[idx]
            if best_key is None or k > best_key:
                best, best_key = v, k
        if best is None:
            # forced pass: board unchanged, turn moves on per the dice
            players = state.players
            nxt = player if dice == 6 else players[(idx + 1) % len(players)]
            best = self.chance(state.with_current(nxt), nxt, depth - 1)
        if key is not None:
            self.cache.put(key, best)
        return best


def mean_value(outcomes: list[Value]) -> Value:
    """Arithmetic mean of the six per-die values."""
    if isinstance(outcomes[0], tuple):
        n = len(outcomes[0])
        return tuple(sum(v[i] for v in outcomes) / 6 for i in range(n))
    return sum(outcomes) / 6


def chance_value(
    config: SearchConfig,
    state: GameState,
    player: int,
    depth: int,
    root: int | None = None,
    layout: BoardLayout = LAYOUT,
    cache: MemoCache | None = None,
) -> Value:
    """Expected value over the next roll of ``player``; ``root`` defaults to ``player``."""
    search = Searcher(config, player if root is None else root, layout, cache)
    return search.chance(state, player, depth)


def decision_value(
    config: SearchConfig,
    state: GameState,
    player: int,
    dice: int,
    depth: int,
    root: int | None = None,
    layout: BoardLayout = LAYOUT,
    cache: MemoCache | None = None,
) -> Value:
    if depth < 1:
        raise ValueError("decision_value needs depth >= 1")
    search = Searcher(config, player if root is None else root, layout, cache)
    return search.decision(state, player, dice, depth)


def root_values(
    config: SearchConfig, state: GameState, player: int, dice: int, layout: BoardLayout = LAYOUT
) -> list[tuple]:
    """(move, value) for every root move, values seen from ``player``."""
    search = Searcher(config, player, layout)
    search.decision_nodes = 1
    out = []
    state = state.with_current(player)
    idx = state.players.index(player)
    for move, child, nxt in search.successors(state, player, dice):
        v = search.chance(child, nxt, config.depth - 1)
        out.append((move, v if isinstance(v, float) else v[idx]))
    return out


def gt_decide(
    config: SearchConfig, state: GameState, player: int, dice: int, layout: BoardLayout = LAYOUT
) -> Decision | None:
    """Best root move for ``player``; ties go to the lowest token index."""
    legal_moves(state, player, dice, layout)  # validates the root state
    best = None
    for move, value in root_values(config, state, player, dice, layout):
        if best is None or value > best[1]:
            best = (move, value)
    if best is None:
        return None
    mode = "expectiminimax" if len(state.players) == 2 else "expectimax-maxn"
    return Decision(best[0], float(best[1]), f"{mode} depth {config.depth}, value {best[1]:+.4f}")
