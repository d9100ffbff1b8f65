"""Ludo board model, move generation and state transitions.

Positions are encoded as plain integers:

* ``-1``                 token is in base
* ``0..51``              absolute square on the shared main track
* ``home_start..home_end``  the owner's private home path (P0 52-57, P1 58-63, ...)

A token at its owner's ``home_end`` is finished. Every function here is pure;
``GameState`` and ``Move`` are immutable and hashable.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

BASE = -1
MAIN_TRACK_LEN = 52
HOME_LEN = 6
FINISH_PROGRESS = MAIN_TRACK_LEN + HOME_LEN - 1  # 57
TOKENS_PER_PLAYER = 4
ALL_PLAYERS = (0, 1, 2, 3)
DEFAULT_TURN_CAP = 2000


class InvalidPositionError(ValueError):
    pass


class InvalidStateError(ValueError):
    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class IllegalMoveError(ValueError):
    pass


@dataclass(frozen=True)
class BoardLayout:
    main_track_len: int = MAIN_TRACK_LEN
    start_squares: tuple[int, ...] = (0, 13, 26, 39)
    safe_squares: frozenset[int] = frozenset({0, 8, 13, 21, 26, 34, 39, 47})

    def start(self, player: int) -> int:
        return self.start_squares[player]

    def home_start(self, player: int) -> int:
        return self.main_track_len + HOME_LEN * player

    def home_end(self, player: int) -> int:
        return self.home_start(player) + HOME_LEN - 1

    def home_range(self, player: int) -> tuple[int, int]:
        return self.home_start(player), self.home_end(player)

    def owner_of_home(self, pos: int) -> int | None:
        if pos < self.main_track_len:
            return None
        owner = (pos - self.main_track_len) // HOME_LEN
        return owner if owner in ALL_PLAYERS else None

    def is_safe(self, pos: int) -> bool:
        return pos in self.safe_squares


LAYOUT = BoardLayout()


def rel_progress(player: int, pos: int, layout: BoardLayout = LAYOUT) -> int:
    """Progress of ``pos`` measured from the player's start square.

    Returns ``BASE`` (-1) for a token in base, 0-51 on the main track and
    52-57 on the home path (57 = finished).
    """
    if pos == BASE:
        return BASE
    if 0 <= pos < layout.main_track_len:
        return (pos - layout.start(player)) % layout.main_track_len
    hs, he = layout.home_range(player)
    if hs <= pos <= he:
        return layout.main_track_len + (pos - hs)
    raise InvalidPositionError(f"position {pos} is not valid for player {player}")


def abs_position(player: int, progress: int, layout: BoardLayout = LAYOUT) -> int:
    """Inverse of :func:`rel_progress`."""
    if progress == BASE:
        return BASE
    if 0 <= progress < layout.main_track_len:
        return (layout.start(player) + progress) % layout.main_track_len
    if progress <= FINISH_PROGRESS:
        return layout.home_start(player) + progress - layout.main_track_len
    raise InvalidPositionError(f"progress {progress} out of range")


@dataclass(frozen=True, slots=True)
class GameState:
    """Token positions for the active players plus whose turn it is.

    ``tokens`` is indexed by player id (0-3); inactive players hold ``()``.
    """

    players: tuple[int, ...]
    tokens: tuple[tuple[int, ...], ...]
    current_player: int

    @classmethod
    def from_tokens(
        cls,
        tokens: Mapping[int, Iterable[int]],
        current_player: int,
        players: Iterable[int] | None = None,
    ) -> "GameState":
        tokens = {int(k): tuple(int(x) for x in v) for k, v in tokens.items()}
        if players is None:
            players = sorted(tokens)
        table = tuple(tokens.get(p, ()) for p in ALL_PLAYERS)
        return cls(tuple(players), table, current_player)

    @classmethod
    def initial(cls, players: Iterable[int] = (0, 1), current_player: int | None = None) -> "GameState":
        players = tuple(players)
        return cls.from_tokens(
            {p: (BASE,) * TOKENS_PER_PLAYER for p in players},
            players[0] if current_player is None else current_player,
            players,
        )

    def with_current(self, player: int) -> "GameState":
        if player == self.current_player:
            return self
        return GameState(self.players, self.tokens, player)

    def with_token(self, player: int, index: int, pos: int) -> "GameState":
        row = list(self.tokens[player])
        row[index] = pos
        table = list(self.tokens)
        table[player] = tuple(row)
        return GameState(self.players, tuple(table), self.current_player)

    def token_map(self) -> dict[int, list[int]]:
        return {p: list(self.tokens[p]) for p in self.players}

    def fingerprint(self) -> tuple:
        """Canonical hashable serialization; equal states give equal fingerprints."""
        return (self.players, self.tokens, self.current_player)

    def opponents(self, player: int) -> tuple[int, ...]:
        return tuple(p for p in self.players if p != player)


@dataclass(frozen=True, slots=True)
class Move:
    token_index: int
    from_pos: int
    to_pos: int
    is_leave_base: bool = False
    capture_victim: tuple[int, int] | None = None
    enters_home: bool = False
    finishes: bool = False
    lands_safe: bool = False
    # true for any destination on the home path (entry, progress or finish)
    in_home: bool = False

    @property
    def is_capture(self) -> bool:
        return self.capture_victim is not None


# Reasons a token cannot move on a given roll.
NEEDS_SIX = "needs_six"
FINISHED = "finished"
OVERSHOOT = "overshoot"
SELF_BLOCKED = "self_blocked"


def token_option(
    state: GameState, player: int, dice: int, index: int, layout: BoardLayout = LAYOUT
) -> Move | str:
    """The single move available to one token, or the reason it has none."""
    mine = state.tokens[player]
    pos = mine[index]
    he = layout.home_end(player)
    if pos == BASE:
        if dice != 6:
            return NEEDS_SIX
        dest = layout.start(player)
        if dest in mine:
            return SELF_BLOCKED
        return Move(index, pos, dest, is_leave_base=True, lands_safe=True)
    if pos == he:
        return FINISHED
    progress = rel_progress(player, pos, layout)
    target = progress + dice
    if target > FINISH_PROGRESS:
        return OVERSHOOT
    if target >= layout.main_track_len:
        dest = layout.home_start(player) + target - layout.main_track_len
        if dest != he and dest in mine:
            return SELF_BLOCKED
        return Move(
            index,
            pos,
            dest,
            enters_home=progress < layout.main_track_len,
            finishes=dest == he,
            in_home=True,
        )
    dest = (layout.start(player) + target) % layout.main_track_len
    if dest in mine:
        return SELF_BLOCKED
    safe = dest in layout.safe_squares
    victim = None
    if not safe:
        for q in state.players:
            if q == player:
                continue
            row = state.tokens[q]
            if dest in row:
                victim = (q, row.index(dest))
                break
    return Move(index, pos, dest, capture_victim=victim, lands_safe=safe)


def _moves(state: GameState, player: int, dice: int, layout: BoardLayout = LAYOUT) -> list[Move]:
    out = []
    for i in range(TOKENS_PER_PLAYER):
        opt = token_option(state, player, dice, i, layout)
        if not isinstance(opt, str):
            out.append(opt)
    return out


def legal_moves(state: GameState, player: int, dice: int, layout: BoardLayout = LAYOUT) -> list[Move]:
    """All legal moves for ``player`` rolling ``dice``, ordered by token index."""
    if not 1 <= dice <= 6:
        raise ValueError(f"dice must be 1-6, got {dice}")
    if player != state.current_player:
        raise InvalidStateError([f"player {player} is not the current player {state.current_player}"])
    violations = validate_state(state, layout)
    if violations:
        raise InvalidStateError(violations)
    return _moves(state, player, dice, layout)


def _apply(state: GameState, player: int, move: Move) -> GameState:
    table = list(state.tokens)
    row = list(table[player])
    row[move.token_index] = move.to_pos
    table[player] = tuple(row)
    if move.capture_victim is not None:
        q, j = move.capture_victim
        victim = list(table[q])
        victim[j] = BASE
        table[q] = tuple(victim)
    return GameState(state.players, tuple(table), state.current_player)


def apply_move(
    state: GameState, player: int, dice: int, move: Move, layout: BoardLayout = LAYOUT
) -> GameState:
    """Relocate the mover's token and send any captured token to base.

    ``current_player`` is left unchanged; see :func:`next_player`.
    """
    if move not in legal_moves(state, player, dice, layout):
        raise IllegalMoveError(f"{move} is not legal for player {player} with dice {dice}")
    return _apply(state, player, move)


def next_player(state: GameState, dice: int, had_legal_move: bool = True) -> int:
    # a six always keeps the turn, whether or not a move was possible
    if dice == 6:
        return state.current_player
    players = state.players
    return players[(players.index(state.current_player) + 1) % len(players)]


def winner(state: GameState, layout: BoardLayout = LAYOUT) -> int | None:
    for p in state.players:
        he = layout.home_end(p)
        if all(pos == he for pos in state.tokens[p]):
            return p
    return None


def validate_state(state: GameState, layout: BoardLayout = LAYOUT) -> list[str]:
    """Every invariant violation in ``state``; an empty list means valid."""
    out: list[str] = []
    players = state.players
    if not 2 <= len(players) <= 4:
        out.append(f"active player count {len(players)} not in 2-4")
    if len(set(players)) != len(players) or any(p not in ALL_PLAYERS for p in players):
        out.append(f"bad active player list {players}")
        return out
    if len(state.tokens) != len(ALL_PLAYERS):
        out.append("token table must have one row per player id")
        return out
    if state.current_player not in players:
        out.append(f"current player {state.current_player} not active")
    for p in ALL_PLAYERS:
        row = state.tokens[p]
        if p in players and len(row) != TOKENS_PER_PLAYER:
            out.append(f"player {p} has {len(row)} tokens, expected 4")
        elif p not in players and row:
            out.append(f"inactive player {p} has tokens")
    main_owner: dict[int, int] = {}
    for p in players:
        row = state.tokens[p]
        he = layout.home_end(p)
        seen: set[int] = set()
        for i, pos in enumerate(row):
            if pos == BASE:
                continue
            if not isinstance(pos, int) or pos < BASE:
                out.append(f"player {p} token {i}: invalid position {pos}")
                continue
            if pos >= layout.main_track_len:
                hs = layout.home_start(p)
                if not hs <= pos <= he:
                    if layout.owner_of_home(pos) is None:
                        out.append(f"player {p} token {i}: position {pos} off the board")
                    else:
                        out.append(f"player {p} token {i}: foreign home range at {pos}")
                    continue
            if pos in seen and pos != he:
                out.append(f"player {p}: own stacking off home_end at {pos}")
            seen.add(pos)
            if pos < layout.main_track_len and pos not in layout.safe_squares:
                other = main_owner.get(pos)
                if other is not None and other != p:
                    out.append(f"players {other} and {p} share non-safe square {pos}")
                main_owner[pos] = p
    return out


def total_progress(state: GameState, player: int, layout: BoardLayout = LAYOUT) -> int:
    return sum(rel_progress(player, pos, layout) for pos in state.tokens[player] if pos != BASE)


def adjudicate_by_progress(state: GameState, layout: BoardLayout = LAYOUT) -> int:
    """Winner of a game stopped at the turn cap: highest summed progress, ties to lowest id."""
    return max(sorted(state.players), key=lambda p: (total_progress(state, p, layout), -p))


def describe_move(move: Move) -> str:
    tags = []
    if move.is_leave_base:
        tags.append("leave base")
    if move.capture_victim is not None:
        tags.append(f"capture P{move.capture_victim[0]}#{move.capture_victim[1]}")
    if move.finishes:
        tags.append("finish")
    elif move.in_home:
        tags.append("home")
    if move.lands_safe and not move.is_leave_base:
        tags.append("safe")
    suffix = f" ({', '.join(tags)})" if tags else ""
    return f"token {move.token_index}: {move.from_pos} -> {move.to_pos}{suffix}"


def replace_tokens(state: GameState, player: int, row: Sequence[int]) -> GameState:
    table = list(state.tokens)
    table[player] = tuple(row)
    return replace(state, tokens=tuple(table))
