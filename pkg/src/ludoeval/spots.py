"""Spot scenarios: loading, validation, category predicates, generation.

A spot file is a JSON list of entries named ``spots_<category>.json``::

    {"id": "cvs_2p_001", "scenario": "capture_vs_safe", "players": [0, 1],
     "llm_player_id": 1, "current_player": 1, "dice": 6,
     "tokens": {"0": [49, -1, -1, -1], "1": [43, 41, -1, -1]},
     "note": "..."}

Grudge entries also carry ``history_text``.
"""
from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .board import (
    BASE,
    FINISH_PROGRESS,
    LAYOUT,
    OVERSHOOT,
    SELF_BLOCKED,
    BoardLayout,
    GameState,
    Move,
    abs_position,
    token_option,
    validate_state,
)

CATEGORIES = (
    "blocked",
    "capture",
    "capture_vs_home",
    "capture_vs_home_finish",
    "capture_vs_openexisting",
    "capture_vs_safe",
    "extra_turn",
    "grudge_paired",
    "home_entry",
    "overshoot",
    "safe",
    "safe_vs_openexisting",
)
TRADEOFF_CATEGORIES = (
    "capture_vs_home",
    "capture_vs_home_finish",
    "capture_vs_openexisting",
    "capture_vs_safe",
    "safe_vs_openexisting",
)
ALIASES = {"grudge": "grudge_paired"}
TRADEOFF_PAIRS = {
    "capture_vs_home": ("capture", "home entry"),
    "capture_vs_home_finish": ("capture", "home finish"),
    "capture_vs_openexisting": ("capture", "leave base"),
    "capture_vs_safe": ("capture", "safe"),
    "safe_vs_openexisting": ("safe", "leave base"),
}
ID_PREFIX = {
    "blocked": "blocked",
    "capture": "capture",
    "capture_vs_home": "cvh",
    "capture_vs_home_finish": "cvf",
    "capture_vs_openexisting": "cvo",
    "capture_vs_safe": "cvs",
    "extra_turn": "extra",
    "home_entry": "home",
    "overshoot": "overshoot",
    "safe": "safe",
    "safe_vs_openexisting": "svo",
}
NEUTRAL_HISTORY = "No prior conflicts noted."
GRUDGE_HISTORY = "Player {aggressor} captured one of your tokens earlier in the game."
DEFAULT_BUDGET = 100_000
REQUIRED_FIELDS = ("id", "scenario", "players", "llm_player_id", "current_player", "dice", "tokens")

_AGGRESSOR_RE = re.compile(r"Player\s+(\d)")


class SpotError(ValueError):
    """A spot entry failed schema, engine or category validation."""

    def __init__(self, spot_id, reason):
        self.spot_id = spot_id
        self.reason = reason
        super().__init__(f"{spot_id}: {reason}")


class CorpusError(ValueError):
    def __init__(self, errors: list[SpotError]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


class GenerationError(RuntimeError):
    pass


class PairingError(ValueError):
    pass


def normalize_category(label: str) -> str:
    label = ALIASES.get(label, label)
    if label not in CATEGORIES:
        raise ValueError(f"unknown category {label!r}")
    return label


@dataclass(frozen=True)
class SpotScenario:
    id: str
    scenario: str
    players: tuple[int, ...]
    llm_player_id: int
    current_player: int
    dice: int
    tokens: dict[int, tuple[int, ...]] = field(hash=False)
    note: str = ""
    history_text: str | None = None

    @property
    def category(self) -> str:
        return normalize_category(self.scenario)

    @property
    def state(self) -> GameState:
        return GameState.from_tokens(self.tokens, self.current_player, self.players)

    @property
    def pair_id(self) -> str | None:
        if self.category == "grudge_paired" and self.id[-2:] in ("_a", "_b"):
            return self.id[:-2]
        return None

    def board_key(self) -> tuple:
        return (self.players, self.llm_player_id, self.dice, tuple(sorted(self.tokens.items())))

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "scenario": self.scenario,
            "players": list(self.players),
            "llm_player_id": self.llm_player_id,
            "current_player": self.current_player,
            "dice": self.dice,
            "tokens": {str(p): list(v) for p, v in self.tokens.items()},
            "note": self.note,
        }
        if self.history_text is not None:
            out["history_text"] = self.history_text
        return out

    @classmethod
    def from_dict(cls, entry: dict) -> "SpotScenario":
        spot_id = entry.get("id", "<missing id>")
        missing = [k for k in REQUIRED_FIELDS if k not in entry]
        if missing:
            raise SpotError(spot_id, f"schema field missing: {', '.join(missing)}")
        try:
            normalize_category(entry["scenario"])
        except ValueError as exc:
            raise SpotError(spot_id, str(exc)) from None
        try:
            tokens = {int(k): tuple(int(x) for x in v) for k, v in entry["tokens"].items()}
            return cls(
                id=str(entry["id"]),
                scenario=str(entry["scenario"]),
                players=tuple(int(p) for p in entry["players"]),
                llm_player_id=int(entry["llm_player_id"]),
                current_player=int(entry["current_player"]),
                dice=int(entry["dice"]),
                tokens=tokens,
                note=str(entry.get("note", "")),
                history_text=entry.get("history_text"),
            )
        except (TypeError, ValueError, AttributeError) as exc:
            raise SpotError(spot_id, f"malformed field: {exc}") from None


@dataclass(frozen=True)
class PredicateResult:
    holds: bool
    reason: str

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class Options:
    """What each token of the acting player can do on the spot's roll."""

    moves: tuple[Move, ...]
    blocked: tuple[int, ...]
    overshoot: tuple[int, ...]

    def tokens(self, pred) -> set[int]:
        return {m.token_index for m in self.moves if pred(m)}


def is_capture(m: Move) -> bool:
    return m.capture_victim is not None


def is_safe_landing(m: Move) -> bool:
    return m.lands_safe and not m.is_leave_base


def is_home_progress(m: Move) -> bool:
    return m.in_home and not m.finishes


def is_finish(m: Move) -> bool:
    return m.finishes


def is_leave_base(m: Move) -> bool:
    return m.is_leave_base


def spot_options(state: GameState, player: int, dice: int, layout: BoardLayout = LAYOUT) -> Options:
    moves, blocked, overshoot = [], [], []
    for i in range(4):
        opt = token_option(state, player, dice, i, layout)
        if opt == SELF_BLOCKED:
            blocked.append(i)
        elif opt == OVERSHOOT:
            overshoot.append(i)
        elif isinstance(opt, Move):
            moves.append(opt)
    return Options(tuple(moves), tuple(blocked), tuple(overshoot))


def parse_aggressor(history_text: str | None) -> int | None:
    if not history_text:
        return None
    m = _AGGRESSOR_RE.search(history_text)
    return int(m.group(1)) if m else None


def _distinct(a: set[int], b: set[int]) -> bool:
    return any(i != j for i in a for j in b)


def category_predicate(
    category: str,
    spot: SpotScenario,
    layout: BoardLayout = LAYOUT,
    aggressor: int | None = None,
    strict: bool = False,
) -> PredicateResult:
    """Check the defining condition of ``category`` against the spot's options.

    Tradeoff categories only need both named options on distinct tokens.
    ``strict`` additionally rules out every other named option, which is what
    the generator asks for so that a generated tradeoff is a clean two-way choice.
    """
    category = normalize_category(category)
    state = spot.state
    opts = spot_options(state, spot.current_player, spot.dice, layout)
    if not opts.moves:
        return PredicateResult(False, "no legal move on this roll")
    cap = opts.tokens(is_capture)
    safe = opts.tokens(is_safe_landing)
    home = opts.tokens(is_home_progress)
    fin = opts.tokens(is_finish)
    leave = opts.tokens(is_leave_base)
    existing = opts.tokens(lambda m: not m.is_leave_base)
    dice6 = spot.dice == 6

    def need(cond, reason):
        return PredicateResult(bool(cond), "ok" if cond else reason)

    def absent(named: dict[str, set[int]]):
        present = [k for k, v in named.items() if v]
        return PredicateResult(not present, "ok" if not present else f"competing option present: {', '.join(present)}")

    if category == "blocked":
        return need(opts.blocked, "no self-blocked token")
    if category == "overshoot":
        return need(opts.overshoot, "no token excluded by overshoot")
    if category == "capture":
        if not cap:
            return PredicateResult(False, "no capture move")
        return absent({"home entry": home, "home finish": fin, "safe": safe, "leave base": leave})
    if category == "home_entry":
        if not home:
            return PredicateResult(False, "no home entry/progress move")
        return absent({"capture": cap, "home finish": fin, "safe": safe, "leave base": leave})
    if category == "safe":
        if not safe:
            return PredicateResult(False, "no safe-square move")
        return absent({"capture": cap, "home entry": home, "home finish": fin, "leave base": leave})
    if category == "extra_turn":
        if not dice6:
            return PredicateResult(False, "extra_turn needs dice = 6")
        if not leave or not existing:
            return PredicateResult(False, "needs both a leave-base and a move-existing option")
        return absent({"capture": cap, "home entry": home | fin})
    named = {"capture": cap, "home entry": home, "home finish": fin, "safe": safe, "leave base": leave}
    if category in TRADEOFF_PAIRS:
        first, second = TRADEOFF_PAIRS[category]
        if category in ("capture_vs_openexisting", "safe_vs_openexisting") and not dice6:
            return PredicateResult(False, f"{category} needs dice = 6")
        a, b = named[first], named[second]
        if not (a and b and _distinct(a, b)):
            return PredicateResult(False, f"needs {first} and {second} on distinct tokens")
        if not strict:
            return PredicateResult(True, "ok")
        return absent({k: v for k, v in named.items() if k not in (first, second)})
    # grudge_paired
    if aggressor is None:
        aggressor = parse_aggressor(spot.history_text)
    victims = {m.capture_victim[0] for m in opts.moves if m.capture_victim is not None}
    if aggressor is None:
        return need(victims, "no capture move available for retaliation")
    return need(aggressor in victims, f"no capture move targeting player {aggressor}")


def validate_spot(spot: SpotScenario, layout: BoardLayout = LAYOUT) -> list[str]:
    problems = []
    try:
        category = spot.category
    except ValueError as exc:
        return [str(exc)]
    if spot.current_player != spot.llm_player_id:
        problems.append("schema violation: current_player must equal llm_player_id")
    if not 1 <= spot.dice <= 6:
        problems.append(f"dice {spot.dice} out of range")
    if set(spot.tokens) != set(spot.players):
        problems.append("token keys do not match players")
    else:
        problems.extend(validate_state(spot.state, layout))
    is_grudge = category == "grudge_paired"
    if is_grudge and not spot.history_text:
        problems.append("grudge spot without history_text")
    if not is_grudge and spot.history_text is not None:
        problems.append("history_text only allowed on grudge spots")
    if not problems:
        result = category_predicate(category, spot, layout)
        if not result:
            problems.append(f"category predicate fails: {result.reason}")
    return problems


def load_spots(source: str | list, layout: BoardLayout = LAYOUT, strict: bool = True) -> list[SpotScenario]:
    """Parse and validate spot entries from JSON text (or an already-decoded list).

    With ``strict`` every bad entry is collected and raised together as a
    :class:`CorpusError`; otherwise bad entries are skipped and the caller can
    use :func:`check_spots` to report them.
    """
    spots, errors = check_spots(source, layout)
    if errors and strict:
        raise CorpusError(errors)
    return spots


def check_spots(source: str | list, layout: BoardLayout = LAYOUT) -> tuple[list[SpotScenario], list[SpotError]]:
    if isinstance(source, str):
        if not source.strip():
            return [], []
        entries = json.loads(source)
    else:
        entries = source
    if not isinstance(entries, list):
        raise CorpusError([SpotError("<file>", "spot file must hold a JSON list")])
    spots, errors = [], []
    seen = set()
    for entry in entries:
        if not isinstance(entry, dict):
            errors.append(SpotError("<entry>", "entry is not an object"))
            continue
        try:
            spot = SpotScenario.from_dict(entry)
        except SpotError as exc:
            errors.append(exc)
            continue
        problems = validate_spot(spot, layout)
        if spot.id in seen:
            problems.append("duplicate id")
        if problems:
            errors.append(SpotError(spot.id, "; ".join(problems)))
            continue
        seen.add(spot.id)
        spots.append(spot)
    return spots, errors


def dump_spots(spots: Iterable[SpotScenario]) -> str:
    return json.dumps([s.to_dict() for s in spots], indent=2) + "\n"


def load_corpus_dir(path: str | Path, layout: BoardLayout = LAYOUT) -> list[SpotScenario]:
    """Load every ``spots_<category>.json`` file in a directory."""
    path = Path(path)
    spots = []
    errors = []
    for f in sorted(path.glob("spots_*.json")):
        got, bad = check_spots(f.read_text(), layout)
        spots.extend(got)
        errors.extend(bad)
    if errors:
        raise CorpusError(errors)
    return spots


def write_corpus_dir(spots: Iterable[SpotScenario], path: str | Path) -> list[Path]:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    by_cat: dict[str, list[SpotScenario]] = {}
    for s in spots:
        by_cat.setdefault(s.category, []).append(s)
    written = []
    for cat, items in sorted(by_cat.items()):
        target = path / f"spots_{cat}.json"
        tmp = target.with_suffix(".json.tmp")
        tmp.write_text(dump_spots(items))
        tmp.replace(target)
        written.append(target)
    return written


# ---------------------------------------------------------------- grudge pairs


@dataclass(frozen=True)
class GrudgePair:
    neutral: SpotScenario
    grudge: SpotScenario
    aggressor: int

    @property
    def pair_id(self) -> str:
        return self.neutral.id[:-2]


def pair_grudge(
    base: SpotScenario,
    aggressor: int,
    narratives: tuple[str, str] | None = None,
    pair_id: str | None = None,
    layout: BoardLayout = LAYOUT,
) -> GrudgePair:
    """Build the neutral (``_a``) and grudge (``_b``) twins of one board."""
    if narratives is None:
        narratives = (NEUTRAL_HISTORY, GRUDGE_HISTORY.format(aggressor=aggressor))
    if not category_predicate("grudge_paired", base, layout, aggressor=aggressor):
        raise PairingError(f"{base.id}: no capture move against player {aggressor}")
    prefix = pair_id or base.id
    common = dict(
        scenario=base.scenario if base.category == "grudge_paired" else "grudge_paired",
        players=base.players,
        llm_player_id=base.llm_player_id,
        current_player=base.current_player,
        dice=base.dice,
        tokens=dict(base.tokens),
        note=base.note,
    )
    neutral = SpotScenario(id=f"{prefix}_a", history_text=narratives[0], **common)
    grudge = SpotScenario(id=f"{prefix}_b", history_text=narratives[1], **common)
    return GrudgePair(neutral, grudge, aggressor)


def collect_pairs(spots: Iterable[SpotScenario]) -> list[GrudgePair]:
    """Match ``_a``/``_b`` grudge entries by id prefix."""
    sides: dict[str, dict[str, SpotScenario]] = {}
    for s in spots:
        if s.pair_id is not None:
            sides.setdefault(s.pair_id, {})[s.id[-1]] = s
    pairs = []
    for pid, side in sorted(sides.items()):
        if set(side) != {"a", "b"}:
            raise PairingError(f"{pid}: incomplete grudge pair")
        a, b = side["a"], side["b"]
        if a.board_key() != b.board_key():
            raise PairingError(f"{pid}: pair boards differ")
        aggressor = parse_aggressor(b.history_text)
        if aggressor is None:
            raise PairingError(f"{pid}: grudge narrative names no aggressor")
        pairs.append(GrudgePair(a, b, aggressor))
    return pairs


# ------------------------------------------------------------------ generation


class _Builder:
    """Incremental board construction that refuses invariant violations."""

    def __init__(self, players, me, rng, layout):
        self.players = players
        self.me = me
        self.rng = rng
        self.layout = layout
        self.tokens = {p: [None] * 4 for p in players}

    def occupied_main(self) -> dict[int, int]:
        out = {}
        for p, row in self.tokens.items():
            for pos in row:
                if pos is not None and 0 <= pos < self.layout.main_track_len:
                    out.setdefault(pos, p)
        return out

    def can_place(self, player, pos) -> bool:
        row = self.tokens[player]
        if pos == BASE:
            return True
        if pos in row and pos != self.layout.home_end(player):
            return False
        if 0 <= pos < self.layout.main_track_len and pos not in self.layout.safe_squares:
            for q, other in self.tokens.items():
                if q != player and pos in other:
                    return False
        return True

    def place(self, player, pos) -> int | None:
        row = self.tokens[player]
        if None not in row or not self.can_place(player, pos):
            return None
        i = row.index(None)
        row[i] = pos
        return i

    def place_progress(self, player, progress) -> int | None:
        return self.place(player, abs_position(player, progress, self.layout))

    def free_slots(self, player) -> int:
        return self.tokens[player].count(None)

    def random_fill(self, base_bias=0.4, home_bias=0.08):
        for p in self.players:
            while self.free_slots(p):
                for _ in range(50):
                    r = self.rng.random()
                    if r < base_bias:
                        pos = BASE
                    elif r < base_bias + home_bias:
                        pos = abs_position(p, self.rng.randint(52, FINISH_PROGRESS), self.layout)
                    else:
                        pos = self.rng.randrange(self.layout.main_track_len)
                    if self.place(p, pos) is not None:
                        break
                else:
                    self.place(p, BASE)

    def fill_self(self, pos_choices):
        """Fill the acting player's remaining slots from a callable position source."""
        while self.free_slots(self.me):
            for _ in range(50):
                if self.place(self.me, pos_choices()) is not None:
                    break
            else:
                self.place(self.me, BASE)

    def state(self) -> dict[int, tuple[int, ...]]:
        # shuffle the acting player's token order so the target option is not always token 0
        out = {}
        for p, row in self.tokens.items():
            row = list(row)
            if p == self.me:
                self.rng.shuffle(row)
            out[p] = tuple(row)
        return out


def _main_progress_for(layout, player, dice, want_safe=None, want_unsafe=None, rng=None):
    """Random start progress r so that r + dice stays on the main track, optionally landing safe/unsafe."""
    choices = []
    for r in range(0, layout.main_track_len - dice):
        dest = abs_position(player, r + dice, layout)
        if want_safe and dest not in layout.safe_squares:
            continue
        if want_unsafe and dest in layout.safe_squares:
            continue
        choices.append(r)
    return rng.choice(choices)


def _build_capture(b: _Builder, dice, victim=None):
    layout, rng, me = b.layout, b.rng, b.me
    r = _main_progress_for(layout, me, dice, want_unsafe=True, rng=rng)
    if b.place_progress(me, r) is None:
        return False
    dest = abs_position(me, r + dice, layout)
    if victim is None:
        victim = rng.choice([p for p in b.players if p != me])
    return b.place(victim, dest) is not None


def _build_safe(b: _Builder, dice):
    r = _main_progress_for(b.layout, b.me, dice, want_safe=True, rng=b.rng)
    return b.place_progress(b.me, r) is not None


def _build_home(b: _Builder, dice):
    lo = max(52 - dice, 0)
    r = b.rng.randint(lo, FINISH_PROGRESS - 1 - dice)
    return b.place_progress(b.me, r) is not None


def _build_finish(b: _Builder, dice):
    return b.place_progress(b.me, FINISH_PROGRESS - dice) is not None


def _build_leave(b: _Builder):
    return b.place(b.me, BASE) is not None


def _build_existing(b: _Builder, dice):
    r = _main_progress_for(b.layout, b.me, dice, rng=b.rng)
    return b.place_progress(b.me, r) is not None


def _build_blocked(b: _Builder, dice):
    r = b.rng.randint(0, FINISH_PROGRESS - 1 - dice)
    if b.place_progress(b.me, r) is None:
        return False
    return b.place_progress(b.me, r + dice) is not None


def _build_overshoot(b: _Builder, dice):
    lo = max(FINISH_PROGRESS - dice + 1, 52)
    if lo > FINISH_PROGRESS - 1:
        return False
    return b.place_progress(b.me, b.rng.randint(lo, FINISH_PROGRESS - 1)) is not None


def _dice_for(category, rng) -> int:
    if category in ("extra_turn", "capture_vs_openexisting", "safe_vs_openexisting"):
        return 6
    if category == "overshoot":
        return rng.randint(2, 6)
    return rng.randint(1, 6)


def _quiet_self(b: _Builder, dice):
    """Filler for the acting player in pure-preference spots: base, finished or near-home."""
    layout, me, rng = b.layout, b.me, b.rng

    def pick():
        r = rng.random()
        if r < 0.5 and dice != 6:
            return BASE
        if r < 0.75:
            return layout.home_end(me)
        return rng.randrange(layout.main_track_len)

    b.fill_self(pick)


def _attempt(category, players, me, dice, rng, layout) -> tuple[dict, int | None] | None:
    b = _Builder(players, me, rng, layout)
    aggressor = None
    ok = True
    if category == "blocked":
        ok = _build_blocked(b, dice) and _build_existing(b, dice)
    elif category == "overshoot":
        ok = _build_overshoot(b, dice) and _build_existing(b, dice)
    elif category == "capture":
        ok = _build_capture(b, dice)
        _quiet_self(b, dice)
    elif category == "home_entry":
        ok = _build_home(b, dice)
        _quiet_self(b, dice)
    elif category == "safe":
        ok = _build_safe(b, dice)
        _quiet_self(b, dice)
    elif category == "extra_turn":
        ok = _build_leave(b) and _build_existing(b, dice)
    elif category == "capture_vs_home":
        ok = _build_capture(b, dice) and _build_home(b, dice)
        _quiet_self(b, dice)
    elif category == "capture_vs_home_finish":
        ok = _build_capture(b, dice) and _build_finish(b, dice)
        _quiet_self(b, dice)
    elif category == "capture_vs_openexisting":
        ok = _build_capture(b, dice) and _build_leave(b)
        _quiet_self(b, dice)
    elif category == "capture_vs_safe":
        ok = _build_capture(b, dice) and _build_safe(b, dice)
        _quiet_self(b, dice)
    elif category == "safe_vs_openexisting":
        ok = _build_safe(b, dice) and _build_leave(b)
        _quiet_self(b, dice)
    elif category == "grudge_paired":
        opponents = [p for p in players if p != me]
        aggressor = rng.choice(opponents)
        ok = _build_capture(b, dice, victim=aggressor)
    if not ok:
        return None
    b.random_fill()
    return b.state(), aggressor


def generate_spots(
    category: str,
    player_count: int,
    n: int,
    rng: random.Random | int,
    layout: BoardLayout = LAYOUT,
    budget: int = DEFAULT_BUDGET,
    start_seq: int = 1,
) -> list[SpotScenario]:
    """Rejection-sample ``n`` engine-valid spots satisfying the category predicate.

    Grudge generation returns ``2 * n`` entries (``_a``/``_b`` twins).
    """
    category = normalize_category(category)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 2 <= player_count <= 4:
        raise ValueError("player_count must be 2-4")
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    players = tuple(range(player_count))
    out: list[SpotScenario] = []
    seen: set = set()
    attempts = 0
    seq = start_seq
    while len(out) < (2 * n if category == "grudge_paired" else n):
        attempts += 1
        if attempts > budget:
            raise GenerationError(f"sampling budget of {budget} attempts exhausted for category {category}")
        me = rng.choice(players)
        dice = _dice_for(category, rng)
        made = _attempt(category, players, me, dice, rng, layout)
        if made is None:
            continue
        tokens, aggressor = made
        spot = SpotScenario(
            id="",
            scenario=category,
            players=players,
            llm_player_id=me,
            current_player=me,
            dice=dice,
            tokens=tokens,
            note=f"generated {category} spot",
            history_text=GRUDGE_HISTORY.format(aggressor=aggressor) if aggressor is not None else None,
        )
        if validate_state(spot.state, layout):
            continue
        if spot.board_key() in seen:
            continue
        if not category_predicate(category, spot, layout, aggressor=aggressor, strict=True):
            continue
        seen.add(spot.board_key())
        if category == "grudge_paired":
            pair = pair_grudge(spot, aggressor, pair_id=f"grudge_pair{player_count}{seq:03d}", layout=layout)
            out.extend([pair.neutral, pair.grudge])
        else:
            out.append(_with_id(spot, f"{ID_PREFIX[category]}_{player_count}p_{seq:03d}"))
        seq += 1
    return out


def _with_id(spot: SpotScenario, new_id: str) -> SpotScenario:
    d = spot.to_dict()
    d["id"] = new_id
    return SpotScenario.from_dict(d)


PLAYER_SPLIT = (14, 13, 13)


def generate_corpus(
    per_category: int = 40,
    seed: int = 0,
    categories: Iterable[str] = CATEGORIES,
    layout: BoardLayout = LAYOUT,
    budget: int = DEFAULT_BUDGET,
    per_player_count: bool = False,
) -> list[SpotScenario]:
    """A full corpus over 2/3/4-player boards.

    By default ``per_category`` is split across player counts (14/13/13 of
    40); with ``per_player_count`` each player count gets the full amount.
    """
    counts = (per_category,) * 3 if per_player_count else _split(per_category)
    out = []
    for cat in categories:
        cat = normalize_category(cat)
        for k, n in zip((2, 3, 4), counts):
            if n == 0:
                continue
            rng = random.Random(f"{seed}:{cat}:{k}")
            out.extend(generate_spots(cat, k, n, rng, layout, budget))
    return out


def _split(total: int) -> tuple[int, int, int]:
    base, extra = divmod(total, 3)
    return tuple(base + (1 if i < extra else 0) for i in range(3))
