"""Full-game simulation, head-to-head tournaments and spot-suite evaluation."""
from __future__ import annotations

import json
import logging
import os
import random
import time
import uuid
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from .agents import heuristic_decide, random_decide
from .board import (
    DEFAULT_TURN_CAP,
    GameState,
    Move,
    adjudicate_by_progress,
    apply_move,
    legal_moves,
    next_player,
    winner,
)
from .llm import (
    PERSONAS,
    CompletionRequest,
    LLMAgent,
    PromptSpec,
    adjudicate,
    complete_many,
    parse_response,
    render_prompt,
)
from .metrics import EvalRecord, make_record
from .search import EvalWeights, SearchConfig, gt_decide
from .spots import SpotScenario

log = logging.getLogger(__name__)

DICE_RNG = "python-random/mt19937, str seed via sha512, randrange(6)+1; v1"
BUILTIN_AGENTS = ("random", "heuristic", "gt")


class AgentError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------- agents


class RandomPlayer:
    name = "random"

    def __init__(self, seed=0):
        self.rng = random.Random(f"random-agent:{seed}")

    def choose(self, state, player, dice):
        d = random_decide(state, player, dice, self.rng)
        return d.move if d else None


class HeuristicPlayer:
    name = "heuristic"

    def choose(self, state, player, dice):
        d = heuristic_decide(state, player, dice)
        return d.move if d else None


class GTPlayer:
    name = "gt"

    def __init__(self, config: SearchConfig | None = None):
        self.config = config or SearchConfig()

    def choose(self, state, player, dice):
        d = gt_decide(self.config, state, player, dice)
        return d.move if d else None


def make_agent(spec: str, seed=0, search: SearchConfig | None = None, client=None):
    if spec == "random":
        return RandomPlayer(seed)
    if spec == "heuristic":
        return HeuristicPlayer()
    if spec == "gt":
        return GTPlayer(search)
    if spec.startswith("llm:"):
        if client is None:
            raise ConfigError(f"agent {spec} needs a completion client")
        agent = LLMAgent(client, spec[4:], seed=seed)
        agent.name = spec
        return agent
    raise ConfigError(f"unknown agent {spec!r}; expected one of {BUILTIN_AGENTS} or llm:<model>")


# ----------------------------------------------------------------------- games


@dataclass
class MatchConfig:
    roster: list[str]
    games: int = 200
    seed: int = 0
    turn_cap: int = DEFAULT_TURN_CAP
    search: SearchConfig = field(default_factory=SearchConfig)
    self_play: bool = False

    def __post_init__(self):
        if not 2 <= len(self.roster) <= 4 and not (len(self.roster) == 1 and self.self_play):
            raise ConfigError("roster must hold 2-4 agents")
        if self.games < 1:
            raise ConfigError("games must be >= 1")

    def snapshot(self) -> dict:
        d = asdict(self)
        d["dice_rng"] = DICE_RNG
        return d


@dataclass
class GameResult:
    seed: int | str
    seats: list[str]
    winner: int
    winner_agent: str
    half_turns: int
    adjudicated: bool
    captures: dict[int, int]
    finishes: dict[int, int]
    transcript: list[tuple[int, int, int | None]] = field(default_factory=list)


def dice_stream(seed) -> random.Random:
    return random.Random(f"dice:{seed}")


def run_game(
    match: MatchConfig,
    seats: Sequence[str],
    seed,
    client=None,
    keep_transcript: bool = True,
) -> GameResult:
    """Play one game; ``seats[i]`` is the agent spec for player id ``i``."""
    players = tuple(range(len(seats)))
    agents = {p: make_agent(spec, seed=f"{seed}:{p}", search=match.search, client=client) for p, spec in zip(players, seats)}
    dice_rng = dice_stream(seed)
    state = GameState.initial(players)
    captures = {p: 0 for p in players}
    finishes = {p: 0 for p in players}
    transcript = []
    won = None
    half_turns = 0
    while half_turns < match.turn_cap:
        half_turns += 1
        p = state.current_player
        dice = dice_rng.randrange(6) + 1
        move = agents[p].choose(state, p, dice)
        if move is not None:
            if move not in legal_moves(state, p, dice):
                raise AgentError(f"agent {seats[p]} returned illegal move {move} (dice {dice}, state {state})")
            state = apply_move(state, p, dice, move)
            captures[p] += move.capture_victim is not None
            finishes[p] += move.finishes
        if keep_transcript:
            transcript.append((p, dice, move.token_index if move else None))
        won = winner(state)
        if won is not None:
            break
        state = state.with_current(next_player(state, dice, move is not None))
    adjudicated = won is None
    if adjudicated:
        won = adjudicate_by_progress(state)
    return GameResult(seed, list(seats), won, seats[won], half_turns, adjudicated, captures, finishes, transcript)


def game_seed(master, a: str, b: str, k: int) -> str:
    return f"{master}:{a}:{b}:{k}"


def _play_pairing(args):
    match, a, b, k = args
    seats = [a, b] if k % 2 == 0 else [b, a]
    res = run_game(match, seats, game_seed(match.seed, a, b, k), keep_transcript=False)
    # report the winner as roster slot, so self-play can tell the two copies apart
    first_seat = 0 if k % 2 == 0 else 1
    return k, res.winner == first_seat, res


@dataclass
class TournamentResult:
    roster: list[str]
    matrix: dict[str, dict[str, float | None]]
    games: list[dict]


def run_tournament(match: MatchConfig, workers: int = 1) -> TournamentResult:
    """Head-to-head 2-player games for every agent pair, seats alternating each game.

    ``matrix[a][b]`` is a's win fraction against b. Self-play cells (with
    ``self_play``) give the share won by the copy that sits first in even games.
    """
    roster = list(dict.fromkeys(match.roster))
    pairings = list(combinations(roster, 2))
    if match.self_play:
        pairings += [(a, a) for a in roster]
    matrix: dict[str, dict[str, float | None]] = {a: {b: None for b in roster} for a in roster}
    games = []
    for a, b in pairings:
        jobs = [(match, a, b, k) for k in range(match.games)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(_play_pairing, jobs, chunksize=8))
        else:
            outcomes = [_play_pairing(j) for j in jobs]
        outcomes.sort(key=lambda o: o[0])
        first_wins = sum(1 for _, first, _ in outcomes if first)
        matrix[a][b] = first_wins / match.games
        if a != b:
            matrix[b][a] = 1 - first_wins / match.games
        for k, first, res in outcomes:
            games.append(
                {
                    "pairing": f"{a} vs {b}",
                    "game": k,
                    "seed": res.seed,
                    "seat0": res.seats[0],
                    "seat1": res.seats[1],
                    "winner": res.winner_agent if a != b else ("first" if first else "second"),
                    "half_turns": res.half_turns,
                    "adjudicated": res.adjudicated,
                }
            )
    return TournamentResult(roster, matrix, games)


def matrix_csv(result: TournamentResult) -> str:
    lines = ["agent," + ",".join(result.roster)]
    for a in result.roster:
        cells = ["" if result.matrix[a][b] is None else f"{result.matrix[a][b]:.4f}" for b in result.roster]
        lines.append(f"{a}," + ",".join(cells))
    return "\n".join(lines) + "\n"


def games_csv(result: TournamentResult) -> str:
    cols = ["pairing", "game", "seed", "seat0", "seat1", "winner", "half_turns", "adjudicated"]
    rows = [",".join(cols)]
    for g in result.games:
        rows.append(",".join(str(g[c]) for c in cols))
    return "\n".join(rows) + "\n"


# ------------------------------------------------------------------ records


class RecordLog:
    """Append-only JSONL log; every line is one complete record.

    Each append is flushed and fsynced. A torn final line left by a crash is
    dropped when the log is reopened.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.records: list[EvalRecord] = []
        if self.path.exists():
            self._recover()

    def _recover(self):
        raw = self.path.read_bytes()
        good = 0
        for line in raw.splitlines(keepends=True):
            if not line.endswith(b"\n"):
                break
            try:
                self.records.append(EvalRecord.from_dict(json.loads(line)))
            except (ValueError, TypeError):
                break
            good += len(line)
        if good != len(raw):
            log.warning("dropping %d bytes of incomplete records from %s", len(raw) - good, self.path)
            with self.path.open("r+b") as fh:
                fh.truncate(good)

    def done(self) -> set[tuple[str, str, str]]:
        return {(r.agent, r.spot_id, r.persona) for r in self.records}

    def append(self, rec: EvalRecord):
        line = json.dumps(rec.to_dict(), sort_keys=True) + "\n"
        with self.path.open("a") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())
        self.records.append(rec)


def read_records(path: str | Path) -> list[EvalRecord]:
    return RecordLog(path).records


@dataclass
class RunManifest:
    run_id: str
    corpus: str
    config: dict
    spot_seeds: dict[str, str] = field(default_factory=dict)
    started: float = field(default_factory=time.time)
    finished: float | None = None

    def write(self, path: str | Path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        tmp.replace(path)


def new_manifest(corpus: str, config: dict) -> RunManifest:
    return RunManifest(run_id=uuid.uuid4().hex[:12], corpus=corpus, config=config)


def spot_seed(master, agent: str, spot_id: str, persona: str) -> str:
    return f"{master}:{agent}:{spot_id}:{persona}"


def _builtin_record(agent: str, spot: SpotScenario, persona: str, search: SearchConfig, seed, corpus) -> EvalRecord:
    state, player, dice = spot.state, spot.current_player, spot.dice
    if agent == "gt":
        decision = gt_decide(search, state, player, dice)
    elif agent == "heuristic":
        decision = heuristic_decide(state, player, dice)
    else:
        decision = random_decide(state, player, dice, random.Random(seed))
    if decision is None:
        raise AgentError(f"{spot.id}: no legal move; the spot cannot be evaluated")
    return make_record(spot, agent, persona, decision.move, corpus=corpus, seed=None if agent != "random" else 0)


def run_spot_eval(
    agent: str,
    corpus: Iterable[SpotScenario],
    personas: Iterable[str],
    log_path: str | Path,
    manifest: RunManifest | None = None,
    search: SearchConfig | None = None,
    client=None,
    seed=0,
    workers: int = 1,
    per_second: float | None = None,
    max_retries: int = 3,
    timeout: float = 60.0,
    lenient: bool = False,
) -> list[EvalRecord]:
    """Evaluate one agent on every spot under every persona, resuming from ``log_path``.

    Built-in agents never see persona or history, but a record is still
    written per persona so alignment bookkeeping lines up with model runs.
    """
    personas = list(personas)
    for p in personas:
        if p not in PERSONAS:
            raise ConfigError(f"unknown persona {p!r}")
    search = search or SearchConfig()
    corpus = list(corpus)
    provenance = manifest.corpus if manifest else None
    records_log = RecordLog(log_path)
    done = records_log.done()
    pending = [(s, p) for s in corpus for p in personas if (agent, s.id, p) not in done]

    if agent in BUILTIN_AGENTS:
        for spot, persona in pending:
            sd = spot_seed(seed, agent, spot.id, persona)
            if manifest is not None and agent == "random":
                manifest.spot_seeds[f"{spot.id}:{persona}"] = sd
            records_log.append(_builtin_record(agent, spot, persona, search, sd, provenance))
        return records_log.records

    if not agent.startswith("llm:"):
        raise ConfigError(f"unknown agent {agent!r}")
    if client is None:
        raise ConfigError("model evaluation needs a completion client")
    model = agent[4:]
    batch = max(1, workers) * 4
    for start in range(0, len(pending), batch):
        chunk = pending[start : start + batch]
        requests = [
            CompletionRequest(
                render_prompt(PromptSpec(s, p, include_history=bool(s.history_text))),
                model,
                max_retries=max_retries,
                timeout=timeout,
            )
            for s, p in chunk
        ]
        results = complete_many(client, requests, workers=workers, per_second=per_second)
        for (spot, persona), result in zip(chunk, results):
            sd = spot_seed(seed, agent, spot.id, persona)
            if manifest is not None:
                manifest.spot_seeds[f"{spot.id}:{persona}"] = sd
            parsed = parse_response(result.text, lenient=lenient)
            decision = adjudicate(parsed, spot, random.Random(sd), raw_text=result.text or "")
            records_log.append(
                make_record(
                    spot,
                    agent,
                    persona,
                    decision.final_move,
                    was_format_invalid=decision.was_format_invalid,
                    was_move_invalid=decision.was_move_invalid,
                    chosen_token=decision.chosen_token,
                    chosen_status=decision.chosen_status,
                    error=None if result.ok else f"transport: {result.error}",
                    raw_text=result.text,
                    corpus=provenance,
                )
            )
    return records_log.records


def search_from_dict(d: dict | None) -> SearchConfig:
    d = dict(d or {})
    weights = EvalWeights(**d.pop("weights", {}))
    return SearchConfig(
        depth=int(d.get("depth", 2)),
        weights=weights,
        clip=float(d.get("clip", 0.999)),
        memo_enabled=bool(d.get("memo_enabled", d.get("memo", True))),
    )


def final_move_of(rec: EvalRecord, spot: SpotScenario) -> Move | None:
    for m in legal_moves(spot.state, spot.current_player, spot.dice):
        if m.token_index == rec.final_token:
            return m
    return None
