"""Prompting, response parsing and move adjudication for language-model agents.

The remote side is a generic chat-completion endpoint (single user message,
temperature 0). Credentials and endpoint come from the environment:

``LUDOEVAL_API_KEY``   bearer token
``LUDOEVAL_API_BASE``  base URL, ``/chat/completions`` is appended
"""
from __future__ import annotations

import hashlib
import json
import os
import random
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import httpx

from .board import LAYOUT, BoardLayout, GameState, Move, token_option
from .spots import SpotScenario

PERSONAS = ("none", "aggressive", "greedy", "safe", "unforgiving")

PERSONA_TEXT = {
    "aggressive": (
        "You are an aggressive Ludo player. Prioritize capturing opponent pieces whenever possible. "
        "Attacking opponents is more important than protecting your own pieces or advancing toward home."
    ),
    "greedy": (
        "You are a greedy Ludo player focused on winning. Prioritize advancing your own pieces toward "
        "home above all else. Getting pieces to the finish is more important than capturing opponents."
    ),
    "safe": (
        "You are a cautious Ludo player. Prioritize moving to safe squares and avoiding risky positions. "
        "Protecting your pieces from capture is more important than aggressive play."
    ),
    "unforgiving": (
        "You are an unforgiving Ludo player. If an opponent has captured your piece, prioritize "
        "retaliating by capturing their pieces in return. Do not let attacks go unpunished."
    ),
}

RULER = "-" * 20

HEADER = """\
You are an AI agent playing Ludo as Player {player_id}. Your job is to choose exactly ONE of your token indices.

IMPORTANT:
- You must output ONLY a token index (0,1,2,3) followed by " | " and a one-line reason.
- Do NOT output board positions or text without the token index.
- The token index MUST refer to one of your own 4 tokens (0-3).
- If you output anything else, it is invalid.


{ruler}
BOARD & POSITION SYSTEM

{ruler}
1. Main circular board: 52 squares (0-51).
2. Each player has a fixed START square.
3. Tokens move forward relative to START.
4. After one full lap (52 steps), tokens enter that player's HOME PATH.
5. Each player has a UNIQUE HOME PATH (>= 52).
6. Final home position is HOME_END.
7. Tokens must land EXACTLY on HOME_END.
8. Overshooting HOME_END is illegal.


{ruler}
TOKEN STATES

{ruler}
- Position = -1  : Token is in base
- Position 0-51  : Token is on main board
- Position >= 52 : Token is in home path
- HOME_END       : Token has finished


{ruler}
GAME RULES
{ruler}
1.  All tokens start in base (-1).
2.  Leave base ONLY on dice = 6.
3.  Leaving base places token at START square.
4.  Tokens move forward by dice value.
5.  No stacking (one token per square).
6.  CAPTURE: land on opponent on non-safe square -> opponent sent to base (-1).
7.  Captures NEVER happen on safe squares.
8.  Safe squares protect tokens from capture.
9.  Rolling 6 grants an extra turn.
10. No legal move -> turn skipped.
11. First to move ALL tokens to HOME_END wins.
12. Home paths are private to each player.

{ruler}
CURRENT GAME STATE
{ruler}
Number of players: {num_players}
Active player ids: {player_ids}
Dice rolled: {dice}

Your token positions (Player {player_id}):
{your_tokens}

Other players' token positions:
{other_tokens}

Your start square: {start}
Your home path: {home_start} to {home_end}
Safe squares: {safe_squares}
Player path ranges: {player_info}
"""

CLOSING = """\
Choose the BEST legal move to win.

{ruler}
OUTPUT FORMAT (STRICT)
{ruler}
<int> | <one line reason>
"""

_LINE_RE = re.compile(r"^\s*(\d+)\s*\|\s*(\S.*?)\s*$")
_INDEX_ONLY_RE = re.compile(r"^\s*(\d+)\s*$")


class ConfigurationError(ValueError):
    pass


class MissingCredentialsError(RuntimeError):
    pass


class UnadjudicableSpotError(ValueError):
    pass


@dataclass(frozen=True)
class PromptSpec:
    spot: SpotScenario
    persona: str = "none"
    include_history: bool = False

    def __post_init__(self):
        if self.persona not in PERSONAS:
            raise ConfigurationError(f"unknown persona {self.persona!r}")
        if self.include_history and not self.spot.history_text:
            raise ConfigurationError(f"{self.spot.id}: history requested but spot has no history_text")


def _fmt_list(values: Iterable[int]) -> str:
    return "[" + ", ".join(str(v) for v in values) + "]"


def render_prompt(
    spec: PromptSpec, layout: BoardLayout = LAYOUT, persona_text: dict[str, str] | None = None
) -> str:
    spot = spec.spot
    me = spot.llm_player_id
    texts = PERSONA_TEXT if persona_text is None else persona_text
    your_tokens = "\n".join(f"  Token {i}: {pos}" for i, pos in enumerate(spot.tokens[me]))
    others = "\n".join(f"  Player {p}: {_fmt_list(spot.tokens[p])}" for p in spot.players if p != me)
    info = "; ".join(
        f"P{p}: start {layout.start(p)}, home {layout.home_start(p)}-{layout.home_end(p)}" for p in spot.players
    )
    parts = [
        HEADER.format(
            ruler=RULER,
            player_id=me,
            num_players=len(spot.players),
            player_ids=_fmt_list(spot.players),
            dice=spot.dice,
            your_tokens=your_tokens,
            other_tokens=others,
            start=layout.start(me),
            home_start=layout.home_start(me),
            home_end=layout.home_end(me),
            safe_squares=_fmt_list(sorted(layout.safe_squares)),
            player_info=info,
        )
    ]
    if spec.persona != "none":
        text = texts.get(spec.persona)
        if not text:
            raise ConfigurationError(f"no persona text configured for {spec.persona!r}")
        parts.append(f"{RULER}\nPERSONA\n{RULER}\nYou must play with this persona style:\n{text}\n")
    if spec.include_history:
        parts.append(f"{RULER}\nHISTORY / CONTEXT\n{RULER}\n{spot.history_text}\n")
    parts.append(CLOSING.format(ruler=RULER))
    return "\n".join(parts)


@dataclass(frozen=True)
class ParsedResponse:
    token_index: int | None
    reason: str | None
    format_valid: bool


def parse_response(text: str | None, lenient: bool = False) -> ParsedResponse:
    """Parse ``<int> | <reason>``; the first line matching that shape decides.

    Indices outside 0-3 are format-invalid. ``lenient`` also accepts a bare
    index line without a reason.
    """
    if not text:
        return ParsedResponse(None, None, False)
    for line in text.splitlines():
        m = _LINE_RE.match(line)
        reason = None
        if m:
            reason = m.group(2)
        elif lenient:
            m = _INDEX_ONLY_RE.match(line)
        if not m:
            continue
        index = int(m.group(1))
        if 0 <= index <= 3:
            return ParsedResponse(index, reason, True)
        return ParsedResponse(None, reason, False)
    return ParsedResponse(None, None, False)


@dataclass(frozen=True)
class AdjudicatedDecision:
    final_move: Move
    was_format_invalid: bool
    was_move_invalid: bool
    raw_text: str
    chosen_token: int | None = None
    # why the chosen token had no move: needs_six, finished, overshoot, self_blocked
    chosen_status: str | None = None

    @property
    def valid(self) -> bool:
        return not (self.was_format_invalid or self.was_move_invalid)


def adjudicate(
    parsed: ParsedResponse,
    spot: SpotScenario,
    rng: random.Random,
    raw_text: str = "",
    layout: BoardLayout = LAYOUT,
) -> AdjudicatedDecision:
    state = spot.state
    player = spot.current_player
    options = [token_option(state, player, spot.dice, i, layout) for i in range(4)]
    legal = [o for o in options if isinstance(o, Move)]
    if not legal:
        raise UnadjudicableSpotError(f"{spot.id}: no legal move on this roll")
    if not parsed.format_valid:
        return AdjudicatedDecision(legal[rng.randrange(len(legal))], True, False, raw_text)
    chosen = options[parsed.token_index]
    if isinstance(chosen, Move):
        return AdjudicatedDecision(chosen, False, False, raw_text, parsed.token_index)
    return AdjudicatedDecision(
        legal[rng.randrange(len(legal))], False, True, raw_text, parsed.token_index, chosen
    )


# --------------------------------------------------------------------- client


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    model: str
    temperature: float = 0.0
    max_retries: int = 3
    timeout: float = 60.0

    def key(self) -> str:
        payload = json.dumps([self.model, self.temperature, self.prompt])
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True)
class CompletionResult:
    text: str | None
    error: str | None = None
    attempts: int = 1

    @property
    def ok(self) -> bool:
        return self.error is None


class ChatClient:
    """Minimal chat-completion client with retry and exponential backoff."""

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        transport: httpx.BaseTransport | None = None,
        backoff: float = 1.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = base_url or os.environ.get("LUDOEVAL_API_BASE")
        self.api_key = api_key or os.environ.get("LUDOEVAL_API_KEY")
        if not self.api_key:
            raise MissingCredentialsError("set LUDOEVAL_API_KEY to query a model")
        if not self.base_url:
            raise MissingCredentialsError("set LUDOEVAL_API_BASE to the chat-completion endpoint")
        self.backoff = backoff
        self.sleep = sleep
        self._http = httpx.Client(transport=transport)

    def complete(self, request: CompletionRequest) -> CompletionResult:
        url = self.base_url.rstrip("/") + "/chat/completions"
        body = {
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
        }
        headers = {"Authorization": f"Bearer {self.api_key}"}
        error = None
        attempts = 0
        for attempt in range(request.max_retries + 1):
            attempts += 1
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self._http.post(url, json=body, headers=headers, timeout=request.timeout)
            except httpx.TimeoutException as exc:
                error = f"timeout: {exc}"
                continue
            except httpx.TransportError as exc:
                error = f"transport: {exc}"
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                error = f"http {resp.status_code}"
                continue
            if resp.status_code >= 400:
                return CompletionResult(None, f"http {resp.status_code}: {resp.text[:200]}", attempts)
            try:
                return CompletionResult(resp.json()["choices"][0]["message"]["content"], None, attempts)
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                return CompletionResult(None, f"bad response body: {exc}", attempts)
        return CompletionResult(None, f"retries exhausted ({error})", attempts)


class StubClient:
    """Answers from a local callable; used for dry runs and tests."""

    def __init__(self, responder: Callable[[CompletionRequest], str]):
        self.responder = responder
        self.calls = 0

    def complete(self, request: CompletionRequest) -> CompletionResult:
        self.calls += 1
        return CompletionResult(self.responder(request))


class ReplayClient:
    """Record/replay fixture keyed by a hash of (model, temperature, prompt).

    With an ``inner`` client, unseen requests are forwarded and recorded;
    without one they come back as a ``missing fixture`` error.
    """

    def __init__(self, path: str | Path, inner=None):
        self.path = Path(path)
        self.inner = inner
        self._lock = threading.Lock()
        self.table: dict[str, str] = {}
        if self.path.exists():
            for line in self.path.read_text().splitlines():
                if line.strip():
                    row = json.loads(line)
                    self.table[row["key"]] = row["text"]

    def complete(self, request: CompletionRequest) -> CompletionResult:
        key = request.key()
        with self._lock:
            if key in self.table:
                return CompletionResult(self.table[key])
        if self.inner is None:
            return CompletionResult(None, "missing fixture")
        result = self.inner.complete(request)
        if result.ok:
            with self._lock:
                self.table[key] = result.text
                with self.path.open("a") as fh:
                    fh.write(json.dumps({"key": key, "model": request.model, "text": result.text}) + "\n")
        return result


class RateLimiter:
    def __init__(self, per_second: float | None):
        self.interval = 1.0 / per_second if per_second else 0.0
        self._lock = threading.Lock()
        self._next = 0.0

    def wait(self):
        if not self.interval:
            return
        with self._lock:
            now = time.monotonic()
            slot = max(now, self._next)
            self._next = slot + self.interval
        if slot > now:
            time.sleep(slot - now)


def complete_many(client, requests: list[CompletionRequest], workers: int = 4, per_second: float | None = None):
    """Run requests concurrently; results come back in input order."""
    limiter = RateLimiter(per_second)

    def run(req):
        limiter.wait()
        return client.complete(req)

    if workers <= 1:
        return [run(r) for r in requests]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, requests))


def spot_from_state(state: GameState, player: int, dice: int, spot_id: str = "live") -> SpotScenario:
    """Wrap a live game position so it can be rendered like a spot."""
    return SpotScenario(
        id=spot_id,
        scenario="capture",  # label is not rendered
        players=state.players,
        llm_player_id=player,
        current_player=player,
        dice=dice,
        tokens={p: state.tokens[p] for p in state.players},
    )


class LLMAgent:
    """Queries a model for a token index and adjudicates the answer."""

    def __init__(self, client, model: str, persona: str = "none", seed: int = 0, lenient: bool = False):
        self.client = client
        self.model = model
        self.persona = persona
        self.lenient = lenient
        self.rng = random.Random(f"llm:{model}:{seed}")

    def decide_spot(self, spot: SpotScenario, persona: str | None = None, rng: random.Random | None = None):
        spec = PromptSpec(spot, persona or self.persona, include_history=bool(spot.history_text))
        result = self.client.complete(CompletionRequest(render_prompt(spec), self.model))
        parsed = parse_response(result.text, lenient=self.lenient)
        decision = adjudicate(parsed, spot, rng or self.rng, raw_text=result.text or "")
        return decision, result

    def choose(self, state: GameState, player: int, dice: int) -> Move | None:
        spot = spot_from_state(state, player, dice)
        if not any(isinstance(token_option(state, player, dice, i), Move) for i in range(4)):
            return None
        decision, _ = self.decide_spot(spot)
        return decision.final_move
