"""Command-line entry point: ``ludoeval <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import harness
from .board import DEFAULT_TURN_CAP
from .llm import PERSONAS, ChatClient, ReplayClient
from .metrics import build_report, emit_report
from .spots import (
    CATEGORIES,
    GenerationError,
    check_spots,
    generate_corpus,
    load_corpus_dir,
    write_corpus_dir,
)

log = logging.getLogger("ludoeval")


def load_config(path: str | None) -> dict:
    """JSON config; keys: search, models, api, turn_cap, games, paths."""
    if not path:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise harness.ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise harness.ConfigError(f"config {path} must hold a JSON object")
    return cfg


def _search(args, cfg):
    search = dict(cfg.get("search", {}))
    if args.depth is not None:
        search["depth"] = args.depth
    return harness.search_from_dict(search)


def _resolve_agent(spec: str, cfg: dict) -> str:
    # "llm:<alias>" may name a model listed under config "models"
    if spec.startswith("llm:"):
        alias = spec[4:]
        return "llm:" + cfg.get("models", {}).get(alias, alias)
    return spec


def _client(args, cfg):
    api = cfg.get("api", {})
    inner = None
    if not args.offline:
        inner = ChatClient(base_url=api.get("base_url"))
    if args.fixtures:
        return ReplayClient(args.fixtures, inner)
    if inner is None:
        raise harness.ConfigError("--offline needs --fixtures")
    return inner


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def _match(args, cfg, roster):
    return harness.MatchConfig(
        roster=roster,
        games=args.games or cfg.get("games", 200),
        seed=args.seed,
        turn_cap=cfg.get("turn_cap", DEFAULT_TURN_CAP),
        search=_search(args, cfg),
        self_play=getattr(args, "self_play", False),
    )


def cmd_simulate(args, cfg, out: Path) -> int:
    seats = [_resolve_agent(a, cfg) for a in args.agents]
    client = _client(args, cfg) if any(s.startswith("llm:") for s in seats) else None
    match = harness.MatchConfig(
        roster=seats, games=1, seed=args.seed, turn_cap=cfg.get("turn_cap", DEFAULT_TURN_CAP), search=_search(args, cfg)
    )
    res = harness.run_game(match, seats, args.seed, client=client)
    doc = {
        "seed": res.seed,
        "seats": res.seats,
        "winner": res.winner,
        "winner_agent": res.winner_agent,
        "half_turns": res.half_turns,
        "adjudicated": res.adjudicated,
        "captures": res.captures,
        "finishes": res.finishes,
        "dice_rng": harness.DICE_RNG,
        "transcript": [{"player": p, "dice": d, "token": t} for p, d, t in res.transcript],
    }
    _write(out / "transcript.json", json.dumps(doc, indent=1) + "\n")
    print(f"winner: player {res.winner} ({res.winner_agent}) after {res.half_turns} half-turns"
          + (" [adjudicated at turn cap]" if res.adjudicated else ""))
    return 0


def cmd_tournament(args, cfg, out: Path) -> int:
    roster = [_resolve_agent(a, cfg) for a in args.agents]
    if any(a.startswith("llm:") for a in roster):
        raise harness.ConfigError("tournaments take built-in agents only; use simulate for model games")
    match = _match(args, cfg, roster)
    t0 = time.time()
    result = harness.run_tournament(match, workers=args.workers)
    _write(out / "matrix.csv", harness.matrix_csv(result))
    _write(out / "games.csv", harness.games_csv(result))
    _write(out / "match.json", json.dumps(match.snapshot(), indent=2, sort_keys=True) + "\n")
    print(harness.matrix_csv(result), end="")
    log.info("tournament done in %.1fs", time.time() - t0)
    return 0


def cmd_gen_spots(args, cfg, out: Path) -> int:
    categories = args.categories or list(CATEGORIES)
    try:
        spots = generate_corpus(args.per_category, args.seed, categories, per_player_count=args.per_player_count)
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    paths = write_corpus_dir(spots, out)
    print(f"wrote {len(spots)} spots to {len(paths)} files under {out}")
    return 0


def _gather(paths: list[str]) -> list[Path]:
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(p.glob("spots_*.json")))
        else:
            files.append(p)
    return files


def cmd_validate_spots(args, cfg, out: Path) -> int:
    files = _gather(args.paths)
    if not files:
        print("error: no spot files found", file=sys.stderr)
        return 2
    lines = []
    total = bad = 0
    for f in files:
        try:
            text = f.read_text()
        except OSError as exc:
            lines.append(f"{f}: unreadable: {exc}")
            bad += 1
            continue
        spots, errors = check_spots(text)
        total += len(spots) + len(errors)
        bad += len(errors)
        for e in errors:
            lines.append(f"{f}: {e}")
    lines.append(f"checked {total} spots in {len(files)} files, {bad} invalid")
    report = "\n".join(lines) + "\n"
    _write(out / "validation.txt", report)
    print(report, end="")
    return 1 if bad else 0


def cmd_eval(args, cfg, out: Path) -> int:
    agent = _resolve_agent(args.agent, cfg)
    corpus = load_corpus_dir(args.corpus)
    personas = args.personas or list(PERSONAS)
    client = _client(args, cfg) if agent.startswith("llm:") else None
    api = cfg.get("api", {})
    safe_name = agent.replace(":", "_").replace("/", "_")
    manifest_path = out / f"manifest_{safe_name}.json"
    manifest = harness.new_manifest(
        corpus=str(args.corpus),
        config={"agent": agent, "personas": personas, "seed": args.seed, "search": cfg.get("search", {}),
                "depth": args.depth, "dice_rng": harness.DICE_RNG},
    )
    manifest.write(manifest_path)
    records = harness.run_spot_eval(
        agent,
        corpus,
        personas,
        out / f"records_{safe_name}.jsonl",
        manifest=manifest,
        search=_search(args, cfg),
        client=client,
        seed=args.seed,
        workers=api.get("workers", 4),
        per_second=api.get("per_second"),
        max_retries=api.get("max_retries", 3),
        timeout=api.get("timeout", 60.0),
        lenient=args.lenient,
    )
    manifest.finished = time.time()
    manifest.write(manifest_path)
    errors = sum(r.is_transport_error for r in records)
    print(f"{len(records)} records for {agent}" + (f", {errors} transport errors" if errors else ""))
    return 0


def cmd_report(args, cfg, out: Path) -> int:
    records = []
    for p in args.records:
        if not Path(p).exists():
            print(f"error: no such record file: {p}", file=sys.stderr)
            return 2
        records.extend(harness.read_records(p))
    gt = None
    if args.gt_records:
        gt = harness.read_records(args.gt_records)
    report = build_report(records, gt_records=gt, provenance={"records": args.records})
    csv_text, json_text = emit_report(report)
    _write(out / "report.csv", csv_text)
    _write(out / "report.json", json_text)
    print(f"report over {len(records)} records written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--config", help="JSON config with search, models and api sections")
    common.add_argument("--out", default="out", help="output directory (default ./out)")
    common.add_argument("--depth", type=int, help="override GT search depth")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ludoeval", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def llm_flags(p):
        p.add_argument("--fixtures", help="JSONL replay file for model completions")
        p.add_argument("--offline", action="store_true", help="never call the network; replay only")

    p = sub.add_parser("simulate", parents=[common], help="play one game and write its transcript")
    p.add_argument("agents", nargs="+", help="2-4 agents: random, heuristic, gt, llm:<model>")
    llm_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tournament", parents=[common], help="pairwise win-rate matrix")
    p.add_argument("agents", nargs="+")
    p.add_argument("--games", type=int, help="games per pairing (default 200)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--self-play", action="store_true", help="also fill the diagonal")
    p.set_defaults(func=cmd_tournament)

    p = sub.add_parser("gen-spots", parents=[common], help="generate a synthetic spot corpus")
    p.add_argument("--per-category", type=int, default=40)
    p.add_argument("--per-player-count", action="store_true",
                   help="generate --per-category spots for each of 2, 3 and 4 players")
    p.add_argument("--categories", nargs="*", choices=CATEGORIES + ("grudge",), metavar="CATEGORY")
    p.set_defaults(func=cmd_gen_spots)

    p = sub.add_parser("validate-spots", parents=[common], help="check spot files against the engine")
    p.add_argument("paths", nargs="+", help="spot files or corpus directories")
    p.set_defaults(func=cmd_validate_spots)

    p = sub.add_parser("eval", parents=[common], help="evaluate one agent on a corpus")
    p.add_argument("--agent", required=True)
    p.add_argument("--corpus", required=True, help="directory of spots_*.json files")
    p.add_argument("--personas", nargs="*", choices=PERSONAS)
    p.add_argument("--lenient", action="store_true", help="accept a bare index as a valid answer")
    llm_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", parents=[common], help="aggregate record logs into metrics tables")
    p.add_argument("records", nargs="+", help="record JSONL files")
    p.add_argument("--gt-records", help="GT records to align against (default: gt agent in inputs)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        out = Path(args.out)
        return args.func(args, cfg, out)
    except (harness.ConfigError, harness.AgentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
