"""Acceptance checks, one test per criterion, each printing a single verdict line.

Set LUDOEVAL_OFFICIAL_CORPUS to a directory of published ``spots_*.json``
files to run the official-corpus parts of criteria 3 and 10; without it those
parts are reported as skipped and only the generated-corpus parts run.
"""
import os
import random
import time
from collections import defaultdict
from pathlib import Path

import pytest

from ludoeval.agents import heuristic_decide
from ludoeval.board import LAYOUT, GameState, legal_moves, winner
from ludoeval.harness import MatchConfig, run_spot_eval, run_tournament
from ludoeval.llm import PromptSpec, adjudicate, parse_response, render_prompt
from ludoeval.metrics import Rate, behavioral_rates, build_report, grudge_metrics, gt_alignment, make_record
from ludoeval.search import (
    SearchConfig,
    _raw_maxn,
    chance_value,
    decision_value,
    evaluate_2p,
    evaluate_maxn,
    gt_decide,
    root_values,
)
from ludoeval.spots import CATEGORIES, generate_corpus, load_corpus_dir, validate_spot

from .acceptance_log import verdict
from .conftest import random_state
from .oracle import brute_moves, engine_moves
from .test_llm import GOLDEN
from .test_metrics import _pairs, alignment_fixture, grudge_fixture

SEED = 0  # documented default master seed; not tuned
CFG = SearchConfig()
OFFICIAL = os.environ.get("LUDOEVAL_OFFICIAL_CORPUS")


@pytest.fixture(scope="module")
def generated():
    t0 = time.time()
    spots = generate_corpus(40, seed=SEED, per_player_count=True)
    return spots, time.time() - t0


@pytest.fixture(scope="module")
def official():
    if not OFFICIAL:
        return None
    return load_corpus_dir(Path(OFFICIAL))


def _by_category(records):
    out = defaultdict(list)
    for r in records:
        out[r.category].append(r)
    return out


def _gt_records(spots):
    return [make_record(s, "gt", "none", gt_decide(CFG, s.state, s.current_player, s.dice).move) for s in spots]


# 1 -------------------------------------------------------------------------


def test_c01_skill_ladder():
    t0 = time.time()
    res = run_tournament(MatchConfig(["random", "heuristic", "gt"], games=200, seed=SEED))
    m = res.matrix
    hr, gr, gh = m["heuristic"]["random"], m["gt"]["random"], m["gt"]["heuristic"]
    ok = hr >= 0.60 and gr >= 0.60 and abs(gh - 0.59) <= 0.08
    assert verdict(
        1, ok, f"H>R {hr:.3f} (>=0.60), GT>R {gr:.3f} (>=0.60), GT>H {gh:.3f} (0.59+-0.08); {time.time() - t0:.0f}s"
    )


# 2 -------------------------------------------------------------------------


def test_c02_gt_history_invariance(generated, tmp_path):
    spots, _ = generated
    grudge = [s for s in spots if s.category == "grudge_paired"]
    personas = ["none", "aggressive", "greedy", "safe", "unforgiving"]
    identical = True
    change = {}
    for agent in ("gt", "heuristic"):
        recs = run_spot_eval(agent, grudge, personas, tmp_path / f"{agent}.jsonl")
        tokens = defaultdict(set)
        for r in recs:
            tokens[r.spot_id].add(r.final_token)
        identical &= all(len(t) == 1 for t in tokens.values())
        report = build_report(recs, gt_agent="gt", gt_records=recs if agent == "gt" else None)
        change[agent] = [report.grudge[(agent, p)].change_rate for p in personas]
    gt_zero = all(r.numerator == 0 and r.denominator > 0 for r in change["gt"])
    pairs = change["gt"][0].denominator
    assert verdict(
        2, gt_zero and identical, f"GT change_rate 0 over {pairs} pairs x 5 personas: {gt_zero}; "
        f"GT/Heuristic identical across personas: {identical}"
    )


# 3 -------------------------------------------------------------------------


def _reference_columns(spots):
    gt = _by_category(_gt_records(spots))
    heur = _by_category(
        make_record(s, "heuristic", "none", heuristic_decide(s.state, s.current_player, s.dice).move) for s in spots
    )
    return gt, heur


def test_c03_reference_behaviour(generated, official):
    spots, _ = generated
    gt, heur = _reference_columns(spots)
    cvf = behavioral_rates(gt["capture_vs_home_finish"])["home_finish_rate"]
    bring = behavioral_rates(gt["extra_turn"])["bring_out_rate"]
    cvs = behavioral_rates(gt["capture_vs_safe"])["capture_rate"]
    capture_spots = [s for s in spots if any(m.capture_victim for m in legal_moves(s.state, s.current_player, s.dice))]
    heur_caps = sum(heuristic_decide(s.state, s.current_player, s.dice).move.capture_victim is not None for s in capture_spots)
    parts = {
        "GT cvf finish": (cvf.value == 1.0, f"{cvf.numerator}/{cvf.denominator}"),
        "GT extra_turn bring-out": (bring.value == 1.0, f"{bring.numerator}/{bring.denominator}"),
        "GT cvs capture>=0.95": (cvs.value >= 0.95, f"{cvs.value:.3f}"),
        "Heuristic captures when legal": (heur_caps == len(capture_spots), f"{heur_caps}/{len(capture_spots)}"),
    }
    detail = "; ".join(f"{k} {v}" + ("" if ok else " [miss]") for k, (ok, v) in parts.items())
    ok = all(ok for ok, _ in parts.values())
    if official is None:
        detail += "; official corpus not supplied, table columns skipped"
    else:
        ok_off, off_detail = _official_columns(official)
        ok &= ok_off
        detail += "; official: " + off_detail
    assert verdict(3, ok, f"generated seed {SEED}: {detail}")


def _pooled(records_by_cat, cats, metric):
    num = den = 0
    for c in cats:
        r = behavioral_rates(records_by_cat.get(c, []))[metric]
        num += r.numerator
        den += r.denominator
    return Rate(num, den).value


def _official_columns(spots):
    gt, heur = _reference_columns(spots)
    checks = []

    def near(name, got, want, tol):
        checks.append((name, got is not None and abs(got - want) <= tol, got, want))

    near("GT capture_rate", _pooled(gt, ["capture"], "capture_rate"), 0.88, 0.03)
    near("GT safe_rate", _pooled(gt, ["safe"], "safe_rate"), 0.88, 0.03)
    near("GT home_entry_rate", _pooled(gt, ["home_entry"], "home_entry_rate"), 0.13, 0.03)
    near("GT bring_out", _pooled(gt, ["extra_turn"], "bring_out_rate"), 1.00, 0.03)
    near("GT cvf home_finish", _pooled(gt, ["capture_vs_home_finish"], "home_finish_rate"), 1.00, 0.03)
    near("GT cvs capture", _pooled(gt, ["capture_vs_safe"], "capture_rate"), 0.98, 0.03)
    for cat in ("capture_vs_home", "capture_vs_home_finish", "capture_vs_openexisting", "capture_vs_safe"):
        near(f"H {cat} capture", _pooled(heur, [cat], "capture_rate"), 1.00, 0.0)
    near("H cvf home_finish", _pooled(heur, ["capture_vs_home_finish"], "home_finish_rate"), 0.00, 0.0)
    near("H bring_out", _pooled(heur, ["extra_turn"], "bring_out_rate"), 1.00, 0.0)
    bad = [f"{n} {g} vs {w}" for n, ok, g, w in checks if not ok]
    return not bad, "all columns match" if not bad else "mismatch: " + ", ".join(bad)


# 4 -------------------------------------------------------------------------


def test_c04_engine_oracle():
    rng = random.Random(SEED)
    t0 = time.time()
    states = mismatches = 0
    while states < 10_000:
        s = random_state(rng)
        states += 1
        for d in range(1, 7):
            if engine_moves(legal_moves(s, s.current_player, d)) != brute_moves(s.token_map(), s.current_player, d):
                mismatches += 1
    elapsed = time.time() - t0
    assert verdict(4, mismatches == 0 and elapsed < 60, f"{states} states x 6 dice, {mismatches} discrepancies, {elapsed:.1f}s")


# 5 -------------------------------------------------------------------------


def test_c05_search_algebra():
    rng = random.Random(SEED + 5)
    failures = []

    # depth-0 value equals the evaluator
    cfg0 = SearchConfig(depth=0)
    for _ in range(200):
        s = random_state(rng)
        if winner(s) is not None:
            continue
        v = chance_value(cfg0, s, s.current_player, 0)
        want = evaluate_2p(CFG, s, s.current_player) if len(s.players) == 2 else evaluate_maxn(CFG, s)
        if v != want:
            failures.append("depth0")

    # chance node = mean of six recomputed decision values
    for _ in range(60):
        s = random_state(rng)
        p = s.current_player
        v = chance_value(CFG, s, p, 2)
        parts = [decision_value(CFG, s, p, d, 2) for d in range(1, 7)]
        want = tuple(sum(x[i] for x in parts) / 6 for i in range(len(v))) if isinstance(v, tuple) else sum(parts) / 6
        if winner(s) is None and v != want:
            failures.append("chance-mean")

    anti = 0
    for _ in range(1000):
        s = random_state(rng, players=(0, 1))
        anti += evaluate_2p(CFG, s, 0) != -evaluate_2p(CFG, s, 1)
    if anti:
        failures.append(f"antisymmetry x{anti}")

    worst = 0.0
    for _ in range(1000):
        s = random_state(rng, players=tuple(sorted(rng.sample(range(4), rng.choice((3, 4))))))
        worst = max(worst, abs(sum(_raw_maxn(CFG, s, LAYOUT))))
    if worst > 1e-12:
        failures.append(f"maxn sum {worst:g}")

    memo_diff = 0
    off = SearchConfig(memo_enabled=False)
    for _ in range(100):
        s = random_state(rng)
        d = rng.randint(1, 6)
        memo_diff += root_values(CFG, s, s.current_player, d) != root_values(off, s, s.current_player, d)
    if memo_diff:
        failures.append(f"memo x{memo_diff}")

    assert verdict(
        5, not failures, f"depth0, chance mean, antisymmetry(1000), MaxN |sum|<= {worst:.1e}, memo on/off(100)"
        + (f"; failed: {failures}" if failures else "")
    )


# 6 -------------------------------------------------------------------------


def test_c06_evaluator_examples():
    mirror = GameState.from_tokens({0: [5, -1, -1, -1], 1: [18, -1, -1, -1]}, 0)
    one_fin = GameState.from_tokens({0: [57, 1, -1, -1], 1: [41, 43, -1, -1]}, 0)
    done = GameState.from_tokens({0: [57] * 4, 1: [-1] * 4}, 0)
    got = (evaluate_2p(CFG, mirror, 0), evaluate_2p(CFG, one_fin, 0), evaluate_2p(CFG, done, 0))
    assert verdict(6, got == (0.0, 0.20, 0.999), f"values {got} expected (0, 0.20, 0.999)")


# 7 -------------------------------------------------------------------------


def test_c07_prompt_golden(cvs_spot):
    text = render_prompt(PromptSpec(cvs_spot, "none"))
    banners = ["BOARD & POSITION SYSTEM", "TOKEN STATES", "GAME RULES", "CURRENT GAME STATE", "OUTPUT FORMAT (STRICT)"]
    idx = [text.find(b) for b in banners]
    golden = text == GOLDEN.read_text()
    ordered = -1 not in idx and idx == sorted(idx)
    aggressive = "You are an aggressive Ludo player" in render_prompt(PromptSpec(cvs_spot, "aggressive"))
    assert verdict(7, golden and ordered and aggressive, f"golden match {golden}, banners in order {ordered}, aggressive text {aggressive}")


# 8 -------------------------------------------------------------------------


def test_c08_parser_adjudication(cvs_spot):
    from ludoeval.spots import SpotScenario

    ok_parse = parse_response("2 | reason")
    bad_parse = parse_response("I move token 2")
    blocked = SpotScenario.from_dict(
        {"id": "blk", "scenario": "blocked", "players": [0, 1], "llm_player_id": 0, "current_player": 0,
         "dice": 2, "tokens": {"0": [10, 12, -1, -1], "1": [30, -1, -1, -1]}}
    )
    adj = adjudicate(parse_response("0 | go"), blocked, random.Random(SEED))
    fallback_legal = adj.final_move in legal_moves(blocked.state, 0, 2)
    answers = ["0 | a", "1 | b", "junk", "2 | c", "nope", "3 | d", "0 | e", "9 | f", "1 | g", "free text"]
    rng = random.Random(SEED)
    recs = []
    for i, text in enumerate(answers):
        d = adjudicate(parse_response(text), cvs_spot, rng, raw_text=text)
        recs.append(make_record(cvs_spot, "m", "none", d.final_move, was_format_invalid=d.was_format_invalid,
                                was_move_invalid=d.was_move_invalid, chosen_token=d.chosen_token))
    inv = behavioral_rates(recs)["invalid_rate"]
    ok = (
        ok_parse.format_valid and ok_parse.token_index == 2
        and not bad_parse.format_valid
        and adj.was_move_invalid and fallback_legal
        and inv == Rate(4, 10) and inv.value == 0.40
    )
    assert verdict(8, ok, f"'2 | reason' -> {ok_parse.token_index}; free text invalid; blocked -> move-invalid with legal fallback; invalid_rate {inv.value}")


# 9 -------------------------------------------------------------------------


def test_c09_metric_fixtures():
    change = grudge_metrics(grudge_fixture()).change_rate
    rng = random.Random(SEED + 9)
    identity = True
    for _ in range(200):
        rows = [tuple(rng.random() < 0.5 if k > 1 else rng.randrange(4) for k in range(6)) for _ in range(rng.randint(1, 20))]
        block = grudge_metrics(_pairs(rows))
        if block.grudge_effect is not None:
            identity &= block.grudge_effect == block.retaliation_grudge_rate.value - block.retaliation_noconflict_rate.value
    agent, gt = alignment_fixture()
    align = gt_alignment(agent, gt).overall
    ok = change == Rate(1, 3) and identity and align.value == 0.60
    assert verdict(9, ok, f"change_rate {change.numerator}/{change.denominator}, delta identity {identity} (200 fixtures), alignment {align.value}")


# 10 ------------------------------------------------------------------------


def test_c10_corpus(generated, official):
    spots, seconds = generated
    per = defaultdict(int)
    bad = [s.id for s in spots if validate_spot(s)]
    for s in spots:
        if not s.id.endswith("_b"):
            per[(s.category, len(s.players))] += 1
    complete = all(per[(c, k)] == 40 for c in CATEGORIES for k in (2, 3, 4))
    ok = complete and not bad
    detail = f"generated {len(spots)} spots (40 per category per player count: {complete}) in {seconds:.1f}s, {len(bad)} failing predicates"
    if official is None:
        detail += "; official corpus not supplied, skipped"
    else:
        off_bad = [s.id for s in official if validate_spot(s)]
        ok &= not off_bad
        detail += f"; official {len(official)} spots, {len(off_bad)} failing"
    assert verdict(10, ok, detail)
