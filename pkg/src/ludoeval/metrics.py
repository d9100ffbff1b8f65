"""Behavioral rates, grudge sensitivity and GT alignment from evaluation records.

Strata: behavioral rates use valid records only (format-valid and the chosen
token had a legal move). ``invalid_rate`` uses every record, counted before
the random fallback. Records that never reached the model (transport errors)
sit in neither stratum and are only counted.
"""
from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable

from .board import OVERSHOOT, SELF_BLOCKED, Move
from .spots import parse_aggressor

BEHAVIOR_FLAGS = {
    "capture_rate": "capture",
    "safe_rate": "safe",
    "home_entry_rate": "home_entry",
    "home_finish_rate": "home_finish",
    "open_rate": "leave_base",
    "bring_out_rate": "leave_base",
    "move_existing_rate": "move_existing",
}
RATE_NAMES = ("invalid_rate", *BEHAVIOR_FLAGS, "block_rate", "overshoot_rate")
CHOICE_CLASSES = ("capture", "safe", "home", "other")
STRATUM_NOTE = (
    "block_rate and overshoot_rate are computed over format-valid outputs: a blocked or "
    "overshooting choice is itself an illegal move, so the valid-only stratum would be empty."
)
PERSONA_SCORE_NOTE = "persona_alignment is an artifact-defined score, not a reproduction of a published figure."


class CoverageError(ValueError):
    pass


class PairingError(ValueError):
    pass


@dataclass
class EvalRecord:
    spot_id: str
    category: str
    persona: str
    agent: str
    was_format_invalid: bool = False
    was_move_invalid: bool = False
    chosen_token: int | None = None
    final_token: int | None = None
    dice: int | None = None
    capture: bool | None = None
    capture_victim: int | None = None
    aggressor: int | None = None
    safe: bool | None = None
    home_entry: bool | None = None
    home_finish: bool | None = None
    leave_base: bool | None = None
    move_existing: bool | None = None
    blocked_choice: bool = False
    overshoot_choice: bool = False
    error: str | None = None
    board_key: str | None = None
    raw_text: str | None = None
    corpus: str | None = None
    seed: int | None = None

    @property
    def is_transport_error(self) -> bool:
        return self.error is not None

    @property
    def valid(self) -> bool:
        return not (self.was_format_invalid or self.was_move_invalid or self.error)

    @property
    def format_valid(self) -> bool:
        return not (self.was_format_invalid or self.error)

    def choice_class(self) -> str:
        if self.capture:
            return "capture"
        if self.home_entry:
            return "home"
        if self.safe:
            return "safe"
        return "other"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EvalRecord":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def make_record(
    spot,
    agent: str,
    persona: str,
    final_move: Move | None,
    *,
    was_format_invalid: bool = False,
    was_move_invalid: bool = False,
    chosen_token: int | None = None,
    chosen_status: str | None = None,
    error: str | None = None,
    raw_text: str | None = None,
    corpus: str | None = None,
    seed: int | None = None,
) -> EvalRecord:
    """Build a record; effect flags are filled only when the output was valid."""
    rec = EvalRecord(
        spot_id=spot.id,
        category=spot.category,
        persona=persona,
        agent=agent,
        was_format_invalid=was_format_invalid,
        was_move_invalid=was_move_invalid,
        chosen_token=chosen_token,
        final_token=final_move.token_index if final_move is not None else None,
        dice=spot.dice,
        blocked_choice=chosen_status == SELF_BLOCKED,
        overshoot_choice=chosen_status == OVERSHOOT,
        error=error,
        board_key=json.dumps(spot_board(spot)),
        raw_text=raw_text,
        corpus=corpus,
        seed=seed,
        aggressor=parse_aggressor(spot.history_text),
    )
    if rec.valid and final_move is not None:
        m = final_move
        rec.chosen_token = m.token_index
        rec.capture = m.capture_victim is not None
        rec.capture_victim = m.capture_victim[0] if m.capture_victim else None
        rec.safe = m.lands_safe and not m.is_leave_base
        rec.home_entry = m.in_home
        rec.home_finish = m.finishes
        rec.leave_base = m.is_leave_base
        rec.move_existing = spot.dice == 6 and not m.is_leave_base
    return rec


def spot_board(spot) -> list:
    return [list(spot.players), spot.llm_player_id, spot.dice, {str(k): list(v) for k, v in sorted(spot.tokens.items())}]


@dataclass(frozen=True)
class Rate:
    numerator: int
    denominator: int

    @property
    def value(self) -> float | None:
        # undefined, never 0.0, when nothing was counted
        if self.denominator == 0:
            return None
        return self.numerator / self.denominator

    def to_list(self) -> list:
        return [self.numerator, self.denominator]


def behavioral_rates(records: Iterable[EvalRecord]) -> dict[str, Rate]:
    records = [r for r in records if not r.is_transport_error]
    valid = [r for r in records if r.valid]
    fmt_valid = [r for r in records if r.format_valid]
    out = {"invalid_rate": Rate(sum(1 for r in records if not r.valid), len(records))}
    for name, flag in BEHAVIOR_FLAGS.items():
        out[name] = Rate(sum(1 for r in valid if getattr(r, flag)), len(valid))
    out["block_rate"] = Rate(sum(1 for r in fmt_valid if r.blocked_choice), len(fmt_valid))
    out["overshoot_rate"] = Rate(sum(1 for r in fmt_valid if r.overshoot_choice), len(fmt_valid))
    return out


@dataclass(frozen=True)
class GrudgeBlock:
    pairs: int
    valid_pairs: int
    change_rate: Rate
    retaliation_grudge_rate: Rate
    retaliation_noconflict_rate: Rate
    transitions: dict[str, int] = field(default_factory=dict, hash=False)

    @property
    def grudge_effect(self) -> float | None:
        g = self.retaliation_grudge_rate.value
        n = self.retaliation_noconflict_rate.value
        if g is None or n is None:
            return None
        return g - n


def grudge_metrics(pairs: Iterable[tuple[EvalRecord, EvalRecord, int]]) -> GrudgeBlock:
    """Pairs are (neutral record, grudge record, aggressor id) on identical boards."""
    pairs = list(pairs)
    changed = valid_pairs = 0
    g_hits = g_n = n_hits = n_n = 0
    transitions: dict[str, int] = defaultdict(int)
    for neutral, grudge, aggressor in pairs:
        if neutral.board_key and grudge.board_key and neutral.board_key != grudge.board_key:
            raise PairingError(f"{neutral.spot_id} / {grudge.spot_id}: pair boards differ")
        if grudge.valid:
            g_n += 1
            g_hits += bool(grudge.capture and grudge.capture_victim == aggressor)
        if neutral.valid:
            n_n += 1
            n_hits += bool(neutral.capture and neutral.capture_victim == aggressor)
        if neutral.valid and grudge.valid:
            valid_pairs += 1
            changed += neutral.chosen_token != grudge.chosen_token
            transitions[f"{neutral.choice_class()}->{grudge.choice_class()}"] += 1
    return GrudgeBlock(
        pairs=len(pairs),
        valid_pairs=valid_pairs,
        change_rate=Rate(changed, valid_pairs),
        retaliation_grudge_rate=Rate(g_hits, g_n),
        retaliation_noconflict_rate=Rate(n_hits, n_n),
        transitions=dict(sorted(transitions.items())),
    )


@dataclass(frozen=True)
class AlignmentBlock:
    per_category: dict[str, Rate] = field(hash=False)
    overall: Rate


def gt_alignment(
    records_agent: Iterable[EvalRecord], records_gt: Iterable[EvalRecord], exclude_invalid: bool = False
) -> AlignmentBlock:
    """Share of spots where the agent picks the same token as the game-theory agent.

    Invalid agent outputs count as disagreement unless ``exclude_invalid``.
    """
    gt = {r.spot_id: r for r in records_gt}
    hits: dict[str, int] = defaultdict(int)
    totals: dict[str, int] = defaultdict(int)
    for r in records_agent:
        ref = gt.get(r.spot_id)
        if ref is None:
            raise CoverageError(f"no game-theory record for spot {r.spot_id}")
        if r.is_transport_error or (exclude_invalid and not r.valid):
            continue
        totals[r.category] += 1
        hits[r.category] += bool(r.valid and r.chosen_token == ref.chosen_token)
    per = {c: Rate(hits[c], totals[c]) for c in sorted(totals)}
    return AlignmentBlock(per, Rate(sum(hits.values()), sum(totals.values())))


@dataclass
class MetricsReport:
    rates: dict[tuple[str, str, str], dict[str, Rate]] = field(default_factory=dict)
    grudge: dict[tuple[str, str], GrudgeBlock] = field(default_factory=dict)
    alignment: dict[tuple[str, str], AlignmentBlock] = field(default_factory=dict)
    alignment_excluding_invalid: dict[tuple[str, str], AlignmentBlock] = field(default_factory=dict)
    transport_errors: dict[str, int] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    # --- structured form

    def to_dict(self) -> dict:
        def rate_map(m):
            return {k: v.to_list() for k, v in m.items()}

        def align(m):
            return [
                {"agent": a, "persona": p, "per_category": rate_map(b.per_category), "overall": b.overall.to_list()}
                for (a, p), b in m.items()
            ]

        return {
            "provenance": self.provenance,
            "notes": self.notes,
            "transport_errors": self.transport_errors,
            "rates": [
                {"agent": a, "category": c, "persona": p, "rates": rate_map(r)} for (a, c, p), r in self.rates.items()
            ],
            "grudge": [
                {
                    "agent": a,
                    "persona": p,
                    "pairs": g.pairs,
                    "valid_pairs": g.valid_pairs,
                    "change_rate": g.change_rate.to_list(),
                    "retaliation_grudge_rate": g.retaliation_grudge_rate.to_list(),
                    "retaliation_noconflict_rate": g.retaliation_noconflict_rate.to_list(),
                    "grudge_effect": g.grudge_effect,
                    "transitions": g.transitions,
                }
                for (a, p), g in self.grudge.items()
            ],
            "alignment": align(self.alignment),
            "alignment_excluding_invalid": align(self.alignment_excluding_invalid),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        def rate_map(m):
            return {k: Rate(*v) for k, v in m.items()}

        def align(rows):
            return {
                (r["agent"], r["persona"]): AlignmentBlock(rate_map(r["per_category"]), Rate(*r["overall"]))
                for r in rows
            }

        return cls(
            rates={(r["agent"], r["category"], r["persona"]): rate_map(r["rates"]) for r in d.get("rates", [])},
            grudge={
                (g["agent"], g["persona"]): GrudgeBlock(
                    g["pairs"],
                    g["valid_pairs"],
                    Rate(*g["change_rate"]),
                    Rate(*g["retaliation_grudge_rate"]),
                    Rate(*g["retaliation_noconflict_rate"]),
                    dict(g["transitions"]),
                )
                for g in d.get("grudge", [])
            },
            alignment=align(d.get("alignment", [])),
            alignment_excluding_invalid=align(d.get("alignment_excluding_invalid", [])),
            transport_errors=dict(d.get("transport_errors", {})),
            provenance=dict(d.get("provenance", {})),
            notes=list(d.get("notes", [])),
        )


CSV_HEADER = ("agent", "category", "persona", "metric", "value", "numerator", "denominator")


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(round(value, 6))


def emit_report(report: MetricsReport) -> tuple[str, str]:
    """(CSV table with one metric per row, JSON document)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for (agent, cat, persona), rates in report.rates.items():
        for name, r in rates.items():
            w.writerow((agent, cat, persona, name, _fmt(r.value), r.numerator, r.denominator))
    for (agent, persona), g in report.grudge.items():
        for name in ("change_rate", "retaliation_grudge_rate", "retaliation_noconflict_rate"):
            r = getattr(g, name)
            w.writerow((agent, "grudge_paired", persona, name, _fmt(r.value), r.numerator, r.denominator))
        w.writerow((agent, "grudge_paired", persona, "grudge_effect", _fmt(g.grudge_effect), "", ""))
    for label, table in (("gt_alignment", report.alignment), ("gt_alignment_excl_invalid", report.alignment_excluding_invalid)):
        for (agent, persona), block in table.items():
            for cat, r in block.per_category.items():
                w.writerow((agent, cat, persona, label, _fmt(r.value), r.numerator, r.denominator))
            r = block.overall
            w.writerow((agent, "overall", persona, label, _fmt(r.value), r.numerator, r.denominator))
    return buf.getvalue(), json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def parse_report(text: str) -> MetricsReport:
    return MetricsReport.from_dict(json.loads(text))


def build_report(
    records: Iterable[EvalRecord],
    gt_agent: str = "gt",
    gt_records: Iterable[EvalRecord] | None = None,
    provenance: dict | None = None,
) -> MetricsReport:
    """Aggregate records from any number of agents and personas into one report."""
    records = list(records)
    report = MetricsReport(provenance=dict(provenance or {}))
    groups: dict[tuple[str, str, str], list[EvalRecord]] = defaultdict(list)
    errors: dict[str, int] = defaultdict(int)
    for r in records:
        groups[(r.agent, r.category, r.persona)].append(r)
        if r.is_transport_error:
            errors[r.agent] += 1
    for key in sorted(groups):
        report.rates[key] = behavioral_rates(groups[key])
    report.transport_errors = dict(sorted(errors.items()))

    by_agent_persona: dict[tuple[str, str], list[EvalRecord]] = defaultdict(list)
    for r in records:
        by_agent_persona[(r.agent, r.persona)].append(r)

    for key in sorted(by_agent_persona):
        recs = [r for r in by_agent_persona[key] if r.category == "grudge_paired"]
        sides: dict[str, dict[str, EvalRecord]] = defaultdict(dict)
        for r in recs:
            if r.spot_id[-2:] in ("_a", "_b"):
                sides[r.spot_id[:-2]][r.spot_id[-1]] = r
        triples = []
        for pid in sorted(sides):
            side = sides[pid]
            if "a" in side and "b" in side:
                triples.append((side["a"], side["b"], side["b"].aggressor))
        if triples:
            report.grudge[key] = grudge_metrics(triples)

    if gt_records is None:
        gt_records = [r for r in records if r.agent == gt_agent]
    gt_records = list(gt_records)
    if gt_records:
        gt_by_spot = {}
        for r in gt_records:
            gt_by_spot.setdefault(r.spot_id, r)
        for key in sorted(by_agent_persona):
            report.alignment[key] = gt_alignment(by_agent_persona[key], gt_by_spot.values())
            report.alignment_excluding_invalid[key] = gt_alignment(
                by_agent_persona[key], gt_by_spot.values(), exclude_invalid=True
            )
    report.notes = [STRATUM_NOTE]
    return report


def persona_alignment(report: MetricsReport, agent: str) -> dict[str, float | None]:
    """Artifact-defined persona score in [0, 1].

    For each persona, the pooled target rate is compared with the ``none``
    baseline; the score is the shift in the expected direction divided by the
    headroom left above the baseline.
    """
    targets = {
        "aggressive": "capture_rate",
        "greedy": "home_entry_rate",
        "safe": "safe_rate",
        "unforgiving": "retaliation_grudge_rate",
    }

    def pooled(persona, metric):
        if metric == "retaliation_grudge_rate":
            g = report.grudge.get((agent, persona))
            return g.retaliation_grudge_rate.value if g else None
        num = den = 0
        for (a, _, p), rates in report.rates.items():
            if a == agent and p == persona:
                num += rates[metric].numerator
                den += rates[metric].denominator
        return num / den if den else None

    out = {}
    for persona, metric in targets.items():
        base = pooled("none", metric)
        shifted = pooled(persona, metric)
        if base is None or shifted is None or base >= 1.0:
            out[persona] = None
            continue
        out[persona] = min(1.0, max(0.0, (shifted - base) / (1.0 - base)))
    return out
