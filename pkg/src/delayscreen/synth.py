"""Seeded synthetic dataset generator for desk-scale evaluation runs.

Real screening data is private, so evaluation runs on generated cases:
clusters of level profiles are drawn around random archetypes, realized
into complete answer sheets, scored, and stored as verified cases. A query
models a noisy re-screen of one stored child: answers flip with a seeded
probability and the age jitters slightly, which keeps retrieval in a
high-similarity regime, while the query's ground-truth verified status
remains that of its source case. Everything is driven by one random seed:
the same seed always writes byte-identical files.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .casebase import CaseBase, CaseRecord, RecordStatus
from .engine import sheet_digest
from .scale import (
    AGE_GROUP_COUNT,
    DEVELOPMENTAL_CATEGORIES,
    CategoryId,
    DelayStatus,
    Judgment,
    Response,
    ResponseSheet,
    ScaleDefinition,
    WidthStatus,
    compute_levels,
    developmental_age,
    judge,
    reliability,
    sheet_from_document,
    sheet_to_document,
)
from .similarity import feature_vector_from_levels

SYNTH_EPOCH = datetime(2023, 1, 1, tzinfo=timezone.utc)

SOLUTIONS: dict[DelayStatus, tuple[str, ...]] = {
    DelayStatus.DELAY: (
        "Refer for comprehensive diagnostic assessment and begin early intervention planning.",
        "Refer to the early intervention center for full evaluation across all domains.",
    ),
    DelayStatus.EDGE: (
        "Re-screen in three months and counsel the caregiver on stimulation activities.",
        "Schedule a follow-up screening and provide a home activity program.",
    ),
    DelayStatus.NORMAL: (
        "No intervention indicated; continue routine developmental surveillance.",
        "Development within expectations; reassess at the next well-child visit.",
    ),
}

WIDE_PROFILE_NOTE = " Review the category profile spread with a specialist."


@dataclass(frozen=True)
class LevelTarget:
    basal: int
    peak: int


def _clamp_levels(basal: int, peak: int) -> LevelTarget:
    basal = max(0, min(AGE_GROUP_COUNT, basal))
    if basal == AGE_GROUP_COUNT:
        return LevelTarget(basal=basal, peak=AGE_GROUP_COUNT)
    peak = max(basal + 1, min(AGE_GROUP_COUNT, peak))
    return LevelTarget(basal=basal, peak=peak)


def realize_sheet(
    scale: ScaleDefinition,
    targets: dict[CategoryId, LevelTarget],
    physical_age_months: float,
    bone_age_months: float | None = None,
) -> ResponseSheet:
    """Build a complete sheet whose scored levels equal the targets.

    Groups at or below basal answer all Yes; the peak group answers all No,
    as does everything above it; the zone in between mixes answers so no
    group reads as a clean pass or a clean fail. A peak of 19 is realized
    by never failing a whole group.
    """
    answers: dict[str, Response] = {}
    for cid in DEVELOPMENTAL_CATEGORIES:
        target = targets[cid]
        by_group: dict[int, list[str]] = {}
        for q in scale.questions_by_category[cid]:
            by_group.setdefault(q.age_group, []).append(q.id)
        for g in range(1, AGE_GROUP_COUNT + 1):
            qids = by_group.get(g, [])
            if g <= target.basal:
                values = [Response.YES] * len(qids)
            elif target.peak < AGE_GROUP_COUNT and g >= target.peak:
                values = [Response.NO] * len(qids)
            elif g == target.basal + 1:
                # Break the all-Yes run without failing the whole group.
                if len(qids) == 1:
                    values = [Response.DONT_KNOW]
                else:
                    values = [Response.NO] + [Response.YES] * (len(qids) - 1)
            else:
                values = [Response.YES] + [Response.NO] * (len(qids) - 1)
            for qid, value in zip(qids, values):
                answers[qid] = value
    return ResponseSheet(
        answers=answers,
        physical_age_months=physical_age_months,
        physiological_values={},
        bone_age_months=bone_age_months,
    )


def _score(sheet: ResponseSheet, scale: ScaleDefinition) -> Judgment:
    levels = compute_levels(sheet, scale)
    rel, dont_know_count = reliability(sheet)
    dev_age = developmental_age(levels, scale)
    return judge(dev_age, sheet.physical_age_months, levels, rel, dont_know_count)


def _solution_for(rng: random.Random, judgment: Judgment) -> str:
    text = rng.choice(SOLUTIONS[judgment.status])
    if judgment.width_status == WidthStatus.TOO_WIDE:
        text += WIDE_PROFILE_NOTE
    return text


def _perturb_sheet(
    rng: random.Random,
    sheet: ResponseSheet,
    flip_rate: float,
) -> ResponseSheet:
    answers: dict[str, Response] = {}
    for qid, value in sheet.answers.items():
        if rng.random() < flip_rate:
            if value == Response.DONT_KNOW:
                value = rng.choice((Response.YES, Response.NO))
            elif rng.random() < 0.15:
                value = Response.DONT_KNOW
            else:
                value = Response.NO if value == Response.YES else Response.YES
        answers[qid] = value
    age = round(min(72.0, max(1.0, sheet.physical_age_months + rng.gauss(0.0, 1.5))), 1)
    return ResponseSheet(
        answers=answers,
        physical_age_months=age,
        physiological_values=dict(sheet.physiological_values or {}),
        bone_age_months=sheet.bone_age_months,
    )


@dataclass
class SynthDataset:
    base: CaseBase
    base_sheets: list[ResponseSheet]
    queries: list[tuple[ResponseSheet, DelayStatus]]
    query_sources: list[str]


# (band low, band high, draw weight): ratios sit clear of the 0.70/0.75
# decision boundaries so level jitter cannot flip a whole cluster.
RATIO_BANDS: tuple[tuple[float, float, float], ...] = (
    (0.76, 0.97, 0.45),
    (0.50, 0.69, 0.35),
    (0.705, 0.745, 0.20),
)


def _cluster_dev_age(scale: ScaleDefinition, basal: int, peak: int) -> float:
    basal_months = 0.0 if basal == 0 else scale.group_by_index[basal].midpoint
    return (basal_months + scale.group_by_index[peak].midpoint) / 2


def _draw_cluster(rng: random.Random, scale: ScaleDefinition) -> tuple[int, int, float]:
    pick = rng.random()
    cumulative = 0.0
    low, high = RATIO_BANDS[-1][:2]
    for band_low, band_high, weight in RATIO_BANDS:
        cumulative += weight
        if pick < cumulative:
            low, high = band_low, band_high
            break
    target_ratio = rng.uniform(low, high)
    spread = rng.randint(1, 3)
    # Keep the implied physical age (dev / ratio) under the 72-month cap
    # and the developmental age away from the noisy bottom of the scale.
    eligible = [
        b
        for b in range(2, AGE_GROUP_COUNT - spread + 1)
        if 6.0 <= _cluster_dev_age(scale, b, min(b + spread, AGE_GROUP_COUNT))
        <= 72.0 * target_ratio * 0.95
    ]
    center_basal = rng.choice(eligible) if eligible else 2
    return center_basal, spread, target_ratio


def generate_dataset(
    seed: int,
    case_count: int,
    query_count: int,
    scale: ScaleDefinition,
    flip_rate: float = 0.04,
) -> SynthDataset:
    """Generate a verified case base and re-scored query sheets."""
    rng = random.Random(seed)
    base = CaseBase()
    base_sheets: list[ResponseSheet] = []

    cluster_count = max(1, case_count // 10)
    clusters = [_draw_cluster(rng, scale) for _ in range(cluster_count)]

    index = 0
    max_attempts = case_count * 50
    while len(base.records) < case_count:
        if index >= max_attempts:
            raise RuntimeError(
                f"could not draw {case_count} distinct cases in {max_attempts} attempts"
            )
        center_basal, spread, target_ratio = clusters[index % cluster_count]
        targets: dict[CategoryId, LevelTarget] = {}
        for cid in DEVELOPMENTAL_CATEGORIES:
            basal = round(center_basal + rng.gauss(0.0, 1.0))
            peak = basal + spread + rng.choice((-1, 0, 0, 1))
            targets[cid] = _clamp_levels(basal, peak)

        # Pick the physical age that lands the cluster's target ratio.
        probe = realize_sheet(scale, targets, physical_age_months=36.0)
        dev_age = developmental_age(compute_levels(probe, scale), scale)
        age = round(min(72.0, max(1.0, dev_age / target_ratio)), 1)
        bone_age = round(age + rng.gauss(0.0, 2.0), 1) if rng.random() < 0.3 else None
        if bone_age is not None and bone_age < 0:
            bone_age = 0.0
        sheet = realize_sheet(scale, targets, physical_age_months=age, bone_age_months=bone_age)

        judgment = _score(sheet, scale)
        levels = compute_levels(sheet, scale)
        record = CaseRecord(
            id=f"syn-{index:04d}",
            created_at=(SYNTH_EPOCH + timedelta(minutes=index)).strftime("%Y-%m-%dT%H:%M:%SZ"),
            features=feature_vector_from_levels(sheet.physical_age_months, levels),
            sheet_digest=sheet_digest(sheet),
            bone_age_months=bone_age,
            judgment=judgment,
            solution=_solution_for(rng, judgment),
            status=RecordStatus.VERIFIED,
            revised_by=None,
            usage_count=0,
            source_tag=f"synthetic-seed{seed}",
        )
        index += 1
        # Feature duplicates would be merged on retain; keep the base at the
        # requested size by only counting distinct additions.
        if any(r.features == record.features for r in base.records.values()):
            continue
        base.records[record.id] = record
        base_sheets.append(sheet)

    # A query is a noisy re-screen of one stored child: answers flip with a
    # seeded probability but the verified status stays the source case's.
    record_ids = list(base.records)
    queries: list[tuple[ResponseSheet, DelayStatus]] = []
    query_sources: list[str] = []
    for _ in range(query_count):
        source = rng.randrange(len(base_sheets))
        query_sheet = _perturb_sheet(rng, base_sheets[source], flip_rate)
        truth = base.records[record_ids[source]].judgment.status
        queries.append((query_sheet, truth))
        query_sources.append(record_ids[source])

    return SynthDataset(
        base=base, base_sheets=base_sheets, queries=queries, query_sources=query_sources
    )


def save_queries(path: str | Path, queries: list[tuple[ResponseSheet, DelayStatus]]) -> None:
    lines = [
        json.dumps(
            {"sheet": sheet_to_document(sheet), "verified_status": status.value},
            separators=(",", ":"),
            ensure_ascii=False,
        )
        for sheet, status in queries
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_queries(path: str | Path) -> list[tuple[ResponseSheet, DelayStatus | None]]:
    """Read a query file; a missing verified_status loads as None so the
    evaluation entry point can reject it."""
    queries: list[tuple[ResponseSheet, DelayStatus | None]] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        sheet = sheet_from_document(data["sheet"])
        raw_status = data.get("verified_status")
        status = DelayStatus(raw_status) if raw_status is not None else None
        queries.append((sheet, status))
    return queries
