"""Screening scale model and scoring for the 0-6 year instrument.

The instrument covers six categories: one physiological block of recorded
indicators and five developmental categories answered Yes/No/DontKnow.
Developmental questions are arranged into 19 age groups spanning 0-72
months. Scoring derives a basal level (highest age group below which every
question is passed) and a peak level (lowest age group failed outright) per
category, converts those into a developmental age in months, and judges
delay status from the ratio of developmental age to physical age.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from statistics import fmean

AGE_GROUP_COUNT = 19
SCALE_SPAN_MONTHS = 72

# Unreliable when strictly more DontKnow answers than this (10% of the 167
# developmental questions).
DONT_KNOW_LIMIT = 16

DELAY_RATIO_THRESHOLD = 0.75
NORMAL_RATIO_THRESHOLD = 0.70
WIDTH_LIMIT = 6


class ScaleError(Exception):
    """Base class for scale and sheet validation failures."""


class InvalidScale(ScaleError):
    """Scale definition violates a structural invariant."""


class IncompleteSheet(ScaleError):
    """A developmental question is missing an answer."""


class UnknownQuestion(ScaleError):
    """An answer references a question the scale does not define."""


class MissingCategory(ScaleError):
    """A level computation did not cover every developmental category."""


class NonPositiveAge(ScaleError):
    """Physical age must be strictly positive."""


class CategoryId(str, Enum):
    PHYSIOLOGICAL = "physiological"
    LANGUAGE = "language"
    SOCIAL = "social"
    GROSS_MOTOR = "gross_motor"
    FINE_MOTOR = "fine_motor"
    SENSORY_COGNITIVE = "sensory_cognitive"


# Scoring and similarity only ever consider these five; physiological
# indicators are recorded, never scored.
DEVELOPMENTAL_CATEGORIES: tuple[CategoryId, ...] = (
    CategoryId.LANGUAGE,
    CategoryId.SOCIAL,
    CategoryId.GROSS_MOTOR,
    CategoryId.FINE_MOTOR,
    CategoryId.SENSORY_COGNITIVE,
)

DEFAULT_QUESTION_COUNTS: dict[CategoryId, int] = {
    CategoryId.PHYSIOLOGICAL: 12,
    CategoryId.LANGUAGE: 31,
    CategoryId.SOCIAL: 34,
    CategoryId.GROSS_MOTOR: 36,
    CategoryId.FINE_MOTOR: 31,
    CategoryId.SENSORY_COGNITIVE: 35,
}


class Response(str, Enum):
    YES = "yes"
    NO = "no"
    DONT_KNOW = "dont_know"


class DelayStatus(str, Enum):
    DELAY = "delay"
    NORMAL = "normal"
    EDGE = "edge"


class WidthStatus(str, Enum):
    TOO_WIDE = "too_wide"
    NORMAL_WIDTH = "normal_width"


class Reliability(str, Enum):
    RELIABLE = "reliable"
    UNRELIABLE = "unreliable"


@dataclass(frozen=True)
class AgeGroup:
    index: int
    start_month: int
    end_month: int

    @property
    def midpoint(self) -> float:
        return (self.start_month + self.end_month) / 2


@dataclass(frozen=True)
class Category:
    id: CategoryId
    question_count: int


@dataclass(frozen=True)
class Question:
    id: str
    category: CategoryId
    age_group: int
    order: int


@dataclass(frozen=True)
class ScaleDefinition:
    version: str
    age_groups: tuple[AgeGroup, ...]
    categories: tuple[Category, ...]
    questions: tuple[Question, ...]

    @cached_property
    def group_by_index(self) -> dict[int, AgeGroup]:
        return {g.index: g for g in self.age_groups}

    @cached_property
    def questions_by_category(self) -> dict[CategoryId, tuple[Question, ...]]:
        out: dict[CategoryId, list[Question]] = {c.id: [] for c in self.categories}
        for q in self.questions:
            out[q.category].append(q)
        return {cid: tuple(qs) for cid, qs in out.items()}

    @cached_property
    def developmental_question_ids(self) -> frozenset[str]:
        return frozenset(
            q.id for q in self.questions if q.category != CategoryId.PHYSIOLOGICAL
        )

    @cached_property
    def physiological_indicator_ids(self) -> frozenset[str]:
        return frozenset(
            q.id for q in self.questions if q.category == CategoryId.PHYSIOLOGICAL
        )


@dataclass(frozen=True)
class ResponseSheet:
    answers: dict[str, Response]
    physical_age_months: float
    physiological_values: dict[str, float] | None = None
    bone_age_months: float | None = None


@dataclass(frozen=True)
class CategoryLevels:
    category: CategoryId
    basal: int
    peak: int


@dataclass(frozen=True)
class Judgment:
    developmental_age_months: float
    ratio: float
    status: DelayStatus
    width: int
    width_status: WidthStatus
    reliability: Reliability
    dont_know_count: int


def validate_scale(scale: ScaleDefinition) -> None:
    """Raise InvalidScale unless every structural invariant holds."""
    groups = scale.age_groups
    if len(groups) != AGE_GROUP_COUNT:
        raise InvalidScale(f"expected {AGE_GROUP_COUNT} age groups, got {len(groups)}")
    expected_start = 0
    for i, g in enumerate(groups, start=1):
        if g.index != i:
            raise InvalidScale(f"age group at position {i} has index {g.index}")
        if g.start_month != expected_start:
            raise InvalidScale(
                f"age group {i} starts at {g.start_month}, expected {expected_start}"
            )
        if g.start_month >= g.end_month:
            raise InvalidScale(f"age group {i} is empty or inverted")
        expected_start = g.end_month
    if groups[-1].end_month != SCALE_SPAN_MONTHS:
        raise InvalidScale(
            f"age groups must cover 0..{SCALE_SPAN_MONTHS} months, "
            f"last group ends at {groups[-1].end_month}"
        )

    seen_categories = {c.id for c in scale.categories}
    if len(seen_categories) != len(scale.categories):
        raise InvalidScale("duplicate category")
    if seen_categories != set(CategoryId):
        missing = {c.value for c in CategoryId} - {c.value for c in seen_categories}
        raise InvalidScale(f"missing categories: {sorted(missing)}")

    ids: set[str] = set()
    pairs: set[tuple[CategoryId, int]] = set()
    for q in scale.questions:
        if q.id in ids:
            raise InvalidScale(f"duplicate question id {q.id!r}")
        ids.add(q.id)
        if (q.category, q.order) in pairs:
            raise InvalidScale(f"duplicate (category, order) for {q.id!r}")
        pairs.add((q.category, q.order))
        if q.category != CategoryId.PHYSIOLOGICAL and q.age_group not in scale.group_by_index:
            raise InvalidScale(f"question {q.id!r} references unknown age group {q.age_group}")

    for cat in scale.categories:
        questions = scale.questions_by_category.get(cat.id, ())
        if len(questions) != cat.question_count:
            raise InvalidScale(
                f"category {cat.id.value} declares {cat.question_count} questions "
                f"but defines {len(questions)}"
            )
        keys = [(q.age_group, q.order) for q in questions]
        if keys != sorted(keys):
            raise InvalidScale(f"questions in {cat.id.value} not sorted by age group, order")


def validate_sheet(sheet: ResponseSheet, scale: ScaleDefinition) -> None:
    """Check completeness of a sheet against a scale.

    Every developmental question must carry exactly one answer; answer and
    indicator ids must exist in the scale; physical age must be positive.
    """
    if sheet.physical_age_months <= 0:
        raise NonPositiveAge(f"physical age must be > 0, got {sheet.physical_age_months}")
    known = scale.developmental_question_ids
    for qid in sheet.answers:
        if qid not in known:
            raise UnknownQuestion(f"answer for unknown question {qid!r}")
    missing = known - sheet.answers.keys()
    if missing:
        raise IncompleteSheet(f"missing answers for {len(missing)} questions, e.g. {min(missing)!r}")
    for iid in sheet.physiological_values or {}:
        if iid not in scale.physiological_indicator_ids:
            raise UnknownQuestion(f"value for unknown physiological indicator {iid!r}")


def compute_levels(sheet: ResponseSheet, scale: ScaleDefinition) -> list[CategoryLevels]:
    """Derive basal and peak levels per developmental category.

    Basal is the largest group index g such that every question in groups
    1..g is answered Yes (0 when group 1 already contains a non-Yes). Peak
    is the smallest group index above basal whose questions are all
    answered No, or 19 when no group fails outright. Groups holding no
    questions for a category neither break the basal run nor count as
    failed.
    """
    validate_sheet(sheet, scale)
    out: list[CategoryLevels] = []
    for cid in DEVELOPMENTAL_CATEGORIES:
        by_group: dict[int, list[Response]] = {}
        for q in scale.questions_by_category[cid]:
            by_group.setdefault(q.age_group, []).append(sheet.answers[q.id])

        basal = 0
        for g in range(1, AGE_GROUP_COUNT + 1):
            responses = by_group.get(g, [])
            if all(r == Response.YES for r in responses):
                basal = g
            else:
                break

        peak = AGE_GROUP_COUNT
        for g in range(basal + 1, AGE_GROUP_COUNT + 1):
            responses = by_group.get(g, [])
            if responses and all(r == Response.NO for r in responses):
                peak = g
                break

        out.append(CategoryLevels(category=cid, basal=basal, peak=peak))
    return out


def developmental_age(levels: list[CategoryLevels], scale: ScaleDefinition) -> float:
    """Developmental age in months, averaged over the five categories.

    Each category contributes the midpoint between its basal group midpoint
    (0 months when basal is 0) and its peak group midpoint.
    """
    by_category = {lv.category: lv for lv in levels}
    missing = [c.value for c in DEVELOPMENTAL_CATEGORIES if c not in by_category]
    if missing:
        raise MissingCategory(f"levels missing for {missing}")

    ages: list[float] = []
    for cid in DEVELOPMENTAL_CATEGORIES:
        lv = by_category[cid]
        basal_months = 0.0 if lv.basal == 0 else scale.group_by_index[lv.basal].midpoint
        peak_months = 0.0 if lv.peak == 0 else scale.group_by_index[lv.peak].midpoint
        ages.append((basal_months + peak_months) / 2)
    return fmean(ages)


def reliability(sheet: ResponseSheet) -> tuple[Reliability, int]:
    """Count DontKnow answers; strictly more than 16 is unreliable."""
    count = sum(1 for r in sheet.answers.values() if r == Response.DONT_KNOW)
    flag = Reliability.UNRELIABLE if count > DONT_KNOW_LIMIT else Reliability.RELIABLE
    return flag, count


def judge(
    dev_age: float,
    physical_age: float,
    levels: list[CategoryLevels],
    reliability: Reliability,
    dont_know_count: int = 0,
) -> Judgment:
    """Classify delay status from the developmental/physical age ratio.

    Ratio above 0.75 is a delay, below 0.70 normal, and the closed band
    0.70..0.75 sits at the edge of normal. Width is the largest peak minus
    basal gap across categories; 6 or more groups is flagged too wide.
    """
    if physical_age <= 0:
        raise NonPositiveAge(f"physical age must be > 0, got {physical_age}")
    ratio = dev_age / physical_age
    if ratio > DELAY_RATIO_THRESHOLD:
        status = DelayStatus.DELAY
    elif ratio < NORMAL_RATIO_THRESHOLD:
        status = DelayStatus.NORMAL
    else:
        status = DelayStatus.EDGE
    width = max((lv.peak - lv.basal) for lv in levels) if levels else 0
    width_status = WidthStatus.TOO_WIDE if width >= WIDTH_LIMIT else WidthStatus.NORMAL_WIDTH
    return Judgment(
        developmental_age_months=dev_age,
        ratio=ratio,
        status=status,
        width=width,
        width_status=width_status,
        reliability=reliability,
        dont_know_count=dont_know_count,
    )


def _split_evenly(total: int, bins: int) -> list[int]:
    # Remainder goes to the earlier bins.
    base, rem = divmod(total, bins)
    return [base + 1 if i < rem else base for i in range(bins)]


def default_scale() -> ScaleDefinition:
    """The bundled synthetic instrument.

    19 age groups as close to equal width as 72 months allows (wider groups
    first) and the standard per-category question counts, with questions
    spread as evenly as possible across groups (extras in earlier groups).
    Deterministic: repeated calls build identical definitions.
    """
    widths = _split_evenly(SCALE_SPAN_MONTHS, AGE_GROUP_COUNT)
    groups: list[AgeGroup] = []
    start = 0
    for i, width in enumerate(widths, start=1):
        groups.append(AgeGroup(index=i, start_month=start, end_month=start + width))
        start += width

    categories = [
        Category(id=cid, question_count=count)
        for cid, count in DEFAULT_QUESTION_COUNTS.items()
    ]

    questions: list[Question] = []
    for cid, count in DEFAULT_QUESTION_COUNTS.items():
        per_group = _split_evenly(count, AGE_GROUP_COUNT)
        order = 0
        for g, n in enumerate(per_group, start=1):
            for _ in range(n):
                order += 1
                questions.append(
                    Question(
                        id=f"{cid.value}-{order:03d}",
                        category=cid,
                        age_group=g,
                        order=order,
                    )
                )

    scale = ScaleDefinition(
        version="default-1",
        age_groups=tuple(groups),
        categories=tuple(categories),
        questions=tuple(questions),
    )
    validate_scale(scale)
    return scale


def scale_to_document(scale: ScaleDefinition) -> dict:
    """Plain-JSON form of a scale, matching the scale file schema."""
    return {
        "version": scale.version,
        "age_groups": [
            {"index": g.index, "start_month": g.start_month, "end_month": g.end_month}
            for g in scale.age_groups
        ],
        "categories": [
            {"id": c.id.value, "question_count": c.question_count}
            for c in scale.categories
        ],
        "questions": [
            {"id": q.id, "category": q.category.value, "age_group": q.age_group, "order": q.order}
            for q in scale.questions
        ],
    }


def scale_from_document(document: dict) -> ScaleDefinition:
    """Build and validate a scale from its JSON document form."""
    try:
        scale = ScaleDefinition(
            version=str(document["version"]),
            age_groups=tuple(
                AgeGroup(
                    index=int(g["index"]),
                    start_month=int(g["start_month"]),
                    end_month=int(g["end_month"]),
                )
                for g in document["age_groups"]
            ),
            categories=tuple(
                Category(id=CategoryId(c["id"]), question_count=int(c["question_count"]))
                for c in document["categories"]
            ),
            questions=tuple(
                Question(
                    id=str(q["id"]),
                    category=CategoryId(q["category"]),
                    age_group=int(q["age_group"]),
                    order=int(q["order"]),
                )
                for q in document["questions"]
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidScale(f"malformed scale document: {exc}") from exc
    validate_scale(scale)
    return scale


def load_scale(path: str | Path) -> ScaleDefinition:
    """Load a scale definition file, rejecting invalid documents."""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidScale(f"scale file is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise InvalidScale("scale file must contain a JSON object")
    return scale_from_document(document)


def sheet_to_document(sheet: ResponseSheet) -> dict:
    """Plain-JSON form of a response sheet."""
    return {
        "physical_age_months": float(sheet.physical_age_months),
        "bone_age_months": None if sheet.bone_age_months is None else float(sheet.bone_age_months),
        "physiological_values": {
            iid: float(v) for iid, v in (sheet.physiological_values or {}).items()
        },
        "answers": {qid: r.value for qid, r in sheet.answers.items()},
    }


def sheet_from_document(document: dict) -> ResponseSheet:
    """Build a response sheet from its JSON document form.

    Structural decoding only; completeness against a scale is checked by
    validate_sheet / compute_levels.
    """
    try:
        bone_age = document.get("bone_age_months")
        return ResponseSheet(
            answers={str(qid): Response(r) for qid, r in document["answers"].items()},
            physical_age_months=float(document["physical_age_months"]),
            physiological_values={
                str(iid): float(v)
                for iid, v in (document.get("physiological_values") or {}).items()
            },
            bone_age_months=None if bone_age is None else float(bone_age),
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise IncompleteSheet(f"malformed sheet document: {exc}") from exc


def load_sheet(path: str | Path) -> ResponseSheet:
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise IncompleteSheet(f"sheet file is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise IncompleteSheet("sheet file must contain a JSON object")
    return sheet_from_document(document)
