"""Weighted case similarity over the 11 screening indices and top-k retrieval.

A case is compared to history through eleven scalar indices: the physical
age plus basal and peak levels for each of the five developmental
categories. Each index yields a similarity in [0, 1]; the case similarity
is the weighted mean of those, normalized by the weight sum, so the score
itself stays in [0, 1] with 1 meaning identical feature vectors.

Case bases here are small, so retrieval is an exact scan: score every
candidate, sort, truncate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .scale import (
    AGE_GROUP_COUNT,
    DEVELOPMENTAL_CATEGORIES,
    SCALE_SPAN_MONTHS,
    CategoryLevels,
)


class SimilarityError(Exception):
    """Base class for similarity failures."""


class UnknownIndex(SimilarityError):
    """Index name is not one of the eleven screening indices."""


class OutOfRange(SimilarityError):
    """Index value lies outside its admissible range."""


class WeightMismatch(SimilarityError):
    """Weight profile does not cover exactly the eleven indices."""


class DuplicateCaseId(SimilarityError):
    """Two retrieval candidates share one case id."""


AGE_INDEX = "actual_age"

INDEX_NAMES: tuple[str, ...] = (
    AGE_INDEX,
    "language_basal",
    "language_peak",
    "social_basal",
    "social_peak",
    "gross_motor_basal",
    "gross_motor_peak",
    "fine_motor_basal",
    "fine_motor_peak",
    "sensory_cognitive_basal",
    "sensory_cognitive_peak",
)

DEFAULT_AGE_WEIGHT = 20.0
DEFAULT_LEVEL_WEIGHT = 8.0


@dataclass(frozen=True)
class FeatureVector:
    """The eleven comparison indices of one case."""

    actual_age: float
    language_basal: int
    language_peak: int
    social_basal: int
    social_peak: int
    gross_motor_basal: int
    gross_motor_peak: int
    fine_motor_basal: int
    fine_motor_peak: int
    sensory_cognitive_basal: int
    sensory_cognitive_peak: int

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, values: dict) -> FeatureVector:
        try:
            vector = cls(
                actual_age=float(values[AGE_INDEX]),
                **{name: int(values[name]) for name in INDEX_NAMES[1:]},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise OutOfRange(f"malformed feature vector: {exc}") from exc
        validate_feature_vector(vector)
        return vector


def feature_vector_from_levels(
    physical_age_months: float, levels: list[CategoryLevels]
) -> FeatureVector:
    by_category = {lv.category: lv for lv in levels}
    kwargs: dict[str, float] = {AGE_INDEX: physical_age_months}
    for cid in DEVELOPMENTAL_CATEGORIES:
        lv = by_category[cid]
        kwargs[f"{cid.value}_basal"] = lv.basal
        kwargs[f"{cid.value}_peak"] = lv.peak
    vector = FeatureVector(**kwargs)
    validate_feature_vector(vector)
    return vector


def validate_feature_vector(vector: FeatureVector) -> None:
    if not 0 < vector.actual_age <= SCALE_SPAN_MONTHS:
        raise OutOfRange(f"actual_age {vector.actual_age} outside (0, {SCALE_SPAN_MONTHS}]")
    for cid in DEVELOPMENTAL_CATEGORIES:
        basal = getattr(vector, f"{cid.value}_basal")
        peak = getattr(vector, f"{cid.value}_peak")
        if not 0 <= basal <= peak <= AGE_GROUP_COUNT:
            raise OutOfRange(
                f"{cid.value} levels must satisfy 0 <= basal <= peak <= "
                f"{AGE_GROUP_COUNT}, got ({basal}, {peak})"
            )


@dataclass(frozen=True)
class WeightProfile:
    """Per-index weights; must cover all eleven indices with positive values."""

    weights: dict[str, float]

    def __post_init__(self) -> None:
        unknown = set(self.weights) - set(INDEX_NAMES)
        if unknown:
            raise WeightMismatch(f"unknown indices in weight profile: {sorted(unknown)}")
        missing = set(INDEX_NAMES) - set(self.weights)
        if missing:
            raise WeightMismatch(f"weight profile missing indices: {sorted(missing)}")
        for name, w in self.weights.items():
            if not w > 0:
                raise WeightMismatch(f"weight for {name} must be > 0, got {w}")

    @property
    def total(self) -> float:
        # Summed in canonical index order so identical vectors score exactly
        # 1.0 regardless of how the weights mapping was built.
        return sum(self.weights[name] for name in INDEX_NAMES)


def default_weights() -> WeightProfile:
    """Age weighted 20, every level index 8; the weights sum to 100."""
    weights = {name: DEFAULT_LEVEL_WEIGHT for name in INDEX_NAMES}
    weights[AGE_INDEX] = DEFAULT_AGE_WEIGHT
    return WeightProfile(weights=weights)


def load_weights(path: str | Path) -> WeightProfile:
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise WeightMismatch(f"weight file is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise WeightMismatch("weight file must contain a JSON object")
    try:
        weights = {str(name): float(value) for name, value in document.items()}
    except (TypeError, ValueError) as exc:
        raise WeightMismatch(f"weight values must be numbers: {exc}") from exc
    return WeightProfile(weights=weights)


@dataclass(frozen=True)
class IndexContribution:
    similarity: float
    weighted: float


@dataclass(frozen=True)
class SimilarityScore:
    value: float
    per_index: dict[str, IndexContribution]


@dataclass(frozen=True)
class RankedMatch:
    case_id: str
    score: SimilarityScore
    rank: int


def index_similarity(index: str, a: float, b: float) -> float:
    """Similarity of two values on one index, linear in their distance.

    Ages are normalized by the 72-month span, levels by the 19-group range.
    Symmetric, 1 exactly when the values are equal.
    """
    if index == AGE_INDEX:
        # The index itself spans the whole 0..72 month range; case vectors
        # additionally require a strictly positive age.
        for v in (a, b):
            if not 0 <= v <= SCALE_SPAN_MONTHS:
                raise OutOfRange(f"{index} value {v} outside [0, {SCALE_SPAN_MONTHS}]")
        raw = 1.0 - abs(a - b) / SCALE_SPAN_MONTHS
        return min(1.0, max(0.0, raw))
    if index in INDEX_NAMES:
        for v in (a, b):
            if not 0 <= v <= AGE_GROUP_COUNT:
                raise OutOfRange(f"{index} value {v} outside [0, {AGE_GROUP_COUNT}]")
        return 1.0 - abs(a - b) / AGE_GROUP_COUNT
    raise UnknownIndex(f"unknown similarity index {index!r}")


def aggregate(
    input_vector: FeatureVector,
    historical: FeatureVector,
    weights: WeightProfile,
) -> SimilarityScore:
    """Weighted mean of the per-index similarities, normalized to [0, 1]."""
    validate_feature_vector(input_vector)
    validate_feature_vector(historical)
    input_values = input_vector.as_dict()
    historical_values = historical.as_dict()

    total = weights.total
    weighted_sum = 0.0
    per_index: dict[str, IndexContribution] = {}
    for name in INDEX_NAMES:
        sim = index_similarity(name, input_values[name], historical_values[name])
        w = weights.weights[name]
        weighted_sum += w * sim
        per_index[name] = IndexContribution(similarity=sim, weighted=w * sim / total)
    value = weighted_sum / total
    return SimilarityScore(value=min(1.0, max(0.0, value)), per_index=per_index)


def retrieve(
    input_vector: FeatureVector,
    candidates: list[tuple[str, FeatureVector]],
    weights: WeightProfile,
    k: int,
) -> list[RankedMatch]:
    """Exact top-k scan: score all candidates, sort, truncate.

    Sorted by score descending with ties broken by ascending case id; an
    empty candidate list yields an empty result.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    seen: set[str] = set()
    for case_id, _ in candidates:
        if case_id in seen:
            raise DuplicateCaseId(f"duplicate candidate id {case_id!r}")
        seen.add(case_id)

    scored = [
        (case_id, aggregate(input_vector, vector, weights))
        for case_id, vector in candidates
    ]
    scored.sort(key=lambda item: (-item[1].value, item[0]))
    return [
        RankedMatch(case_id=case_id, score=score, rank=rank)
        for rank, (case_id, score) in enumerate(scored[:k], start=1)
    ]
