"""Screening workflow: score a sheet, retrieve precedents, revise, retain.

A screening session runs the full cycle for one child: the sheet is scored
into levels and a judgment, turned into a feature vector, and matched
against the verified case base. The closest case's recommendation is
proposed for a reviewer to edit; retaining the session writes a verified
record back into the base, closing the loop so the next identical sheet
self-matches at similarity 1.0.

The module also hosts the verification protocol: replaying a query set
against a base and tabulating per-rank average similarity and accuracy.
"""

from __future__ import annotations

import csv
import hashlib
import json
import uuid
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from statistics import fmean, pstdev

from .casebase import CaseBase, CaseRecord, RecordStatus, RetainOutcome, utc_now_rfc3339
from .scale import (
    DelayStatus,
    Judgment,
    Reliability,
    ResponseSheet,
    ScaleDefinition,
    compute_levels,
    developmental_age,
    judge,
    reliability,
    sheet_to_document,
)
from .similarity import (
    FeatureVector,
    RankedMatch,
    WeightProfile,
    feature_vector_from_levels,
    retrieve,
)

DEFAULT_RETRIEVAL_K = 10
DEFAULT_EVALUATION_K = 5

UNRELIABLE_ANNOTATION = "diagnostic assessment required"


class EngineError(Exception):
    """Base class for workflow failures."""


class SessionClosed(EngineError):
    """The session was already retained and is immutable."""


class EmptyBase(EngineError):
    """Evaluation needs at least one verified case."""


class NoQueries(EngineError):
    """Evaluation needs at least one query."""


class MissingGroundTruth(EngineError):
    """Every evaluation query must carry a verified status."""


class ProviderUnreadable(EngineError):
    """Bone-age backing table is missing or corrupt."""


class SessionState(str, Enum):
    OPEN = "open"
    AWAITING_REVISION = "awaiting_revision"
    CLOSED = "closed"


@dataclass
class ScreeningSession:
    session_id: str
    sheet: ResponseSheet
    sheet_digest: str
    judgment: Judgment
    features: FeatureVector
    matches: list[RankedMatch]
    proposed_solution: str
    state: SessionState
    bone_age_months: float | None = None
    revised_by: str | None = None
    annotations: list[str] = field(default_factory=list)


def sheet_digest(sheet: ResponseSheet) -> str:
    """Content hash of a sheet, stable across field ordering."""
    canonical = json.dumps(sheet_to_document(sheet), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class BoneAgeProvider:
    """Bone age lookup backed by a two-column delimited table.

    The table needs a header row; each data row maps a case reference to a
    bone age in months. Any future estimator can replace this class as long
    as it answers lookups deterministically.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._table: dict[str, float] = {}
        try:
            with self.path.open(newline="", encoding="utf-8") as handle:
                rows = list(csv.reader(handle))
        except OSError as exc:
            raise ProviderUnreadable(f"cannot read bone-age table {self.path}: {exc}") from exc
        if not rows:
            raise ProviderUnreadable(f"bone-age table {self.path} is empty, header row required")
        for line_number, row in enumerate(rows[1:], start=2):
            if len(row) != 2:
                raise ProviderUnreadable(
                    f"bone-age table {self.path} line {line_number}: expected 2 columns"
                )
            ref, months_text = row
            try:
                months = float(months_text)
            except ValueError as exc:
                raise ProviderUnreadable(
                    f"bone-age table {self.path} line {line_number}: "
                    f"bone age {months_text!r} is not a number"
                ) from exc
            if months < 0:
                raise ProviderUnreadable(
                    f"bone-age table {self.path} line {line_number}: bone age must be >= 0"
                )
            self._table[ref] = months

    def lookup(self, case_ref: str) -> float | None:
        return self._table.get(case_ref)


def lookup_bone_age(provider: BoneAgeProvider, case_ref: str) -> float | None:
    """Bone age in months for a case reference, or None when absent."""
    return provider.lookup(case_ref)


def process_new_case(
    sheet: ResponseSheet,
    base: CaseBase,
    scale: ScaleDefinition,
    weights: WeightProfile,
    k: int = DEFAULT_RETRIEVAL_K,
    session_id: str | None = None,
    bone_age_provider: BoneAgeProvider | None = None,
    bone_age_ref: str | None = None,
) -> ScreeningSession:
    """Score a sheet and open a session awaiting expert revision.

    The rank-1 match's recommendation is proposed verbatim (empty when the
    base has no verified cases); an unreliable sheet is annotated for
    diagnostic follow-up but still retrieves matches. Bone age is metadata
    only and never alters judgment or retrieval.
    """
    levels = compute_levels(sheet, scale)
    rel, dont_know_count = reliability(sheet)
    dev_age = developmental_age(levels, scale)
    judgment = judge(dev_age, sheet.physical_age_months, levels, rel, dont_know_count)
    features = feature_vector_from_levels(sheet.physical_age_months, levels)

    matches = retrieve(features, base.candidates(), weights, k)
    base.note_retrieval([m.case_id for m in matches])
    proposed = base.records[matches[0].case_id].solution if matches else ""

    bone_age = sheet.bone_age_months
    if bone_age is None and bone_age_provider is not None and bone_age_ref is not None:
        bone_age = lookup_bone_age(bone_age_provider, bone_age_ref)

    annotations = [UNRELIABLE_ANNOTATION] if rel == Reliability.UNRELIABLE else []
    return ScreeningSession(
        session_id=session_id or f"s-{uuid.uuid4().hex[:12]}",
        sheet=sheet,
        sheet_digest=sheet_digest(sheet),
        judgment=judgment,
        features=features,
        matches=matches,
        proposed_solution=proposed,
        state=SessionState.AWAITING_REVISION,
        bone_age_months=bone_age,
        annotations=annotations,
    )


def revise(
    session: ScreeningSession,
    reviser: str,
    solution: str | None = None,
    status_override: DelayStatus | None = None,
) -> ScreeningSession:
    """Apply expert edits to an open session.

    The reviser is always recorded; the solution text and the delay status
    may be replaced (the underlying ratio is preserved). The session stays
    open for further edits until it is retained.
    """
    if session.state != SessionState.AWAITING_REVISION:
        raise SessionClosed(f"session {session.session_id} is {session.state.value}")
    session.revised_by = reviser
    if solution is not None:
        session.proposed_solution = solution
    if status_override is not None:
        session.judgment = replace(session.judgment, status=status_override)
    return session


def retain_session(
    session: ScreeningSession,
    base: CaseBase,
    source_tag: str = "screening",
    created_at: str | None = None,
) -> tuple[RetainOutcome, CaseRecord]:
    """Store the session as a verified case and close it."""
    if session.state != SessionState.AWAITING_REVISION:
        raise SessionClosed(f"session {session.session_id} is {session.state.value}")
    record = CaseRecord(
        id=f"case-{session.sheet_digest[:16]}",
        created_at=created_at or utc_now_rfc3339(),
        features=session.features,
        sheet_digest=session.sheet_digest,
        bone_age_months=session.bone_age_months,
        judgment=session.judgment,
        solution=session.proposed_solution,
        status=RecordStatus.VERIFIED,
        revised_by=session.revised_by,
        usage_count=0,
        source_tag=source_tag,
    )
    outcome = base.retain(record)
    session.state = SessionState.CLOSED
    return outcome, record


@dataclass(frozen=True)
class RankStats:
    rank: int
    avg_similarity: float
    sd_similarity: float
    avg_accuracy: float
    sd_accuracy: float


@dataclass(frozen=True)
class MeanStats:
    avg_similarity: float
    sd_similarity: float
    avg_accuracy: float
    sd_accuracy: float


@dataclass(frozen=True)
class EvaluationReport:
    per_rank: tuple[RankStats, ...]
    mean_row: MeanStats
    query_count: int
    k: int


def evaluate(
    base: CaseBase,
    queries: list[tuple[ResponseSheet, DelayStatus]],
    scale: ScaleDefinition,
    weights: WeightProfile,
    k: int = DEFAULT_EVALUATION_K,
) -> EvaluationReport:
    """Replay queries against the base and tabulate per-rank metrics.

    For each rank r in 1..k the report carries the mean and population
    standard deviation of the rank-r similarity over all queries, and the
    same statistics for accuracy, where a rank-r hit means the retrieved
    case's judgment status equals the query's verified status. The mean row
    is the unweighted mean of the per-rank rows. k is truncated to the
    number of verified candidates so every rank column is fully populated.
    """
    candidates = base.candidates()
    if not candidates:
        raise EmptyBase("evaluation needs at least one verified case")
    if not queries:
        raise NoQueries("evaluation needs at least one query")
    for i, (_, truth) in enumerate(queries):
        if truth is None:
            raise MissingGroundTruth(f"query {i} has no verified status")

    effective_k = min(k, len(candidates))
    similarity_by_rank: list[list[float]] = [[] for _ in range(effective_k)]
    accuracy_by_rank: list[list[float]] = [[] for _ in range(effective_k)]

    for sheet, truth in queries:
        levels = compute_levels(sheet, scale)
        features = feature_vector_from_levels(sheet.physical_age_months, levels)
        matches = retrieve(features, candidates, weights, effective_k)
        for match in matches:
            hit = 1.0 if base.records[match.case_id].judgment.status == truth else 0.0
            similarity_by_rank[match.rank - 1].append(match.score.value)
            accuracy_by_rank[match.rank - 1].append(hit)

    per_rank = tuple(
        RankStats(
            rank=r + 1,
            avg_similarity=fmean(similarity_by_rank[r]),
            sd_similarity=pstdev(similarity_by_rank[r]),
            avg_accuracy=fmean(accuracy_by_rank[r]),
            sd_accuracy=pstdev(accuracy_by_rank[r]),
        )
        for r in range(effective_k)
    )
    mean_row = MeanStats(
        avg_similarity=fmean(row.avg_similarity for row in per_rank),
        sd_similarity=fmean(row.sd_similarity for row in per_rank),
        avg_accuracy=fmean(row.avg_accuracy for row in per_rank),
        sd_accuracy=fmean(row.sd_accuracy for row in per_rank),
    )
    return EvaluationReport(
        per_rank=per_rank,
        mean_row=mean_row,
        query_count=len(queries),
        k=effective_k,
    )


REPORT_COLUMNS = ("rank", "avg_similarity", "sd_similarity", "avg_accuracy", "sd_accuracy")


def report_to_json(report: EvaluationReport) -> dict:
    return {
        "k": report.k,
        "query_count": report.query_count,
        "per_rank": [
            {
                "rank": row.rank,
                "avg_similarity": row.avg_similarity,
                "sd_similarity": row.sd_similarity,
                "avg_accuracy": row.avg_accuracy,
                "sd_accuracy": row.sd_accuracy,
            }
            for row in report.per_rank
        ],
        "mean_row": {
            "avg_similarity": report.mean_row.avg_similarity,
            "sd_similarity": report.mean_row.sd_similarity,
            "avg_accuracy": report.mean_row.avg_accuracy,
            "sd_accuracy": report.mean_row.sd_accuracy,
        },
    }


def report_to_csv(report: EvaluationReport) -> str:
    # repr keeps full float precision so identical runs emit identical bytes.
    lines = [",".join(REPORT_COLUMNS)]
    for row in report.per_rank:
        lines.append(
            f"{row.rank},{row.avg_similarity!r},{row.sd_similarity!r},"
            f"{row.avg_accuracy!r},{row.sd_accuracy!r}"
        )
    m = report.mean_row
    lines.append(
        f"mean,{m.avg_similarity!r},{m.sd_similarity!r},{m.avg_accuracy!r},{m.sd_accuracy!r}"
    )
    return "\n".join(lines) + "\n"


def report_to_table(report: EvaluationReport) -> str:
    header = f"{'rank':>4}  {'avg_sim':>8}  {'sd_sim':>8}  {'avg_acc':>8}  {'sd_acc':>8}"
    lines = [header]
    for row in report.per_rank:
        lines.append(
            f"{row.rank:>4}  {row.avg_similarity:>8.4f}  {row.sd_similarity:>8.4f}  "
            f"{row.avg_accuracy:>8.4f}  {row.sd_accuracy:>8.4f}"
        )
    m = report.mean_row
    lines.append(
        f"{'mean':>4}  {m.avg_similarity:>8.4f}  {m.sd_similarity:>8.4f}  "
        f"{m.avg_accuracy:>8.4f}  {m.sd_accuracy:>8.4f}"
    )
    return "\n".join(lines)
