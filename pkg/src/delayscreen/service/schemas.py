"""Request and response models for the screening service API."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..casebase import CaseRecord
from ..engine import ScreeningSession
from ..scale import Judgment
from ..similarity import RankedMatch, SimilarityScore


class ApiErrorBody(BaseModel):
    code: str
    message: str
    detail: object | None = None


class SheetBody(BaseModel):
    physical_age_months: float
    answers: dict[str, str]
    physiological_values: dict[str, float] = Field(default_factory=dict)
    bone_age_months: float | None = None

    def as_document(self) -> dict:
        return {
            "physical_age_months": self.physical_age_months,
            "answers": self.answers,
            "physiological_values": self.physiological_values,
            "bone_age_months": self.bone_age_months,
        }


class ReviseBody(BaseModel):
    reviser: str
    solution: str | None = None
    status_override: str | None = None


class IndexContributionView(BaseModel):
    similarity: float
    weighted: float


class ScoreView(BaseModel):
    value: float
    per_index: dict[str, IndexContributionView]

    @classmethod
    def from_score(cls, score: SimilarityScore) -> ScoreView:
        return cls(
            value=score.value,
            per_index={
                name: IndexContributionView(similarity=c.similarity, weighted=c.weighted)
                for name, c in score.per_index.items()
            },
        )


class MatchView(BaseModel):
    case_id: str
    rank: int
    score: ScoreView
    solution: str

    @classmethod
    def from_match(cls, match: RankedMatch, solution: str) -> MatchView:
        return cls(
            case_id=match.case_id,
            rank=match.rank,
            score=ScoreView.from_score(match.score),
            solution=solution,
        )


class JudgmentView(BaseModel):
    developmental_age_months: float
    ratio: float
    status: str
    width: int
    width_status: str
    reliability: str
    dont_know_count: int

    @classmethod
    def from_judgment(cls, judgment: Judgment) -> JudgmentView:
        return cls(
            developmental_age_months=judgment.developmental_age_months,
            ratio=judgment.ratio,
            status=judgment.status.value,
            width=judgment.width,
            width_status=judgment.width_status.value,
            reliability=judgment.reliability.value,
            dont_know_count=judgment.dont_know_count,
        )


class SessionView(BaseModel):
    session_id: str
    state: str
    judgment: JudgmentView
    matches: list[MatchView]
    proposed_solution: str
    annotations: list[str]
    revised_by: str | None
    bone_age_months: float | None

    @classmethod
    def from_session(cls, session: ScreeningSession, solutions: dict[str, str]) -> SessionView:
        return cls(
            session_id=session.session_id,
            state=session.state.value,
            judgment=JudgmentView.from_judgment(session.judgment),
            matches=[
                MatchView.from_match(m, solutions.get(m.case_id, "")) for m in session.matches
            ],
            proposed_solution=session.proposed_solution,
            annotations=list(session.annotations),
            revised_by=session.revised_by,
            bone_age_months=session.bone_age_months,
        )


class RetainResponse(BaseModel):
    case_id: str
    outcome: str


class CaseView(BaseModel):
    id: str
    created_at: str
    features: dict[str, float]
    sheet_digest: str
    bone_age_months: float | None
    judgment: JudgmentView
    solution: str
    status: str
    revised_by: str | None
    usage_count: int
    source_tag: str

    @classmethod
    def from_record(cls, record: CaseRecord) -> CaseView:
        return cls(
            id=record.id,
            created_at=record.created_at,
            features=record.features.as_dict(),
            sheet_digest=record.sheet_digest,
            bone_age_months=record.bone_age_months,
            judgment=JudgmentView.from_judgment(record.judgment),
            solution=record.solution,
            status=record.status.value,
            revised_by=record.revised_by,
            usage_count=record.usage_count,
            source_tag=record.source_tag,
        )


class CaseListResponse(BaseModel):
    total: int
    offset: int
    limit: int
    items: list[CaseView]


class PurgeResponse(BaseModel):
    removed: list[str]
    unknown: list[str]


class HealthResponse(BaseModel):
    status: str
    service: str
    version: str
    case_count: int
