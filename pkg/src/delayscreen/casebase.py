"""Persistent store of screened cases.

The store implements the retention side of the case lifecycle: verified
cases are added, exact feature duplicates are merged into the existing
record, and operator-selected cases can be purged. Only verified records
are ever offered as retrieval candidates.

Persistence is line-delimited JSON: line 1 is a header carrying the schema
version, every following line is one record with a fixed field set, so
errors can be reported per line and appends stay cheap. Saving a loaded
base reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .scale import DelayStatus, Judgment, Reliability, WidthStatus
from .similarity import FeatureVector

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"

RECORD_FIELDS = (
    "id",
    "created_at",
    "features",
    "sheet_digest",
    "bone_age_months",
    "judgment",
    "solution",
    "status",
    "revised_by",
    "usage_count",
    "source_tag",
)

JUDGMENT_FIELDS = (
    "developmental_age_months",
    "ratio",
    "status",
    "width",
    "width_status",
    "reliability",
    "dont_know_count",
)


class CaseBaseError(Exception):
    """Base class for case store failures."""


class NotVerified(CaseBaseError):
    """Only verified records may be retained."""


class DuplicateId(CaseBaseError):
    """Record id already present with different features."""


class SchemaVersionMismatch(CaseBaseError):
    """Case-base file carries an unsupported schema version."""


class MalformedRecord(CaseBaseError):
    """A case-base line failed to parse; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str) -> None:
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class RecordStatus(str, Enum):
    PROPOSED = "proposed"
    REVISED = "revised"
    VERIFIED = "verified"


class RetainKind(str, Enum):
    ADDED = "added"
    MERGED = "merged"


@dataclass(frozen=True)
class RetainOutcome:
    kind: RetainKind
    case_id: str


@dataclass(frozen=True)
class PurgeResult:
    removed: tuple[str, ...]
    unknown: tuple[str, ...]


@dataclass
class CaseRecord:
    id: str
    created_at: str
    features: FeatureVector
    sheet_digest: str
    judgment: Judgment
    solution: str
    status: RecordStatus
    source_tag: str
    bone_age_months: float | None = None
    revised_by: str | None = None
    usage_count: int = 0


def utc_now_rfc3339() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _judgment_to_json(judgment: Judgment) -> dict:
    return {
        "developmental_age_months": float(judgment.developmental_age_months),
        "ratio": float(judgment.ratio),
        "status": judgment.status.value,
        "width": int(judgment.width),
        "width_status": judgment.width_status.value,
        "reliability": judgment.reliability.value,
        "dont_know_count": int(judgment.dont_know_count),
    }


def _judgment_from_json(data: dict) -> Judgment:
    if set(data) != set(JUDGMENT_FIELDS):
        unexpected = set(data) ^ set(JUDGMENT_FIELDS)
        raise ValueError(f"judgment fields mismatch: {sorted(unexpected)}")
    return Judgment(
        developmental_age_months=float(data["developmental_age_months"]),
        ratio=float(data["ratio"]),
        status=DelayStatus(data["status"]),
        width=int(data["width"]),
        width_status=WidthStatus(data["width_status"]),
        reliability=Reliability(data["reliability"]),
        dont_know_count=int(data["dont_know_count"]),
    )


def record_to_json(record: CaseRecord) -> dict:
    features = record.features.as_dict()
    features["actual_age"] = float(features["actual_age"])
    return {
        "id": record.id,
        "created_at": record.created_at,
        "features": features,
        "sheet_digest": record.sheet_digest,
        "bone_age_months": None if record.bone_age_months is None else float(record.bone_age_months),
        "judgment": _judgment_to_json(record.judgment),
        "solution": record.solution,
        "status": record.status.value,
        "revised_by": record.revised_by,
        "usage_count": int(record.usage_count),
        "source_tag": record.source_tag,
    }


def record_from_json(data: dict) -> CaseRecord:
    if not isinstance(data, dict):
        raise ValueError("record must be a JSON object")
    unknown = set(data) - set(RECORD_FIELDS)
    if unknown:
        raise ValueError(f"unknown fields: {sorted(unknown)}")
    missing = set(RECORD_FIELDS) - set(data)
    if missing:
        raise ValueError(f"missing fields: {sorted(missing)}")
    bone_age = data["bone_age_months"]
    revised_by = data["revised_by"]
    return CaseRecord(
        id=str(data["id"]),
        created_at=str(data["created_at"]),
        features=FeatureVector.from_dict(data["features"]),
        sheet_digest=str(data["sheet_digest"]),
        bone_age_months=None if bone_age is None else float(bone_age),
        judgment=_judgment_from_json(data["judgment"]),
        solution=str(data["solution"]),
        status=RecordStatus(data["status"]),
        revised_by=None if revised_by is None else str(revised_by),
        usage_count=int(data["usage_count"]),
        source_tag=str(data["source_tag"]),
    )


def _dump_line(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


@dataclass
class CaseBase:
    """In-memory case store; insertion ordered, single writer.

    Mutations (retain, purge, save) must be serialized by the owning
    process; reads of a loaded base are safe to share.
    """

    records: dict[str, CaseRecord] = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def __len__(self) -> int:
        return len(self.records)

    def retain(self, record: CaseRecord) -> RetainOutcome:
        """Add a verified record, or merge it into an exact duplicate.

        A duplicate is an existing verified record with an identical
        feature vector; merging keeps the existing id, sums usage counts,
        and retains the newest solution text.
        """
        if record.status != RecordStatus.VERIFIED:
            raise NotVerified(f"record {record.id!r} has status {record.status.value}")
        for existing in self.records.values():
            if existing.status == RecordStatus.VERIFIED and existing.features == record.features:
                existing.usage_count += record.usage_count
                existing.solution = record.solution
                logger.info("merged case %s into existing case %s", record.id, existing.id)
                return RetainOutcome(kind=RetainKind.MERGED, case_id=existing.id)
        if record.id in self.records:
            raise DuplicateId(f"case id {record.id!r} already stored")
        self.records[record.id] = record
        return RetainOutcome(kind=RetainKind.ADDED, case_id=record.id)

    def purge(self, ids: list[str]) -> PurgeResult:
        """Remove the listed records; unknown ids are reported, not fatal."""
        removed: list[str] = []
        unknown: list[str] = []
        for case_id in ids:
            if case_id in self.records:
                del self.records[case_id]
                removed.append(case_id)
            else:
                unknown.append(case_id)
        return PurgeResult(removed=tuple(removed), unknown=tuple(unknown))

    def candidates(self) -> list[tuple[str, FeatureVector]]:
        """All verified records in stable insertion order."""
        return [
            (record.id, record.features)
            for record in self.records.values()
            if record.status == RecordStatus.VERIFIED
        ]

    def note_retrieval(self, ids: list[str]) -> None:
        """Bump usage counts for records returned by a retrieval."""
        for case_id in ids:
            record = self.records.get(case_id)
            if record is not None:
                record.usage_count += 1

    def duplicate_groups(self) -> list[list[str]]:
        """Groups of verified record ids sharing one feature vector."""
        by_features: dict[FeatureVector, list[str]] = {}
        for record in self.records.values():
            if record.status == RecordStatus.VERIFIED:
                by_features.setdefault(record.features, []).append(record.id)
        return [ids for ids in by_features.values() if len(ids) > 1]

    def save(self, path: str | Path) -> None:
        lines = [_dump_line({"schema_version": self.schema_version})]
        lines.extend(_dump_line(record_to_json(record)) for record in self.records.values())
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> CaseBase:
        text = Path(path).read_text(encoding="utf-8")
        lines = text.splitlines()
        if not lines:
            raise MalformedRecord(1, "empty case-base file, expected a header line")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise MalformedRecord(1, f"header is not valid JSON: {exc}") from exc
        if not isinstance(header, dict) or set(header) != {"schema_version"}:
            raise MalformedRecord(1, "header must be exactly {\"schema_version\": ...}")
        version = str(header["schema_version"])
        if version != SCHEMA_VERSION:
            raise SchemaVersionMismatch(
                f"unsupported schema version {version!r}, expected {SCHEMA_VERSION!r}"
            )

        base = cls(schema_version=version)
        for line_number, line in enumerate(lines[1:], start=2):
            if not line.strip():
                raise MalformedRecord(line_number, "blank line inside record section")
            try:
                record = record_from_json(json.loads(line))
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_number, f"not valid JSON: {exc}") from exc
            except (ValueError, TypeError, KeyError) as exc:
                raise MalformedRecord(line_number, str(exc)) from exc
            if record.id in base.records:
                raise MalformedRecord(line_number, f"duplicate case id {record.id!r}")
            base.records[record.id] = record
        return base


def new_case_base() -> CaseBase:
    return CaseBase()
