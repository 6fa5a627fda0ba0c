from __future__ import annotations

import json

import pytest

from conftest import make_record, make_vector
from delayscreen.casebase import (
    CaseBase,
    DuplicateId,
    MalformedRecord,
    NotVerified,
    RecordStatus,
    RetainKind,
    SchemaVersionMismatch,
    record_from_json,
    record_to_json,
)


def filled_base(n: int) -> CaseBase:
    base = CaseBase()
    for i in range(n):
        record = make_record(
            f"case-{i:03d}",
            make_vector(age=float(1 + (i % 70)), basal=i % 18, peak=i % 18 + 1),
            usage_count=i % 3,
        )
        base.retain(record)
    return base


class TestRetain:
    def test_add_then_merge_is_idempotent_in_count(self):
        base = CaseBase()
        first = make_record("a", make_vector(), solution="old advice")
        assert base.retain(first).kind is RetainKind.ADDED
        again = make_record("b", make_vector(), solution="new advice", usage_count=2)
        outcome = base.retain(again)
        assert outcome.kind is RetainKind.MERGED
        assert outcome.case_id == "a"
        assert len(base) == 1
        assert base.records["a"].solution == "new advice"
        assert base.records["a"].usage_count == 2

    def test_distinct_features_both_kept(self):
        base = CaseBase()
        base.retain(make_record("a", make_vector(basal=3, peak=4)))
        base.retain(make_record("b", make_vector(basal=3, peak=5)))
        assert len(base) == 2

    def test_hundred_distinct_records(self):
        assert len(filled_base(100)) == 100

    def test_not_verified_rejected(self):
        base = CaseBase()
        with pytest.raises(NotVerified):
            base.retain(make_record("a", make_vector(), status=RecordStatus.PROPOSED))

    def test_duplicate_id_rejected(self):
        base = CaseBase()
        base.retain(make_record("a", make_vector(basal=1, peak=2)))
        with pytest.raises(DuplicateId):
            base.retain(make_record("a", make_vector(basal=5, peak=9)))


class TestPurge:
    def test_empty_list_is_noop(self):
        base = filled_base(5)
        result = base.purge([])
        assert len(base) == 5
        assert result.removed == () and result.unknown == ()

    def test_known_id_removed(self):
        base = filled_base(5)
        result = base.purge(["case-002"])
        assert len(base) == 4
        assert result.removed == ("case-002",)

    def test_unknown_ids_reported_not_fatal(self):
        base = filled_base(5)
        result = base.purge(["case-001", "ghost"])
        assert len(base) == 4
        assert result.removed == ("case-001",)
        assert result.unknown == ("ghost",)

    def test_purge_restores_count_after_retain(self):
        base = filled_base(5)
        record = make_record("fresh", make_vector(age=63.5, basal=11, peak=14))
        base.retain(record)
        base.purge(["fresh"])
        assert len(base) == 5


class TestCandidates:
    def test_status_filter(self):
        base = CaseBase()
        base.retain(make_record("a", make_vector(basal=1, peak=2)))
        base.retain(make_record("b", make_vector(basal=2, peak=3)))
        base.records["c"] = make_record("c", make_vector(basal=3, peak=4), status=RecordStatus.PROPOSED)
        assert [cid for cid, _ in base.candidates()] == ["a", "b"]

    def test_empty(self):
        assert CaseBase().candidates() == []

    def test_grows_with_retain(self):
        base = filled_base(3)
        before = len(base.candidates())
        base.retain(make_record("x", make_vector(age=70.0, basal=16, peak=18)))
        assert len(base.candidates()) == before + 1

    def test_note_retrieval_bumps_usage(self):
        base = filled_base(2)
        base.note_retrieval(["case-000", "missing"])
        assert base.records["case-000"].usage_count == 1


class TestPersistence:
    def test_empty_round_trip(self, tmp_path):
        path = tmp_path / "base.jsonl"
        CaseBase().save(path)
        loaded = CaseBase.load(path)
        assert len(loaded) == 0
        assert loaded.schema_version == "1"

    def test_hundred_record_round_trip(self, tmp_path):
        base = filled_base(100)
        path = tmp_path / "base.jsonl"
        base.save(path)
        assert CaseBase.load(path) == base

    def test_save_load_save_is_byte_identical(self, tmp_path):
        base = filled_base(100)
        first = tmp_path / "one.jsonl"
        second = tmp_path / "two.jsonl"
        base.save(first)
        CaseBase.load(first).save(second)
        assert first.read_bytes() == second.read_bytes()

    def test_tampered_line_reports_line_number(self, tmp_path):
        base = filled_base(10)
        path = tmp_path / "base.jsonl"
        base.save(path)
        lines = path.read_text().splitlines()
        lines[5] = lines[5][:-10]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(MalformedRecord) as err:
            CaseBase.load(path)
        assert err.value.line_number == 6

    def test_unknown_field_rejected(self, tmp_path):
        base = filled_base(1)
        path = tmp_path / "base.jsonl"
        base.save(path)
        lines = path.read_text().splitlines()
        record = json.loads(lines[1])
        record["surprise"] = True
        lines[1] = json.dumps(record)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(MalformedRecord) as err:
            CaseBase.load(path)
        assert err.value.line_number == 2

    def test_schema_version_mismatch(self, tmp_path):
        path = tmp_path / "base.jsonl"
        path.write_text('{"schema_version":"99"}\n')
        with pytest.raises(SchemaVersionMismatch):
            CaseBase.load(path)

    def test_duplicate_id_in_file(self, tmp_path):
        base = filled_base(2)
        path = tmp_path / "base.jsonl"
        base.save(path)
        lines = path.read_text().splitlines()
        lines.append(lines[1])
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(MalformedRecord) as err:
            CaseBase.load(path)
        assert err.value.line_number == 4

    def test_record_json_round_trip_preserves_fields(self):
        record = make_record("r", make_vector(age=41.5, basal=8, peak=12), usage_count=7)
        record.bone_age_months = 39.0
        record.revised_by = "dr-kim"
        assert record_from_json(record_to_json(record)) == record


class TestDuplicateGroups:
    def test_no_duplicates(self):
        assert filled_base(5).duplicate_groups() == []

    def test_externally_introduced_duplicate(self):
        base = filled_base(3)
        twin = make_record("twin", base.records["case-001"].features)
        base.records["twin"] = twin
        groups = base.duplicate_groups()
        assert groups == [["case-001", "twin"]]
