from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sheet_with_dont_knows, uniform_sheet
from delayscreen.scale import (
    AGE_GROUP_COUNT,
    DEVELOPMENTAL_CATEGORIES,
    AgeGroup,
    Category,
    CategoryId,
    CategoryLevels,
    DelayStatus,
    IncompleteSheet,
    InvalidScale,
    MissingCategory,
    NonPositiveAge,
    Question,
    Reliability,
    Response,
    ResponseSheet,
    ScaleDefinition,
    UnknownQuestion,
    WidthStatus,
    compute_levels,
    default_scale,
    developmental_age,
    judge,
    load_scale,
    load_sheet,
    reliability,
    scale_from_document,
    scale_to_document,
    sheet_from_document,
    sheet_to_document,
    validate_sheet,
)


def answers_from_values(scale, values: list[Response]) -> dict[str, Response]:
    qids = sorted(scale.developmental_question_ids)
    assert len(values) == len(qids)
    return dict(zip(qids, values))


class TestDefaultScale:
    def test_structure(self, scale):
        assert len(scale.age_groups) == 19
        assert scale.age_groups[0].start_month == 0
        assert scale.age_groups[-1].end_month == 72
        counts = {c.id: c.question_count for c in scale.categories}
        assert counts[CategoryId.LANGUAGE] == 31
        assert counts[CategoryId.PHYSIOLOGICAL] == 12
        assert counts[CategoryId.SOCIAL] == 34
        assert counts[CategoryId.GROSS_MOTOR] == 36
        assert counts[CategoryId.FINE_MOTOR] == 31
        assert counts[CategoryId.SENSORY_COGNITIVE] == 35
        assert len(scale.developmental_question_ids) == 167

    def test_deterministic(self):
        assert default_scale() == default_scale()

    def test_document_round_trip(self, scale):
        assert scale_from_document(scale_to_document(scale)) == scale

    def test_bundled_file_matches_builder(self, scale):
        from importlib.resources import files

        path = files("delayscreen.data") / "default_scale.json"
        assert scale_from_document(json.loads(path.read_text())) == scale


class TestScaleValidation:
    def test_wrong_group_count(self, scale):
        doc = scale_to_document(scale)
        doc["age_groups"] = doc["age_groups"][:-1]
        with pytest.raises(InvalidScale):
            scale_from_document(doc)

    def test_gap_between_groups(self, scale):
        doc = scale_to_document(scale)
        doc["age_groups"][3]["start_month"] += 1
        with pytest.raises(InvalidScale):
            scale_from_document(doc)

    def test_question_count_mismatch(self, scale):
        doc = scale_to_document(scale)
        doc["questions"] = doc["questions"][:-1]
        with pytest.raises(InvalidScale):
            scale_from_document(doc)

    def test_duplicate_question_id(self, scale):
        doc = scale_to_document(scale)
        doc["questions"][1]["id"] = doc["questions"][0]["id"]
        with pytest.raises(InvalidScale):
            scale_from_document(doc)

    def test_unsorted_questions(self, scale):
        doc = scale_to_document(scale)
        lang = [q for q in doc["questions"] if q["category"] == "language"]
        lang[0]["age_group"], lang[-1]["age_group"] = lang[-1]["age_group"], lang[0]["age_group"]
        with pytest.raises(InvalidScale):
            scale_from_document(doc)

    def test_loader_rejects_bad_json(self, tmp_path):
        path = tmp_path / "scale.json"
        path.write_text("{not json")
        with pytest.raises(InvalidScale):
            load_scale(path)


class TestSheetValidation:
    def test_missing_answer(self, scale):
        sheet = uniform_sheet(scale, Response.YES)
        answers = dict(sheet.answers)
        answers.pop(sorted(answers)[0])
        broken = ResponseSheet(answers=answers, physical_age_months=36.0)
        with pytest.raises(IncompleteSheet):
            validate_sheet(broken, scale)

    def test_unknown_question(self, scale):
        sheet = uniform_sheet(scale, Response.YES)
        answers = dict(sheet.answers)
        answers["no-such-question"] = Response.YES
        broken = ResponseSheet(answers=answers, physical_age_months=36.0)
        with pytest.raises(UnknownQuestion):
            validate_sheet(broken, scale)

    def test_nonpositive_age(self, scale):
        sheet = ResponseSheet(
            answers=uniform_sheet(scale, Response.YES).answers,
            physical_age_months=0.0,
        )
        with pytest.raises(NonPositiveAge):
            validate_sheet(sheet, scale)

    def test_sheet_document_round_trip(self, scale):
        sheet = uniform_sheet(scale, Response.NO, age=24.5)
        assert sheet_from_document(sheet_to_document(sheet)) == sheet

    def test_load_sheet_rejects_garbage(self, tmp_path):
        path = tmp_path / "sheet.json"
        path.write_text("[]")
        with pytest.raises(IncompleteSheet):
            load_sheet(path)


class TestComputeLevels:
    def test_all_yes_saturates(self, scale):
        levels = compute_levels(uniform_sheet(scale, Response.YES), scale)
        assert all(lv.basal == 19 and lv.peak == 19 for lv in levels)

    def test_all_no_floors(self, scale):
        levels = compute_levels(uniform_sheet(scale, Response.NO), scale)
        assert all(lv.basal == 0 and lv.peak == 1 for lv in levels)

    def test_hand_traced_language_profile(self, scale):
        # Language: groups 1-4 all Yes, group 5 mixed, group 6 mixed,
        # group 7 all No, everything later mixed-or-passing. By the stated
        # rule the all-Yes prefix ends at 4 and the first outright-failed
        # group above it is 7.
        answers = {qid: Response.YES for qid in scale.developmental_question_ids}
        by_group: dict[int, list[str]] = {}
        for q in scale.questions_by_category[CategoryId.LANGUAGE]:
            by_group.setdefault(q.age_group, []).append(q.id)
        mixed = [Response.NO, Response.YES]
        for i, qid in enumerate(by_group[5]):
            answers[qid] = mixed[i % 2]
        for i, qid in enumerate(by_group[6]):
            answers[qid] = mixed[(i + 1) % 2]
        for qid in by_group[7]:
            answers[qid] = Response.NO
        sheet = ResponseSheet(answers=answers, physical_age_months=36.0)
        levels = {lv.category: lv for lv in compute_levels(sheet, scale)}
        assert levels[CategoryId.LANGUAGE].basal == 4
        assert levels[CategoryId.LANGUAGE].peak == 7
        # untouched categories stay saturated
        assert levels[CategoryId.SOCIAL].basal == 19

    def test_dont_know_breaks_basal_but_not_peak(self, scale):
        answers = {qid: Response.YES for qid in scale.developmental_question_ids}
        for q in scale.questions_by_category[CategoryId.SOCIAL]:
            if q.age_group >= 3:
                answers[q.id] = Response.DONT_KNOW
        sheet = ResponseSheet(answers=answers, physical_age_months=36.0)
        levels = {lv.category: lv for lv in compute_levels(sheet, scale)}
        # DontKnow is not a pass, so basal stops at 2; it is not a fail
        # either, so no group reads all-No and peak falls back to 19.
        assert levels[CategoryId.SOCIAL].basal == 2
        assert levels[CategoryId.SOCIAL].peak == 19


class TestDevelopmentalAge:
    def test_degenerate_interval_is_group_midpoint(self, scale):
        levels = [
            CategoryLevels(category=cid, basal=9, peak=9)
            for cid in DEVELOPMENTAL_CATEGORIES
        ]
        # group 9 spans [32, 36) months; its midpoint is 34.0
        assert developmental_age(levels, scale) == pytest.approx(34.0)

    def test_floor_case_on_narrow_first_group(self):
        # custom instrument whose first group spans [0, 2): a uniform
        # basal-0 / peak-1 profile averages 0 and the 1.0 midpoint.
        scale = _narrow_first_group_scale()
        levels = [
            CategoryLevels(category=cid, basal=0, peak=1)
            for cid in DEVELOPMENTAL_CATEGORIES
        ]
        assert developmental_age(levels, scale) == pytest.approx(0.5)

    def test_alternating_profiles_average(self, scale):
        # categories alternate between (4,5) and (8,9); hand-computed
        # category ages from the group tables:
        #   group 4 = [12,16) mid 14, group 5 = [16,20) mid 18 -> 16.0
        #   group 8 = [28,32) mid 30, group 9 = [32,36) mid 34 -> 32.0
        # three categories at 16.0 and two at 32.0 average 22.4
        pairs = [(4, 5), (8, 9), (4, 5), (8, 9), (4, 5)]
        levels = [
            CategoryLevels(category=cid, basal=b, peak=p)
            for cid, (b, p) in zip(DEVELOPMENTAL_CATEGORIES, pairs)
        ]
        assert developmental_age(levels, scale) == pytest.approx((3 * 16.0 + 2 * 32.0) / 5)

    def test_missing_category(self, scale):
        levels = [
            CategoryLevels(category=cid, basal=1, peak=2)
            for cid in DEVELOPMENTAL_CATEGORIES[:-1]
        ]
        with pytest.raises(MissingCategory):
            developmental_age(levels, scale)


def _narrow_first_group_scale() -> ScaleDefinition:
    bounds = [(0, 2)]
    start = 2
    widths = [4] * 16 + [3, 3]
    for w in widths:
        bounds.append((start, start + w))
        start += w
    groups = tuple(
        AgeGroup(index=i, start_month=s, end_month=e)
        for i, (s, e) in enumerate(bounds, start=1)
    )
    assert groups[-1].end_month == 72 and len(groups) == 19
    categories = []
    questions = []
    for cid in CategoryId:
        count = 19 if cid != CategoryId.PHYSIOLOGICAL else 12
        categories.append(Category(id=cid, question_count=count))
        for order in range(1, count + 1):
            questions.append(
                Question(id=f"{cid.value}-{order:03d}", category=cid, age_group=order, order=order)
            )
    return ScaleDefinition(
        version="narrow-first-group",
        age_groups=groups,
        categories=tuple(categories),
        questions=tuple(questions),
    )


class TestReliability:
    @pytest.mark.parametrize(
        "count,expected",
        [
            (0, Reliability.RELIABLE),
            (16, Reliability.RELIABLE),
            (17, Reliability.UNRELIABLE),
            (167, Reliability.UNRELIABLE),
        ],
    )
    def test_boundary(self, scale, count, expected):
        flag, seen = reliability(sheet_with_dont_knows(scale, count))
        assert seen == count
        assert flag is expected

    def test_depends_only_on_count(self, scale):
        qids = sorted(scale.developmental_question_ids)
        first = {qid: Response.YES for qid in qids}
        last = {qid: Response.YES for qid in qids}
        for qid in qids[:10]:
            first[qid] = Response.DONT_KNOW
        for qid in qids[-10:]:
            last[qid] = Response.DONT_KNOW
        a = reliability(ResponseSheet(answers=first, physical_age_months=12.0))
        b = reliability(ResponseSheet(answers=last, physical_age_months=12.0))
        assert a == b


class TestJudge:
    @pytest.mark.parametrize(
        "ratio,expected",
        [
            (0.50, DelayStatus.NORMAL),
            (0.69, DelayStatus.NORMAL),
            (0.70, DelayStatus.EDGE),
            (0.72, DelayStatus.EDGE),
            (0.75, DelayStatus.EDGE),
            (0.76, DelayStatus.DELAY),
            (0.90, DelayStatus.DELAY),
        ],
    )
    def test_status_grid(self, ratio, expected):
        levels = [CategoryLevels(category=cid, basal=3, peak=4) for cid in DEVELOPMENTAL_CATEGORIES]
        judgment = judge(ratio, 1.0, levels, Reliability.RELIABLE)
        assert judgment.ratio == ratio
        assert judgment.status is expected

    @pytest.mark.parametrize(
        "width,expected",
        [
            (5, WidthStatus.NORMAL_WIDTH),
            (6, WidthStatus.TOO_WIDE),
            (7, WidthStatus.TOO_WIDE),
        ],
    )
    def test_width_grid(self, width, expected):
        levels = [
            CategoryLevels(category=cid, basal=2, peak=2 + (width if i == 2 else 1))
            for i, cid in enumerate(DEVELOPMENTAL_CATEGORIES)
        ]
        judgment = judge(20.0, 40.0, levels, Reliability.RELIABLE)
        assert judgment.width == width
        assert judgment.width_status is expected

    def test_nonpositive_age(self):
        levels = [CategoryLevels(category=cid, basal=1, peak=2) for cid in DEVELOPMENTAL_CATEGORIES]
        with pytest.raises(NonPositiveAge):
            judge(10.0, 0.0, levels, Reliability.RELIABLE)

    def test_pure(self):
        levels = [CategoryLevels(category=cid, basal=1, peak=3) for cid in DEVELOPMENTAL_CATEGORIES]
        a = judge(30.0, 40.0, levels, Reliability.UNRELIABLE, 20)
        b = judge(30.0, 40.0, levels, Reliability.UNRELIABLE, 20)
        assert a == b
        assert a.reliability is Reliability.UNRELIABLE
        assert a.dont_know_count == 20


@st.composite
def random_answers(draw, scale):
    qids = sorted(scale.developmental_question_ids)
    values = draw(
        st.lists(
            st.sampled_from(list(Response)),
            min_size=len(qids),
            max_size=len(qids),
        )
    )
    return dict(zip(qids, values))


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_levels_always_ordered(self, data):
        scale = default_scale()
        answers = data.draw(random_answers(scale))
        sheet = ResponseSheet(answers=answers, physical_age_months=24.0)
        for lv in compute_levels(sheet, scale):
            assert 0 <= lv.basal <= lv.peak <= AGE_GROUP_COUNT

    @settings(max_examples=40, deadline=None)
    @given(data=st.data())
    def test_flipping_to_yes_never_lowers_basal(self, data):
        scale = default_scale()
        answers = data.draw(random_answers(scale))
        sheet = ResponseSheet(answers=answers, physical_age_months=24.0)
        before = {lv.category: lv.basal for lv in compute_levels(sheet, scale)}
        non_yes = [qid for qid, r in answers.items() if r != Response.YES]
        if not non_yes:
            return
        flipped = dict(answers)
        flipped[data.draw(st.sampled_from(non_yes))] = Response.YES
        after = {
            lv.category: lv.basal
            for lv in compute_levels(
                ResponseSheet(answers=flipped, physical_age_months=24.0), scale
            )
        }
        for cid in before:
            assert after[cid] >= before[cid]

    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_dev_age_stays_in_span(self, data):
        scale = default_scale()
        answers = data.draw(random_answers(scale))
        sheet = ResponseSheet(answers=answers, physical_age_months=24.0)
        dev = developmental_age(compute_levels(sheet, scale), scale)
        assert 0.0 <= dev <= 72.0

    @settings(max_examples=200, deadline=None)
    @given(ratio=st.floats(min_value=0.0, max_value=10.0, allow_nan=False))
    def test_status_partition(self, ratio):
        levels = [CategoryLevels(category=cid, basal=1, peak=2) for cid in DEVELOPMENTAL_CATEGORIES]
        status = judge(ratio, 1.0, levels, Reliability.RELIABLE).status
        if ratio > 0.75:
            assert status is DelayStatus.DELAY
        elif ratio < 0.70:
            assert status is DelayStatus.NORMAL
        else:
            assert status is DelayStatus.EDGE
