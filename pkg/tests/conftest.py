from __future__ import annotations

import socket
import threading
import time

import httpx
import pytest
import uvicorn

from delayscreen.casebase import CaseRecord, RecordStatus
from delayscreen.scale import (
    DelayStatus,
    Judgment,
    Reliability,
    Response,
    ResponseSheet,
    ScaleDefinition,
    WidthStatus,
    default_scale,
)
from delayscreen.service import ServiceSettings, create_app
from delayscreen.similarity import FeatureVector, WeightProfile, default_weights


@pytest.fixture(scope="session")
def scale() -> ScaleDefinition:
    return default_scale()


@pytest.fixture(scope="session")
def weights() -> WeightProfile:
    return default_weights()


def uniform_sheet(
    scale: ScaleDefinition, response: Response, age: float = 36.0
) -> ResponseSheet:
    """A sheet answering every developmental question the same way."""
    return ResponseSheet(
        answers={qid: response for qid in scale.developmental_question_ids},
        physical_age_months=age,
        physiological_values={},
    )


def sheet_with_dont_knows(
    scale: ScaleDefinition, dont_know_count: int, age: float = 36.0
) -> ResponseSheet:
    """All-Yes sheet with the first N answers turned into DontKnow."""
    qids = sorted(scale.developmental_question_ids)
    answers = {qid: Response.YES for qid in qids}
    for qid in qids[:dont_know_count]:
        answers[qid] = Response.DONT_KNOW
    return ResponseSheet(answers=answers, physical_age_months=age, physiological_values={})


def make_vector(age: float = 36.0, basal: int = 5, peak: int = 7, **overrides) -> FeatureVector:
    values = {"actual_age": age}
    for cid in ("language", "social", "gross_motor", "fine_motor", "sensory_cognitive"):
        values[f"{cid}_basal"] = basal
        values[f"{cid}_peak"] = peak
    values.update(overrides)
    return FeatureVector(**values)


def make_judgment(
    status: DelayStatus = DelayStatus.NORMAL,
    ratio: float = 0.5,
    dev_age: float = 18.0,
) -> Judgment:
    return Judgment(
        developmental_age_months=dev_age,
        ratio=ratio,
        status=status,
        width=2,
        width_status=WidthStatus.NORMAL_WIDTH,
        reliability=Reliability.RELIABLE,
        dont_know_count=0,
    )


def make_record(
    case_id: str,
    features: FeatureVector,
    solution: str = "continue surveillance",
    status: RecordStatus = RecordStatus.VERIFIED,
    judgment_status: DelayStatus = DelayStatus.NORMAL,
    usage_count: int = 0,
) -> CaseRecord:
    return CaseRecord(
        id=case_id,
        created_at="2023-06-01T00:00:00Z",
        features=features,
        sheet_digest="0" * 64,
        judgment=make_judgment(status=judgment_status),
        solution=solution,
        status=status,
        usage_count=usage_count,
        source_tag="test",
    )


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class LiveService:
    """A real uvicorn instance on localhost, torn down after the test."""

    def __init__(self, settings: ServiceSettings) -> None:
        self.settings = settings
        self.port = free_port()
        self.base_url = f"http://127.0.0.1:{self.port}"
        config = uvicorn.Config(
            create_app(settings), host="127.0.0.1", port=self.port, log_level="warning"
        )
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    def start(self) -> None:
        self._thread.start()
        deadline = time.monotonic() + 10.0
        while time.monotonic() < deadline:
            try:
                if httpx.get(f"{self.base_url}/health", timeout=1.0).status_code == 200:
                    return
            except httpx.TransportError:
                time.sleep(0.05)
        raise RuntimeError("service did not become ready")

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=5)


@pytest.fixture
def live_service(tmp_path):
    service = LiveService(ServiceSettings(casebase_path=tmp_path / "base.jsonl"))
    service.start()
    with httpx.Client(base_url=service.base_url, timeout=10.0) as client:
        client.casebase_path = tmp_path / "base.jsonl"
        yield client
    service.stop()


ACCEPTANCE_MODULE = "test_acceptance.py"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if ACCEPTANCE_MODULE not in nodeid or "::" not in nodeid:
                continue
            name = nodeid.split("::")[-1].removeprefix("test_")
            verdict = "PASS" if outcome == "passed" else "FAIL"
            lines.append((name, verdict))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {name.replace('_', '-')}")
