"""Operator command line: case-base administration, batch screening,
synthetic data generation, evaluation runs, and serving the HTTP API.

Exit codes: 0 success, 1 validation failure, 2 I/O failure. Machine
readable output goes to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import json
import sys
from contextlib import contextmanager
from pathlib import Path

import click

from .casebase import CaseBase, CaseBaseError
from .engine import (
    BoneAgeProvider,
    EngineError,
    evaluate,
    process_new_case,
    report_to_csv,
    report_to_json,
    report_to_table,
    retain_session,
)
from .scale import ScaleError, default_scale, load_scale, load_sheet
from .similarity import SimilarityError, default_weights, load_weights
from .synth import generate_dataset, load_queries, save_queries

EXIT_VALIDATION = 1
EXIT_IO = 2

CASEBASE_OPTION = click.option(
    "--casebase",
    "casebase_path",
    envvar="DELAYSCREEN_CASEBASE",
    required=True,
    type=click.Path(path_type=Path),
    help="Path to the case-base file.",
)
SCALE_OPTION = click.option(
    "--scale",
    "scale_path",
    envvar="DELAYSCREEN_SCALE",
    type=click.Path(path_type=Path),
    help="Scale definition file (bundled default when omitted).",
)
WEIGHTS_OPTION = click.option(
    "--weights",
    "weights_path",
    envvar="DELAYSCREEN_WEIGHTS",
    type=click.Path(path_type=Path),
    help="Weight profile file (bundled default when omitted).",
)
FORMAT_OPTION = click.option(
    "--format",
    "output_format",
    type=click.Choice(["json", "table"]),
    default="json",
    show_default=True,
)


@contextmanager
def guarded():
    """Map error classes onto the documented exit codes."""
    try:
        yield
    except (ScaleError, SimilarityError, CaseBaseError, EngineError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(EXIT_IO)


def _load_scale(scale_path: Path | None):
    return load_scale(scale_path) if scale_path else default_scale()


def _load_weights(weights_path: Path | None):
    return load_weights(weights_path) if weights_path else default_weights()


def _emit(payload: dict, output_format: str, table_text: str) -> None:
    if output_format == "json":
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(table_text)


@click.group()
def main() -> None:
    """Developmental-delay screening toolkit."""


@main.command()
@CASEBASE_OPTION
@SCALE_OPTION
@click.option("--force", is_flag=True, help="Replace an existing file.")
def init(casebase_path: Path, scale_path: Path | None, force: bool) -> None:
    """Create an empty case-base file."""
    with guarded():
        _load_scale(scale_path)  # fail early on a broken scale file
        if casebase_path.exists() and not force:
            click.echo(f"error: {casebase_path} exists, pass --force to replace", err=True)
            sys.exit(EXIT_VALIDATION)
        CaseBase().save(casebase_path)
        click.echo(f"initialized empty case base at {casebase_path}", err=True)


@main.command()
@click.option("--sheet", "sheet_path", required=True, type=click.Path(path_type=Path))
@CASEBASE_OPTION
@SCALE_OPTION
@WEIGHTS_OPTION
@click.option("--k", default=10, show_default=True, type=click.IntRange(min=1))
@click.option("--retain", is_flag=True, help="Verify and store the screened case.")
@click.option("--bone-age-table", type=click.Path(path_type=Path), help="Two-column bone-age lookup table.")
@click.option("--bone-age-ref", help="Row to look up in the bone-age table.")
@click.option("--created-at", help="Timestamp recorded on a retained case (RFC 3339); defaults to now.")
@FORMAT_OPTION
def screen(
    sheet_path: Path,
    casebase_path: Path,
    scale_path: Path | None,
    weights_path: Path | None,
    k: int,
    retain: bool,
    bone_age_table: Path | None,
    bone_age_ref: str | None,
    created_at: str | None,
    output_format: str,
) -> None:
    """Screen one answer sheet against the case base."""
    with guarded():
        scale = _load_scale(scale_path)
        weights = _load_weights(weights_path)
        base = CaseBase.load(casebase_path)
        sheet = load_sheet(sheet_path)
        provider = BoneAgeProvider(bone_age_table) if bone_age_table else None

        session = process_new_case(
            sheet, base, scale, weights, k=k,
            bone_age_provider=provider, bone_age_ref=bone_age_ref,
        )
        retained = None
        if retain:
            outcome, _ = retain_session(session, base, created_at=created_at)
            base.save(casebase_path)
            retained = {"case_id": outcome.case_id, "outcome": outcome.kind.value}

        judgment = session.judgment
        payload = {
            "judgment": {
                "developmental_age_months": judgment.developmental_age_months,
                "ratio": judgment.ratio,
                "status": judgment.status.value,
                "width": judgment.width,
                "width_status": judgment.width_status.value,
                "reliability": judgment.reliability.value,
                "dont_know_count": judgment.dont_know_count,
            },
            "annotations": session.annotations,
            "proposed_solution": session.proposed_solution,
            "matches": [
                {
                    "case_id": m.case_id,
                    "rank": m.rank,
                    "similarity": m.score.value,
                    "solution": base.records[m.case_id].solution
                    if m.case_id in base.records
                    else "",
                }
                for m in session.matches
            ],
            "retained": retained,
        }

        lines = [
            f"status: {judgment.status.value} (ratio {judgment.ratio:.4f})",
            f"developmental age: {judgment.developmental_age_months:.1f} months"
            f" | width: {judgment.width} ({judgment.width_status.value})"
            f" | reliability: {judgment.reliability.value}"
            f" ({judgment.dont_know_count} dont-know)",
        ]
        lines += [f"note: {note}" for note in session.annotations]
        lines.append("matches:")
        for m in session.matches:
            lines.append(f"  {m.rank:>2}. {m.case_id}  {m.score.value:.4f}")
        if retained:
            lines.append(f"retained: {retained['case_id']} ({retained['outcome']})")
        _emit(payload, output_format, "\n".join(lines))


@main.command(name="eval")
@CASEBASE_OPTION
@click.option("--queries", "queries_path", required=True, type=click.Path(path_type=Path))
@SCALE_OPTION
@WEIGHTS_OPTION
@click.option("--k", default=5, show_default=True, type=click.IntRange(min=1))
@click.option("--out", "out_path", type=click.Path(path_type=Path), help="Report file; JSON here, CSV alongside.")
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["json", "table"]),
    default="table",
    show_default=True,
)
def eval_command(
    casebase_path: Path,
    queries_path: Path,
    scale_path: Path | None,
    weights_path: Path | None,
    k: int,
    out_path: Path | None,
    output_format: str,
) -> None:
    """Replay a query set and report per-rank similarity and accuracy."""
    with guarded():
        scale = _load_scale(scale_path)
        weights = _load_weights(weights_path)
        base = CaseBase.load(casebase_path)
        queries = load_queries(queries_path)
        report = evaluate(base, queries, scale, weights, k=k)

        document = report_to_json(report)
        if out_path is not None:
            csv_path = (
                out_path.with_suffix(".csv")
                if out_path.suffix == ".json"
                else Path(str(out_path) + ".csv")
            )
            out_path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
            csv_path.write_text(report_to_csv(report), encoding="utf-8")
            click.echo(f"wrote {out_path} and {csv_path}", err=True)
        _emit(document, output_format, report_to_table(report))


@main.command()
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--cases", "case_count", default=100, show_default=True, type=click.IntRange(min=1))
@click.option("--queries", "query_count", default=50, show_default=True, type=click.IntRange(min=1))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@SCALE_OPTION
def synth(
    seed: int,
    case_count: int,
    query_count: int,
    out_dir: Path,
    scale_path: Path | None,
) -> None:
    """Generate a seeded synthetic case base and query set."""
    with guarded():
        scale = _load_scale(scale_path)
        data = generate_dataset(seed=seed, case_count=case_count, query_count=query_count, scale=scale)
        out_dir.mkdir(parents=True, exist_ok=True)
        cases_path = out_dir / "cases.jsonl"
        queries_path = out_dir / "queries.jsonl"
        data.base.save(cases_path)
        save_queries(queries_path, data.queries)
        click.echo(f"wrote {cases_path} ({case_count} cases) and {queries_path} ({query_count} queries)", err=True)


@main.command()
@CASEBASE_OPTION
@click.argument("ids", nargs=-1)
@FORMAT_OPTION
def purge(casebase_path: Path, ids: tuple[str, ...], output_format: str) -> None:
    """Remove the listed case ids from the base."""
    with guarded():
        clean = [i.strip() for i in ids]
        if not clean or any(not i for i in clean):
            click.echo("error: pass one or more non-empty case ids", err=True)
            sys.exit(EXIT_VALIDATION)
        base = CaseBase.load(casebase_path)
        result = base.purge(clean)
        base.save(casebase_path)
        payload = {"removed": list(result.removed), "unknown": list(result.unknown)}
        table = (
            f"removed: {', '.join(result.removed) or '(none)'}\n"
            f"unknown: {', '.join(result.unknown) or '(none)'}"
        )
        _emit(payload, output_format, table)


@main.command(name="merge-report")
@CASEBASE_OPTION
@FORMAT_OPTION
def merge_report(casebase_path: Path, output_format: str) -> None:
    """List groups of verified cases sharing identical feature vectors."""
    with guarded():
        base = CaseBase.load(casebase_path)
        groups = base.duplicate_groups()
        payload = {"groups": groups}
        if groups:
            table = "\n".join("duplicates: " + ", ".join(group) for group in groups)
        else:
            table = "no duplicate feature vectors"
        _emit(payload, output_format, table)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@CASEBASE_OPTION
@SCALE_OPTION
@WEIGHTS_OPTION
@click.option("--k", default=10, show_default=True, type=click.IntRange(min=1))
@click.option("--session-ttl", default=3600.0, show_default=True, type=float)
@click.option("--ui-dir", type=click.Path(path_type=Path), help="Directory of built UI assets to serve at /ui.")
def serve(
    host: str,
    port: int,
    casebase_path: Path,
    scale_path: Path | None,
    weights_path: Path | None,
    k: int,
    session_ttl: float,
    ui_dir: Path | None,
) -> None:
    """Run the screening HTTP service."""
    import uvicorn

    from .service import ServiceSettings, create_app

    with guarded():
        settings = ServiceSettings(
            casebase_path=casebase_path,
            scale_path=scale_path,
            weights_path=weights_path,
            retrieval_k=k,
            session_ttl_seconds=session_ttl,
            ui_dir=ui_dir,
        )
        app = create_app(settings)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
