"""CSV/JSON emission of experiment reports plus trajectory and telemetry sidecars."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from pathlib import Path

from mallows_lab.models import TRAJECTORY_COLUMNS, ExperimentKind, ExperimentReport, ReportFormat

LOGGER = logging.getLogger("mallows_lab.harness")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ""
    return str(value)


def _csv_text(columns, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def render_csv(report: ExperimentReport) -> str:
    """Header plus one line per record; an empty report is header-only."""
    return _csv_text(report.columns, report.records)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_json_safe(v) for v in value]
    return value


def render_json(report: ExperimentReport) -> str:
    payload = {
        "experiment": report.experiment.value,
        "seed": report.seed,
        "config": report.config,
        "columns": list(report.columns),
        "records": report.records,
        "summary": report.summary,
        "counts": report.counts,
    }
    if report.trajectories:
        payload["trajectories"] = report.trajectories
    return json.dumps(_json_safe(payload), indent=2, allow_nan=False) + "\n"


def parse_json_report(text: str) -> ExperimentReport:
    data = json.loads(text)
    return ExperimentReport(
        experiment=ExperimentKind(data["experiment"]),
        seed=data["seed"],
        config=data["config"],
        columns=tuple(data["columns"]),
        records=tuple(tuple(row) for row in data["records"]),
        summary=data["summary"],
        counts=data["counts"],
        trajectories=tuple(tuple(row) for row in data.get("trajectories", ())),
    )


def resolve_output(out: str | None, kind: ExperimentKind, fmt: ReportFormat, output_dir: str) -> Path:
    """Explicit paths are used as given; bare file names and the default land in ``output_dir``."""
    if out is None:
        return Path(output_dir) / f"{kind.value}.{fmt.value}"
    path = Path(out)
    if path.parent == Path("."):
        return Path(output_dir) / path
    return path


def sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(path.name + suffix)


def emit(report: ExperimentReport, fmt: ReportFormat, path: Path) -> list[Path]:
    """Write the report and its sidecars; returns every path written."""
    path.parent.mkdir(parents=True, exist_ok=True)
    text = render_csv(report) if fmt is ReportFormat.CSV else render_json(report)
    path.write_text(text, encoding="utf-8")
    written = [path]
    if report.trajectories:
        trajectories = sidecar(path, ".trajectories.csv")
        trajectories.write_text(_csv_text(TRAJECTORY_COLUMNS, report.trajectories), encoding="utf-8")
        written.append(trajectories)
    if report.telemetry:
        telemetry = sidecar(path, ".telemetry.json")
        telemetry.write_text(json.dumps(_json_safe(report.telemetry), indent=2) + "\n", encoding="utf-8")
        written.append(telemetry)
    LOGGER.info("Wrote %s.", ", ".join(str(p) for p in written))
    return written
