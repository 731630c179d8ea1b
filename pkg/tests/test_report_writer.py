import json
from pathlib import Path

from mallows_lab.models import CSV_PREFIX, REPORT_COLUMNS, ExperimentKind, ExperimentReport, ReportFormat
from mallows_lab.services.report_writer import emit, parse_json_report, render_csv, render_json, resolve_output

GOLDEN_DIR = Path(__file__).parent / "golden"


def _sample_report(**extra):
    return ExperimentReport(
        experiment=ExperimentKind.SAMPLE,
        seed=7,
        config={"kind": "sample", "n": 3, "q": 0.5},
        columns=CSV_PREFIX + REPORT_COLUMNS[ExperimentKind.SAMPLE],
        records=(
            ("sample", 7, 3, 0.5, "static", 1000, 0.0125, 0.73),
            ("sample", 7, 4, 0.5, "process", 1000, float("nan"), None),
        ),
        summary={"max_tv_distance": 0.0125},
        counts={"draws": 2000},
        **extra,
    )


def _oracle_report():
    return ExperimentReport(
        experiment=ExperimentKind.ORACLE_SUITE,
        seed=7,
        config={"kind": "oracle-suite"},
        columns=CSV_PREFIX + REPORT_COLUMNS[ExperimentKind.ORACLE_SUITE],
        records=(
            ("oracle-suite", 7, None, 1, "bijection, n <= 8", 1.0, 1.0, True),
            ("oracle-suite", 7, None, 11, "box discrepancy < 0.05 at n=500", 0.97, 0.99, False),
        ),
    )


def test_sample_csv_matches_golden():
    expected = (GOLDEN_DIR / "sample_report.csv").read_text(encoding="utf-8")
    assert render_csv(_sample_report()) == expected


def test_oracle_csv_matches_golden():
    expected = (GOLDEN_DIR / "oracle_report.csv").read_text(encoding="utf-8")
    assert render_csv(_oracle_report()) == expected
    assert not _oracle_report().passed


def test_empty_report_is_header_only():
    report = ExperimentReport(
        experiment=ExperimentKind.COUPLING,
        seed=1,
        config={},
        columns=CSV_PREFIX + REPORT_COLUMNS[ExperimentKind.COUPLING],
        records=(),
    )
    assert render_csv(report) == "experiment,seed,n,replica,k_n,agreement,max_ratio,accepted,proposed\n"
    assert report.passed


def test_json_replaces_non_finite_values_and_parses_back():
    report = _oracle_report()
    assert parse_json_report(render_json(report)) == report
    payload = json.loads(render_json(_sample_report()))
    assert payload["records"][1][6] is None
    assert "trajectories" not in payload


def test_telemetry_is_not_part_of_report_identity():
    assert _sample_report(telemetry={"wall_clock_seconds": 1.0}) == _sample_report(telemetry={"wall_clock_seconds": 9.0})


def test_emit_writes_sidecars(tmp_path):
    report = _sample_report(trajectories=((0, 5, -1.0, 0.2), (0, 5, 1.0, 0.4)), telemetry={"wall_clock_seconds": 2.5})
    path = tmp_path / "out" / "sample.csv"
    written = emit(report, ReportFormat.CSV, path)
    assert written == [path, tmp_path / "out" / "sample.csv.trajectories.csv", tmp_path / "out" / "sample.csv.telemetry.json"]
    assert written[1].read_text(encoding="utf-8").splitlines() == ["replica,i,t,position", "0,5,-1.0,0.2", "0,5,1.0,0.4"]
    assert json.loads(written[2].read_text(encoding="utf-8")) == {"wall_clock_seconds": 2.5}
    assert "wall_clock" not in path.read_text(encoding="utf-8")


def test_resolve_output_places_bare_names_in_output_dir(tmp_path):
    assert resolve_output(None, ExperimentKind.COUPLING, ReportFormat.JSON, "results") == Path("results/coupling.json")
    assert resolve_output("run.csv", ExperimentKind.SAMPLE, ReportFormat.CSV, "results") == Path("results/run.csv")
    explicit = tmp_path / "x.csv"
    assert resolve_output(str(explicit), ExperimentKind.SAMPLE, ReportFormat.CSV, "results") == explicit
