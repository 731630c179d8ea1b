import pytest

from mallows_lab.controller import ExperimentController, RunOutput
from mallows_lab.models import ExperimentConfig, ExperimentKind
from mallows_lab.services.report_writer import render_csv
from mallows_lab.settings import AppSettings


class FakeClock:
    def __init__(self, *ticks):
        self.ticks = list(ticks)

    def __call__(self):
        return self.ticks.pop(0)


class FakeRunner:
    def __init__(self, output):
        self.output = output
        self.configs = []

    def __call__(self, config):
        self.configs.append(config)
        return self.output


def _settings(**overrides):
    base = AppSettings(log_level="INFO", log_verbose_events=True, default_seed=1, envelope_segments=8)
    return AppSettings(**{**base.__dict__, **overrides})


def test_run_dispatches_resolved_config_and_records_telemetry():
    runner = FakeRunner(RunOutput(records=[("coupling", 3, 100, 0, 50, True, 0.9, 4, 5)], counts={"accepted": 4}))
    controller = ExperimentController(runners={ExperimentKind.COUPLING: runner}, clock_fn=FakeClock(10.0, 12.5))
    report = controller.run(ExperimentConfig(kind=ExperimentKind.COUPLING, n=100, master_seed=3))
    assert runner.configs[0].T == 0.8
    assert runner.configs[0].n_values == (100,)
    assert report.telemetry == {"wall_clock_seconds": 2.5, "workers": 1}
    assert report.columns[:3] == ("experiment", "seed", "n")
    assert report.counts == {"accepted": 4}
    assert report.config["kind"] == "coupling"


def test_run_rejects_invalid_config_before_dispatch():
    runner = FakeRunner(RunOutput())
    controller = ExperimentController(runners={ExperimentKind.LOCAL_VERIFY: runner})
    with pytest.raises(ValueError, match="T must be < 1"):
        controller.run(ExperimentConfig(kind=ExperimentKind.LOCAL_VERIFY, T=1.5))
    assert runner.configs == []


def test_settings_flow_into_simulation_options():
    controller = ExperimentController(_settings(envelope_segments=8, explosion_cap=500, series_switch=1e-3))
    assert controller.options.envelope_segments == 8
    assert controller.options.explosion_cap == 500
    assert controller.series_switch == 1e-3


def test_sample_run_is_independent_of_workers():
    reports = [
        ExperimentController().run(
            ExperimentConfig(kind=ExperimentKind.SAMPLE, n=3, q_values=(0.5, 2.0), replicas=3000, master_seed=5, workers=w)
        )
        for w in (1, 2)
    ]
    assert render_csv(reports[0]) == render_csv(reports[1])
    assert [row[3] for row in reports[0].records] == [0.5, 2.0]
    assert reports[0].counts == {"draws": 6000}


def test_process_sampler_run_reports_tv_and_pvalue():
    config = ExperimentConfig(kind=ExperimentKind.SAMPLE, n=3, q=0.8, sampler="process", replicas=200, master_seed=6)
    report = ExperimentController(_settings()).run(config)
    (row,) = report.records
    assert row[4] == "process"
    assert 0 <= row[6] <= 1
    assert 0 <= row[7] <= 1


def test_local_verify_rows_have_no_n():
    config = ExperimentConfig(kind=ExperimentKind.LOCAL_VERIFY, T=0.5, replicas=2, window_lo=-2, window_hi=2)
    report = ExperimentController().run(config)
    assert len(report.records) == 2
    assert all(row[2] is None for row in report.records)
    assert report.summary["certified_fraction"] == 1.0


def test_global_verify_writes_trajectories_and_concentration():
    config = ExperimentConfig(
        kind=ExperimentKind.GLOBAL_VERIFY, n=40, T=0.5, replicas=2, t_grid_size=8, grid_k=5, trajectory_elements=(20,)
    )
    report = ExperimentController().run(config)
    assert len(report.records) == 2
    assert len(report.trajectories) == 16
    summary = report.summary["40"]
    assert 0 <= summary["box_discrepancy_fraction_below"] <= 1
    assert report.counts["jumps"] > 0


def test_coupling_rows_follow_columns():
    config = ExperimentConfig(kind=ExperimentKind.COUPLING, n_values=(30, 300), replicas=2, window_lo=-1, window_hi=1)
    report = ExperimentController().run(config)
    assert len(report.records) == 4
    assert all(len(row) == len(report.columns) for row in report.records)
    assert set(report.summary["agreement_by_n"]) == {"30", "300"}


def test_oracle_suite_report_fails_when_a_check_fails(monkeypatch):
    import mallows_lab.oracles as oracles

    def fake_suite(ctx):
        assert ctx.scale == 0.1
        return [
            oracles.OracleResult(1, "bijection", 0.0, 0.0, True),
            oracles.OracleResult(11, "concentration", 0.9, 0.99, False),
        ]

    monkeypatch.setattr(oracles, "run_oracle_suite", fake_suite)
    report = ExperimentController().run(ExperimentConfig(kind=ExperimentKind.ORACLE_SUITE, scale=0.1, master_seed=8))
    assert not report.passed
    assert report.summary == {"passed": False, "failed": ["concentration"]}
    assert report.records[1] == ("oracle-suite", 8, None, 11, "concentration", 0.9, 0.99, False)
