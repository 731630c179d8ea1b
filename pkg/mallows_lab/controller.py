import logging
from dataclasses import dataclass, field
from time import perf_counter

from mallows_lab.models import (
    CSV_PREFIX,
    REPORT_COLUMNS,
    ExperimentConfig,
    ExperimentKind,
    ExperimentReport,
    SamplerKind,
)
from mallows_lab.process.mallows_process import SimulationOptions
from mallows_lab.settings import validate_experiment_config

LOGGER = logging.getLogger("mallows_lab.harness")


@dataclass
class RunOutput:
    records: list[tuple] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    trajectories: list[tuple] = field(default_factory=list)


class ExperimentController:
    """Dispatches a validated ExperimentConfig to the matching experiment and assembles the report."""

    def __init__(self, settings=None, runners=None, clock_fn=None):
        self.settings = settings
        self.clock_fn = clock_fn or perf_counter
        self.options = SimulationOptions(
            envelope_segments=getattr(settings, "envelope_segments", 32),
            envelope_safety=getattr(settings, "envelope_safety", 2.0),
            explosion_cap=getattr(settings, "explosion_cap", 10_000_000),
            singularity_eps=getattr(settings, "rate_singularity_eps", 1e-6),
        )
        self.series_switch = getattr(settings, "series_switch", 1e-4)
        self.extension_cap = getattr(settings, "window_extension_cap", 100_000)
        self.certification_tol = getattr(settings, "certification_tol", 1e-9)
        self.runners = {
            ExperimentKind.SAMPLE: self.run_sample,
            ExperimentKind.GLOBAL_VERIFY: self.run_global_verify,
            ExperimentKind.LOCAL_VERIFY: self.run_local_verify,
            ExperimentKind.COUPLING: self.run_coupling,
            ExperimentKind.ORACLE_SUITE: self.run_oracle_suite,
        }
        if runners:
            self.runners.update(runners)

    def run(self, config: ExperimentConfig) -> ExperimentReport:
        config = validate_experiment_config(config)
        LOGGER.info("Running %s (seed %s, %s replicas).", config.kind.value, config.master_seed, config.replicas)
        started_at = self.clock_fn()
        output = self.runners[config.kind](config)
        elapsed = self.clock_fn() - started_at
        LOGGER.info("Finished %s in %.2fs with %s records.", config.kind.value, elapsed, len(output.records))
        return ExperimentReport(
            experiment=config.kind,
            seed=config.master_seed,
            config=config.to_dict(),
            columns=CSV_PREFIX + REPORT_COLUMNS[config.kind],
            records=tuple(output.records),
            summary=output.summary,
            counts=output.counts,
            trajectories=tuple(output.trajectories),
            telemetry={"wall_clock_seconds": elapsed, "workers": config.workers},
        )

    def run_sample(self, config: ExperimentConfig) -> RunOutput:
        from mallows_lab.sampling import compare_with_oracle, process_code_counts, static_code_counts

        output = RunOutput()
        seed = config.master_seed
        for n in config.n_values:
            for q in config.q_values:
                if config.sampler is SamplerKind.PROCESS:
                    counts = process_code_counts(n, q, config.replicas, seed, config.workers, self.options)
                else:
                    counts = static_code_counts(n, q, config.replicas, seed, config.workers)
                comparison = compare_with_oracle(n, q, counts)
                output.records.append(
                    (
                        config.kind.value,
                        seed,
                        n,
                        q,
                        config.sampler.value,
                        comparison.replicas,
                        comparison.tv_distance,
                        comparison.chi2_pvalue,
                    )
                )
        tv_values = [row[6] for row in output.records]
        output.summary = {"max_tv_distance": max(tv_values, default=None)}
        output.counts = {"draws": sum(row[5] for row in output.records)}
        return output

    def run_global_verify(self, config: ExperimentConfig) -> RunOutput:
        from mallows_lab.global_limit.experiments import concentration_experiment, sup_deviation_experiment

        output = RunOutput()
        seed = config.master_seed
        jumps = 0
        for n in config.n_values:
            report = sup_deviation_experiment(
                n,
                config.T,
                config.alpha,
                config.replicas,
                config.t_grid_size,
                seed,
                workers=config.workers,
                options=self.options,
                trajectory_elements=config.trajectory_elements,
                series_switch=self.series_switch,
            )
            for r in report.records:
                output.records.append(
                    (config.kind.value, seed, n, r.replica, r.max_sup_dev, r.p50, r.p95, r.max_fluid_dev, r.interior)
                )
                output.trajectories.extend(r.trajectory_rows)
                jumps += r.jumps
            summary = report.summary(seed)
            concentration = concentration_experiment(n, config.beta, config.grid_k, config.replicas, seed, workers=config.workers)
            summary["box_discrepancy_fraction_below"] = concentration.fraction_below
            summary["box_discrepancy_max"] = max(concentration.discrepancies, default=None)
            output.summary[str(n)] = summary
        output.counts = {"jumps": jumps}
        return output

    def run_local_verify(self, config: ExperimentConfig) -> RunOutput:
        from mallows_lab.local_limit.experiments import local_verify_experiment

        seed = config.master_seed
        report = local_verify_experiment(
            (config.window_lo, config.window_hi),
            config.T,
            config.replicas,
            seed,
            restriction_m=config.restriction_m,
            workers=config.workers,
            extension_cap=self.extension_cap,
            tol=self.certification_tol,
        )
        output = RunOutput(summary=report.summary())
        for r in report.records:
            output.records.append(
                (
                    config.kind.value,
                    seed,
                    None,
                    r.replica,
                    r.t,
                    r.certified,
                    r.truncated,
                    r.jumps,
                    r.transpositions_ok,
                    r.left_crossers,
                    r.right_crossers,
                    r.restriction,
                )
            )
        output.counts = {
            "jumps": sum(r.jumps for r in report.records),
            "window_extensions": sum(r.extensions for r in report.records),
        }
        return output

    def run_coupling(self, config: ExperimentConfig) -> RunOutput:
        from mallows_lab.local_limit.experiments import coupling_experiment

        seed = config.master_seed
        report = coupling_experiment(
            config.n_values,
            (config.window_lo, config.window_hi),
            config.T,
            config.replicas,
            seed,
            k_n=None if config.k_n_rule == "half" else int(config.k_n_rule),
            workers=config.workers,
            extension_cap=self.extension_cap,
            tol=self.certification_tol,
            singularity_eps=self.options.singularity_eps,
        )
        output = RunOutput(summary=report.summary())
        for r in report.records:
            output.records.append(
                (config.kind.value, seed, r.n, r.replica, r.k_n, r.full_agreement, r.max_ratio, r.accepted, r.proposed)
            )
        output.counts = {
            "accepted": sum(r.accepted for r in report.records),
            "proposed": sum(r.proposed for r in report.records),
        }
        return output

    def run_oracle_suite(self, config: ExperimentConfig) -> RunOutput:
        from mallows_lab.oracles import OracleContext, run_oracle_suite

        seed = config.master_seed
        results = run_oracle_suite(OracleContext(seed=seed, scale=config.scale, workers=config.workers))
        output = RunOutput()
        for r in results:
            output.records.append((config.kind.value, seed, None, r.criterion, r.name, r.statistic, r.threshold, r.passed))
        failed = [r.name for r in results if not r.passed]
        output.summary = {"passed": not failed, "failed": failed}
        output.counts = {"checks": len(results)}
        return output
