"""Mallows process lab entrypoint."""

import argparse
import logging
import os
import sys
from logging.handlers import TimedRotatingFileHandler

from mallows_lab.controller import ExperimentController
from mallows_lab.models import ExperimentConfig, ExperimentKind, ReportFormat, SamplerKind
from mallows_lab.services.report_writer import emit, resolve_output
from mallows_lab.settings import load_experiment_config, load_settings

LOGGER = logging.getLogger("mallows_lab")


def configure_logging(level_name: str, verbose_events: bool, log_dir: str = "logs") -> None:
    level_name = str(level_name).upper()
    level = getattr(logging, level_name, logging.INFO)
    if not verbose_events and level < logging.WARNING:
        level = logging.WARNING

    formatter = logging.Formatter(
        "%(asctime)s %(levelname)s [%(name)s] %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    # Daily rolling logs: keep 7 days in <log_dir>/mallows_lab.log.
    log_file = os.path.join(log_dir, "mallows_lab.log")
    try:
        os.makedirs(log_dir, exist_ok=True)
        file_handler = TimedRotatingFileHandler(
            filename=log_file,
            when="midnight",
            interval=1,
            backupCount=7,
            encoding="utf-8",
        )
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)
    except OSError as exc:
        root_logger.warning("File logging disabled; cannot initialize '%s': %s", log_file, exc)


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _k_n_rule(text: str):
    return text if text == "half" else int(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it.")
    common.add_argument("--seed", dest="master_seed", type=int, help="64-bit master seed.")
    common.add_argument("--out", help="Report path; bare file names go to OUTPUT_DIR.")
    common.add_argument("--format", choices=[f.value for f in ReportFormat])
    common.add_argument("--replicas", type=int)
    common.add_argument("--workers", type=int)

    parser = argparse.ArgumentParser(description="Mallows birth-process experiments")
    commands = parser.add_subparsers(dest="kind", required=True)

    sample = commands.add_parser(ExperimentKind.SAMPLE.value, parents=[common], help="Sampler vs exact Mallows law.")
    sample.add_argument("--n", type=int)
    sample.add_argument("--n-values", dest="n_values", type=_int_list, help="Comma-separated sweep of n.")
    sample.add_argument("--q", type=float)
    sample.add_argument("--q-values", dest="q_values", type=_float_list, help="Comma-separated sweep of q.")
    sample.add_argument("--sampler", choices=[s.value for s in SamplerKind])

    global_verify = commands.add_parser(
        ExperimentKind.GLOBAL_VERIFY.value, parents=[common], help="Scaled trajectories vs the deterministic limit."
    )
    global_verify.add_argument("--n", type=int)
    global_verify.add_argument("--n-values", dest="n_values", type=_int_list)
    global_verify.add_argument("--T", dest="T", type=float)
    global_verify.add_argument("--alpha", type=float)
    global_verify.add_argument("--t-grid-size", dest="t_grid_size", type=int)
    global_verify.add_argument("--grid-k", dest="grid_k", type=int)
    global_verify.add_argument("--beta", type=float)
    global_verify.add_argument(
        "--trajectory-elements", dest="trajectory_elements", type=_int_list, help="Elements dumped to the trajectory sidecar."
    )

    local_verify = commands.add_parser(
        ExperimentKind.LOCAL_VERIFY.value, parents=[common], help="Limiting process on a window of the integers."
    )
    local_verify.add_argument("--T", dest="T", type=float)
    local_verify.add_argument("--window-lo", dest="window_lo", type=int)
    local_verify.add_argument("--window-hi", dest="window_hi", type=int)
    local_verify.add_argument("--restriction-m", dest="restriction_m", type=int)

    coupling = commands.add_parser(
        ExperimentKind.COUPLING.value, parents=[common], help="Finite vs limiting process agreement on a window."
    )
    coupling.add_argument("--n", type=int)
    coupling.add_argument("--n-values", dest="n_values", type=_int_list)
    coupling.add_argument("--T", dest="T", type=float)
    coupling.add_argument("--window-lo", dest="window_lo", type=int)
    coupling.add_argument("--window-hi", dest="window_hi", type=int)
    coupling.add_argument("--k-n", dest="k_n_rule", type=_k_n_rule, help="'half' for n//2, or an integer shift.")

    oracle = commands.add_parser(ExperimentKind.ORACLE_SUITE.value, parents=[common], help="Acceptance criteria.")
    oracle.add_argument("--scale", type=float, help="Replica-count factor in (0, 1].")
    return parser


def main(argv=None) -> None:
    try:
        settings = load_settings()
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        sys.exit(2)

    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k != "config"}
    defaults = {"master_seed": settings.default_seed, "workers": settings.workers}

    configure_logging(settings.log_level, settings.log_verbose_events, settings.log_dir)
    try:
        config = load_experiment_config(args.config, overrides, defaults)
    except ValueError as exc:
        LOGGER.error("%s", exc)
        print(str(exc), file=sys.stderr)
        sys.exit(2)

    try:
        report = ExperimentController(settings).run(config)
    except ValueError as exc:
        LOGGER.error("Experiment rejected: %s", exc)
        sys.exit(2)
    except RuntimeError as exc:
        LOGGER.error("Experiment failed: %s", exc)
        sys.exit(3)

    path = resolve_output(config.out, config.kind, config.format, settings.output_dir)
    emit(report, config.format, path)
    if not report.passed:
        LOGGER.error("Oracle suite failed: %s", ", ".join(report.summary.get("failed", [])))
        sys.exit(3)


if __name__ == "__main__":
    main()
