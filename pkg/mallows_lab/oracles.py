"""Acceptance checks run by the ``oracle-suite`` experiment.

Every check returns one or more :class:`OracleResult` rows. Replica counts
are the full acceptance sizes multiplied by ``scale``.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass
from functools import partial
from itertools import permutations

import numpy as np
from scipy import integrate, stats

from mallows_lab.global_limit.curves import F_map, y_explicit, z_curve
from mallows_lab.global_limit.experiments import bootstrap_median_ci, concentration_experiment, sup_deviation_experiment
from mallows_lab.global_limit.ode import ode_solve
from mallows_lab.global_limit.permuton import rho_corner_value, rho_density
from mallows_lab.local_limit.coupling import CouplingRatioError
from mallows_lab.local_limit.experiments import coupling_experiment
from mallows_lab.local_limit.window import TranspositionMismatch, ZWindow, jump_log, sigma_slice
from mallows_lab.perm.core import Permutation, decode_inversion_vector, inv_count, left_inversion_vector
from mallows_lab.perm.mallows import chi_square_pvalue, enumerate_mallows
from mallows_lab.process.birth import simulate_limiting_by_timechange
from mallows_lab.process.rates import SINGULARITY_EPS, rate_finite
from mallows_lab.sampling import compare_with_oracle, process_code_counts, static_code_counts
from mallows_lab.services.replicas import map_replicas
from mallows_lab.services.streams import StreamTag, stream

LOGGER = logging.getLogger("mallows_lab.harness")

PVALUE_FLOOR = 1e-3
TV_TOLERANCE = 0.01
CONTINUITY_OFFSET = 2 * SINGULARITY_EPS


@dataclass(frozen=True)
class OracleResult:
    criterion: int
    name: str
    statistic: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class OracleContext:
    seed: int
    scale: float = 1.0
    workers: int = 1

    def replicas(self, full: int, minimum: int = 10) -> int:
        return max(minimum, round(full * self.scale))


def tv_tolerance(masses: np.ndarray, replicas: int) -> float:
    """Acceptance TV bound: the fixed tolerance, or twice the expected TV of an exact sampler if larger."""
    noise = 0.5 * float(np.sum(np.sqrt(2.0 * masses * (1.0 - masses) / (math.pi * replicas))))
    return max(TV_TOLERANCE, 2.0 * noise)


def check_bijection(ctx: OracleContext, n_max: int = 8) -> list[OracleResult]:
    failures = 0
    for n in range(1, n_max + 1):
        for values in permutations(range(1, n + 1)):
            p = Permutation.from_values(values)
            ell = left_inversion_vector(p)
            if decode_inversion_vector(ell) != p or ell.total() != inv_count(p):
                failures += 1
    return [OracleResult(1, f"inversion vector bijection n<={n_max}", failures, 0, failures == 0)]


def _sampler_rows(criterion: int, label: str, counts_fn: Callable, pairs, replicas: int) -> list[OracleResult]:
    rows = []
    for n, q in pairs:
        counts = counts_fn(n, q, replicas)
        comparison = compare_with_oracle(n, q, counts)
        bound = tv_tolerance(enumerate_mallows(n, q).mass_by_inversion_code(), replicas)
        rows.append(
            OracleResult(criterion, f"{label} n={n} q={q}", comparison.tv_distance, bound, comparison.tv_distance < bound)
        )
    return rows


def check_static_sampler(ctx: OracleContext) -> list[OracleResult]:
    replicas = ctx.replicas(1_000_000, 1000)
    counts_fn = partial(_static_counts, ctx)
    return _sampler_rows(2, "static sampler", counts_fn, [(n, q) for n in (4, 5) for q in (0.3, 1.0, 2.0)], replicas)


def _static_counts(ctx: OracleContext, n: int, q: float, replicas: int) -> np.ndarray:
    return static_code_counts(n, q, replicas, ctx.seed, ctx.workers)


def _process_counts(ctx: OracleContext, n: int, q: float, replicas: int) -> np.ndarray:
    return process_code_counts(n, q, replicas, ctx.seed, ctx.workers)


def check_process_marginal(ctx: OracleContext) -> list[OracleResult]:
    replicas = ctx.replicas(1_000_000, 1000)
    counts_fn = partial(_process_counts, ctx)
    return _sampler_rows(3, "process marginal", counts_fn, [(5, q) for q in (0.5, 1.0, 1.5)], replicas)


def check_rate_identities(ctx: OracleContext, i_max: int = 200) -> list[OracleResult]:
    gap = 0.0
    for i in range(2, i_max + 1):
        for j in range(i - 1):
            anchor = 0.5 * (j + 1) * (i - j - 1)
            # closed form on both sides of the interpolation window; the mean cancels the slope
            below = rate_finite(i, j, 1.0 - CONTINUITY_OFFSET)
            above = rate_finite(i, j, 1.0 + CONTINUITY_OFFSET)
            gap = max(gap, abs(0.5 * (below + above) - anchor) / max(1.0, anchor))
    grid = np.linspace(0.0, 5.0, 501)
    two = max(abs(rate_finite(2, 0, float(q)) - 1.0 / (1.0 + q)) for q in grid)
    return [
        OracleResult(4, "p_i(j,q) continuous across q=1", gap, 1e-6, gap <= 1e-6),
        OracleResult(4, "p_2(0,q) = 1/(1+q)", two, 1e-12, two <= 1e-12),
    ]


def check_ode(ctx: OracleContext) -> list[OracleResult]:
    axis = np.linspace(0.05, 0.95, 10)
    x, a = (g.ravel() for g in np.meshgrid(axis, axis))
    solution = ode_solve(x, x * (1 - a), (0.0, 5.0), 1e-3)
    exact = y_explicit(x[None, :], a[None, :], solution.times[:, None])
    error = float(np.abs(solution.values - exact).max())
    return [OracleResult(5, "RK4 vs explicit fluid curve", error, 1e-8, error <= 1e-8)]


def check_analytic_identities(ctx: OracleContext) -> list[OracleResult]:
    axis = np.linspace(0.05, 0.95, 7)
    x, a, t = (g.ravel() for g in np.meshgrid(axis, axis, np.linspace(-3.0, 3.0, 13)))
    f_gap = float(np.abs(F_map(x, t, z_curve(x, a, t)) - y_explicit(x, a, t)).max())
    mirror = float(np.abs(1 - z_curve(x, 1 - a, -t) - z_curve(x, a, t)).max())
    marginal = 0.0
    for beta in (-2.0, 0.5, 3.0):
        for point in (0.1, 0.5, 0.9):
            row = integrate.quad(lambda y, b=beta, p=point: rho_density(b, p, y), 0.0, 1.0)[0]
            column = integrate.quad(lambda u, b=beta, p=point: rho_density(b, u, p), 0.0, 1.0)[0]
            marginal = max(marginal, abs(row - 1), abs(column - 1))
    corner = max(
        abs(float(rho_density(beta, 1.0, 0.0)) - beta * math.expm1(beta) / (math.exp(beta) + math.exp(-beta) - 2))
        for beta in (0.5, 1.0, 2.0, 4.0)
    )
    corner = max(corner, abs(rho_corner_value(1.0) - rho_density(1.0, 1.0, 0.0)))
    return [
        OracleResult(6, "F_x(z_{x,a}(t)) = y(t)", f_gap, 1e-10, f_gap <= 1e-10),
        OracleResult(6, "1 - z_{x,1-a}(-t) = z_{x,a}(t)", mirror, 1e-12, mirror <= 1e-12),
        OracleResult(6, "density marginals equal 1", marginal, 1e-6, marginal <= 1e-6),
        OracleResult(6, "corner density value", corner, 1e-10, corner <= 1e-10),
    ]


def check_global_convergence(ctx: OracleContext, n_values=(100, 200, 400, 800)) -> list[OracleResult]:
    replicas = ctx.replicas(50, 5)
    medians = []
    intervals = []
    for n in n_values:
        report = sup_deviation_experiment(n, 2.0, 0.1, replicas, 512, ctx.seed, workers=ctx.workers)
        maxima = [r.max_sup_dev for r in report.records]
        medians.append(float(np.median(maxima)))
        intervals.append(bootstrap_median_ci(maxima, ctx.seed))
    decreasing = all(a > b for a, b in zip(medians, medians[1:]))
    separated = intervals[0][0] > intervals[-1][1]
    passed = decreasing and separated and medians[-1] < 0.05
    LOGGER.info("Global convergence medians: %s", dict(zip(n_values, medians)))
    return [OracleResult(7, f"median max sup deviation at n={n_values[-1]}", medians[-1], 0.05, passed)]


def _ell_marginal(seed: int, t: float, replica: int) -> int:
    return simulate_limiting_by_timechange(t, stream(seed, StreamTag.MARGINAL, replica)).final_state


def _restriction_code(seed: int, t: float, m: int, replica: int) -> str:
    w = ZWindow(seed, replica, t, 0, m - 1)
    return sigma_slice(w, t, (0, m - 1)).relabel(0, m - 1).code()


def check_local_marginals(ctx: OracleContext) -> list[OracleResult]:
    rows = []
    for t in (0.3, 0.6, 0.9):
        sample = np.array(map_replicas(partial(_ell_marginal, ctx.seed, t), range(ctx.replicas(10_000, 500)), ctx.workers))
        pvalue = float(stats.kstest(sample + 1, stats.geom(1.0 - t).cdf).pvalue)
        rows.append(OracleResult(8, f"ell_i(t) geometric t={t}", pvalue, PVALUE_FLOOR, pvalue > PVALUE_FLOOR))
    t, m = 0.5, 4
    codes = map_replicas(partial(_restriction_code, ctx.seed, t, m), range(ctx.replicas(100_000, 1000)), ctx.workers)
    dist = enumerate_mallows(m, t)
    tally = Counter(codes)
    pvalue = chi_square_pvalue(np.asarray(dist.mass), np.array([tally.get(p.code(), 0) for p in dist.support]))
    rows.append(OracleResult(8, "restriction of Sigma_t is Mallows(4, t)", pvalue, PVALUE_FLOOR, pvalue > PVALUE_FLOOR))
    return rows


def _transposition_failures(seed: int, replica: int) -> int:
    try:
        log = jump_log(ZWindow(seed, replica, 0.8, -5, 5), (-5, 5))
    except TranspositionMismatch as exc:
        LOGGER.error("Replica %s: %s", replica, exc)
        return 1
    return 0 if log.certified else 1


def check_transpositions(ctx: OracleContext) -> list[OracleResult]:
    failures = sum(map_replicas(partial(_transposition_failures, ctx.seed), range(ctx.replicas(1000, 20)), ctx.workers))
    return [OracleResult(9, "every jump of Sigma is a transposition", failures, 0, failures == 0)]


def check_coupling(ctx: OracleContext, n_values=(50, 200, 800, 3200)) -> list[OracleResult]:
    try:
        report = coupling_experiment(n_values, (-5, 5), 0.8, ctx.replicas(1000, 20), ctx.seed, workers=ctx.workers)
    except CouplingRatioError as exc:
        LOGGER.error("Coupling ratio check failed: %s", exc)
        return [OracleResult(10, "coupling acceptance ratios in [0, 1]", math.inf, 1.0, False)]
    agreement = report.agreement_by_n()
    frequencies = list(agreement.values())
    final = frequencies[-1]
    monotone = all(a <= b for a, b in zip(frequencies, frequencies[1:]))
    return [
        OracleResult(10, "coupling acceptance ratios in [0, 1]", report.summary()["max_ratio"], 1.0, True),
        OracleResult(10, f"window agreement at n={n_values[-1]}", final, 0.99, monotone and final >= 0.99),
    ]


def check_concentration(ctx: OracleContext) -> list[OracleResult]:
    report = concentration_experiment(500, 0.0, 50, ctx.replicas(1000, 20), ctx.seed, workers=ctx.workers)
    fraction = report.fraction_below
    return [OracleResult(11, "box discrepancy < 0.05 at n=500", fraction, 0.99, fraction >= 0.99)]


def check_determinism(ctx: OracleContext) -> list[OracleResult]:
    from mallows_lab.controller import ExperimentController
    from mallows_lab.models import ExperimentConfig, ExperimentKind
    from mallows_lab.services.report_writer import render_csv

    texts = []
    for workers in (1, 2):
        config = ExperimentConfig(
            kind=ExperimentKind.SAMPLE, n=5, q=0.7, replicas=ctx.replicas(200_000, 1000), master_seed=ctx.seed, workers=workers
        )
        texts.append(render_csv(ExperimentController().run(config)))
    identical = texts[0] == texts[1]
    return [OracleResult(12, "same seed gives byte-identical reports", float(identical), 1.0, identical)]


CHECKS: tuple[Callable[[OracleContext], list[OracleResult]], ...] = (
    check_bijection,
    check_static_sampler,
    check_process_marginal,
    check_rate_identities,
    check_ode,
    check_analytic_identities,
    check_global_convergence,
    check_local_marginals,
    check_transpositions,
    check_coupling,
    check_concentration,
    check_determinism,
)


def run_oracle_suite(ctx: OracleContext, checks=CHECKS) -> list[OracleResult]:
    results: list[OracleResult] = []
    for check in checks:
        LOGGER.info("Running %s.", check.__name__)
        rows = check(ctx)
        for row in rows:
            if not row.passed:
                LOGGER.warning("Criterion %s failed: %s (statistic %s, threshold %s).", row.criterion, row.name, row.statistic, row.threshold)
        results.extend(rows)
    return results
