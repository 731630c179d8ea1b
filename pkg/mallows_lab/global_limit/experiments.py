"""Monte Carlo experiments comparing simulated Mallows processes with their global limit."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy import stats
from scipy.spatial.distance import cdist

from mallows_lab.global_limit.curves import SERIES_SWITCH, y_explicit, z_curve
from mallows_lab.global_limit.permuton import box_discrepancy
from mallows_lab.perm.mallows import sample_mallows
from mallows_lab.process.mallows_process import (
    MallowsProcessPath,
    ReplayLog,
    SimulationOptions,
    simulate_process,
    trajectory,
)
from mallows_lab.services.replicas import map_replicas
from mallows_lab.services.streams import StreamTag, stream

LOGGER = logging.getLogger("mallows_lab.global")

BOOTSTRAP_RESAMPLES = 2000
MAX_ENERGY_POINTS = 2000
REVERSAL_MAX_N = 6


def interior_elements(n: int, alpha: float) -> list[int]:
    return [i for i in range(1, n + 1) if alpha * n < i < (1 - alpha) * n]


def bootstrap_median_ci(values, seed: int, level: float = 0.95) -> tuple[float, float]:
    """Percentile bootstrap interval for the median."""
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        raise ValueError("Cannot bootstrap an empty sample.")
    rng = stream(seed, len(data))
    medians = np.median(rng.choice(data, size=(BOOTSTRAP_RESAMPLES, data.size), replace=True), axis=1)
    tail = (1 - level) / 2
    return float(np.quantile(medians, tail)), float(np.quantile(medians, 1 - tail))


@dataclass(frozen=True)
class ReplicaDeviation:
    replica: int
    max_sup_dev: float | None
    p50: float | None
    p95: float | None
    max_fluid_dev: float | None
    interior: int
    element_deviations: tuple[float, ...] = ()
    boundary_max_sup_dev: float | None = None
    trajectory_rows: tuple[tuple[int, int, float, float], ...] = ()
    jumps: int = 0


@dataclass(frozen=True)
class DeviationReport:
    n: int
    T: float
    alpha: float
    replicas: int
    records: tuple[ReplicaDeviation, ...]
    note: str = ""

    def __post_init__(self):
        for record in self.records:
            if any(d < 0 for d in record.element_deviations):
                raise ValueError("Deviations must be nonnegative.")

    def summary(self, seed: int = 0) -> dict:
        maxima = [r.max_sup_dev for r in self.records if r.max_sup_dev is not None]
        if not maxima:
            return {"note": self.note or "no interior elements"}
        low, high = bootstrap_median_ci(maxima, seed)
        fluid = [r.max_fluid_dev for r in self.records if r.max_fluid_dev is not None]
        summary = {
            "median_max_sup_dev": float(np.median(maxima)),
            "median_ci_low": low,
            "median_ci_high": high,
            "p95_max_sup_dev": float(np.quantile(maxima, 0.95)),
            "median_max_fluid_dev": float(np.median(fluid)),
        }
        boundary = [r.boundary_max_sup_dev for r in self.records if r.boundary_max_sup_dev is not None]
        if boundary:
            summary["median_boundary_max_sup_dev"] = float(np.median(boundary))
        return summary


@dataclass(frozen=True)
class DeviationParams:
    n: int
    T: float
    alpha: float
    t_grid_size: int
    seed: int
    options: SimulationOptions = field(default_factory=SimulationOptions)
    trajectory_elements: tuple[int, ...] = ()
    include_boundary: bool = False
    series_switch: float = SERIES_SWITCH


def windowed_process(n: int, T: float, rng: np.random.Generator, options: SimulationOptions) -> MallowsProcessPath:
    """Process on the rescaled window t in [-T, T], i.e. q in [e^(-T/n), e^(T/n)]."""
    return simulate_process(n, math.exp(T / n), rng, q_start=math.exp(-T / n), options=options)


def element_sup_deviation(
    log: ReplayLog, n: int, i: int, t_grid: np.ndarray, q_grid: np.ndarray, series_switch: float = SERIES_SWITCH
) -> float:
    """sup over grid points and jump times of |X_i(t) - z_{i/n, X_i(0)}(t)|."""
    x = i / n
    start = log.value_at(i, 1.0) / n
    deviation = float(np.abs(log.values_at(i, q_grid) / n - z_curve(x, start, t_grid, series_switch)).max())
    change_q = log.change_times[i - 1]
    if change_q.size:
        t_change = n * np.log(change_q)
        after = log.change_values[i - 1] / n
        before = np.concatenate(([log.initial[i - 1]], log.change_values[i - 1][:-1])) / n
        limit = z_curve(x, start, t_change, series_switch)
        deviation = max(deviation, float(np.abs(after - limit).max()), float(np.abs(before - limit).max()))
    return deviation


def fluid_deviation(pp: MallowsProcessPath, i: int, t_grid, series_switch: float = SERIES_SWITCH) -> float:
    """sup_t |ell_i(e^(t/n))/n - y(t)| with y the fluid-limit curve through ell_i(1)/n."""
    n = pp.n
    x = i / n
    path = pp.paths[i - 1]
    start = path.state_at(1.0) / n
    a = 1.0 - start / x
    t_grid = np.asarray(t_grid, dtype=float)
    q_grid = np.clip(np.exp(t_grid / n), pp.q_start, pp.q_horizon)
    jump_q = np.asarray(path.jump_times, dtype=float)
    states = (path.initial_state + np.searchsorted(jump_q, q_grid, side="right")) / n
    deviation = float(np.abs(states - y_explicit(x, a, t_grid, series_switch)).max())
    if jump_q.size:
        t_jump = n * np.log(jump_q)
        after = (path.initial_state + np.arange(1, jump_q.size + 1)) / n
        limit = y_explicit(x, a, t_jump, series_switch)
        deviation = max(deviation, float(np.abs(after - limit).max()), float(np.abs(after - 1 / n - limit).max()))
    return deviation


def deviation_replica(params: DeviationParams, replica: int) -> ReplicaDeviation:
    n, T = params.n, params.T
    pp = windowed_process(n, T, stream(params.seed, StreamTag.PROCESS, replica), params.options)
    log = pp.replay
    t_grid = np.linspace(-T, T, params.t_grid_size)
    q_grid = np.clip(np.exp(t_grid / n), pp.q_start, pp.q_horizon)
    interior = interior_elements(n, params.alpha)
    deviations = tuple(element_sup_deviation(log, n, i, t_grid, q_grid, params.series_switch) for i in interior)
    boundary_max = None
    if params.include_boundary:
        inside = set(interior)
        boundary = [
            element_sup_deviation(log, n, i, t_grid, q_grid, params.series_switch)
            for i in range(1, n + 1)
            if i not in inside
        ]
        boundary_max = max(boundary) if boundary else None
    rows: list[tuple[int, int, float, float]] = []
    for i in params.trajectory_elements:
        path = trajectory(pp, i, t_grid)
        rows.extend((replica, i, t, position) for t, position in zip(path.times, path.positions, strict=True))
    if not deviations:
        return ReplicaDeviation(replica, None, None, None, None, 0, (), boundary_max, tuple(rows), log.events)
    fluid = max(fluid_deviation(pp, i, t_grid, params.series_switch) for i in interior)
    LOGGER.debug("Replica %s: max sup deviation %.4f over %s elements.", replica, max(deviations), len(deviations))
    return ReplicaDeviation(
        replica=replica,
        max_sup_dev=max(deviations),
        p50=float(np.quantile(deviations, 0.5)),
        p95=float(np.quantile(deviations, 0.95)),
        max_fluid_dev=fluid,
        interior=len(deviations),
        element_deviations=deviations,
        boundary_max_sup_dev=boundary_max,
        trajectory_rows=tuple(rows),
        jumps=log.events,
    )


def sup_deviation_experiment(
    n: int,
    T: float,
    alpha: float,
    replicas: int,
    t_grid_size: int,
    seed: int,
    *,
    workers: int = 1,
    options: SimulationOptions | None = None,
    trajectory_elements: tuple[int, ...] = (),
    include_boundary: bool = False,
    series_switch: float = SERIES_SWITCH,
) -> DeviationReport:
    if not T > 0:
        raise ValueError(f"T must be > 0, got {T}.")
    if not 0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}.")
    if t_grid_size < 1:
        raise ValueError(f"t_grid_size must be >= 1, got {t_grid_size}.")
    bad = [i for i in trajectory_elements if not 1 <= i <= n]
    if bad:
        raise ValueError(f"trajectory_elements outside 1..{n}: {bad}")
    params = DeviationParams(
        n=n,
        T=T,
        alpha=alpha,
        t_grid_size=t_grid_size,
        seed=seed,
        options=options or SimulationOptions(),
        trajectory_elements=tuple(trajectory_elements),
        include_boundary=include_boundary,
        series_switch=series_switch,
    )
    note = "" if interior_elements(n, alpha) else "no interior elements"
    LOGGER.info("Sup-deviation experiment: n=%s T=%s alpha=%s replicas=%s.", n, T, alpha, replicas)
    records = map_replicas(partial(deviation_replica, params), range(replicas), workers)
    return DeviationReport(n=n, T=T, alpha=alpha, replicas=replicas, records=tuple(records), note=note)


@dataclass(frozen=True)
class ParticleComparison:
    n: int
    T: float
    t_grid: tuple[float, ...]
    replicas: int
    energy_statistic: float | None = None
    energy_pvalue: float | None = None
    ks_statistics: tuple[float, ...] = ()
    ks_pvalues: tuple[float, ...] = ()


def energy_test(sample_a: np.ndarray, sample_b: np.ndarray, permutations: int, rng: np.random.Generator):
    """Two-sample energy distance and its permutation p-value."""
    pooled = np.vstack([sample_a, sample_b])
    distances = cdist(pooled, pooled)
    m = len(sample_a)

    def statistic(order: np.ndarray) -> float:
        d = distances[np.ix_(order, order)]
        return 2 * d[:m, m:].mean() - d[:m, :m].mean() - d[m:, m:].mean()

    observed = statistic(np.arange(len(pooled)))
    exceed = sum(statistic(rng.permutation(len(pooled))) >= observed for _ in range(permutations))
    return float(observed), (exceed + 1) / (permutations + 1)


def particle_replica(n: int, T: float, t_grid: tuple[float, ...], seed: int, options: SimulationOptions, replica: int):
    rng = stream(seed, StreamTag.PARTICLE, replica)
    pp = windowed_process(n, T, rng, options)
    i = int(rng.integers(1, n + 1))
    observed = trajectory(pp, i, t_grid).positions
    x, a = stream(seed, StreamTag.PARTICLE, replica, 1).random(2)
    limit = np.atleast_1d(z_curve(x, a, np.asarray(t_grid)))
    return observed, tuple(float(v) for v in limit)


def random_particle_experiment(
    n: int,
    T: float,
    replicas: int,
    seed: int,
    *,
    grid_size: int = 5,
    workers: int = 1,
    options: SimulationOptions | None = None,
    permutations: int = 99,
) -> ParticleComparison:
    """Compare (Y(t_1..t_m)) of a uniformly chosen particle with (z_{X,A}(t_k)) for X, A uniform."""
    t_grid = tuple(float(t) for t in np.linspace(-T, T, grid_size)) if grid_size > 1 else (0.0,) * grid_size
    if not t_grid or replicas < 2:
        return ParticleComparison(n=n, T=T, t_grid=t_grid, replicas=replicas)
    pairs = map_replicas(
        partial(particle_replica, n, T, t_grid, seed, options or SimulationOptions()), range(replicas), workers
    )
    observed = np.array([p[0] for p in pairs])
    limit = np.array([p[1] for p in pairs])
    ks = [stats.ks_2samp(observed[:, k], limit[:, k]) for k in range(len(t_grid))]
    energy, pvalue = energy_test(
        observed[:MAX_ENERGY_POINTS], limit[:MAX_ENERGY_POINTS], permutations, stream(seed, StreamTag.PARTICLE, -1)
    )
    return ParticleComparison(
        n=n,
        T=T,
        t_grid=t_grid,
        replicas=replicas,
        energy_statistic=energy,
        energy_pvalue=pvalue,
        ks_statistics=tuple(float(r.statistic) for r in ks),
        ks_pvalues=tuple(float(r.pvalue) for r in ks),
    )


@dataclass(frozen=True)
class ReversalComparison:
    n: int
    q: float
    replicas: int
    statistic: float
    pvalue: float


def reversal_pair(n: int, q: float, seed: int, replica: int) -> tuple[str, str]:
    forward = simulate_process(n, q, stream(seed, StreamTag.REVERSAL, replica, 0)).permutation_at(q)
    mirrored = simulate_process(n, 1 / q, stream(seed, StreamTag.REVERSAL, replica, 1)).permutation_at(1 / q)
    return forward.code(), mirrored.reversed_values().code()


def reversal_symmetry_experiment(n: int, q: float, replicas: int, seed: int, *, workers: int = 1) -> ReversalComparison:
    """Two-sample test of sigma_q against rev_n o sigma_{1/q}."""
    if not 1 <= n <= REVERSAL_MAX_N:
        raise ValueError(f"Reversal test supports 1 <= n <= {REVERSAL_MAX_N}, got {n}.")
    if not q > 0:
        raise ValueError(f"Reversal test needs q > 0, got {q}.")
    pairs = map_replicas(partial(reversal_pair, n, q, seed), range(replicas), workers)
    forward = Counter(p[0] for p in pairs)
    mirrored = Counter(p[1] for p in pairs)
    cells = sorted(set(forward) | set(mirrored))
    if len(cells) < 2:
        return ReversalComparison(n, q, replicas, 0.0, 1.0)
    table = np.array([[forward.get(c, 0) for c in cells], [mirrored.get(c, 0) for c in cells]])
    result = stats.chi2_contingency(table)
    return ReversalComparison(n, q, replicas, float(result.statistic), float(result.pvalue))


@dataclass(frozen=True)
class ConcentrationReport:
    n: int
    beta: float
    grid_k: int
    threshold: float
    discrepancies: tuple[float, ...]

    @property
    def fraction_below(self) -> float:
        if not self.discrepancies:
            return 0.0
        return sum(d < self.threshold for d in self.discrepancies) / len(self.discrepancies)


def concentration_replica(n: int, beta: float, grid_k: int, seed: int, replica: int) -> float:
    p = sample_mallows(n, math.exp(beta / n), stream(seed, StreamTag.CONCENTRATION, replica))
    return box_discrepancy(p, beta, grid_k)


def concentration_experiment(
    n: int, beta: float, grid_k: int, replicas: int, seed: int, *, threshold: float = 0.05, workers: int = 1
) -> ConcentrationReport:
    """Box discrepancy of Mallows(n, e^(beta/n)) samples against the permuton mu_beta."""
    values = map_replicas(partial(concentration_replica, n, beta, grid_k, seed), range(replicas), workers)
    return ConcentrationReport(n, beta, grid_k, threshold, tuple(values))
