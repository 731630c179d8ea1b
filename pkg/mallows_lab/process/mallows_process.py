"""The birth Mallows process: n independent inversion birth paths read as a permutation path."""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from mallows_lab.perm.core import InversionVector, Permutation, decode_inversion_vector
from mallows_lab.perm.mallows import sample_inversion_vector
from mallows_lab.process.birth import DEFAULT_EXPLOSION_CAP, JumpPath, finite_envelope, simulate_birth
from mallows_lab.process.rates import SINGULARITY_EPS, RateSpec

LOGGER = logging.getLogger("mallows_lab.process")

HORIZON_SLACK = 1e-12


@dataclass(frozen=True)
class SimulationOptions:
    envelope_segments: int = 32
    envelope_safety: float = 2.0
    explosion_cap: int = DEFAULT_EXPLOSION_CAP
    singularity_eps: float = SINGULARITY_EPS


@dataclass(frozen=True)
class Trajectory:
    i: int
    times: tuple[float, ...]
    positions: tuple[float, ...]


@dataclass(frozen=True)
class IncrementCheck:
    ok: bool
    violation: str | None = None


@dataclass(frozen=True)
class ReplayLog:
    """Per-position value changes produced by replaying every jump as a swap.

    ``change_times[p]`` / ``change_values[p]`` list the q-times at which
    position ``p + 1`` changed value and the value it took.
    """

    initial: np.ndarray
    change_times: tuple[np.ndarray, ...]
    change_values: tuple[np.ndarray, ...]
    events: int

    def value_at(self, position: int, q: float) -> int:
        idx = int(np.searchsorted(self.change_times[position - 1], q, side="right"))
        if idx == 0:
            return int(self.initial[position - 1])
        return int(self.change_values[position - 1][idx - 1])

    def values_at(self, position: int, qs: np.ndarray) -> np.ndarray:
        times = self.change_times[position - 1]
        values = np.concatenate(([self.initial[position - 1]], self.change_values[position - 1]))
        return values[np.searchsorted(times, qs, side="right")]


@dataclass(frozen=True)
class MallowsProcessPath:
    n: int
    paths: tuple[JumpPath, ...]
    q_horizon: float
    q_start: float = 0.0

    def __post_init__(self):
        if len(self.paths) != self.n:
            raise ValueError(f"Expected {self.n} component paths, got {len(self.paths)}.")
        for i, path in enumerate(self.paths, start=1):
            if path.final_state > i - 1:
                raise ValueError(f"Path of element {i} reaches {path.final_state} > {i - 1}.")
            if path.jump_times and path.jump_times[-1] > self.q_horizon:
                raise ValueError(f"Path of element {i} jumps after q_horizon={self.q_horizon}.")

    def _check_query(self, q: float) -> None:
        if q > self.q_horizon * (1 + HORIZON_SLACK) or q < self.q_start * (1 - HORIZON_SLACK):
            raise ValueError(f"Query q={q} outside simulated range [{self.q_start}, {self.q_horizon}].")

    def states_at(self, q: float) -> InversionVector:
        self._check_query(q)
        return InversionVector(tuple(path.state_at(q) for path in self.paths))

    def permutation_at(self, q: float) -> Permutation:
        return decode_inversion_vector(self.states_at(q))

    def jump_events(self) -> list[tuple[float, int]]:
        """All (q, element) jumps in time order."""
        streams = ([(t, i) for t in path.jump_times] for i, path in enumerate(self.paths, start=1))
        return list(heapq.merge(*streams))

    @cached_property
    def replay(self) -> ReplayLog:
        """Apply each jump of ell_i as a swap of position i with the position holding the
        next smaller value to its left; this keeps every other left-inversion count fixed."""
        sigma = np.array(self.permutation_at(self.q_start).forward, dtype=np.int64)
        initial = sigma.copy()
        times: list[list[float]] = [[] for _ in range(self.n)]
        values: list[list[int]] = [[] for _ in range(self.n)]
        events = self.jump_events()
        for q, i in events:
            value = sigma[i - 1]
            left = sigma[: i - 1]
            candidates = np.where(left < value, left, 0)
            partner = int(np.argmax(candidates))
            if candidates[partner] == 0:
                raise RuntimeError(f"Element {i} jumped at q={q} with no smaller value on its left.")
            sigma[i - 1], sigma[partner] = sigma[partner], value
            for pos in (i - 1, partner):
                times[pos].append(q)
                values[pos].append(int(sigma[pos]))
        LOGGER.debug("Replayed %s jumps for n=%s.", len(events), self.n)
        return ReplayLog(
            initial=initial,
            change_times=tuple(np.asarray(t, dtype=float) for t in times),
            change_values=tuple(np.asarray(v, dtype=np.int64) for v in values),
            events=len(events),
        )


def simulate_process(
    n: int,
    q_horizon: float,
    rng: np.random.Generator,
    q_start: float = 0.0,
    options: SimulationOptions | None = None,
) -> MallowsProcessPath:
    """Simulate ell_1..ell_n on ``[q_start, q_horizon]``.

    With ``q_start > 0`` the starting inversion vector is an exact draw from
    the Mallows law at ``q_start``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}.")
    if q_horizon < 0 or q_start < 0 or q_start > q_horizon:
        raise ValueError(f"Need 0 <= q_start <= q_horizon, got q_start={q_start}, q_horizon={q_horizon}.")
    options = options or SimulationOptions()
    start_states = sample_inversion_vector(n, q_start, rng).ell if q_start > 0 else (0,) * n
    paths = []
    for i in range(1, n + 1):
        envelope = finite_envelope(
            i,
            q_start,
            q_horizon,
            options.envelope_segments,
            options.envelope_safety,
            5,
            options.singularity_eps,
        )
        paths.append(
            simulate_birth(
                RateSpec.finite(i, q_horizon, options.singularity_eps),
                q_horizon,
                envelope,
                rng,
                start_time=q_start,
                initial_state=start_states[i - 1],
                explosion_cap=options.explosion_cap,
            )
        )
    return MallowsProcessPath(n=n, paths=tuple(paths), q_horizon=q_horizon, q_start=q_start)


def trajectory(pp: MallowsProcessPath, i: int, t_grid) -> Trajectory:
    """X_i(t) = sigma_{e^(t/n)}(i) / n sampled on ``t_grid``."""
    if not 1 <= i <= pp.n:
        raise ValueError(f"Element {i} outside 1..{pp.n}.")
    times = np.asarray(t_grid, dtype=float)
    if times.size == 0:
        return Trajectory(i, (), ())
    qs = np.exp(times / pp.n)
    pp._check_query(float(qs.max()))
    pp._check_query(float(qs.min()))
    qs = np.clip(qs, pp.q_start, pp.q_horizon)
    positions = pp.replay.values_at(i, qs) / pp.n
    return Trajectory(i, tuple(float(t) for t in times), tuple(float(x) for x in positions))


def check_unit_inv_increments(pp: MallowsProcessPath) -> IncrementCheck:
    """Total inversions must rise by exactly one at every jump of the process."""
    previous_time = None
    previous_element = None
    for q, i in pp.jump_events():
        if previous_time is not None and q == previous_time:
            return IncrementCheck(False, f"elements {previous_element} and {i} jump together at q={q!r}")
        if q <= pp.q_start:
            return IncrementCheck(False, f"element {i} jumps at q={q!r} before q_start={pp.q_start!r}")
        previous_time, previous_element = q, i
    for i, path in enumerate(pp.paths, start=1):
        if path.final_state > i - 1:
            return IncrementCheck(False, f"element {i} exceeds state {i - 1}")
    return IncrementCheck(True)


def check_transposition_jumps(pp: MallowsProcessPath) -> IncrementCheck:
    """Decode before/after every jump and confirm they differ by one transposition."""
    states = list(pp.states_at(pp.q_start).ell)
    before = decode_inversion_vector(states).forward
    for q, i in pp.jump_events():
        states[i - 1] += 1
        after = decode_inversion_vector(states).forward
        moved = [pos for pos in range(pp.n) if before[pos] != after[pos]]
        if len(moved) != 2 or before[moved[0]] != after[moved[1]] or before[moved[1]] != after[moved[0]]:
            return IncrementCheck(False, f"jump of element {i} at q={q!r} moved positions {moved}")
        before = after
    return IncrementCheck(True)
