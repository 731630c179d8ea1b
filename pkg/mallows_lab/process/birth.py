"""Exact simulation of pure-birth counting processes.

Inhomogeneous rates are simulated by Poisson thinning against a dominating
envelope, either a single constant or a list of segments whose bound may
depend on the current state. Any acceptance ratio above one aborts the run.
"""

from __future__ import annotations

import logging
import math
from bisect import bisect_left, bisect_right
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import pairwise

import numpy as np

from mallows_lab.process.rates import SINGULARITY_EPS, rate_finite

LOGGER = logging.getLogger("mallows_lab.process")

DEFAULT_EXPLOSION_CAP = 10_000_000
RATIO_TOLERANCE = 1e-12


class DominatorViolation(RuntimeError):
    """The thinning envelope was below the true rate."""


class ExplosionGuard(RuntimeError):
    """A path exceeded the configured number of jumps."""


@dataclass(frozen=True)
class JumpPath:
    jump_times: tuple[float, ...] = ()
    initial_state: int = 0
    start_time: float = 0.0

    def __post_init__(self):
        if self.initial_state < 0:
            raise ValueError("JumpPath initial_state must be >= 0.")
        previous = self.start_time
        for t in self.jump_times:
            if not t > previous:
                raise ValueError(f"JumpPath jump times must be strictly increasing after {self.start_time}.")
            previous = t

    def state_at(self, t: float) -> int:
        """Right-continuous state: jumps at times <= t are counted."""
        return self.initial_state + bisect_right(self.jump_times, t)

    def state_before(self, t: float) -> int:
        """Left limit of the state at t."""
        return self.initial_state + bisect_left(self.jump_times, t)

    @property
    def final_state(self) -> int:
        return self.initial_state + len(self.jump_times)


RateFn = Callable[[int, float], float]


@dataclass(frozen=True)
class EnvelopeSegment:
    """Dominating rate on ``[lower, upper)``; ``bound(state)`` must exceed the rate there."""

    lower: float
    upper: float
    bound: Callable[[int], float]


def constant_envelope(level: float, start: float, horizon: float) -> list[EnvelopeSegment]:
    if level <= 0:
        raise ValueError(f"Dominating rate must be positive, got {level}.")
    return [EnvelopeSegment(start, horizon, lambda _state: level)]


@dataclass
class _FiniteSegmentBound:
    """Calibrated bound for p_i(., q) on one q-segment, cached per state."""

    i: int
    lower: float
    upper: float
    safety: float
    grid_points: int
    singularity_eps: float
    _cache: dict[int, float] = field(default_factory=dict)

    def __call__(self, state: int) -> float:
        cached = self._cache.get(state)
        if cached is not None:
            return cached
        grid = np.linspace(self.lower, self.upper, self.grid_points)
        peak = max(rate_finite(self.i, state, float(q), self.singularity_eps) for q in grid)
        bound = self.safety * peak
        if self.upper < 1.0:
            # p_i(j, q) <= (j + 1) / (1 - q) holds exactly below q = 1.
            bound = min(bound, (state + 1) / (1.0 - self.upper))
        self._cache[state] = bound
        return bound


@lru_cache(maxsize=4096)
def finite_envelope(
    i: int,
    q_start: float,
    q_horizon: float,
    segments: int = 32,
    safety: float = 2.0,
    grid_points: int = 5,
    singularity_eps: float = SINGULARITY_EPS,
) -> tuple[EnvelopeSegment, ...]:
    """Piecewise envelope for element ``i`` over ``[q_start, q_horizon]``."""
    if q_horizon <= q_start:
        return ()
    edges = np.linspace(q_start, q_horizon, segments + 1)
    return tuple(
        EnvelopeSegment(
            float(lower),
            float(upper),
            _FiniteSegmentBound(i, float(lower), float(upper), safety, grid_points, singularity_eps),
        )
        for lower, upper in pairwise(edges)
    )


def simulate_birth(
    rate: RateFn,
    horizon: float,
    dominating: float | Sequence[EnvelopeSegment],
    rng: np.random.Generator,
    *,
    start_time: float = 0.0,
    initial_state: int = 0,
    explosion_cap: int = DEFAULT_EXPLOSION_CAP,
) -> JumpPath:
    """Thinning sampler for a birth process with intensity ``rate(state, t)`` on ``(start_time, horizon]``."""
    if horizon < start_time:
        raise ValueError(f"Horizon {horizon} is before start time {start_time}.")
    spec_horizon = getattr(rate, "horizon", None)
    if spec_horizon is not None and horizon > spec_horizon:
        raise ValueError(f"Horizon {horizon} exceeds the rate's declared horizon {spec_horizon}.")
    segments = constant_envelope(dominating, start_time, horizon) if isinstance(dominating, int | float) else dominating
    max_state = getattr(rate, "max_state", None)

    state = initial_state
    times: list[float] = []
    for segment in segments:
        t = max(segment.lower, start_time)
        upper = min(segment.upper, horizon)
        while t < upper:
            if max_state is not None and state >= max_state:
                break
            level = segment.bound(state)
            if level <= 0:
                break
            t += rng.exponential(1.0 / level)
            if t >= upper:
                break
            ratio = rate(state, t) / level
            if ratio > 1.0 + RATIO_TOLERANCE:
                raise DominatorViolation(
                    f"Acceptance ratio {ratio:.6g} > 1 at t={t!r}, state={state} "
                    f"(bound {level:.6g} on [{segment.lower!r}, {segment.upper!r}))."
                )
            if rng.random() < ratio:
                times.append(t)
                state += 1
                if len(times) > explosion_cap:
                    raise ExplosionGuard(f"More than {explosion_cap} jumps before t={t!r}.")
        if max_state is not None and state >= max_state:
            break
    return JumpPath(tuple(times), initial_state=initial_state, start_time=start_time)


def simulate_limiting_by_timechange(
    horizon: float,
    rng: np.random.Generator,
    *,
    start_time: float = 0.0,
    initial_state: int = 0,
    explosion_cap: int = DEFAULT_EXPLOSION_CAP,
) -> JumpPath:
    """Rates (j+1)/(1-t) as a homogeneous Yule chain run on the clock tau(t) = -log(1 - t)."""
    if not 0.0 <= horizon < 1.0:
        raise ValueError(f"Limiting horizon must lie in [0, 1), got {horizon}.")
    tau_end = -math.log1p(-horizon)
    s = -math.log1p(-start_time)
    state = initial_state
    times: list[float] = []
    while True:
        s += rng.exponential(1.0 / (state + 1))
        if s >= tau_end:
            break
        times.append(-math.expm1(-s))
        state += 1
        if len(times) > explosion_cap:
            raise ExplosionGuard(f"More than {explosion_cap} jumps before tau={s!r}.")
    return JumpPath(tuple(times), initial_state=initial_state, start_time=start_time)
