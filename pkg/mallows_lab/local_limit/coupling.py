"""The shifted finite process Sigma^n_t and its thinning coupling with Sigma_t."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from mallows_lab.local_limit.inversions import CERTIFICATION_TOL, CertFlag, sigma_values
from mallows_lab.local_limit.window import WINDOW_EXTENSION_CAP, ZWindow
from mallows_lab.process.birth import JumpPath
from mallows_lab.process.mallows_process import MallowsProcessPath, SimulationOptions, simulate_process
from mallows_lab.process.rates import SINGULARITY_EPS, rate_finite, rate_limiting
from mallows_lab.services.streams import StreamTag, stream

LOGGER = logging.getLogger("mallows_lab.local")

RATIO_TOLERANCE = 1e-12


class CouplingRatioError(RuntimeError):
    """A finite rate exceeded the limiting rate it is thinned from."""


@dataclass(frozen=True)
class ShiftedFiniteProcess:
    """Sigma^n_t(i) = sigma^n_t(k_n + i) - k_n, and i itself when k_n + i lies outside 1..n."""

    n: int
    k_n: int
    process: MallowsProcessPath

    @property
    def horizon(self) -> float:
        return self.process.q_horizon

    def ell_path(self, i: int) -> JumpPath:
        position = self.k_n + i
        if not 1 <= position <= self.n:
            return JumpPath()
        return self.process.paths[position - 1]

    def value(self, i: int, t: float) -> int:
        position = self.k_n + i
        if not 1 <= position <= self.n:
            return i
        return self.process.permutation_at(t)(position) - self.k_n

    def values_at(self, t: float, lo: int, hi: int) -> tuple[int, ...]:
        sigma = self.process.permutation_at(t)
        return tuple(
            sigma(self.k_n + i) - self.k_n if 1 <= self.k_n + i <= self.n else i for i in range(lo, hi + 1)
        )


def shifted_finite_process(
    n: int, k_n: int, T: float, rng: np.random.Generator, options: SimulationOptions | None = None
) -> ShiftedFiniteProcess:
    if not 0.0 < T < 1.0:
        raise ValueError(f"Shifted process needs 0 < T < 1, got {T}.")
    return ShiftedFiniteProcess(n=n, k_n=k_n, process=simulate_process(n, T, rng, options=options))


@dataclass(frozen=True)
class ThinnedPath:
    accepted: JumpPath
    ratios: tuple[float, ...]


def thin_limiting_path(
    limiting: JumpPath, position: int, uniforms: np.ndarray, singularity_eps: float = SINGULARITY_EPS
) -> ThinnedPath:
    """Accept the (m+1)-st limiting jump at s iff U_m < p_position(X, s) / q(m, s).

    X is the number of jumps accepted so far; X <= m keeps the ratio at most one.
    """
    state = 0
    accepted: list[float] = []
    ratios: list[float] = []
    for m, s in enumerate(limiting.jump_times):
        ratio = rate_finite(position, state, s, singularity_eps) / rate_limiting(m, s)
        if ratio > 1.0 + RATIO_TOLERANCE:
            raise CouplingRatioError(
                f"Acceptance ratio {ratio:.6g} > 1 for position {position}, state {state}, limiting state {m}, t={s!r}."
            )
        ratios.append(ratio)
        if uniforms[m] < ratio:
            accepted.append(s)
            state += 1
    return ThinnedPath(JumpPath(tuple(accepted)), tuple(ratios))


@dataclass(frozen=True)
class CoupledPaths:
    """Limiting and thinned finite counts on indices first..extent of one coupled realization."""

    first: int
    extent: int
    certification: CertFlag
    limiting: tuple[JumpPath, ...]
    finite: tuple[JumpPath, ...]
    ratios: tuple[float, ...]

    def finite_path(self, i: int) -> JumpPath:
        return self.finite[i - self.first]


def coupled_paths(
    n: int,
    k_n: int,
    window: tuple[int, int],
    T: float,
    seed: int,
    replica: int,
    *,
    extension_cap: int = WINDOW_EXTENSION_CAP,
    tol: float = CERTIFICATION_TOL,
    singularity_eps: float = SINGULARITY_EPS,
) -> CoupledPaths:
    """Limiting paths ell_j from a ZWindow and finite paths ell^n_{k_n + j} thinned from them.

    Indices run up to the certified extent at horizon T. Since ell^n <= ell
    pathwise, that extent bounds the reconstruction of both processes.
    """
    if not 0.0 < T < 1.0:
        raise ValueError(f"Coupling needs 0 < T < 1, got {T}.")
    lo, hi = window
    w = ZWindow(seed, replica, T, lo, hi, extension_cap=extension_cap, tol=tol)
    extent, flag = w.certification(hi)
    limiting = tuple(w.path(j) for j in range(lo, extent + 1))
    finite = []
    ratios: list[float] = []
    for j, path in zip(range(lo, extent + 1), limiting, strict=True):
        position = k_n + j
        if not 1 <= position <= n:
            finite.append(JumpPath())
            continue
        uniforms = stream(seed, StreamTag.COUPLING_U, replica, j).random(len(path.jump_times))
        thinned = thin_limiting_path(path, position, uniforms, singularity_eps)
        finite.append(thinned.accepted)
        ratios.extend(thinned.ratios)
    return CoupledPaths(lo, extent, flag, limiting, tuple(finite), tuple(ratios))


@dataclass(frozen=True)
class CouplingRecord:
    replica: int
    n: int
    k_n: int
    window: tuple[int, int]
    T: float
    agreement: tuple[bool, ...]
    ratios: tuple[float, ...]
    accepted: int
    proposed: int
    certified: bool

    def __post_init__(self):
        if any(not 0.0 <= r <= 1.0 + RATIO_TOLERANCE for r in self.ratios):
            raise ValueError("Coupling acceptance ratios must lie in [0, 1].")

    @property
    def full_agreement(self) -> bool:
        return all(self.agreement)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios, default=0.0)


def _count_matrix(paths: tuple[JumpPath, ...], times: np.ndarray) -> np.ndarray:
    return np.stack([np.searchsorted(np.asarray(p.jump_times), times, side="right") for p in paths], axis=-1)


def coupled_simulation(
    n: int,
    k_n: int,
    window: tuple[int, int],
    T: float,
    seed: int,
    replica: int,
    *,
    extension_cap: int = WINDOW_EXTENSION_CAP,
    tol: float = CERTIFICATION_TOL,
    singularity_eps: float = SINGULARITY_EPS,
) -> CouplingRecord:
    """Couple Sigma^n and Sigma on ``window`` and record where they agree over [0, T].

    Both paths are piecewise constant, so agreement is checked at t = 0 and
    after every jump of either process.
    """
    lo, hi = window
    coupled = coupled_paths(
        n, k_n, window, T, seed, replica, extension_cap=extension_cap, tol=tol, singularity_eps=singularity_eps
    )
    times = sorted({0.0, *(t for p in coupled.limiting + coupled.finite for t in p.jump_times)})
    times_array = np.asarray(times)
    limiting = _count_matrix(coupled.limiting, times_array)
    finite = _count_matrix(coupled.finite, times_array)
    differs = np.any(limiting != finite, axis=1)
    agreement = np.ones(hi - lo + 1, dtype=bool)
    if differs.any():
        rows = np.stack([limiting[differs], finite[differs]])
        values = sigma_values(rows, lo, lo, hi, coupled.extent)
        agreement = np.all(values[0] == values[1], axis=0)
    accepted = sum(len(p.jump_times) for p in coupled.finite)
    record = CouplingRecord(
        replica=replica,
        n=n,
        k_n=k_n,
        window=(lo, hi),
        T=T,
        agreement=tuple(bool(a) for a in agreement),
        ratios=coupled.ratios,
        accepted=accepted,
        proposed=len(coupled.ratios),
        certified=coupled.certification is CertFlag.EXACT,
    )
    LOGGER.debug(
        "Coupling replica %s, n=%s: %s/%s jumps accepted, full agreement %s.",
        replica,
        n,
        accepted,
        record.proposed,
        record.full_agreement,
    )
    return record
