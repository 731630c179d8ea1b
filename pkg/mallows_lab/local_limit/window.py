"""Finite windows onto the limiting process Sigma_t on Z.

Paths are generated in fixed blocks of indices, each block from its own
random stream, so a value never depends on how far the window was extended.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass

import numpy as np

from mallows_lab.local_limit.inversions import (
    CERTIFICATION_TOL,
    CertFlag,
    HorizonCertificationRule,
    WindowExhausted,
    sigma_values,
)
from mallows_lab.perm.core import Permutation
from mallows_lab.process.birth import DEFAULT_EXPLOSION_CAP, JumpPath, simulate_limiting_by_timechange
from mallows_lab.services.streams import StreamTag, stream

LOGGER = logging.getLogger("mallows_lab.local")

BLOCK_SIZE = 64
WINDOW_EXTENSION_CAP = 100_000
INITIAL_PARTNER_PAD = 8


class TranspositionMismatch(RuntimeError):
    """A jump of Sigma did not act as the predicted transposition."""


class ZWindow:
    """Limiting left-inversion paths ell_i on [0, horizon] for i in lo..hi.

    Reading outside lo..hi extends the window by doubling, up to
    ``extension_cap`` indices in total.
    """

    def __init__(
        self,
        seed: int,
        replica: int,
        horizon: float,
        lo: int,
        hi: int,
        *,
        extension_cap: int = WINDOW_EXTENSION_CAP,
        tol: float = CERTIFICATION_TOL,
        explosion_cap: int = DEFAULT_EXPLOSION_CAP,
    ):
        if not 0.0 <= horizon < 1.0:
            raise ValueError(f"Window horizon must lie in [0, 1), got {horizon}.")
        if lo > hi:
            raise ValueError(f"Window needs lo <= hi, got {lo} > {hi}.")
        if hi - lo + 1 > extension_cap:
            raise ValueError(f"Window {lo}..{hi} is wider than the extension cap {extension_cap}.")
        self.seed = seed
        self.replica = replica
        self.horizon = horizon
        self.lo = lo
        self.hi = hi
        self.extension_cap = extension_cap
        self.tol = tol
        self.explosion_cap = explosion_cap
        self.extensions = 0
        self._blocks: dict[int, tuple[JumpPath, ...]] = {}

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    def _extend_to(self, index: int) -> None:
        if self.lo <= index <= self.hi:
            return
        room = self.extension_cap - self.width
        if index > self.hi:
            new_hi = max(index, self.hi + self.width)
            new_hi = min(new_hi, self.hi + room)
            self.hi, reached = new_hi, new_hi
            blocked = index > new_hi
        else:
            new_lo = min(index, self.lo - self.width)
            new_lo = max(new_lo, self.lo - room)
            self.lo, reached = new_lo, new_lo
            blocked = index < new_lo
        self.extensions += 1
        LOGGER.debug("Window of replica %s extended to %s..%s.", self.replica, self.lo, self.hi)
        if blocked:
            raise WindowExhausted(
                f"Index {index} lies beyond the window cap of {self.extension_cap} indices.", reached=reached
            )

    def path(self, i: int) -> JumpPath:
        self._extend_to(i)
        block = i // BLOCK_SIZE
        if block not in self._blocks:
            rng = stream(self.seed, StreamTag.WINDOW, self.replica, block)
            self._blocks[block] = tuple(
                simulate_limiting_by_timechange(self.horizon, rng, explosion_cap=self.explosion_cap)
                for _ in range(BLOCK_SIZE)
            )
        return self._blocks[block][i - block * BLOCK_SIZE]

    def ell_at(self, i: int, t: float) -> int:
        return self.path(i).state_at(t)

    def ell_at_horizon(self, i: int) -> int:
        return self.path(i).final_state

    def ell_matrix(self, first: int, last: int, times, *, before: bool = False) -> np.ndarray:
        """ell_j(s) (or ell_j(s-) when ``before``) for s in ``times`` and j in first..last."""
        times = np.asarray(times, dtype=float)
        side = "left" if before else "right"
        columns = [np.searchsorted(np.asarray(self.path(j).jump_times), times, side=side) for j in range(first, last + 1)]
        return np.stack(columns, axis=-1).astype(np.int64)

    def jump_events(self, lo: int, hi: int) -> list[tuple[float, int]]:
        streams = ([(t, i) for t in self.path(i).jump_times] for i in range(lo, hi + 1))
        return list(heapq.merge(*streams))

    def certification(self, i: int) -> tuple[int, CertFlag]:
        return HorizonCertificationRule(self.ell_at_horizon, self.horizon, self.tol).extent(i)


@dataclass(frozen=True)
class BalanceCheck:
    left_crossers: int
    right_crossers: int
    certifiable: bool

    @property
    def balanced(self) -> bool:
        return self.left_crossers == self.right_crossers


@dataclass(frozen=True)
class ZPermutationSlice:
    lo: int
    t: float
    values: tuple[int, ...]
    flags: tuple[CertFlag, ...]

    def __post_init__(self):
        if len(self.values) != len(self.flags):
            raise ValueError("ZPermutationSlice needs one flag per value.")
        exact = [v for v, f in zip(self.values, self.flags, strict=True) if f is CertFlag.EXACT]
        if len(set(exact)) != len(exact):
            raise ValueError(f"Certified values are not distinct on {self.lo}..{self.hi}.")

    @property
    def hi(self) -> int:
        return self.lo + len(self.values) - 1

    @property
    def exact(self) -> bool:
        return all(f is CertFlag.EXACT for f in self.flags)

    @property
    def truncated(self) -> int:
        return sum(f is CertFlag.TRUNCATED for f in self.flags)

    def value(self, i: int) -> int:
        if not self.lo <= i <= self.hi:
            raise ValueError(f"Index {i} outside slice {self.lo}..{self.hi}.")
        return self.values[i - self.lo]

    def relabel(self, a: int, b: int) -> Permutation:
        """Restriction to positions a..b, values replaced by their ranks."""
        window = [self.value(i) for i in range(a, b + 1)]
        ranks = np.argsort(np.argsort(window)) + 1
        return Permutation.from_values(int(r) for r in ranks)

    def balance(self, margin: int) -> BalanceCheck:
        """Counts of i <= 0 with sigma(i) >= 1 and of i >= 1 with sigma(i) <= 0.

        Only certifiable when every value is exact and no crosser sits within
        ``margin`` of either end of the slice.
        """
        left = [i for i in range(self.lo, min(0, self.hi) + 1) if self.value(i) >= 1]
        right = [i for i in range(max(1, self.lo), self.hi + 1) if self.value(i) <= 0]
        inner = all(self.lo + margin <= i <= self.hi - margin for i in left + right)
        return BalanceCheck(len(left), len(right), self.exact and inner)


def sigma_slice(w: ZWindow, t: float, domain: tuple[int, int]) -> ZPermutationSlice:
    """Sigma_t on ``domain`` = (lo, hi), extending ``w`` as certification requires."""
    lo, hi = domain
    if not 0.0 <= t <= w.horizon:
        raise ValueError(f"Query time {t} outside [0, {w.horizon}].")
    if lo > hi:
        raise ValueError(f"Empty domain {lo}..{hi}.")
    extent, flag = w.certification(hi)
    if extent < hi:
        raise ValueError(f"Domain {lo}..{hi} does not fit under the window cap.")
    ells = w.ell_matrix(lo, extent, [t])[0]
    values = sigma_values(ells, lo, lo, hi, extent)
    return ZPermutationSlice(lo=lo, t=t, values=tuple(int(v) for v in values), flags=(flag,) * (hi - lo + 1))


@dataclass(frozen=True, order=True)
class TranspositionEvent:
    time: float
    i: int
    partner: int


@dataclass(frozen=True)
class JumpLog:
    events: tuple[TranspositionEvent, ...]
    certified: bool


def _check_swap(before: np.ndarray, after: np.ndarray, first: int, i: int) -> int | None:
    """Partner position of a verified swap, or None when the partner lies left of ``first``."""
    changed = np.flatnonzero(before != after) + first
    if changed.size == 1 and changed[0] == i:
        return None
    if changed.size != 2 or changed[1] != i:
        raise TranspositionMismatch(f"Jump of ell_{i} changed positions {changed.tolist()}.")
    partner = int(changed[0])
    b_i, b_p = before[i - first], before[partner - first]
    if after[i - first] != b_p or after[partner - first] != b_i or not b_p < b_i:
        raise TranspositionMismatch(f"Jump of ell_{i} did not swap values {b_i} and {b_p}.")
    left = before[: i - first]
    if np.any((left > b_p) & (left < b_i)):
        raise TranspositionMismatch(f"Jump of ell_{i} skipped a value between {b_p} and {b_i}.")
    return partner


def jump_log(w: ZWindow, domain: tuple[int, int], T: float | None = None) -> JumpLog:
    """Every jump of ell_i, i in ``domain``, on (0, T], checked to be the swap of i with
    the position holding the next smaller value to its left."""
    lo, hi = domain
    T = w.horizon if T is None else T
    if not 0.0 <= T <= w.horizon:
        raise ValueError(f"Jump log horizon {T} outside [0, {w.horizon}].")
    extent, flag = w.certification(hi)
    if flag is CertFlag.TRUNCATED:
        LOGGER.warning("Jump log on %s..%s skipped: certification truncated.", lo, hi)
        return JumpLog((), False)
    pending = [(s, i) for s, i in w.jump_events(lo, hi) if s <= T]
    verified: list[TranspositionEvent] = []
    pad = INITIAL_PARTNER_PAD
    while pending:
        first = lo - pad
        times = [s for s, _ in pending]
        try:
            rows = np.stack([w.ell_matrix(first, extent, times, before=True), w.ell_matrix(first, extent, times)])
        except WindowExhausted:
            LOGGER.warning("Jump log on %s..%s left %s events unverified at the window cap.", lo, hi, len(pending))
            return JumpLog(tuple(sorted(verified)), False)
        values = sigma_values(rows, first, first, hi, extent)
        retry = []
        for k, (s, i) in enumerate(pending):
            partner = _check_swap(values[0, k], values[1, k], first, i)
            if partner is None:
                retry.append((s, i))
            else:
                verified.append(TranspositionEvent(s, i, partner))
        pending = retry
        pad *= 2
    return JumpLog(tuple(sorted(verified)), True)
