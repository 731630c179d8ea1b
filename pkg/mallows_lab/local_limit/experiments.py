"""Replica experiments for the local limit: window verification and coupling agreement."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import stats

from mallows_lab.local_limit.coupling import CouplingRecord, coupled_simulation
from mallows_lab.local_limit.inversions import CERTIFICATION_TOL
from mallows_lab.local_limit.window import WINDOW_EXTENSION_CAP, ZWindow, jump_log, sigma_slice
from mallows_lab.perm.mallows import chi_square_pvalue, enumerate_mallows
from mallows_lab.process.rates import SINGULARITY_EPS
from mallows_lab.services.replicas import map_replicas

LOGGER = logging.getLogger("mallows_lab.local")

BALANCE_PAD = 20


@dataclass(frozen=True)
class LocalVerifyParams:
    window: tuple[int, int]
    T: float
    seed: int
    restriction_m: int = 4
    extension_cap: int = WINDOW_EXTENSION_CAP
    tol: float = CERTIFICATION_TOL


@dataclass(frozen=True)
class LocalVerifyRecord:
    replica: int
    t: float
    certified: bool
    truncated: int
    jumps: int
    transpositions_ok: bool
    left_crossers: int
    right_crossers: int
    balance_certifiable: bool
    restriction: str
    ell_zero: int
    first_jump: float | None
    extensions: int


def local_verify_replica(params: LocalVerifyParams, replica: int) -> LocalVerifyRecord:
    lo, hi = params.window
    T = params.T
    w = ZWindow(params.seed, replica, T, lo, hi, extension_cap=params.extension_cap, tol=params.tol)
    wide = sigma_slice(w, T, (lo - BALANCE_PAD, hi + BALANCE_PAD))
    balance = wide.balance(BALANCE_PAD)
    log = jump_log(w, (lo, hi), T)
    restriction = wide.relabel(0, params.restriction_m - 1)
    first_jumps = w.path(0).jump_times
    return LocalVerifyRecord(
        replica=replica,
        t=T,
        certified=wide.exact,
        truncated=wide.truncated,
        jumps=len(log.events),
        transpositions_ok=log.certified,
        left_crossers=balance.left_crossers,
        right_crossers=balance.right_crossers,
        balance_certifiable=balance.certifiable,
        restriction=restriction.code(),
        ell_zero=w.ell_at_horizon(0),
        first_jump=first_jumps[0] if first_jumps else None,
        extensions=w.extensions,
    )


@dataclass(frozen=True)
class LocalVerifyReport:
    window: tuple[int, int]
    T: float
    restriction_m: int
    records: tuple[LocalVerifyRecord, ...]

    def restriction_pvalue(self) -> float:
        """Chi-square of relabeled restrictions against the Mallows law of size m at q = T."""
        dist = enumerate_mallows(self.restriction_m, self.T)
        tally = Counter(r.restriction for r in self.records)
        counts = np.array([tally.get(p.code(), 0) for p in dist.support])
        return chi_square_pvalue(np.asarray(dist.mass), counts)

    def ell_marginal_pvalue(self) -> float:
        """KS test of ell_0(T) + 1 against geometric(1 - T)."""
        sample = np.array([r.ell_zero for r in self.records]) + 1
        return float(stats.kstest(sample, stats.geom(1.0 - self.T).cdf).pvalue)

    def first_jump_pvalue(self) -> float:
        """First jump times before T are uniform on (0, T)."""
        sample = [r.first_jump for r in self.records if r.first_jump is not None]
        if not sample:
            return 1.0
        return float(stats.kstest(sample, stats.uniform(0.0, self.T).cdf).pvalue)

    def summary(self) -> dict:
        total = len(self.records)
        if not total:
            return {}
        balance = [r for r in self.records if r.balance_certifiable]
        return {
            "certified_fraction": sum(r.certified for r in self.records) / total,
            "transpositions_ok_fraction": sum(r.transpositions_ok for r in self.records) / total,
            "jumps": sum(r.jumps for r in self.records),
            "balanced_fraction": (sum(r.left_crossers == r.right_crossers for r in balance) / len(balance))
            if balance
            else None,
            "restriction_pvalue": self.restriction_pvalue(),
            "ell_marginal_pvalue": self.ell_marginal_pvalue(),
            "first_jump_pvalue": self.first_jump_pvalue(),
        }


def local_verify_experiment(
    window: tuple[int, int],
    T: float,
    replicas: int,
    seed: int,
    *,
    restriction_m: int = 4,
    workers: int = 1,
    extension_cap: int = WINDOW_EXTENSION_CAP,
    tol: float = CERTIFICATION_TOL,
) -> LocalVerifyReport:
    lo, hi = window
    if not 0.0 < T < 1.0:
        raise ValueError(f"T must lie in (0, 1) for local experiments, got {T}.")
    if not (lo <= 0 and restriction_m - 1 <= hi + BALANCE_PAD):
        raise ValueError(f"Window {lo}..{hi} must contain 0 and leave room for a restriction of size {restriction_m}.")
    params = LocalVerifyParams(window, T, seed, restriction_m, extension_cap, tol)
    LOGGER.info("Local verification: window %s..%s T=%s replicas=%s.", lo, hi, T, replicas)
    records = map_replicas(partial(local_verify_replica, params), range(replicas), workers)
    return LocalVerifyReport(window, T, restriction_m, tuple(records))


def k_n_for(n: int, k_n: int | None) -> int:
    return n // 2 if k_n is None else k_n


@dataclass(frozen=True)
class CouplingReport:
    window: tuple[int, int]
    T: float
    records: tuple[CouplingRecord, ...]

    def agreement_by_n(self) -> dict[int, float]:
        grouped: dict[int, list[bool]] = {}
        for record in self.records:
            grouped.setdefault(record.n, []).append(record.full_agreement)
        return {n: sum(flags) / len(flags) for n, flags in sorted(grouped.items())}

    def summary(self) -> dict:
        agreement = self.agreement_by_n()
        frequencies = list(agreement.values())
        return {
            "agreement_by_n": {str(n): f for n, f in agreement.items()},
            "nondecreasing": all(a <= b for a, b in zip(frequencies, frequencies[1:])),
            "max_ratio": max((r.max_ratio for r in self.records), default=0.0),
        }


def coupling_experiment(
    n_values: tuple[int, ...],
    window: tuple[int, int],
    T: float,
    replicas: int,
    seed: int,
    *,
    k_n: int | None = None,
    workers: int = 1,
    extension_cap: int = WINDOW_EXTENSION_CAP,
    tol: float = CERTIFICATION_TOL,
    singularity_eps: float = SINGULARITY_EPS,
) -> CouplingReport:
    """Coupled replicas for every n; replica r reuses the same limiting paths across n."""
    if not 0.0 < T < 1.0:
        raise ValueError(f"T must lie in (0, 1) for local experiments, got {T}.")
    records: list[CouplingRecord] = []
    for n in n_values:
        shift = k_n_for(n, k_n)
        LOGGER.info("Coupling: n=%s k_n=%s window %s..%s T=%s replicas=%s.", n, shift, *window, T, replicas)
        run = partial(
            coupled_simulation,
            n,
            shift,
            window,
            T,
            seed,
            extension_cap=extension_cap,
            tol=tol,
            singularity_eps=singularity_eps,
        )
        records.extend(map_replicas(run, range(replicas), workers))
    return CouplingReport(window, T, tuple(records))
