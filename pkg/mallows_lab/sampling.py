"""Tallies of Mallows draws by inversion-vector code, from the static sampler or the process."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from mallows_lab.perm.mallows import (
    chi_square_pvalue,
    enumerate_mallows,
    inversion_codes,
    sample_inversion_vectors,
    tv_distance_codes,
)
from mallows_lab.process.mallows_process import SimulationOptions, simulate_process
from mallows_lab.services.replicas import map_replicas
from mallows_lab.services.streams import StreamTag, stream

LOGGER = logging.getLogger("mallows_lab.harness")

CHUNK_SIZE = 65_536


def _static_chunk(n: int, q: float, replicas: int, seed: int, chunk: int) -> np.ndarray:
    size = min(CHUNK_SIZE, replicas - chunk * CHUNK_SIZE)
    vectors = sample_inversion_vectors(n, q, size, stream(seed, StreamTag.SAMPLE, chunk))
    return np.bincount(inversion_codes(vectors), minlength=math.factorial(n))


def static_code_counts(n: int, q: float, replicas: int, seed: int, workers: int = 1) -> np.ndarray:
    """Counts per inversion code of ``replicas`` static draws, in chunks of independent streams."""
    chunks = range(math.ceil(replicas / CHUNK_SIZE))
    tallies = map_replicas(partial(_static_chunk, n, q, replicas, seed), chunks, workers)
    return np.sum(tallies, axis=0) if tallies else np.zeros(math.factorial(n), dtype=np.int64)


def _process_code(n: int, q: float, seed: int, options: SimulationOptions, replica: int) -> int:
    pp = simulate_process(n, q, stream(seed, StreamTag.PROCESS, replica), options=options)
    return pp.states_at(q).code()


def process_code_counts(
    n: int, q: float, replicas: int, seed: int, workers: int = 1, options: SimulationOptions | None = None
) -> np.ndarray:
    """Counts per inversion code of the birth process read at time q."""
    codes = map_replicas(partial(_process_code, n, q, seed, options or SimulationOptions()), range(replicas), workers)
    return np.bincount(np.asarray(codes, dtype=np.int64), minlength=math.factorial(n))


@dataclass(frozen=True)
class SampleComparison:
    n: int
    q: float
    replicas: int
    tv_distance: float
    chi2_pvalue: float


def compare_with_oracle(n: int, q: float, counts: np.ndarray) -> SampleComparison:
    masses = enumerate_mallows(n, q).mass_by_inversion_code()
    return SampleComparison(
        n=n,
        q=q,
        replicas=int(counts.sum()),
        tv_distance=tv_distance_codes(masses, counts),
        chi2_pvalue=chi_square_pvalue(masses, counts),
    )
