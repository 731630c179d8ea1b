"""Permutations of {1..n} and the left-inversion vector bijection.

All public indices are 1-based: ``p(i)`` is the value at position ``i`` and
``ell[i - 1]`` is the number of larger values strictly left of position ``i``.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass


class _Fenwick:
    """Binary indexed tree over 1..size holding small nonnegative counts."""

    def __init__(self, size: int, fill: int = 0):
        self.size = size
        self.tree = [0] * (size + 1)
        if fill:
            for idx in range(1, size + 1):
                self.tree[idx] += fill
                parent = idx + (idx & -idx)
                if parent <= size:
                    self.tree[parent] += self.tree[idx]
        self._top = 1 << (size.bit_length() - 1) if size else 0

    def add(self, idx: int, delta: int) -> None:
        while idx <= self.size:
            self.tree[idx] += delta
            idx += idx & -idx

    def prefix(self, idx: int) -> int:
        total = 0
        while idx > 0:
            total += self.tree[idx]
            idx -= idx & -idx
        return total

    def kth(self, k: int) -> int:
        """Smallest idx with prefix(idx) >= k."""
        pos = 0
        step = self._top
        while step:
            nxt = pos + step
            if nxt <= self.size and self.tree[nxt] < k:
                pos = nxt
                k -= self.tree[nxt]
            step >>= 1
        return pos + 1


@dataclass(frozen=True)
class Permutation:
    forward: tuple[int, ...]
    inverse: tuple[int, ...]

    def __post_init__(self):
        n = len(self.forward)
        if n == 0:
            raise ValueError("Permutation must have n >= 1.")
        if len(self.inverse) != n:
            raise ValueError("Permutation forward/inverse length mismatch.")
        for pos, value in enumerate(self.forward, start=1):
            if not 1 <= value <= n or self.inverse[value - 1] != pos:
                raise ValueError(f"Not a bijection of 1..{n}: {self.forward}")

    @classmethod
    def from_values(cls, values: Iterable[int]) -> Permutation:
        forward = tuple(int(v) for v in values)
        n = len(forward)
        inverse = [0] * n
        for pos, value in enumerate(forward, start=1):
            if not 1 <= value <= n or inverse[value - 1]:
                raise ValueError(f"Not a bijection of 1..{n}: {forward}")
            inverse[value - 1] = pos
        return cls(forward, tuple(inverse))

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls.from_values(range(1, n + 1))

    @classmethod
    def reversal(cls, n: int) -> Permutation:
        return cls.from_values(range(n, 0, -1))

    @property
    def n(self) -> int:
        return len(self.forward)

    def __call__(self, i: int) -> int:
        return self.forward[i - 1]

    def compose(self, other: Permutation) -> Permutation:
        """Return ``self ∘ other``, i.e. ``i -> self(other(i))``."""
        if other.n != self.n:
            raise ValueError("Cannot compose permutations of different sizes.")
        return Permutation.from_values(self.forward[v - 1] for v in other.forward)

    def inverted(self) -> Permutation:
        return Permutation(self.inverse, self.forward)

    def reversed_values(self) -> Permutation:
        """``rev_n ∘ self``: the value at each position is mirrored to ``n + 1 - value``."""
        n = self.n
        return Permutation.from_values(n + 1 - v for v in self.forward)

    def code(self) -> str:
        return ",".join(str(v) for v in self.forward)


@dataclass(frozen=True)
class InversionVector:
    ell: tuple[int, ...]

    def __post_init__(self):
        if not self.ell:
            raise ValueError("InversionVector must have n >= 1.")
        for i, value in enumerate(self.ell, start=1):
            if not 0 <= value <= i - 1:
                raise ValueError(f"Inadmissible inversion vector: ell[{i}]={value} not in [0, {i - 1}].")

    @classmethod
    def of(cls, values: Iterable[int]) -> InversionVector:
        return cls(tuple(int(v) for v in values))

    @property
    def n(self) -> int:
        return len(self.ell)

    def total(self) -> int:
        return sum(self.ell)

    def code(self) -> int:
        """Mixed-radix index in 0..n!-1 (digit i has radix i)."""
        index = 0
        for i, value in enumerate(self.ell, start=1):
            index = index * i + value
        return index


def inv_count(p: Permutation) -> int:
    """Count inversions with a merge sort, O(n log n)."""
    _, count = _sort_count(list(p.forward))
    return count


def _sort_count(values: list[int]) -> tuple[list[int], int]:
    if len(values) <= 1:
        return values, 0
    mid = len(values) // 2
    left, left_count = _sort_count(values[:mid])
    right, right_count = _sort_count(values[mid:])
    merged: list[int] = []
    count = left_count + right_count
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            count += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, count


def inv_count_naive(p: Permutation) -> int:
    """Quadratic reference count, kept for tests."""
    values = p.forward
    return sum(1 for a in range(len(values)) for b in range(a + 1, len(values)) if values[a] > values[b])


def left_inversion_vector(p: Permutation) -> InversionVector:
    seen = _Fenwick(p.n)
    ell = []
    for count_left, value in enumerate(p.forward):
        ell.append(count_left - seen.prefix(value))
        seen.add(value, 1)
    return InversionVector(tuple(ell))


def decode_inversion_vector(v: InversionVector | Sequence[int]) -> Permutation:
    """Rebuild the permutation from its left-inversion vector.

    Positions are filled from n down to 1; position k takes the (k - ell_k)-th
    smallest value not yet used.
    """
    if not isinstance(v, InversionVector):
        v = InversionVector.of(v)
    n = v.n
    free = _Fenwick(n, fill=1)
    forward = [0] * n
    for k in range(n, 0, -1):
        value = free.kth(k - v.ell[k - 1])
        forward[k - 1] = value
        free.add(value, -1)
    return Permutation.from_values(forward)


def right_inversion_counts(p: Permutation) -> tuple[int, ...]:
    """r_i = #{j > i : p(j) < p(i)} for every position."""
    seen = _Fenwick(p.n)
    counts = [0] * p.n
    for pos in range(p.n, 0, -1):
        value = p.forward[pos - 1]
        counts[pos - 1] = seen.prefix(value - 1)
        seen.add(value, 1)
    return tuple(counts)
