"""Set partitions, Bell/Stirling numbers, permanents and subordinated set functions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

MAX_PARTITION_N = 12
MAX_BELL_N = 25
MAX_PERMANENT_N = 12


@dataclass(frozen=True)
class SetPartition:
    """Partition of ``{1..n}``; blocks sorted internally and by smallest element."""

    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0] if b else 0))
        if any(not b for b in blocks):
            raise ValueError("blocks must be nonempty")
        flat = [i for b in blocks for i in b]
        if sorted(flat) != list(range(1, self.n + 1)):
            raise ValueError(f"blocks {blocks} do not partition 1..{self.n}")
        object.__setattr__(self, "blocks", blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    @classmethod
    def from_rgs(cls, rgs) -> "SetPartition":
        """Build from a restricted growth string (0-based block labels)."""
        groups: dict[int, list[int]] = {}
        for i, label in enumerate(rgs, start=1):
            groups.setdefault(label, []).append(i)
        return cls(len(rgs), tuple(tuple(groups[k]) for k in sorted(groups)))

    @classmethod
    def from_function(cls, f) -> "SetPartition":
        """Partition of ``{1..n}`` induced by the fibres of ``f`` (a sequence of values)."""
        groups: dict = {}
        for i, v in enumerate(f, start=1):
            groups.setdefault(v, []).append(i)
        return cls(len(f), tuple(tuple(g) for g in groups.values()))


def _restricted_growth_strings(n: int) -> Iterator[list[int]]:
    # lexicographic order; a[i] <= 1 + max(a[:i])
    a = [0] * n

    def extend(i: int, top: int):
        if i == n:
            yield a[:]
            return
        for v in range(top + 2):
            a[i] = v
            yield from extend(i + 1, max(top, v))

    if n == 0:
        yield []
    else:
        yield from extend(1, 0)


def enumerate_partitions(n: int) -> Iterator[SetPartition]:
    """Yield every partition of ``{1..n}`` once, in restricted-growth-string order."""
    if not 1 <= n <= MAX_PARTITION_N:
        raise ValueError(f"n must lie in [1, {MAX_PARTITION_N}], got {n}")
    for rgs in _restricted_growth_strings(n):
        yield SetPartition.from_rgs(rgs)


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Stirling numbers of the second kind."""
    if not 0 <= k <= n <= MAX_BELL_N:
        raise ValueError(f"need 0 <= k <= n <= {MAX_BELL_N}, got n={n}, k={k}")
    if n == k:
        return 1
    if k == 0:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def bell(n: int) -> int:
    if not 0 <= n <= MAX_BELL_N:
        raise ValueError(f"need 0 <= n <= {MAX_BELL_N}, got {n}")
    return sum(stirling2(n, k) for k in range(n + 1))


def bell_recurrence(n: int) -> int:
    """Bell numbers from ``B_{n+1} = sum_k C(n, k) B_k``; independent of :func:`stirling2`."""
    values = [1]
    for m in range(n):
        values.append(sum(math.comb(m, k) * values[k] for k in range(m + 1)))
    return values[n]


def permanent(G) -> complex:
    """Permanent via Ryser's inclusion-exclusion formula with Gray-code updates, O(2^n n)."""
    A = np.asarray(G, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n > MAX_PERMANENT_N:
        raise ValueError(f"matrix size {n} exceeds cap {MAX_PERMANENT_N}")
    if n == 0:
        return 1.0 + 0j
    # perm(A) = (-1)^n sum_S (-1)^|S| prod_i sum_{j in S} A_ij
    row_sums = np.zeros(n, complex)
    chosen = np.zeros(n, bool)
    size = 0
    total = 0j
    for k in range(1, 2 ** n):
        j = (k & -k).bit_length() - 1  # column flipped by the Gray code
        if chosen[j]:
            row_sums -= A[:, j]
            size -= 1
        else:
            row_sums += A[:, j]
            size += 1
        chosen[j] = not chosen[j]
        term = np.prod(row_sums)
        total += -term if size % 2 else term
    return complex(total if n % 2 == 0 else -total)


def permanent_naive(G) -> complex:
    """Direct sum over permutations; used as an oracle for small sizes."""
    A = np.asarray(G, dtype=complex)
    n = A.shape[0]
    return complex(sum(np.prod(A[np.arange(n), list(p)]) for p in itertools.permutations(range(n))))


@dataclass(frozen=True)
class SubordinationSpec:
    partition: SetPartition
    m: int


def count_subordinated(spec: SubordinationSpec) -> int:
    """Number of functions ``[n] -> [m]`` whose fibre partition equals ``spec.partition``.

    For ``m < |sigma|`` the set is by convention all ``m**n`` functions.
    """
    k, m, n = len(spec.partition), spec.m, spec.partition.n
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m < k:
        return m ** n
    return math.perm(m, k)


def count_subordinated_bruteforce(spec: SubordinationSpec) -> int:
    n, m = spec.partition.n, spec.m
    return sum(
        1
        for f in itertools.product(range(m), repeat=n)
        if SetPartition.from_function(f) == spec.partition
    )
