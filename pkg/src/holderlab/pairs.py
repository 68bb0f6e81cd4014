"""Deterministic max-reductions over cell pairs.

Pairs are unordered, written ``(a, b)`` with ``a < b`` in active-cell order.
Exhaustive scans walk the upper triangle in fixed row blocks. Sampled scans
draw pairs chunk by chunk from a Philox generator, where chunk ``k`` uses
the stream jumped ``k`` times from the seed; so the pair set depends only
on the seed and budget. Ties are broken toward the lexicographically
smallest pair.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Callable, Optional

import numpy as np

from ._parallel import CHUNK, chunk_bounds, ordered_map

__all__ = ["PairScanPolicy", "ScanResult", "scan_max", "pair_count", "axis_neighbor_pairs"]

EXHAUSTIVE_LIMIT = 2_000_000


@dataclass(frozen=True)
class PairScanPolicy:
    """How to choose the pair set for sup-type quantities.

    Exhaustive mode is used whenever the active-pair count is at most
    ``exhaustive_threshold``, whatever ``mode`` says.
    """

    mode: str = "sampled"
    pair_budget: int = 1_000_000
    seed: Optional[int] = None
    include_axis_neighbors: bool = True
    exhaustive_threshold: int = EXHAUSTIVE_LIMIT

    def __post_init__(self):
        if self.mode not in ("exhaustive", "sampled"):
            raise ValueError(f"unknown pair mode {self.mode!r}")
        if self.pair_budget < 0:
            raise ValueError("pair_budget must be non-negative")

    def resolve(self, n_cells: int) -> str:
        if self.mode == "exhaustive" or pair_count(n_cells) <= self.exhaustive_threshold:
            return "exhaustive"
        if self.seed is None:
            raise ValueError("sampled pair mode requires a seed")
        return "sampled"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ScanResult:
    value: float
    a: int
    b: int
    pairs: int
    mode: str


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def axis_neighbor_pairs(grid) -> tuple:
    aa, bb = [], []
    for axis in range(grid.dim):
        nb = grid.neighbor(axis, 1)
        ok = np.flatnonzero(nb >= 0)
        aa.append(ok)
        bb.append(nb[ok])
    return np.concatenate(aa), np.concatenate(bb)


def _row_blocks(n: int, size: int):
    # Split rows a = 0..n-2 of the strict upper triangle into blocks of ~size pairs.
    counts = n - 1 - np.arange(n - 1)
    blocks = []
    a0 = 0
    acc = 0
    for a in range(n - 1):
        if acc and acc + counts[a] > size:
            blocks.append((a0, a))
            a0, acc = a, 0
        acc += counts[a]
    if n > 1:
        blocks.append((a0, n - 1))
    return blocks


def _upper_pairs(n: int, a0: int, a1: int):
    rows = np.arange(a0, a1)
    counts = n - 1 - rows
    a = np.repeat(rows, counts)
    starts = np.cumsum(counts) - counts
    offs = np.arange(a.size) - np.repeat(starts, counts)
    return a, a + 1 + offs


def _sampled_pairs(n: int, seed: int, lo: int, hi: int, chunk_index: int):
    gen = np.random.Generator(np.random.Philox(key=seed).jumped(chunk_index))
    m = hi - lo
    a = gen.integers(0, n, size=m)
    b = (a + 1 + gen.integers(0, n - 1, size=m)) % n
    return np.minimum(a, b), np.maximum(a, b)


def _best(q, a, b):
    if q.size == 0:
        return (-np.inf, -1, -1)
    if np.isnan(q).any():
        k = int(np.flatnonzero(np.isnan(q))[0])
        raise FloatingPointError(f"NaN pair value at pair ({a[k]}, {b[k]})")
    m = q.max()
    cand = np.flatnonzero(q == m)
    k = cand[np.lexsort((b[cand], a[cand]))[0]]
    return (float(m), int(a[k]), int(b[k]))


def _fold(parts):
    best = (-np.inf, -1, -1)
    for v, a, b in parts:
        if a < 0:
            continue
        if best[1] < 0 or v > best[0] or (v == best[0] and (a, b) < (best[1], best[2])):
            best = (v, a, b)
    return best


def iter_pair_chunks(grid, policy: PairScanPolicy):
    """Yield thunks producing ``(a, b)`` index arrays for each fixed chunk."""
    n = grid.size
    mode = policy.resolve(n)
    thunks = []
    if mode == "exhaustive":
        for a0, a1 in _row_blocks(n, CHUNK):
            thunks.append(lambda a0=a0, a1=a1: _upper_pairs(n, a0, a1))
    else:
        if policy.include_axis_neighbors:
            na, nb = axis_neighbor_pairs(grid)
            for lo, hi in chunk_bounds(na.size):
                thunks.append(lambda lo=lo, hi=hi: (na[lo:hi], nb[lo:hi]))
        for k, (lo, hi) in enumerate(chunk_bounds(policy.pair_budget)):
            thunks.append(lambda lo=lo, hi=hi, k=k: _sampled_pairs(n, policy.seed, lo, hi, k))
    return mode, thunks


def scan_max(grid, pair_value: Callable, policy: PairScanPolicy) -> ScanResult:
    """Maximize ``pair_value(a, b) -> array`` over the policy's pair set.

    Values of ``-inf`` mark excluded pairs. If every pair is excluded the
    result has ``a == b == -1`` and value ``-inf``.
    """
    mode, thunks = iter_pair_chunks(grid, policy)

    def work(thunk):
        a, b = thunk()
        return _best(pair_value(a, b), a, b), int(a.size)

    results = ordered_map(work, thunks)
    value, a, b = _fold(r[0] for r in results)
    if a >= 0 and value == -np.inf:
        a = b = -1
    return ScanResult(value, a, b, sum(r[1] for r in results), mode)
