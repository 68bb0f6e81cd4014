"""Variable exponent vectors and the exponents derived from them.

The Hölder exponent in direction ``i`` at a point is

    beta_i = (1 - S) / (1 - S + N / p_i),    S = sum_j 1 / p_j,

which reduces to ``1 - N/p`` when all ``p_j`` equal ``p``. Passing
``literal_p1=True`` uses ``N / p_1`` in every direction instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exprlang import parse_expr
from .grid import Grid, GridFunction, sample
from .pairs import PairScanPolicy, scan_max

__all__ = [
    "ExponentVectorField", "BetaField", "ExponentError", "DegenerateDenominatorError",
    "NoValidPairsWarning", "HypothesisReport",
    "harmonic_mean", "critical_exponent", "beta_formula", "beta_exponents",
    "beta_pair", "log_hoelder_modulus", "validate_hypotheses",
]


class ExponentError(ValueError):
    pass


class DegenerateDenominatorError(ArithmeticError):
    def __init__(self, cells):
        self.cells = list(cells)
        super().__init__(f"beta denominator <= 0 at {len(self.cells)} cell(s), first: {self.cells[:5]}")


class NoValidPairsWarning(UserWarning):
    pass


class ExponentVectorField:
    """N exponent fields ``p_1..p_N`` on one grid, each > 1 everywhere."""

    def __init__(self, components: Sequence[GridFunction]):
        components = list(components)
        if not components:
            raise ExponentError("need at least one exponent component")
        grid = components[0].grid
        if any(c.grid is not grid for c in components):
            raise ExponentError("exponent components live on different grids")
        if len(components) != grid.dim:
            raise ExponentError(f"{len(components)} exponent components for a {grid.dim}-D grid")
        P = np.stack([c.values for c in components], axis=1)
        bad = np.flatnonzero(~(P > 1).all(axis=1))
        if bad.size:
            k = int(bad[0])
            raise ExponentError(
                f"exponents must exceed 1; cell {k} at {tuple(grid.centers[k])} has {P[k].tolist()}"
            )
        P.setflags(write=False)
        self.grid = grid
        self.components = components
        self.values = P  # (cells, N)

    @classmethod
    def from_exprs(cls, grid: Grid, exprs) -> "ExponentVectorField":
        """One expression per direction, or a single one used for all."""
        if isinstance(exprs, str):
            exprs = [exprs]
        exprs = [parse_expr(e) if isinstance(e, str) else e for e in exprs]
        if len(exprs) == 1:
            exprs = exprs * grid.dim
        return cls([sample(grid, e) for e in exprs])

    @property
    def N(self) -> int:
        return self.grid.dim

    @property
    def p_m(self) -> GridFunction:
        return GridFunction(self.grid, self.values.min(axis=1))

    @property
    def p_M(self) -> GridFunction:
        return GridFunction(self.grid, self.values.max(axis=1))

    @property
    def p_minus(self) -> np.ndarray:
        return self.values.min(axis=0)

    @property
    def p_plus(self) -> np.ndarray:
        return self.values.max(axis=0)

    @property
    def p_m_plus(self) -> float:
        return float(self.values.min(axis=1).max())

    @property
    def p_M_plus(self) -> float:
        return float(self.values.max(axis=1).max())


@dataclass(frozen=True, eq=False)
class BetaField:
    grid: Grid
    values: np.ndarray  # (cells, N)

    @property
    def components(self):
        return [GridFunction(self.grid, self.values[:, i]) for i in range(self.values.shape[1])]

    @property
    def minima(self) -> np.ndarray:
        return self.values.min(axis=0)

    def summary(self) -> dict:
        v = self.values
        return {
            "min": v.min(axis=0).tolist(),
            "mean": v.mean(axis=0).tolist(),
            "max": v.max(axis=0).tolist(),
        }


def harmonic_mean(p: ExponentVectorField) -> GridFunction:
    return GridFunction(p.grid, p.N / np.sum(1.0 / p.values, axis=1))


def critical_exponent(pbar: GridFunction, N: int) -> GridFunction:
    """``N P/(N - P)`` where ``P < N``; ``+inf`` elsewhere.

    The result is returned as a plain array-backed object because infinite
    markers are not valid GridFunction values.
    """
    P = pbar.values
    out = np.full(P.shape, math.inf)
    sub = P < N
    out[sub] = N * P[sub] / (N - P[sub])
    return _MarkedField(pbar.grid, out)


@dataclass(frozen=True, eq=False)
class _MarkedField:
    grid: Grid
    values: np.ndarray

    @property
    def infinite(self) -> np.ndarray:
        return np.isinf(self.values)


def beta_formula(P: np.ndarray, literal_p1: bool = False) -> np.ndarray:
    """Hölder exponents for an ``(..., N)`` array of exponent vectors."""
    P = np.asarray(P, dtype=float)
    N = P.shape[-1]
    num = 1.0 - np.sum(1.0 / P, axis=-1, keepdims=True)
    ref = P[..., :1] if literal_p1 else P
    den = num + N / ref
    bad = ~(den > 0).all(axis=-1)
    if bad.any():
        raise DegenerateDenominatorError(np.flatnonzero(bad.reshape(-1)).tolist())
    return np.broadcast_to(num / den, P.shape).copy()


def beta_exponents(p: ExponentVectorField, literal_p1: bool = False) -> BetaField:
    values = beta_formula(p.values, literal_p1)
    values.setflags(write=False)
    return BetaField(p.grid, values)


def beta_pair(beta: BetaField, a: int, b: int) -> np.ndarray:
    return np.minimum(beta.values[a], beta.values[b])


def log_hoelder_modulus(p: GridFunction, pair_budget: int = 1_000_000, seed: int = 0,
                        exhaustive_threshold: int = 2_000_000) -> float:
    """max of ``|p(x) - p(y)| log(1/|x - y|)`` over pairs with ``0 < |x - y| < 1/2``."""
    g = p.grid
    v = p.values
    X = g.centers
    policy = PairScanPolicy("sampled", pair_budget, seed, True, exhaustive_threshold)

    def value(a, b):
        d = np.sqrt(np.sum((X[a] - X[b]) ** 2, axis=1))
        ok = (d > 0) & (d < 0.5)
        out = np.full(a.size, -np.inf)
        out[ok] = np.abs(v[a[ok]] - v[b[ok]]) * np.log(1.0 / d[ok])
        return out

    res = scan_max(g, value, policy)
    if res.a < 0:
        warnings.warn("no cell pair is closer than 1/2; modulus set to 0", NoValidPairsWarning)
        return 0.0
    return res.value


@dataclass(frozen=True)
class HypothesisReport:
    """Whether ``p_m(x) > N`` holds at every active cell."""

    N: int
    satisfied: bool
    violating_cells: int
    active_cells: int
    p_min: list
    p_max: list
    violating_indices: tuple = ()

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "satisfied": self.satisfied,
            "violating_cells": self.violating_cells,
            "active_cells": self.active_cells,
            "p_min": self.p_min,
            "p_max": self.p_max,
        }


def validate_hypotheses(p: ExponentVectorField, N: int | None = None) -> HypothesisReport:
    N = p.N if N is None else N
    viol = np.flatnonzero(~(p.values.min(axis=1) > N))
    return HypothesisReport(
        N=N,
        satisfied=viol.size == 0,
        violating_cells=int(viol.size),
        active_cells=p.grid.size,
        p_min=p.p_minus.tolist(),
        p_max=p.p_plus.tolist(),
        violating_indices=tuple(int(k) for k in viol),
    )
