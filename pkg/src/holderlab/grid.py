"""Cell-centred lattices over boxes, optionally masked by a domain predicate."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exprlang import (
    DomainPredicate, EvalDomainError, FieldExpr, evaluate, evaluate_predicate,
    max_variable, parse_expr, parse_predicate,
)

__all__ = [
    "Grid", "GridFunction", "EmptyDomainError", "IsolatedCellError",
    "build_grid", "sample", "partial_derivative", "integrate",
    "write_csv", "read_csv",
]


class EmptyDomainError(ValueError):
    pass


class IsolatedCellError(ValueError):
    def __init__(self, axis, cells):
        self.axis = axis
        self.cells = list(cells)
        super().__init__(
            f"{len(self.cells)} active cell(s) have no active neighbour along axis {axis + 1}, "
            f"first: {self.cells[:5]}"
        )


@dataclass(frozen=True, eq=False)
class Grid:
    """Cell-centred lattice; ``mask`` has shape ``resolutions``.

    Active cells are ordered lexicographically by their integer index.
    """

    box: np.ndarray  # (N, 2)
    resolutions: tuple
    mask: np.ndarray
    predicate: Optional[DomainPredicate] = None
    pruned: int = 0
    indices: np.ndarray = field(init=False, repr=False)
    centers: np.ndarray = field(init=False, repr=False)
    lookup: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        idx = np.argwhere(self.mask)
        lookup = np.full(self.resolutions, -1, dtype=np.int64)
        lookup[tuple(idx.T)] = np.arange(len(idx))
        centers = self.box[:, 0] + (idx + 0.5) * self.h
        for name, arr in (("indices", idx), ("centers", centers), ("lookup", lookup)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        self.mask.setflags(write=False)

    @property
    def dim(self) -> int:
        return len(self.resolutions)

    @property
    def h(self) -> np.ndarray:
        return (self.box[:, 1] - self.box[:, 0]) / np.asarray(self.resolutions)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def is_rectangular(self) -> bool:
        return bool(self.mask.all())

    def neighbor(self, axis: int, step: int) -> np.ndarray:
        """Active-order position of each cell's neighbour ``step`` cells along ``axis`` (-1 if none)."""
        j = self.indices.copy()
        j[:, axis] += step
        ok = (j[:, axis] >= 0) & (j[:, axis] < self.resolutions[axis])
        out = np.full(self.size, -1, dtype=np.int64)
        out[ok] = self.lookup[tuple(j[ok].T)]
        return out

    def describe(self) -> dict:
        return {
            "dimension": self.dim,
            "box": [[float(a), float(b)] for a, b in self.box],
            "resolutions": list(self.resolutions),
            "active_cells": self.size,
            "pruned_cells": self.pruned,
        }


def _prune_isolated(mask: np.ndarray) -> np.ndarray:
    # Repeatedly drop cells lacking an active neighbour along some axis.
    mask = mask.copy()
    while True:
        keep = np.ones_like(mask)
        for axis in range(mask.ndim):
            lo = np.zeros_like(mask)
            hi = np.zeros_like(mask)
            src = [slice(None)] * mask.ndim
            dst = [slice(None)] * mask.ndim
            src[axis], dst[axis] = slice(1, None), slice(None, -1)
            hi[tuple(dst)] = mask[tuple(src)]
            lo[tuple(src)] = mask[tuple(dst)]
            keep &= lo | hi
        new = mask & keep
        if (new == mask).all():
            return mask
        mask = new


def build_grid(
    N: int,
    box: Sequence[Sequence[float]],
    resolutions,
    predicate=None,
    prune_isolated: bool = False,
) -> Grid:
    """Build a cell-centred grid.

    ``predicate`` (text or parsed) selects active cells by their centres.
    With ``prune_isolated`` cells that have no active neighbour along some
    axis are removed (repeatedly) so finite differences are defined
    everywhere; the number removed is kept in ``Grid.pruned``.
    """
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    if isinstance(resolutions, (int, np.integer)):
        resolutions = (int(resolutions),) * N
    resolutions = tuple(int(n) for n in resolutions)
    if N < 1 or box.shape[0] != N or len(resolutions) != N:
        raise ValueError(f"box and resolutions must both have {N} axes")
    if not np.all(box[:, 0] < box[:, 1]):
        raise ValueError(f"invalid box {box.tolist()}: need a_i < b_i")
    if any(n < 2 for n in resolutions):
        raise ValueError(f"resolutions must be >= 2 per axis, got {resolutions}")

    if isinstance(predicate, str):
        predicate = parse_predicate(predicate)
    if predicate is None:
        mask = np.ones(resolutions, dtype=bool)
    else:
        if max_variable(predicate) > N:
            raise ValueError(f"predicate uses x{max_variable(predicate)} on a {N}-D grid")
        h = (box[:, 1] - box[:, 0]) / np.asarray(resolutions)
        idx = np.indices(resolutions).reshape(N, -1).T
        centers = box[:, 0] + (idx + 0.5) * h
        mask = evaluate_predicate(predicate, centers).reshape(resolutions)

    pruned = 0
    if prune_isolated and predicate is not None:
        before = int(mask.sum())
        mask = _prune_isolated(mask)
        pruned = before - int(mask.sum())
    if mask.sum() < 2:
        raise EmptyDomainError(
            f"domain has {int(mask.sum())} active cell(s) at resolutions {resolutions}; need >= 2"
        )
    return Grid(box, resolutions, mask, predicate, pruned)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            k = int(np.flatnonzero(~np.isfinite(v))[0])
            raise ValueError(f"non-finite value {v[k]} at active cell {k}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.grid.size, self.grid.cell_volume)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def __mul__(self, c):
        return GridFunction(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __add__(self, other):
        if other.grid is not self.grid:
            raise ValueError("grid functions live on different grids")
        return GridFunction(self.grid, self.values + other.values)


def sample(grid: Grid, e) -> GridFunction:
    """Evaluate an expression at every active cell centre."""
    if isinstance(e, str):
        e = parse_expr(e)
    if max_variable(e) > grid.dim:
        raise ValueError(f"expression uses x{max_variable(e)} on a {grid.dim}-D grid")
    try:
        values = evaluate(e, grid.centers)
    except EvalDomainError as err:
        raise EvalDomainError(
            f"domain error at active cell {err.cell} (index {tuple(grid.indices[err.cell])})",
            err.node, err.point,
        ) from err
    return GridFunction(grid, values)


def partial_derivative(u: GridFunction, axis: int) -> GridFunction:
    """Finite-difference derivative along ``axis`` (0-based).

    Central differences where both neighbours are active, second-order
    one-sided stencils where only one side has two active cells, and
    two-point differences where a row holds only two consecutive cells.
    """
    g = u.grid
    v = u.values
    h = g.h[axis]
    l1, r1 = g.neighbor(axis, -1), g.neighbor(axis, 1)
    l2, r2 = g.neighbor(axis, -2), g.neighbor(axis, 2)
    out = np.empty(g.size)

    central = (l1 >= 0) & (r1 >= 0)
    out[central] = (v[r1[central]] - v[l1[central]]) / (2 * h)

    fwd3 = (l1 < 0) & (r1 >= 0) & (r2 >= 0)
    out[fwd3] = (-3 * v[fwd3] + 4 * v[r1[fwd3]] - v[r2[fwd3]]) / (2 * h)
    fwd2 = (l1 < 0) & (r1 >= 0) & (r2 < 0)
    out[fwd2] = (v[r1[fwd2]] - v[fwd2]) / h

    bwd3 = (r1 < 0) & (l1 >= 0) & (l2 >= 0)
    out[bwd3] = (3 * v[bwd3] - 4 * v[l1[bwd3]] + v[l2[bwd3]]) / (2 * h)
    bwd2 = (r1 < 0) & (l1 >= 0) & (l2 < 0)
    out[bwd2] = (v[bwd2] - v[l1[bwd2]]) / h

    isolated = (l1 < 0) & (r1 < 0)
    if isolated.any():
        raise IsolatedCellError(axis, np.flatnonzero(isolated).tolist())
    return GridFunction(g, out)


def integrate(u: GridFunction) -> float:
    """Midpoint rule. ``np.sum`` is a fixed-order pairwise reduction."""
    return float(np.sum(u.values * u.weights))


def write_csv(path, u: GridFunction, extra: Optional[dict] = None) -> None:
    """Write ``i1..iN,x1..xN,value`` rows in active-cell order.

    ``extra`` maps additional column names to per-cell arrays.
    """
    g = u.grid
    n = g.dim
    extra = extra or {}
    header = [f"i{k + 1}" for k in range(n)] + [f"x{k + 1}" for k in range(n)] + ["value"]
    header += list(extra)
    cols = [np.asarray(c) for c in extra.values()]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in range(g.size):
            row = [int(i) for i in g.indices[k]]
            row += [repr(float(x)) for x in g.centers[k]]
            row.append(repr(float(u.values[k])))
            row += [repr(float(c[k])) for c in cols]
            w.writerow(row)


def read_csv(path, grid: Grid, column: str = "value") -> GridFunction:
    """Read a column written by :func:`write_csv` back onto ``grid``."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) != grid.size:
        raise ValueError(f"CSV has {len(rows)} rows, grid has {grid.size} active cells")
    values = np.empty(grid.size)
    for k, row in enumerate(rows):
        idx = tuple(int(row[f"i{d + 1}"]) for d in range(grid.dim))
        if tuple(grid.indices[k]) != idx:
            raise ValueError(f"row {k}: index {idx} does not match active cell {tuple(grid.indices[k])}")
        values[k] = float(row[column])
    return GridFunction(grid, values)


def measure(grid: Grid) -> float:
    return grid.size * grid.cell_volume
