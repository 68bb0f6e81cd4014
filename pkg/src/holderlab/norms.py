"""Variable exponent modulars, Luxemburg norms and the anisotropic Sobolev norm."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exponents import ExponentVectorField
from .grid import GridFunction, partial_derivative

__all__ = [
    "NormResult", "BracketError", "modular", "luxemburg_norm", "sup_norm", "sobolev_norm",
    "REL_TOL", "MAX_ITER", "MAX_BRACKET_STEPS",
]

REL_TOL = 1e-10
MAX_ITER = 200
MAX_BRACKET_STEPS = 120


class BracketError(ArithmeticError):
    pass


@dataclass(frozen=True)
class NormResult:
    value: float
    iterations: int
    bracket_width: float
    cells: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "iterations": self.iterations,
            "bracket_width": self.bracket_width,
            "cells": self.cells,
        }


def _check_same_grid(u: GridFunction, p: GridFunction):
    if u.grid is not p.grid:
        raise ValueError("function and exponent live on different grids")


def _modular(values, p, w):
    with np.errstate(over="ignore"):
        return float(np.sum(w * np.abs(values) ** p))


def modular(u: GridFunction, p: GridFunction) -> float:
    """Midpoint quadrature of the integral of ``|u|^p(x)``."""
    _check_same_grid(u, p)
    return _modular(u.values, p.values, u.weights)


def luxemburg_norm(u: GridFunction, p: GridFunction, rel_tol: float = REL_TOL,
                   max_iter: int = MAX_ITER) -> NormResult:
    """The ``lam > 0`` with ``modular(u / lam) == 1``, by bisection.

    The bracket starts at ``max|u| * measure`` and is doubled or halved
    until it straddles the root.
    """
    _check_same_grid(u, p)
    v = u.values
    pv = p.values
    w = u.weights
    n = u.grid.size
    top = float(np.max(np.abs(v)))
    if top == 0.0:
        return NormResult(0.0, 0, 0.0, n)

    def rho(lam):
        return _modular(v / lam, pv, w)

    lam = top * float(np.sum(w))
    lo = hi = None
    r = rho(lam)
    steps = 0
    if r > 1:
        lo = lam
        while True:
            lam *= 2.0
            steps += 1
            if rho(lam) <= 1:
                hi = lam
                break
            lo = lam
            if steps >= MAX_BRACKET_STEPS:
                raise BracketError(f"no bracket after {steps} doublings (lambda={lam:g})")
    else:
        hi = lam
        while True:
            lam *= 0.5
            steps += 1
            if rho(lam) > 1:
                lo = lam
                break
            hi = lam
            if steps >= MAX_BRACKET_STEPS:
                raise BracketError(f"no bracket after {steps} halvings (lambda={lam:g})")

    it = 0
    while hi - lo > rel_tol * lo and it < max_iter:
        mid = 0.5 * (lo + hi)
        if rho(mid) > 1:
            lo = mid
        else:
            hi = mid
        it += 1
    return NormResult(0.5 * (lo + hi), it, hi - lo, n)


def sup_norm(u: GridFunction) -> float:
    return float(np.max(np.abs(u.values)))


def sobolev_norm(u: GridFunction, p: ExponentVectorField) -> NormResult:
    """``|u|_{L^{p_M}} + sum_i |d_i u|_{L^{p_i}}`` with ``p_M`` the pointwise max."""
    if u.grid is not p.grid:
        raise ValueError("function and exponents live on different grids")
    parts = [luxemburg_norm(u, p.p_M)]
    for i in range(p.N):
        parts.append(luxemburg_norm(partial_derivative(u, i), p.components[i]))
    value = 0.0
    for r in parts:
        value += r.value
    return NormResult(
        value,
        sum(r.iterations for r in parts),
        sum(r.bracket_width for r in parts),
        u.grid.size,
    )
