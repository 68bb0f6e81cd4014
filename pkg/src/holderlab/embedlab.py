"""Empirical surveys of the Sobolev-to-Hölder embedding.

An embedding survey samples a family of smooth functions on a ladder of
rectangular grids and records ``hoelder_norm / sobolev_norm`` for each; the
largest ratio per level estimates the embedding constant. Counterexample
runs track the largest Hölder quotient on cusp domains under refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import __version__
from .exponents import (
    ExponentVectorField, HypothesisReport, beta_exponents, beta_formula, validate_hypotheses,
)
from .exprlang import evaluate, parse_expr, unparse
from .grid import EmptyDomainError, Grid, build_grid, sample
from .hoelder import hoelder_norm
from .norms import sobolev_norm
from .pairs import PairScanPolicy

__all__ = [
    "FunctionFamily", "EmbeddingReport", "CounterexampleReport", "HypothesisViolationError",
    "embedding_survey", "corollary1_check", "corollary2_trend", "counterexample_run",
    "counterexample_preset", "application_preset", "APPLICATIONS",
]


class HypothesisViolationError(ValueError):
    def __init__(self, report: HypothesisReport, level=None):
        self.report = report
        where = f" at resolution {level}" if level is not None else ""
        super().__init__(
            f"p_m(x) > N fails at {report.violating_cells} of {report.active_cells} cells{where}"
        )


def _resolutions(level, N):
    if isinstance(level, (int, np.integer)):
        return (int(level),) * N
    return tuple(int(n) for n in level)


# ---------------------------------------------------------------------------
# Function families


@dataclass(frozen=True)
class FunctionFamily:
    """Either ``kind="trig"`` (seeded random trigonometric polynomials) or
    ``kind="explicit"`` with expression texts in ``exprs``.

    A trig member is ``sum_t c_t cos(pi (k_t . x) + phi_t)`` with integer
    ``|k_t,i| <= max_frequency``, ``|c_t| <= coefficient_bound`` and a
    uniform phase.
    """

    kind: str = "trig"
    count: int = 20
    max_frequency: int = 3
    terms: int = 4
    coefficient_bound: float = 1.0
    seed: int = 0
    dim: int = 2
    exprs: tuple = ()

    @classmethod
    def explicit(cls, exprs: Sequence[str]) -> "FunctionFamily":
        exprs = tuple(unparse(parse_expr(e)) if isinstance(e, str) else unparse(e) for e in exprs)
        return cls(kind="explicit", count=len(exprs), exprs=exprs)

    def sources(self) -> list:
        if self.kind == "explicit":
            return list(self.exprs)
        if self.kind != "trig":
            raise ValueError(f"unknown family kind {self.kind!r}")
        rng = np.random.default_rng(self.seed)
        out = []
        for _ in range(self.count):
            terms = []
            for _ in range(self.terms):
                k = rng.integers(-self.max_frequency, self.max_frequency + 1, size=self.dim)
                c = float(rng.uniform(-self.coefficient_bound, self.coefficient_bound))
                phi = float(rng.uniform(0.0, 2.0 * math.pi))
                arg = " + ".join(f"{int(ki)}*x{i + 1}" for i, ki in enumerate(k))
                terms.append(f"{c!r}*cos(pi*({arg}) + {phi!r})")
            out.append(" + ".join(terms))
        return out

    def members(self) -> list:
        return [parse_expr(s) for s in self.sources()]

    def to_dict(self) -> dict:
        if self.kind == "explicit":
            return {"kind": "explicit", "count": self.count, "exprs": list(self.exprs)}
        return {
            "kind": "trig", "count": self.count, "max_frequency": self.max_frequency,
            "terms": self.terms, "coefficient_bound": self.coefficient_bound,
            "seed": self.seed, "dim": self.dim,
        }


# ---------------------------------------------------------------------------
# Embedding survey


@dataclass
class EmbeddingReport:
    spec: dict
    seed: Optional[int]
    levels: list = field(default_factory=list)
    functions: list = field(default_factory=list)

    def max_ratio(self, level_index: int) -> float:
        return self.levels[level_index]["max_ratio"]

    def to_dict(self) -> dict:
        return {
            "header": {"spec": self.spec, "seed": self.seed, "version": __version__},
            "levels": self.levels,
            "functions": self.functions,
        }

    def csv_rows(self):
        yield ["level", "resolution", "function", "sobolev", "hoelder", "ratio"]
        for r in self.functions:
            yield [r["level"], "x".join(map(str, r["resolution"])), r["index"],
                   r["sobolev"]["value"], r["hoelder"]["norm"], r["ratio"]]


def embedding_survey(
    p_exprs,
    family: FunctionFamily,
    box,
    ladder,
    policy: Optional[PairScanPolicy] = None,
    allow_violation: bool = False,
    literal_p1: bool = False,
) -> EmbeddingReport:
    """Sobolev norm, Hölder norm and their ratio for every (level, member)."""
    box = [tuple(map(float, ab)) for ab in box]
    N = len(box)
    if isinstance(p_exprs, str):
        p_exprs = [p_exprs]
    p_trees = [parse_expr(e) if isinstance(e, str) else e for e in p_exprs]
    if len(p_trees) == 1:
        p_trees = p_trees * N
    policy = policy or PairScanPolicy(seed=0)
    members = family.members()
    sources = [unparse(m) for m in members]

    spec = {
        "box": [list(ab) for ab in box],
        "p": [unparse(t) for t in p_trees],
        "family": family.to_dict(),
        "ladder": [list(_resolutions(lv, N)) for lv in ladder],
        "policy": policy.to_dict(),
        "allow_hypothesis_violation": allow_violation,
        "eq2_literal_p1": literal_p1,
    }
    report = EmbeddingReport(spec=spec, seed=policy.seed)

    for li, level in enumerate(ladder):
        res = _resolutions(level, N)
        grid = build_grid(N, box, res)
        p = ExponentVectorField([sample(grid, t) for t in p_trees])
        hyp = validate_hypotheses(p)
        if not hyp.satisfied and not allow_violation:
            raise HypothesisViolationError(hyp, res)
        beta = beta_exponents(p, literal_p1)
        ratios = []
        for mi, m in enumerate(members):
            u = sample(grid, m)
            s = sobolev_norm(u, p)
            h = hoelder_norm(u, beta, policy)
            ratio = h.norm / s.value if s.value > 0 else math.nan
            ratios.append(ratio)
            report.functions.append({
                "level": li,
                "resolution": list(res),
                "index": mi,
                "expr": sources[mi],
                "sobolev": s.to_dict(),
                "hoelder": h.to_dict(),
                "ratio": ratio,
            })
        finite = [r for r in ratios if not math.isnan(r)]
        best = max(finite) if finite else math.nan
        report.levels.append({
            "level": li,
            "resolution": list(res),
            "grid": grid.describe(),
            "hypothesis": hyp.to_dict(),
            "beta": beta.summary(),
            "max_ratio": best,
            "argmax_function": ratios.index(best) if finite else None,
        })
    return report


# ---------------------------------------------------------------------------
# Uniform-exponent checks


def corollary1_check(p, N: int, grid: Grid, tol: float = 1e-12) -> dict:
    """Uniform exponent vectors must give ``beta_i = 1 - N/p`` in every direction."""
    tree = parse_expr(p) if isinstance(p, str) else p
    pv = ExponentVectorField([sample(grid, tree)] * N)
    beta = beta_exponents(pv).values
    expected = 1.0 - N / pv.values[:, 0]
    dev = float(np.max(np.abs(beta - expected[:, None])))
    return {
        "p": unparse(tree),
        "N": N,
        "cells": grid.size,
        "max_deviation": dev,
        "tolerance": tol,
        "passed": dev <= tol,
        "beta_min": float(beta.min()),
        "beta_max": float(beta.max()),
    }


def corollary2_trend(ladder: Sequence[float], N: int) -> dict:
    """Beta for constant uniform exponents must rise strictly and stay below 1."""
    ladder = [float(v) for v in ladder]
    low = [v for v in ladder if not v > N]
    if low:
        raise HypothesisViolationError(
            HypothesisReport(N, False, len(low), len(ladder), [min(ladder)], [max(ladder)])
        )
    betas = [float(beta_formula(np.full(N, v))[0]) for v in ladder]
    increasing = all(b1 < b2 for b1, b2 in zip(betas, betas[1:]))
    below_one = all(b < 1 for b in betas)
    return {
        "N": N,
        "ladder": ladder,
        "beta": betas,
        "strictly_increasing": increasing,
        "below_one": below_one,
        "passed": increasing and below_one,
    }


# ---------------------------------------------------------------------------
# Cusp counterexamples


@dataclass(frozen=True)
class CuspSpec:
    id: str
    box: tuple
    predicate: str
    u: str
    p: tuple
    # boundary curves y = f(x), as expression texts in x1, with x1 range
    curves: tuple = ()

    def to_dict(self) -> dict:
        return {
            "id": self.id, "box": [list(ab) for ab in self.box], "predicate": self.predicate,
            "u": self.u, "p": list(self.p),
            "boundary_curves": [{"f": f, "x1_range": list(r)} for f, r in self.curves],
        }


def counterexample_preset(name: str, alpha: float = 3.0) -> CuspSpec:
    if name == "mild-cusp":
        return CuspSpec(
            "mild-cusp", ((0.0, 1.0), (0.0, 2.0)), "x1^2 < x2 & x2 < 2*x1^2", "sqrt(x1)",
            ("4", "4"), (("x1^2", (0.0, 1.0)), ("2*x1^2", (0.0, 1.0))),
        )
    if name == "pronounced-cusp":
        a = repr(float(alpha))
        return CuspSpec(
            f"pronounced-cusp({a})", ((-1.0, 1.0), (0.0, 1.0)), f"x2 > abs(x1)^{a}",
            f"sqrt(x2 - abs(x1)^{a})", ("2 + sin(pi*x1)", "2 + cos(pi*x2)"),
            ((f"abs(x1)^{a}", (-1.0, 1.0)),),
        )
    raise ValueError(f"unknown counterexample preset {name!r}")


def _curve_distance(point, f_text, x_range, samples=4001):
    f = parse_expr(f_text)
    t = np.linspace(x_range[0], x_range[1], samples)
    ft = evaluate(f, t[:, None])
    d2 = (t - point[0]) ** 2 + (ft - point[1]) ** 2
    k = int(np.argmin(d2))
    lo = t[max(k - 1, 0)]
    hi = t[min(k + 1, samples - 1)]

    def obj(s):
        return (s - point[0]) ** 2 + (float(evaluate(f, [[s]])[0]) - point[1]) ** 2

    r = minimize_scalar(obj, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    return math.sqrt(min(float(d2[k]), float(r.fun)))


def _boundary_distance(spec: CuspSpec, grid: Grid, point) -> Optional[float]:
    if spec.curves:
        return min(_curve_distance(point, f, r) for f, r in spec.curves)
    # No analytic boundary: fall back to the nearest inactive cell centre.
    idx = np.argwhere(~grid.mask)
    if idx.size == 0:
        return None
    centers = grid.box[:, 0] + (idx + 0.5) * grid.h
    return float(np.sqrt(np.min(np.sum((centers - np.asarray(point)) ** 2, axis=1))))


@dataclass
class CounterexampleReport:
    spec: dict
    seed: Optional[int]
    levels: list = field(default_factory=list)
    skipped_levels: list = field(default_factory=list)

    @property
    def growth_factors(self) -> list:
        q = [lv["max_quotient"] for lv in self.levels]
        return [b / a if a > 0 else (math.nan if b == 0 else math.inf) for a, b in zip(q, q[1:])]

    @property
    def sobolev_changes(self) -> list:
        s = [lv["sobolev_norm"] for lv in self.levels]
        return [abs(b - a) / a for a, b in zip(s, s[1:])]

    def to_dict(self) -> dict:
        return {
            "header": {"spec": self.spec, "seed": self.seed, "version": __version__},
            "levels": self.levels,
            "growth_factors": self.growth_factors,
            "sobolev_relative_changes": self.sobolev_changes,
            "skipped_levels": self.skipped_levels,
        }

    def csv_rows(self):
        yield ["level", "resolution", "max_quotient", "growth_factor", "sobolev_norm",
               "argmax_distance_to_cusp"]
        g = [None] + self.growth_factors
        for k, lv in enumerate(self.levels):
            yield [k, "x".join(map(str, lv["resolution"])), lv["max_quotient"], g[k],
                   lv["sobolev_norm"], lv["argmax_distance_to_cusp"]]


def counterexample_run(
    spec,
    ladder,
    policy: Optional[PairScanPolicy] = None,
    literal_p1: bool = False,
) -> CounterexampleReport:
    """Refinement study of the largest Hölder quotient on a cusp domain.

    ``spec`` is a preset name, a :class:`CuspSpec`, or a dict with keys
    ``box``, ``predicate``, ``u`` and ``p``. Levels whose mask is empty are
    skipped and listed in ``skipped_levels``. Cells without an axis
    neighbour are pruned from the mask so that derivatives exist.
    """
    if isinstance(spec, str):
        spec = counterexample_preset(spec)
    elif isinstance(spec, dict):
        spec = CuspSpec(
            spec.get("id", "custom"), tuple(tuple(map(float, ab)) for ab in spec["box"]),
            spec["predicate"], spec["u"], tuple(spec["p"]), tuple(spec.get("curves", ())),
        )
    if len(ladder) < 3:
        raise ValueError("a counterexample ladder needs at least 3 levels")
    policy = policy or PairScanPolicy("sampled", 1_000_000, 0)
    N = len(spec.box)
    u_tree = parse_expr(spec.u)
    p_trees = [parse_expr(t) for t in spec.p]
    if len(p_trees) == 1:
        p_trees = p_trees * N

    out = dict(spec.to_dict(), ladder=[list(_resolutions(lv, N)) for lv in ladder],
               policy=policy.to_dict(), eq2_literal_p1=literal_p1)
    report = CounterexampleReport(spec=out, seed=policy.seed)
    for level in ladder:
        res = _resolutions(level, N)
        try:
            grid = build_grid(N, spec.box, res, spec.predicate, prune_isolated=True)
        except EmptyDomainError:
            report.skipped_levels.append(list(res))
            continue
        p = ExponentVectorField([sample(grid, t) for t in p_trees])
        beta = beta_exponents(p, literal_p1)
        u = sample(grid, u_tree)
        h = hoelder_norm(u, beta, policy)
        s = sobolev_norm(u, p)
        xa, xb = h.argmax_coords
        dist = [_boundary_distance(spec, grid, x) for x in (xa, xb)]
        dist = None if any(d is None for d in dist) else min(dist)
        report.levels.append({
            "resolution": list(res),
            "grid": grid.describe(),
            "hypothesis": validate_hypotheses(p).to_dict(),
            "beta": beta.summary(),
            "max_quotient": h.seminorm,
            "argmax": h.to_dict()["argmax"],
            "pairs_evaluated": h.pairs_evaluated,
            "mode": h.mode,
            "sobolev_norm": s.value,
            "argmax_distance_to_cusp": dist,
        })
    if not report.levels:
        raise EmptyDomainError(f"mask is empty at every level of {report.skipped_levels}")
    return report


# ---------------------------------------------------------------------------
# Application presets

APPLICATIONS = {
    "heat": {
        "box": ((0.0, 1.0), (0.0, 2.0)),
        "p": ("3 + sin(pi*x)", "2 + 0.5*cos(pi*y)"),
        "u": "sin(pi*x)*exp(-y)",
    },
    "porous": {
        "box": ((0.0, 1.0), (0.0, 3.0)),
        "p": ("4 - 0.1*x", "3 + 0.2*y"),
        "u": "sin(2*pi*x)*y^2*exp(-y)",
    },
}


def application_preset(
    id: str,
    resolutions=64,
    policy: Optional[PairScanPolicy] = None,
    allow_violation: bool = True,
    literal_p1: bool = False,
) -> EmbeddingReport:
    """Single-function survey on the heat-conduction or porous-media preset.

    The heat preset's second exponent dips below 2, so it only runs with
    ``allow_violation``; the report counts the offending cells.
    """
    if id not in APPLICATIONS:
        raise ValueError(f"unknown application preset {id!r}; choose from {sorted(APPLICATIONS)}")
    app = APPLICATIONS[id]
    report = embedding_survey(
        app["p"], FunctionFamily.explicit([app["u"]]), app["box"], [resolutions],
        policy or PairScanPolicy(seed=0), allow_violation, literal_p1,
    )
    report.spec["preset"] = id
    return report

