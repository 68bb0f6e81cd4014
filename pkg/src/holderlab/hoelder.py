"""Anisotropic variable-exponent Hölder quotient, seminorm and norm.

For cells ``a != b`` the quotient is

    |u(a) - u(b)| / sum_i |x_i(a) - x_i(b)| ** min(beta_i(a), beta_i(b))

A direction with zero displacement contributes nothing to the sum, so the
denominator stays finite when some ``beta_i <= 0``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .exponents import BetaField
from .grid import GridFunction
from .norms import sup_norm
from .pairs import PairScanPolicy, iter_pair_chunks, scan_max

__all__ = [
    "HoelderResult", "SameCellError", "hoelder_quotient", "quotients",
    "hoelder_seminorm", "hoelder_norm", "write_pair_quotients",
]

PAIR_CSV_LIMIT = 100_000


class SameCellError(ValueError):
    pass


def quotients(u: GridFunction, beta: BetaField, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized quotient for index arrays ``a`` and ``b``."""
    X = u.grid.centers
    B = beta.values
    v = u.values
    den = np.zeros(a.size)
    for i in range(X.shape[1]):
        d = np.abs(X[a, i] - X[b, i])
        e = np.minimum(B[a, i], B[b, i])
        term = np.zeros(a.size)
        nz = d > 0
        term[nz] = np.float_power(d[nz], e[nz])
        den = den + term
    return np.abs(v[a] - v[b]) / den


def hoelder_quotient(u: GridFunction, beta: BetaField, a: int, b: int) -> float:
    if a == b:
        raise SameCellError(f"quotient needs two distinct cells, got {a} twice")
    return float(quotients(u, beta, np.array([a]), np.array([b]))[0])


@dataclass(frozen=True)
class HoelderResult:
    seminorm: float
    argmax: tuple  # (a, b) active-cell indices
    argmax_coords: tuple  # (coords of a, coords of b)
    sup_norm: float
    norm: float
    pairs_evaluated: int
    mode: str
    seed: object

    def to_dict(self) -> dict:
        return {
            "seminorm": self.seminorm,
            "sup_norm": self.sup_norm,
            "norm": self.norm,
            "argmax": {
                "a": self.argmax[0],
                "b": self.argmax[1],
                "x_a": list(self.argmax_coords[0]),
                "x_b": list(self.argmax_coords[1]),
            },
            "pairs_evaluated": self.pairs_evaluated,
            "mode": self.mode,
            "seed": self.seed,
        }


def _check(u, beta):
    if u.grid is not beta.grid:
        raise ValueError("function and beta field live on different grids")


def hoelder_seminorm(u: GridFunction, beta: BetaField, policy: PairScanPolicy | None = None) -> HoelderResult:
    """Largest quotient over the policy's pair set.

    ``norm`` and ``sup_norm`` are filled in as well, so this and
    :func:`hoelder_norm` return the same record.
    """
    _check(u, beta)
    policy = policy or PairScanPolicy()
    res = scan_max(u.grid, lambda a, b: quotients(u, beta, a, b), policy)
    X = u.grid.centers
    coords = (tuple(float(c) for c in X[res.a]), tuple(float(c) for c in X[res.b]))
    s = sup_norm(u)
    return HoelderResult(
        seminorm=res.value,
        argmax=(res.a, res.b),
        argmax_coords=coords,
        sup_norm=s,
        norm=s + res.value,
        pairs_evaluated=res.pairs,
        mode=res.mode,
        seed=policy.seed if res.mode == "sampled" else None,
    )


def hoelder_norm(u: GridFunction, beta: BetaField, policy: PairScanPolicy | None = None) -> HoelderResult:
    return hoelder_seminorm(u, beta, policy)


def write_pair_quotients(path, u: GridFunction, beta: BetaField, policy: PairScanPolicy) -> int:
    """Write ``a_index,b_index,quotient`` for every pair in the policy's set."""
    _check(u, beta)
    _, thunks = iter_pair_chunks(u.grid, policy)
    chunks = [t() for t in thunks]
    total = sum(a.size for a, _ in chunks)
    if total > PAIR_CSV_LIMIT:
        raise ValueError(f"{total} pairs exceeds the CSV export limit of {PAIR_CSV_LIMIT}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["a_index", "b_index", "quotient"])
        for a, b in chunks:
            q = quotients(u, beta, a, b)
            for i, j, v in zip(a.tolist(), b.tolist(), q.tolist()):
                w.writerow([i, j, repr(v)])
    return total
