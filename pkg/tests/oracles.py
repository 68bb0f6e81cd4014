"""Plain-Python reference computations, independent of the vectorized code."""

import math


def hoelder_brute(values, centers, beta):
    """Double loop over unordered pairs; returns (sup, a, b)."""
    n = len(values)
    best, arg = -math.inf, (-1, -1)
    for a in range(n):
        for b in range(a + 1, n):
            den = 0.0
            for i in range(len(centers[a])):
                d = abs(centers[a][i] - centers[b][i])
                if d > 0:
                    den = den + math.pow(d, min(beta[a][i], beta[b][i]))
            q = abs(values[a] - values[b]) / den
            if q > best:
                best, arg = q, (a, b)
    return best, arg


def log_hoelder_brute(values, centers):
    best = None
    n = len(values)
    for a in range(n):
        for b in range(a + 1, n):
            d = math.dist(centers[a], centers[b])
            if 0 < d < 0.5:
                q = abs(values[a] - values[b]) * math.log(1 / d)
                best = q if best is None else max(best, q)
    return best
