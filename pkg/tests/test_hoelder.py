import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holderlab.exponents import BetaField, ExponentVectorField, beta_exponents
from holderlab.grid import build_grid, sample
from holderlab.hoelder import (
    SameCellError, hoelder_norm, hoelder_quotient, hoelder_seminorm, quotients, write_pair_quotients,
)
from holderlab.norms import sup_norm
from holderlab.pairs import PairScanPolicy, axis_neighbor_pairs
from oracles import hoelder_brute

UNIT2 = [(0, 1), (0, 1)]
EXH = PairScanPolicy("exhaustive")


def const_beta(grid, *b):
    return BetaField(grid, np.tile(np.asarray(b, dtype=float), (grid.size, 1)))


@pytest.fixture(scope="module")
def g16():
    return build_grid(2, UNIT2, 16)


def cell(grid, i, j):
    return int(grid.lookup[i, j])


def test_quotient_examples():
    g = build_grid(2, UNIT2, 4)
    b = const_beta(g, 1, 1)
    u = sample(g, "x1")
    assert hoelder_quotient(sample(g, "7"), b, 0, 5) == 0.0
    assert hoelder_quotient(u, b, cell(g, 0, 1), cell(g, 2, 1)) == 1.0
    assert hoelder_quotient(u, b, cell(g, 0, 0), cell(g, 2, 2)) == 0.5
    with pytest.raises(SameCellError):
        hoelder_quotient(u, b, 3, 3)


def test_seminorm_lipschitz_case(g16):
    u = sample(g16, "x1")
    r = hoelder_seminorm(u, const_beta(g16, 1, 1), EXH)
    assert r.seminorm == 1.0
    (xa, ya), (xb, yb) = r.argmax_coords
    assert ya == yb and xa != xb
    assert r.argmax == (0, 16)


def test_seminorm_half_exponent(g16):
    u = sample(g16, "x1")
    b = const_beta(g16, 0.5, 1)
    r = hoelder_seminorm(u, b, EXH)
    best, arg = hoelder_brute(u.values.tolist(), g16.centers.tolist(), b.values.tolist())
    assert r.seminorm == best and r.argmax == arg
    assert r.seminorm == pytest.approx(0.9375 ** 0.5, rel=1e-15)


def test_constant_function(g16):
    r = hoelder_seminorm(sample(g16, "2"), const_beta(g16, 0.3, 0.6), EXH)
    assert r.seminorm == 0.0 and r.argmax == (0, 1)
    n = hoelder_norm(sample(g16, "1"), const_beta(g16, 0.3, 0.6), EXH)
    assert n.norm == 1.0 and n.sup_norm == 1.0


def test_norm_combines_sup_and_seminorm(g16):
    r = hoelder_norm(sample(g16, "x1"), const_beta(g16, 1, 1), EXH)
    assert r.sup_norm == 0.96875 and r.seminorm == 1.0 and r.norm == 1.96875
    assert r.norm == r.sup_norm + r.seminorm


def test_scaling(g16):
    b = const_beta(g16, 0.4, 0.7)
    u = sample(g16, "sin(3*x1)*x2")
    base = hoelder_norm(u, b, EXH)
    five = hoelder_norm(5 * u, b, EXH)
    assert five.norm == pytest.approx(5 * base.norm, rel=1e-12)
    for c in (2.0, 0.25, -8.0):
        r = hoelder_seminorm(c * u, b, EXH)
        assert r.seminorm == abs(c) * base.seminorm


def test_argmax_recomputes_bit_identically(g16):
    p = ExponentVectorField.from_exprs(g16, ["3 + x1", "4 - x2"])
    b = beta_exponents(p)
    u = sample(g16, "exp(x1)*cos(2*x2)")
    for policy in (EXH, PairScanPolicy("sampled", 5000, 9, exhaustive_threshold=10)):
        r = hoelder_seminorm(u, b, policy)
        assert hoelder_quotient(u, b, *r.argmax) == r.seminorm


def test_pair_symmetry(g16):
    b = beta_exponents(ExponentVectorField.from_exprs(g16, ["2.5 + x1*x2", "3"]))
    u = sample(g16, "x1^2 - x2")
    rng = np.random.default_rng(1)
    a = rng.integers(0, g16.size, 500)
    c = (a + 1 + rng.integers(0, g16.size - 1, 500)) % g16.size
    assert np.array_equal(quotients(u, b, a, c), quotients(u, b, c, a))


def test_zero_iff_constant():
    g = build_grid(2, UNIT2, 6, "x1 + x2 < 1.3")
    b = const_beta(g, 0.5, 0.5)
    assert hoelder_seminorm(sample(g, "4"), b, EXH).seminorm == 0.0
    v = np.full(g.size, 4.0)
    v[-1] += 1e-9
    assert hoelder_seminorm(sample(g, "4").with_values(v), b, EXH).seminorm > 0


def test_norm_dominates_sup(g16):
    b = const_beta(g16, 0.2, 0.9)
    for src in ("x1*x2", "cos(5*x1)", "-3"):
        u = sample(g16, src)
        assert hoelder_norm(u, b, EXH).norm >= sup_norm(u)


def test_sampled_is_seeded_and_bounded(g16):
    b = const_beta(g16, 0.6, 0.8)
    u = sample(g16, "sin(4*x1)*exp(x2)")
    sampled = PairScanPolicy("sampled", 3000, 42, exhaustive_threshold=100)
    r1 = hoelder_seminorm(u, b, sampled)
    r2 = hoelder_seminorm(u, b, sampled)
    assert r1 == r2 and r1.mode == "sampled" and r1.seed == 42
    na, _ = axis_neighbor_pairs(g16)
    assert r1.pairs_evaluated == 3000 + na.size
    assert r1.seminorm <= hoelder_seminorm(u, b, EXH).seminorm


def test_sampled_equals_exhaustive_on_neighbor_argmax(g16):
    u = sample(g16, "x1")
    b = const_beta(g16, 1, 1)
    exh = hoelder_seminorm(u, b, EXH)
    sam = hoelder_seminorm(u, b, PairScanPolicy("sampled", 10, 0, exhaustive_threshold=1))
    assert exh.argmax == (0, 16)
    assert sam.seminorm == exh.seminorm and sam.argmax == exh.argmax


def test_policy_rules():
    g = build_grid(2, UNIT2, 8)
    assert PairScanPolicy("sampled", seed=None).resolve(g.size) == "exhaustive"
    with pytest.raises(ValueError):
        PairScanPolicy("sampled", seed=None, exhaustive_threshold=5).resolve(g.size)
    with pytest.raises(ValueError):
        PairScanPolicy("random")


def test_thread_count_does_not_change_results(g16, monkeypatch):
    big = build_grid(2, UNIT2, 40)
    b = beta_exponents(ExponentVectorField.from_exprs(big, ["3 + x1", "3.5"]))
    u = sample(big, "sin(3*x1 + x2)")
    policy = PairScanPolicy("sampled", 600_000, 5, exhaustive_threshold=1000)
    out = []
    for t in ("1", "8"):
        monkeypatch.setenv("HOLDERLAB_THREADS", t)
        out.append((hoelder_seminorm(u, b, policy), hoelder_seminorm(u, b, EXH)))
    assert out[0] == out[1]


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0), st.floats(0.0, 0.04))
def test_quotient_non_increasing_in_beta(b1, b2, drop):
    g = build_grid(2, UNIT2, 6)
    u = sample(g, "x1*exp(x2)")
    rng = np.random.default_rng(0)
    a = rng.integers(0, g.size, 200)
    c = (a + 1 + rng.integers(0, g.size - 1, 200)) % g.size
    hi = quotients(u, const_beta(g, b1, b2), a, c)
    lo = quotients(u, const_beta(g, max(b1 - drop, 0.0), b2), a, c)
    assert np.all(lo <= hi + 1e-12)


def test_result_json(g16):
    r = hoelder_norm(sample(g16, "x1"), const_beta(g16, 1, 1), EXH)
    d = json.loads(json.dumps(r.to_dict()))
    assert d["argmax"]["x_a"] == list(r.argmax_coords[0]) and d["mode"] == "exhaustive"


def test_pair_csv_export(tmp_path):
    g = build_grid(2, UNIT2, 5)
    b = const_beta(g, 0.5, 0.5)
    u = sample(g, "x1 + x2^2")
    n = write_pair_quotients(tmp_path / "q.csv", u, b, EXH)
    with open(tmp_path / "q.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["a_index", "b_index", "quotient"] and len(rows) == n + 1 == 301
    a, c = int(rows[7][0]), int(rows[7][1])
    assert float(rows[7][2]) == hoelder_quotient(u, b, a, c)
    with pytest.raises(ValueError):
        write_pair_quotients(tmp_path / "big.csv", sample(build_grid(2, UNIT2, 30), "x1"),
                             const_beta(build_grid(2, UNIT2, 30), 1, 1), EXH)
