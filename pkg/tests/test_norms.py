import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holderlab.embedlab import FunctionFamily
from holderlab.exponents import ExponentVectorField
from holderlab.grid import GridFunction, build_grid, integrate, partial_derivative, sample
from holderlab.norms import (
    REL_TOL, BracketError, NormResult, luxemburg_norm, modular, sobolev_norm, sup_norm,
)

UNIT2 = [(0, 1), (0, 1)]


@pytest.fixture(scope="module")
def g16():
    return build_grid(2, UNIT2, 16)


def trig_members(count, seed=11):
    return FunctionFamily(count=count, max_frequency=3, seed=seed).members()


def test_modular_examples(g16):
    assert modular(sample(g16, "2"), sample(g16, "2")) == pytest.approx(4.0, abs=1e-13)
    assert modular(sample(g16, "1"), sample(g16, "1.5 + x1*x2")) == pytest.approx(1.0, abs=1e-13)
    g = build_grid(1, [(0, 1)], 10)
    p = GridFunction(g, np.where(g.centers[:, 0] < 0.5, 2.0, 3.0))
    assert modular(sample(g, "3"), p) == pytest.approx(18.0, abs=1e-12)


def test_luxemburg_simple_cases(g16):
    r = luxemburg_norm(sample(g16, "1"), sample(g16, "2"))
    assert r.value == pytest.approx(1.0, rel=1e-10)
    r = luxemburg_norm(sample(g16, "0"), sample(g16, "2"))
    assert r.value == 0.0 and r.iterations == 0


def test_luxemburg_closed_form():
    g = build_grid(2, UNIT2, 256)
    r = luxemburg_norm(sample(g, "x1"), sample(g, "2"))
    assert abs(r.value - 1 / math.sqrt(3)) <= 1e-4
    assert r.bracket_width <= REL_TOL * r.value
    assert r.cells == 256 * 256


def test_constant_exponent_reduction(g16):
    for u_src in ["sin(3*x1) + x2^2", "exp(x1*x2) - 2"]:
        u = sample(g16, u_src)
        for p in (1.5, 2.0, 4.0, 7.3):
            direct = np.sum(u.weights * np.abs(u.values) ** p) ** (1 / p)
            got = luxemburg_norm(u, sample(g16, repr(p))).value
            assert got == pytest.approx(direct, rel=1e-9)


def test_unit_ball_and_homogeneity(g16):
    p = sample(g16, "2 + sin(pi*x1)*x2")
    for m in trig_members(10):
        u = sample(g16, m)
        n = luxemburg_norm(u, p).value
        assert modular(u * (1 / n), p) == pytest.approx(1.0, abs=1e-8)
        for c in (0.1, 3, 100):
            assert luxemburg_norm(c * u, p).value / (c * n) == pytest.approx(1.0, abs=2 * REL_TOL)


def test_monotone_and_triangle(g16):
    p = sample(g16, "3 - x1")
    ms = [sample(g16, m) for m in trig_members(21, seed=5)]
    for u, v in zip(ms, ms[1:]):
        nu = luxemburg_norm(u, p).value
        nv = luxemburg_norm(v, p).value
        assert luxemburg_norm(u + v, p).value <= nu + nv + 1e-8
        small = u.with_values(u.values * np.minimum(1.0, np.abs(v.values) / (np.abs(u.values) + 1e-300)))
        assert luxemburg_norm(small, p).value <= nv + 1e-9


def test_bracket_failure_on_extreme_scale():
    # Cell volume 1e-60 with p = 10 puts the root ~180 doublings above the start.
    g = build_grid(2, [(0, 1e-30), (0, 1e-30)], 4)
    with pytest.raises(BracketError):
        luxemburg_norm(sample(g, "1"), sample(g, "10"))


def test_sup_norm(g16):
    g = build_grid(1, [(0, 1)], 256)
    u = sample(g, "sin(pi*x1)")
    assert sup_norm(u) == max(abs(v) for v in u.values.tolist())
    assert sup_norm(sample(g16, "-3")) == 3.0
    assert sup_norm(sample(g16, "0")) == 0.0


def test_sobolev_examples(g16):
    p4 = ExponentVectorField.from_exprs(g16, ["4"])
    assert sobolev_norm(sample(g16, "1"), p4).value == pytest.approx(1.0, rel=1e-9)
    assert sobolev_norm(sample(g16, "0"), p4).value == 0.0
    g = build_grid(2, UNIT2, 256)
    p2 = ExponentVectorField.from_exprs(g, ["2"])
    assert abs(sobolev_norm(sample(g, "x1"), p2).value - (1 / math.sqrt(3) + 1)) <= 1e-4


def test_sobolev_uses_pointwise_max_exponent(g16):
    p = ExponentVectorField.from_exprs(g16, ["3 + x1", "3.5"])
    u = sample(g16, "1 + x1*x2")
    expected = luxemburg_norm(u, p.p_M).value
    for i in range(2):
        expected += luxemburg_norm(partial_derivative(u, i), p.components[i]).value
    assert sobolev_norm(u, p).value == expected


def test_norm_result_json():
    r = NormResult(1.5, 30, 1e-11, 256)
    assert json.loads(json.dumps(r.to_dict())) == {
        "value": 1.5, "iterations": 30, "bracket_width": 1e-11, "cells": 256}


@settings(max_examples=25, deadline=None)
@given(st.floats(1.1, 6.0), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_homogeneity_property(p, c):
    g = build_grid(2, UNIT2, 8)
    u = sample(g, "cos(2*x1) + x2")
    pv = sample(g, f"{p!r} + 0.5*x1")
    ratio = luxemburg_norm(c * u, pv).value / (abs(c) * luxemburg_norm(u, pv).value)
    assert abs(ratio - 1) <= 2 * REL_TOL
