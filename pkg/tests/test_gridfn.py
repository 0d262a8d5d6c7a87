import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lipfix import (
    EvalDiagnostics,
    GridFunction,
    GridMismatch,
    bl_norm,
    from_expr,
    from_values,
    lin_comb,
    lip_norm,
    lip_seminorm,
    parse,
    sup_norm,
)
from lipfix.gridfn import read_csv, refine_double, write_csv


def test_from_expr_sampling():
    u = from_expr(parse("x"), 0.0, 1.0, 2)
    assert list(u.values) == [0.0, 1.0]
    v = from_expr(parse("x^2"), 0.0, 2.0, 3)
    assert list(v.values) == [0.0, 1.0, 4.0]
    w = from_expr(parse("log(x)"), 1.0, 16.0, 4)
    assert list(w.values) == [0.0, math.log(6.0), math.log(11.0), math.log(16.0)]


def test_eval_reproduces_linear_function():
    u = from_expr(parse("x"), 0.0, 1.0, 11)
    assert u.eval(0.37) == pytest.approx(0.37, abs=4 * np.spacing(1.0))


@given(
    a=st.floats(-50, 50, allow_nan=False),
    b=st.floats(-50, 50, allow_nan=False),
    t=st.floats(0, 1, allow_nan=False),
)
@settings(max_examples=200, deadline=None)
def test_eval_reproduces_affine_within_4_ulp(a, b, t):
    lo, hi = -2.0, 3.0
    nodes = np.linspace(lo, hi, 17)
    u = from_values(lo, hi, a * nodes + b)
    x = lo + (hi - lo) * float(t)
    exact = a * x + b
    assert abs(u.eval(x) - exact) <= 4 * np.spacing(max(abs(exact), abs(a) * (hi - lo) + abs(b), 1e-300))


def test_eval_at_nodes_exact():
    u = from_expr(parse("log(x)"), 1.0, 16.0, 101)
    for j, x in enumerate(u.nodes()):
        assert u.eval(float(x)) == u.values[j]


def test_eval_clamps_and_counts():
    u = from_values(0.0, 1.0, [0.0, 1.0])
    diag = EvalDiagnostics()
    assert u.eval(2.0, diag) == 1.0
    assert u.eval(-1.0, diag) == 0.0
    assert u.eval(0.5, diag) == 0.5
    assert diag.out_of_range == 2


def test_lin_comb():
    u = from_expr(parse("x"), 0.0, 1.0, 9)
    one = from_expr(parse("1"), 0.0, 1.0, 9)
    zero = lin_comb(1.0, u, -1.0, u)
    assert np.all(zero.values == 0.0)
    zero2 = lin_comb(0.0, u, 0.0, one)
    assert np.all(zero2.values == 0.0)
    combo = lin_comb(2.0, u, 3.0, one)
    assert np.allclose(combo.values, 2.0 * u.nodes() + 3.0, rtol=0, atol=1e-15)


def test_lin_comb_mismatch():
    u = from_expr(parse("x"), 0.0, 1.0, 9)
    v = from_expr(parse("x"), 0.0, 1.0, 8)
    with pytest.raises(GridMismatch):
        lin_comb(1.0, u, 1.0, v)


def test_norms_on_identity():
    u = from_expr(parse("x"), 0.0, 1.0, 33)
    assert lip_seminorm(u) == pytest.approx(1.0, abs=1e-12)
    assert sup_norm(u) == 1.0
    assert lip_norm(u, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert lip_norm(u, 1.0) == pytest.approx(2.0, abs=1e-12)
    assert bl_norm(u) == pytest.approx(2.0, abs=1e-12)


def test_norms_on_constant():
    u = from_expr(parse("5"), 0.0, 1.0, 5)
    assert lip_seminorm(u) == 0.0
    assert lip_norm(u, 0.25) == 5.0
    assert bl_norm(u) == 5.0


def test_abs_slopes():
    u = from_expr(parse("abs(x)"), -1.0, 1.0, 21)  # odd count: node at 0
    assert lip_seminorm(u) == pytest.approx(1.0, abs=1e-12)


def test_zero_norms():
    u = from_expr(parse("0"), 0.0, 1.0, 5)
    assert bl_norm(u) == 0.0


def _values_strategy():
    return st.lists(
        st.floats(-100, 100, allow_nan=False, allow_infinity=False),
        min_size=3,
        max_size=24,
    )


@given(vals=_values_strategy(), wals=_values_strategy())
@settings(max_examples=150, deadline=None)
def test_norm_triangle_inequality(vals, wals):
    n = min(len(vals), len(wals))
    u = from_values(0.0, 1.0, vals[:n])
    v = from_values(0.0, 1.0, wals[:n])
    s = lin_comb(1.0, u, 1.0, v)
    slack = 1e-12 * (1.0 + bl_norm(u) + bl_norm(v))
    assert bl_norm(s) <= bl_norm(u) + bl_norm(v) + slack
    assert lip_norm(s, 0.0) <= lip_norm(u, 0.0) + lip_norm(v, 0.0) + slack


@given(vals=_values_strategy(), a=st.floats(-10, 10, allow_nan=False))
@settings(max_examples=150, deadline=None)
def test_norm_absolute_homogeneity(vals, a):
    u = from_values(0.0, 1.0, vals)
    zero = from_values(0.0, 1.0, [0.0] * len(vals))
    au = lin_comb(a, u, 0.0, zero)
    slack = 1e-12 * (1.0 + abs(a) * bl_norm(u))
    assert abs(bl_norm(au) - abs(a) * bl_norm(u)) <= slack
    assert abs(lip_norm(au, 1.0) - abs(a) * lip_norm(u, 1.0)) <= slack


@given(
    vals=_values_strategy(),
    t0=st.floats(0, 1, allow_nan=False),
    t1=st.floats(0, 1, allow_nan=False),
)
@settings(max_examples=150, deadline=None)
def test_base_point_norms_equivalent(vals, t0, t1):
    u = from_values(0.0, 1.0, vals)
    x0, x1 = float(t0), float(t1)
    # |u(x0)| <= |u(x1)| + lip * |x0 - x1| makes the two norms equivalent
    slack = 1e-12 * (1.0 + bl_norm(u))
    assert abs(u.eval(x0)) <= abs(u.eval(x1)) + lip_seminorm(u) * abs(x0 - x1) + slack
    assert lip_norm(u, x0) <= lip_norm(u, x1) + lip_seminorm(u) * abs(x0 - x1) + slack


def test_refine_double_is_exact_for_interpolant():
    u = from_values(0.0, 1.0, [0.0, 2.0, 1.0, 5.0])
    v = refine_double(u)
    assert v.size == 7
    assert np.all(v.values[::2] == u.values)
    for x in np.linspace(0.0, 1.0, 37):
        assert v.eval(float(x)) == pytest.approx(u.eval(float(x)), abs=1e-15)


def test_csv_roundtrip():
    u = from_expr(parse("log(x)"), 1.0, 16.0, 65)
    buf = io.StringIO()
    write_csv(u, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == "x,value"
    assert len(text.splitlines()) == 66
    v = read_csv(io.StringIO(text))
    assert v.lo == u.lo and v.hi == u.hi and v.size == u.size
    assert np.all(v.values == u.values)  # 17 significant digits round-trip


def test_csv_expected_column():
    u = from_expr(parse("x"), 0.0, 1.0, 5)
    w = from_expr(parse("x^2"), 0.0, 1.0, 5)
    buf = io.StringIO()
    write_csv(u, buf, expected=w)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "x,value,expected"
    v = read_csv(io.StringIO(buf.getvalue()))
    assert np.all(v.values == u.values)


def test_invalid_construction():
    with pytest.raises(ValueError):
        GridFunction(1.0, 0.0, np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        GridFunction(0.0, 1.0, np.array([0.0]))
    with pytest.raises(ValueError):
        GridFunction(0.0, 1.0, np.array([0.0, np.nan]))


def test_values_immutable():
    u = from_values(0.0, 1.0, [0.0, 1.0])
    with pytest.raises(ValueError):
        u.values[0] = 5.0


def test_concurrent_evaluation_is_safe():
    from concurrent.futures import ThreadPoolExecutor

    u = from_expr(parse("log(x)"), 1.0, 16.0, 257)
    xs = [1.0 + 0.037 * k for k in range(400)]
    serial = [u.eval(x) for x in xs]
    with ThreadPoolExecutor(max_workers=8) as pool:
        parallel = list(pool.map(u.eval, xs))
    assert parallel == serial
