import math
from dataclasses import replace

import pytest

from lipfix import (
    Atom,
    AuditConfig,
    ContractionViolated,
    EquationSystem,
    GammaIsOne,
    NotAContraction,
    audit,
    estimate_L,
    estimate_lambda,
    parse,
    require_solvable,
)
from lipfix.hypotheses import LAMBDA_GRID_NODES


def test_estimate_lambda_constant_ratio():
    sys_ = EquationSystem(0.0, 1.0, (Atom(1.0, 0.7, parse("x")),), parse("0"), 0.7)
    lam, pair = estimate_lambda(sys_, pair_count=64, seed=1)
    assert lam == pytest.approx(0.7, abs=1e-13)
    assert pair[0] != pair[1]


def test_estimate_lambda_log_example(ex32):
    # Closed-form ratio for the map pair (x, z): 1/(sqrt(x)+sqrt(z)), with
    # supremum 1/2 approached as x, z -> 1.  The adjacent-grid part alone
    # guarantees at least the leftmost-pair value; random pairs can only
    # raise the estimate and never above the supremum.
    h = 15.0 / (LAMBDA_GRID_NODES - 1)
    grid_part = 1.0 / (1.0 + math.sqrt(1.0 + h))
    lam, pair = estimate_lambda(ex32.system, pair_count=4096, seed=0)
    assert grid_part - 1e-12 <= lam <= 0.5
    assert abs(lam - 0.5) <= 2.1e-3
    assert max(pair) <= 1.2  # attained near the fixed point


def test_estimate_lambda_two_affine_atoms(ex33):
    lam, _ = estimate_lambda(ex33.system, pair_count=256, seed=3)
    assert lam == pytest.approx(0.5, abs=1e-12)


def test_estimate_lambda_affine_exactness(perpetuity):
    # affine maps have the same ratio for every pair; moderate pair counts
    # keep the pairs far enough apart that rounding stays below 1e-12
    for seed in (0, 1, 7):
        lam, _ = estimate_lambda(perpetuity.system, pair_count=256, seed=seed)
        assert lam == pytest.approx(0.4, abs=1e-12)


def test_estimate_lambda_deterministic(ex32):
    a = estimate_lambda(ex32.system, pair_count=512, seed=42)
    b = estimate_lambda(ex32.system, pair_count=512, seed=42)
    assert a == b


def test_estimate_lambda_monotone_in_prefix(ex32):
    # with a fixed seed the first n pairs of a longer draw are the shorter draw
    small, _ = estimate_lambda(ex32.system, pair_count=64, seed=9)
    large, _ = estimate_lambda(ex32.system, pair_count=1024, seed=9)
    assert small <= large


def test_estimate_L_identity(ex32):
    sys_ = replace(ex32.system, F=parse("x"))
    assert estimate_L(sys_, 257) == 1.0


def test_estimate_L_constant(ex32):
    sys_ = replace(ex32.system, F=parse("3"))
    assert estimate_L(sys_, 257) == 0.0


def test_estimate_L_log_example(ex32):
    # F'(x) = 1/x - 1/(x + sqrt(x)) peaks at x = 1 with value 1/2; adjacent
    # secants converge to it from below as the grid refines
    L = estimate_L(ex32.system, 16385)
    assert L == pytest.approx(0.5, abs=1e-3)
    assert L <= 0.5


def test_audit_log_example(ex32, ex32_report):
    rep = ex32_report
    assert rep.gamma == 2.0
    assert rep.gamma_ok
    assert rep.closure_ok
    assert rep.lambda_declared == 0.5
    assert rep.lambda_observed <= 0.5 + 1e-6
    require_solvable(rep)  # does not raise


def test_audit_gamma_one_rejected(ex33):
    rep = audit(ex33.system, AuditConfig())
    assert not rep.gamma_ok
    assert rep.gamma == 1.0
    with pytest.raises(GammaIsOne) as exc:
        require_solvable(rep)
    assert "gamma" in str(exc.value)
    assert exc.value.gamma == 1.0


def test_audit_underdeclared_lambda(ex32):
    lying = replace(ex32.system, declared_lambda=0.3)
    rep = audit(lying, AuditConfig())
    with pytest.raises(ContractionViolated) as exc:
        require_solvable(rep)
    assert exc.value.declared == 0.3
    assert exc.value.observed > 0.3


def test_audit_lambda_not_below_one(ex32):
    bad = replace(ex32.system, declared_lambda=1.0)
    rep = audit(bad, AuditConfig())
    with pytest.raises(NotAContraction):
        require_solvable(rep)


def test_audit_report_always_returned(ex31):
    # closure fails for the expanding map, but audit reports instead of raising
    rep = audit(ex31.system, AuditConfig(grid_count=257))
    assert not rep.closure_ok
    assert rep.gamma == 0.25
    assert rep.L_observed == 0.0
    assert rep.lambda_observed == pytest.approx(0.5, abs=1e-12)
    require_solvable(rep)


def test_audit_config_validation():
    with pytest.raises(ValueError):
        AuditConfig(tol_gamma=0.0)
    with pytest.raises(ValueError):
        AuditConfig(grid_count=1)
    with pytest.raises(ValueError):
        AuditConfig(pair_count=0)
