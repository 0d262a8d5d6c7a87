import numpy as np
import pytest

from lipfix import (
    Atom,
    EquationSystem,
    check_domain_closure,
    d0,
    gamma,
    m_of_x,
    parse,
)
from lipfix.system import abs_kernel_mass, kahan_sum


def _identity_system():
    return EquationSystem(0.0, 1.0, (Atom(1.0, 0.7, parse("x")),), parse("0"), 0.0)


def test_gamma_log_example(ex32):
    assert gamma(ex32.system) == 2.0


def test_gamma_zero_weights():
    sys_ = EquationSystem(
        0.0, 1.0, (Atom(0.0, 3.0, parse("x")), Atom(0.0, -1.0, parse("x"))), parse("0"), 0.0
    )
    assert gamma(sys_) == 0.0


def test_gamma_perpetuity(perpetuity):
    assert gamma(perpetuity.system) == pytest.approx(0.2, abs=1e-15)


def test_gamma_linear_in_g():
    base = [(0.3, 1.7), (1.2, -0.4), (0.5, 0.9)]
    for s in (2.0, -3.5, 0.25):
        sys1 = EquationSystem(
            0.0, 1.0, tuple(Atom(w, g, parse("x")) for w, g in base), parse("0"), 0.0
        )
        sys2 = EquationSystem(
            0.0, 1.0, tuple(Atom(w, s * g, parse("x")) for w, g in base), parse("0"), 0.0
        )
        assert gamma(sys2) == pytest.approx(s * gamma(sys1), rel=1e-15, abs=1e-15)


def test_kahan_sum_compensates():
    terms = [1.0, 1e-16, 1e-16, 1e-16, 1e-16, 1e-16, -1.0]
    assert kahan_sum(terms) == pytest.approx(5e-16, rel=1e-12)


def test_m_of_x_fixed_point(ex32):
    assert m_of_x(ex32.system, 1.0, 1.0) == 0.0
    assert m_of_x(ex32.system, 0.0, 4.0) == 0.0


def test_m_of_x_log_example(ex32):
    # |f(4)-4| = 2.5, sum w|g| = 2, L = 0.5
    assert m_of_x(ex32.system, 0.5, 4.0) == 2.5
    # |f(16)-16| = 13.5
    assert m_of_x(ex32.system, 0.5, 16.0) == 13.5


def test_m_of_x_scales_linearly_in_L(ex32):
    for x in (1.0, 2.5, 7.0, 16.0):
        assert m_of_x(ex32.system, 0.5, x) == pytest.approx(
            0.5 * m_of_x(ex32.system, 1.0, x), rel=1e-15, abs=0.0
        )


def test_m_of_x_rejects_negative_L(ex32):
    with pytest.raises(ValueError):
        m_of_x(ex32.system, -1.0, 4.0)


def test_d0_log_example(ex32):
    # the integrand 2|0.5*sqrt(x)+0.5-x| increases on [1,16]; max at node 16
    assert d0(ex32.system, 1001) == 27.0
    # dense-sweep oracle
    xs = np.linspace(1.0, 16.0, 100001)
    oracle = np.max(2.0 * np.abs(0.5 * np.sqrt(xs) + 0.5 - xs))
    assert d0(ex32.system, 4097) == pytest.approx(oracle, abs=1e-12)


def test_d0_identity_maps():
    assert d0(_identity_system(), 101) == 0.0


def test_d0_perpetuity(perpetuity):
    # brute-force sweep oracle of 0.6|0.5x+1-x| + 0.4|0.25x-x| on [0,4]:
    # piecewise linear, 0.6 on [0,2] then rising to 1.8 at x=4
    xs = np.linspace(0.0, 4.0, 100001)
    oracle = np.max(0.6 * np.abs(0.5 * xs + 1.0 - xs) + 0.4 * np.abs(0.25 * xs - xs))
    assert oracle == pytest.approx(1.8, abs=1e-12)
    assert d0(perpetuity.system, 4097) == pytest.approx(1.8, abs=1e-12)


def test_d0_monotone_under_nested_refinement(perpetuity):
    values = [d0(perpetuity.system, g) for g in (9, 17, 33, 65, 129)]
    for coarse, fine in zip(values, values[1:]):
        assert fine >= coarse - 1e-15


def test_closure_log_example(ex32):
    report = check_domain_closure(ex32.system, 257)
    assert report.closed
    assert report.per_atom[0].overshoot == 0.0


def test_closure_violated_expanding_map(ex31):
    report = check_domain_closure(ex31.system, 257)
    assert not report.closed
    worst = report.per_atom[0]
    assert worst.worst_x == 1.0
    assert worst.overshoot == 1.0


def test_closure_identity():
    assert check_domain_closure(_identity_system(), 33).closed


def test_abs_kernel_mass(perpetuity, ex32):
    assert abs_kernel_mass(perpetuity.system) == pytest.approx(1.0, abs=1e-15)
    assert abs_kernel_mass(ex32.system) == 2.0


def test_atom_validation():
    with pytest.raises(ValueError):
        Atom(-0.5, 1.0, parse("x"))
    with pytest.raises(ValueError):
        Atom(1.0, float("nan"), parse("x"))


def test_system_validation():
    with pytest.raises(ValueError):
        EquationSystem(1.0, 0.0, (Atom(1.0, 1.0, parse("x")),), parse("0"), 0.5)
    with pytest.raises(ValueError):
        EquationSystem(0.0, 1.0, (), parse("0"), 0.5)
    with pytest.raises(ValueError):
        EquationSystem(0.0, 1.0, (Atom(1.0, 1.0, parse("x")),), parse("0"), -0.1)
    with pytest.raises(ValueError):
        EquationSystem(
            0.0, 1.0, (Atom(1.0, 1.0, parse("x")),), parse("0"), 0.5, base_point=2.0
        )


def test_declared_lambda_of_one_is_constructible():
    # values >= 1 are representable; the audit gate rejects them later
    sys_ = EquationSystem(0.0, 1.0, (Atom(1.0, 1.0, parse("x")),), parse("0"), 1.0)
    assert sys_.declared_lambda == 1.0


def test_base_point_defaults_to_lo(ex32):
    assert ex32.system.base_point == 1.0
