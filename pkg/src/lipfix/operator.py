"""The solution operator F -> phi^F as an object of study.

For a solvable system the map from the inhomogeneity to the solution is
linear and invertible; its inverse is one explicit step,

    F(x) = psi(x) - sum_i w_i g_i psi(f_i(x)),

so round trips in both directions are checkable numerically.  The forward
operator is bounded in two norms: with c0 = (disp(x0) + 1 + |gamma|)/(1-lambda)
and c = max(1, c0), where disp(x0) = sum_i w_i |g_i| |f_i(x0) - x0|,

    lip_norm(phi^F)  <=  c / |1 - gamma| * lip_norm(F),

and with d0 = sup disp and d = max(1, (d0 + 1 + |gamma|)/(1 - lambda)),

    bl_norm(phi^F)   <=  d / |1 - gamma| * bl_norm(F).

`check_operator_bounds` evaluates both ratios for one solved instance;
`roundtrip_report` drives seeded random inhomogeneities through
solve -> invert and invert -> solve and aggregates the worst errors.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

import numpy as np

from .exprlang import evaluate
from .gridfn import GridFunction, bl_norm, lip_norm, lip_seminorm, sup_norm
from .hypotheses import HypothesisReport
from .series import Solution, _mapped_nodes, _require_closed, _step, solve
from .system import EquationSystem, abs_kernel_mass, d0 as displacement_sup

__all__ = [
    "OperatorBoundsReport",
    "constant_c",
    "constant_d",
    "inverse_apply",
    "check_operator_bounds",
    "random_lipschitz_grid_function",
    "roundtrip_report",
]


def constant_c(sys: EquationSystem, lam: float, gamma: float) -> tuple[float, float]:
    """Norm constant for the base-point Lipschitz norm; depends on the
    system's base point x0."""
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lambda must be in [0, 1), got {lam!r}")
    x0 = sys.base_point
    disp = sum(
        a.weight * abs(a.gvalue) * abs(evaluate(a.map, x0) - x0) for a in sys.atoms
    )
    c0 = (disp + 1.0 + abs(gamma)) / (1.0 - lam)
    return c0, max(1.0, c0)


def constant_d(
    sys: EquationSystem, lam: float, gamma: float, grid_count: int
) -> tuple[float, float]:
    """Norm constant for the bounded-Lipschitz norm; d0 is the grid supremum
    of the displacement integrand."""
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lambda must be in [0, 1), got {lam!r}")
    dsup = displacement_sup(sys, grid_count)
    return dsup, max(1.0, (dsup + 1.0 + abs(gamma)) / (1.0 - lam))


def inverse_apply(sys: EquationSystem, psi: GridFunction) -> GridFunction:
    """Recover the inhomogeneity that a claimed solution solves for:
    nodewise psi - T0 psi.  Requires domain closure at psi's resolution."""
    _require_closed(sys, psi.size)
    nodes = psi.nodes()
    mapped = _mapped_nodes(sys, nodes)
    return GridFunction(psi.lo, psi.hi, psi.values - _step(sys, nodes, psi.values, mapped))


@dataclass(frozen=True)
class OperatorBoundsReport:
    c0: float
    c: float
    d0: float
    d: float
    lip_ratio_ok: bool
    bl_ratio_ok: bool
    worst_lip_ratio: float
    worst_bl_ratio: float
    x0: float

    def to_json_dict(self) -> dict:
        return {
            "c0": self.c0,
            "c": self.c,
            "d0": self.d0,
            "d": self.d,
            "lip_ratio_ok": self.lip_ratio_ok,
            "bl_ratio_ok": self.bl_ratio_ok,
            "worst_lip_ratio": self.worst_lip_ratio,
            "worst_bl_ratio": self.worst_bl_ratio,
            "x0": self.x0,
        }


def _utilization(lhs: float, allowed: float, extra: float) -> tuple[float, bool]:
    """lhs/allowed with 0/0 -> 0; ok within a small slack plus `extra`."""
    if allowed == 0.0:
        return (0.0, True) if lhs <= extra + 1e-12 else (np.inf, False)
    ratio = lhs / allowed
    return ratio, lhs <= allowed + 1e-9 * allowed + 1e-12 + extra

def check_operator_bounds(
    sys: EquationSystem,
    F_grid: GridFunction,
    sol: Solution,
    report: HypothesisReport,
    extra_slack: float = 0.0,
) -> OperatorBoundsReport:
    """Evaluate both norm ratios for one solved instance.

    `extra_slack` widens the checks for computed (not exact) solutions; pass
    the tail bound plus a measured grid error.
    """
    lam, gam = sol.lambda_used, sol.gamma
    c0, c = constant_c(sys, lam, gam)
    dsup, d = constant_d(sys, lam, gam, F_grid.size)
    x0 = sys.base_point

    lip_lhs = lip_norm(sol.phi, x0)
    lip_allowed = c / abs(1.0 - gam) * lip_norm(F_grid, x0)
    lip_ratio, lip_ok = _utilization(lip_lhs, lip_allowed, extra_slack)

    bl_lhs = bl_norm(sol.phi)
    bl_allowed = d / abs(1.0 - gam) * bl_norm(F_grid)
    bl_ratio, bl_ok = _utilization(bl_lhs, bl_allowed, extra_slack)

    return OperatorBoundsReport(
        c0=c0,
        c=c,
        d0=dsup,
        d=d,
        lip_ratio_ok=lip_ok,
        bl_ratio_ok=bl_ok,
        worst_lip_ratio=lip_ratio,
        worst_bl_ratio=bl_ratio,
        x0=x0,
    )


def random_lipschitz_grid_function(
    lo: float, hi: float, grid_count: int, kink_count: int, seed: int
) -> GridFunction:
    """Seeded random piecewise-linear function with `kink_count` interior
    kinks, segment slopes in [-1, 1] and anchor value in [-1, 1]."""
    rng = random.Random(seed)
    kinks = sorted(lo + (hi - lo) * rng.random() for _ in range(kink_count))
    bps = np.array([lo, *kinks, hi])
    bp_values = np.empty(len(bps))
    bp_values[0] = rng.uniform(-1.0, 1.0)
    for j in range(1, len(bps)):
        slope = rng.uniform(-1.0, 1.0)
        bp_values[j] = bp_values[j - 1] + slope * (bps[j] - bps[j - 1])
    nodes = np.linspace(lo, hi, grid_count)
    return GridFunction(lo, hi, np.interp(nodes, bps, bp_values))


def roundtrip_report(
    sys: EquationSystem,
    base_report: HypothesisReport,
    count: int,
    seed: int,
    epsilon: float,
    grid_count: int,
    kink_range: tuple[int, int] = (8, 64),
    grid_slack: float = 0.0,
) -> dict:
    """Seeded round trips F -> phi -> F and psi -> F -> phi.

    For each trial the recovered function must match within
    (1 + q) * tail_bound + 4 * grid_slack, and the forward norm ratios must
    hold.  Also records the worst observed inverse ratio norm(F)/norm(phi^F)
    (empirical only; no a-priori constant is attached to the inverse).
    """
    q = abs_kernel_mass(sys)
    rng = random.Random(seed)
    worst_forward = 0.0
    worst_reverse = 0.0
    worst_lip_ratio = 0.0
    worst_bl_ratio = 0.0
    worst_inverse_ratio = 0.0
    tol = 0.0
    all_ok = True
    for k in range(count):
        kinks = rng.randint(*kink_range)
        F = random_lipschitz_grid_function(
            sys.domain_lo, sys.domain_hi, grid_count, kinks, seed=rng.randrange(2**31)
        )
        rep = replace(base_report, L_observed=lip_seminorm(F))

        sol = solve(sys, epsilon, grid_count, rep, F_grid=F)
        back = inverse_apply(sys, sol.phi)
        err_fwd = sup_norm(GridFunction(F.lo, F.hi, back.values - F.values))
        tol = (1.0 + q) * sol.tail_bound + 4.0 * grid_slack
        worst_forward = max(worst_forward, err_fwd)

        bounds = check_operator_bounds(
            sys, F, sol, rep, extra_slack=sol.tail_bound + grid_slack
        )
        worst_lip_ratio = max(worst_lip_ratio, bounds.worst_lip_ratio)
        worst_bl_ratio = max(worst_bl_ratio, bounds.worst_bl_ratio)
        all_ok = all_ok and bounds.lip_ratio_ok and bounds.bl_ratio_ok
        phi_lip = lip_norm(sol.phi, sys.base_point)
        if phi_lip > 0.0:
            worst_inverse_ratio = max(
                worst_inverse_ratio, lip_norm(F, sys.base_point) / phi_lip
            )

        # reverse: treat a random function as the solution, derive its F,
        # solve, and compare.
        psi = random_lipschitz_grid_function(
            sys.domain_lo, sys.domain_hi, grid_count, kinks, seed=rng.randrange(2**31)
        )
        F_back = inverse_apply(sys, psi)
        rep2 = replace(base_report, L_observed=lip_seminorm(F_back))
        sol2 = solve(sys, epsilon, grid_count, rep2, F_grid=F_back)
        err_rev = sup_norm(GridFunction(psi.lo, psi.hi, sol2.phi.values - psi.values))
        worst_reverse = max(worst_reverse, err_rev)
        tol = max(tol, (1.0 + q) * sol2.tail_bound + 4.0 * grid_slack)

        all_ok = all_ok and err_fwd <= tol and err_rev <= tol

    return {
        "trials": count,
        "seed": seed,
        "q": q,
        "worst_forward_error": worst_forward,
        "worst_reverse_error": worst_reverse,
        "tolerance": tol,
        "worst_lip_ratio": worst_lip_ratio,
        "worst_bl_ratio": worst_bl_ratio,
        "worst_inverse_ratio": worst_inverse_ratio,
        "ok": all_ok,
    }
