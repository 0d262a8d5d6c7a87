"""Independent checks of a claimed solution.

Three kinds: the equation residual probed at grid nodes plus cell midpoints
(midpoints maximize the interpolation error of a piecewise-linear function,
so they are the most adversarial cheap probes), the a-priori Lipschitz and
pointwise bounds that any exact solution must satisfy, and a Picard
fixed-point iteration that serves as a fully independent oracle whenever the
total |kernel| mass q = sum w_i |g_i| is below 1 (only then is the full
operator a sup-norm contraction).

The bound checks default to a small slack (1e-6 absolute + 1e-9 relative):
for the exact solution the bounds are theorems, so larger violations flag
implementation bugs.  For a *computed* solution pass `extra_slack` covering
its certificate (tail bound) plus a measured grid error.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NotSupNormContraction
from .exprlang import evaluate
from .gridfn import GridFunction, from_expr, lip_seminorm
from .series import Solution, _mapped_nodes, _require_closed, _step
from .system import EquationSystem, abs_kernel_mass

__all__ = [
    "ResidualReport",
    "PicardResult",
    "residual",
    "check_bound7",
    "check_bound8",
    "verification_report",
    "picard_oracle",
    "DEFAULT_SLACK_ABS",
    "DEFAULT_SLACK_REL",
]

DEFAULT_SLACK_ABS = 1e-6
DEFAULT_SLACK_REL = 1e-9


@dataclass(frozen=True)
class ResidualReport:
    max_abs_residual: float
    argmax_x: float
    probes: int
    bound7_ok: bool | None = None
    bound8_ok: bool | None = None
    bound7_lhs: float | None = None
    bound7_rhs: float | None = None
    bound8_worst_margin: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "max_abs_residual": self.max_abs_residual,
            "argmax_x": self.argmax_x,
            "probes": self.probes,
            "bound7": {
                "lhs": self.bound7_lhs,
                "rhs": self.bound7_rhs,
                "ok": self.bound7_ok,
            },
            "bound8": {
                "worst_margin": self.bound8_worst_margin,
                "ok": self.bound8_ok,
            },
            "margins": {
                "bound7": None
                if self.bound7_rhs is None
                else self.bound7_rhs - self.bound7_lhs,
                "bound8": self.bound8_worst_margin,
            },
        }


def _f_values(
    sys: EquationSystem, xs: np.ndarray, F_grid: GridFunction | None
) -> np.ndarray:
    if F_grid is not None:
        return F_grid.eval_many(xs)
    return np.fromiter(
        (evaluate(sys.F, float(t)) for t in xs), dtype=float, count=len(xs)
    )


def residual(
    sys: EquationSystem,
    phi: GridFunction,
    probe_count: int,
    F_grid: GridFunction | None = None,
) -> ResidualReport:
    """Largest defect |phi(x) - sum_i w_i g_i phi(f_i(x)) - F(x)| over the
    grid nodes plus `probe_count` midpoints of a uniform partition."""
    if probe_count < 1:
        raise ValueError("probe_count must be >= 1")
    width = sys.domain_hi - sys.domain_lo
    mids = sys.domain_lo + (np.arange(probe_count) + 0.5) * (width / probe_count)
    xs = np.concatenate([phi.nodes(), mids])
    acc = phi.eval_many(xs)
    for a in sys.atoms:
        fx = sys.map_values(a, xs)
        acc = acc - (a.weight * a.gvalue) * phi.eval_many(fx)
    acc = np.abs(acc - _f_values(sys, xs, F_grid))
    worst = int(np.argmax(acc))
    return ResidualReport(
        max_abs_residual=float(acc[worst]),
        argmax_x=float(xs[worst]),
        probes=len(xs),
    )


def _slack(scale: float, extra: float) -> float:
    return DEFAULT_SLACK_ABS + DEFAULT_SLACK_REL * abs(scale) + extra


def check_bound7(
    sol: Solution, L: float, extra_slack: float = 0.0
) -> tuple[float, float, bool]:
    """Lipschitz bound: the solution's smallest Lipschitz constant must not
    exceed L * (1 + |gamma|) / ((1 - lambda) * |1 - gamma|)."""
    lhs = lip_seminorm(sol.phi)
    rhs = (
        L
        * (1.0 + abs(sol.gamma))
        / ((1.0 - sol.lambda_used) * abs(1.0 - sol.gamma))
    )
    return lhs, rhs, lhs <= rhs + _slack(rhs, extra_slack)


def check_bound8(
    sol: Solution,
    sys: EquationSystem,
    L: float,
    F_grid: GridFunction | None = None,
    extra_slack: float = 0.0,
) -> tuple[float, bool]:
    """Pointwise bound: at every grid node,
    |phi(x)| <= (L/(1-lambda) * sum_i w_i |g_i| |f_i(x)-x| + |F(x)|) / |1-gamma|.
    Returns the worst margin rhs - |phi| (negative means violated)."""
    xs = sol.phi.nodes()
    disp = np.zeros_like(xs)
    for a in sys.atoms:
        disp += a.weight * abs(a.gvalue) * np.abs(sys.map_values(a, xs) - xs)
    rhs = (L / (1.0 - sol.lambda_used) * disp + np.abs(_f_values(sys, xs, F_grid))) / abs(
        1.0 - sol.gamma
    )
    margins = rhs - np.abs(sol.phi.values)
    worst = float(np.min(margins))
    return worst, worst >= -_slack(float(np.max(rhs)), extra_slack)


def verification_report(
    sys: EquationSystem,
    sol: Solution,
    L: float,
    probe_count: int,
    F_grid: GridFunction | None = None,
    grid_slack: float = 0.0,
) -> ResidualReport:
    """Residual plus both bound checks in one report.  `grid_slack` should be
    a measured interpolation-error estimate (e.g. a refinement difference);
    together with the tail bound it widens the bound checks, which hold
    exactly only for the exact solution."""
    rep = residual(sys, sol.phi, probe_count, F_grid)
    # Grid error moves node values by ~grid_slack, hence segment slopes by up
    # to 2*grid_slack/h; the smooth tail error only moves values.
    lhs, rhs, ok7 = check_bound7(
        sol, L, extra_slack=sol.tail_bound + 2.0 * grid_slack / sol.phi.spacing
    )
    margin, ok8 = check_bound8(
        sol, sys, L, F_grid, extra_slack=sol.tail_bound + grid_slack
    )
    return replace(
        rep,
        bound7_ok=ok7,
        bound8_ok=ok8,
        bound7_lhs=lhs,
        bound7_rhs=rhs,
        bound8_worst_margin=margin,
    )


@dataclass(frozen=True)
class PicardResult:
    phi: GridFunction
    certificate: float
    q: float
    iterations: int


def picard_oracle(
    sys: EquationSystem,
    iterations: int,
    grid_count: int,
    F_grid: GridFunction | None = None,
) -> PicardResult:
    """Fixed-point iteration phi <- T0 phi + F from phi_0 = F.

    Valid only when q = sum w_i |g_i| < 1 (then one step is a sup-norm
    contraction with factor q).  The attached certificate is the standard
    a-posteriori bound q^k / (1 - q) * sup|phi_1 - phi_0|.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    q = abs_kernel_mass(sys)
    if q >= 1.0:
        raise NotSupNormContraction(q)
    _require_closed(sys, grid_count)
    if F_grid is None:
        F0 = from_expr(sys.F, sys.domain_lo, sys.domain_hi, grid_count)
    else:
        F0 = F_grid
    nodes = F0.nodes()
    mapped = _mapped_nodes(sys, nodes)
    values = F0.values
    first_step = None
    for _ in range(iterations):
        nxt = _step(sys, nodes, values, mapped) + F0.values
        if first_step is None:
            first_step = float(np.max(np.abs(nxt - values)))
        values = nxt
    cert = q**iterations / (1.0 - q) * first_step
    return PicardResult(
        GridFunction(F0.lo, F0.hi, values), cert, q, iterations
    )
