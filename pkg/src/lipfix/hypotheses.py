"""Numerical audit of the solvability hypotheses.

Before solving, three things must hold: the declared contraction factor
lambda must be in [0, 1) and must dominate the weighted map-displacement
ratio

    sum_i w_i |g_i| |f_i(x) - f_i(z)|  <=  lambda * |x - z|,

the inhomogeneity F must be Lipschitz, and the total kernel mass gamma must
differ from 1 (at gamma = 1 the solution operator is singular and continuous
solutions can genuinely fail to exist).

Sampling cannot certify a supremum, so lambda stays a *declared* value that
the audit can only refute: the observed ratio maximum over all adjacent pairs
of a fixed 1024-node grid plus seeded random pairs catches declarations that
are provably too small.  Likewise the Lipschitz estimate for F is a lower
bound from adjacent grid slopes.  ``audit`` always returns a report;
``require_solvable`` is the separate fatal gate.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .errors import ContractionViolated, GammaIsOne, NotAContraction
from .gridfn import GridFunction, lip_seminorm
from .system import EquationSystem, check_domain_closure, gamma as total_gamma
from .exprlang import evaluate

__all__ = [
    "AuditConfig",
    "HypothesisReport",
    "estimate_lambda",
    "estimate_L",
    "audit",
    "require_solvable",
    "LAMBDA_GRID_NODES",
]

LAMBDA_GRID_NODES = 1024


@dataclass(frozen=True)
class AuditConfig:
    tol_gamma: float = 1e-9
    tol_lambda: float = 1e-6
    grid_count: int = 2049
    pair_count: int = 4096
    seed: int = 0

    def __post_init__(self):
        if not self.tol_gamma > 0.0:
            raise ValueError("tol_gamma must be > 0")
        if not self.tol_lambda > 0.0:
            raise ValueError("tol_lambda must be > 0")
        if self.grid_count < 2:
            raise ValueError("grid_count must be >= 2")
        if self.pair_count < 1:
            raise ValueError("pair_count must be >= 1")


@dataclass(frozen=True)
class HypothesisReport:
    gamma: float
    lambda_declared: float
    lambda_observed: float
    L_observed: float
    closure_ok: bool
    gamma_ok: bool
    worst_pair: tuple[float, float]

    def to_json_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "lambda_declared": self.lambda_declared,
            "lambda_observed": self.lambda_observed,
            "L_observed": self.L_observed,
            "closure_ok": self.closure_ok,
            "gamma_ok": self.gamma_ok,
            "worst_pair": list(self.worst_pair),
        }


def _pair_ratio(sys: EquationSystem, x: float, z: float) -> float:
    acc = 0.0
    for a in sys.atoms:
        acc += a.weight * abs(a.gvalue) * abs(evaluate(a.map, x) - evaluate(a.map, z))
    return acc / abs(x - z)


def estimate_lambda(
    sys: EquationSystem, pair_count: int, seed: int
) -> tuple[float, tuple[float, float]]:
    """Maximum displacement ratio over all adjacent pairs of a fixed
    1024-node grid plus `pair_count` seeded uniform random pairs.

    Deterministic for a given seed; the random pairs are drawn one after the
    other, so a shorter sample is a prefix of a longer one.  Returns the
    maximum and the pair attaining it.
    """
    if pair_count < 1:
        raise ValueError("pair_count must be >= 1")
    xs = sys.grid(LAMBDA_GRID_NODES)
    per_pair = np.zeros(LAMBDA_GRID_NODES - 1)
    for a in sys.atoms:
        fx = sys.map_values(a, xs)
        per_pair += a.weight * abs(a.gvalue) * np.abs(np.diff(fx))
    ratios = per_pair / np.diff(xs)
    best_idx = int(np.argmax(ratios))
    best = float(ratios[best_idx])
    best_pair = (float(xs[best_idx]), float(xs[best_idx + 1]))

    rng = random.Random(seed)
    width = sys.domain_hi - sys.domain_lo
    for _ in range(pair_count):
        x = sys.domain_lo + width * rng.random()
        z = sys.domain_lo + width * rng.random()
        if x == z:
            continue
        r = _pair_ratio(sys, x, z)
        if r > best:
            best = r
            best_pair = (x, z)
    return best, best_pair


def estimate_L(
    sys: EquationSystem, grid_count: int, F_grid: GridFunction | None = None
) -> float:
    """Lower estimate of the Lipschitz constant of F: the largest slope over
    adjacent nodes of a `grid_count` grid (for a grid-valued F, its exact
    largest segment slope)."""
    if F_grid is not None:
        return lip_seminorm(F_grid)
    xs = sys.grid(grid_count)
    values = np.fromiter(
        (evaluate(sys.F, float(t)) for t in xs), dtype=float, count=grid_count
    )
    return float(np.max(np.abs(np.diff(values)) / np.diff(xs)))


def audit(
    sys: EquationSystem,
    config: AuditConfig = AuditConfig(),
    F_grid: GridFunction | None = None,
) -> HypothesisReport:
    """Fill a report; never raises on failed checks (they are flagged
    fields).  Pass the report to :func:`require_solvable` to gate solving."""
    g = total_gamma(sys)
    lam_obs, worst_pair = estimate_lambda(sys, config.pair_count, config.seed)
    L_obs = estimate_L(sys, config.grid_count, F_grid)
    closure = check_domain_closure(sys, config.grid_count)
    return HypothesisReport(
        gamma=g,
        lambda_declared=sys.declared_lambda,
        lambda_observed=lam_obs,
        L_observed=L_obs,
        closure_ok=closure.closed,
        gamma_ok=abs(g - 1.0) > config.tol_gamma,
        worst_pair=worst_pair,
    )


def require_solvable(
    report: HypothesisReport, tol_lambda: float = AuditConfig.tol_lambda
) -> None:
    """Fatal gate: raises the specific rejection, in declaration order."""
    if report.lambda_declared >= 1.0:
        raise NotAContraction(report.lambda_declared)
    if not report.gamma_ok:
        raise GammaIsOne(report.gamma, AuditConfig.tol_gamma)
    if report.lambda_observed > report.lambda_declared + tol_lambda:
        raise ContractionViolated(
            report.lambda_observed, report.lambda_declared, report.worst_pair
        )
