"""The equation model: a finite weighted measure of maps plus an
inhomogeneity.

An :class:`EquationSystem` describes

    phi(x) = sum_i w_i * g_i * phi(f_i(x)) + F(x)      on [lo, hi],

where each atom carries a nonnegative measure weight ``w_i``, a signed kernel
value ``g_i`` and a map ``f_i`` given as an expression in ``x``.  Signed
kernels live in ``g``; the weights stay nonnegative so that integrals of |g|
are well defined.  A continuous measure must be discretized by the caller
(quadrature nodes and weights become atoms).

This module also computes the scalar functionals attached to the model: the
total kernel mass ``gamma``, the local displacement functional ``m_of_x`` and
its grid supremum ``d0``, and the domain-closure report required by the grid
collocation backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exprlang import Expr, evaluate

__all__ = [
    "Atom",
    "EquationSystem",
    "AtomClosure",
    "ClosureReport",
    "gamma",
    "abs_kernel_mass",
    "m_of_x",
    "d0",
    "check_domain_closure",
    "kahan_sum",
]


def kahan_sum(terms) -> float:
    """Neumaier-compensated summation, in input order."""
    total = 0.0
    comp = 0.0
    for t in terms:
        s = total + t
        if abs(total) >= abs(t):
            comp += (total - s) + t
        else:
            comp += (t - s) + total
        total = s
    return total + comp


@dataclass(frozen=True)
class Atom:
    """One measure atom: weight w >= 0, kernel value g, and the map f."""

    weight: float
    gvalue: float
    map: Expr

    def __post_init__(self):
        if not (self.weight >= 0.0 and math.isfinite(self.weight)):
            raise ValueError(f"atom weight must be finite and >= 0, got {self.weight!r}")
        if not math.isfinite(self.gvalue):
            raise ValueError(f"atom g value must be finite, got {self.gvalue!r}")


@dataclass(frozen=True)
class EquationSystem:
    domain_lo: float
    domain_hi: float
    atoms: tuple[Atom, ...]
    F: Expr
    declared_lambda: float
    base_point: float | None = field(default=None)

    def __post_init__(self):
        if not self.domain_lo < self.domain_hi:
            raise ValueError(
                f"need domain_lo < domain_hi, got [{self.domain_lo!r}, {self.domain_hi!r}]"
            )
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise ValueError("at least one atom is required")
        # A declaration >= 1 is representable: the audit gate rejects it with
        # NotAContraction instead of this constructor, so bad input files are
        # reported as audit failures rather than type errors.
        if not (self.declared_lambda >= 0.0 and math.isfinite(self.declared_lambda)):
            raise ValueError(
                f"declared lambda must be finite and >= 0, got {self.declared_lambda!r}"
            )
        if self.base_point is None:
            object.__setattr__(self, "base_point", self.domain_lo)
        if not (self.domain_lo <= self.base_point <= self.domain_hi):
            raise ValueError(
                f"base point {self.base_point!r} outside "
                f"[{self.domain_lo!r}, {self.domain_hi!r}]"
            )

    def grid(self, count: int) -> np.ndarray:
        if count < 2:
            raise ValueError(f"need at least 2 grid nodes, got {count}")
        return np.linspace(self.domain_lo, self.domain_hi, count)

    def map_values(self, atom: Atom, xs: np.ndarray) -> np.ndarray:
        return np.fromiter(
            (evaluate(atom.map, float(t)) for t in xs), dtype=float, count=len(xs)
        )


def gamma(sys: EquationSystem) -> float:
    """Total signed kernel mass: sum of w_i * g_i in atom order, compensated."""
    return kahan_sum(a.weight * a.gvalue for a in sys.atoms)


def abs_kernel_mass(sys: EquationSystem) -> float:
    """q = sum of w_i * |g_i|; the sup-norm operator bound of one step."""
    return kahan_sum(a.weight * abs(a.gvalue) for a in sys.atoms)


def m_of_x(sys: EquationSystem, L: float, x: float) -> float:
    """Local displacement functional L * sum_i w_i |g_i| |f_i(x) - x|.

    Not restricted to [lo, hi]: the pointwise backend needs it along orbits
    that may leave the interval.
    """
    if L < 0.0:
        raise ValueError(f"L must be >= 0, got {L!r}")
    return L * kahan_sum(
        a.weight * abs(a.gvalue) * abs(evaluate(a.map, x) - x) for a in sys.atoms
    )


def d0(sys: EquationSystem, grid_count: int) -> float:
    """Grid maximum of sum_i w_i |g_i| |f_i(x) - x|.

    A lower estimate of the supremum over the interval: exact when the
    integrand peaks at a node (monotone or convex pieces), approximate
    otherwise.
    """
    xs = sys.grid(grid_count)
    total = np.zeros(grid_count)
    for a in sys.atoms:
        total += a.weight * abs(a.gvalue) * np.abs(sys.map_values(a, xs) - xs)
    return float(np.max(total))


@dataclass(frozen=True)
class AtomClosure:
    atom_index: int
    closed: bool
    worst_x: float | None
    overshoot: float


@dataclass(frozen=True)
class ClosureReport:
    closed: bool
    per_atom: tuple[AtomClosure, ...]
    grid_count: int

    def worst(self) -> AtomClosure:
        return max(self.per_atom, key=lambda a: a.overshoot)


def check_domain_closure(sys: EquationSystem, grid_count: int) -> ClosureReport:
    """Check, per atom, that the map sends every grid node back into
    [lo, hi].  Violations are report content, not errors."""
    xs = sys.grid(grid_count)
    per_atom = []
    for idx, a in enumerate(sys.atoms):
        fx = sys.map_values(a, xs)
        over = np.maximum(sys.domain_lo - fx, fx - sys.domain_hi)
        worst = int(np.argmax(over))
        if over[worst] > 0.0:
            per_atom.append(AtomClosure(idx, False, float(xs[worst]), float(over[worst])))
        else:
            per_atom.append(AtomClosure(idx, True, None, 0.0))
    return ClosureReport(all(a.closed for a in per_atom), tuple(per_atom), grid_count)
