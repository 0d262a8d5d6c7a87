"""Built-in named systems used by tests and the CLI.

Each entry bundles a ready-made :class:`EquationSystem`, the closed-form
solution where one is known, and the expected pipeline outcome.  They cover
the behaviours the solver must exhibit: a contractive system with an
unbounded closed-form solution, a non-closed expanding system whose only
admissible solution is zero, a system rejected at the gate because its total
kernel mass is exactly 1, and a signed two-atom system in the
discounted-recursion style whose |kernel| mass is exactly 1 (which disables
the Picard oracle and leaves residual checks in charge).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import UnknownCorpusEntry
from .exprlang import Expr, parse
from .system import Atom, EquationSystem

__all__ = ["Outcome", "CorpusEntry", "names", "load", "export_dict"]


class Outcome(enum.Enum):
    SOLVES = "Solves"
    GAMMA_IS_ONE_REJECTED = "GammaIsOneRejected"
    ZERO_SOLUTION = "ZeroSolution"


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    system: EquationSystem
    expected: Expr | None
    expected_outcome: Outcome
    notes: str


@dataclass(frozen=True)
class _Fixture:
    domain: tuple[float, float]
    atoms: tuple[tuple[float, float, str], ...]  # (weight, g, map source)
    F: str
    declared_lambda: float
    expected: str | None
    outcome: Outcome
    notes: str


_TABLE: dict[str, _Fixture] = {
    "ex31_zero": _Fixture(
        domain=(0.0, 1.0),
        atoms=((1.0, 0.25, "2*x"),),
        F="0",
        declared_lambda=0.5,
        expected="0",
        outcome=Outcome.ZERO_SOLUTION,
        notes=(
            "Expanding map, zero inhomogeneity: phi(x) = 0.25*phi(2*x). The "
            "map doubles, so the interval is not closed under it and the grid "
            "backend refuses; the pointwise backend applies. The zero function "
            "is the only Lipschitz solution. Admissibility matters: a "
            "quadratic also satisfies the relation (0.25*(2x)^2 = x^2) but "
            "has unbounded slope on the map's natural domain, so it does not "
            "qualify."
        ),
    ),
    "ex32_log": _Fixture(
        domain=(1.0, 16.0),
        atoms=((1.0, 2.0, "0.5*sqrt(x)+0.5"),),
        F="log(x/(0.5*sqrt(x)+0.5)^2)",
        declared_lambda=0.5,
        expected="log(x)",
        outcome=Outcome.SOLVES,
        notes=(
            "Square-root contraction with kernel 2; the solution is log(x). "
            "The map sends [1,16] into [1,2.5] (closure holds), and the "
            "half-line problem restricts consistently because forward orbits "
            "decrease toward the fixed point 1. gamma = 2; the solution is "
            "unbounded on the half-line even though F is bounded there."
        ),
    ),
    "ex33_gamma_one": _Fixture(
        domain=(-4.0, 4.0),
        atoms=((0.5, 1.0, "0.5*x+1"), (0.5, 1.0, "0.5*x-1")),
        F="abs(x)",
        declared_lambda=0.5,
        expected=None,
        outcome=Outcome.GAMMA_IS_ONE_REJECTED,
        notes=(
            "Probability weights with kernel 1: two shifted halvings with "
            "weight 0.5 each and F = |x|. The total kernel mass equals the "
            "measure mass, 1, so the solution operator is singular and "
            "continuous solutions can genuinely fail to exist; the audit "
            "gate must reject."
        ),
    ),
    "perpetuity_two_atom": _Fixture(
        domain=(0.0, 4.0),
        atoms=((0.6, 1.0, "0.5*x+1"), (0.4, -1.0, "0.25*x")),
        F="x",
        declared_lambda=0.4,
        expected="1.25*x+0.9375",
        outcome=Outcome.SOLVES,
        notes=(
            "Signed two-atom system in the discounted-recursion style: kernel "
            "+1 on (w=0.6, 0.5x+1) and -1 on (w=0.4, 0.25x), F = x. "
            "gamma = 0.2, contraction factor 0.6*0.5 + 0.4*0.25 = 0.4, and "
            "the |kernel| mass q is exactly 1, so the Picard oracle refuses "
            "and residual checks take over."
        ),
    ),
}


def names() -> tuple[str, ...]:
    return tuple(_TABLE)


def load(name: str) -> CorpusEntry:
    fix = _TABLE.get(name)
    if fix is None:
        raise UnknownCorpusEntry(name, names())
    lo, hi = fix.domain
    system = EquationSystem(
        domain_lo=lo,
        domain_hi=hi,
        atoms=tuple(Atom(w, g, parse(src)) for w, g, src in fix.atoms),
        F=parse(fix.F),
        declared_lambda=fix.declared_lambda,
    )
    expected = parse(fix.expected) if fix.expected is not None else None
    return CorpusEntry(name, system, expected, fix.outcome, fix.notes)


def export_dict(name: str) -> dict:
    """The CLI input-file form of an entry, carrying the original map and F
    sources (deterministic, so exports are byte-stable)."""
    fix = _TABLE.get(name)
    if fix is None:
        raise UnknownCorpusEntry(name, names())
    lo, hi = fix.domain
    return {
        "schema": "lipfix/1",
        "domain": {"lo": lo, "hi": hi},
        "atoms": [
            {"weight": w, "g": g, "map": src} for w, g, src in fix.atoms
        ],
        "F": fix.F,
        "lambda": fix.declared_lambda,
        "base_point": lo,
    }
