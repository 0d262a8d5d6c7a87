"""Exception hierarchy shared across the solver pipeline.

Every error carries enough context (operation name plus offending value) to
produce a useful one-line message; the CLI maps these classes onto exit codes.
"""

from __future__ import annotations


class LipfixError(Exception):
    """Base class for all errors raised by this package."""


class ExprSyntaxError(LipfixError):
    """Malformed expression source text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnknownIdentifier(LipfixError):
    """An identifier outside the expression vocabulary."""

    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier {name!r} (at offset {position})")
        self.name = name
        self.position = position


class DomainError(LipfixError):
    """Evaluation left the real domain (sqrt of a negative, log of a
    non-positive, fractional power of a negative base)."""

    def __init__(self, message: str, x: float):
        super().__init__(f"{message} at x={x!r}")
        self.x = x


class DivideByZero(LipfixError):
    """Zero denominator (or zero base raised to a negative power)."""

    def __init__(self, message: str, x: float):
        super().__init__(f"{message} at x={x!r}")
        self.x = x


class GridMismatch(LipfixError):
    """Nodewise operation on grid functions with different grids."""


class NotSolvable(LipfixError):
    """The solvability gate rejected the system; see subclasses."""


class GammaIsOne(NotSolvable):
    """Total kernel mass is 1 within tolerance: the equation may have no
    Lipschitz solution and never has a unique one."""

    def __init__(self, gamma: float, tol: float):
        super().__init__(
            f"audit gate: gamma = {gamma:.17g} is 1 within tolerance {tol:g}; "
            "the solution operator 1/(1-gamma) is singular"
        )
        self.gamma = gamma


class ContractionViolated(NotSolvable):
    """Observed contraction ratio exceeds the declared factor."""

    def __init__(self, observed: float, declared: float, pair: tuple[float, float]):
        super().__init__(
            f"audit gate: observed contraction ratio {observed:.17g} exceeds "
            f"declared lambda {declared:.17g} (worst pair x={pair[0]!r}, z={pair[1]!r})"
        )
        self.observed = observed
        self.declared = declared
        self.pair = pair


class NotAContraction(NotSolvable):
    """Declared contraction factor is not below 1."""

    def __init__(self, declared: float):
        super().__init__(
            f"audit gate: declared lambda {declared:.17g} is not in [0, 1)"
        )
        self.declared = declared


class DomainNotClosed(LipfixError):
    """A map sends grid nodes outside the working interval, so the grid
    collocation backend cannot run."""

    def __init__(self, atom_index: int, worst_x: float, overshoot: float):
        super().__init__(
            f"domain closure: map of atom {atom_index} leaves the interval "
            f"(worst at x={worst_x!r}, overshoot {overshoot:.17g})"
        )
        self.atom_index = atom_index
        self.worst_x = worst_x
        self.overshoot = overshoot


class BudgetExceeded(LipfixError):
    """Pointwise recursion tree too large."""

    def __init__(self, atom_count: int, depth: int, cap: int):
        super().__init__(
            f"pointwise solve: recursion tree of {atom_count}^{depth} points "
            f"exceeds the budget cap {cap}"
        )
        self.atom_count = atom_count
        self.depth = depth
        self.cap = cap


class NotSupNormContraction(LipfixError):
    """Picard iteration requires total |kernel| mass below 1."""

    def __init__(self, q: float):
        super().__init__(
            f"picard oracle: total |kernel| mass q = {q:.17g} is not below 1"
        )
        self.q = q


class UnknownCorpusEntry(LipfixError):
    """Requested corpus fixture does not exist."""

    def __init__(self, name: str, known: tuple[str, ...]):
        super().__init__(f"unknown corpus entry {name!r}; known: {', '.join(known)}")
        self.name = name


class InputError(LipfixError):
    """Malformed input file or command line."""
