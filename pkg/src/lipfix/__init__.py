"""lipfix: solve and verify inhomogeneous linear iterative functional
equations over finite weighted atom measures on a real interval.

The pipeline: describe a system (maps, kernel values, weights, and an
inhomogeneity, all over [lo, hi]), audit the contraction and kernel-mass
hypotheses, solve by a truncated operator-iteration series with a certified
geometric tail bound, and verify the result independently (equation residual,
a-priori bounds, Picard iteration where applicable, operator round trips).
"""

from .errors import (
    BudgetExceeded,
    ContractionViolated,
    DivideByZero,
    DomainError,
    DomainNotClosed,
    ExprSyntaxError,
    GammaIsOne,
    GridMismatch,
    InputError,
    LipfixError,
    NotAContraction,
    NotSolvable,
    NotSupNormContraction,
    UnknownCorpusEntry,
    UnknownIdentifier,
)
from .exprlang import Expr, evaluate, parse, serialize
from .gridfn import (
    EvalDiagnostics,
    GridFunction,
    bl_norm,
    from_expr,
    from_values,
    lin_comb,
    lip_norm,
    lip_seminorm,
    sup_norm,
)
from .hypotheses import (
    AuditConfig,
    HypothesisReport,
    audit,
    estimate_L,
    estimate_lambda,
    require_solvable,
)
from .operator import (
    OperatorBoundsReport,
    check_operator_bounds,
    constant_c,
    constant_d,
    inverse_apply,
    random_lipschitz_grid_function,
    roundtrip_report,
)
from .series import (
    Backend,
    Solution,
    apply_T0,
    assemble_phi,
    assemble_phi_literal,
    choose_N,
    iterate_F,
    refinement_difference,
    solve,
    solve_at,
    solve_at_info,
    tail_bound,
)
from .system import (
    Atom,
    ClosureReport,
    EquationSystem,
    abs_kernel_mass,
    check_domain_closure,
    d0,
    gamma,
    m_of_x,
)
from .verify import (
    PicardResult,
    ResidualReport,
    check_bound7,
    check_bound8,
    picard_oracle,
    residual,
    verification_report,
)
from . import corpus

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "AuditConfig",
    "Backend",
    "BudgetExceeded",
    "ClosureReport",
    "ContractionViolated",
    "DivideByZero",
    "DomainError",
    "DomainNotClosed",
    "EquationSystem",
    "EvalDiagnostics",
    "Expr",
    "ExprSyntaxError",
    "GammaIsOne",
    "GridFunction",
    "GridMismatch",
    "HypothesisReport",
    "InputError",
    "LipfixError",
    "NotAContraction",
    "NotSolvable",
    "NotSupNormContraction",
    "OperatorBoundsReport",
    "PicardResult",
    "ResidualReport",
    "Solution",
    "UnknownCorpusEntry",
    "UnknownIdentifier",
    "abs_kernel_mass",
    "apply_T0",
    "assemble_phi",
    "assemble_phi_literal",
    "audit",
    "bl_norm",
    "check_bound7",
    "check_bound8",
    "check_domain_closure",
    "check_operator_bounds",
    "choose_N",
    "constant_c",
    "constant_d",
    "corpus",
    "d0",
    "estimate_L",
    "estimate_lambda",
    "evaluate",
    "from_expr",
    "from_values",
    "gamma",
    "inverse_apply",
    "iterate_F",
    "lin_comb",
    "lip_norm",
    "lip_seminorm",
    "m_of_x",
    "parse",
    "picard_oracle",
    "random_lipschitz_grid_function",
    "refinement_difference",
    "require_solvable",
    "residual",
    "roundtrip_report",
    "serialize",
    "solve",
    "solve_at",
    "solve_at_info",
    "sup_norm",
    "tail_bound",
    "verification_report",
]
