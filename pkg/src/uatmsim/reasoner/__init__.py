"""Rule-program front end and evaluator.

Pipeline: :func:`parse_program` -> :func:`ground` -> :func:`stratify` ->
:func:`evaluate`, or :func:`solve_text` / :func:`solve_program` end to end.
"""

from .errors import (
    CapacityError,
    ParseError,
    ReasonerError,
    StratificationError,
    UnsafeRuleError,
    UnsupportedConstructError,
)
from .grounding import (
    DEFAULT_CAPACITY,
    GroundProgram,
    GroundRule,
    Neg,
    NegPattern,
    ground,
)
from .parser import parse_program
from .solver import (
    Model,
    SATISFIABLE,
    UNSATISFIABLE,
    evaluate,
    query,
    solve_program,
    solve_text,
)
from .stratify import Stratification, stratify
from .syntax import (
    Arith,
    Atom,
    Comparison,
    Const,
    GroundAtom,
    Interval,
    Literal,
    Program,
    Rule,
    Var,
    atom_from_ground,
    format_atoms,
    ground_atom,
    merge_programs,
)

__all__ = [
    "Arith",
    "Atom",
    "CapacityError",
    "Comparison",
    "Const",
    "DEFAULT_CAPACITY",
    "GroundAtom",
    "GroundProgram",
    "GroundRule",
    "Interval",
    "Literal",
    "Model",
    "Neg",
    "NegPattern",
    "ParseError",
    "Program",
    "ReasonerError",
    "Rule",
    "SATISFIABLE",
    "Stratification",
    "StratificationError",
    "UNSATISFIABLE",
    "UnsafeRuleError",
    "UnsupportedConstructError",
    "Var",
    "atom_from_ground",
    "evaluate",
    "format_atoms",
    "ground",
    "ground_atom",
    "merge_programs",
    "parse_program",
    "query",
    "solve_program",
    "solve_text",
    "stratify",
]
