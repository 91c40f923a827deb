"""Abstract syntax for the supported rule-program fragment.

The fragment covers exactly what the traffic-management programs need:
integer constants, variables, single-variable arithmetic offsets (``T+1``),
integer intervals (``1..20``), normal rules with negation-as-failure,
integrity constraints, comparisons, and ``#show`` directives.  There are no
symbolic constants, function terms, choice rules, disjunction, or
aggregates; the parser rejects them rather than approximating.

Ground atoms get their own lightweight representation (:class:`GroundAtom`)
because everything downstream of the grounder manipulates them in bulk.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    """An integer constant."""

    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Var:
    """A named variable.  Anonymous ``_`` occurrences are renamed to fresh
    variables ``_1``, ``_2``, ... during parsing (one per occurrence)."""

    name: str

    @property
    def is_anonymous(self) -> bool:
        return self.name.startswith("_")

    def __str__(self) -> str:
        return "_" if self.is_anonymous else self.name


@dataclass(frozen=True)
class Arith:
    """A variable plus a signed integer offset, e.g. ``T+1`` or ``T-1``."""

    var: str
    offset: int

    def __str__(self) -> str:
        sign = "+" if self.offset >= 0 else "-"
        return f"{self.var}{sign}{abs(self.offset)}"


@dataclass(frozen=True)
class Interval:
    """An inclusive integer range ``lo..hi`` with lo <= hi."""

    lo: int
    hi: int

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"

    def values(self) -> range:
        return range(self.lo, self.hi + 1)


Term = Union[Const, Var, Arith, Interval]


def term_variables(term: Term) -> frozenset[str]:
    if isinstance(term, Var):
        return frozenset((term.name,))
    if isinstance(term, Arith):
        return frozenset((term.var,))
    return frozenset()


# ---------------------------------------------------------------------------
# Atoms, literals, rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    @property
    def signature(self) -> tuple[str, int]:
        return (self.pred, len(self.args))

    def variables(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for a in self.args:
            out |= term_variables(a)
        return out

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Literal:
    """An atom used positively or under negation-as-failure."""

    atom: Atom
    negated: bool = False

    def __str__(self) -> str:
        return f"not {self.atom}" if self.negated else str(self.atom)


COMPARISON_OPS = ("<=", "<", "=", "!=")


@dataclass(frozen=True)
class Comparison:
    """A guard like ``1 <= P`` or ``A != B``; never appears in a head."""

    left: Term
    op: str
    right: Term

    def variables(self) -> frozenset[str]:
        return term_variables(self.left) | term_variables(self.right)

    def holds(self, left: int, right: int) -> bool:
        if self.op == "<=":
            return left <= right
        if self.op == "<":
            return left < right
        if self.op == "=":
            return left == right
        return left != right

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


BodyElement = Union[Literal, Comparison]


@dataclass(frozen=True)
class Rule:
    """A normal rule; ``head is None`` makes it an integrity constraint."""

    head: Optional[Atom]
    body: tuple[BodyElement, ...]

    def positive_atoms(self) -> tuple[Atom, ...]:
        return tuple(
            e.atom for e in self.body if isinstance(e, Literal) and not e.negated
        )

    def negated_atoms(self) -> tuple[Atom, ...]:
        return tuple(
            e.atom for e in self.body if isinstance(e, Literal) and e.negated
        )

    def comparisons(self) -> tuple[Comparison, ...]:
        return tuple(e for e in self.body if isinstance(e, Comparison))

    def __str__(self) -> str:
        body = ", ".join(str(e) for e in self.body)
        if self.head is None:
            return f":- {body}."
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {body}."


@dataclass(frozen=True)
class Program:
    """A parsed program: rules, variable-free facts, and #show directives.

    Facts may carry interval arguments (``step(1..3).``); the grounder
    expands them.  ``shows`` lists (predicate, arity) pairs; an empty list
    means "show everything" at presentation time.
    """

    rules: tuple[Rule, ...] = ()
    facts: tuple[Atom, ...] = ()
    shows: tuple[tuple[str, int], ...] = ()

    def __str__(self) -> str:
        lines = [f"{fact}." for fact in self.facts]
        lines += [str(rule) for rule in self.rules]
        lines += [f"#show {p}/{n}." for p, n in self.shows]
        return "\n".join(lines) + ("\n" if lines else "")


def merge_programs(*programs: Program) -> Program:
    """Concatenate programs the way the solver CLI concatenates files."""
    rules: list[Rule] = []
    facts: list[Atom] = []
    shows: list[tuple[str, int]] = []
    for p in programs:
        rules.extend(p.rules)
        facts.extend(p.facts)
        shows.extend(p.shows)
    return Program(tuple(rules), tuple(facts), tuple(shows))


# ---------------------------------------------------------------------------
# Ground atoms
# ---------------------------------------------------------------------------

class GroundAtom(NamedTuple):
    """A fully instantiated atom; sorts lexicographically by (pred, args)."""

    pred: str
    args: tuple[int, ...]

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(str(a) for a in self.args)})"


def ground_atom(pred: str, *args: int) -> GroundAtom:
    return GroundAtom(pred, tuple(args))


def atom_from_ground(g: GroundAtom) -> Atom:
    return Atom(g.pred, tuple(Const(v) for v in g.args))


def format_atoms(atoms) -> str:
    """Space-separated rendering used by the answer-set output, sorted."""
    return " ".join(str(a) for a in sorted(atoms))
