"""Fixpoint evaluation of a stratified ground program.

Evaluation walks the strata in order and runs a counter-based semi-naive
fixpoint inside each one: every rule instance keeps the number of positive
body atoms not yet derived, and an atom becoming true decrements the
counters of the instances watching it.  An instance fires when its counter
hits zero and none of its negated atoms (or wildcard patterns) hold — all of
which live in strictly earlier strata, so they are already decided.

Integrity constraints are checked once the fixpoint over all strata is
complete; *every* violated ground constraint is reported, not just the
first, because the point of the exercise is explaining which requirements a
mission run breaks.  ``#show`` directives never influence evaluation; they
are applied only when a model is rendered.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

from .grounding import GroundProgram, GroundRule, Neg, NegPattern, ground
from .parser import parse_program
from .stratify import Stratification, stratify
from .syntax import GroundAtom, Program

SATISFIABLE = "satisfiable"
UNSATISFIABLE = "unsatisfiable"


@dataclass(frozen=True)
class Model:
    """The unique answer of a stratified program, plus constraint verdicts."""

    atoms: frozenset[GroundAtom]
    status: str
    violated: tuple[GroundRule, ...]
    shows: tuple[tuple[str, int], ...] = ()

    @property
    def satisfiable(self) -> bool:
        return self.status == SATISFIABLE

    def sorted_atoms(self) -> list[GroundAtom]:
        return sorted(self.atoms)

    def shown_atoms(self) -> list[GroundAtom]:
        """Atoms selected by #show directives (all atoms when none exist)."""
        if not self.shows:
            return self.sorted_atoms()
        wanted = set(self.shows)
        return [a for a in self.sorted_atoms() if (a.pred, len(a.args)) in wanted]

    def render_text(self, show_all: bool = False) -> str:
        atoms = self.sorted_atoms() if show_all else self.shown_atoms()
        lines = [" ".join(str(a) for a in atoms), self.status.upper()]
        lines += [str(c) for c in self.violated]
        return "\n".join(lines) + "\n"

    def to_json_dict(self, show_all: bool = False) -> dict:
        atoms = self.sorted_atoms() if show_all else self.shown_atoms()
        return {
            "status": self.status,
            "atoms": [str(a) for a in atoms],
            "violated": [str(c) for c in self.violated],
        }

    def to_json(self, show_all: bool = False) -> str:
        return json.dumps(self.to_json_dict(show_all), sort_keys=True)


def query(model: Model, pred: str, arity: int) -> tuple[tuple[int, ...], ...]:
    """All argument tuples of ``pred/arity`` in the model, sorted.

    Unknown predicates yield the empty tuple; that is an answer, not an
    error.
    """
    rows = [a.args for a in model.atoms if a.pred == pred and len(a.args) == arity]
    return tuple(sorted(rows))


def _negations_hold(rule: GroundRule, true_set, true_by_sig) -> bool:
    for element in rule.body:
        if isinstance(element, Neg):
            if element.atom in true_set:
                return False
        elif isinstance(element, NegPattern):
            sig = (element.pred, len(element.args))
            for atom in true_by_sig.get(sig, ()):
                if element.matches(atom):
                    return False
    return True


def evaluate(
    g: GroundProgram,
    strat: Optional[Stratification] = None,
    on_stratum: Optional[Callable[[int, int], None]] = None,
) -> Model:
    """Compute the least fixpoint model of ``g`` stratum by stratum.

    ``on_stratum(index, true_count)`` is invoked after each stratum for
    observability in tests. Raises :class:`StratificationError` when the
    ground program has a cycle through negation; evaluation itself always
    terminates.
    """
    if strat is None:
        strat = stratify(g)

    true_set: set[GroundAtom] = set(g.facts)
    true_by_sig: dict[tuple[str, int], list[GroundAtom]] = {}
    for atom in g.facts:
        true_by_sig.setdefault((atom.pred, len(atom.args)), []).append(atom)

    constraints = [r for r in g.rules if r.head is None]
    by_stratum: dict[int, list[GroundRule]] = {}
    for rule in g.rules:
        if rule.head is not None:
            by_stratum.setdefault(strat.index[rule.head], []).append(rule)

    def mark_true(atom: GroundAtom) -> None:
        true_set.add(atom)
        true_by_sig.setdefault((atom.pred, len(atom.args)), []).append(atom)

    for stratum_index, layer in enumerate(strat.strata):
        rules = by_stratum.get(stratum_index, [])
        remaining: list[int] = []
        watchers: dict[GroundAtom, list[int]] = {}
        queue: list[GroundAtom] = []

        def fire(rule: GroundRule) -> None:
            head = rule.head
            assert head is not None
            if head in true_set:
                return
            if _negations_hold(rule, true_set, true_by_sig):
                mark_true(head)
                queue.append(head)

        for i, rule in enumerate(rules):
            missing = 0
            for atom in rule.positive():
                if atom not in true_set:
                    missing += 1
                    watchers.setdefault(atom, []).append(i)
            remaining.append(missing)
            if missing == 0:
                fire(rule)

        while queue:
            atom = queue.pop()
            for i in watchers.get(atom, ()):  # one entry per occurrence
                remaining[i] -= 1
                if remaining[i] == 0:
                    fire(rules[i])

        if on_stratum is not None:
            on_stratum(stratum_index, len(true_set))

    violated = [
        c
        for c in constraints
        if all(a in true_set for a in c.positive())
        and _negations_hold(c, true_set, true_by_sig)
    ]
    violated.sort(key=str)
    status = UNSATISFIABLE if violated else SATISFIABLE
    return Model(
        atoms=frozenset(true_set),
        status=status,
        violated=tuple(violated),
        shows=g.shows,
    )


def solve_program(program: Program, capacity: Optional[int] = None) -> Model:
    """Ground and evaluate a parsed program."""
    if capacity is None:
        g = ground(program)
    else:
        g = ground(program, capacity)
    return evaluate(g)


def solve_text(text: str, capacity: Optional[int] = None) -> Model:
    """Parse, ground, and evaluate source text."""
    return solve_program(parse_program(text), capacity)
