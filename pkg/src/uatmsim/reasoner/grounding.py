"""Instantiation of schematic rules over the derivable-atom universe.

The grounder computes the set of *possible* atoms (everything derivable when
negation is read optimistically) by semi-naive bottom-up matching, and emits
one ground rule instance per successful positive-body match.  Comparisons and
arithmetic offsets are evaluated during matching and eliminated; negated
literals are kept, either as ground atoms or as wildcard patterns when they
contain anonymous variables (``not plan(A, 1, V, _)`` holds when no atom
matches the pattern).

Instances whose negated literal contradicts an explicit fact can never fire
and are dropped on the spot.  Negated atoms that are merely *not possible*
are kept in the instance body — they are trivially satisfied at evaluation
time — so that reported integrity-constraint violations read like the source
rule they came from.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import CapacityError
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
)

DEFAULT_CAPACITY = 1_000_000


@dataclass(frozen=True)
class Neg:
    """A negated ground literal ``not atom``."""

    atom: GroundAtom

    def __str__(self) -> str:
        return f"not {self.atom}"


@dataclass(frozen=True)
class NegPattern:
    """A negated literal with wildcards: true iff no true atom matches."""

    pred: str
    args: tuple[Optional[int], ...]  # None is a wildcard position

    def matches(self, atom: GroundAtom) -> bool:
        if atom.pred != self.pred or len(atom.args) != len(self.args):
            return False
        return all(p is None or p == v for p, v in zip(self.args, atom.args))

    def __str__(self) -> str:
        rendered = ",".join("_" if a is None else str(a) for a in self.args)
        return f"not {self.pred}({rendered})"


GroundBodyElement = Union[GroundAtom, Neg, NegPattern]


@dataclass(frozen=True)
class GroundRule:
    """One instance of a source rule; ``head is None`` for constraints."""

    head: Optional[GroundAtom]
    body: tuple[GroundBodyElement, ...]

    def positive(self) -> tuple[GroundAtom, ...]:
        return tuple(e for e in self.body if isinstance(e, GroundAtom))

    def negated(self) -> tuple[Neg, ...]:
        return tuple(e for e in self.body if isinstance(e, Neg))

    def patterns(self) -> tuple[NegPattern, ...]:
        return tuple(e for e in self.body if isinstance(e, NegPattern))

    def __str__(self) -> str:
        body = ", ".join(str(e) for e in self.body)
        if self.head is None:
            return f":- {body}."
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {body}."


@dataclass(frozen=True)
class GroundProgram:
    """Result of grounding: expanded facts, rule instances, possible atoms."""

    facts: tuple[GroundAtom, ...]
    rules: tuple[GroundRule, ...]
    shows: tuple[tuple[str, int], ...]
    atoms: tuple[GroundAtom, ...]  # every possible atom, first-seen order

    @property
    def atom_count(self) -> int:
        return len(self.atoms)

    def atoms_set(self) -> frozenset[GroundAtom]:
        return frozenset(self.atoms)


# ---------------------------------------------------------------------------
# Term-level helpers
# ---------------------------------------------------------------------------

Binding = dict


def _expand_ground_args(args) -> Iterator[tuple[int, ...]]:
    """All integer tuples for variable-free args (intervals multiply out)."""
    if not args:
        yield ()
        return
    head, rest = args[0], args[1:]
    if isinstance(head, Const):
        choices = (head.value,)
    elif isinstance(head, Interval):
        choices = tuple(head.values())
    else:  # pragma: no cover - parser guarantees variable-free facts
        raise AssertionError(f"non-ground term in fact: {head}")
    for v in choices:
        for tail in _expand_ground_args(rest):
            yield (v,) + tail


def _match_atom(atom: Atom, ground: GroundAtom, binding: Binding) -> Optional[Binding]:
    """Extend ``binding`` so that ``atom`` equals ``ground``, or None."""
    if atom.pred != ground.pred or len(atom.args) != len(ground.args):
        return None
    out = binding
    copied = False
    for term, value in zip(atom.args, ground.args):
        if isinstance(term, Const):
            if term.value != value:
                return None
        elif isinstance(term, Var):
            bound = out.get(term.name)
            if bound is None:
                if not copied:
                    out = dict(out)
                    copied = True
                out[term.name] = value
            elif bound != value:
                return None
        elif isinstance(term, Arith):
            bound = out.get(term.var)
            if bound is None:
                if not copied:
                    out = dict(out)
                    copied = True
                out[term.var] = value - term.offset
            elif bound + term.offset != value:
                return None
        else:  # pragma: no cover - parser rejects intervals in body atoms
            raise AssertionError("interval term in body atom")
    return out


def _eval_term(term, binding: Binding) -> int:
    if isinstance(term, Const):
        return term.value
    if isinstance(term, Var):
        return binding[term.name]
    if isinstance(term, Arith):
        return binding[term.var] + term.offset
    raise AssertionError("interval term cannot be evaluated")  # pragma: no cover


def _substitute_negated(atom: Atom, binding: Binding) -> Union[GroundAtom, NegPattern]:
    values: list[Optional[int]] = []
    wildcard = False
    for term in atom.args:
        if isinstance(term, Var) and term.is_anonymous:
            values.append(None)
            wildcard = True
        else:
            values.append(_eval_term(term, binding))
    if wildcard:
        return NegPattern(atom.pred, tuple(values))
    return GroundAtom(atom.pred, tuple(v for v in values if v is not None))


def _substitute_head(atom: Atom, binding: Binding) -> list[GroundAtom]:
    """Instantiate a head; interval arguments expand to one atom per value."""
    prefix: list[list[int]] = [[]]
    for term in atom.args:
        if isinstance(term, Interval):
            choices = list(term.values())
        else:
            choices = [_eval_term(term, binding)]
        prefix = [p + [c] for p in prefix for c in choices]
    return [GroundAtom(atom.pred, tuple(p)) for p in prefix]


# ---------------------------------------------------------------------------
# Per-rule join plans
# ---------------------------------------------------------------------------

class _RulePlan:
    """Static matching data for one rule: literal order and guard placement."""

    def __init__(self, rule: Rule):
        self.rule = rule
        self.positives: list[Atom] = list(rule.positive_atoms())
        self.negatives: list[Atom] = list(rule.negated_atoms())
        self.comparisons: list[Comparison] = list(rule.comparisons())
        self._seed_cache: dict[int, tuple[list[int], list[list[Comparison]]]] = {}

    def plan_for_seed(self, seed: int) -> tuple[list[int], list[list[Comparison]]]:
        cached = self._seed_cache.get(seed)
        if cached is None:
            order = self.order_for_seed(seed)
            cached = (order, self.guards_along(order))
            self._seed_cache[seed] = cached
        return cached

    def order_for_seed(self, seed: int) -> list[int]:
        """Join order starting at ``seed``, then greedily by shared variables."""
        remaining = [i for i in range(len(self.positives)) if i != seed]
        order = [seed]
        bound = set(self.positives[seed].variables())
        while remaining:
            best = max(
                remaining,
                key=lambda i: (len(self.positives[i].variables() & bound), -i),
            )
            order.append(best)
            bound |= self.positives[best].variables()
            remaining.remove(best)
        return order

    def guards_along(self, order: list[int]) -> list[list[Comparison]]:
        """guards[k] = comparisons decidable once order[:k+1] are matched.

        Index 0 holds variable-free comparisons, checked before any join.
        """
        slots: list[list[Comparison]] = [[] for _ in range(len(order) + 1)]
        bound: set[str] = set()
        placed = set()
        for cmp_ in self.comparisons:
            if not cmp_.variables():
                slots[0].append(cmp_)
                placed.add(id(cmp_))
        for k, lit_index in enumerate(order):
            bound |= self.positives[lit_index].variables()
            for cmp_ in self.comparisons:
                if id(cmp_) in placed:
                    continue
                if cmp_.variables() <= bound:
                    slots[k + 1].append(cmp_)
                    placed.add(id(cmp_))
        return slots


# ---------------------------------------------------------------------------
# The grounder
# ---------------------------------------------------------------------------

class _Grounder:
    def __init__(self, program: Program, capacity: int):
        self.program = program
        self.capacity = capacity
        self.facts: dict[GroundAtom, None] = {}
        self.possible: dict[GroundAtom, None] = {}
        self.by_sig: dict[tuple[str, int], list[GroundAtom]] = {}
        self.instances: dict[tuple, GroundRule] = {}
        self.plans = [_RulePlan(r) for r in program.rules]

    def run(self) -> GroundProgram:
        self._load_facts()
        self._instantiate_positive_free_rules()
        delta = list(self.possible)
        while delta:
            delta_by_sig: dict[tuple[str, int], list[GroundAtom]] = {}
            for atom in delta:
                delta_by_sig.setdefault((atom.pred, len(atom.args)), []).append(atom)
            new: dict[GroundAtom, None] = {}
            for plan in self.plans:
                if plan.positives:
                    self._instantiate_rule(plan, delta_by_sig, new)
            delta = list(new)
        return GroundProgram(
            facts=tuple(self.facts),
            rules=tuple(self.instances.values()),
            shows=self.program.shows,
            atoms=tuple(self.possible),
        )

    # -- loading -------------------------------------------------------------

    def _load_facts(self) -> None:
        for fact in self.program.facts:
            for args in _expand_ground_args(fact.args):
                atom = GroundAtom(fact.pred, args)
                if atom not in self.facts:
                    self.facts[atom] = None
                    self._add_possible(atom, f"{fact}.")

    def _add_possible(self, atom: GroundAtom, origin: str) -> bool:
        if atom in self.possible:
            return False
        if len(self.possible) >= self.capacity:
            raise CapacityError(self.capacity, origin)
        self.possible[atom] = None
        self.by_sig.setdefault((atom.pred, len(atom.args)), []).append(atom)
        return True

    # -- instantiation -------------------------------------------------------

    def _instantiate_positive_free_rules(self) -> None:
        for plan in self.plans:
            if plan.positives:
                continue
            if not all(
                cmp_.holds(_eval_term(cmp_.left, {}), _eval_term(cmp_.right, {}))
                for cmp_ in plan.comparisons
            ):
                continue
            self._emit(plan, {}, into=None)

    def _instantiate_rule(self, plan, delta_by_sig, new: dict) -> None:
        for seed in range(len(plan.positives)):
            seed_atom = plan.positives[seed]
            candidates = delta_by_sig.get((seed_atom.pred, len(seed_atom.args)), [])
            if not candidates:
                continue
            order, guards = plan.plan_for_seed(seed)
            if not all(
                g.holds(_eval_term(g.left, {}), _eval_term(g.right, {}))
                for g in guards[0]
            ):
                continue
            self._join(plan, order, guards, 0, {}, candidates, new)

    def _join(self, plan, order, guards, depth, binding, seed_candidates, new) -> None:
        if depth == len(order):
            self._emit(plan, binding, into=new)
            return
        literal = plan.positives[order[depth]]
        if depth == 0:
            pool = seed_candidates
        else:
            pool = self.by_sig.get((literal.pred, len(literal.args)), [])
        for candidate in pool:
            extended = _match_atom(literal, candidate, binding)
            if extended is None:
                continue
            ok = True
            for g in guards[depth + 1]:
                if not g.holds(_eval_term(g.left, extended), _eval_term(g.right, extended)):
                    ok = False
                    break
            if ok:
                self._join(plan, order, guards, depth + 1, extended, seed_candidates, new)

    def _emit(self, plan, binding: Binding, into: Optional[dict]) -> None:
        body: list[GroundBodyElement] = []
        for element in plan.rule.body:
            if isinstance(element, Comparison):
                continue  # evaluated during the join
            assert isinstance(element, Literal)
            if not element.negated:
                body.append(_ground_of(element.atom, binding))
            else:
                negated = _substitute_negated(element.atom, binding)
                if isinstance(negated, GroundAtom):
                    if negated in self.facts:
                        return  # contradicts an explicit fact: can never fire
                    body.append(Neg(negated))
                else:
                    if any(negated.matches(f) for f in self.facts):
                        return
                    body.append(negated)
        heads: list[Optional[GroundAtom]]
        if plan.rule.head is None:
            heads = [None]
        else:
            heads = list(_substitute_head(plan.rule.head, binding))
        for head in heads:
            instance = GroundRule(head, tuple(body))
            key = (head, instance.body)
            if key in self.instances:
                continue
            if len(self.instances) >= self.capacity:
                raise CapacityError(self.capacity, str(plan.rule))
            self.instances[key] = instance
            if head is not None and self._add_possible(head, str(plan.rule)):
                if into is not None:
                    into[head] = None


def _ground_of(atom: Atom, binding: Binding) -> GroundAtom:
    return GroundAtom(atom.pred, tuple(_eval_term(t, binding) for t in atom.args))


def ground(program: Program, capacity: int = DEFAULT_CAPACITY) -> GroundProgram:
    """Instantiate ``program`` over its derivable-atom universe.

    Raises :class:`CapacityError` naming the offending rule when the possible
    atom set (or the instance count) would exceed ``capacity``.
    """
    return _Grounder(program, capacity).run()
