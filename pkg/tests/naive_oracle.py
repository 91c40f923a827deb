"""Brute-force reference evaluator used to cross-check the engine.

Deliberately independent of the engine's ground/stratify/evaluate path: no
ground program is built, no stratification is computed, and matching rescans
the full atom set on every pass.  Negation-as-failure is resolved by the
alternating fixpoint: starting from the empty reference set, repeatedly take
the least fixpoint of the rules with ``not`` evaluated against the previous
round's result.  Even rounds grow toward the set of certainly-true atoms,
odd rounds shrink toward the possibly-true ones; when the two meet, the
program has a total well-founded model, which for the locally stratified
programs used here is the unique answer the engine must produce.

Only the AST types are shared with the engine.
"""

from __future__ import annotations

from dataclasses import dataclass

from uatmsim.reasoner.syntax import (
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


@dataclass(frozen=True)
class OracleResult:
    atoms: frozenset[GroundAtom]
    status: str
    violated: frozenset[str]  # rendered ground constraint instances


def _expand_fact(atom: Atom) -> list[GroundAtom]:
    slots: list[list[int]] = [[]]
    for term in atom.args:
        if isinstance(term, Const):
            choices = [term.value]
        elif isinstance(term, Interval):
            choices = list(range(term.lo, term.hi + 1))
        else:
            raise AssertionError(f"non-ground fact arg: {term}")
        slots = [s + [c] for s in slots for c in choices]
    return [GroundAtom(atom.pred, tuple(s)) for s in slots]


def _unify(term, value: int, env: dict) -> dict | None:
    if isinstance(term, Const):
        return env if term.value == value else None
    if isinstance(term, Var):
        if term.name in env:
            return env if env[term.name] == value else None
        out = dict(env)
        out[term.name] = value
        return out
    if isinstance(term, Arith):
        if term.var in env:
            return env if env[term.var] + term.offset == value else None
        out = dict(env)
        out[term.var] = value - term.offset
        return out
    raise AssertionError("interval in body")


def _value(term, env: dict) -> int:
    if isinstance(term, Const):
        return term.value
    if isinstance(term, Var):
        return env[term.name]
    if isinstance(term, Arith):
        return env[term.var] + term.offset
    raise AssertionError("interval is not a value")


def _match_positives(positives: list[Atom], env: dict, atoms: frozenset) -> list[dict]:
    if not positives:
        return [env]
    first, rest = positives[0], positives[1:]
    results: list[dict] = []
    for candidate in atoms:
        if candidate.pred != first.pred or len(candidate.args) != len(first.args):
            continue
        attempt = env
        for term, value in zip(first.args, candidate.args):
            attempt = _unify(term, value, attempt)
            if attempt is None:
                break
        if attempt is not None:
            results.extend(_match_positives(rest, attempt, atoms))
    return results


def _negation_blocked(atom: Atom, env: dict, reference: frozenset) -> bool:
    """True when some atom in ``reference`` matches the negated literal."""
    probe: list[int | None] = []
    for term in atom.args:
        if isinstance(term, Var) and term.is_anonymous:
            probe.append(None)
        else:
            probe.append(_value(term, env))
    for candidate in reference:
        if candidate.pred != atom.pred or len(candidate.args) != len(atom.args):
            continue
        if all(p is None or p == v for p, v in zip(probe, candidate.args)):
            return True
    return False


def _body_holds(rule: Rule, env: dict, atoms: frozenset, reference: frozenset) -> bool:
    for cmp_ in rule.comparisons():
        if not cmp_.holds(_value(cmp_.left, env), _value(cmp_.right, env)):
            return False
    for negated in rule.negated_atoms():
        if _negation_blocked(negated, env, reference):
            return False
    return True


def _head_atoms(head: Atom, env: dict) -> list[GroundAtom]:
    slots: list[list[int]] = [[]]
    for term in head.args:
        if isinstance(term, Interval):
            choices = list(range(term.lo, term.hi + 1))
        else:
            choices = [_value(term, env)]
        slots = [s + [c] for s in slots for c in choices]
    return [GroundAtom(head.pred, tuple(s)) for s in slots]


def _least_fixpoint(program: Program, facts: frozenset, reference: frozenset) -> frozenset:
    atoms = set(facts)
    changed = True
    while changed:
        changed = False
        frozen = frozenset(atoms)
        for rule in program.rules:
            if rule.head is None:
                continue
            for env in _match_positives(list(rule.positive_atoms()), {}, frozen):
                if not _body_holds(rule, env, frozen, reference):
                    continue
                for derived in _head_atoms(rule.head, env):
                    if derived not in atoms:
                        atoms.add(derived)
                        changed = True
    return frozenset(atoms)


def _render_constraint(rule: Rule, env: dict) -> str:
    parts: list[str] = []
    for element in rule.body:
        if isinstance(element, Comparison):
            continue
        assert isinstance(element, Literal)
        rendered_args = []
        for term in element.atom.args:
            if isinstance(term, Var) and term.is_anonymous:
                rendered_args.append("_")
            else:
                rendered_args.append(str(_value(term, env)))
        if rendered_args:
            text = f"{element.atom.pred}({','.join(rendered_args)})"
        else:
            text = element.atom.pred
        parts.append(f"not {text}" if element.negated else text)
    return ":- " + ", ".join(parts) + "."


def oracle_model(program: Program, max_alternations: int = 200) -> OracleResult:
    """Evaluate ``program`` by alternating fixpoint; assert a total model."""
    facts = frozenset(a for f in program.facts for a in _expand_fact(f))
    wave: list[frozenset] = [frozenset()]
    while True:
        wave.append(_least_fixpoint(program, facts, wave[-1]))
        if len(wave) >= 3 and wave[-1] == wave[-3]:
            break
        if len(wave) > max_alternations:
            raise RuntimeError("alternating fixpoint did not converge")
    lower, upper = wave[-1], wave[-2]
    if lower != upper:
        extra = sorted(upper - lower) if upper >= lower else sorted(lower - upper)
        raise RuntimeError(f"program has no total model; undefined atoms: {extra[:5]}")
    model = lower

    violated: set[str] = set()
    for rule in program.rules:
        if rule.head is not None:
            continue
        for env in _match_positives(list(rule.positive_atoms()), {}, model):
            if _body_holds(rule, env, model, model):
                violated.add(_render_constraint(rule, env))
    status = "unsatisfiable" if violated else "satisfiable"
    return OracleResult(atoms=model, status=status, violated=frozenset(violated))
