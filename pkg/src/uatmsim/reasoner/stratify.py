"""Ground-level stratification.

Dependencies are taken between *ground atoms*, not predicates.  That is what
makes the traffic programs well-defined: at the predicate level the plan
carry-forward rule and the detour-request rule form a cycle through
negation, but every ground dependency crosses a time layer, so the ground
dependency graph is acyclic through negation and has a unique fixpoint.

An atom's stratum is its depth in the condensation of the dependency graph
(every dependency, positive or negative, increases depth by one; atoms in
the same strongly connected component share a stratum).  This is coarser
than the minimal predicate stratification but gives a total, deterministic
evaluation order in which every negated dependency is fully decided strictly
before it is consulted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import StratificationError
from .grounding import GroundProgram, Neg, NegPattern
from .syntax import GroundAtom


@dataclass(frozen=True)
class Stratification:
    """Atoms grouped by stratum; ``index`` maps each atom to its stratum."""

    strata: tuple[tuple[GroundAtom, ...], ...]
    index: dict

    def stratum_of(self, atom: GroundAtom) -> int:
        return self.index[atom]


def _dependency_edges(g: GroundProgram):
    """Adjacency: head -> (dependency, negated?) over possible atoms."""
    atoms = g.atoms_set()
    edges: dict[GroundAtom, list[tuple[GroundAtom, bool]]] = {a: [] for a in g.atoms}
    for rule in g.rules:
        if rule.head is None:
            continue  # constraints are checked after the fixpoint
        out = edges[rule.head]
        for element in rule.body:
            if isinstance(element, GroundAtom):
                out.append((element, False))
            elif isinstance(element, Neg):
                if element.atom in atoms:
                    out.append((element.atom, True))
            else:
                assert isinstance(element, NegPattern)
                for candidate in g.atoms:
                    if element.matches(candidate):
                        out.append((candidate, True))
    return edges


def _tarjan_sccs(nodes, edges):
    """Iterative Tarjan; emits components with dependencies emitted first."""
    index: dict = {}
    lowlink: dict = {}
    on_stack: set = set()
    stack: list = []
    sccs: list[list] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            node, edge_i = work[-1]
            if edge_i == 0:
                index[node] = lowlink[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            successors = edges[node]
            while edge_i < len(successors):
                succ = successors[edge_i][0]
                edge_i += 1
                if succ not in index:
                    work[-1] = (node, edge_i)
                    work.append((succ, 0))
                    advanced = True
                    break
                if succ in on_stack:
                    lowlink[node] = min(lowlink[node], index[succ])
            if advanced:
                continue
            work.pop()
            if lowlink[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                sccs.append(component)
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
    return sccs


def _negative_cycle(component: set, edges, start: GroundAtom, target: GroundAtom):
    """Path target -> ... -> start inside the component, for error reporting."""
    parents = {target: None}
    queue = [target]
    while queue:
        node = queue.pop(0)
        if node == start:
            path = [start]
            while parents[path[-1]] is not None:
                path.append(parents[path[-1]])
            return tuple(reversed(path)) + (target,)
        for succ, _ in edges[node]:
            if succ in component and succ not in parents:
                parents[succ] = node
                queue.append(succ)
    return (start, target, start)  # pragma: no cover - component is connected


def stratify(g: GroundProgram) -> Stratification:
    """Assign every possible atom a stratum.

    Raises :class:`StratificationError` citing a cycle when some strongly
    connected component contains a negative edge.
    """
    edges = _dependency_edges(g)
    sccs = _tarjan_sccs(list(g.atoms), edges)
    scc_of: dict[GroundAtom, int] = {}
    for i, component in enumerate(sccs):
        for atom in component:
            scc_of[atom] = i

    for component in sccs:
        members = set(component)
        for atom in component:
            for succ, negated in edges[atom]:
                if negated and succ in members:
                    raise StratificationError(_negative_cycle(members, edges, atom, succ))

    # Tarjan emits dependencies before dependents, so one pass suffices.
    scc_stratum = [0] * len(sccs)
    for i, component in enumerate(sccs):
        depth = 0
        for atom in component:
            for succ, _ in edges[atom]:
                j = scc_of[succ]
                if j != i:
                    depth = max(depth, scc_stratum[j] + 1)
        scc_stratum[i] = depth

    index = {atom: scc_stratum[scc_of[atom]] for atom in g.atoms}
    height = max(scc_stratum, default=-1) + 1
    grouped: list[list[GroundAtom]] = [[] for _ in range(height)]
    for atom in g.atoms:
        grouped[index[atom]].append(atom)
    strata = tuple(tuple(sorted(layer)) for layer in grouped)
    return Stratification(strata=strata, index=index)
