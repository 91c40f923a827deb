"""Exception types raised by the rule-program front end and evaluator."""

from __future__ import annotations


class ReasonerError(Exception):
    """Base class for every error raised by this subpackage."""


class ParseError(ReasonerError):
    """Malformed source text; carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnsupportedConstructError(ParseError):
    """Syntactically recognizable construct outside the supported fragment."""

    def __init__(self, construct: str, line: int, column: int):
        super().__init__(f"unsupported construct: {construct}", line, column)
        self.construct = construct


class UnsafeRuleError(ReasonerError):
    """A head, negated, or comparison variable has no positive occurrence."""

    def __init__(self, variable: str, rule_text: str):
        super().__init__(
            f"unsafe rule: variable {variable} does not occur in any "
            f"positive body literal in: {rule_text}"
        )
        self.variable = variable
        self.rule_text = rule_text


class CapacityError(ReasonerError):
    """Grounding exceeded the configured atom budget."""

    def __init__(self, capacity: int, offending_rule: str):
        super().__init__(
            f"grounding exceeded capacity of {capacity} atoms while "
            f"instantiating: {offending_rule}"
        )
        self.capacity = capacity
        self.offending_rule = offending_rule


class StratificationError(ReasonerError):
    """The ground program has a cycle through negation."""

    def __init__(self, cycle: tuple):
        pretty = " -> ".join(str(a) for a in cycle)
        super().__init__(f"program is not stratifiable: negative cycle {pretty}")
        self.cycle = cycle
