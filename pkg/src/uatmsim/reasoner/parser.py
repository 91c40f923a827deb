"""Tokenizer and recursive-descent parser for the rule-program fragment.

Accepted statements::

    fact.                       % variable-free atom, intervals allowed
    head :- body.               % normal rule
    :- body.                    % integrity constraint
    #show pred/arity.           % output directive
    % comment to end of line

Body elements are atoms, ``not`` atoms, and comparisons over ``<= < = !=``.
Terms are integers, variables, ``_`` (a fresh variable per occurrence),
``Var+k`` / ``Var-k`` offsets, and ``lo..hi`` intervals.  Anything else is
rejected with an error naming the construct; nothing is silently dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError, UnsafeRuleError, UnsupportedConstructError
from .syntax import (
    Atom,
    BodyElement,
    COMPARISON_OPS,
    Comparison,
    Const,
    Interval,
    Literal,
    Program,
    Rule,
    Term,
    Var,
    Arith,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<COMMENT>%[^\n]*)
  | (?P<DOTDOT>\.\.)
  | (?P<IMPL>:-)
  | (?P<DIRECTIVE>\#[a-z]+)
  | (?P<INT>\d+)
  | (?P<VAR>[A-Z][A-Za-z0-9_]*)
  | (?P<NAME>[a-z][A-Za-z0-9_]*)
  | (?P<ANON>_)
  | (?P<OP><=|!=|>=|<|>|=)
  | (?P<LPAREN>\()
  | (?P<RPAREN>\))
  | (?P<COMMA>,)
  | (?P<DOT>\.)
  | (?P<PLUS>\+)
  | (?P<MINUS>-)
  | (?P<SLASH>/)
""",
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or ""
        tok_text = m.group()
        col = pos - line_start + 1
        if kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, tok_text, line, col))
        newlines = tok_text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + tok_text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.anon_counter = 0

    # -- token plumbing -----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"expected {kind} but found {tok.text or 'end of input'!r}",
                tok.line,
                tok.column,
            )
        return self.next()

    # -- grammar ------------------------------------------------------------

    def parse_program(self) -> Program:
        rules: list[Rule] = []
        facts: list[Atom] = []
        shows: list[tuple[str, int]] = []
        while self.peek().kind != "EOF":
            tok = self.peek()
            if tok.kind == "DIRECTIVE":
                shows.append(self.parse_directive())
            elif tok.kind == "IMPL":
                self.next()
                body = self.parse_body()
                self.expect("DOT")
                rules.append(self.finish_rule(None, body))
            else:
                self.parse_statement(rules, facts)
        return Program(tuple(rules), tuple(facts), tuple(shows))

    def parse_directive(self) -> tuple[str, int]:
        tok = self.next()
        if tok.text != "#show":
            raise UnsupportedConstructError(tok.text, tok.line, tok.column)
        name = self.expect("NAME")
        self.expect("SLASH")
        arity = self.expect("INT")
        self.expect("DOT")
        return (name.text, int(arity.text))

    def parse_statement(self, rules: list[Rule], facts: list[Atom]) -> None:
        head = self.parse_atom(allow_interval=True)
        tok = self.peek()
        if tok.kind == "DOT":
            self.next()
            if head.variables():
                # bodyless statement with variables: unavoidably unsafe
                raise UnsafeRuleError(sorted(head.variables())[0], f"{head}.")
            facts.append(head)
            return
        if tok.kind == "IMPL":
            self.next()
            body = self.parse_body()
            self.expect("DOT")
            rules.append(self.finish_rule(head, body))
            return
        raise ParseError(
            f"expected '.' or ':-' but found {tok.text!r}", tok.line, tok.column
        )

    def finish_rule(self, head, body: tuple[BodyElement, ...]) -> Rule:
        rule = Rule(head, body)
        self.check_safety(rule)
        return rule

    def parse_body(self) -> tuple[BodyElement, ...]:
        elements: list[BodyElement] = [self.parse_body_element()]
        while self.peek().kind == "COMMA":
            self.next()
            elements.append(self.parse_body_element())
        return tuple(elements)

    def parse_body_element(self) -> BodyElement:
        tok = self.peek()
        if tok.kind == "NAME" and tok.text == "not":
            self.next()
            atom_tok = self.peek()
            if atom_tok.kind != "NAME":
                raise UnsupportedConstructError(
                    "negation of a non-atom", atom_tok.line, atom_tok.column
                )
            return Literal(self.parse_atom(allow_interval=False), negated=True)
        if tok.kind == "NAME":
            return Literal(self.parse_atom(allow_interval=False), negated=False)
        # otherwise this must be a comparison between two terms
        left = self.parse_term(allow_interval=False, allow_anonymous=False)
        op_tok = self.peek()
        if op_tok.kind != "OP":
            raise ParseError(
                f"expected comparison operator but found {op_tok.text!r}",
                op_tok.line,
                op_tok.column,
            )
        if op_tok.text not in COMPARISON_OPS:
            raise UnsupportedConstructError(
                f"comparison operator {op_tok.text}", op_tok.line, op_tok.column
            )
        self.next()
        right = self.parse_term(allow_interval=False, allow_anonymous=False)
        return Comparison(left, op_tok.text, right)

    def parse_atom(self, allow_interval: bool) -> Atom:
        name = self.expect("NAME")
        if name.text == "not":
            raise ParseError("'not' is reserved", name.line, name.column)
        if self.peek().kind != "LPAREN":
            return Atom(name.text, ())
        self.next()
        args: list[Term] = [self.parse_term(allow_interval, allow_anonymous=True)]
        while self.peek().kind == "COMMA":
            self.next()
            args.append(self.parse_term(allow_interval, allow_anonymous=True))
        self.expect("RPAREN")
        return Atom(name.text, tuple(args))

    def parse_term(self, allow_interval: bool, allow_anonymous: bool) -> Term:
        tok = self.peek()
        if tok.kind in ("MINUS", "INT"):
            value = self.parse_int()
            if self.peek().kind == "DOTDOT":
                dots = self.next()
                hi = self.parse_int()
                if not allow_interval:
                    raise UnsupportedConstructError(
                        "interval in rule body", dots.line, dots.column
                    )
                if value > hi:
                    raise ParseError(
                        f"interval {value}..{hi} has lower bound above upper bound",
                        dots.line,
                        dots.column,
                    )
                return Interval(value, hi)
            return Const(value)
        if tok.kind == "VAR":
            self.next()
            nxt = self.peek()
            if nxt.kind in ("PLUS", "MINUS"):
                sign = 1 if nxt.kind == "PLUS" else -1
                self.next()
                offset = self.expect("INT")
                return Arith(tok.text, sign * int(offset.text))
            return Var(tok.text)
        if tok.kind == "ANON":
            self.next()
            if not allow_anonymous:
                raise ParseError(
                    "anonymous variable not allowed here", tok.line, tok.column
                )
            self.anon_counter += 1
            return Var(f"_{self.anon_counter}")
        if tok.kind == "NAME":
            raise UnsupportedConstructError(
                f"symbolic constant or function term {tok.text!r}",
                tok.line,
                tok.column,
            )
        raise ParseError(
            f"expected a term but found {tok.text or 'end of input'!r}",
            tok.line,
            tok.column,
        )

    def parse_int(self) -> int:
        if self.peek().kind == "MINUS":
            self.next()
            return -int(self.expect("INT").text)
        return int(self.expect("INT").text)

    # -- validation ----------------------------------------------------------

    def check_safety(self, rule: Rule) -> None:
        bound: set[str] = set()
        for atom in rule.positive_atoms():
            bound |= atom.variables()
        if rule.head is not None:
            for v in sorted(rule.head.variables()):
                if v.startswith("_"):
                    raise UnsafeRuleError("_", str(rule))
                if v not in bound:
                    raise UnsafeRuleError(v, str(rule))
        for atom in rule.negated_atoms():
            for v in sorted(atom.variables()):
                if v.startswith("_"):
                    continue  # anonymous under negation means "no match exists"
                if v not in bound:
                    raise UnsafeRuleError(v, str(rule))
        for cmp_ in rule.comparisons():
            for v in sorted(cmp_.variables()):
                if v.startswith("_") or v not in bound:
                    raise UnsafeRuleError(v, str(rule))


def parse_program(text: str) -> Program:
    """Parse source text into a :class:`Program`.

    Raises :class:`ParseError` with line/column on malformed input,
    :class:`UnsupportedConstructError` on out-of-fragment constructs, and
    :class:`UnsafeRuleError` when a rule breaks the safety condition.
    """
    return _Parser(text).parse_program()
