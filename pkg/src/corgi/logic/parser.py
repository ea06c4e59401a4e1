"""Parser for the knowledge-base language.

Grammar (clauses end with `.`):

    clause  := term (":-" term ("," term)*)? "."
    term    := additive ((= | == | >= | =< | > | <) additive)?
    additive:= multiplicative ((+ | -) multiplicative)*
    mult    := primary ((* | /) primary)*
    primary := NUMBER | VARIABLE | atom ("(" term ("," term)* ")")? | "(" term ")"

`%` starts a comment running to end of line. Two structured comment forms
are recognized:

    % @user-state        -- marks the next clause as a user-state fact
    %% domain: <name>    -- domain bucket for all following clauses
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from ..errors import ProgramSyntaxError
from .terms import Atom, Compound, Number, Term, Variable, _fresh_ids

_COMPARE_OPS = ("==", ">=", "=<", ":-", "=", ">", "<")  # ordered, longest first
_PUNCT = ("(", ")", ",", ".", "+", "-", "*", "/")


@dataclass
class _Token:
    kind: str  # atom | var | num | op | punct
    text: str
    line: int


@dataclass
class RawClause:
    head: Term
    body: List[Term]
    line: int
    user_state: bool = False
    domain: str = "everyday"


def tokenize(text: str) -> Tuple[List[_Token], List[Tuple[int, str]]]:
    """Token stream plus a list of (line, pragma) structured comments."""
    tokens: List[_Token] = []
    pragmas: List[Tuple[int, str]] = []
    line = 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            continue
        if c == "%":
            j = text.find("\n", i)
            comment = text[i:j if j != -1 else n]
            stripped = comment.lstrip("%").strip()
            if stripped.startswith("@") or stripped.startswith("domain:"):
                pragmas.append((line, stripped))
            i = j if j != -1 else n
            continue
        for op in _COMPARE_OPS:
            if text.startswith(op, i):
                tokens.append(_Token("op", op, line))
                i += len(op)
                break
        else:
            if c.isdigit():
                j = i
                while j < n and text[j].isdigit():
                    j += 1
                # decimal point only when a digit follows (else it ends a clause)
                if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                    j += 1
                    while j < n and text[j].isdigit():
                        j += 1
                tokens.append(_Token("num", text[i:j], line))
                i = j
            elif c.isalpha() or c == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                word = text[i:j]
                kind = "var" if (word[0].isupper() or word[0] == "_") else "atom"
                tokens.append(_Token(kind, word, line))
                i = j
            elif c in _PUNCT:
                tokens.append(_Token("punct", c, line))
                i += 1
            else:
                raise ProgramSyntaxError(line, f"unexpected character {c!r}")
    return tokens, pragmas


class _TermParser:
    def __init__(self, tokens: List[_Token], end_line: int):
        self.tokens = tokens
        self.pos = 0
        self.end_line = end_line
        # anonymous `_` occurrences each become a distinct fresh variable
        self._anon = 0

    def _peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self) -> _Token:
        tok = self._peek()
        if tok is None:
            raise ProgramSyntaxError(self.end_line, "unexpected end of clause")
        self.pos += 1
        return tok

    def _expect(self, text: str) -> _Token:
        tok = self._next()
        if tok.text != text:
            raise ProgramSyntaxError(tok.line, f"expected {text!r}, found {tok.text!r}")
        return tok

    def parse_term(self) -> Term:
        left = self._additive()
        tok = self._peek()
        if tok is not None and tok.kind == "op" and tok.text != ":-":
            self._next()
            right = self._additive()
            return Compound(tok.text, (left, right))
        return left

    def _additive(self) -> Term:
        left = self._multiplicative()
        while True:
            tok = self._peek()
            if tok is not None and tok.kind == "punct" and tok.text in ("+", "-"):
                self._next()
                right = self._multiplicative()
                left = Compound(tok.text, (left, right))
            else:
                return left

    def _multiplicative(self) -> Term:
        left = self._primary()
        while True:
            tok = self._peek()
            if tok is not None and tok.kind == "punct" and tok.text in ("*", "/"):
                self._next()
                right = self._primary()
                left = Compound(tok.text, (left, right))
            else:
                return left

    def _primary(self) -> Term:
        tok = self._next()
        if tok.kind == "num":
            return Number(Fraction(tok.text))
        if tok.kind == "var":
            if tok.text == "_":
                self._anon += 1
                return Variable("_", next(_fresh_ids))
            return Variable(tok.text)
        if tok.kind == "atom":
            nxt = self._peek()
            if nxt is not None and nxt.text == "(":
                self._next()
                args = [self.parse_term()]
                while True:
                    sep = self._next()
                    if sep.text == ",":
                        args.append(self.parse_term())
                    elif sep.text == ")":
                        break
                    else:
                        raise ProgramSyntaxError(
                            sep.line, f"expected ',' or ')', found {sep.text!r}")
                return Compound(tok.text, tuple(args))
            return Atom(tok.text)
        if tok.text == "(":
            inner = self.parse_term()
            self._expect(")")
            return inner
        if tok.text == "-":
            operand = self._primary()
            if isinstance(operand, Number):
                return Number(-operand.value)
            return Compound("-", (operand,))
        raise ProgramSyntaxError(tok.line, f"unexpected token {tok.text!r}")

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)


def parse_term_text(text: str) -> Term:
    """Single term from text (query strings on the CLI, stored rules)."""
    tokens, _ = tokenize(text)
    if not tokens:
        raise ProgramSyntaxError(1, "empty term")
    if tokens[-1].text == "." and tokens[-1].kind == "punct":
        tokens = tokens[:-1]
    parser = _TermParser(tokens, tokens[-1].line if tokens else 1)
    term = parser.parse_term()
    if not parser.at_end():
        tok = parser._peek()
        raise ProgramSyntaxError(tok.line, f"trailing input {tok.text!r}")
    return term


def parse_clauses(text: str) -> List[RawClause]:
    """All clauses of a program, in source order."""
    tokens, pragmas = tokenize(text)
    clauses: List[RawClause] = []
    # split token stream on top-level '.'
    start = 0
    depth = 0
    pragma_iter = list(pragmas)
    domain = "everyday"
    for idx, tok in enumerate(tokens):
        if tok.kind == "punct" and tok.text == "(":
            depth += 1
        elif tok.kind == "punct" and tok.text == ")":
            depth -= 1
            if depth < 0:
                raise ProgramSyntaxError(tok.line, "unbalanced ')'")
        elif tok.kind == "punct" and tok.text == "." and depth == 0:
            chunk = tokens[start:idx]
            if not chunk:
                raise ProgramSyntaxError(tok.line, "empty clause")
            first_line = chunk[0].line
            user_state = False
            while pragma_iter and pragma_iter[0][0] <= first_line:
                _, pragma = pragma_iter.pop(0)
                if pragma.startswith("@user-state"):
                    user_state = True
                elif pragma.startswith("domain:"):
                    domain = pragma.split(":", 1)[1].strip()
            clauses.append(_build_clause(chunk, tok.line, user_state, domain))
            start = idx + 1
    if start < len(tokens):
        raise ProgramSyntaxError(tokens[-1].line, "unterminated clause (missing '.')")
    if depth != 0:
        raise ProgramSyntaxError(tokens[-1].line if tokens else 1, "unbalanced '('")
    return clauses


def _build_clause(chunk: List[_Token], end_line: int, user_state: bool,
                  domain: str) -> RawClause:
    # split off the body at a top-level ':-'
    head_toks: List[_Token] = chunk
    body_toks: Optional[List[_Token]] = None
    depth = 0
    for idx, tok in enumerate(chunk):
        if tok.kind == "punct" and tok.text == "(":
            depth += 1
        elif tok.kind == "punct" and tok.text == ")":
            depth -= 1
        elif tok.kind == "op" and tok.text == ":-" and depth == 0:
            head_toks = chunk[:idx]
            body_toks = chunk[idx + 1:]
            break

    hp = _TermParser(head_toks, end_line)
    head = hp.parse_term()
    if not hp.at_end():
        tok = hp._peek()
        raise ProgramSyntaxError(tok.line, f"unexpected {tok.text!r} after clause head")
    if not isinstance(head, (Atom, Compound)) or (
            isinstance(head, Compound) and head.functor in ("+", "-", "*", "/")):
        raise ProgramSyntaxError(head_toks[0].line, "clause head must be callable")

    body: List[Term] = []
    if body_toks is not None:
        if not body_toks:
            raise ProgramSyntaxError(end_line, "empty body after ':-'")
        bp = _TermParser(body_toks, end_line)
        body.append(bp.parse_term())
        while not bp.at_end():
            bp._expect(",")
            body.append(bp.parse_term())
    return RawClause(head=head, body=body, line=head_toks[0].line,
                     user_state=user_state, domain=domain)
