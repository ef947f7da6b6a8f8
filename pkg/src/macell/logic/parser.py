"""Recursive-descent parser for the formula language.

    formula := disj
    disj    := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | quant | atom | '(' formula ')' | 'true' | 'false'
    quant   := ('E' | 'A' | 'E[<=' INT ']' | 'E[=' INT ']' | 'E[<' INT ']'
                | 'E[>=' INT ']') VAR '.' unary
    atom    := NAME '(' term (',' term)* ')' | term '=' term
    term    := VAR | '#' ELEMENT_ID

`Ex.` and `Ax.` are the plain quantifiers binding `x`.
"""

from __future__ import annotations

import re

from macell.logic.syntax import (
    FALSE, TRUE, Count, Eq, Exists, Forall, Formula, Param, Rel, Var, conj, disj, Not,
)

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<count>E\[(?P<op><=|>=|=|<)\s*(?P<int>\d+)\s*\])"
    r"|(?P<param>#[A-Za-z0-9_\-:]+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>[!&|().,=])"
    r")"
)


class FormulaSyntaxError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class _Tokens:
    def __init__(self, text):
        self.items = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise FormulaSyntaxError(f"unexpected character {text[pos:pos + 1]!r}", pos)
            start = m.start(m.lastgroup)
            if m.group("count"):
                self.items.append(("count", (m.group("op"), int(m.group("int"))), start))
            elif m.group("param"):
                self.items.append(("param", m.group("param")[1:], start))
            elif m.group("name"):
                self.items.append(("name", m.group("name"), start))
            else:
                self.items.append(("sym", m.group("sym"), start))
            pos = m.end()
        self.items.append(("end", None, len(text)))
        self.i = 0

    def peek(self, k=0):
        return self.items[min(self.i + k, len(self.items) - 1)]

    def next(self):
        tok = self.items[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            raise FormulaSyntaxError(f"expected {want!r}, found {tok[1]!r}", tok[2])
        return tok


def parse(text: str, signature=None) -> Formula:
    """Parse `text`; when a signature is given, check relation names and arities."""
    toks = _Tokens(text)
    phi = _Parser(toks, signature).formula()
    tok = toks.peek()
    if tok[0] != "end":
        raise FormulaSyntaxError(f"unexpected {tok[1]!r}", tok[2])
    return phi


class _Parser:
    def __init__(self, toks, signature):
        self.toks = toks
        self.signature = signature

    def formula(self):
        parts = [self.conj()]
        while self.toks.peek()[:2] == ("sym", "|"):
            self.toks.next()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else disj(*parts)

    def conj(self):
        parts = [self.unary()]
        while self.toks.peek()[:2] == ("sym", "&"):
            self.toks.next()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else conj(*parts)

    def unary(self):
        kind, value, pos = self.toks.peek()
        if (kind, value) == ("sym", "!"):
            self.toks.next()
            return Not(self.unary())
        if (kind, value) == ("sym", "("):
            self.toks.next()
            inner = self.formula()
            self.toks.expect("sym", ")")
            return inner
        if kind == "count":
            self.toks.next()
            var = self.toks.expect("name")[1]
            self.toks.expect("sym", ".")
            op, bound = value
            return Count(op, bound, var, self.unary())
        if kind == "name":
            nxt = self.toks.peek(1)
            if nxt[:2] == ("sym", ".") and value[0] in "EA" and len(value) > 1:
                self.toks.next()
                self.toks.next()
                body = self.unary()
                cls = Exists if value[0] == "E" else Forall
                return cls(value[1:], body)
            if value == "true" and nxt[:2] != ("sym", "="):
                self.toks.next()
                return TRUE
            if value == "false" and nxt[:2] != ("sym", "="):
                self.toks.next()
                return FALSE
            if nxt[:2] == ("sym", "("):
                return self.relation()
        if kind in ("name", "param"):
            left = self.term()
            self.toks.expect("sym", "=")
            return Eq(left, self.term())
        raise FormulaSyntaxError(f"unexpected {value!r}", pos)

    def relation(self):
        _, name, pos = self.toks.next()
        self.toks.expect("sym", "(")
        args = [self.term()]
        while self.toks.peek()[:2] == ("sym", ","):
            self.toks.next()
            args.append(self.term())
        self.toks.expect("sym", ")")
        if self.signature is not None:
            if name not in self.signature.relation_names:
                raise FormulaSyntaxError(f"unknown relation symbol {name!r}", pos)
            arity = self.signature.arity(name)
            if arity != len(args):
                raise FormulaSyntaxError(
                    f"arity mismatch: {name} has arity {arity}, got {len(args)} arguments", pos
                )
        return Rel(name, tuple(args))

    def term(self):
        kind, value, pos = self.toks.next()
        if kind == "name":
            return Var(value)
        if kind == "param":
            return Param(value)
        raise FormulaSyntaxError(f"expected a term, found {value!r}", pos)
