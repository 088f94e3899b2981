"""Reader for the parenthesised prefix grammar.

    formula := (and f f) | (or f f) | (not f) | (-> f f)
             | (exists ?v f) | (forall ?v f) | (= t t) | (REL t ...)
    term    := ?name | x:<bits>[:<i>] | y:<bits+bits+...>:<i> | CONST | (FUN t ...)

``and``/``or`` also accept more than two arguments (folded to the right).
With ``sig=None`` every name is accepted with whatever arity it is used at.
"""
from __future__ import annotations

import re
from functools import lru_cache

from ..errors import ArityMismatch, FmacError, FormulaSyntaxError, UnknownSymbol
from .structure import Signature
from .syntax import (And, Eq, Exists, Fn, Forall, Implies, Not, Or, Rel, Var,
                     parse_sym)

TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")
NAME = re.compile(r"[A-Za-z0-9_+*\-<>=!.]+")
KEYWORDS = {"and", "or", "not", "->", "exists", "forall", "="}


def tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        m = TOKEN.match(text, pos)
        if not m:
            break
        if m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else pos
        if m.lastindex:
            out.append((m.group(m.lastindex), start))
        pos = m.end()
    return out


class _Reader:
    def __init__(self, text, sig):
        self.toks = tokenize(text)
        self.i = 0
        self.sig = sig
        self.end = len(text)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, self.end)

    def take(self):
        tok = self.peek()
        if tok[0] is None:
            raise FormulaSyntaxError("unexpected end of input", self.end)
        self.i += 1
        return tok

    def expect(self, want):
        tok, pos = self.take()
        if tok != want:
            raise FormulaSyntaxError(f"expected {want!r}, got {tok!r}", pos)

    def formula(self):
        tok, pos = self.take()
        if tok != "(":
            raise FormulaSyntaxError(f"expected '(' to start a formula, got {tok!r}", pos)
        head, hpos = self.take()
        if head in ("and", "or"):
            parts = [self.formula()]
            while self.peek()[0] != ")":
                parts.append(self.formula())
            if len(parts) < 2:
                raise FormulaSyntaxError(f"{head} needs two arguments", hpos)
            cls = And if head == "and" else Or
            out = parts[-1]
            for p in reversed(parts[:-1]):
                out = cls(p, out)
        elif head == "not":
            out = Not(self.formula())
        elif head == "->":
            out = Implies(self.formula(), self.formula())
        elif head in ("exists", "forall"):
            vtok, vpos = self.take()
            if not vtok or not vtok.startswith("?") or len(vtok) < 2:
                raise FormulaSyntaxError(f"expected a ?variable after {head}", vpos)
            var = Var(vtok[1:])
            body = self.formula()
            out = (Exists if head == "exists" else Forall)(var, body)
        elif head == "=":
            out = Eq(self.term(), self.term())
        elif head in ("(", ")"):
            raise FormulaSyntaxError("expected an operator or relation name", hpos)
        else:
            args = []
            while self.peek()[0] not in (")", None):
                args.append(self.term())
            self.check_rel(head, len(args), hpos)
            out = Rel(head, tuple(args))
        self.expect(")")
        return out

    def check_rel(self, name, n, pos):
        if self.sig is None:
            return
        ar = self.sig.rel_arity(name)
        if ar is None:
            raise UnknownSymbol(f"unknown relation {name}", pos)
        if ar != n:
            raise ArityMismatch(f"{name} takes {ar} arguments, got {n}", pos)

    def check_fun(self, name, n, pos):
        if self.sig is None:
            return
        ar = self.sig.fun_arity(name)
        if ar is None:
            raise UnknownSymbol(f"unknown function {name}", pos)
        if ar != n:
            raise ArityMismatch(f"{name} takes {ar} arguments, got {n}", pos)

    def term(self):
        tok, pos = self.take()
        if tok == "(":
            name, npos = self.take()
            if name in ("(", ")"):
                raise FormulaSyntaxError("expected a function name", npos)
            args = []
            while self.peek()[0] not in (")", None):
                args.append(self.term())
            self.expect(")")
            self.check_fun(name, len(args), npos)
            return Fn(name, tuple(args))
        if tok == ")":
            raise FormulaSyntaxError("expected a term", pos)
        if tok.startswith("?"):
            if len(tok) < 2:
                raise FormulaSyntaxError("empty variable name", pos)
            return Var(tok[1:])
        if tok.startswith(("x:", "y:")):
            try:
                return parse_sym(tok)
            except (ValueError, FmacError):
                raise FormulaSyntaxError(f"malformed symbol {tok!r}", pos) from None
        if tok in KEYWORDS or not NAME.fullmatch(tok):
            raise FormulaSyntaxError(f"unexpected token {tok!r}", pos)
        self.check_fun(tok, 0, pos)
        return Fn(tok, ())


def parse_formula(text: str, sig: Signature | None = None):
    r = _Reader(text, sig)
    f = r.formula()
    tok, pos = r.peek()
    if tok is not None:
        raise FormulaSyntaxError(f"trailing input {tok!r}", pos)
    return f


def parse_term(text: str, sig: Signature | None = None):
    r = _Reader(text, sig)
    t = r.term()
    tok, pos = r.peek()
    if tok is not None:
        raise FormulaSyntaxError(f"trailing input {tok!r}", pos)
    return t


@lru_cache(maxsize=100_000)
def parse_cached(text: str, sig_key=None):
    """Signature-free parse of text that the library itself printed."""
    return parse_formula(text, None)
