"""Literal diagrams over instantiated symbols and their quotient structures."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..errors import CongruenceViolation, InconsistentDiagram
from .parser import parse_cached
from .structure import FiniteStructure, Signature
from .syntax import Eq, Fn, Not, Rel, is_literal, is_sym, show, sym_key


class _UF:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        self.add(x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb, key=str)] = min(ra, rb, key=str)
            return True
        return False


def _subterms(t, out):
    if isinstance(t, Fn):
        for a in t.args:
            _subterms(a, out)
    out.append(t)


@dataclass
class Quotient:
    structure: FiniteStructure
    cls: dict        # symbol -> element id (class representative text)
    members: dict    # element id -> sorted list of symbols


def diagram_quotient(D, sig: Signature | None = None) -> Quotient:
    lits = [parse_cached(d) if isinstance(d, str) else d for d in D]
    for lit in lits:
        if not is_literal(lit):
            raise InconsistentDiagram(f"not a literal: {show(lit)}")
    texts = {show(l) for l in lits}
    for l in lits:
        if isinstance(l, Not) and show(l.body) in texts:
            raise InconsistentDiagram(show(l.body))

    terms = []
    for l in lits:
        atom = l.body if isinstance(l, Not) else l
        for t in ((atom.left, atom.right) if isinstance(atom, Eq) else atom.args):
            _subterms(t, terms)
    uf = _UF()
    for t in terms:
        uf.add(t)
    for l in lits:
        if isinstance(l, Eq):
            uf.union(l.left, l.right)
    # congruence closure over the (few) compound terms
    compound = [t for t in set(terms) if isinstance(t, Fn) and t.args]
    changed = True
    while changed:
        changed = False
        for s, t in itertools.combinations(compound, 2):
            if s.name == t.name and len(s.args) == len(t.args) and uf.find(s) != uf.find(t):
                if all(uf.find(a) == uf.find(b) for a, b in zip(s.args, t.args)):
                    uf.union(s, t)
                    changed = True

    for l in lits:
        if isinstance(l, Not) and isinstance(l.body, Eq):
            if uf.find(l.body.left) == uf.find(l.body.right):
                raise InconsistentDiagram(show(l))

    syms = sorted({t for t in terms if is_sym(t)}, key=sym_key)
    rep = {}
    members = {}
    for s in syms:
        root = uf.find(s)
        if root not in rep:
            rep[root] = str(s)
        members.setdefault(rep[root], []).append(s)
    # constants behave like symbols for the universe
    for t in sorted({t for t in terms if isinstance(t, Fn) and not t.args}, key=str):
        root = uf.find(t)
        if root not in rep:
            rep[root] = str(t)
            members[rep[root]] = []

    def elem(t):
        return rep.get(uf.find(t))

    relations, negative, witness = {}, {}, {}
    for l in lits:
        atom, pos = (l.body, False) if isinstance(l, Not) else (l, True)
        if not isinstance(atom, Rel):
            continue
        args = tuple(elem(a) for a in atom.args)
        if None in args:
            continue
        key = (atom.name, args)
        other = witness.get((key, not pos))
        if other is not None:
            raise CongruenceViolation(f"{other} versus {show(l)}")
        witness[(key, pos)] = show(l)
        (relations if pos else negative).setdefault(atom.name, set()).add(args)

    funcs = {}
    for t in set(terms):
        if isinstance(t, Fn):
            args = tuple(elem(a) for a in t.args)
            val = elem(t)
            if val is not None and None not in args:
                funcs.setdefault(t.name, {})[args] = val

    if sig is None:
        rels = {}
        for l in lits:
            atom = l.body if isinstance(l, Not) else l
            if isinstance(atom, Rel):
                rels[atom.name] = len(atom.args)
        fns = {}
        for t in terms:
            if isinstance(t, Fn):
                fns[t.name] = len(t.args)
        sig = Signature(rels, fns)

    elements = list(members)
    undecided = set()
    diseq = set()
    for l in lits:
        if isinstance(l, Not) and isinstance(l.body, Eq):
            a, b = elem(l.body.left), elem(l.body.right)
            if a is not None and b is not None:
                diseq.add(tuple(sorted((a, b))))
    for a, b in itertools.combinations(sorted(elements), 2):
        if (a, b) not in diseq:
            undecided.add(("=", (a, b)))
    names = set(sig.relations) | set(relations) | set(negative)
    for r in sorted(names):
        ar = sig.rel_arity(r)
        pos, neg = relations.get(r, set()), negative.get(r, set())
        for args in itertools.product(elements, repeat=ar):
            if args not in pos and args not in neg:
                undecided.add((r, args))
    M = FiniteStructure(sig, elements, relations, funcs, undecided=undecided)
    cls = {s: e for e, ms in members.items() for s in ms}
    return Quotient(M, cls, {e: list(ms) for e, ms in members.items()})
