"""Signatures, explicit finite structures, and Tarskian evaluation."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from ..errors import (MissingInterpretation, StructureFormatError,
                      UnassignedFreeVariable, UnknownSymbol)
from .syntax import (And, Eq, Exists, Fn, Forall, Implies, Not, Or, Rel, Var,
                     is_sym)


@dataclass
class Signature:
    relations: dict = field(default_factory=dict)   # name -> arity
    functions: dict = field(default_factory=dict)   # name -> arity, constants have arity 0
    # an infinite family of unary predicates prefix+digits (e.g. P0, P1, ...)
    unary_family: str | None = None

    def __post_init__(self):
        both = set(self.relations) & set(self.functions)
        if both:
            raise ValueError(f"names used twice: {sorted(both)}")
        for name, ar in list(self.relations.items()) + list(self.functions.items()):
            if ar < 0:
                raise ValueError(f"negative arity for {name}")
        if any(ar < 1 for ar in self.relations.values()):
            # 0-ary relations are not needed anywhere here
            raise ValueError("relation arities must be >= 1")

    def rel_arity(self, name: str) -> int | None:
        if name in self.relations:
            return self.relations[name]
        if self.unary_family and re.fullmatch(re.escape(self.unary_family) + r"\d+", name):
            return 1
        return None

    def fun_arity(self, name: str) -> int | None:
        return self.functions.get(name)

    @property
    def constants(self) -> list[str]:
        return sorted(n for n, a in self.functions.items() if a == 0)

    def is_relational(self) -> bool:
        return not self.functions

    def key(self) -> str:
        """Stable text used for hashing signatures into log headers."""
        parts = [f"rel {n} {a}" for n, a in sorted(self.relations.items())]
        parts += [f"fun {n} {a}" for n, a in sorted(self.functions.items())]
        if self.unary_family:
            parts.append(f"family {self.unary_family}")
        return ";".join(parts)


PURE = Signature()


class FiniteStructure:
    """Explicit finite interpretation.  Functions may be partial when the
    structure was read off a diagram; ``undecided`` then lists atoms that the
    diagram left open."""

    def __init__(self, sig: Signature, elements, relations=None, functions=None,
                 aclcore=(), usort=(), undecided=()):
        self.sig = sig
        self.elements = list(elements)
        self.relations = {r: set(relations.get(r, ())) if relations else set() for r in sig.relations}
        if relations:
            for r, facts in relations.items():
                self.relations.setdefault(r, set()).update(facts)
        self.functions = {f: dict(functions.get(f, {})) if functions else {} for f in sig.functions}
        self.aclcore = set(aclcore)
        self.usort = set(usort)
        self.undecided = set(undecided)

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"FiniteStructure({len(self.elements)} elements, {sorted(self.relations)})"

    def holds(self, rel: str, args: tuple) -> bool:
        return tuple(args) in self.relations.get(rel, ())

    def apply(self, fun: str, args: tuple):
        try:
            return self.functions[fun][tuple(args)]
        except KeyError:
            raise MissingInterpretation(f"{fun}{tuple(args)} has no value") from None

    def check(self):
        elems = set(self.elements)
        for r, facts in self.relations.items():
            ar = self.sig.rel_arity(r)
            for t in facts:
                if len(t) != ar or not set(t) <= elems:
                    raise StructureFormatError(f"bad fact {r} {t}")
        for f, graph in self.functions.items():
            ar = self.sig.functions[f]
            for args in itertools.product(self.elements, repeat=ar):
                if args not in graph:
                    raise StructureFormatError(f"{f} is not total: missing {args}")
                if graph[args] not in elems:
                    raise StructureFormatError(f"{f}{args} leaves the universe")
        return self

    # ---------------------------------------------------------------- file format

    @classmethod
    def parse(cls, text: str) -> "FiniteStructure":
        rels, funs = {}, {}
        elems, facts, maps, acl, us = [], [], [], [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].split()
            if not line:
                continue
            kw, args = line[0], line[1:]
            try:
                if kw == "rel":
                    rels[args[0]] = int(args[1])
                elif kw == "fun":
                    funs[args[0]] = int(args[1])
                elif kw == "elem":
                    elems.extend(args)
                elif kw == "fact":
                    facts.append((lineno, args[0], tuple(args[1:])))
                elif kw == "map":
                    maps.append((lineno, args[0], tuple(args[1:-1]), args[-1]))
                elif kw == "aclcore":
                    acl.extend(args)
                elif kw == "usort":
                    us.extend(args)
                else:
                    raise StructureFormatError(f"line {lineno}: unknown keyword {kw!r}")
            except (IndexError, ValueError) as e:
                if isinstance(e, StructureFormatError):
                    raise
                raise StructureFormatError(f"line {lineno}: malformed {kw!r} line") from None
        try:
            sig = Signature(rels, funs)
        except ValueError as e:
            raise StructureFormatError(str(e)) from None
        if len(set(elems)) != len(elems):
            raise StructureFormatError("duplicate element ids")
        known = set(elems)
        relations = {r: set() for r in rels}
        for lineno, r, t in facts:
            if r not in rels:
                raise StructureFormatError(f"line {lineno}: undeclared relation {r}")
            if len(t) != rels[r]:
                raise StructureFormatError(f"line {lineno}: {r} has arity {rels[r]}")
            if not set(t) <= known:
                raise StructureFormatError(f"line {lineno}: unknown element in {t}")
            relations[r].add(t)
        functions = {f: {} for f in funs}
        for lineno, f, args, val in maps:
            if f not in funs:
                raise StructureFormatError(f"line {lineno}: undeclared function {f}")
            if len(args) != funs[f]:
                raise StructureFormatError(f"line {lineno}: {f} has arity {funs[f]}")
            if not (set(args) | {val}) <= known:
                raise StructureFormatError(f"line {lineno}: unknown element")
            if functions[f].get(args, val) != val:
                raise StructureFormatError(f"line {lineno}: {f}{args} given two values")
            functions[f][args] = val
        for e in acl + us:
            if e not in known:
                raise StructureFormatError(f"unknown element {e} in designated subset")
        return cls(sig, elems, relations, functions, acl, us).check()

    @classmethod
    def load(cls, path) -> "FiniteStructure":
        with open(path) as fh:
            return cls.parse(fh.read())

    def dumps(self) -> str:
        out = [f"rel {r} {a}" for r, a in sorted(self.sig.relations.items())]
        out += [f"fun {f} {a}" for f, a in sorted(self.sig.functions.items())]
        out.append("elem " + " ".join(self.elements))
        for r in sorted(self.relations):
            for t in sorted(self.relations[r]):
                out.append(f"fact {r} " + " ".join(t))
        for f in sorted(self.functions):
            for args, v in sorted(self.functions[f].items()):
                out.append(" ".join(["map", f, *args, v]))
        if self.aclcore:
            out.append("aclcore " + " ".join(sorted(self.aclcore)))
        if self.usort:
            out.append("usort " + " ".join(sorted(self.usort)))
        return "\n".join(out) + "\n"


# ---------------------------------------------------------------- evaluation

def eval_term(M: FiniteStructure, t, asg: dict):
    if isinstance(t, Fn):
        return M.apply(t.name, tuple(eval_term(M, a, asg) for a in t.args))
    try:
        return asg[t]
    except KeyError:
        raise UnassignedFreeVariable(str(t)) from None


def evaluate(M: FiniteStructure, f, asg: dict | None = None) -> bool:
    """Standard satisfaction; quantifiers range over all of M."""
    asg = dict(asg or {})
    return _ev(M, f, asg)


def _ev(M, f, asg):
    if isinstance(f, Eq):
        return eval_term(M, f.left, asg) == eval_term(M, f.right, asg)
    if isinstance(f, Rel):
        return M.holds(f.name, tuple(eval_term(M, a, asg) for a in f.args))
    if isinstance(f, Not):
        return not _ev(M, f.body, asg)
    if isinstance(f, And):
        return _ev(M, f.left, asg) and _ev(M, f.right, asg)
    if isinstance(f, Or):
        return _ev(M, f.left, asg) or _ev(M, f.right, asg)
    if isinstance(f, Implies):
        return (not _ev(M, f.left, asg)) or _ev(M, f.right, asg)
    if isinstance(f, (Exists, Forall)):
        want = isinstance(f, Exists)
        saved = asg.get(f.var, _MISSING)
        try:
            for e in M.elements:
                asg[f.var] = e
                if _ev(M, f.body, asg) == want:
                    return want
            return not want
        finally:
            if saved is _MISSING:
                asg.pop(f.var, None)
            else:
                asg[f.var] = saved
    raise TypeError(f"not a formula: {f!r}")


_MISSING = object()


def evaluate3(M: FiniteStructure, f, asg: dict | None = None):
    """Kleene three-valued evaluation: atoms listed in ``M.undecided`` and
    terms without a value come out as None."""
    return _ev3(M, f, dict(asg or {}))


def _term3(M, t, asg):
    try:
        return eval_term(M, t, asg)
    except MissingInterpretation:
        return None


def _ev3(M, f, asg):
    if isinstance(f, (Eq, Rel)):
        if isinstance(f, Eq):
            a, b = _term3(M, f.left, asg), _term3(M, f.right, asg)
            if a is None or b is None:
                return None
            if ("=", tuple(sorted((a, b)))) in M.undecided:
                return None
            return a == b
        args = tuple(_term3(M, a, asg) for a in f.args)
        if None in args:
            return None
        if (f.name, args) in M.undecided:
            return None
        return M.holds(f.name, args)
    if isinstance(f, Not):
        v = _ev3(M, f.body, asg)
        return None if v is None else not v
    if isinstance(f, (And, Or, Implies)):
        left = _ev3(M, f.left, asg)
        if isinstance(f, Implies):
            left = None if left is None else not left
        right = _ev3(M, f.right, asg)
        if isinstance(f, And):
            if left is False or right is False:
                return False
            return None if None in (left, right) else True
        if left is True or right is True:
            return True
        return None if None in (left, right) else False
    if isinstance(f, (Exists, Forall)):
        want = isinstance(f, Exists)
        saved = asg.get(f.var, _MISSING)
        unknown = False
        try:
            for e in M.elements:
                asg[f.var] = e
                v = _ev3(M, f.body, asg)
                if v is None:
                    unknown = True
                elif v == want:
                    return want
            return None if unknown else (not want)
        finally:
            if saved is _MISSING:
                asg.pop(f.var, None)
            else:
                asg[f.var] = saved
    raise TypeError(f"not a formula: {f!r}")


def check_assignment(f, asg: dict):
    from .syntax import free_leaves
    for leaf in free_leaves(f):
        if (isinstance(leaf, Var) or is_sym(leaf)) and leaf not in asg:
            raise UnassignedFreeVariable(str(leaf))


def require_symbol(sig: Signature, name: str):
    if sig.rel_arity(name) is None and sig.fun_arity(name) is None:
        raise UnknownSymbol(f"unknown symbol {name}")
