"""First-order syntax over the instantiated variable systems X and Y.

Formulas are immutable trees.  Their canonical text (prefix grammar, bound
variables renamed by quantifier depth) doubles as the identity used when
commitments compare conjuncts.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Union

from ..errors import SymbolOutsideSource
from ..fmac import EMPTY, Lifting, Node, parse_node, show_node


# ---------------------------------------------------------------- symbols

@dataclass(frozen=True, order=True)
class Var:
    """A named variable ``?name``: bound by a quantifier, or a free placeholder slot."""
    name: str

    def __str__(self):
        return "?" + self.name


@dataclass(frozen=True, order=True)
class XSym:
    node: Node
    index: int | None = None  # None: singly indexed

    def __str__(self):
        if self.index is None:
            return f"x:{show_node(self.node)}"
        return f"x:{show_node(self.node)}:{self.index}"

    @property
    def support(self) -> frozenset:
        return frozenset((self.node,))


@dataclass(frozen=True, order=True)
class YSym:
    nodes: tuple[Node, ...]
    index: int

    def __post_init__(self):
        if not self.nodes:
            raise ValueError("y-symbols need a non-empty node set")
        object.__setattr__(self, "nodes", tuple(sorted(set(self.nodes))))

    def __str__(self):
        return "y:" + "+".join(show_node(a) for a in self.nodes) + f":{self.index}"

    @property
    def support(self) -> frozenset:
        return frozenset(self.nodes)


Sym = Union[XSym, YSym]


def is_sym(t) -> bool:
    return isinstance(t, (XSym, YSym))


def parse_sym(text: str) -> Sym:
    kind, _, rest = text.partition(":")
    if kind == "x":
        node, sep, idx = rest.partition(":")
        return XSym(parse_node(node), int(idx) if sep else None)
    if kind == "y":
        nodes, _, idx = rest.rpartition(":")
        return YSym(tuple(parse_node(n) for n in nodes.split("+")), int(idx))
    raise ValueError(f"not a symbol: {text}")


def sym_key(s: Sym):
    """Deterministic sort key mixing x- and y-symbols."""
    if isinstance(s, XSym):
        return (0, s.node, -1 if s.index is None else s.index)
    return (1, len(s.nodes), s.nodes, s.index)


# ---------------------------------------------------------------- terms

@dataclass(frozen=True, repr=False)
class Fn:
    name: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.name
        return "(" + self.name + " " + " ".join(map(str, self.args)) + ")"

    __repr__ = __str__


Term = Union[Var, XSym, YSym, Fn]


# ---------------------------------------------------------------- formulas

class Formula:
    __slots__ = ()

    def __str__(self):
        return show(self)

    def __repr__(self):
        return show(self)


@dataclass(frozen=True, repr=False)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True, repr=False)
class Rel(Formula):
    name: str
    args: tuple


@dataclass(frozen=True, repr=False)
class Not(Formula):
    body: Formula


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Exists(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True, repr=False)
class Forall(Formula):
    var: Var
    body: Formula


BINARY = {And: "and", Or: "or", Implies: "->"}
QUANT = {Exists: "exists", Forall: "forall"}
ATOMS = (Eq, Rel)


def is_literal(f: Formula) -> bool:
    return isinstance(f, ATOMS) or (isinstance(f, Not) and isinstance(f.body, ATOMS))


def show(f) -> str:
    if isinstance(f, (Var, XSym, YSym, Fn)):
        return str(f)
    if isinstance(f, Eq):
        return f"(= {f.left} {f.right})"
    if isinstance(f, Rel):
        return "(" + f.name + "".join(" " + str(a) for a in f.args) + ")"
    if isinstance(f, Not):
        return f"(not {show(f.body)})"
    if type(f) in BINARY:
        return f"({BINARY[type(f)]} {show(f.left)} {show(f.right)})"
    if type(f) in QUANT:
        return f"({QUANT[type(f)]} {f.var} {show(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


def conj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        raise ValueError("empty conjunction")
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def conjuncts_of(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return conjuncts_of(f.left) + conjuncts_of(f.right)
    return [f]


def size(f: Formula) -> int:
    """AST node count; terms are not counted."""
    if isinstance(f, ATOMS):
        return 1
    if isinstance(f, Not):
        return 1 + size(f.body)
    if type(f) in BINARY:
        return 1 + size(f.left) + size(f.right)
    return 1 + size(f.body)


# ---------------------------------------------------------------- traversal

def term_leaves(t) -> Iterable:
    if isinstance(t, Fn):
        for a in t.args:
            yield from term_leaves(a)
    else:
        yield t


def atom_terms(f) -> tuple:
    return (f.left, f.right) if isinstance(f, Eq) else f.args


def _walk_free(f, bound, out: list):
    if isinstance(f, ATOMS):
        for t in atom_terms(f):
            for leaf in term_leaves(t):
                if not (isinstance(leaf, Var) and leaf in bound):
                    out.append(leaf)
    elif isinstance(f, Not):
        _walk_free(f.body, bound, out)
    elif type(f) in BINARY:
        _walk_free(f.left, bound, out)
        _walk_free(f.right, bound, out)
    else:
        _walk_free(f.body, bound | {f.var}, out)


def free_leaves(f) -> list:
    out = []
    _walk_free(f, frozenset(), out)
    return out


def free_vars(f) -> list[Var]:
    """Free placeholder variables, ordered by first occurrence."""
    seen = {}
    for leaf in free_leaves(f):
        if isinstance(leaf, Var):
            seen.setdefault(leaf, None)
    return list(seen)


def symbols(f) -> list[Sym]:
    seen = {}
    for leaf in free_leaves(f):
        if is_sym(leaf):
            seen.setdefault(leaf, None)
    return list(seen)


def slots(f) -> list[Var]:
    """Free placeholders in canonical slot order (natural order of their names)."""
    return sorted(free_vars(f), key=lambda v: _natural(v.name))


def _natural(name: str):
    m = re.fullmatch(r"([A-Za-z_]*)(\d*)", name)
    if m and m.group(2):
        return (m.group(1), int(m.group(2)), name)
    return (name, -1, name)


def bound_vars(f) -> set:
    out = set()

    def walk(g):
        if isinstance(g, Not):
            walk(g.body)
        elif type(g) in BINARY:
            walk(g.left)
            walk(g.right)
        elif type(g) in QUANT:
            out.add(g.var)
            walk(g.body)
    walk(f)
    return out


def relation_names(f) -> set:
    out = set()

    def walk(g):
        if isinstance(g, Rel):
            out.add(g.name)
        elif isinstance(g, Not):
            walk(g.body)
        elif type(g) in BINARY:
            walk(g.left)
            walk(g.right)
        elif type(g) in QUANT:
            walk(g.body)
    walk(f)
    return out


# ---------------------------------------------------------------- substitution

def map_term(t, fn: Callable):
    if isinstance(t, Fn):
        return Fn(t.name, tuple(map_term(a, fn) for a in t.args))
    return fn(t)


def substitute(f, mapping: dict):
    """Replace free occurrences of variables/symbols.  Capture is impossible
    as long as the replacements are symbols or fresh variable names."""
    def walk(g, bound):
        if isinstance(g, ATOMS):
            def leaf(x):
                if isinstance(x, Var) and x in bound:
                    return x
                return mapping.get(x, x)
            if isinstance(g, Eq):
                return Eq(map_term(g.left, leaf), map_term(g.right, leaf))
            return Rel(g.name, tuple(map_term(a, leaf) for a in g.args))
        if isinstance(g, Not):
            return Not(walk(g.body, bound))
        if type(g) in BINARY:
            return type(g)(walk(g.left, bound), walk(g.right, bound))
        return type(g)(g.var, walk(g.body, bound | {g.var}))
    return walk(f, frozenset())


def instantiate(f, tup) -> Formula:
    """Fill the formula's slots, in slot order, with the given terms."""
    sl = slots(f)
    if len(sl) != len(tup):
        raise ValueError(f"{show(f)} has {len(sl)} slots, got {len(tup)} terms")
    return substitute(f, dict(zip(sl, tup)))


def _bound_prefix(f) -> str:
    taken = {v.name for v in free_vars(f)}
    prefix = "u"
    while any(re.fullmatch(re.escape(prefix) + r"\d+", n) for n in taken):
        prefix += "u"
    return prefix


def normalize(f) -> Formula:
    """Rename bound variables to ?u1, ?u2, ... by quantifier depth."""
    prefix = _bound_prefix(f)

    def walk(g, env, depth):
        if isinstance(g, ATOMS):
            leaf = lambda x: env.get(x, x) if isinstance(x, Var) else x
            if isinstance(g, Eq):
                return Eq(map_term(g.left, leaf), map_term(g.right, leaf))
            return Rel(g.name, tuple(map_term(a, leaf) for a in g.args))
        if isinstance(g, Not):
            return Not(walk(g.body, env, depth))
        if type(g) in BINARY:
            return type(g)(walk(g.left, env, depth), walk(g.right, env, depth))
        v = Var(f"{prefix}{depth + 1}")
        return type(g)(v, walk(g.body, {**env, g.var: v}, depth + 1))
    return walk(f, {}, 0)


@lru_cache(maxsize=200_000)
def canonical(f) -> str:
    return show(normalize(f))


def negate(f: Formula) -> Formula:
    return f.body if isinstance(f, Not) else Not(f)


# ---------------------------------------------------------------- lifting

def lift_sym(s: Sym, h: Lifting) -> Sym:
    try:
        if isinstance(s, XSym):
            return XSym(h(s.node), s.index)
        return YSym(tuple(h(a) for a in s.nodes), s.index)
    except Exception:
        raise SymbolOutsideSource(f"{s} is not indexed by {h.source}") from None


def lift_formula(f, h: Lifting) -> Formula:
    """x_{a,i} -> x_{h(a),i}, y_{s,i} -> y_{h(s),i}; bound variables untouched."""
    def walk(g):
        if isinstance(g, ATOMS):
            leaf = lambda x: lift_sym(x, h) if is_sym(x) else x
            if isinstance(g, Eq):
                return Eq(map_term(g.left, leaf), map_term(g.right, leaf))
            return Rel(g.name, tuple(map_term(a, leaf) for a in g.args))
        if isinstance(g, Not):
            return Not(walk(g.body))
        if type(g) in BINARY:
            return type(g)(walk(g.left), walk(g.right))
        return type(g)(g.var, walk(g.body))
    return walk(f)


# ---------------------------------------------------------------- text-level helpers
# Conjunct sets are stored as canonical strings; these helpers rewrite them
# without a parse round trip.

SYM_RE = re.compile(r"[xy]:[^\s()]+")
VAR_RE = re.compile(r"\?[A-Za-z_][A-Za-z0-9_]*")


def text_symbols(text: str) -> list[str]:
    seen = {}
    for m in SYM_RE.finditer(text):
        seen.setdefault(m.group(0), None)
    return list(seen)


def fill_text(template: str, mapping: dict[str, str]) -> str:
    """Replace free placeholder tokens (``?w1`` ...) by symbol text."""
    return VAR_RE.sub(lambda m: mapping.get(m.group(0), m.group(0)), template)


def abstract_text(text: str) -> tuple[str, list[str]]:
    """Replace symbols by slot placeholders ?s1, ?s2, ... (first occurrence order)."""
    syms = text_symbols(text)
    names = {s: f"?s{i + 1}" for i, s in enumerate(syms)}
    return SYM_RE.sub(lambda m: names[m.group(0)], text), syms


_LIFT_CACHE: dict = {}


def lift_sym_text(tok: str, mapping: dict[Node, Node]) -> str:
    kind = tok[0]
    if kind == "x":
        rest = tok[2:]
        node, sep, idx = rest.partition(":")
        node = "" if node == EMPTY else node
        node = mapping.get(node, node)
        return f"x:{show_node(node)}{sep}{idx}"
    nodes, _, idx = tok[2:].rpartition(":")
    ns = sorted(mapping.get(n, n) for n in ("" if n == EMPTY else n for n in nodes.split("+")))
    return "y:" + "+".join(show_node(n) for n in ns) + ":" + idx


def lift_text(text: str, mapping: dict[Node, Node]) -> str:
    return SYM_RE.sub(lambda m: lift_sym_text(m.group(0), mapping), text)
