"""Decidable infinite witness structures.

Both oracles decide formulas by recursion on the formula, letting an
existential quantifier range over the finitely many extension types of the
tuple in play:

* ``FraisseOracle``: the Fraisse limit of all finite structures of a
  relational signature (optionally symmetric / irreflexive relations, and an
  infinite family of unary predicates).  An extension type is either an
  element already in play or a new element together with a choice of every
  relevant fact between it and the elements in play.
* ``VectorF2Oracle``: the countable-dimensional vector space over F2 in the
  signature {+, 0}.  An extension type is either a vector in the span of
  the elements in play or one new independent vector.

Named elements live in a working structure that only ever grows; every change
is appended to ``journal`` so a log can replay it.
"""
from __future__ import annotations

import hashlib
import itertools
import re
from dataclasses import dataclass, field

from .errors import AllSolutionsClosed, NoSolution, UnsupportedSignature
from .logic.parser import parse_cached
from .logic.structure import Signature
from .logic.syntax import (And, Eq, Exists, Fn, Forall, Implies, Not, Or, Rel,
                           Var, free_leaves, normalize, relation_names, show,
                           slots, substitute)


def abstract(phi, asg: dict, first=None):
    """Turn (formula, assignment) into (template text, element tuple).

    Free leaves become slots ?s1, ?s2, ... in order of first occurrence; if
    ``first`` is given it takes slot 1 and is left out of the element tuple.
    """
    phi = normalize(phi)
    leaves = []
    if first is not None:
        leaves.append(first)
    for leaf in free_leaves(phi):
        if isinstance(leaf, Fn):
            continue
        if leaf not in leaves:
            leaves.append(leaf)
    names = {leaf: Var(f"s{i + 1}") for i, leaf in enumerate(leaves)}
    elems = []
    for leaf in leaves:
        if leaf is first:
            continue
        try:
            elems.append(asg[leaf])
        except KeyError:
            from .errors import UnassignedFreeVariable
            raise UnassignedFreeVariable(str(leaf)) from None
    return show(substitute(phi, names)), tuple(elems)


def _template(text):
    f = parse_cached(text)
    return f, slots(f)


_BINOPS = (And, Or, Implies)


class Oracle:
    name = "oracle"

    def __init__(self):
        self.journal: list[str] = []
        self.cache: dict = {}
        self.last_reason = ""

    def drain(self) -> list[str]:
        out, self.journal = self.journal, []
        return out

    # public entry points shared by both oracles

    def eval(self, phi, asg: dict | None = None) -> bool:
        text, elems = abstract(phi, asg or {})
        return self.truth(text, elems)

    def truth(self, template: str, elems: tuple) -> bool:
        f, sl = _template(template)
        if len(sl) != len(elems):
            raise ValueError(f"{template}: {len(sl)} slots, {len(elems)} elements")
        key = (template, self.type_key(elems, f))
        hit = self.cache.get(key)
        if hit is None:
            hit = self._decide(f, dict(zip(sl, elems)))
            self.cache[key] = hit
        return hit

    def witness(self, phi, var: Var, asg: dict, avoid=()):
        text, elems = abstract(phi, asg, first=var)
        return self.witness_text(text, elems, avoid)


# ---------------------------------------------------------------- Fraisse limits

@dataclass
class AgeSpec:
    relations: dict = field(default_factory=dict)
    symmetric: frozenset = frozenset()
    irreflexive: frozenset = frozenset()
    family: str | None = None        # unary family prefix, e.g. "P"
    family_declared: int = 0         # how many family members enumeration sees
    default: str = "false"           # "false" or "hash": value of facts never set

    def __post_init__(self):
        for r, ar in self.relations.items():
            if ar < 1:
                raise UnsupportedSignature(f"relation {r} has arity {ar}")

    def arity(self, rel):
        if rel in self.relations:
            return self.relations[rel]
        if self.family and re.fullmatch(re.escape(self.family) + r"\d+", rel):
            return 1
        return None

    def signature(self) -> Signature:
        rels = dict(self.relations)
        if self.family:
            rels.update({f"{self.family}{i}": 1 for i in range(self.family_declared)})
        return Signature(rels, {}, self.family)


class FraisseOracle(Oracle):
    def __init__(self, age: AgeSpec, seed: int = 0, name="fraisse"):
        super().__init__()
        self.age = age
        self.seed = seed
        self.name = name
        self.elements: list[str] = []
        self.known: set[str] = set()
        self.overrides: dict = {}
        self._rel_cache: dict = {}

    @property
    def signature(self):
        return self.age.signature()

    # facts

    def _norm(self, rel, tup):
        if rel in self.age.symmetric:
            tup = tuple(sorted(tup))
        return tup

    def fact(self, rel: str, tup: tuple) -> bool:
        if self.age.arity(rel) is None:
            raise UnsupportedSignature(f"unknown relation {rel}")
        if rel in self.age.irreflexive and len(set(tup)) < len(tup):
            return False
        tup = self._norm(rel, tuple(tup))
        v = self.overrides.get((rel, tup))
        if v is not None:
            return v
        if self.age.default == "hash":
            h = hashlib.blake2b(f"{self.seed}|{rel}|{' '.join(tup)}".encode(), digest_size=1)
            return bool(h.digest()[0] & 1)
        return False

    def set_fact(self, rel, tup, value: bool):
        if rel in self.age.irreflexive and len(set(tup)) < len(tup):
            if value:
                raise ValueError(f"{rel} is irreflexive")
            return
        tup = self._norm(rel, tuple(tup))
        if self.overrides.get((rel, tup)) == value:
            return
        self.overrides[(rel, tup)] = value
        self.journal.append(f"fact {rel} {' '.join(tup)} {int(value)}")

    def new_element(self, facts=None) -> str:
        name = f"e{len(self.elements)}"
        self.elements.append(name)
        self.known.add(name)
        self.journal.append(f"elem {name}")
        for (rel, tup), val in sorted((facts or {}).items()):
            self.set_fact(rel, tup, val)
        return name

    def replay(self, line: str):
        parts = line.split()
        if parts[0] == "elem":
            if parts[1] != f"e{len(self.elements)}":
                raise ValueError(f"journal out of order at {line!r}")
            self.elements.append(parts[1])
            self.known.add(parts[1])
        elif parts[0] == "fact":
            self.overrides[(parts[1], self._norm(parts[1], tuple(parts[2:-1])))] = parts[-1] == "1"
        else:
            raise ValueError(f"bad journal line {line!r}")
        self.journal.append(line)

    # qf types

    def _rels(self, f):
        key = f
        hit = self._rel_cache.get(key)
        if hit is None:
            names = sorted(relation_names(f))
            for r in names:
                if self.age.arity(r) is None:
                    raise UnsupportedSignature(f"unknown relation {r}")
            hit = [(r, self.age.arity(r)) for r in names]
            self._rel_cache[key] = hit
        return hit

    def type_key(self, elems, f=None):
        distinct = list(dict.fromkeys(elems))
        pattern = tuple(distinct.index(e) for e in elems)
        rels = self._rels(f) if f is not None else self._all_rels(distinct)
        bits = []
        for r, ar in rels:
            for tup in itertools.product(distinct, repeat=ar):
                bits.append(self.fact(r, tup))
        return pattern, tuple(bits)

    def _all_rels(self, elems):
        out = sorted(self.age.relations.items())
        if self.age.family:
            fam = {r for (r, t) in self.overrides if r not in self.age.relations and set(t) <= set(elems)}
            out += [(r, 1) for r in sorted(fam)]
        return out

    def qf_facts(self, elems) -> dict:
        """Every declared relation fact (plus set family facts) over the tuple."""
        distinct = list(dict.fromkeys(elems))
        out = {}
        for r, ar in self._all_rels(distinct):
            for tup in itertools.product(distinct, repeat=ar):
                if r in self.age.irreflexive and len(set(tup)) < len(tup):
                    continue
                out[(r, tup)] = self.fact(r, tup)
        return out

    # decision procedure

    def _extension_types(self, ctx, rels):
        """All ways a new element can sit over ctx, as fact dicts on a virtual name."""
        v = f"~{len(ctx)}"
        slots_ = []
        for r, ar in rels:
            seen = set()
            for tup in itertools.product(ctx + [v], repeat=ar):
                if v not in tup:
                    continue
                if r in self.age.irreflexive and len(set(tup)) < len(tup):
                    continue
                t = self._norm(r, tup)
                if (r, t) in seen:
                    continue
                seen.add((r, t))
                slots_.append((r, t))
        for bits in itertools.product((False, True), repeat=len(slots_)):
            yield v, dict(zip(slots_, bits))

    def _holds(self, rel, tup, virt):
        if any(e.startswith("~") for e in tup):
            if rel in self.age.irreflexive and len(set(tup)) < len(tup):
                return False
            return virt[(rel, self._norm(rel, tup))]
        return self.fact(rel, tup)

    def _term(self, t, env):
        if isinstance(t, Fn):
            raise UnsupportedSignature(f"function symbol {t.name} in a relational oracle")
        return env[t]

    def _ev(self, f, env, virt, ctx, rels):
        if isinstance(f, Eq):
            return self._term(f.left, env) == self._term(f.right, env)
        if isinstance(f, Rel):
            return self._holds(f.name, tuple(self._term(a, env) for a in f.args), virt)
        if isinstance(f, Not):
            return not self._ev(f.body, env, virt, ctx, rels)
        if isinstance(f, And):
            return self._ev(f.left, env, virt, ctx, rels) and self._ev(f.right, env, virt, ctx, rels)
        if isinstance(f, Or):
            return self._ev(f.left, env, virt, ctx, rels) or self._ev(f.right, env, virt, ctx, rels)
        if isinstance(f, Implies):
            return (not self._ev(f.left, env, virt, ctx, rels)) or self._ev(f.right, env, virt, ctx, rels)
        want = isinstance(f, Exists)
        for c in ctx:
            if self._ev(f.body, {**env, f.var: c}, virt, ctx, rels) == want:
                return want
        for v, facts in self._extension_types(ctx, rels):
            if self._ev(f.body, {**env, f.var: v}, {**virt, **facts}, ctx + [v], rels) == want:
                return want
        return not want

    def _decide(self, f, env):
        ctx = list(dict.fromkeys(env.values()))
        for e in ctx:
            if e not in self.known:
                raise KeyError(f"unknown element {e}")
        return self._ev(f, env, {}, ctx, self._rels(f))

    # witnesses

    def witness_text(self, template, params, avoid=()):
        """template has slot 1 for the witness and the remaining slots for params."""
        f, sl = _template(template)
        u, rest = sl[0], sl[1:]
        env = dict(zip(rest, params))
        ctx = list(dict.fromkeys(params))
        rels = self._rels(f)
        avoid = set(avoid)
        for v, facts in self._extension_types(ctx, rels):
            if self._ev(f, {**env, u: v}, facts, ctx + [v], rels):
                real = {}
                for (r, tup), val in facts.items():
                    real[(r, tup)] = val
                name = f"e{len(self.elements)}"
                renamed = {(r, tuple(name if e == v else e for e in tup)): val
                           for (r, tup), val in real.items()}
                self.new_element(renamed)
                self.last_reason = "fresh"
                return name
        found = [c for c in ctx if self._ev(f, {**env, u: c}, {}, ctx, rels)]
        if not found:
            raise NoSolution(template)
        for c in found:
            if c not in avoid:
                self.last_reason = "parameter"
                return c
        self.last_reason = ("unique solution" if len(found) == 1
                            else "every solution is a parameter in the avoided set")
        return None

    def copy_block(self, block, over):
        """New elements mirroring ``block`` over ``over`` (same qf type)."""
        block = list(block)
        new = [f"e{len(self.elements) + i}" for i in range(len(block))]
        ren = dict(zip(block, new))
        universe = list(dict.fromkeys(block + [o for o in over if o not in ren]))
        facts = {}
        for r, ar in sorted(self.age.relations.items()):
            for tup in itertools.product(universe, repeat=ar):
                if not any(e in ren for e in tup):
                    continue
                if r in self.age.irreflexive and len(set(tup)) < len(tup):
                    continue
                facts[(r, tuple(ren.get(e, e) for e in tup))] = self.fact(r, tup)
        if self.age.family:
            for (r, tup), val in list(self.overrides.items()):
                if r not in self.age.relations and tup[0] in ren:
                    facts[(r, (ren[tup[0]],))] = val
        for _ in block:
            name = f"e{len(self.elements)}"
            self.elements.append(name)
            self.known.add(name)
            self.journal.append(f"elem {name}")
        for (r, tup), val in sorted(facts.items()):
            if val != self.fact(r, tup):
                self.set_fact(r, tup, val)
        return new


# ---------------------------------------------------------------- F2 vector space

VECTOR_SIG = Signature({}, {"+": 2, "0": 0})


def _reduce(vecs):
    """Echelon basis as {pivot bit: (vector, combination mask over input positions)}."""
    basis = {}
    for i, v in enumerate(vecs):
        comb = 1 << i
        while v:
            p = v.bit_length() - 1
            if p not in basis:
                basis[p] = (v, comb)
                break
            bv, bc = basis[p]
            v ^= bv
            comb ^= bc
    return basis


def span_combination(c: int, vecs):
    """Mask of positions in vecs summing to c, or None if c is outside the span."""
    basis = _reduce(vecs)
    comb = 0
    while c:
        p = c.bit_length() - 1
        if p not in basis:
            return None
        bv, bc = basis[p]
        c ^= bv
        comb ^= bc
    return comb


def span(vecs):
    basis = [v for v, _ in _reduce(vecs).values()]
    out = []
    for pick in itertools.product((0, 1), repeat=len(basis)):
        s = 0
        for b, v in zip(pick, basis):
            if b:
                s ^= v
        out.append(s)
    return out


def sum_term(params):
    """Right-nested sum of the given terms, or the constant 0."""
    if not params:
        return Fn("0")
    t = params[-1]
    for p in reversed(params[:-1]):
        t = Fn("+", (p, t))
    return t


class VectorF2Oracle(Oracle):
    def __init__(self, seed: int = 0, name="vector-f2"):
        super().__init__()
        self.seed = seed
        self.name = name
        self.vec: dict[str, int] = {}
        self.names: dict[int, str] = {}
        self.next_bit = 0
        self.signature = VECTOR_SIG

    @property
    def elements(self):
        return list(self.vec)

    def name_of(self, v: int) -> str:
        n = self.names.get(v)
        if n is None:
            n = f"v{len(self.vec)}"
            self.vec[n] = v
            self.names[v] = n
            self.next_bit = max(self.next_bit, v.bit_length())
            self.journal.append(f"elem {n} {v:x}")
        return n

    def fresh(self) -> str:
        v = 1 << self.next_bit
        return self.name_of(v)

    def replay(self, line):
        parts = line.split()
        if parts[0] != "elem" or parts[1] != f"v{len(self.vec)}":
            raise ValueError(f"bad journal line {line!r}")
        self.name_of(int(parts[2], 16))

    def type_key(self, elems, f=None):
        vs = [self.vec[e] for e in elems]
        # express each element over the first independent elements of the tuple
        indep = []
        for i, v in enumerate(vs):
            if span_combination(v, [vs[j] for j in indep]) is None:
                indep.append(i)
        pattern = tuple(span_combination(v, [vs[j] for j in indep]) for v in vs)
        return tuple(indep), pattern

    def _term(self, t, env):
        if isinstance(t, Fn):
            if t.name == "0" and not t.args:
                return 0
            if t.name == "+" and len(t.args) == 2:
                return self._term(t.args[0], env) ^ self._term(t.args[1], env)
            raise UnsupportedSignature(f"function {t.name}/{len(t.args)} outside {{+, 0}}")
        return env[t]

    def _ev(self, f, env, ctx, top):
        if isinstance(f, Eq):
            return self._term(f.left, env) == self._term(f.right, env)
        if isinstance(f, Rel):
            raise UnsupportedSignature(f"relation {f.name} in the vector-space oracle")
        if isinstance(f, Not):
            return not self._ev(f.body, env, ctx, top)
        if isinstance(f, And):
            return self._ev(f.left, env, ctx, top) and self._ev(f.right, env, ctx, top)
        if isinstance(f, Or):
            return self._ev(f.left, env, ctx, top) or self._ev(f.right, env, ctx, top)
        if isinstance(f, Implies):
            return (not self._ev(f.left, env, ctx, top)) or self._ev(f.right, env, ctx, top)
        want = isinstance(f, Exists)
        for c in span(ctx) + [1 << top]:
            inner = ctx + [c] if c == 1 << top else ctx
            if self._ev(f.body, {**env, f.var: c}, inner, top + 1 if c == 1 << top else top) == want:
                return want
        return not want

    def _decide(self, f, env):
        vals = {k: self.vec[e] for k, e in env.items()}
        ctx = list(vals.values())
        top = max([self.next_bit] + [v.bit_length() for v in ctx])
        return self._ev(f, vals, ctx, top)

    def witness_text(self, template, params, avoid=()):
        f, sl = _template(template)
        u, rest = sl[0], sl[1:]
        vals = {k: self.vec[e] for k, e in zip(rest, params)}
        ctx = list(vals.values())
        top = max([self.next_bit] + [v.bit_length() for v in ctx])
        if self._ev(f, {**vals, u: 1 << top}, ctx + [1 << top], top + 1):
            self.last_reason = "fresh"
            return self.fresh()
        sols = [c for c in span(ctx) if self._ev(f, {**vals, u: c}, ctx, top)]
        if not sols:
            raise NoSolution(template)
        avoid = set(avoid)
        for c in sols:
            if self.names.get(c) in avoid:
                continue
            self.last_reason = "closed"
            return self.name_of(c)
        self.last_reason = "unique solution" if len(sols) == 1 else "every solution is in the avoided set"
        return None

    def cl_query(self, c: str, B):
        """(c in span(B), isolating formula over ?w and ?p0.. positional in B)."""
        B = list(B)
        comb = span_combination(self.vec[c], [self.vec[b] for b in B])
        if comb is None:
            return False, None
        used = [Var(f"p{j}") for j in range(len(B)) if comb >> j & 1]
        return True, Eq(Var("w"), sum_term(used))

    def independent_witness(self, phi, var: Var, asg: dict, E=()):
        text, params = abstract(phi, asg, first=var)
        f, sl = _template(text)
        u, rest = sl[0], sl[1:]
        vals = {k: self.vec[e] for k, e in zip(rest, params)}
        ctx = list(vals.values())
        top = max([self.next_bit] + [v.bit_length() for v in ctx] + [self.vec[e].bit_length() for e in E])
        if not self._ev(f, {**vals, u: 1 << top}, ctx + [1 << top], top + 1):
            raise AllSolutionsClosed(text)
        # a new basis vector is independent of everything named so far, E included
        return self.fresh()

    def independent(self, names) -> bool:
        vs = [self.vec[n] for n in names]
        return len(_reduce(vs)) == len(vs)


# ---------------------------------------------------------------- presets

PRESETS = ("pure-set", "random-graph", "unary-generic", "vector-f2")


def make_oracle(name: str, seed: int = 0, family_declared: int = 4):
    if name == "pure-set":
        return FraisseOracle(AgeSpec(), seed, name)
    if name == "random-graph":
        age = AgeSpec({"E": 2}, frozenset({"E"}), frozenset({"E"}), default="hash")
        return FraisseOracle(age, seed, name)
    if name == "unary-generic":
        return FraisseOracle(AgeSpec(family="P", family_declared=family_declared), seed, name)
    if name == "vector-f2":
        return VectorF2Oracle(seed, name)
    raise ValueError(f"unknown oracle {name!r}; expected one of {', '.join(PRESETS)}")


def age_from_structure_text(text: str, seed: int = 0) -> FraisseOracle:
    """AgeSpec from the ``rel NAME ARITY`` lines of a structure file."""
    rels = {}
    for raw in text.splitlines():
        parts = raw.split("#", 1)[0].split()
        if parts and parts[0] == "rel":
            rels[parts[1]] = int(parts[2])
        elif parts and parts[0] == "fun":
            raise UnsupportedSignature("function symbols need a non-relational oracle")
    return FraisseOracle(AgeSpec(rels), seed, "custom")
