"""A-commitments: conjunct sets over Z_A with an oracle certificate.

Symbols and conjuncts are handled as canonical text throughout; the text of a
conjunct is its identity, so entailment by containment is a set lookup.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import (CertificateFails, DegenerateXAssignment, SymbolOutsideFmac,
                     UnassignedFreeVariable)
from .fmac import EMPTY, Fmac, Lifting, covers, iter_liftings, show_node, standard
from .logic.parser import parse_cached
from .logic.syntax import (SYM_RE, XSym, YSym, abstract_text, canonical,
                           fill_text, lift_sym_text, parse_sym, sym_key,
                           text_symbols)


# ---------------------------------------------------------------- symbol text

def x_text(node, index=None) -> str:
    return str(XSym(node, index))


def y_text(nodes, index) -> str:
    return str(YSym(tuple(nodes), index))


@lru_cache(maxsize=None)
def sym_nodes(sym: str) -> frozenset:
    return parse_sym(sym).support


@lru_cache(maxsize=None)
def sym_sort_key(sym: str):
    return sym_key(parse_sym(sym))


def is_x(sym: str) -> bool:
    return sym.startswith("x:")


def x_index(sym: str):
    s = parse_sym(sym)
    return s.index


def support(syms, A: Fmac | None = None) -> frozenset:
    """Least t ⊆ A with every symbol in Z_t."""
    out = set()
    for s in syms:
        s = str(s)
        out |= sym_nodes(s)
    if A is not None:
        bad = [a for a in out if a not in A]
        if bad:
            raise SymbolOutsideFmac(f"nodes {sorted(map(show_node, bad))} are not in {A}")
    return frozenset(out)


def negate_text(t: str) -> str:
    if t.startswith("(not ") and t.endswith(")"):
        return t[5:-1]
    return f"(not {t})"


def neq_text(s1: str, s2: str) -> str:
    a, b = sorted((s1, s2), key=sym_sort_key)
    return f"(not (= {a} {b}))"


def zero_sum_text(syms) -> str:
    """(= s1 0) or (= (+ s1 (+ s2 ...)) 0) over the symbols in canonical order."""
    from .oracles import sum_term
    syms = sorted(syms, key=sym_sort_key)
    if len(syms) == 1:
        return f"(= {syms[0]} 0)"
    return f"(= {sum_term(list(syms))} 0)"


def instantiate_text(template: str, mapping: dict) -> str:
    """Fill placeholders of a canonical template; result is canonical."""
    out = fill_text(template, mapping)
    if "?uu" in template:
        out = canonical(parse_cached(out))
    return out


def w_window(level: int, x_mode="doubly", with_y=True, y_span=None) -> list[str]:
    """W_ℓ as symbol text: x_{a,i} (a ∈ 2^ℓ, i < ℓ) and y_{t,i} (∅ ≠ t ⊆ 2^ℓ, i < ℓ).

    ``y_span`` optionally caps |t| (the full y-part has 2^(2^ℓ) - 1 index sets).
    """
    nodes = standard(level).nodes if level > 0 else ()
    out = []
    for i in range(level):
        for a in nodes:
            out.append(x_text(a, i if x_mode == "doubly" else None))
        if x_mode != "doubly":
            break
    if with_y:
        top = len(nodes) if y_span is None else min(y_span, len(nodes))
        for n in range(1, top + 1):
            for t in itertools.combinations(nodes, n):
                for i in range(level):
                    out.append(y_text(t, i))
    return sorted(set(out), key=sym_sort_key)


# ---------------------------------------------------------------- certificates

def conjunct_truth(oracle, conj: str, asg: dict) -> bool:
    template, syms = abstract_text(conj)
    try:
        elems = tuple(asg[s] for s in syms)
    except KeyError as e:
        raise UnassignedFreeVariable(e.args[0]) from None
    return oracle.truth(template, elems)


def nondegeneracy(fmac: Fmac, x_mode="doubly") -> list[str]:
    idx = 0 if x_mode == "doubly" else None
    xs = [x_text(a, idx) for a in fmac.nodes]
    return [neq_text(a, b) for a, b in itertools.combinations(xs, 2)]


@dataclass(frozen=True)
class Commitment:
    fmac: Fmac
    conjuncts: frozenset
    assignment: dict = field(hash=False, compare=False)
    oracle: object = field(hash=False, compare=False, repr=False)
    x_mode: str = "doubly"
    isolators: dict = field(default_factory=dict, hash=False, compare=False)

    def symbols(self) -> list[str]:
        return sorted(self.assignment, key=sym_sort_key)

    def decides(self, text: str):
        """True / False if text or its negation is a conjunct, else None."""
        if text in self.conjuncts:
            return True
        if negate_text(text) in self.conjuncts:
            return False
        return None

    def validate(self):
        for s in self.assignment:
            support((s,), self.fmac)
        for c in sorted(self.conjuncts):
            for s in text_symbols(c):
                support((s,), self.fmac)
            if not conjunct_truth(self.oracle, c, self.assignment):
                raise CertificateFails(c)
        idx = 0 if self.x_mode == "doubly" else None
        seen = {}
        for a in self.fmac.nodes:
            x = x_text(a, idx)
            if x not in self.assignment:
                raise UnassignedFreeVariable(x)
            e = self.assignment[x]
            if e in seen:
                raise DegenerateXAssignment(seen[e], a)
            seen[e] = a
        for neq in nondegeneracy(self.fmac, self.x_mode):
            if neq not in self.conjuncts:
                raise CertificateFails(neq)
        return self

    def dumps(self) -> str:
        lines = [f"oracle {self.oracle.name} {getattr(self.oracle, 'seed', 0)}",
                 f"xmode {self.x_mode}", f"fmac {self.fmac}"]
        lines += [f"add {c}" for c in sorted(self.conjuncts)]
        lines += [f"bind {s} {self.assignment[s]}" for s in self.symbols()]
        lines += [f"isolate {y} {d}" for y, d in sorted(self.isolators.items())]
        return "\n".join(lines) + "\n"


def make_commitment(A: Fmac, conjuncts, oracle, asg: dict, x_mode="doubly",
                    isolators=None) -> Commitment:
    conj = set()
    for c in conjuncts:
        conj.add(c if isinstance(c, str) else canonical(c))
    asg = {str(k): v for k, v in asg.items()}
    idx = 0 if x_mode == "doubly" else None
    seen = {}
    for a in A.nodes:
        x = x_text(a, idx)
        if x not in asg:
            raise UnassignedFreeVariable(x)
        if asg[x] in seen:
            raise DegenerateXAssignment(show_node(seen[asg[x]]), show_node(a))
        seen[asg[x]] = a
    conj.update(nondegeneracy(A, x_mode))
    c = Commitment(A, frozenset(conj), asg, oracle, x_mode, dict(isolators or {}))
    return c.validate()


# ---------------------------------------------------------------- extension order

class _LiftCache:
    def __init__(self, h: Lifting):
        self.mapping = h.mapping
        self.moved = {a for a, b in self.mapping.items() if a != b}
        self.syms = {}

    def sym(self, s):
        out = self.syms.get(s)
        if out is None:
            nodes = sym_nodes(s)
            missing = [a for a in nodes if a not in self.mapping]
            if missing:
                from .errors import SymbolOutsideSource
                raise SymbolOutsideSource(f"{s} is not indexed by the lifting source")
            out = lift_sym_text(s, self.mapping) if nodes & self.moved else s
            self.syms[s] = out
        return out

    def text(self, t):
        if not self.moved:
            return t
        return SYM_RE.sub(lambda m: self.sym(m.group(0)), t)


def lift_conjuncts(conjuncts, h: Lifting) -> set:
    lc = _LiftCache(h)
    return {lc.text(c) for c in conjuncts}


def extension_failure(c1: Commitment, c2: Commitment):
    """None if c1 ≤ c2, else (lifting or None, offending conjunct or reason)."""
    if not covers(c1.fmac, c2.fmac):
        return None, f"{c2.fmac} does not cover {c1.fmac}"
    target = c2.conjuncts
    for h in iter_liftings(c1.fmac, c2.fmac):
        lc = _LiftCache(h)
        for c in sorted(c1.conjuncts):
            img = lc.text(c)
            if img not in target:
                return h, img
    return None


def extends(c1: Commitment, c2: Commitment) -> bool:
    return extension_failure(c1, c2) is None


# ---------------------------------------------------------------- drafts

class Draft:
    """Mutable commitment under construction.  Every change is also recorded
    in ``events`` so the scheduler can write it to the log."""

    def __init__(self, fmac: Fmac, oracle, x_mode="doubly"):
        self.fmac = fmac
        self.oracle = oracle
        self.x_mode = x_mode
        self.conjuncts: set[str] = set()
        self.asg: dict[str, str] = {}
        self.isolators: dict[str, str] = {}
        self.events: list[tuple] = []
        self.check = True

    @classmethod
    def of(cls, c: Commitment) -> "Draft":
        d = cls(c.fmac, c.oracle, c.x_mode)
        d.conjuncts = set(c.conjuncts)
        d.asg = dict(c.assignment)
        d.isolators = dict(c.isolators)
        return d

    def freeze(self) -> Commitment:
        return Commitment(self.fmac, frozenset(self.conjuncts), dict(self.asg), self.oracle,
                          self.x_mode, dict(self.isolators))

    def truth(self, text: str) -> bool:
        return conjunct_truth(self.oracle, text, self.asg)

    def add(self, text: str):
        if text in self.conjuncts:
            return False
        if self.check and not self.truth(text):
            raise CertificateFails(text)
        self.conjuncts.add(text)
        self.events.append(("add", text))
        return True

    def bind(self, sym: str, elem: str):
        if sym in self.asg:
            if self.asg[sym] != elem:
                raise ValueError(f"{sym} already bound to {self.asg[sym]}")
            return
        support((sym,), self.fmac)
        self.asg[sym] = elem
        self.events.append(("bind", sym, elem))

    def isolate(self, y: str, text: str):
        self.isolators[y] = text
        self.events.append(("isolate", y, text))

    def decides(self, text: str):
        if text in self.conjuncts:
            return True
        if negate_text(text) in self.conjuncts:
            return False
        return None

    def decide(self, text: str) -> bool:
        """Conjoin text or its negation, whichever the certificate satisfies."""
        d = self.decides(text)
        if d is not None:
            return d
        v = self.truth(text)
        self.conjuncts.add(text if v else negate_text(text))
        self.events.append(("add", text if v else negate_text(text)))
        return v

    def symbols_at(self, nodes) -> list[str]:
        nodes = set(nodes)
        return sorted((s for s in self.asg if sym_nodes(s) <= nodes), key=sym_sort_key)

    def drain(self):
        out, self.events = self.events, []
        return out


def apply_split(conjuncts, asg, isolators, fmac: Fmac, node, new_fmac: Fmac, h0: Lifting, h1: Lifting):
    """Lifted conjunct set, lifted assignment (h0 side) and lifted isolators for a split.

    Returns (conjuncts, asg, isolators, copies) where copies maps each h0-lifted
    symbol touching ``node`` to its h1 twin, which still needs an element.
    """
    l0, l1 = _LiftCache(h0), _LiftCache(h1)
    out = set()
    for c in conjuncts:
        out.add(l0.text(c))
        out.add(l1.text(c))
    new_asg = {l0.sym(s): e for s, e in asg.items()}
    copies = {}
    for s in asg:
        if node in sym_nodes(s):
            copies[l0.sym(s)] = l1.sym(s)
    iso = {}
    for y, d in isolators.items():
        iso[l0.sym(y)] = l0.text(d)
        iso[l1.sym(y)] = l1.text(d)
    return out, new_asg, iso, copies
