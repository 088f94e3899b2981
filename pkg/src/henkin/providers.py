"""Density providers: the five callbacks that extend a commitment.

All callbacks mutate a ``Draft`` in place (the scheduler batches many goals
into one logged step); the ``p_*`` functions wrap them for single use on
immutable commitments.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

from .commitments import (Commitment, Draft, apply_split, instantiate_text,
                          negate_text, neq_text, sym_nodes, sym_sort_key,
                          x_text, y_text, zero_sum_text)
from .errors import (AllSolutionsClosed, NoSolution, OmitSearchExhausted,
                     ProviderFailure)
from .fmac import Fmac, split_at, show_node
from .logic.parser import parse_cached
from .logic.syntax import Exists, Var, canonical, parse_sym, slots
from .oracles import FraisseOracle, VectorF2Oracle, make_oracle, sum_term


@lru_cache(maxsize=None)
def template_slots(template: str) -> tuple:
    return tuple(str(v) for v in slots(parse_cached(template)))


@lru_cache(maxsize=None)
def exists_template(theta: str) -> str:
    """∃?w1 θ, canonical, keeping the remaining slots free."""
    return canonical(Exists(Var("w1"), parse_cached(theta)))


def fill(template: str, syms) -> str:
    return instantiate_text(template, dict(zip(template_slots(template), syms)))


class Provider:
    name = "provider"
    x_mode = "doubly"
    with_y = False

    def __init__(self, oracle):
        self.oracle = oracle
        self.signature = oracle.signature

    # -- shared helpers

    def elements(self, d: Draft, syms):
        return tuple(d.asg[s] for s in syms)

    def next_index(self, d: Draft, node) -> int:
        used = [parse_sym(s).index for s in d.asg if s.startswith("x:") and sym_nodes(s) == {node}]
        return max([i for i in used if i is not None] + [-1]) + 1

    def next_y_index(self, d: Draft, nodes) -> int:
        key = frozenset(nodes)
        used = [parse_sym(s).index for s in d.asg if s.startswith("y:") and sym_nodes(s) == key]
        return max(used + [-1]) + 1

    def root(self) -> Draft:
        d = Draft(Fmac(("",)), self.oracle, self.x_mode)
        self.introduce(d, [x_text("", 0 if self.x_mode == "doubly" else None)])
        return d

    # -- the five callbacks

    def complete(self, d: Draft, text: str) -> bool:
        return d.decide(text)

    def henkin(self, d: Draft, theta: str, params, anchor=None):
        raise NotImplementedError

    def split(self, d: Draft, node):
        raise NotImplementedError

    def omit(self, d: Draft, syms, delta, bound: int):
        """Conjoin ¬δ_j(z̄) for the least j whose δ_j is false; returns j."""
        for j in range(bound):
            tmpl = delta(j)
            if tmpl is None:
                break
            text = fill(tmpl, syms)
            neg = negate_text(text)
            if neg in d.conjuncts:
                return j
            if text in d.conjuncts:
                continue
            if not d.truth(text):
                d.add(neg)
                return j
        raise OmitSearchExhausted(bound, tuple(syms))

    def atomize(self, d: Draft, syms):
        raise NotImplementedError

    def introduce(self, d: Draft, syms):
        raise NotImplementedError

    def window(self, level: int, y_span=None):
        from .commitments import w_window
        return w_window(level, self.x_mode, self.with_y, y_span)

    def henkin_case_none(self, d, theta, params):
        ex = fill(exists_template(theta), params)
        if d.decides(ex) is False:
            return True
        if not d.truth(ex):
            d.add(negate_text(ex))
            return True
        return False

    def reuse(self, d, theta, params, t, anchor):
        nodes = t or ({anchor} if anchor is not None else set())
        for z in d.symbols_at(nodes):
            text = fill(theta, (z,) + tuple(params))
            if text in d.conjuncts or d.truth(text):
                d.add(text)
                return z, text
        return None


# ---------------------------------------------------------------- dcl-trivial

class DclTrivialProvider(Provider):
    """Witnesses from a Fraisse limit with trivial definable closure.  Every
    symbol gets its own element and all symbols are kept pairwise distinct."""
    name = "dcl-trivial"
    x_mode = "doubly"
    with_y = False

    def _distinct_from_all(self, d: Draft, sym):
        for z in list(d.asg):
            if z != sym:
                d.add(neq_text(sym, z))

    def introduce(self, d: Draft, syms):
        for s in syms:
            if s in d.asg:
                continue
            e = self.oracle.new_element()
            d.bind(s, e)
            self._distinct_from_all(d, s)

    def henkin(self, d: Draft, theta: str, params, anchor=None):
        params = tuple(params)
        if self.henkin_case_none(d, theta, params):
            return None, negate_text(fill(exists_template(theta), params))
        t = set().union(*(sym_nodes(p) for p in params)) if params else set()
        hit = self.reuse(d, theta, params, t, anchor)
        if hit:
            return hit
        node = min(t) if t else anchor
        if node is None:
            raise ProviderFailure("henkin", None, f"no node to host a witness for {theta}")
        sym = x_text(node, self.next_index(d, node))
        try:
            e = self.oracle.witness_text(theta, self.elements(d, params), set(d.asg.values()))
        except NoSolution:
            raise ProviderFailure("henkin", None, f"{theta} has no solution") from None
        if e is None:
            raise ProviderFailure("henkin", None, f"no fresh witness for {theta}: {self.oracle.last_reason}")
        d.bind(sym, e)
        self._distinct_from_all(d, sym)
        text = fill(theta, (sym,) + params)
        d.add(text)
        return sym, text

    def split(self, d: Draft, node):
        new_fmac, h0, h1 = split_at(d.fmac, node)
        conj, asg, iso, copies = apply_split(d.conjuncts, d.asg, d.isolators, d.fmac, node, new_fmac, h0, h1)
        block_syms = sorted(copies, key=sym_sort_key)
        block = [asg[s] for s in block_syms]
        over = sorted({e for s, e in asg.items() if s not in copies})
        d.fmac, d.conjuncts, d.asg, d.isolators = new_fmac, conj, asg, iso
        new = self.oracle.copy_block(block, over)
        for s, e in zip(block_syms, new):
            d.bind(copies[s], e)
        for s in block_syms:
            self._distinct_from_all(d, copies[s])

    def atomize(self, d: Draft, syms):
        o = self.oracle
        if o.age.family:
            raise ProviderFailure("atomize", None,
                                  "infinitely many independent unary predicates: no complete formula exists")
        syms = list(dict.fromkeys(syms))
        for a, b in itertools.combinations(syms, 2):
            d.decide(neq_text(a, b))
        for s in syms:
            d.decide(f"(= {s} {s})")
        for r, ar in sorted(o.age.relations.items()):
            for tup in itertools.product(syms, repeat=ar):
                d.decide("(" + r + " " + " ".join(tup) + ")")


# ---------------------------------------------------------------- pregeometry

class PregeometryProvider(Provider):
    """Witnesses from the F2 vector space: x-symbols are independent vectors,
    y_{t,i} lie in the span of x̄_t and carry an isolating equation."""
    name = "pregeometry"
    x_mode = "doubly"
    with_y = True

    def __init__(self, oracle):
        super().__init__(oracle)
        if not isinstance(oracle, VectorF2Oracle):
            raise ProviderFailure("setup", None, "the pregeometry provider needs cl_query")

    def x_block(self, d: Draft, nodes):
        xs = sorted((s for s in d.asg if s.startswith("x:") and sym_nodes(s) <= set(nodes)), key=sym_sort_key)
        return xs

    def isolator(self, d: Draft, y: str, nodes) -> str:
        xs = self.x_block(d, nodes)
        ok, delta = self.oracle.cl_query(d.asg[y], [d.asg[x] for x in xs])
        if not ok:
            raise ProviderFailure("henkin", None, f"{y} escaped the closure of its x-block")
        used = [xs[int(str(v)[2:])] for v in _params(delta)]
        return canonical_eq(y, used)

    def _bind_y(self, d: Draft, y: str, vec: int, nodes):
        d.bind(y, self.oracle.name_of(vec))
        text = self.isolator(d, y, nodes)
        d.add(text)
        d.isolate(y, text)

    def introduce(self, d: Draft, syms):
        for s in sorted(syms, key=sym_sort_key):
            if s in d.asg:
                continue
            sym = parse_sym(s)
            if s.startswith("x:"):
                d.bind(s, self.oracle.fresh())
                if sym.index == 0:
                    for z in sorted(d.asg, key=sym_sort_key):
                        if z != s and z.startswith("x:") and parse_sym(z).index == 0:
                            d.add(neq_text(s, z))
            else:
                xs = [x_text(a, sym.index) for a in sym.nodes]
                self.introduce(d, [x for x in xs if x not in d.asg])
                vec = 0
                for x in xs:
                    vec ^= self.oracle.vec[d.asg[x]]
                self._bind_y(d, s, vec, sym.nodes)

    def henkin(self, d: Draft, theta: str, params, anchor=None):
        params = tuple(params)
        if self.henkin_case_none(d, theta, params):
            return None, negate_text(fill(exists_template(theta), params))
        t = set().union(*(sym_nodes(p) for p in params)) if params else set()
        hit = self.reuse(d, theta, params, t, anchor)
        if hit:
            return hit
        nodes = t or {anchor}
        o = self.oracle
        dbar = [o.vec[e] for e in self.elements(d, params)]
        ct = [o.vec[d.asg[x]] for x in self.x_block(d, nodes)]
        from .oracles import span, span_combination
        candidates = span(dbar)
        for c in span(ct):
            if span_combination(c, dbar) is None:
                candidates.append(c)
                break
        for c in candidates:
            name = o.name_of(c) if c in o.names else None
            if name is None:
                # test the vector through a scratch name only when it satisfies theta
                if not _vec_truth(o, theta, c, self.elements(d, params)):
                    continue
                name = o.name_of(c)
            elif not o.truth(theta, (name,) + self.elements(d, params)):
                continue
            y = y_text(sorted(nodes), self.next_y_index(d, nodes))
            self._bind_y(d, y, c, nodes)
            text = fill(theta, (y,) + params)
            d.add(text)
            return y, text
        node = min(nodes)
        sym = x_text(node, self.next_index(d, node))
        try:
            e = o.witness_text(theta, self.elements(d, params), set(d.asg.values()))
        except NoSolution:
            raise ProviderFailure("henkin", None, f"{theta} has no solution") from None
        if e is None or o.last_reason != "fresh":
            raise ProviderFailure("henkin", None, f"no independent witness for {theta}: {o.last_reason}")
        d.bind(sym, e)
        text = fill(theta, (sym,) + params)
        d.add(text)
        return sym, text

    def split(self, d: Draft, node):
        o = self.oracle
        new_fmac, h0, h1 = split_at(d.fmac, node)
        conj, asg, iso, copies = apply_split(d.conjuncts, d.asg, d.isolators, d.fmac, node, new_fmac, h0, h1)
        d.fmac, d.conjuncts, d.asg, d.isolators = new_fmac, conj, asg, iso
        twins = sorted(copies.values(), key=sym_sort_key)
        for s in twins:
            if s.startswith("x:"):
                d.bind(s, o.fresh())
        for s in twins:
            if s.startswith("y:"):
                delta = parse_cached(iso[s])
                vec = 0
                for leaf in _params(delta):
                    vec ^= o.vec[d.asg[str(leaf)]]
                d.bind(s, o.name_of(vec))
        d.add(neq_text(x_text(node + "0", 0), x_text(node + "1", 0)))

    def atomize(self, d: Draft, syms):
        syms = list(dict.fromkeys(syms))
        for n in range(1, len(syms) + 1):
            for sub in itertools.combinations(syms, n):
                d.decide(zero_sum_text(sub))


def _params(delta):
    """Leaves on the right-hand side of an isolating equation."""
    from .logic.syntax import term_leaves, Fn
    return [l for l in term_leaves(delta.right) if not isinstance(l, Fn)]


def canonical_eq(y: str, xs) -> str:
    from .logic.syntax import Eq, show
    return show(Eq(parse_sym(y), sum_term([parse_sym(x) for x in xs])))


def _vec_truth(o: VectorF2Oracle, theta, vec, params) -> bool:
    f = parse_cached(theta)
    sl = slots(f)
    vals = {sl[0]: vec}
    vals.update({k: o.vec[e] for k, e in zip(sl[1:], params)})
    ctx = list(vals.values())
    top = max([o.next_bit] + [v.bit_length() for v in ctx])
    return o._ev(f, vals, ctx, top)


# ---------------------------------------------------------------- presets and wrappers

def make_provider(name: str, seed: int = 0, **kw):
    oracle = make_oracle(name, seed, **kw)
    if isinstance(oracle, VectorF2Oracle):
        return PregeometryProvider(oracle)
    return DclTrivialProvider(oracle)


def _wrap(c: Commitment, fn):
    d = Draft.of(c)
    out = fn(d)
    return d.freeze(), out


def p_complete(provider, c: Commitment, psi: str) -> Commitment:
    return _wrap(c, lambda d: provider.complete(d, psi))[0]


def p_henkin(provider, c: Commitment, theta: str, params, anchor=None) -> Commitment:
    return _wrap(c, lambda d: provider.henkin(d, theta, params, anchor))[0]


def p_split(provider, c: Commitment, node) -> Commitment:
    return _wrap(c, lambda d: provider.split(d, node))[0]


def p_omit(provider, c: Commitment, syms, delta, bound=64) -> Commitment:
    return _wrap(c, lambda d: provider.omit(d, syms, delta, bound))[0]


def p_atomize(provider, c: Commitment, syms) -> Commitment:
    return _wrap(c, lambda d: provider.atomize(d, syms))[0]
