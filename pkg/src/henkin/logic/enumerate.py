"""Deterministic enumeration of formulas by (size, canonical text).

Free placeholders are ?w1..?wk; a quantifier at depth d binds ?u{d}, so every
generated formula is already in canonical form and appears exactly once.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterator

from .structure import Signature
from .syntax import (And, Eq, Exists, Fn, Forall, Implies, Not, Or, Rel, Var,
                     show)


def placeholders(k: int) -> list[Var]:
    return [Var(f"w{i + 1}") for i in range(k)]


class _Gen:
    def __init__(self, sig: Signature, k: int, term_depth: int):
        self.sig = sig
        self.k = k
        self.term_depth = term_depth
        self.by_size = {}

    def terms(self, depth):
        base = placeholders(self.k) + [Var(f"u{d + 1}") for d in range(depth)]
        base += [Fn(c) for c in self.sig.constants]
        out = list(base)
        layer = base
        for _ in range(self.term_depth):
            new = []
            for f, ar in sorted(self.sig.functions.items()):
                if ar == 0:
                    continue
                for args in itertools.product(layer, repeat=ar):
                    new.append(Fn(f, args))
            out += new
            layer = out
        return out

    def atoms(self, depth):
        ts = self.terms(depth)
        out = [Eq(a, b) for a in ts for b in ts]
        for r, ar in sorted(self.sig.relations.items()):
            out += [Rel(r, args) for args in itertools.product(ts, repeat=ar)]
        return out

    def of_size(self, n, depth):
        key = (n, depth)
        if key in self.by_size:
            return self.by_size[key]
        if n == 1:
            out = self.atoms(depth)
        else:
            out = [Not(f) for f in self.of_size(n - 1, depth)]
            for a in range(1, n - 1):
                left, right = self.of_size(a, depth), self.of_size(n - 1 - a, depth)
                for cls in (And, Or, Implies):
                    out += [cls(l, r) for l in left for r in right]
            v = Var(f"u{depth + 1}")
            body = self.of_size(n - 1, depth + 1)
            out += [Exists(v, b) for b in body] + [Forall(v, b) for b in body]
        self.by_size[key] = out
        return out


def iter_formulas(sig: Signature, k: int, s: int, term_depth: int = 1) -> Iterator:
    """Lazily yield the enumeration; each size class is materialized and sorted
    only when reached, so taking a short prefix stays cheap."""
    g = _Gen(sig, k, term_depth)
    for n in range(1, s + 1):
        batch = sorted(g.of_size(n, 0), key=show)
        yield from batch


@lru_cache(maxsize=64)
def _cached(sig: "_Frozen", k: int, s: int, term_depth: int) -> tuple:
    return tuple(iter_formulas(sig.sig, k, s, term_depth))


def enumerate_formulas(sig: Signature, k: int, s: int, term_depth: int = 1) -> list:
    if k < 0 or s < 0:
        raise ValueError("k and s must be non-negative")
    return list(_cached(_Frozen(sig), k, s, term_depth))


def take_formulas(sig: Signature, k: int, s: int, n: int, term_depth: int = 1) -> list:
    return list(itertools.islice(iter_formulas(sig, k, s, term_depth), n))


class _Frozen:
    # hashes by signature text so lru_cache can key on it
    def __init__(self, sig):
        self.sig = sig
        self._k = sig.key()

    def __hash__(self):
        return hash(self._k)

    def __eq__(self, other):
        return isinstance(other, _Frozen) and other._k == self._k
