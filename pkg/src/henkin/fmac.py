"""Finite maximal antichains of the binary tree 2^<ω.

Nodes are plain strings over ``"01"``; the root is the empty string and is
written ``ε`` when serialized.  Points of Cantor space only ever appear as
finite prefixes (``PointPrefix`` is just a longer node).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple

from .errors import (NodeNotInFmac, NotACover, NotAntichain, NotMaximal,
                     PrefixTooShort, FmacError)

Node = str
EMPTY = "ε"


def is_prefix(a: Node, b: Node) -> bool:
    """a ⊴ b"""
    return b.startswith(a)


def comparable(a: Node, b: Node) -> bool:
    return b.startswith(a) or a.startswith(b)


def check_node(a: Node) -> Node:
    if any(ch not in "01" for ch in a):
        raise FmacError(f"bad node {a!r}")
    return a


def parse_node(text: str) -> Node:
    text = text.strip()
    if text in (EMPTY, "e", ""):
        return ""
    return check_node(text)


def show_node(a: Node) -> str:
    return a if a else EMPTY


def kraft_sum(nodes: Iterable[Node]) -> Fraction:
    return sum((Fraction(1, 2 ** len(a)) for a in nodes), Fraction(0))


def find_comparable_pair(nodes: Iterable[Node]):
    # in lexicographic order a prefix sorts immediately before its extensions,
    # so checking neighbours is enough
    ordered = sorted(set(nodes))
    for a, b in zip(ordered, ordered[1:]):
        if b.startswith(a):
            return a, b
    return None


@dataclass(frozen=True)
class Fmac:
    nodes: tuple[Node, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes)))

    def __iter__(self) -> Iterator[Node]:
        return iter(self.nodes)

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, a):
        return a in self._set

    @property
    def _set(self):
        try:
            return self.__dict__["_nodeset"]
        except KeyError:
            s = frozenset(self.nodes)
            object.__setattr__(self, "_nodeset", s)
            return s

    @property
    def depth(self) -> int:
        return max(len(a) for a in self.nodes)

    def is_standard(self) -> bool:
        """True when this is 2^ℓ for some ℓ."""
        d = len(self.nodes[0])
        return all(len(a) == d for a in self.nodes) and len(self.nodes) == 2 ** d

    def __str__(self):
        return ",".join(show_node(a) for a in self.nodes)


def validate_fmac(nodes: Iterable[Node]) -> Fmac:
    nodes = [check_node(a) for a in nodes]
    if not nodes:
        raise FmacError("empty node set")
    pair = find_comparable_pair(nodes)
    if pair is not None:
        raise NotAntichain(*pair)
    k = kraft_sum(set(nodes))
    if k != 1:
        # an antichain always has Kraft sum <= 1
        raise NotMaximal(k)
    return Fmac(tuple(set(nodes)))


def standard(n: int) -> Fmac:
    """The fmac 2^n of all strings of length n."""
    return Fmac(tuple("".join(bits) for bits in itertools.product("01", repeat=n)))


def parse_fmac(text: str) -> Fmac:
    return validate_fmac(parse_node(t) for t in text.split(","))


def covers(a: Fmac, b: Fmac) -> bool:
    """B covers A: each node of A lies below some node of B."""
    return all(any(y.startswith(x) for y in b.nodes) for x in a.nodes)


@dataclass(frozen=True)
class Lifting:
    source: Fmac
    target: Fmac
    pairs: tuple[tuple[Node, Node], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))
        object.__setattr__(self, "_map", dict(self.pairs))

    def __call__(self, a: Node) -> Node:
        try:
            return self._map[a]
        except KeyError:
            raise NodeNotInFmac(f"{show_node(a)} not in lifting source {self.source}") from None

    @property
    def mapping(self) -> dict[Node, Node]:
        return dict(self._map)

    def image(self, nodes: Iterable[Node]) -> tuple[Node, ...]:
        return tuple(sorted(self(a) for a in nodes))

    def compose(self, after: "Lifting") -> "Lifting":
        """after ∘ self"""
        if after.source != self.target:
            raise FmacError("liftings do not compose")
        return Lifting(self.source, after.target, tuple((a, after(b)) for a, b in self.pairs))

    def check(self):
        for a, b in self.pairs:
            if not b.startswith(a):
                raise FmacError(f"{show_node(a)} is not below {show_node(b)}")
        if len(set(self._map.values())) != len(self.pairs):
            raise FmacError("lifting is not injective")
        return self

    def __str__(self):
        return ",".join(f"{show_node(a)}->{show_node(b)}" for a, b in self.pairs)


def identity(a: Fmac) -> Lifting:
    return Lifting(a, a, tuple((x, x) for x in a.nodes))


def parse_lifting(text: str, source: Fmac, target: Fmac) -> Lifting:
    pairs = []
    for item in text.split(","):
        lhs, rhs = item.split("->")
        pairs.append((parse_node(lhs), parse_node(rhs)))
    return Lifting(source, target, tuple(pairs)).check()


def lifting_choices(a: Fmac, b: Fmac) -> list[list[Node]]:
    choices = [[y for y in b.nodes if y.startswith(x)] for x in a.nodes]
    if any(not c for c in choices):
        raise NotACover(f"{b} does not cover {a}")
    return choices


def count_liftings(a: Fmac, b: Fmac) -> int:
    n = 1
    for c in lifting_choices(a, b):
        n *= len(c)
    return n


def iter_liftings(a: Fmac, b: Fmac) -> Iterator[Lifting]:
    choices = lifting_choices(a, b)
    for pick in itertools.product(*choices):
        yield Lifting(a, b, tuple(zip(a.nodes, pick)))


def enumerate_liftings(a: Fmac, b: Fmac) -> list[Lifting]:
    return list(iter_liftings(a, b))


def split_at(a: Fmac, node: Node) -> tuple[Fmac, Lifting, Lifting]:
    """Split A at one of its nodes; returns A^{*a} and the liftings h0, h1."""
    if node not in a:
        raise NodeNotInFmac(f"{show_node(node)} not in {a}")
    rest = [x for x in a.nodes if x != node]
    split = Fmac(tuple(rest) + (node + "0", node + "1"))
    h0 = Lifting(a, split, tuple((x, x) for x in rest) + ((node, node + "0"),))
    h1 = Lifting(a, split, tuple((x, x) for x in rest) + ((node, node + "1"),))
    return split, h0, h1


def project(a: Fmac, prefix: Node) -> Node:
    """π_A: the unique node of A below a point given by a long enough prefix."""
    check_node(prefix)
    if len(prefix) < a.depth:
        raise PrefixTooShort(a.depth, len(prefix))
    for x in a.nodes:
        if prefix.startswith(x):
            return x
    raise FmacError("no node below prefix; fmac is not maximal")  # unreachable for valid fmacs


class SplitStep(NamedTuple):
    fmac: Fmac   # the fmac after the split
    node: Node   # the node that was split


def factor_cover(a: Fmac, b: Fmac) -> list[SplitStep]:
    """Chain of point splittings from A to a cover B, lexicographically least node first."""
    if not covers(a, b):
        raise NotACover(f"{b} does not cover {a}")
    target = b._set
    cur = a
    chain = []
    while True:
        todo = [x for x in cur.nodes if x not in target]
        if not todo:
            break
        node = todo[0]
        cur = split_at(cur, node)[0]
        chain.append(SplitStep(cur, node))
    if cur != b:
        raise NotACover(f"{b} does not cover {a}")
    return chain


def restrict(node: Node, depth: int) -> Node:
    return node[:depth]
