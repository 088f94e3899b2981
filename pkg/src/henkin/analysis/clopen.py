"""Definable sets of a finite stage as finite unions of basic boxes in
(2^ω × ω)^k, with their exact product measure.

A factor (a, i) stands for the cone U_a × {i}; a box is a k-tuple of factors.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from ..commitments import conjunct_truth, x_text
from ..errors import PrefixTooShort, Undecided
from ..fmac import project, show_node
from ..logic.parser import parse_formula
from ..logic.structure import evaluate3
from ..logic.syntax import Var, XSym, slots
from ..providers import fill
from ..scheduler import decided_by_type, materialize
from .similarity import as_template


def factor_measure(f) -> Fraction:
    node, i = f
    return Fraction(1, 2 ** (len(node) + i + 1))


def box_measure(box) -> Fraction:
    out = Fraction(1)
    for f in box:
        out *= factor_measure(f)
    return out


def factor_meet(f, g):
    (a, i), (b, j) = f, g
    if i != j:
        return None
    if b.startswith(a):
        return g
    if a.startswith(b):
        return f
    return None


def box_meet(b1, b2):
    out = []
    for f, g in zip(b1, b2):
        m = factor_meet(f, g)
        if m is None:
            return None
        out.append(m)
    return tuple(out)


def factor_minus(f, g) -> list:
    """f ∖ g as disjoint factors."""
    m = factor_meet(f, g)
    if m is None:
        return [f]
    if m == f:
        return []
    (a, i), (c, _) = f, g
    # U_a ∖ U_c for c extending a: the siblings along the path from a to c
    return [(c[:p] + ("1" if c[p] == "0" else "0"), i) for p in range(len(a), len(c))]


def box_minus(b, c) -> list:
    if box_meet(b, c) is None:
        return [b]
    out, head = [], []
    for j, (f, g) in enumerate(zip(b, c)):
        for piece in factor_minus(f, g):
            out.append(tuple(head) + (piece,) + tuple(b[j + 1:]))
        head.append(factor_meet(f, g))
    return out


def _indices(b):
    return tuple(i for _, i in b)


def normalize(boxes) -> list:
    """Pairwise disjoint boxes with the same union, sibling pieces merged."""
    # boxes with different index tuples never meet
    buckets = {}
    for b in boxes:
        done = buckets.setdefault(_indices(b), [])
        pieces = [tuple(b)]
        for r in done:
            pieces = [p for q in pieces for p in box_minus(q, r)]
            if not pieces:
                break
        done.extend(pieces)
    return _merge([b for bs in buckets.values() for b in bs])


def _merge(boxes):
    cur = set(boxes)
    changed = True
    while changed:
        changed = False
        for b in sorted(cur):
            if b not in cur:
                continue
            for j, (node, i) in enumerate(b):
                if not node:
                    continue
                sib = node[:-1] + ("1" if node[-1] == "0" else "0")
                other = b[:j] + ((sib, i),) + b[j + 1:]
                if other in cur:
                    cur -= {b, other}
                    cur.add(b[:j] + ((node[:-1], i),) + b[j + 1:])
                    changed = True
                    break
    return sorted(cur, key=lambda b: tuple((len(a), a, i) for a, i in b))


def full_boxes(k: int, index_bound: int) -> list:
    return [tuple(("", i) for i in idx) for idx in itertools.product(range(index_bound), repeat=k)]


def truncation_total(k: int, index_bound: int) -> Fraction:
    """Measure of (2^ω × {0..I-1})^k; tends to 1 as I grows."""
    return (1 - Fraction(1, 2 ** index_bound)) ** k


@dataclass
class ClopenSet:
    k: int
    boxes: list
    index_bound: int          # only indices i < index_bound are represented
    formula: str = ""
    notes: list = field(default_factory=list)
    disjoint: bool = False    # boxes already pairwise disjoint

    def normalized(self) -> "ClopenSet":
        return ClopenSet(self.k, normalize(self.boxes), self.index_bound, self.formula,
                         list(self.notes), True)

    def contains(self, point) -> bool:
        """point: k pairs (prefix, i); prefixes must reach the box depth."""
        for b in self.boxes:
            hit = True
            for (node, i), (p, j) in zip(b, point):
                if len(p) < len(node) and node.startswith(p):
                    raise PrefixTooShort(len(node), len(p))
                if i != j or not p.startswith(node):
                    hit = False
                    break
            if hit:
                return True
        return False

    def complement(self) -> "ClopenSet":
        out = []
        by_idx = {}
        for r in self.boxes:
            by_idx.setdefault(_indices(r), []).append(r)
        for b in full_boxes(self.k, self.index_bound):
            pieces = [b]
            for r in by_idx.get(_indices(b), ()):
                pieces = [p for q in pieces for p in box_minus(q, r)]
            out += pieces
        return ClopenSet(self.k, normalize(out), self.index_bound,
                         f"(not {self.formula})" if self.formula else "", disjoint=True)

    def lines(self) -> list[str]:
        out = []
        if self.formula:
            out.append(f"formula {self.formula}")
        out.append(f"boxes {len(self.boxes)} index-bound {self.index_bound}")
        for b in self.boxes:
            out.append("box " + " x ".join(f"({show_node(a)},{i})" for a, i in b))
        out += [f"note {n}" for n in self.notes]
        return out


def measure(S) -> Fraction:
    """Sum of box measures; boxes not known to be disjoint are normalized first."""
    if isinstance(S, ClopenSet):
        boxes = S.boxes if S.disjoint else normalize(S.boxes)
    else:
        boxes = normalize(S)
    return sum((box_measure(b) for b in boxes), Fraction(0))


def clopen_decomposition(lg, phi, stage: int) -> ClopenSet:
    """Boxes (U_a × {i}) × ... over the leaves of round ``stage`` on which the
    decided value of φ is true.  Boxes repeating a factor stand for the tuple
    that repeats the symbol, so they are read off the decided value there."""
    template = as_template(phi)
    k = len(slots(parse_formula(template)))
    c = lg.commitment(lg.round_end(stage))
    if c.x_mode != "doubly":
        raise ValueError("clopen decompositions need doubly indexed x-symbols")
    factors = [(a, i) for i in range(stage) for a in c.fmac.nodes]
    boxes, undecided = [], []
    for tup in itertools.product(factors, repeat=k):
        syms = tuple(x_text(a, i) for a, i in tup)
        if not all(s in c.assignment for s in syms):
            undecided.append(syms)
            continue
        v = decided_by_type(c, template, syms)
        if v is None:
            undecided.append(syms)
        elif v:
            boxes.append(tup)
    if undecided:
        raise Undecided(undecided)
    # distinct factor tuples at one depth are disjoint boxes
    S = ClopenSet(k, boxes, stage, template, disjoint=True)
    S.notes.append(f"truncation total {truncation_total(k, stage)}")
    return S


def evaluate_at(lg, phi, stage: int, point):
    """Value of φ at a tuple of points (prefix, i), read off the quotient
    structure of the literal diagram restricted to the cones of the prefixes.
    None when the diagram leaves it open."""
    template = as_template(phi)
    f = parse_formula(template)
    n = lg.round_end(stage)
    c = lg.commitment(n)
    q = materialize(lg, n, [p for p, _ in point])
    asg = {}
    for v, (p, i) in zip(slots(f), point):
        sym = XSym(project(c.fmac, p), i)
        if sym not in q.cls:
            return None
        asg[v] = q.cls[sym]
    return evaluate3(q.structure, f, asg)


def nondegenerate(lg, phi, stage: int) -> bool:
    """Some tuple of pairwise distinct elements of the stage satisfies φ."""
    template = as_template(phi)
    k = len(slots(parse_formula(template)))
    c = lg.commitment(lg.round_end(stage))
    syms = [x_text(a, i) for i in range(stage) for a in c.fmac.nodes]
    for tup in itertools.permutations(syms, k):
        elems = [c.assignment[s] for s in tup]
        if len(set(elems)) < k:
            continue
        if conjunct_truth(c.oracle, fill(template, tup), c.assignment):
            return True
    return False
