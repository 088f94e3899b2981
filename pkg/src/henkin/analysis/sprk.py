"""Splitting rank of finite subsets of a finite relational structure.

The base case uses the structure's declared acl-core (``aclcore`` line)
instead of acl(∅), which is all of M for a finite structure.  A coordinate
b_j may be replaced by b* ∉ B when the whole tuple keeps its quantifier-free
type; the rank then continues on B ∪ {b*}.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..errors import CapTooSmall, UnsupportedSignature

BASE_FAIL = "BaseFail"
INFINITE = "inf"


def qf_type(M, tup) -> tuple:
    """Equality pattern plus every relation fact on the tuple's positions."""
    n = len(tup)
    eqs = tuple(tup[i] == tup[j] for i in range(n) for j in range(i + 1, n))
    facts = []
    for rel, ar in sorted(M.sig.relations.items()):
        for idx in itertools.product(range(n), repeat=ar):
            facts.append(M.holds(rel, tuple(tup[i] for i in idx)))
    return eqs, tuple(facts)


@dataclass
class RankResult:
    value: object                     # BASE_FAIL, an int, or INFINITE
    B: tuple
    trace: list = field(default_factory=list)   # (j, b_j, b*) witnesses at the top level
    iterations: int = 0

    def lines(self) -> list[str]:
        out = [f"set {','.join(self.B)}", f"rank {self.value}", f"iterations {self.iterations}"]
        out += [f"witness j={j} {b}->{w}" for j, b, w in self.trace]
        return out


def _check(M, B):
    if M.sig.functions:
        raise UnsupportedSignature("splitting rank needs a relational signature")
    B = tuple(B)
    if not B:
        raise ValueError("B must be non-empty")
    if len(set(B)) != len(B):
        raise ValueError("B has repeated elements")
    missing = [b for b in B if b not in set(M.elements)]
    if missing:
        raise ValueError(f"elements {missing} are not in the structure")
    return B


class _Game:
    def __init__(self, M):
        self.M = M
        self.order = {e: i for i, e in enumerate(M.elements)}
        self.moves = {}

    def tup(self, S):
        return tuple(sorted(S, key=self.order.__getitem__))

    def replacements(self, S):
        """For each coordinate j of S (in element order): the b* ∉ S keeping the qf type."""
        out = self.moves.get(S)
        if out is None:
            t = self.tup(S)
            ty = qf_type(self.M, t)
            out = []
            for j in range(len(t)):
                cands = []
                for e in self.M.elements:
                    if e in S:
                        continue
                    if qf_type(self.M, t[:j] + (e,) + t[j + 1:]) == ty:
                        cands.append(e)
                out.append((t[j], cands))
            self.moves[S] = out
        return out


def sprk(M, B, cap: int = 64) -> RankResult:
    """Exact splitting rank by downward fixpoint over the supersets of B.

    Level α+1 keeps the sets S of level α such that every coordinate has a
    type-preserving replacement b* with S ∪ {b*} still at level α.  A level
    that no longer shrinks is a self-supporting family: rank ∞.
    """
    B = _check(M, B)
    if set(B) & M.aclcore:
        return RankResult(BASE_FAIL, B)
    g = _Game(M)
    rest = [e for e in M.elements if e not in B and e not in M.aclcore]
    # supersets of B that avoid the core; others are never at level 0
    level = {frozenset(B) | frozenset(extra)
             for r in range(len(rest) + 1) for extra in itertools.combinations(rest, r)}
    start = frozenset(B)
    alpha, prev = 0, None
    while True:
        nxt = set()
        for S in level:
            if all(any(S | {w} in level for w in cands) for _, cands in g.replacements(S)):
                nxt.add(S)
        if start not in nxt:
            # rank is alpha; the witnesses for it live one level down
            trace = _witnesses(g, start, prev) if prev is not None else []
            return RankResult(alpha, B, trace, alpha + 1)
        if nxt == level:
            return RankResult(INFINITE, B, _witnesses(g, start, level), alpha + 1)
        alpha += 1
        if alpha > cap:
            raise CapTooSmall(f"rank of {','.join(B)} exceeds cap {cap} without stabilizing")
        prev, level = level, nxt


def _witnesses(g, S, level):
    B = g.tup(S)
    out = []
    for b, cands in g.replacements(S):
        w = next(w for w in cands if S | {w} in level)
        out.append((B.index(b), b, w))
    return out


def check_trace(M, res: RankResult, cap: int = 64) -> bool:
    """Replay the recorded witnesses: each keeps the qf type and its
    extension has rank at least one less."""
    if res.value == BASE_FAIL or res.value == 0:
        return not res.trace
    B = tuple(sorted(res.B, key=M.elements.index))
    if len(res.trace) != len(B):
        return False
    ty = qf_type(M, B)
    for j, b, w in res.trace:
        if B[j] != b or w in B:
            return False
        if qf_type(M, B[:j] + (w,) + B[j + 1:]) != ty:
            return False
        sub = sprk(M, B + (w,), cap).value
        if res.value != INFINITE and not (sub == INFINITE or sub >= res.value - 1):
            return False
        if res.value == INFINITE and sub != INFINITE:
            return False
    return True


def pure_equality_rank(m: int, nb: int) -> int:
    """Closed form on a pure set of size m with empty core."""
    return m - nb
