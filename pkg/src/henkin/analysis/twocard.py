"""Two-cardinal combinatorics at finite scale: the E_n relation on tuples of
distinct elements, the finite instantiation Γ_𝒯(X_{2^m}), and a brute-force
search along the canonical splitting chain from {ε} to 2^m."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from ..commitments import neq_text
from ..errors import MissingInterpretation, SearchSpaceExceeded
from ..fmac import factor_cover, show_node, standard
from ..logic.parser import parse_formula, parse_term
from ..logic.structure import FiniteStructure, Signature, eval_term, evaluate
from ..logic.syntax import Fn, Var, XSym, map_term, term_leaves
from .similarity import similar


# ---------------------------------------------------------------- term families

@dataclass(frozen=True)
class Term:
    text: str
    term: object
    params: tuple      # placeholder variables in slot order

    @property
    def arity(self) -> int:
        return len(self.params)


def _natural(v: Var):
    m = re.fullmatch(r"([A-Za-z_]*)(\d*)", v.name)
    return (m.group(1), int(m.group(2)) if m.group(2) else -1, v.name)


def make_term(text: str) -> Term:
    t = parse_term(text)
    params = tuple(sorted({x for x in term_leaves(t) if isinstance(x, Var)}, key=_natural))
    if not params:
        raise ValueError(f"term {text!r} has no placeholders; arities must be >= 1")
    return Term(text, t, params)


def parse_terms(text: str) -> list[Term]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(make_term(line))
    return out


def load_terms(path) -> list[Term]:
    with open(path) as fh:
        return parse_terms(fh.read())


def apply_term(M, tau: Term, args) -> str:
    return eval_term(M, tau.term, dict(zip(tau.params, args)))


def _check_interpreted(M, terms):
    for tau in terms:
        for leaf in _fn_names(tau.term):
            if leaf not in M.functions:
                raise MissingInterpretation(f"{leaf} is not interpreted in the structure")


def _fn_names(t):
    if isinstance(t, Fn):
        yield t.name
        for a in t.args:
            yield from _fn_names(a)


# ---------------------------------------------------------------- E_n

def selections(n: int, k: int):
    """Position tuples of k distinct coordinates out of n, in every order."""
    return itertools.permutations(range(n), k)


def en_signature(M, terms, tup) -> tuple:
    """Per (τ, positions): τ's value if it lies in U, else None.
    Two tuples are E_n-related exactly when these agree."""
    out = []
    for tau in terms:
        for pos in selections(len(tup), tau.arity):
            v = apply_term(M, tau, [tup[p] for p in pos])
            out.append(v if v in M.usort else None)
    return tuple(out)


def en_related(M, terms, c, d) -> bool:
    """The defining condition, checked literally on one pair."""
    if len(c) != len(d):
        raise ValueError("tuples of different length")
    for tau in terms:
        for pos in selections(len(c), tau.arity):
            vc = apply_term(M, tau, [c[p] for p in pos])
            vd = apply_term(M, tau, [d[p] for p in pos])
            if not ((vc not in M.usort and vd not in M.usort) or vc == vd):
                return False
    return True


def slot_count(terms, n: int) -> int:
    total = 0
    for tau in terms:
        total += len(list(selections(n, tau.arity)))
    return total


def class_bound(M, terms, n: int) -> int:
    return (len(M.usort) + 1) ** slot_count(terms, n)


@dataclass
class ENPartition:
    n: int
    classes: list
    bound: int

    @property
    def count(self) -> int:
        return len(self.classes)

    @property
    def within_bound(self) -> bool:
        return self.count <= self.bound

    def lines(self) -> list[str]:
        out = [f"n {self.n}", f"classes {self.count}", f"bound {self.bound}",
               f"within-bound {'yes' if self.within_bound else 'no'}"]
        for i, cl in enumerate(self.classes):
            shown = " ".join("(" + ",".join(t) + ")" for t in cl[:8])
            more = f" ... {len(cl) - 8} more" if len(cl) > 8 else ""
            out.append(f"class {i} size {len(cl)}: {shown}{more}")
        return out


def en_partition(M, terms, n: int) -> ENPartition:
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_interpreted(M, terms)
    groups = {}
    for tup in itertools.permutations(M.elements, n):
        groups.setdefault(en_signature(M, terms, tup), []).append(tup)
    classes = sorted(groups.values(), key=lambda cl: cl[0])
    return ENPartition(n, classes, class_bound(M, terms, n))


# ---------------------------------------------------------------- Γ_𝒯(X_{2^m})

def _x(node) -> XSym:
    return XSym(node, None)


def _inst(tau: Term, nodes):
    env = {p: _x(a) for p, a in zip(tau.params, nodes)}
    return map_term(tau.term, lambda leaf: env.get(leaf, leaf))


def gamma_instantiate(terms, m: int) -> list[str]:
    """¬U(x_a) and x_a ≠ x_b over 2^m, then U(τ(x̄)) → τ(x̄) = τ(x̄') for
    every τ and every ordered pair of distinct ℓ-similar tuples, ℓ ≤ m."""
    nodes = standard(m).nodes
    out = {}
    for a in nodes:
        out[f"(not (U {_x(a)}))"] = None
    for a, b in itertools.combinations(nodes, 2):
        out[neq_text(str(_x(a)), str(_x(b)))] = None
    for tau in terms:
        tups = list(itertools.permutations(nodes, tau.arity))
        for level in range(m + 1):
            for t1 in tups:
                lhs = _inst(tau, t1)
                for t2 in tups:
                    if t1 != t2 and similar(t1, t2, level):
                        rhs = _inst(tau, t2)
                        out[f"(-> (U {lhs}) (= {lhs} {rhs}))"] = None
    return list(out)


def with_u(M) -> FiniteStructure:
    """M with its U-sort exposed as a unary relation U."""
    if "U" in M.sig.relations:
        return M
    sig = Signature({**M.sig.relations, "U": 1}, dict(M.sig.functions))
    rels = {r: set(f) for r, f in M.relations.items()}
    rels["U"] = {(u,) for u in M.usort}
    return FiniteStructure(sig, M.elements, rels, M.functions, M.aclcore, M.usort)


def check_gamma(M, terms, m: int, assignment: dict) -> list[str]:
    """Formulas of Γ_𝒯(X_{2^m}) that fail under node -> element."""
    MU = with_u(M)
    asg = {_x(a): e for a, e in assignment.items()}
    missing = [show_node(a) for a in standard(m).nodes if a not in assignment]
    if missing:
        raise ValueError(f"assignment misses nodes {missing}")
    return [g for g in gamma_instantiate(terms, m) if not evaluate(MU, parse_formula(g), asg)]


# ---------------------------------------------------------------- splitting-chain search

@dataclass
class ChainSearch:
    assignment: dict | None
    visited: int
    chain: list = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"visited {self.visited}"]
        if self.assignment is None:
            out.append("result none")
        else:
            out.append("result found")
            for a in sorted(self.assignment, key=lambda a: (len(a), a)):
                out.append(f"c {show_node(a)} {self.assignment[a]}")
        return out


def splitting_chain_search(M, terms, m: int, bound: int = 200_000) -> ChainSearch:
    """Elements c_a (a ∈ 2^m) built along the lexicographic splitting chain
    {ε} → ... → 2^m.  Splitting a keeps c_a on a0 and puts a new element c*
    on a1; each step needs E_n(c̄, c̄*) where c̄* replaces c_a by c*.
    All elements lie outside U and are distinct."""
    _check_interpreted(M, terms)
    chain = factor_cover(standard(0), standard(m))
    pool = [e for e in M.elements if e not in M.usort]
    visited = 0

    def dfs(step, asg):
        nonlocal visited
        visited += 1
        if visited > bound:
            raise SearchSpaceExceeded(bound)
        if step == len(chain):
            return asg
        node = chain[step].node
        before = sorted(asg)
        cbar = tuple(asg[a] for a in before)
        j = before.index(node)
        used = set(cbar)
        for e in pool:
            if e in used:
                continue
            star = cbar[:j] + (e,) + cbar[j + 1:]
            if not en_related(M, terms, cbar, star):
                continue
            nxt = {a: v for a, v in asg.items() if a != node}
            nxt[node + "0"] = asg[node]
            nxt[node + "1"] = e
            found = dfs(step + 1, nxt)
            if found is not None:
                return found
        return None

    for e in pool:
        found = dfs(0, {"": e})
        if found is not None:
            return ChainSearch(found, visited, chain)
    return ChainSearch(None, visited, chain)
