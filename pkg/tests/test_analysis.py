import itertools
import random
import re
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from henkin.analysis import (BASE_FAIL, ClopenSet, box_meet, box_measure, check_gamma,
                             check_trace, clopen_decomposition, en_partition, en_related,
                             en_signature, evaluate_at, factor_measure, gamma_instantiate,
                             make_term, measure, nondegenerate, normalize, parse_terms,
                             pure_equality_rank, similar, similarity_threshold,
                             splitting_chain_search, splits_by, sprk, truncation_total)
from henkin.commitments import negate_text
from henkin.errors import (FormulaNeverScheduled, MissingInterpretation, SearchSpaceExceeded,
                           Undecided)
from henkin.fmac import iter_liftings, restrict, standard
from henkin.logic.structure import FiniteStructure, Signature
from henkin.scheduler import ConstructionLog, materialize
from reference import GRAPH, grid_measure, naive_sprk, pure_set


# ---------------------------------------------------------------- similarity

def test_similarity_equality_passes(pure_log):
    rep = similarity_threshold(pure_log, "(= ?a ?b)")
    assert rep.ok and rep.verified_depth == pure_log.rounds
    assert rep.checked > 0


def test_similarity_edge_passes(graph_log):
    rep = similarity_threshold(graph_log, "(E ?w1 ?w2)")
    assert rep.ok and rep.verified_depth == 4
    neg = similarity_threshold(graph_log, "(not (E ?w1 ?w2))")
    assert neg.threshold == rep.threshold


def test_similarity_flipped_edge_gives_counterexample(graph_log):
    lg = graph_log
    last = len(lg.steps) - 1
    c = lg.commitments()[-1]
    # an edge between leaves that already split at level 3
    lit = next(t for t in sorted(c.conjuncts)
               if (m := re.fullmatch(r"\(E x:([01]{4}):0 x:([01]{4}):0\)", t))
               and m.group(1)[:3] != m.group(2)[:3])
    bad = ConstructionLog.parse(lg.text() + f"drop {last} {lit}\nadd {last} {negate_text(lit)}\n")
    rep = similarity_threshold(bad, "(E ?w1 ?w2)")
    assert not rep.ok
    stage, level, t1, v1, t2, v2 = rep.counterexample
    assert v1 != v2 and stage == 4
    assert splits_by(t1, level) and similar(t1, t2, level)
    assert any("counterexample" in l for l in rep.lines())


def test_similarity_unscheduled(pure_log):
    with pytest.raises(FormulaNeverScheduled):
        similarity_threshold(pure_log, "(exists ?u (exists ?v (exists ?z (= ?u ?v))))")


def test_similar_and_splits():
    assert splits_by(("00", "10"), 1) and not splits_by(("00", "01"), 1)
    assert similar(("00", "10"), ("01", "11"), 1)
    assert not similar(("00", "01"), ("00", "01"), 1)


# ---------------------------------------------------------------- clopen sets and measure

def test_measure_footnote_value():
    assert factor_measure(("01", 2)) == Fraction(1, 32)
    assert measure([(("01", 2),)]) == Fraction(1, 32)


def test_truncation_tends_to_one():
    assert truncation_total(1, 1) == Fraction(1, 2)
    assert truncation_total(2, 3) == Fraction(49, 64)
    full = [(("", i),) for i in range(10)]
    assert measure(full) == 1 - Fraction(1, 2 ** 10)


factor_st = st.tuples(st.text("01", max_size=3), st.integers(0, 2))


def boxes_st(k):
    return st.lists(st.tuples(*([factor_st] * k)), max_size=6)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 2).flatmap(lambda k: st.tuples(st.just(k), boxes_st(k), boxes_st(k))))
def test_measure_laws(kab):
    k, A, B = kab
    mA, mB = measure(A), measure(B)
    assert mA == grid_measure(A, k, 3, 3)
    nA = normalize(A)
    for b1, b2 in itertools.combinations(nA, 2):
        assert box_meet(b1, b2) is None
    meet = [m for a in A for b in B if (m := box_meet(a, b)) is not None]
    assert measure(A + B) + measure(meet) == mA + mB
    assert measure(meet) <= min(mA, mB)
    S = ClopenSet(k, A, 3)
    assert measure(S) + measure(S.complement()) == truncation_total(k, 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 2).flatmap(lambda k: st.tuples(boxes_st(k), st.lists(
    st.tuples(st.text("01", min_size=3, max_size=3), st.integers(0, 2)), min_size=k, max_size=k))))
def test_normalize_preserves_membership(bp):
    boxes, point = bp
    k = len(point)
    boxes = [b[:k] for b in boxes if len(b) >= k]
    S = ClopenSet(k, boxes, 3)
    assert S.contains(point) == S.normalized().contains(point)
    assert S.contains(point) != S.complement().contains(point)


def test_clopen_trivial_formula_is_full(pure_log):
    S = clopen_decomposition(pure_log, "(= ?w1 ?w1)", 4)
    assert measure(S) == truncation_total(1, 4)
    assert S.normalized().boxes == [(("", i),) for i in range(4)]


def test_clopen_inequality_matches_points(pure_log):
    S = clopen_decomposition(pure_log, "(not (= ?w1 ?w2))", 4)
    assert measure(S) == Fraction(3515, 4096)
    assert measure(S) + measure(S.complement()) == truncation_total(2, 4)
    rng = random.Random(0)
    for _ in range(60):
        pt = tuple(("".join(rng.choice("01") for _ in range(8)), rng.randrange(4)) for _ in range(2))
        assert evaluate_at(pure_log, "(not (= ?w1 ?w2))", 4, pt) == S.contains(pt)


def test_clopen_graph_nondegenerate_positive(graph_log):
    for phi in ("(E ?w1 ?w2)", "(not (E ?w1 ?w2))", "(not (= ?w1 ?w2))"):
        assert nondegenerate(graph_log, phi, 4)
        assert measure(clopen_decomposition(graph_log, phi, 4)) > 0
    assert not nondegenerate(graph_log, "(= ?w1 ?w2)", 4)


def test_clopen_undecided(graph_log):
    # edges are scheduled at round 3, so round 2 leaves them open
    with pytest.raises(Undecided):
        clopen_decomposition(graph_log, "(E ?w1 ?w2)", 2)


# ---------------------------------------------------------------- splitting rank

@pytest.mark.parametrize("m", range(2, 7))
def test_sprk_pure_closed_form(m):
    M = pure_set(m)
    for nb in range(1, m):
        res = sprk(M, M.elements[:nb])
        assert res.value == pure_equality_rank(m, nb) == m - nb
        assert check_trace(M, res)


def test_sprk_pure_matches_naive_small():
    M = pure_set(4)
    assert naive_sprk(M, ["m0"]) == 3 == sprk(M, ["m0"]).value


def test_sprk_base_fail_and_errors():
    M = pure_set(4, core=["m3"])
    assert sprk(M, ["m3"]).value == BASE_FAIL
    # the core element is never a replacement
    assert sprk(M, ["m0"]).value == 2
    with pytest.raises(ValueError):
        sprk(M, [])
    with pytest.raises(ValueError):
        sprk(M, ["m0", "m0"])


def graph_from(n, edges):
    return FiniteStructure(GRAPH, [f"m{i}" for i in range(n)],
                           {"R": {(f"m{a}", f"m{b}") for a, b in edges}})


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(
    st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))),
    st.sets(st.integers(0, n - 1), max_size=1), st.integers(1, 2))))
def test_sprk_matches_naive_recursion(args):
    n, edges, core, nb = args
    M = graph_from(n, edges)
    M.aclcore = {f"m{i}" for i in core}
    for B in itertools.combinations(M.elements, min(nb, n)):
        res = sprk(M, B)
        assert res.value == naive_sprk(M, B)
        assert check_trace(M, res)


def test_sprk_grows_with_materialize_depth(graph_log):
    ranks = []
    for d in range(1, 5):
        n = graph_log.round_end(d)
        q = materialize(graph_log, n, ["0" * d])
        M = q.structure
        b = q.cls[next(s for s in q.cls if str(s) == f"x:{'0' * d}:0")]
        ranks.append(sprk(M, [b]).value)
    assert ranks == sorted(ranks)


# ---------------------------------------------------------------- two-cardinal

PARITY = FiniteStructure(Signature({}, {"f": 1}), [str(i) for i in range(6)],
                         functions={"f": {(str(i),): str(i % 2) for i in range(6)}}, usort={"0", "1"})


def test_parity_example():
    p = en_partition(PARITY, [make_term("(f ?w1)")], 1)
    assert p.count == 2 and p.within_bound
    assert [set(map(lambda t: t[0], c)) for c in p.classes] == [{"0", "2", "4"}, {"1", "3", "5"}]
    assert en_partition(PARITY, [], 1).count == 1
    with pytest.raises(MissingInterpretation):
        en_partition(PARITY, [make_term("(g ?w1)")], 1)
    with pytest.raises(ValueError):
        make_term("c")


def random_fstructure(rng, n, ar):
    elems = [f"e{i}" for i in range(n)]
    U = set(rng.sample(elems, rng.randint(0, n)))
    table = {args: rng.choice(elems) for args in itertools.product(elems, repeat=ar)}
    return FiniteStructure(Signature({}, {"f": ar}), elems, functions={"f": table}, usort=U)


@settings(max_examples=50, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(2, 5), st.integers(1, 2), st.integers(1, 2))
def test_en_is_equivalence(rng, n, ar, k):
    M = random_fstructure(rng, n, ar)
    terms = [make_term("(f " + " ".join(f"?w{i + 1}" for i in range(ar)) + ")")]
    tups = list(itertools.permutations(M.elements, k))
    rel = {(c, d): en_related(M, terms, c, d) for c in tups for d in tups}
    for c in tups:
        assert rel[(c, c)]
    for c, d in itertools.product(tups, repeat=2):
        assert rel[(c, d)] == rel[(d, c)]
        assert rel[(c, d)] == (en_signature(M, terms, c) == en_signature(M, terms, d))
    for c, d, e in itertools.product(tups, repeat=3):
        if rel[(c, d)] and rel[(d, e)]:
            assert rel[(c, e)]
    assert en_partition(M, terms, k).within_bound


def gamma_count_oracle(arity, m):
    # ¬U per node, ≠ per pair, one implication per ordered pair similar at some ℓ
    nodes = ["".join(p) for p in itertools.product("01", repeat=m)]
    tups = list(itertools.permutations(nodes, arity))
    pairs = set()
    for level in range(m + 1):
        for t1, t2 in itertools.permutations(tups, 2):
            r1 = [a[:level] for a in t1]
            if len(set(r1)) == len(r1) and r1 == [b[:level] for b in t2]:
                pairs.add((t1, t2))
    return len(nodes) + len(nodes) * (len(nodes) - 1) // 2 + len(pairs)


def test_gamma_counts():
    f, g = parse_terms("(f ?w1)"), parse_terms("(g ?w1 ?w2)")
    assert gamma_instantiate(f, 0) == ["(not (U x:ε))"]
    assert [len(gamma_instantiate(f, m)) for m in range(3)] == [1, 5, 22]
    assert [len(gamma_instantiate(g, m)) for m in range(3)] == [1, 3, 34]
    for m in range(4):
        assert len(gamma_instantiate(f, m)) == gamma_count_oracle(1, m)
    for m in range(3):
        assert len(gamma_instantiate(g, m)) == gamma_count_oracle(2, m)


def test_gamma_rejects_repeated_elements():
    terms = parse_terms("(f ?w1)")
    assert check_gamma(PARITY, terms, 1, {"0": "2", "1": "2"})
    assert not check_gamma(PARITY, terms, 1, {"0": "2", "1": "4"})


def test_chain_search_examples():
    res = splitting_chain_search(PARITY, parse_terms("(f ?w1)"), 1)
    a = res.assignment
    assert int(a["0"]) % 2 == int(a["1"]) % 2
    big = FiniteStructure(Signature(), [str(i) for i in range(8)], usort={"0", "1"})
    res = splitting_chain_search(big, [], 1)
    assert res.assignment and not set(res.assignment.values()) & {"0", "1"}
    with pytest.raises(SearchSpaceExceeded):
        splitting_chain_search(big, [], 3, bound=3)


@settings(max_examples=80, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(3, 7), st.integers(1, 2), st.integers(1, 2))
def test_chain_search_output_passes_gamma(rng, n, ar, m):
    M = random_fstructure(rng, n, ar)
    terms = [make_term("(f " + " ".join(f"?w{i + 1}" for i in range(ar)) + ")")]
    res = splitting_chain_search(M, terms, m)
    if res.assignment is None:
        return
    assert check_gamma(M, terms, m, res.assignment) == []
    # restricting along any lifting from a smaller tree keeps Γ true
    for h in iter_liftings(standard(m - 1), standard(m)):
        sub = {a: res.assignment[h(a)] for a in standard(m - 1).nodes}
        assert check_gamma(M, terms, m - 1, sub) == []
