import itertools

import pytest
from hypothesis import given, settings, strategies as st

from formulas import formulas
from henkin.errors import AllSolutionsClosed, NoSolution, UnsupportedSignature
from henkin.logic.parser import parse_formula
from henkin.logic.syntax import Var, show
from henkin.oracles import AgeSpec, FraisseOracle, VectorF2Oracle, make_oracle, span

P = parse_formula
V = lambda *names: {Var(n): e for n, e in names}


def test_graph_extension_axiom():
    o = make_oracle("random-graph")
    a, b = o.new_element(), o.new_element()
    f = P("(exists ?u (and (E ?u ?a) (and (not (E ?u ?b)) (and (not (= ?u ?a)) (not (= ?u ?b))))))")
    assert o.eval(f, V(("a", a), ("b", b)))


def test_pure_set_is_infinite():
    o = make_oracle("pure-set")
    assert o.eval(P("(exists ?w1 (exists ?w2 (not (= ?w1 ?w2))))"))
    assert not o.eval(P("(exists ?w1 (forall ?w2 (= ?w1 ?w2)))"))


def test_vector_difference():
    o = make_oracle("vector-f2")
    a, b = o.fresh(), o.fresh()
    f = P("(exists ?w (and (not (= ?w 0)) (= (+ ?w ?a) ?b)))")
    assert o.eval(f, V(("a", a), ("b", b)))
    assert not o.eval(f, V(("a", a), ("b", a)))


def test_relations_rejected_by_vector_oracle():
    o = make_oracle("vector-f2")
    a = o.fresh()
    with pytest.raises(UnsupportedSignature):
        o.eval(P("(E ?a ?a)"), V(("a", a)))
    with pytest.raises(ValueError):
        make_oracle("nope")


def test_witness_examples():
    o = make_oracle("pure-set")
    a, b, c = (o.new_element() for _ in range(3))
    d = o.witness(P("(and (not (= ?w ?a)) (not (= ?w ?b)))"), Var("w"), V(("a", a), ("b", b)), {a, b, c})
    assert d not in {a, b, c} and o.last_reason == "fresh"

    g = make_oracle("random-graph")
    a = g.new_element()
    n = g.witness(P("(E ?w ?a)"), Var("w"), V(("a", a)), set(g.elements))
    assert n not in {a} and g.fact("E", (n, a))

    v = make_oracle("vector-f2")
    a, b = v.fresh(), v.fresh()
    ab = v.name_of(v.vec[a] ^ v.vec[b])
    assert v.witness(P("(= ?w (+ ?a ?b))"), Var("w"), V(("a", a), ("b", b)), {ab}) is None
    assert v.last_reason == "unique solution"
    with pytest.raises(NoSolution):
        v.witness(P("(and (= ?w ?a) (not (= ?w ?a)))"), Var("w"), V(("a", a)))


def test_cl_query_examples():
    o = make_oracle("vector-f2")
    b1, b2 = o.fresh(), o.fresh()
    c = o.name_of(o.vec[b1] ^ o.vec[b2])
    ok, delta = o.cl_query(c, [b1, b2])
    assert ok and show(delta) == "(= ?w (+ ?p0 ?p1))"
    assert o.cl_query(o.fresh(), [b1]) == (False, None)
    ok, delta = o.cl_query(o.name_of(0), [])
    assert ok and show(delta) == "(= ?w 0)"


def test_independent_witness_examples():
    o = make_oracle("vector-f2")
    a = o.fresh()
    c = o.independent_witness(P("(not (= ?w 0))"), Var("w"), {}, E=[a])
    assert o.independent([a, c])
    c2 = o.independent_witness(P("(not (= (+ ?w ?a) 0))"), Var("w"), V(("a", a)))
    assert o.independent([a, c, c2])
    with pytest.raises(AllSolutionsClosed):
        o.independent_witness(P("(= ?w ?a)"), Var("w"), V(("a", a)))


GRAPH_F = formulas(6, (("E", 2),))
VEC_F = formulas(6, (), True)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.booleans(), min_size=6, max_size=6), GRAPH_F)
def test_graph_homogeneity(bits, f):
    # two disjoint pairs realizing the same qf type agree on every formula
    o = FraisseOracle(AgeSpec({"E": 2}, frozenset({"E"}), frozenset({"E"})))
    a, b, c, d = (o.new_element() for _ in range(4))
    o.set_fact("E", (a, b), bits[0])
    o.set_fact("E", (c, d), bits[0])
    o.set_fact("E", (a, c), bits[1])
    o.set_fact("E", (b, d), bits[2])
    env1, env2 = V(("w1", a), ("w2", b)), V(("w1", c), ("w2", d))
    assert o.eval(f, env1) == o.eval(f, env2)
    # equal elements: (a, a) versus (c, c)
    assert o.eval(f, V(("w1", a), ("w2", a))) == o.eval(f, V(("w1", d), ("w2", d)))


@settings(max_examples=60, deadline=None)
@given(VEC_F)
def test_vector_homogeneity(f):
    # pairs with the same dependence pattern agree
    o = VectorF2Oracle()
    base = [o.fresh() for _ in range(4)]
    a, b = base[0], base[1]
    c, d = base[2], base[3]
    assert o.eval(f, V(("w1", a), ("w2", b))) == o.eval(f, V(("w1", c), ("w2", d)))
    x = o.name_of(o.vec[a] ^ o.vec[b])
    y = o.name_of(o.vec[c] ^ o.vec[d])
    assert o.eval(f, V(("w1", a), ("w2", x))) == o.eval(f, V(("w1", c), ("w2", y)))


@settings(max_examples=40, deadline=None)
@given(GRAPH_F, st.integers(1, 5))
def test_persistence(f, grow):
    o = make_oracle("random-graph", seed=3)
    a, b = o.new_element(), o.new_element()
    env = V(("w1", a), ("w2", b))
    before = o.eval(f, env)
    for _ in range(grow):
        o.new_element()
    o.cache.clear()
    assert o.eval(f, env) == before


def test_journal_replay():
    o = make_oracle("random-graph", seed=5)
    for _ in range(4):
        o.new_element()
    o.set_fact("E", ("e0", "e1"), True)
    r = make_oracle("random-graph", seed=5)
    for line in o.drain():
        r.replay(line)
    for t in itertools.product(o.elements, repeat=2):
        assert r.fact("E", t) == o.fact("E", t)
    with pytest.raises(ValueError):
        r.replay("elem e9")


def test_vector_exchange_exhaustive():
    # all B of up to three named vectors among small span, all a, c
    o = VectorF2Oracle()
    basis = [o.fresh() for _ in range(3)]
    names = [o.name_of(v) for v in span([o.vec[b] for b in basis])]
    checked = 0
    for r in range(0, 3):
        for B in itertools.combinations(names, r):
            for a, c in itertools.permutations(names, 2):
                if o.cl_query(a, list(B) + [c])[0] and not o.cl_query(a, B)[0]:
                    checked += 1
                    assert o.cl_query(c, list(B) + [a])[0]
    assert checked > 0


def test_isolator_defines_member():
    o = VectorF2Oracle()
    bs = [o.fresh() for _ in range(3)]
    c = o.name_of(o.vec[bs[0]] ^ o.vec[bs[2]])
    ok, delta = o.cl_query(c, bs)
    env = {Var("w"): c, **{Var(f"p{j}"): b for j, b in enumerate(bs)}}
    assert ok and o.eval(delta, env)
