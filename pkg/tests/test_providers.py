import itertools

import pytest

from henkin.commitments import extends, negate_text
from henkin.errors import OmitSearchExhausted, ProviderFailure
from henkin.oracles import make_oracle
from henkin.providers import (PregeometryProvider, _wrap, make_provider, p_atomize, p_complete,
                              p_henkin, p_omit, p_split)


def grown(name, splits=("",), seed=0):
    prov = make_provider(name, seed)
    c = prov.root().freeze()
    for a in splits:
        c = p_split(prov, c, a)
    return prov, c


def test_complete_examples():
    prov, c = grown("pure-set")
    neq = next(t for t in c.conjuncts if "x:0:0" in t and "x:1:0" in t)
    assert p_complete(prov, c, neq) == c
    out = p_complete(prov, c, "(= x:0:0 x:1:0)")
    assert out == c and out.decides("(= x:0:0 x:1:0)") is False

    prov, c = grown("random-graph", seed=4)
    out = p_complete(prov, c, "(E x:0:0 x:1:0)")
    assert extends(c, out)
    truth = c.oracle.fact("E", (c.assignment["x:0:0"], c.assignment["x:1:0"]))
    assert out.decides("(E x:0:0 x:1:0)") is truth


def test_henkin_no_solution():
    prov, c = grown("pure-set")
    d_out = _wrap(c, lambda d: prov.henkin(d, "(and (= ?w1 ?w2) (not (= ?w1 ?w2)))", ("x:0:0",)))
    out, (z, text) = d_out
    assert z is None and text.startswith("(not (exists")
    assert text in out.conjuncts and extends(c, out)


def test_henkin_fresh_symbol_in_support():
    prov, c = grown("pure-set")
    out, (z, text) = _wrap(c, lambda d: prov.henkin(d, "(not (= ?w1 ?w2))", ("x:0:0",)))
    # x:1:0 is outside Z_{0}; the witness must be a new x at node 0
    assert z == "x:0:1"
    assert out.assignment[z] not in set(c.assignment.values())
    assert extends(c, out)


# no solution in the span of the parameter, so the witness is a new independent x
INDEP = "(and (not (= ?w1 0)) (not (= ?w1 ?w2)))"


def test_henkin_vector_closure_case():
    prov, c = grown("vector-f2", splits=())
    out, (x1, _) = _wrap(c, lambda d: prov.henkin(d, INDEP, ("x:ε:0",)))
    assert x1 == "x:ε:1"
    out2, (y, text) = _wrap(out, lambda d: prov.henkin(d, "(= ?w1 (+ ?w2 ?w3))", ("x:ε:0", "x:ε:1")))
    assert y.startswith("y:ε:")
    assert out2.isolators[y] in out2.conjuncts
    ok, _ = out2.oracle.cl_query(out2.assignment[y], [out2.assignment["x:ε:0"], out2.assignment["x:ε:1"]])
    assert ok


def test_split_keeps_edges_on_both_copies():
    prov, c = grown("random-graph", seed=0)
    c = p_complete(prov, c, "(E x:0:0 x:1:0)")
    edge = c.decides("(E x:0:0 x:1:0)")
    out = p_split(prov, c, "0")
    a0, a1, b = (out.assignment[s] for s in ("x:00:0", "x:01:0", "x:1:0"))
    assert a0 != a1
    assert out.oracle.fact("E", (a0, b)) is edge and out.oracle.fact("E", (a1, b)) is edge
    assert extends(c, out)


def test_split_vector_rederives_y_block():
    prov, c = grown("vector-f2")
    c, _ = _wrap(c, lambda d: prov.henkin(d, INDEP, ("x:0:0",)))
    c, (y, _) = _wrap(c, lambda d: prov.henkin(d, "(= ?w1 (+ ?w2 ?w3))", ("x:0:0", "x:0:1")))
    out = p_split(prov, c, "0")
    o = out.oracle
    for side in ("00", "01"):
        ys = [s for s in out.assignment if s.startswith(f"y:{side}:")]
        xs = [out.assignment[s] for s in out.assignment if s.startswith(f"x:{side}:")]
        assert ys
        for s in ys:
            assert o.cl_query(out.assignment[s], xs)[0]
            assert out.isolators[s] in out.conjuncts
    xs = [out.assignment[s] for s in out.assignment if s.startswith("x:")]
    assert o.independent(xs)


def test_omit_examples():
    prov, c = grown("unary-generic", splits=())
    delta = lambda j: f"(P{j} ?w1)"
    out = p_omit(prov, c, ("x:ε:0",), delta)
    assert "(not (P0 x:ε:0))" in out.conjuncts
    # δ_0 already refuted: nothing new
    assert p_omit(prov, out, ("x:ε:0",), delta) == out
    with pytest.raises(OmitSearchExhausted):
        p_omit(prov, c, ("x:ε:0",), lambda j: "(= ?w1 ?w1)", bound=5)


def test_atomize_examples():
    prov, c = grown("pure-set", splits=("", "0"))
    syms = ("x:00:0", "x:01:0", "x:1:0")
    out = p_atomize(prov, c, syms)
    for a, b in itertools.combinations(syms, 2):
        assert out.decides(f"(= {a} {b})") is False

    prov, c = grown("random-graph", seed=2)
    out = p_atomize(prov, c, ("x:0:0", "x:1:0"))
    assert out.decides("(E x:0:0 x:1:0)") is not None
    assert out.decides("(E x:0:0 x:0:0)") is False

    prov, c = grown("vector-f2", splits=())
    out = p_atomize(prov, c, ("x:ε:0", "x:ε:0"))
    assert out.decides("(= x:ε:0 0)") is False

    prov, c = grown("unary-generic", splits=())
    with pytest.raises(ProviderFailure):
        p_atomize(prov, c, ("x:ε:0",))


def test_dcl_trivial_symbols_pairwise_distinct():
    prov, c = grown("random-graph", splits=("", "0", "1", "00"), seed=7)
    vals = list(c.assignment.values())
    assert len(set(vals)) == len(vals)
    assert not any(s.startswith("y:") for s in c.assignment)


def test_pregeometry_needs_vector_oracle():
    with pytest.raises(ProviderFailure):
        PregeometryProvider(make_oracle("pure-set"))
