import itertools

import pytest
from hypothesis import given, settings, strategies as st

from henkin.commitments import (Commitment, extends, extension_failure, make_commitment,
                                support, w_window, x_text, y_text)
from henkin.errors import CertificateFails, DegenerateXAssignment, SymbolOutsideFmac
from henkin.fmac import iter_liftings, standard
from henkin.logic.syntax import lift_sym_text
from henkin.oracles import make_oracle
from henkin.providers import make_provider, p_complete, p_split


def root(name="pure-set", seed=0):
    prov = make_provider(name, seed)
    return prov, prov.root().freeze()


def test_root_commitment():
    o = make_oracle("pure-set")
    c = make_commitment(standard(0), [], o, {x_text("", 0): o.new_element()})
    assert c.conjuncts == frozenset()


def test_degenerate_assignment():
    o = make_oracle("pure-set")
    e = o.new_element()
    with pytest.raises(DegenerateXAssignment):
        make_commitment(standard(1), [], o, {x_text("0", 0): e, x_text("1", 0): e})


def test_edge_commitment_and_failure():
    o = make_oracle("random-graph")
    a, b = o.new_element(), o.new_element()
    o.set_fact("E", (a, b), True)
    asg = {x_text("0", 0): a, x_text("1", 0): b}
    c = make_commitment(standard(1), ["(E x:0:0 x:1:0)"], o, asg)
    assert "(not (= x:0:0 x:1:0))" in c.conjuncts
    o.set_fact("E", (a, b), False)
    with pytest.raises(CertificateFails):
        make_commitment(standard(1), ["(E x:0:0 x:1:0)"], o, asg)


def test_support_examples():
    assert support(["x:01:1", "y:01+10:0"]) == {"01", "10"}
    assert support(["x:01:0"]) == {"01"}
    assert support(["y:0:0", "y:10+11:2"]) == {"0", "10", "11"}
    with pytest.raises(SymbolOutsideFmac):
        support(["x:00:0"], standard(1))


@given(st.lists(st.sampled_from(["x:0:0", "x:10:1", "y:0+11:0", "y:10:2", "x:11"]), min_size=1), st.sampled_from(["x:0:1", "y:10+11:0"]))
def test_support_monotone(syms, extra):
    assert support(syms) <= support(syms + [extra])


def test_w_window():
    assert w_window(0) == []
    w1 = w_window(1)
    assert len(w1) == 5
    assert sum(s.startswith("x:") for s in w1) == 2
    # lifted W_l lands inside W_m
    for l, m in [(1, 2), (1, 3), (2, 3)]:
        big = set(w_window(m))
        for h in iter_liftings(standard(l), standard(m)):
            mp = h.mapping
            for s in w_window(l):
                assert lift_sym_text(s, mp) in big


def test_extends_reflexive_split_and_missing():
    prov, c0 = root()
    assert extends(c0, c0)
    c1 = p_split(prov, c0, "")
    assert extends(c0, c1)
    c2 = p_split(prov, c1, "0")
    assert extends(c1, c2) and extends(c0, c2)
    # drop one image of c1's inequality under a lifting
    lifted = next(t for t in c2.conjuncts if "x:01:0" in t and "x:1:0" in t)
    broken = Commitment(c2.fmac, c2.conjuncts - {lifted}, c2.assignment, c2.oracle, c2.x_mode)
    h, what = extension_failure(c1, broken)
    assert what == lifted and h("0") == "01"
    assert not extends(c2, c1)


def test_serialization_revalidates():
    prov, c = root("random-graph", 2)
    c = p_split(prov, p_split(prov, c, ""), "1")
    text = c.dumps()
    assert text.splitlines()[2] == "fmac 0,10,11"
    lines = [l.split(" ", 1)[1] for l in text.splitlines() if l.startswith("add ")]
    binds = dict(l.split(" ")[1:] for l in text.splitlines() if l.startswith("bind "))
    again = make_commitment(c.fmac, lines, c.oracle, binds)
    assert again.conjuncts == c.conjuncts


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(0, 20), min_size=1, max_size=4))
def test_extends_transitive_along_splits(picks):
    prov, c = root("random-graph", 1)
    chain = [c]
    for p in picks:
        nodes = [a for a in chain[-1].fmac.nodes if len(a) < 3]
        if not nodes:
            break
        chain.append(p_split(prov, chain[-1], nodes[p % len(nodes)]))
    for i, j in itertools.combinations(range(len(chain)), 2):
        assert extends(chain[i], chain[j])
