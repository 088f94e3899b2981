import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from henkin.errors import (FmacError, NodeNotInFmac, NotACover, NotAntichain, NotMaximal,
                           PrefixTooShort)
from henkin.fmac import (Fmac, comparable, count_liftings, covers, factor_cover, identity,
                         iter_liftings, kraft_sum, parse_fmac, parse_lifting, parse_node,
                         project, show_node, split_at, standard, validate_fmac)


def brute_is_fmac(nodes):
    # oracle: antichain check over all pairs, maximality by covering every depth-d string
    nodes = set(nodes)
    if not nodes:
        return False
    for a, b in itertools.permutations(nodes, 2):
        if b.startswith(a):
            return False
    d = max(len(a) for a in nodes)
    return all(any(s.startswith(a) for a in nodes)
               for s in ("".join(p) for p in itertools.product("01", repeat=d)))


nodes_st = st.lists(st.text(alphabet="01", max_size=4), min_size=1, max_size=6)


def random_fmac(draw_bits, depth=6):
    # grow an fmac by random splits
    A = Fmac(("",))
    for bit in draw_bits:
        cands = [a for a in A.nodes if len(a) < depth]
        if not cands:
            break
        A = split_at(A, cands[bit % len(cands)])[0]
    return A


fmac_st = st.lists(st.integers(0, 1000), max_size=12).map(random_fmac)


def test_examples():
    assert validate_fmac(["0", "10", "11"]).nodes == ("0", "10", "11")
    with pytest.raises(NotAntichain):
        validate_fmac(["0", "01", "1"])
    with pytest.raises(NotMaximal) as e:
        validate_fmac(["0", "10"])
    assert "3/4" in str(e.value)
    with pytest.raises(FmacError):
        validate_fmac([])
    assert str(standard(0)) == "ε"
    assert parse_node("ε") == "" and show_node("") == "ε"


def test_kraft_sum_exact():
    assert kraft_sum(["0", "10", "110"]) == Fraction(7, 8)


@given(nodes_st)
def test_validate_matches_brute_force(nodes):
    try:
        validate_fmac(nodes)
        ok = True
    except FmacError:
        ok = False
    assert ok == brute_is_fmac(nodes)


@given(fmac_st, st.integers(0, 100))
def test_split_preserves_validity(A, i):
    a = A.nodes[i % len(A)]
    B, h0, h1 = split_at(A, a)
    validate_fmac(B.nodes)
    assert covers(A, B)
    assert h0(a) == a + "0" and h1(a) == a + "1"
    h0.check()
    h1.check()
    assert len(B) == len(A) + 1


@given(fmac_st, fmac_st)
def test_factor_cover_replays(A, B):
    # make a cover of A by merging B into it
    C = A
    for st_ in factor_cover(standard(0), B):
        pass
    target = Fmac(tuple(n for n in set(A.nodes) | set(B.nodes)
                        if not any(m != n and m.startswith(n) for m in set(A.nodes) | set(B.nodes))))
    if kraft_sum(target.nodes) != 1:
        return
    chain = factor_cover(A, target)
    for step in chain:
        C = split_at(C, step.node)[0]
        assert C == step.fmac
    assert C == target
    assert len(chain) == len(target) - len(A)


@given(fmac_st, fmac_st)
def test_lifting_count_is_product(A, B):
    if not covers(A, B):
        with pytest.raises(NotACover):
            count_liftings(A, B)
        return
    expected = 1
    for a in A.nodes:
        expected *= sum(1 for b in B.nodes if b.startswith(a))
    hs = list(iter_liftings(A, B))
    assert count_liftings(A, B) == expected == len(hs)
    assert len({str(h) for h in hs}) == len(hs)
    for h in hs:
        h.check()


@given(fmac_st, st.text(alphabet="01", min_size=6, max_size=8))
def test_project_is_unique_node_below(A, prefix):
    a = project(A, prefix)
    assert prefix.startswith(a)
    assert sum(1 for b in A.nodes if prefix.startswith(b)) == 1


def test_project_errors():
    with pytest.raises(PrefixTooShort):
        project(parse_fmac("0,10,11"), "1")


def test_lifting_roundtrip_and_compose():
    A, B = parse_fmac("0,1"), parse_fmac("00,01,1")
    h = parse_lifting("0->01,1->1", A, B)
    assert str(h) == "0->01,1->1"
    C = parse_fmac("00,010,011,1")
    g = parse_lifting("00->00,01->011,1->1", B, C)
    assert str(h.compose(g)) == "0->011,1->1"
    assert str(identity(A)) == "0->0,1->1"
    with pytest.raises(NodeNotInFmac):
        h("11")
    with pytest.raises(NodeNotInFmac):
        split_at(A, "00")


def test_standard_factor_chain_is_lexicographic():
    chain = factor_cover(standard(0), standard(2))
    assert [s.node for s in chain] == ["", "0", "1"]
