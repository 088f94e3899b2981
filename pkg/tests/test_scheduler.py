import itertools

import pytest

from conftest import cached_run
from henkin.commitments import negate_text, x_text
from henkin.errors import LogFormatError, PrefixTooShort, ProviderFailure
from henkin.fmac import standard
from henkin.logic.syntax import parse_sym
from henkin.scheduler import (AUDIT_MODES, ConstructionLog, GoalConfig, audit, diagram,
                              materialize, run)


def with_records(lg, extra):
    """Log text with extra records appended (fault injection)."""
    return ConstructionLog.parse(lg.text() + "".join(l + "\n" for l in extra))


def test_pure_set_r3_reaches_full_tree():
    lg = cached_run("pure-set", rounds=3)
    c = lg.commitments()[-1]
    assert c.fmac == standard(3)
    for a, b in itertools.combinations(c.fmac.nodes, 2):
        assert c.decides(f"(= {x_text(a, 0)} {x_text(b, 0)})") is False


def test_single_round():
    lg = run("pure-set", GoalConfig(rounds=1))
    assert lg.commitments()[-1].fmac == standard(1)
    assert not [s for s in lg.steps if s.round == 0 and s.goal.startswith("complete")]
    assert lg.window(0) == []


def test_graph_witness_inside_support():
    lg = run("random-graph", GoalConfig(rounds=3, theta=["(E ?w1 ?w2)"]))
    entries = [w for w in lg.witnesses if w.zbar and w.zbar[0].endswith(":0")]
    assert entries
    for w in entries:
        assert w.zstar is not None
        assert parse_sym(w.zstar).support <= parse_sym(w.zbar[0]).support
    assert audit(lg, "henkin-locality").ok


def test_diagrams_lift_along_the_chain():
    lg = cached_run("pure-set", rounds=3)
    assert diagram(lg, 0) == set()
    from henkin.commitments import lift_conjuncts
    from henkin.fmac import iter_liftings
    cs = lg.commitments()
    for n in range(len(cs) - 1):
        d0, d1 = diagram(lg, n), diagram(lg, n + 1)
        for h in itertools.islice(iter_liftings(cs[n].fmac, cs[n + 1].fmac), 4):
            assert lift_conjuncts(d0, h) <= d1


def test_decided_formulas_have_one_polarity(pure_log):
    c = pure_log.commitments()[-1]
    for t in c.conjuncts:
        assert negate_text(t) not in c.conjuncts


def test_materialize_examples(pure_log):
    n = len(pure_log.steps) - 1
    q = materialize(pure_log, n, ["0000"])
    assert len(q.structure.elements) == len({q.cls[s] for s in q.cls})
    m = pure_log.round_end(2)
    small = materialize(pure_log, m, ["00"])
    big = materialize(pure_log, m, ["00", "01"])
    assert set(small.cls) <= set(big.cls)
    # distinct classes stay distinct in the bigger structure
    for a, b in itertools.combinations(small.cls, 2):
        if small.cls[a] != small.cls[b]:
            assert big.cls[a] != big.cls[b]
    with pytest.raises(ValueError):
        materialize(pure_log, n, [])
    with pytest.raises(PrefixTooShort):
        materialize(pure_log, n, ["0"])


@pytest.mark.parametrize("mode", AUDIT_MODES)
def test_all_audits_pass_pure_r4(pure_log, mode):
    r = audit(pure_log, mode)
    assert r.ok, r.lines()


def test_unknown_audit_mode(pure_log):
    with pytest.raises(ValueError):
        audit(pure_log, "nope")


def test_deleted_witness_conjunct_is_pinpointed(small_graph_log):
    lg = small_graph_log
    w = next(w for w in lg.witnesses if w.zstar and w.zbar and w.zstar not in w.zbar)
    bad = with_records(lg, [f"drop {w.step} {w.formula}"])
    r = audit(bad, "henkin-locality")
    assert not r.ok
    assert any(w.formula in f and "theta" in f for f in r.failures)


def test_flipped_literal_breaks_certificate(small_graph_log):
    lg = small_graph_log
    last = len(lg.steps) - 1
    lit = next(t for t in sorted(lg.commitments()[-1].conjuncts) if t.startswith("(E "))
    bad = with_records(lg, [f"drop {last} {lit}", f"add {last} {negate_text(lit)}"])
    assert not audit(bad, "certificate").ok
    assert audit(lg, "certificate").ok


def test_dropped_inequality_breaks_distinctness(pure_log):
    last = len(pure_log.steps) - 1
    c = pure_log.commitments()[-1]
    neq = next(t for t in sorted(c.conjuncts) if "x:0000:0" in t and "x:0001:0" in t)
    bad = with_records(pure_log, [f"drop {last} {neq}"])
    assert not audit(bad, "splitting-distinctness").ok


def test_determinism_and_roundtrip():
    a = run("random-graph", GoalConfig(rounds=3, seed=11)).text()
    b = run("random-graph", GoalConfig(rounds=3, seed=11)).text()
    c = run("random-graph", GoalConfig(rounds=3, seed=12)).text()
    assert a == b and a != c
    assert ConstructionLog.parse(a).text() == a


def test_replay_matches_run(small_graph_log):
    again = ConstructionLog.parse(small_graph_log.text())
    for c1, c2 in zip(small_graph_log.commitments(), again.commitments()):
        assert c1.conjuncts == c2.conjuncts and c1.assignment == c2.assignment


def test_log_format_errors():
    with pytest.raises(LogFormatError):
        ConstructionLog.parse("not a log\n")
    with pytest.raises(LogFormatError):
        ConstructionLog.parse("henkin-log 1\nprovider pure-set\nseed 0\nbogus 1\n")


def test_provider_failure_leaves_partial_log():
    with pytest.raises(ProviderFailure) as e:
        run("unary-generic", GoalConfig(rounds=2, atomic=True))
    part = ConstructionLog.parse(e.value.log.text())
    assert part.failure is not None and part.failure[1].startswith("atomize")


def test_rounds_must_be_positive():
    with pytest.raises(ValueError):
        GoalConfig(rounds=0)
