"""Command line entry point: ``henkin <command> ...``.

Exit codes: 0 success, 1 a check or audit failed (report printed),
2 usage, parse or IO errors.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import errors
from .fmac import (count_liftings, covers, factor_cover, iter_liftings, parse_fmac, parse_node,
                   project, show_node, split_at, validate_fmac)

DEFAULT_SEED = 0
SEED_ENV = "HENKIN_SEED"

log = logging.getLogger("henkin")


class Failed(Exception):
    """A check ran and failed; the report has been printed."""


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"henkin: {SEED_ENV} must be an integer, got {raw!r}") from None


def out(line=""):
    print(line)


def _existing(path):
    if not os.path.isfile(path):
        raise argparse.ArgumentTypeError(f"no such file: {path}")
    return path


def _nodes(text):
    return [parse_node(t) for t in text.split(",")] if text else []


# ---------------------------------------------------------------- construct / materialize / audit

def cmd_construct(a):
    from .scheduler import GoalConfig, load_omit, run
    omit = [load_omit(o) for o in a.omit]
    cfg = GoalConfig(rounds=a.rounds, seed=a.seed, quota=a.quota, free_vars=a.free_vars,
                     size=a.size, atomic=a.atomic, omit=omit, omit_bound=a.omit_bound,
                     y_span=None if a.y_span == 0 else a.y_span, family=a.family)
    log.info("construct %s rounds=%d seed=%d", a.provider, a.rounds, a.seed)
    try:
        lg = run(a.provider, cfg)
    except errors.ProviderFailure as e:
        partial = getattr(e, "log", None)
        if partial is not None and a.out:
            partial.write(a.out)
        out(f"failure step {e.step} goal {e.goal}: {e.reason}")
        raise Failed() from None
    if a.out:
        lg.write(a.out)
    else:
        sys.stdout.write(lg.text())
    c = lg.commitments()[-1]
    log.info("%d steps, %d conjuncts, %d symbols, fmac %s", len(lg.steps), len(c.conjuncts),
             len(c.assignment), c.fmac)
    if a.out:
        out(f"wrote {a.out}: {len(lg.steps)} steps, final fmac {c.fmac}")


def _load_log(path):
    from .scheduler import ConstructionLog
    return ConstructionLog.load(path)


def _stage_step(lg, a):
    if a.step is not None:
        return a.step
    return lg.round_end(a.stage if a.stage is not None else lg.rounds)


def cmd_materialize(a):
    from .scheduler import materialize
    lg = _load_log(a.log)
    n = _stage_step(lg, a)
    q = materialize(lg, n, _nodes(a.points))
    M = q.structure
    out(f"stage step {n} fmac {lg.commitment(n).fmac}")
    out(f"elements {len(M.elements)}")
    for e in M.elements:
        out(f"class {e}: " + " ".join(str(s) for s in q.members[e]))
    sys.stdout.write(M.dumps())
    if M.undecided:
        out(f"undecided {len(M.undecided)}")


def cmd_audit(a):
    from .scheduler import AUDIT_MODES, audit
    lg = _load_log(a.log)
    modes = AUDIT_MODES if a.mode == "all" else [a.mode]
    ok = True
    for m in modes:
        r = audit(lg, m, strict=a.strict)
        for line in r.lines():
            out(line)
        ok &= r.ok
    if not ok:
        raise Failed()


# ---------------------------------------------------------------- analyze

def cmd_sim(a):
    from .analysis.similarity import similarity_threshold
    r = similarity_threshold(_load_log(a.log), a.formula)
    for line in r.lines():
        out(line)
    if not r.ok:
        raise Failed()


def cmd_clopen(a):
    from .analysis.clopen import clopen_decomposition, measure
    lg = _load_log(a.log)
    S = clopen_decomposition(lg, a.formula, a.stage if a.stage is not None else lg.rounds)
    for line in S.lines():
        out(line)
    if a.measure:
        out(f"measure {measure(S)}")


def cmd_sprk(a):
    from .analysis.sprk import sprk
    from .logic.structure import FiniteStructure
    M = FiniteStructure.load(a.struct)
    r = sprk(M, tuple(x for x in a.set.split(",") if x), a.cap)
    for line in r.lines():
        out(line)


def cmd_en(a):
    from .analysis.twocard import en_partition, load_terms
    from .logic.structure import FiniteStructure
    M = FiniteStructure.load(a.struct)
    P = en_partition(M, load_terms(a.terms), a.n)
    for line in P.lines():
        out(line)
    if not P.within_bound:
        raise Failed()


def cmd_gamma(a):
    from .analysis.twocard import check_gamma, gamma_instantiate, load_terms, splitting_chain_search
    from .logic.structure import FiniteStructure
    terms = load_terms(a.terms)
    gamma = gamma_instantiate(terms, a.depth)
    out(f"formulas {len(gamma)}")
    for g in gamma:
        out(f"gamma {g}")
    if a.search_struct:
        M = FiniteStructure.load(a.search_struct)
        r = splitting_chain_search(M, terms, a.depth, a.bound)
        for line in r.lines():
            out(line)
        if r.assignment is not None:
            bad = check_gamma(M, terms, a.depth, r.assignment)
            out(f"gamma-check {'pass' if not bad else 'FAIL'}")
            for g in bad:
                out(f"  fail: {g}")
            if bad:
                raise Failed()


# ---------------------------------------------------------------- fmac

def cmd_fmac(a):
    if a.fmac_cmd == "validate":
        try:
            A = validate_fmac(_nodes(a.nodes))
        except errors.FmacError as e:
            out(f"invalid: {e}")
            raise Failed() from None
        out(f"valid {A} depth {A.depth}")
    elif a.fmac_cmd == "covers":
        res = covers(parse_fmac(a.a), parse_fmac(a.b))
        out("yes" if res else "no")
        if not res:
            raise Failed()
    elif a.fmac_cmd == "liftings":
        A, B = parse_fmac(a.a), parse_fmac(a.b)
        out(f"count {count_liftings(A, B)}")
        if not a.count:
            for h in iter_liftings(A, B):
                out(str(h))
    elif a.fmac_cmd == "split":
        new, h0, h1 = split_at(parse_fmac(a.a), parse_node(a.node))
        out(f"fmac {new}")
        out(f"h0 {h0}")
        out(f"h1 {h1}")
    elif a.fmac_cmd == "project":
        out(show_node(project(parse_fmac(a.a), parse_node(a.prefix))))
    elif a.fmac_cmd == "factor":
        for st in factor_cover(parse_fmac(a.a), parse_fmac(a.b)):
            out(f"split {show_node(st.node)} -> {st.fmac}")


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    from .oracles import PRESETS
    from .scheduler import AUDIT_MODES
    # --quiet is accepted at every level; SUPPRESS keeps a subcommand from
    # resetting a flag given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="suppress progress lines")

    p = argparse.ArgumentParser(prog="henkin",
                                description="Finite-stage Henkin constructions over fmac-indexed symbols.")
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    sub = p.add_subparsers(dest="cmd", required=True, metavar="COMMAND")

    c = sub.add_parser("construct", parents=[common], help="run a construction and write its log")
    c.add_argument("--provider", required=True, choices=PRESETS)
    c.add_argument("--rounds", type=int, default=3)
    c.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or {DEFAULT_SEED}")
    c.add_argument("--omit", action="append", default=[], metavar="FILE|builtin:unary-all",
                   help="type to omit; may be repeated")
    c.add_argument("--atomic", action="store_true", help="also fix complete formulas on window tuples")
    c.add_argument("--out", metavar="LOG")
    c.add_argument("--quota", type=int, default=2, help="formulas scheduled per round = quota * round")
    c.add_argument("--size", type=int, default=4, help="formula size bound for the schedule")
    c.add_argument("--free-vars", type=int, default=2)
    c.add_argument("--omit-bound", type=int, default=64)
    c.add_argument("--y-span", type=int, default=2, help="largest |t| for y-symbols in windows; 0 for all")
    c.add_argument("--family", type=int, default=4, help="declared members of a unary family")
    c.set_defaults(fn=cmd_construct)

    m = sub.add_parser("materialize", parents=[common], help="quotient structure of a stage near given points")
    m.add_argument("--log", required=True, type=_existing)
    m.add_argument("--stage", type=int, help="round number (default: last)")
    m.add_argument("--step", type=int, help="raw step index instead of a round")
    m.add_argument("--points", required=True, help="comma-separated prefixes, e.g. 00,01")
    m.set_defaults(fn=cmd_materialize)

    au = sub.add_parser("audit", parents=[common], help="check a log")
    au.add_argument("--log", required=True, type=_existing)
    au.add_argument("--mode", required=True, choices=list(AUDIT_MODES) + ["all"])
    au.add_argument("--strict", action="store_true", help="henkin-locality: witnesses must be y_(t,i)")
    au.set_defaults(fn=cmd_audit)

    an = sub.add_parser("analyze", parents=[common], help="finite-stage analyses")
    asub = an.add_subparsers(dest="analysis", required=True, metavar="ANALYSIS")
    s = asub.add_parser("sim", parents=[common], help="similarity threshold of a formula")
    s.add_argument("--log", required=True, type=_existing)
    s.add_argument("--formula", required=True)
    s.set_defaults(fn=cmd_sim)
    s = asub.add_parser("clopen", parents=[common], help="box decomposition of a definable set")
    s.add_argument("--log", required=True, type=_existing)
    s.add_argument("--formula", required=True)
    s.add_argument("--stage", type=int)
    s.add_argument("--measure", action="store_true")
    s.set_defaults(fn=cmd_clopen)
    s = asub.add_parser("sprk", parents=[common], help="splitting rank of a finite set")
    s.add_argument("--struct", required=True, type=_existing)
    s.add_argument("--set", required=True, help="comma-separated element ids")
    s.add_argument("--cap", type=int, default=64)
    s.set_defaults(fn=cmd_sprk)
    s = asub.add_parser("en", parents=[common], help="E_n classes of distinct n-tuples")
    s.add_argument("--struct", required=True, type=_existing)
    s.add_argument("--terms", required=True, type=_existing)
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(fn=cmd_en)
    s = asub.add_parser("gamma", parents=[common], help="instantiate Γ_T over 2^m, optionally search a structure")
    s.add_argument("--terms", required=True, type=_existing)
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--search-struct", type=_existing)
    s.add_argument("--bound", type=int, default=200_000)
    s.set_defaults(fn=cmd_gamma)

    f = sub.add_parser("fmac", parents=[common], help="fmac utilities")
    fsub = f.add_subparsers(dest="fmac_cmd", required=True, metavar="OP")
    x = fsub.add_parser("validate", parents=[common], help="check that nodes form an fmac")
    x.add_argument("nodes", help="comma-separated nodes, ε for the root")
    x = fsub.add_parser("covers", parents=[common], help="does B cover A")
    x.add_argument("a")
    x.add_argument("b")
    x = fsub.add_parser("liftings", parents=[common], help="liftings from A to B")
    x.add_argument("a")
    x.add_argument("b")
    x.add_argument("--count", action="store_true")
    x = fsub.add_parser("split", parents=[common], help="split a node")
    x.add_argument("a")
    x.add_argument("node")
    x = fsub.add_parser("project", parents=[common], help="node of A below a prefix")
    x.add_argument("a")
    x.add_argument("prefix")
    x = fsub.add_parser("factor", parents=[common], help="splitting chain from A to B")
    x.add_argument("a")
    x.add_argument("b")
    f.set_defaults(fn=cmd_fmac)
    return p


USAGE_ERRORS = (OSError, errors.FormulaSyntaxError, errors.StructureFormatError,
                errors.LogFormatError, errors.FmacError, ValueError, IndexError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.WARNING if a.quiet else logging.INFO,
                        format="henkin: %(message)s", stream=sys.stderr, force=True)
    if getattr(a, "seed", 0) is None:
        try:
            a.seed = default_seed()
        except SystemExit as e:
            print(e, file=sys.stderr)
            return 2
    try:
        a.fn(a)
    except Failed:
        sys.stdout.flush()
        return 1
    except errors.HenkinError as e:
        if isinstance(e, USAGE_ERRORS):
            print(f"henkin: error: {e}", file=sys.stderr)
            return 2
        out(f"failed: {type(e).__name__}: {e}")
        sys.stdout.flush()
        return 1
    except USAGE_ERRORS as e:
        print(f"henkin: error: {e}", file=sys.stderr)
        return 2
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
