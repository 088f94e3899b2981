"""The construction engine: rounds of goals, the replayable log, diagrams,
materialized finite approximations and audits."""
from __future__ import annotations

import hashlib
import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

from .commitments import (Commitment, apply_split, extension_failure, negate_text,
                          neq_text, support, sym_nodes, sym_sort_key, x_text,
                          zero_sum_text)
from .errors import LogFormatError, ProviderFailure, PrefixTooShort
from .fmac import (Fmac, covers, factor_cover, parse_fmac, parse_node, project, show_node,
                   split_at, standard)
from .logic.diagram import diagram_quotient
from .logic.enumerate import iter_formulas
from .logic.parser import parse_cached, parse_formula
from .logic.syntax import canonical, is_literal, text_symbols
from .providers import exists_template, fill, make_provider, template_slots

log = logging.getLogger(__name__)

LOG_VERSION = "henkin-log 1"


# ---------------------------------------------------------------- config

@dataclass
class OmitType:
    source: str                       # "builtin:unary-all" or a file name
    formulas: list | None = None      # explicit finite stream; None for builtins

    def delta(self, j: int):
        if self.formulas is None:
            if self.source == "builtin:unary-all":
                return f"(P{j} ?w1)"
            raise ValueError(f"unknown builtin type {self.source}")
        return self.formulas[j] if j < len(self.formulas) else None

    @property
    def arity(self) -> int:
        return len(template_slots(self.delta(0))) if self.delta(0) else 1


def load_omit(path_or_builtin: str) -> OmitType:
    if path_or_builtin.startswith("builtin:"):
        OmitType(path_or_builtin).delta(0)
        return OmitType(path_or_builtin)
    with open(path_or_builtin) as fh:
        lines = [l.strip() for l in fh if l.strip() and not l.lstrip().startswith("#")]
    formulas = [canonical(parse_formula(l)) for l in lines]
    arities = {len(template_slots(f)) for f in formulas}
    if len(arities) > 1:
        raise ValueError(f"{path_or_builtin}: formulas have different arities {sorted(arities)}")
    return OmitType(path_or_builtin, formulas)


@dataclass
class GoalConfig:
    rounds: int = 3
    seed: int = 0
    quota: int = 2            # formulas scheduled per round: quota * round
    free_vars: int = 2        # placeholder budget k
    size: int = 4             # enumeration size bound
    atomic: bool = False
    omit: list = field(default_factory=list)
    omit_bound: int = 64
    y_span: int | None = 2
    family: int = 4           # declared members of a unary family
    psi: list | None = None   # explicit schedules override the enumeration
    theta: list | None = None

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")

    def text(self) -> str:
        return (f"rounds={self.rounds} quota={self.quota} k={self.free_vars} size={self.size} "
                f"atomic={int(self.atomic)} omit_bound={self.omit_bound} "
                f"y_span={self.y_span if self.y_span is not None else '-'} family={self.family}")


def quota(cfg: GoalConfig, level: int) -> int:
    return cfg.quota * level


# ---------------------------------------------------------------- log model

@dataclass
class Step:
    n: int
    fmac: Fmac
    goal: str
    round: int
    records: list = field(default_factory=list)


@dataclass
class WitnessEntry:
    step: int
    index: int
    zbar: tuple
    anchor: str | None
    zstar: str | None
    formula: str


@dataclass
class OmitEntry:
    step: int
    m: int
    zbar: tuple
    j: int


class ConstructionLog:
    def __init__(self):
        self.header: dict = {}
        self.omit_types: dict = {}
        self.steps: list[Step] = []
        self.witnesses: list[WitnessEntry] = []
        self.omits: list[OmitEntry] = []
        self.schedule: dict = {"psi": {}, "theta": {}}
        self.thresholds: dict = {}
        self.failure: tuple | None = None
        self.lines: list[str] = []

    # --- writing

    def emit(self, line: str):
        self.lines.append(line)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.text())

    # --- reading

    @classmethod
    def parse(cls, text: str) -> "ConstructionLog":
        lg = cls()
        lines = text.splitlines()
        if not lines or lines[0].strip() != LOG_VERSION:
            raise LogFormatError("missing log version line")
        by_n = {}
        for lineno, raw in enumerate(lines, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            lg.lines.append(line)
            kw, _, rest = line.partition(" ")
            try:
                if line == LOG_VERSION:
                    continue
                if kw in ("provider", "seed", "signature"):
                    lg.header[kw] = rest.strip()
                elif kw == "config":
                    lg.header["config"] = dict(item.split("=", 1) for item in rest.split())
                elif kw == "omit-type":
                    m, src = rest.split(" ", 1)
                    lg.omit_types[int(m)] = OmitType(src, None if src.startswith("builtin:") else [])
                elif kw == "omit-formula":
                    m, f = rest.split(" ", 1)
                    lg.omit_types[int(m)].formulas.append(f)
                elif kw == "step":
                    n, _f, nodes, _g, goal = rest.split(" ", 4)
                    st = Step(int(n), parse_fmac(nodes), goal, _round_of(goal))
                    if st.n != len(lg.steps):
                        raise LogFormatError(f"line {lineno}: step {n} out of order")
                    lg.steps.append(st)
                    by_n[st.n] = st
                elif kw in ("oracle", "add", "bind", "isolate", "drop"):
                    n, payload = rest.split(" ", 1)
                    st = by_n[int(n)]
                    if kw == "bind":
                        sym, elem = payload.split(" ")
                        st.records.append(("bind", sym, elem))
                    elif kw == "isolate":
                        sym, f = payload.split(" ", 1)
                        st.records.append(("isolate", sym, f))
                    else:
                        st.records.append((kw, payload))
                elif kw == "witness":
                    n, i, zbar, anchor, zstar, f = rest.split(" ", 5)
                    lg.witnesses.append(WitnessEntry(int(n), int(i), _tuple(zbar),
                                                     None if anchor == "-" else parse_node(anchor),
                                                     _opt(zstar), f))
                elif kw == "omit":
                    n, m, zbar, j = rest.split(" ")
                    lg.omits.append(OmitEntry(int(n), int(m), _tuple(zbar), int(j)))
                elif kw == "schedule":
                    n, kind, i, f = rest.split(" ", 3)
                    lg.schedule[kind][int(i)] = f
                elif kw == "threshold":
                    n, kind, i, r = rest.split(" ")
                    lg.thresholds[(kind, int(i))] = int(r)
                elif kw == "failure":
                    n, goal, reason = rest.split(" ", 2)
                    lg.failure = (int(n), goal, reason)
                else:
                    raise LogFormatError(f"line {lineno}: unknown record {kw!r}")
            except LogFormatError:
                raise
            except (ValueError, KeyError, IndexError) as e:
                raise LogFormatError(f"line {lineno}: malformed {kw!r} record ({e})") from None
        for key in ("provider", "seed"):
            if key not in lg.header:
                raise LogFormatError(f"header lacks {key}")
        return lg

    @classmethod
    def load(cls, path) -> "ConstructionLog":
        with open(path) as fh:
            return cls.parse(fh.read())

    # --- derived views

    @property
    def provider_name(self):
        return self.header["provider"]

    @property
    def seed(self):
        return int(self.header["seed"])

    @property
    def config(self) -> dict:
        return self.header.get("config", {})

    @property
    def rounds(self) -> int:
        return int(self.config.get("rounds", max((s.round for s in self.steps), default=0)))

    def make_provider(self):
        fam = int(self.config.get("family", 4))
        return make_provider(self.provider_name, self.seed, family_declared=fam)

    @cached_property
    def replayed(self):
        return replay(self)

    @property
    def oracle(self):
        return self.replayed[0]

    def commitments(self) -> list[Commitment]:
        return self.replayed[1]

    def commitment(self, n: int) -> Commitment:
        cs = self.commitments()
        if not -len(cs) <= n < len(cs):
            raise IndexError(f"stage {n} outside 0..{len(cs) - 1}")
        return cs[n]

    def round_end(self, level: int) -> int:
        """Index of the last step of a round."""
        idx = [s.n for s in self.steps if s.round == level]
        if not idx:
            raise IndexError(f"round {level} not in log")
        return idx[-1]

    def literals(self, n: int) -> list:
        """(literal text, its symbol set) for the literal conjuncts of stage n."""
        cache = self.__dict__.setdefault("_literals", {})
        if n not in cache:
            cache[n] = [(l, frozenset(text_symbols(l)))
                        for l in literal_texts(self.commitment(n).conjuncts)]
        return cache[n]

    def window(self, level: int) -> list[str]:
        prov = self.make_provider()
        ys = self.config.get("y_span", "-")
        return prov.window(level, None if ys == "-" else int(ys))


def _round_of(goal: str) -> int:
    parts = goal.split(":")
    if parts[0] in ("complete", "henkin", "omit", "atomize", "window", "split"):
        try:
            return int(parts[1])
        except (IndexError, ValueError):
            pass
    return 0


def _tuple(text):
    return () if text == "-" else tuple(text.split(","))


def _opt(text):
    return None if text == "-" else text


def _show_tuple(t):
    return ",".join(t) if t else "-"


# ---------------------------------------------------------------- run

def signature_hash(sig) -> str:
    return hashlib.sha256(sig.key().encode()).hexdigest()[:16]


class _Runner:
    def __init__(self, provider, cfg: GoalConfig, preset: str):
        self.p = provider
        self.cfg = cfg
        self.log = ConstructionLog()
        self.draft = None
        lg = self.log
        lg.emit(LOG_VERSION)
        lg.emit(f"provider {preset}")
        lg.emit(f"seed {cfg.seed}")
        lg.emit(f"signature {signature_hash(provider.signature)}")
        lg.emit(f"config {cfg.text()}")
        lg.header.update(provider=preset, seed=str(cfg.seed),
                         config=dict(i.split("=", 1) for i in cfg.text().split()))
        for m, ot in enumerate(cfg.omit):
            lg.emit(f"omit-type {m} {ot.source}")
            for f in ot.formulas or ():
                lg.emit(f"omit-formula {m} {f}")
            lg.omit_types[m] = ot
        sig = provider.signature
        self.psi = list(cfg.psi) if cfg.psi is not None else None
        self.theta = list(cfg.theta) if cfg.theta is not None else None
        self._psi_iter = iter_formulas(sig, cfg.free_vars, cfg.size) if self.psi is None else None
        if self.psi is None:
            self.psi = []
        self._theta_src = 0
        if self.theta is None:
            self.theta = []

    # schedules are pulled lazily so small quotas never build large size classes
    def psi_at(self, i):
        while i >= len(self.psi) and self._psi_iter is not None:
            nxt = next(self._psi_iter, None)
            if nxt is None:
                self._psi_iter = None
                break
            self.psi.append(canonical(nxt))
        return self.psi[i] if i < len(self.psi) else None

    def theta_at(self, i):
        if self.cfg.theta is not None:
            return self.theta[i] if i < len(self.theta) else None
        while i >= len(self.theta):
            f = self.psi_at(self._theta_src)
            if f is None:
                return None
            self._theta_src += 1
            if "?w1" in template_slots(f):
                self.theta.append(f)
        return self.theta[i]

    def step(self, goal, level):
        d = self.draft
        n = len(self.log.steps)
        st = Step(n, d.fmac, goal, level)
        self.log.steps.append(st)
        self.log.emit(f"step {n} fmac {d.fmac} goal {goal}")
        for line in self.p.oracle.drain():
            st.records.append(("oracle", line))
            self.log.emit(f"oracle {n} {line}")
        for ev in d.drain():
            st.records.append(ev)
            self.log.emit(f"{ev[0]} {n} " + " ".join(ev[1:]))
        return n

    def run(self) -> ConstructionLog:
        cfg, p = self.cfg, self.p
        self.draft = p.root()
        self.step("root", 0)
        for level in range(cfg.rounds + 1):
            self.round(level)
        return self.log

    def round(self, level):
        cfg, p, lg = self.cfg, self.p, self.log
        d = self.draft
        for st in factor_cover(d.fmac, standard(level)):
            p.split(d, st.node)
            self.step(f"split:{level}:{show_node(st.node)}", level)
        W = p.window(level, cfg.y_span)
        p.introduce(d, W)
        self.step(f"window:{level}", level)
        q = quota(cfg, level)
        log.info("round %d: |W|=%d, quota %d, %d symbols", level, len(W), q, len(d.asg))

        for i in range(q):
            psi = self.psi_at(i)
            if psi is None:
                break
            n = len(lg.steps)
            if ("psi", i) not in lg.thresholds:
                lg.schedule["psi"][i] = psi
                lg.thresholds[("psi", i)] = level
            k = len(template_slots(psi))
            for tup in itertools.product(W, repeat=k):
                p.complete(d, fill(psi, tup))
            self.step(f"complete:{level}:{i}", level)
            if lg.thresholds[("psi", i)] == level:
                lg.emit(f"schedule {n} psi {i} {psi}")
                lg.emit(f"threshold {n} psi {i} {level}")

        for i in range(q):
            theta = self.theta_at(i)
            if theta is None:
                break
            n = len(lg.steps)
            if i not in lg.schedule["theta"]:
                lg.schedule["theta"][i] = theta
                lg.thresholds[("theta", i)] = level
                first = True
            else:
                first = False
            nparams = len(template_slots(theta)) - 1
            entries = []
            if nparams == 0:
                for a in d.fmac.nodes:
                    zs, text = self._henkin(theta, (), a, level)
                    entries.append(((), a, zs, text))
            else:
                for tup in itertools.product(W, repeat=nparams):
                    zs, text = self._henkin(theta, tup, None, level)
                    entries.append((tup, None, zs, text))
            self.step(f"henkin:{level}:{i}", level)
            if first:
                lg.emit(f"schedule {n} theta {i} {theta}")
                lg.emit(f"threshold {n} theta {i} {level}")
            for tup, a, zs, text in entries:
                lg.witnesses.append(WitnessEntry(n, i, tup, a, zs, text))
                lg.emit(f"witness {n} {i} {_show_tuple(tup)} {show_node(a) if a is not None else '-'} "
                        f"{zs or '-'} {text}")

        for m, ot in enumerate(cfg.omit):
            if m >= level:
                break
            n = len(lg.steps)
            rows = []
            for tup in itertools.product(W, repeat=ot.arity):
                try:
                    j = p.omit(d, tup, ot.delta, cfg.omit_bound)
                except ProviderFailure as e:
                    e.step = n
                    self.fail(f"omit:{level}:{m}", level, e)
                rows.append((tup, j))
            self.step(f"omit:{level}:{m}", level)
            for tup, j in rows:
                lg.omits.append(OmitEntry(n, m, tup, j))
                lg.emit(f"omit {n} {m} {_show_tuple(tup)} {j}")

        if cfg.atomic and W:
            width = min(cfg.free_vars, len(W))
            try:
                for tup in itertools.combinations(W, width):
                    p.atomize(d, tup)
            except ProviderFailure as e:
                self.fail(f"atomize:{level}", level, e)
            self.step(f"atomize:{level}", level)

    def _henkin(self, theta, tup, anchor, level):
        try:
            return self.p.henkin(self.draft, theta, tup, anchor)
        except ProviderFailure as e:
            self.fail(f"henkin:{level}", level, e)

    def fail(self, goal, level, e: ProviderFailure):
        n = self.step(goal, level)
        e.goal, e.step = goal, n
        self.log.failure = (n, goal, e.reason)
        self.log.emit(f"failure {n} {goal} {e.reason}")
        e.log = self.log
        raise e


def run(provider_name: str, cfg: GoalConfig) -> ConstructionLog:
    """Run a construction with a built-in provider preset.

    On a provider failure the exception carries the partial log as ``.log``.
    """
    provider = make_provider(provider_name, cfg.seed, family_declared=cfg.family)
    return run_with(provider, cfg, provider_name)


def run_with(provider, cfg: GoalConfig, preset: str) -> ConstructionLog:
    return _Runner(provider, cfg, preset).run()


# ---------------------------------------------------------------- replay

def replay(lg: ConstructionLog):
    """(oracle, [commitment after each step]) rebuilt from the records alone."""
    prov = lg.make_provider()
    oracle = prov.oracle
    for st in lg.steps:
        for rec in st.records:
            if rec[0] == "oracle":
                oracle.replay(rec[1])
    oracle.drain()
    fmac = Fmac(("",))
    conj, asg, iso = set(), {}, {}
    out = []
    for st in lg.steps:
        if st.fmac != fmac:
            # a split step: the lifted images come from the previous stage
            chain = factor_cover(fmac, st.fmac)
            if len(chain) != 1:
                raise LogFormatError(f"step {st.n}: fmac changes by more than one split")
            node = chain[0].node
            new, h0, h1 = split_at(fmac, node)
            conj, asg, iso, _ = apply_split(conj, asg, iso, fmac, node, new, h0, h1)
            fmac = new
        for rec in st.records:
            kind = rec[0]
            if kind == "add":
                conj.add(rec[1])
            elif kind == "drop":
                conj.discard(rec[1])
            elif kind == "bind":
                asg[rec[1]] = rec[2]
            elif kind == "isolate":
                iso[rec[1]] = rec[2]
        out.append(Commitment(fmac, frozenset(conj), dict(asg), oracle, prov.x_mode, dict(iso)))
    return oracle, out


# ---------------------------------------------------------------- diagram / materialize

def literal_texts(conjuncts) -> list[str]:
    return sorted(c for c in conjuncts if is_literal(parse_cached(c)))


def diagram(lg: ConstructionLog, n: int) -> set[str]:
    """Literal conjuncts of stage n plus the equalities forced by ~."""
    c = lg.commitment(n)
    lits = set(literal_texts(c.conjuncts))
    q = diagram_quotient(sorted(lits))
    for members in q.members.values():
        ms = [str(m) for m in members]
        for a, b in itertools.combinations(ms, 2):
            lits.add(f"(= {a} {b})")
    return lits


def materialize(lg: ConstructionLog, n: int, prefixes):
    """Quotient structure on the symbols of Z_s, s = nodes below the given prefixes."""
    prefixes = list(prefixes)
    if not prefixes:
        raise ValueError("need at least one point prefix")
    c = lg.commitment(n)
    s = {project(c.fmac, p) for p in prefixes}
    syms = [z for z in c.symbols() if sym_nodes(z) <= s]
    keep = set(syms)
    lits = [l for l, ss in lg.literals(n) if ss <= keep]
    lits += [f"(= {z} {z})" for z in syms]
    sig = lg.make_provider().signature
    return diagram_quotient(lits, sig)


# ---------------------------------------------------------------- audits

@dataclass
class Report:
    mode: str
    failures: list = field(default_factory=list)
    checked: int = 0
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, msg):
        self.failures.append(msg)

    def lines(self) -> list[str]:
        head = f"audit {self.mode}: {'pass' if self.ok else 'FAIL'} ({self.checked} obligations, {len(self.failures)} failures)"
        return [head] + [f"  fail: {f}" for f in self.failures] + [f"  note: {n}" for n in self.notes]

    def __str__(self):
        return "\n".join(self.lines())


AUDIT_MODES = ("chain-validity", "splitting-distinctness", "henkin-locality", "omit", "atomic",
               "elementary-fragment", "decidedness", "certificate")


def audit(lg: ConstructionLog, mode: str, strict: bool = False) -> Report:
    fn = {
        "chain-validity": _audit_chain,
        "splitting-distinctness": _audit_distinct,
        "henkin-locality": lambda lg: _audit_henkin(lg, strict),
        "omit": _audit_omit,
        "atomic": _audit_atomic,
        "elementary-fragment": _audit_elementary,
        "decidedness": _audit_decided,
        "certificate": _audit_certificate,
    }.get(mode)
    if fn is None:
        raise ValueError(f"unknown audit mode {mode!r}; expected one of {', '.join(AUDIT_MODES)}")
    return fn(lg)


def _audit_chain(lg):
    r = Report("chain-validity")
    cs = lg.commitments()
    for i in range(len(cs) - 1):
        r.checked += 1
        bad = extension_failure(cs[i], cs[i + 1])
        if bad is not None:
            h, what = bad
            r.fail(f"step {i} -> {i + 1}: lifting {h} misses {what}" if h else f"step {i}: {what}")
    return r


def _audit_distinct(lg):
    r = Report("splitting-distinctness")
    c = lg.commitments()[-1]
    idx = 0 if c.x_mode == "doubly" else None
    seen = {}
    for a, b in itertools.combinations(c.fmac.nodes, 2):
        r.checked += 1
        xa, xb = x_text(a, idx), x_text(b, idx)
        if neq_text(xa, xb) not in c.conjuncts:
            r.fail(f"missing {neq_text(xa, xb)}")
        elif c.assignment.get(xa) == c.assignment.get(xb):
            r.fail(f"{xa} and {xb} share an element")
    return r


def _audit_henkin(lg, strict=False):
    r = Report("henkin-locality" + (" (strict)" if strict else ""))
    cs = lg.commitments()
    for w in lg.witnesses:
        r.checked += 1
        c = cs[w.step]
        where = f"theta {w.index} at ({_show_tuple(w.zbar)})" + (f" anchor {show_node(w.anchor)}" if w.anchor is not None else "")
        if w.formula not in c.conjuncts:
            r.fail(f"{where}: conjunct {w.formula} missing at step {w.step}")
            continue
        if w.zstar is None:
            continue
        t = support(w.zbar) if w.zbar else frozenset({w.anchor})
        if not sym_nodes(w.zstar) <= t:
            r.fail(f"{where}: witness {w.zstar} outside Z_{{{','.join(map(show_node, sorted(t)))}}}")
        elif strict and w.zstar not in w.zbar and not (w.zstar.startswith("y:") and sym_nodes(w.zstar) == t):
            r.fail(f"{where}: witness {w.zstar} is not of the form y_(t,i)")
    return r


def _audit_omit(lg):
    r = Report("omit")
    cs = lg.commitments()
    seen = set()
    for e in lg.omits:
        r.checked += 1
        ot = lg.omit_types[e.m]
        text = fill(ot.delta(e.j), e.zbar)
        if negate_text(text) not in cs[e.step].conjuncts:
            r.fail(f"type {e.m} at ({_show_tuple(e.zbar)}): {negate_text(text)} missing")
        seen.add((e.m, e.zbar, cs[e.step].fmac))
    # coverage: each type must be handled on every window tuple of every later round
    for level in range(lg.rounds + 1):
        for m, ot in lg.omit_types.items():
            if m >= level:
                continue
            try:
                n = lg.round_end(level)
            except IndexError:
                continue
            fm = cs[n].fmac
            for tup in itertools.product(lg.window(level), repeat=ot.arity):
                r.checked += 1
                if (m, tup, fm) not in seen:
                    r.fail(f"round {level}: type {m} never omitted at ({_show_tuple(tup)})")
    return r


def atoms_over(oracle, syms) -> list[str]:
    """Atoms over the tuple whose polarities fix its qf type."""
    syms = sorted(dict.fromkeys(syms), key=sym_sort_key)
    atoms = []
    if hasattr(oracle, "age"):
        for a, b in itertools.combinations(syms, 2):
            atoms.append(f"(= {a} {b})")
        for s in syms:
            atoms.append(f"(= {s} {s})")
        for rel, ar in sorted(oracle.age.relations.items()):
            for tup in itertools.product(syms, repeat=ar):
                if rel in oracle.age.irreflexive and len(set(tup)) < len(tup):
                    continue
                atoms.append("(" + rel + " " + " ".join(tup) + ")")
    else:
        for n in range(1, len(syms) + 1):
            for sub in itertools.combinations(syms, n):
                atoms.append(zero_sum_text(sub))
    return atoms


def qf_type_decided(c: Commitment, syms) -> bool:
    sym_rels = getattr(getattr(c.oracle, "age", None), "symmetric", frozenset())
    for atom in atoms_over(c.oracle, syms):
        if c.decides(atom) is not None:
            continue
        parts = atom[1:-1].split(" ")
        if parts[0] in sym_rels and c.decides(f"({parts[0]} {' '.join(reversed(parts[1:]))})") is not None:
            continue
        return False
    return True


def _audit_atomic(lg):
    r = Report("atomic")
    cs = lg.commitments()
    cfg = lg.config
    k = int(cfg.get("k", 2))
    for st in lg.steps:
        if not st.goal.startswith("atomize:"):
            continue
        level = st.round
        W = lg.window(level)
        c = cs[st.n]
        for tup in itertools.combinations(W, min(k, len(W))):
            r.checked += 1
            if not qf_type_decided(c, tup):
                r.fail(f"round {level}: no complete formula at ({_show_tuple(tup)})")
    if not r.checked:
        r.notes.append("log has no atomize steps")
    return r


def _audit_elementary(lg):
    """Tarski-Vaught on the decided fragment: every true ∃uθ(u, z̄) that the
    schedule handled has a witness inside Z_t(z̄)."""
    r = Report("elementary-fragment")
    cs = lg.commitments()
    final = cs[-1]
    oracle = lg.oracle
    from .commitments import conjunct_truth, Draft
    for w in lg.witnesses:
        c = cs[w.step]
        r.checked += 1
        theta = lg.schedule["theta"][w.index]
        ex = fill(exists_template(theta), w.zbar)
        holds = conjunct_truth(oracle, ex, c.assignment)
        if w.zstar is None:
            if holds:
                r.fail(f"theta {w.index} at ({_show_tuple(w.zbar)}): ∃ holds but no witness recorded")
            continue
        t = support(w.zbar) if w.zbar else frozenset({w.anchor})
        found = False
        for z in c.symbols():
            if sym_nodes(z) <= t and conjunct_truth(oracle, fill(theta, (z,) + tuple(w.zbar)), c.assignment):
                found = True
                break
        if not found:
            r.fail(f"theta {w.index} at ({_show_tuple(w.zbar)}): no witness inside Z_t")
    return r


def _audit_decided(lg):
    """Every scheduled ψ_i is decided on every window tuple at the end of its rounds."""
    r = Report("decidedness")
    cs = lg.commitments()
    for level in range(lg.rounds + 1):
        try:
            c = cs[lg.round_end(level)]
        except IndexError:
            continue
        W = lg.window(level)
        for (kind, i), first in sorted(lg.thresholds.items()):
            if kind != "psi" or first > level:
                continue
            psi = lg.schedule["psi"][i]
            k = len(template_slots(psi))
            for tup in itertools.product(W, repeat=k):
                r.checked += 1
                text = fill(psi, tup)
                pos, neg = text in c.conjuncts, negate_text(text) in c.conjuncts
                if pos == neg:
                    r.fail(f"round {level}: psi {i} at ({_show_tuple(tup)}) has "
                           f"{'both polarities' if pos else 'no polarity'}")
    return r


def _audit_certificate(lg):
    r = Report("certificate")
    for c in lg.commitments():
        r.checked += 1
        try:
            c.validate()
        except Exception as e:
            r.fail(f"stage with fmac {c.fmac}: {e}")
    return r


# ---------------------------------------------------------------- semantic decisions

def decided_by_type(c: Commitment, template: str, syms) -> bool | None:
    """Truth value of template(syms) that the commitment fixes, or None.

    A formula is fixed either syntactically (it or its negation is a conjunct)
    or because the literal conjuncts pin down the full qf type of the tuple;
    both built-in oracles eliminate quantifiers, so the type decides every
    formula.  The value is then read off a fresh realization of that type in a
    scratch oracle, never from the certificate itself.
    """
    text = fill(template, syms)
    d = c.decides(text)
    if d is not None:
        return d
    if not qf_type_decided(c, syms):
        return None
    return _realize_and_eval(c, template, syms)


def _realize_and_eval(c: Commitment, template, syms):
    from .oracles import FraisseOracle, VectorF2Oracle
    o = c.oracle
    uniq = list(dict.fromkeys(syms))
    if isinstance(o, FraisseOracle):
        scratch = FraisseOracle(o.age, o.seed + 1, "scratch")
        # equality classes from the literals
        cls = {}
        for s in uniq:
            for t in list(cls):
                if c.decides(f"(= {t} {s})") or c.decides(f"(= {s} {t})"):
                    cls[s] = cls[t]
                    break
            else:
                cls[s] = None
        names = {}
        for s in uniq:
            names[s] = names[cls[s]] if cls[s] is not None else scratch.new_element()
            if cls[s] is None:
                cls[s] = s
        for rel, ar in sorted(o.age.relations.items()):
            for tup in itertools.product(uniq, repeat=ar):
                if rel in o.age.irreflexive and len(set(names[t] for t in tup)) < ar:
                    continue
                v = c.decides("(" + rel + " " + " ".join(tup) + ")")
                if v is None and rel in o.age.symmetric:
                    v = c.decides("(" + rel + " " + " ".join(reversed(tup)) + ")")
                scratch.set_fact(rel, tuple(names[t] for t in tup), bool(v))
        return scratch.truth(template, tuple(names[s] for s in syms))
    if isinstance(o, VectorF2Oracle):
        scratch = VectorF2Oracle(o.seed + 1, "scratch")
        vecs, basis = {}, []
        for s in uniq:
            for n in range(len(basis) + 1):
                hit = next((sub for sub in itertools.combinations(basis, n)
                            if c.decides(zero_sum_text(list(sub) + [s]))), None)
                if hit is not None:
                    v = 0
                    for b in hit:
                        v ^= vecs[b]
                    vecs[s] = v
                    break
            else:
                vecs[s] = 1 << len(basis)
                basis.append(s)
        names = {s: scratch.name_of(v) for s, v in vecs.items()}
        return scratch.truth(template, tuple(names[s] for s in syms))
    return None
