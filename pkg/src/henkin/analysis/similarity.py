"""Similarity thresholds: once a formula is decided, its value on tuples of
distinct leaves may depend only on their restrictions to level ℓ."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..commitments import negate_text, x_text
from ..errors import FormulaNeverScheduled
from ..fmac import restrict, show_node
from ..logic.parser import parse_formula
from ..logic.syntax import Var, canonical, normalize, slots, substitute
from ..scheduler import decided_by_type


def as_template(theta) -> str:
    """Canonical text with the free variables renamed ?w1.. in slot order."""
    f = normalize(parse_formula(theta) if isinstance(theta, str) else theta)
    ren = {v: Var(f"w{i + 1}") for i, v in enumerate(slots(f))}
    # rename through fresh names first so ?w2 -> ?w1 style swaps cannot collide
    tmp = {v: Var(f"__t{i}") for i, v in enumerate(ren)}
    f = substitute(substitute(f, tmp), {tmp[v]: w for v, w in ren.items()})
    return canonical(f)


def splits_by(nodes, level) -> bool:
    rs = [restrict(a, level) for a in nodes]
    return len(set(rs)) == len(rs)


def similar(t1, t2, level) -> bool:
    return splits_by(t1, level) and all(restrict(a, level) == restrict(b, level)
                                        for a, b in zip(t1, t2))


@dataclass
class SimilarityReport:
    formula: str
    threshold: int
    verified_depth: int = -1
    checked: int = 0
    counterexample: tuple | None = None   # (stage, ℓ, tuple, value, tuple, value)
    skipped: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.counterexample is None

    def lines(self) -> list[str]:
        out = [f"formula {self.formula}", f"threshold {self.threshold}",
               f"verified-depth {self.verified_depth}", f"checked {self.checked}"]
        if self.counterexample:
            stage, level, t1, v1, t2, v2 = self.counterexample
            show = lambda t: ",".join(show_node(a) for a in t)
            out.append(f"counterexample stage {stage} level {level} ({show(t1)})={v1} ({show(t2)})={v2}")
        else:
            out.append("result pass")
        out += [f"note {s}" for s in self.skipped]
        return out


def scheduled_round(lg, template: str) -> int:
    neg = negate_text(template)
    for i, psi in lg.schedule["psi"].items():
        if psi in (template, neg):
            return lg.thresholds[("psi", i)]
    raise FormulaNeverScheduled(f"{template} was never scheduled for completion in this log")


def similarity_threshold(lg, theta) -> SimilarityReport:
    """Check that decided values of θ agree on similar (mod ℓ) tuples of
    distinct leaves, for every recorded round ≥ N_θ and every N_θ ≤ ℓ ≤ round.

    N_θ is the round at which θ entered the completion schedule.  Tuples use
    the index-0 x-symbol of each leaf; repeated leaves are not queried.
    """
    template = as_template(theta)
    n_theta = scheduled_round(lg, template)
    k = len(slots(parse_formula(template)))
    rep = SimilarityReport(template, n_theta)
    cs = lg.commitments()
    idx = 0 if cs[-1].x_mode == "doubly" else None
    for stage in range(n_theta, lg.rounds + 1):
        try:
            c = cs[lg.round_end(stage)]
        except IndexError:
            continue
        leaves = c.fmac.nodes
        if len(leaves) < k:
            rep.skipped.append(f"stage {stage}: fewer than {k} leaves")
            rep.verified_depth = stage
            continue
        values = {}
        for tup in itertools.permutations(leaves, k):
            syms = tuple(x_text(a, idx) for a in tup)
            if not all(s in c.assignment for s in syms):
                continue
            v = decided_by_type(c, template, syms)
            if v is not None:
                values[tup] = v
        for level in range(n_theta, stage + 1):
            groups = {}
            for tup, v in values.items():
                if not splits_by(tup, level):
                    continue
                key = tuple(restrict(a, level) for a in tup)
                first = groups.setdefault(key, (tup, v))
                rep.checked += 1
                if first[1] != v:
                    rep.counterexample = (stage, level, first[0], first[1], tup, v)
                    return rep
        rep.verified_depth = stage
    return rep
