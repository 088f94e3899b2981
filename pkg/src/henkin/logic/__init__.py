from .syntax import (Var, XSym, YSym, Fn, Eq, Rel, Not, And, Or, Implies, Exists,
                     Forall, show, canonical, normalize, size, free_vars, slots,
                     symbols, substitute, instantiate, lift_formula, parse_sym)
from .structure import Signature, FiniteStructure, evaluate, evaluate3
from .parser import parse_formula, parse_term
from .enumerate import enumerate_formulas, iter_formulas
from .diagram import diagram_quotient
