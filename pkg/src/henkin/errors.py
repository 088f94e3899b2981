"""Exception hierarchy shared by every module."""


class HenkinError(Exception):
    pass


# fmac algebra

class FmacError(HenkinError, ValueError):
    pass


class NotAntichain(FmacError):
    def __init__(self, a, b):
        self.pair = (a, b)
        super().__init__(f"not an antichain: {a or 'ε'} is a prefix of {b or 'ε'}")


class NotMaximal(FmacError):
    def __init__(self, kraft):
        self.kraft = kraft
        super().__init__(f"not maximal: Kraft sum {kraft} < 1")


class NotACover(FmacError):
    pass


class NodeNotInFmac(FmacError):
    pass


class PrefixTooShort(FmacError):
    def __init__(self, required, got=None):
        self.required = required
        msg = f"prefix too short: need depth {required}"
        if got is not None:
            msg += f", got {got}"
        super().__init__(msg)


# syntax and semantics

class FormulaSyntaxError(HenkinError, ValueError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at {position})"
        super().__init__(message)


class UnknownSymbol(FormulaSyntaxError):
    pass


class ArityMismatch(FormulaSyntaxError):
    pass


class SymbolOutsideSource(HenkinError, ValueError):
    pass


class UnassignedFreeVariable(HenkinError, KeyError):
    def __str__(self):
        return f"unassigned free variable {self.args[0]}"


class InconsistentDiagram(HenkinError, ValueError):
    pass


class CongruenceViolation(HenkinError, ValueError):
    pass


class StructureFormatError(HenkinError, ValueError):
    pass


# oracles

class UnsupportedSignature(HenkinError, ValueError):
    pass


class NoSolution(HenkinError):
    pass


class AllSolutionsClosed(HenkinError):
    pass


# commitments and construction

class CertificateFails(HenkinError):
    def __init__(self, conjunct):
        self.conjunct = conjunct
        super().__init__(f"certificate does not satisfy {conjunct}")


class DegenerateXAssignment(HenkinError):
    def __init__(self, a, b):
        self.pair = (a, b)
        super().__init__(f"x-symbols at {a} and {b} share a certificate element")


class SymbolOutsideFmac(HenkinError, ValueError):
    pass


class ProviderFailure(HenkinError):
    def __init__(self, goal, step=None, reason=""):
        self.goal = goal
        self.step = step
        self.reason = reason
        super().__init__(f"provider failed at goal {goal} (step {step}): {reason}")


class OmitSearchExhausted(ProviderFailure):
    def __init__(self, bound, tuple_=None):
        self.bound = bound
        super().__init__("omit", None, f"every delta within bound {bound} holds of {tuple_}")


class LogFormatError(HenkinError, ValueError):
    pass


# analysis

class FormulaNeverScheduled(HenkinError):
    pass


class Undecided(HenkinError):
    def __init__(self, tuples):
        self.tuples = list(tuples)
        super().__init__(f"{len(self.tuples)} tuple(s) undecided, e.g. {self.tuples[:3]}")


class CapTooSmall(HenkinError):
    pass


class MissingInterpretation(HenkinError, ValueError):
    pass


class SearchSpaceExceeded(HenkinError):
    def __init__(self, bound):
        self.bound = bound
        super().__init__(f"search exceeded {bound} nodes")
