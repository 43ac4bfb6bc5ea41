"""Exception types raised across mttlab."""


class MttError(Exception):
    """Base class for every library error."""


class PathOutOfRange(MttError, IndexError):
    pass


class NonNullarySymbol(MttError, ValueError):
    pass


class ParamOutOfArity(MttError, ValueError):
    pass


class UnknownSymbol(MttError, KeyError):
    pass


class TreeSyntaxError(MttError, ValueError):
    def __init__(self, message, line=1, col=1):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class InvalidTransducer(MttError, ValueError):
    """Raised when a transducer fails validation; carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        text = "; ".join(str(v) for v in self.violations[:5])
        more = len(self.violations) - 5
        if more > 0:
            text += f" (+{more} more)"
        super().__init__(text)


class NotNondeleting(MttError, ValueError):
    pass


class InfinitePout(MttError, ValueError):
    pass


class MissingPhi(MttError, KeyError):
    pass


class UndefinedRule(MttError, KeyError):
    """A partial (helper) state was evaluated on an input outside its domain."""


class AnalysisError(MttError, RuntimeError):
    """An internal consistency check of an analysis failed."""


class IterationCapExceeded(MttError, RuntimeError):
    def __init__(self, max_iters):
        super().__init__(f"no depth-proper transducer within {max_iters} iterations")
        self.max_iters = max_iters


class AlphabetMismatch(MttError, ValueError):
    pass
