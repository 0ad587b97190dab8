"""Exception hierarchy shared by all cfpomdp modules."""


class CfpomdpError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CfpomdpError):
    """Bad input: unknown symbols, horizon mismatches, violated preconditions."""


class SimilarityError(InputError):
    """Two environments do not share action and observation alphabets."""


class DeterminismError(InputError):
    """An operation that requires deterministic transitions/observations got
    a stochastic environment."""


class ValidationError(CfpomdpError):
    """An environment failed validation.  Carries the violation report."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(violations))


class EnvFileError(CfpomdpError):
    """Syntax error in an environment file.  Carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")
