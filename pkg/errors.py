"""Exception types shared by the toolkit modules"""


class ToolkitError(Exception):
    """Base class for every error raised on purpose by the toolkit"""


class EquationSyntaxError(ToolkitError, ValueError):
    """Equation or polynomial text could not be parsed

    Attributes:
        position: 0-based character offset where parsing failed
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ArityError(ToolkitError, ValueError):
    """A point or tuple has the wrong number of coordinates"""

    def __init__(self, expected: int, got: int):
        super().__init__(f"Expected a tuple of length {expected}, got {got}")
        self.expected = expected
        self.got = got


class InfeasibleError(ToolkitError, RuntimeError):
    """The requested computation exceeds a configured cap"""


class NotCoprimeError(ToolkitError, ValueError):
    """Inputs to the bounded Bezout routine share a factor"""

    def __init__(self, a: int, b: int, gcd: int):
        super().__init__(f"{a} and {b} are not relatively prime (gcd = {gcd})")
        self.gcd = gcd


class WitnessSearchError(ToolkitError, RuntimeError):
    """A witness that must exist was not found inside its search bound"""


class IncomparableError(ToolkitError, ArithmeticError):
    """Two symbolic tower values could not be ordered exactly"""


class SearchBudgetExhausted(InfeasibleError):
    """A bounded search used up its node budget before finishing"""

    def __init__(self, nodes: int):
        super().__init__(f"Search stopped after {nodes} nodes (node budget exhausted)")
        self.nodes = nodes
