"""Exception types raised by asplundmap."""


class ContractError(ValueError):
    """An input violates an operation's precondition."""


class ShapeError(ContractError):
    """Images (or image and scale) do not match."""


class DomainError(ContractError):
    """A grey tone or scalar lies outside the admissible range."""


class ParameterError(ContractError):
    """A parameter such as a rank, tolerance or threshold is out of range."""


class ExtractionError(ContractError):
    """A probe cannot be cut out of an image."""


class SceneError(ContractError):
    """A synthetic scene description is inconsistent (overlap, out of canvas)."""


class OracleError(RuntimeError):
    """The bisection oracle could not bracket a bound."""


class ParseError(ValueError):
    """Malformed file content.

    ``offset`` is the position where parsing stopped, counted in ``unit``
    (bytes for binary formats, lines for text formats).
    """

    def __init__(self, message, offset=None, unit="byte"):
        if offset is not None:
            message = f"{message} (at {unit} {offset})"
        super().__init__(message)
        self.offset = offset
        self.unit = unit
