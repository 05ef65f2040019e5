"""Exception hierarchy shared by every engine.

Each class carries the CLI exit status it maps to, so the front door can
translate failures without a lookup table.
"""


class MeroconeError(Exception):
    exit_code = 1

    def to_json(self):
        return {"error": type(self).__name__, "message": str(self)}


class InputError(MeroconeError, ValueError):
    """Malformed input: unknown ids, bad schema, invalid Gram matrix."""

    exit_code = 2


class UnsupportedInputError(InputError):
    """Valid mathematics that the engine deliberately does not handle
    (non-simplicial cones, for instance)."""


class LocalityError(MeroconeError):
    """A partial product or action was requested on a non-independent pair."""

    exit_code = 3

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair

    def to_json(self):
        body = super().to_json()
        if self.pair is not None:
            body["pair"] = [str(p) for p in self.pair]
        return body


class InsufficientOrderError(MeroconeError):
    """The truncated jets do not reach the degree the caller asked for."""

    exit_code = 4

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required

    def to_json(self):
        body = super().to_json()
        body["required_order"] = self.required
        return body


class ContractError(MeroconeError, ValueError):
    """An operation was called outside its precondition."""

    exit_code = 2


class DomainError(MeroconeError, ArithmeticError):
    """Numeric evaluation hit a pole hyperplane."""

    exit_code = 2
