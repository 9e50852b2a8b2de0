"""Exception hierarchy shared by all modules."""


class SentrackError(Exception):
    """Base class; the CLI maps any subclass to exit status 2."""


class DataError(SentrackError):
    """Malformed input record or file."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


class UnknownReferenceError(DataError):
    """A record references an undeclared video or class, or a frame out of range."""


class LexiconError(SentrackError):
    """Invalid word definition (unknown primitive, bad arity, bad exponent)."""

    def __init__(self, message, word=None):
        self.word = word
        super().__init__(f"word {word!r}: {message}" if word else message)


class QueryParseError(SentrackError):
    """Sentence could not be tokenized or parsed."""

    def __init__(self, message, position=None, token=None):
        self.position = position
        self.token = token
        super().__init__(message)


class ContractError(SentrackError):
    """Caller violated a precondition (mismatched lengths, bad plan, ...)."""
