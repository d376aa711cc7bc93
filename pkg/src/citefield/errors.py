class CitefieldError(Exception):
    """Base class for all errors raised by citefield."""


class ParseError(CitefieldError):
    pass


class ValidationError(CitefieldError, ValueError):
    pass
