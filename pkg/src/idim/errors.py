class IdimError(Exception):
    """Base class for errors raised by idim."""


class ParameterError(IdimError, ValueError):
    """Invalid parameters for a space family, estimator or command."""


class DataError(IdimError, ValueError):
    """Malformed or inconsistent input data (files, matrices, payloads)."""
