"""Special dimension values that are not plain finite floats."""

import math


class _Undefined:
    """Marker for a dimension that is genuinely undefined (0/0)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEFINED"

    def __str__(self):
        return "undefined"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (_Undefined, ())


UNDEFINED = _Undefined()


class DivergentZero(float):
    """A zero that came from a divergent concentration integral.

    Compares equal to ``0.0`` but keeps the reason for serialization.
    """

    def __new__(cls):
        return super().__new__(cls, 0.0)

    def __repr__(self):
        return "DIVERGENT_ZERO"

    def __str__(self):
        return "zero-by-divergence"

    def __reduce__(self):
        return (DivergentZero, ())

    def __deepcopy__(self, memo):
        return self


DIVERGENT_ZERO = DivergentZero()


def is_undefined(value):
    return value is UNDEFINED


def encode_value(value):
    """JSON/CSV-safe encoding; special values never become bare numbers."""
    if value is UNDEFINED:
        return "undefined"
    if isinstance(value, DivergentZero):
        return "zero-by-divergence"
    value = float(value)
    if math.isinf(value):
        return "+inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "undefined"
    return value
