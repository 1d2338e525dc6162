"""JSON report for a single computed value."""

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from .values import encode_value

METHODS = ("dim_alpha", "dim_dist", "obs_diam", "char_size", "dist_to_singleton")


@dataclass
class DimensionReport:
    space: dict
    method: str
    convention: Optional[str]
    mode: Optional[str]
    value: object
    uncertainty: Optional[float]
    seed: Optional[int]
    budgets: dict = field(default_factory=dict)
    runtime_ms: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    def to_dict(self):
        out = asdict(self)
        out["value"] = encode_value(self.value)
        if self.uncertainty is not None:
            u = float(self.uncertainty)
            out["uncertainty"] = u if math.isfinite(u) else encode_value(u)
        out["space"] = _plain(self.space)
        return out

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, allow_nan=False)


REPORT_FIELDS = tuple(f.name for f in fields(DimensionReport))


def _plain(obj):
    """Descriptors may carry numpy scalars or non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item"):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return encode_value(obj)
    return obj
