"""Machine-readable reports and the tensor fixture file format.

Every CLI invocation emits one JSON document on stdout: schema version,
tool version, the echoed inputs (seed included), a command-specific result
payload, and the wall time.  Serialization is deterministic (sorted keys,
fixed separators), so identical inputs give byte-identical documents up to
the wall-time field.

Complex scalars serialize as [re, im] pairs; exact integers stay integers
and exact rationals become "p/q" strings.  Tensor fixture files carry
``schema``, ``shape`` and a flat row-major ``entries`` list in the same
scalar encoding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from .tensor_core import DenseTensor

SCHEMA_VERSION = 1


def encode_scalar(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 \
            else v.numerator
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    raise TypeError(f"cannot encode scalar of type {type(v)}")


def decode_scalar(v):
    if isinstance(v, str) and "/" in v:
        num, den = v.split("/")
        return Fraction(int(num), int(den))
    if isinstance(v, list) and len(v) == 2:
        return complex(v[0], v[1])
    return v


def jsonable(obj):
    """Recursive conversion of report payloads into JSON-safe structures."""
    if obj is None or isinstance(obj, (str,)):
        return obj
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()] if obj.dtype == object \
            else [jsonable(v) for v in obj.tolist()]
    return encode_scalar(obj)


@dataclass(frozen=True)
class Report:
    command: str
    inputs: dict
    results: dict
    seed: int | None = None
    tool_version: str = __version__
    wall_time_ms: float = 0.0
    schema: int = SCHEMA_VERSION

    def to_dict(self):
        return {
            "schema": self.schema,
            "tool_version": self.tool_version,
            "command": self.command,
            "seed": self.seed,
            "inputs": jsonable(self.inputs),
            "results": jsonable(self.results),
            "wall_time_ms": self.wall_time_ms,
        }

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True,
                          separators=(",", ": "), indent=2) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Report":
        doc = json.loads(text)
        return cls(command=doc["command"], inputs=doc["inputs"],
                   results=doc["results"], seed=doc["seed"],
                   tool_version=doc["tool_version"],
                   wall_time_ms=doc["wall_time_ms"], schema=doc["schema"])


def roundtrips(report: Report) -> bool:
    """parse(serialize(r)) reproduces the document exactly."""
    again = Report.parse(report.serialize())
    return again.to_dict() == json.loads(report.serialize())


# ---------------------------------------------------------------------------
# tensor fixture files


def tensor_to_payload(T: DenseTensor) -> dict:
    flat = T.data.reshape(-1)
    if T.is_exact:
        entries = [encode_scalar(v) for v in flat]
    else:
        entries = [[float(v.real), float(v.imag)] for v in flat]
    return {"schema": SCHEMA_VERSION, "shape": list(T.data.shape),
            "entries": entries}


def tensor_from_payload(doc: dict) -> DenseTensor:
    shape = tuple(int(d) for d in doc["shape"])
    entries = doc["entries"]
    if len(entries) != int(np.prod(shape)):
        raise ValueError("entry count does not match the shape")
    exact = all(isinstance(e, (int, str)) for e in entries)
    if exact:
        data = np.empty(len(entries), dtype=object)
        for i, e in enumerate(entries):
            data[i] = decode_scalar(e)
        return DenseTensor(data.reshape(shape))
    vals = [decode_scalar(e) for e in entries]
    return DenseTensor(np.array(vals, dtype=complex).reshape(shape))


def save_tensor(path, T: DenseTensor):
    with open(path, "w") as fh:
        json.dump(tensor_to_payload(T), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_tensor(path) -> DenseTensor:
    with open(path) as fh:
        return tensor_from_payload(json.load(fh))
