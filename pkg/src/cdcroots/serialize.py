"""JSON I/O for channels, Kraus sets and memory channels.

Complex arrays are written as nested ``[re, im]`` pairs, flattened row-major
for matrices. Python's float ``repr`` is shortest round-trip, so every
emitted file parses back bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .basis import named_basis
from .channels import Channel, KrausSet
from .memory import ForgetfulSpec, MemoryChannel

CHANNEL_BASES = ("gellmann", "matrix-unit")


def encode_complex(a) -> list:
    """``[[re, im], ...]`` for ``a.reshape(-1)``."""
    flat = np.asarray(a, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def decode_complex(pairs, shape) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] != int(np.prod(shape)):
        raise ValueError(f"expected {int(np.prod(shape))} [re, im] pairs")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(shape)


def channel_to_dict(ch: Channel) -> dict:
    if ch.basis.name not in CHANNEL_BASES:
        ch = ch.in_basis("gellmann")
    return {
        "d_in": ch.dim,
        "d_out": ch.dim,
        "picture": ch.picture,
        "basis": ch.basis.name,
        "matrix": encode_complex(ch.matrix),
    }


def channel_from_dict(obj: dict) -> Channel:
    d = int(obj["d_in"])
    if int(obj["d_out"]) != d:
        raise ValueError("only d_in == d_out channels are supported")
    basis = named_basis(obj["basis"], d)
    return Channel(decode_complex(obj["matrix"], (d * d, d * d)), basis, obj["picture"])


def kraus_to_dict(k: KrausSet) -> dict:
    return {"d": k.dim, "operators": [encode_complex(op) for op in k.operators]}


def kraus_from_dict(obj: dict) -> KrausSet:
    d = int(obj["d"])
    return KrausSet(np.array([decode_complex(op, (d, d)) for op in obj["operators"]]))


def memory_to_dict(t: MemoryChannel) -> dict:
    return {"dM": t.dM, "dA": t.dA, "dB": t.dB, "basis": "gellmann", "matrix": encode_complex(t.matrix)}


def memory_from_dict(obj: dict) -> MemoryChannel:
    if obj.get("basis", "gellmann") != "gellmann":
        raise ValueError("memory channels are stored in the Gell-Mann product basis")
    dM, dA, dB = int(obj["dM"]), int(obj["dA"]), int(obj["dB"])
    shape = ((dM * dB) ** 2, (dM * dA) ** 2)
    return MemoryChannel(dM, dA, dB, decode_complex(obj["matrix"], shape))


def forgetful_spec_from_dict(obj: dict) -> ForgetfulSpec:
    """Parse ``{"dM", "dA", "dB", "J", "v", "eta"?}``; ``J`` entries are real or ``[re, im]``."""
    dM, dA, dB = int(obj["dM"]), int(obj["dA"]), int(obj["dB"])
    j = np.asarray(obj["J"], dtype=float)
    if j.ndim == 4:
        j = j[..., 0] + 1j * j[..., 1]
    return ForgetfulSpec(
        dM, dA, dB, j, np.asarray(obj["v"], dtype=float), obj.get("eta"), float(obj.get("eta_max", 1.0))
    )


def to_dict(obj) -> dict:
    if isinstance(obj, Channel):
        return channel_to_dict(obj)
    if isinstance(obj, MemoryChannel):
        return memory_to_dict(obj)
    if isinstance(obj, KrausSet):
        return kraus_to_dict(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_dict(obj: dict):
    """Dispatch on the keys present: memory channel, channel or Kraus set."""
    if "dM" in obj:
        return memory_from_dict(obj)
    if "d_in" in obj:
        return channel_from_dict(obj)
    if "operators" in obj:
        return kraus_from_dict(obj)
    raise ValueError("unrecognised object: expected channel, memory channel or Kraus set keys")


def dumps(obj, provenance: dict | None = None) -> str:
    payload = to_dict(obj)
    if provenance is not None:
        payload = {"provenance": provenance, **payload}
    return json.dumps(payload, indent=1, allow_nan=False) + "\n"


def loads(text: str):
    return from_dict(json.loads(text))


def save(obj, path, provenance: dict | None = None) -> None:
    Path(path).write_text(dumps(obj, provenance), encoding="utf-8")


def load(path):
    return loads(Path(path).read_text(encoding="utf-8"))


def read_provenance(path) -> dict | None:
    return json.loads(Path(path).read_text(encoding="utf-8")).get("provenance")
