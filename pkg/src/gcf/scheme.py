"""Compile proxy maps into convolution weight-sharing schemes, plus a reference forward pass.

A scheme is an index matrix: row per output vertex, column per kernel weight,
entry = the input vertex feeding that weight (or undefined). The reference
forward evaluates, for each output vertex v,

    y[v] = h(sum_p w[p] * x[index[v][p]] + b)

where undefined entries contribute zero. The scheme itself is channel
agnostic; multi-channel consumers apply per-channel weights over the same
index matrix.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import InputError, ValidationError
from .propagate import ProxyFamily

ACTIVATIONS = ("identity", "relu")


@dataclass(frozen=True)
class ConvScheme:
    """Weight-sharing scheme: which input vertex feeds which weight where.

    ``index[i][p]`` is the input vertex for output ``out_vertices[i]`` and
    weight ``p``; None marks "no input" (contributes zero). ``n_in`` is the
    input vertex count; ``meta`` carries provenance (seed vertex, stride
    level).
    """

    kappa: int
    out_vertices: tuple[int, ...]
    index: tuple[tuple, ...]
    n_in: int
    meta: dict = field(default_factory=dict)

    @cached_property
    def rows(self) -> int:
        return len(self.out_vertices)

    def validate(self) -> None:
        if len(self.index) != self.rows:
            raise ValidationError("index row count does not match output vertices")
        for i, row in enumerate(self.index):
            if len(row) != self.kappa:
                raise ValidationError(f"row {i} has {len(row)} entries, expected {self.kappa}")
            for e in row:
                if e is not None and not (0 <= e < self.n_in):
                    raise ValidationError(f"row {i} references invalid input vertex {e}")


@dataclass(frozen=True)
class ConvLayerParams:
    """Shared weights, bias, and activation of one extended convolution layer."""

    weights: tuple[float, ...]
    bias: float = 0.0
    activation: str = "identity"

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.activation not in ACTIVATIONS:
            raise InputError(f"unsupported activation {self.activation!r}; use one of {ACTIVATIONS}")


def compile_scheme(f: ProxyFamily, out: Iterable[int], level: int = 0) -> ConvScheme:
    """Index matrix for the given output vertices: entry (i, p) = psi_p(out_i).

    Output rows are ordered by ascending vertex id. Every output vertex must
    have been reached by the kernel propagation.
    """
    out_vertices = tuple(sorted(set(out)))
    if not out_vertices:
        raise InputError("scheme needs at least one output vertex")
    for v in out_vertices:
        if not (0 <= v < f.n):
            raise InputError(f"output vertex {v} out of range for n={f.n}")
        if f.slots_by_center[v] is None:
            raise ValidationError(
                f"output vertex {v} was never reached by kernel propagation; "
                f"cannot compile a scheme row for it"
            )
    index = tuple(f.slots_by_center[v] for v in out_vertices)
    return ConvScheme(
        kappa=f.kappa,
        out_vertices=out_vertices,
        index=index,
        n_in=f.n,
        meta={"v0": f.v0, "level": level},
    )


def forward(s: ConvScheme, params: ConvLayerParams, x: np.ndarray) -> np.ndarray:
    """Reference evaluation of the layer on a single-channel signal."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != s.n_in:
        raise InputError(f"signal must have shape ({s.n_in},), got {x.shape}")
    if len(params.weights) != s.kappa:
        raise InputError(f"expected {s.kappa} weights, got {len(params.weights)}")
    # Gather with a zero pad slot standing in for undefined entries.
    idx = np.array(
        [[s.n_in if e is None else e for e in row] for row in s.index],
        dtype=np.int64,
    )
    padded = np.append(x, 0.0)
    gathered = padded[idx]                       # rows x kappa
    y = gathered @ np.asarray(params.weights) + params.bias
    if params.activation == "relu":
        np.maximum(y, 0.0, out=y)
    return y


def scheme_stats(s: ConvScheme) -> dict:
    """Fill diagnostics: undefined count, fill ratio, per-column domain sizes."""
    total = s.rows * s.kappa
    column_defined = [0] * s.kappa
    for row in s.index:
        for p, e in enumerate(row):
            if e is not None:
                column_defined[p] += 1
    defined = sum(column_defined)
    return {
        "rows": s.rows,
        "kappa": s.kappa,
        "entries": total,
        "undefined": total - defined,
        "fill_ratio": defined / total if total else 0.0,
        "column_domain_sizes": column_defined,
    }


# ---------------------------------------------------------------------------
# File formats.
# JSON: {"kappa": k, "out": [...], "index": [[...]], "meta": {...}}, -1 = undefined.
# Binary: magic GSCH, u32 rows, u32 kappa, rows*kappa little-endian i32.

def scheme_to_json(s: ConvScheme) -> str:
    payload = {
        "kappa": s.kappa,
        "out": list(s.out_vertices),
        "index": [[-1 if e is None else e for e in row] for row in s.index],
        "meta": {**s.meta, "n_in": s.n_in},
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def scheme_from_json(text: str) -> ConvScheme:
    try:
        payload = json.loads(text)
        kappa = payload["kappa"]
        out = tuple(payload["out"])
        index = tuple(
            tuple(None if e == -1 else e for e in row) for row in payload["index"]
        )
        meta = dict(payload.get("meta", {}))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"malformed scheme file: {exc}") from exc
    n_in = meta.pop("n_in", None)
    if n_in is None:
        # Fall back to the largest referenced vertex.
        refs = [e for row in index for e in row if e is not None]
        n_in = max(refs + [max(out, default=0)]) + 1
    s = ConvScheme(kappa=kappa, out_vertices=out, index=index, n_in=n_in, meta=meta)
    s.validate()
    return s


def scheme_to_binary(s: ConvScheme) -> bytes:
    blob = bytearray()
    blob += b"GSCH"
    blob += struct.pack("<II", s.rows, s.kappa)
    for row in s.index:
        blob += struct.pack(f"<{s.kappa}i", *(-1 if e is None else e for e in row))
    return bytes(blob)


def scheme_index_from_binary(blob: bytes) -> tuple[tuple, ...]:
    """Decode the index matrix of the compact binary form."""
    if blob[:4] != b"GSCH":
        raise InputError("not a scheme binary (bad magic)")
    rows, kappa = struct.unpack_from("<II", blob, 4)
    need = 12 + 4 * rows * kappa
    if len(blob) < need:
        raise InputError("truncated scheme binary")
    flat = struct.unpack_from(f"<{rows * kappa}i", blob, 12)
    return tuple(
        tuple(None if e == -1 else e for e in flat[i * kappa:(i + 1) * kappa])
        for i in range(rows)
    )


def save_scheme(s: ConvScheme, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(scheme_to_json(s))


def load_scheme(path: str) -> ConvScheme:
    with open(path) as fh:
        return scheme_from_json(fh.read())
