"""Infer an unweighted graph from training signals by top-k covariance.

Each vertex selects the k other vertices it covaries with most; an edge
appears when either endpoint selected the other. Ties in covariance break
toward the smaller vertex id so the result is reproducible.
"""

from __future__ import annotations

import struct
import warnings

import numpy as np

from .errors import InputError
from .graph import Graph, connected_components

STATISTICS = ("covariance", "correlation")


def validate_signals(signals: np.ndarray, min_rows: int = 1) -> np.ndarray:
    signals = np.asarray(signals, dtype=np.float64)
    if signals.ndim != 2:
        raise InputError(f"signal matrix must be 2-D, got shape {signals.shape}")
    if signals.shape[0] < min_rows:
        raise InputError(f"need at least {min_rows} signal rows, got {signals.shape[0]}")
    if not np.isfinite(signals).all():
        raise InputError("signal matrix contains non-finite values")
    return signals


def covariance_matrix(signals: np.ndarray) -> np.ndarray:
    """Sample covariance over the rows: per-column mean removal, divisor m-1."""
    x = validate_signals(signals, min_rows=2)
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    return (cov + cov.T) / 2.0


def correlation_matrix(signals: np.ndarray) -> np.ndarray:
    """Covariance normalized by standard deviations; zero-variance columns stay zero."""
    cov = covariance_matrix(signals)
    sd = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = cov / np.outer(sd, sd)
    corr[~np.isfinite(corr)] = 0.0
    return (corr + corr.T) / 2.0


def knn_covariance_graph(signals: np.ndarray, k: int = 4,
                         statistic: str = "covariance") -> Graph:
    """Union-of-top-k graph over the columns of ``signals``.

    For each vertex, its k largest-``statistic`` distinct partners are
    selected (never itself; ties by ascending id); an edge is kept when
    either endpoint selected the other. A disconnected result is returned
    with a warning carrying the component report; pipeline entry points
    decide whether that is fatal.
    """
    x = validate_signals(signals, min_rows=2)
    n = x.shape[1]
    if not (1 <= k < n):
        raise InputError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    if statistic == "covariance":
        score = covariance_matrix(x)
    elif statistic == "correlation":
        score = correlation_matrix(x)
    else:
        raise InputError(f"unknown statistic {statistic!r}; use one of {STATISTICS}")

    edges = set()
    for v in range(n):
        row = score[v]
        # Sort by (-score, id): largest covariance first, ids break ties.
        order = sorted((u for u in range(n) if u != v), key=lambda u: (-row[u], u))
        for u in order[:k]:
            edges.add((min(u, v), max(u, v)))
    g = Graph.from_edges(n, sorted(edges))
    comps = connected_components(g)
    if len(comps) > 1:
        warnings.warn(
            f"inferred graph is disconnected: {len(comps)} components of sizes "
            f"{[len(c) for c in comps]}",
            stacklevel=2,
        )
    return g


def channel_mean(signals: np.ndarray, channels: int) -> np.ndarray:
    """Average interleaved channel blocks: (m, c*n) row-major blocks to (m, n)."""
    x = validate_signals(signals)
    m, total = x.shape
    if channels < 1 or total % channels:
        raise InputError(f"cannot split {total} columns into {channels} channel blocks")
    n = total // channels
    return x.reshape(m, channels, n).mean(axis=1)


# ---------------------------------------------------------------------------
# Signal matrix files.
# CSV: one row per sample, one column per vertex.
# Binary: magic GSIG, u32 rows m, u32 columns n, then m*n little-endian f32.

def save_signals_csv(signals: np.ndarray, path: str) -> None:
    signals = validate_signals(signals)
    np.savetxt(path, signals, delimiter=",", fmt="%.10g")


def load_signals_csv(path: str) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise InputError(f"malformed signal CSV {path}: {exc}") from exc
    return validate_signals(data)


def save_signals_binary(signals: np.ndarray, path: str) -> None:
    signals = validate_signals(signals)
    m, n = signals.shape
    with open(path, "wb") as fh:
        fh.write(b"GSIG")
        fh.write(struct.pack("<II", m, n))
        fh.write(signals.astype("<f4").tobytes(order="C"))


def load_signals_binary(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != b"GSIG" or len(blob) < 12:
        raise InputError(f"{path} is not a signal matrix binary (bad magic or header)")
    m, n = struct.unpack_from("<II", blob, 4)
    expect = 12 + 4 * m * n
    if len(blob) < expect:
        raise InputError(f"truncated signal matrix binary {path}")
    data = np.frombuffer(blob, dtype="<f4", count=m * n, offset=12)
    return validate_signals(data.reshape(m, n).astype(np.float64))


def load_signals(path: str) -> np.ndarray:
    """Dispatch on content: binary magic first, CSV otherwise."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == b"GSIG":
        return load_signals_binary(path)
    return load_signals_csv(path)
