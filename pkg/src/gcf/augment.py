"""Data augmentation: push training signals along proxy translation maps.

A translated copy writes each signal value at the image of its vertex
(``y[psi_p(v)] = x[v]``); vertices nothing maps onto receive a fill value.
Translating by an index where two sources share an image is refused: the
result would depend on write order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ValidationError
from .propagate import ProxyFamily


@dataclass(frozen=True)
class AugmentationSpec:
    """Which translation indices to draw from, how many compositions, what fill."""

    indices: tuple[int, ...]
    repetitions: int = 1
    fill: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        if not self.indices:
            raise InputError("augmentation needs at least one translation index")
        if self.repetitions < 1:
            raise InputError("repetitions must be >= 1")


def translate_signal(f: ProxyFamily, p: int, x: np.ndarray,
                     fill: float = 0.0) -> np.ndarray:
    """One push of ``x`` along translation index ``p``."""
    if not (0 <= p < f.kappa):
        raise InputError(f"translation index {p} out of range for kappa={f.kappa}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (f.n,):
        raise InputError(f"signal must have shape ({f.n},), got {x.shape}")
    y = np.full(f.n, fill, dtype=np.float64)
    written = np.zeros(f.n, dtype=bool)
    for v in range(f.n):
        t = f.psi_value(p, v)
        if t is None:
            continue
        if written[t]:
            sources = [u for u in range(f.n) if f.psi_value(p, u) == t]
            raise ValidationError(
                f"translation index {p} is not injective: vertices {sources} "
                f"all map to {t}; cannot move a signal along it"
            )
        written[t] = True
        y[t] = x[v]
    return y


def translate_signal_repeated(f: ProxyFamily, p: int, x: np.ndarray,
                              times: int, fill: float = 0.0) -> np.ndarray:
    y = np.asarray(x, dtype=np.float64)
    for _ in range(times):
        y = translate_signal(f, p, y, fill)
    return y


def augment_dataset(signals: np.ndarray, f: ProxyFamily, spec: AugmentationSpec,
                    draws: int = 1, seed: int = 0) -> np.ndarray:
    """Original rows followed by ``draws`` translated copies of each row.

    Each copy draws a translation index from ``spec.indices`` and a
    composition count from ``1..spec.repetitions`` uniformly; the generator
    is seeded, so output is a pure function of (signals, spec, draws, seed).
    With ``draws=0`` the input comes back unchanged.
    """
    signals = np.asarray(signals, dtype=np.float64)
    if signals.ndim != 2 or signals.shape[1] != f.n:
        raise InputError(f"signal matrix must be (m, {f.n}), got {signals.shape}")
    for p in spec.indices:
        if not (0 <= p < f.kappa):
            raise InputError(f"translation index {p} out of range for kappa={f.kappa}")
    if draws < 0:
        raise InputError("draws must be >= 0")
    rng = np.random.default_rng(seed)
    blocks = [signals]
    for _ in range(draws):
        block = np.empty_like(signals)
        for i, row in enumerate(signals):
            p = spec.indices[rng.integers(len(spec.indices))]
            times = int(rng.integers(1, spec.repetitions + 1))
            block[i] = translate_signal_repeated(f, p, row, times, spec.fill)
        blocks.append(block)
    return np.concatenate(blocks, axis=0)
