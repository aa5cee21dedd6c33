"""Least-squares channel estimate, zero-forcing equalizer and SNR estimate."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

__all__ = [
    "ChannelEstimate",
    "Equalizer",
    "build_zf",
    "equalize",
    "estimate_snr",
    "ls_estimate",
    "write_chanest_csv",
]

DEFAULT_FLOOR_FACTOR = 1e-6


@dataclass(frozen=True, eq=False)
class ChannelEstimate:
    """Per-subcarrier complex gain ``h_hat``.

    ``regularization_floor`` is the smallest ``|h_hat|`` the ZF equalizer will
    invert exactly; ``None`` selects ``1e-6 * max|h_hat|`` and ``0`` turns
    clamping off.
    """

    h_hat: np.ndarray
    regularization_floor: float | None = None

    @property
    def floor(self) -> float:
        if self.regularization_floor is None:
            return DEFAULT_FLOOR_FACTOR * float(np.max(np.abs(self.h_hat), initial=0.0))
        return float(self.regularization_floor)


@dataclass(frozen=True, eq=False)
class Equalizer:
    """Diagonal of the ZF matrix; ``clamped[k]`` marks bins below the floor."""

    inverse_gains: np.ndarray
    clamped: np.ndarray

    @classmethod
    def identity(cls, n: int) -> "Equalizer":
        return cls(np.ones(n, dtype=np.complex128), np.zeros(n, dtype=bool))


def ls_estimate(p_hat, p, regularization_floor: float | None = None) -> ChannelEstimate:
    p_hat = np.asarray(p_hat, dtype=np.complex128)
    p = np.asarray(p, dtype=np.complex128)
    if p_hat.shape != p.shape or p.ndim != 1:
        raise DimensionError(f"received pilot {p_hat.shape} and reference pilot {p.shape} differ")
    if np.any(p == 0):
        raise ValueError("reference pilot has zero entries")
    return ChannelEstimate(p_hat / p, regularization_floor)


def build_zf(est: ChannelEstimate) -> Equalizer:
    """Invert ``h_hat`` bin by bin.

    Bins with ``|h_hat| < floor`` get ``conj(h_hat) / floor**2`` instead of the
    reciprocal and are flagged; this keeps deep fades finite.
    """
    h = est.h_hat
    floor = est.floor
    mag = np.abs(h)
    clamped = mag < floor if floor > 0 else np.zeros(h.shape, dtype=bool)
    inv = np.empty_like(h)
    inv[~clamped] = 1.0 / h[~clamped]
    if clamped.any():
        inv[clamped] = np.conj(h[clamped]) / floor**2
    return Equalizer(inv, clamped)


def equalize(eq: Equalizer, d_hat) -> np.ndarray:
    d_hat = np.asarray(d_hat, dtype=np.complex128)
    if d_hat.ndim not in (1, 2) or d_hat.shape[0] != eq.inverse_gains.size:
        raise DimensionError(f"data has {d_hat.shape} rows, equalizer has {eq.inverse_gains.size} bins")
    gains = eq.inverse_gains if d_hat.ndim == 1 else eq.inverse_gains[:, None]
    return gains * d_hat


def estimate_snr(g_hat, z_hat, corrected: bool = False) -> float:
    """Preamble-to-silence energy ratio in dB.

    The plain ratio measures (signal + noise) / noise, so it reads
    ``10*log10(1 + snr)``.  ``corrected=True`` subtracts the silence energy
    from the preamble energy first and returns ``-inf`` if nothing is left.
    Zero silence energy gives ``+inf``.
    """
    g_hat = np.asarray(g_hat)
    z_hat = np.asarray(z_hat)
    if g_hat.shape != z_hat.shape:
        raise DimensionError(f"preamble {g_hat.shape} and silence {z_hat.shape} differ in length")
    num = float(np.sum(np.abs(g_hat) ** 2))
    den = float(np.sum(np.abs(z_hat) ** 2))
    if den == 0.0:
        return math.inf
    if corrected:
        num -= den
        if num <= 0.0:
            return -math.inf
    if num == 0.0:
        return -math.inf
    return 10.0 * math.log10(num / den)


def write_chanest_csv(path, bins, h_true, h_est) -> None:
    """Dump true and estimated per-bin response as ``bin,true_re,true_im,est_re,est_im``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin", "true_re", "true_im", "est_re", "est_im"])
        for k, t, e in zip(bins, h_true, h_est):
            w.writerow([int(k), repr(float(t.real)), repr(float(t.imag)), repr(float(e.real)), repr(float(e.imag))])
