"""OFDM frame construction and parsing.

A frame is four kinds of OFDM symbol sent back to back::

    [CP|preamble] [CP|pilot] [CP|data] ... [CP|silence]

Each column holds ``n_occ`` occupied subcarriers which are placed into an
``n_fft``-point spectrum with ``n_guard`` empty bins on either side.  With the
default ``layout="natural"`` the occupied band sits at FFT bins
``n_guard .. n_guard + n_occ - 1`` (so DC falls inside the guard band);
``layout="centered"`` centres the band on DC instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DimensionError, TruncationError
from .numerics import Rng, fft, ifft, is_power_of_two

__all__ = [
    "FrameConfig",
    "OfdmFrame",
    "SampleStream",
    "assemble_frame",
    "demap_subcarriers",
    "frame_to_samples",
    "generate_pilot",
    "generate_preamble",
    "map_subcarriers",
    "occupied_bins",
    "samples_to_frame",
]

LAYOUTS = ("natural", "centered")


@dataclass(frozen=True)
class FrameConfig:
    """Static link parameters.  Defaults follow the reference testbed."""

    n_fft: int = 128
    n_occ: int = 48
    n_guard: int | None = None
    n_cp: int = 16
    n_data_cols: int = 1
    power_scaling: bool = False
    pilot_seed: int = 11
    preamble_seed: int = 7
    layout: str = "natural"

    def __post_init__(self):
        if self.n_guard is None:
            object.__setattr__(self, "n_guard", (self.n_fft - self.n_occ) // 2)
        for key in ("n_fft", "n_occ", "n_guard", "n_cp", "n_data_cols", "pilot_seed", "preamble_seed"):
            if not isinstance(getattr(self, key), (int, np.integer)) or isinstance(getattr(self, key), bool):
                raise ConfigError(f"{key} must be an integer", key=key)
        if not is_power_of_two(self.n_fft) or self.n_fft < 4:
            raise ConfigError(f"n_fft must be a power of two >= 4, got {self.n_fft}", key="n_fft")
        if self.n_occ <= 0 or self.n_occ % 2:
            raise ConfigError(f"n_occ must be a positive even number, got {self.n_occ}", key="n_occ")
        if self.n_guard < 0 or self.n_occ + 2 * self.n_guard != self.n_fft:
            raise ConfigError(
                f"n_occ + 2*n_guard must equal n_fft ({self.n_occ} + 2*{self.n_guard} != {self.n_fft})",
                key="n_guard",
            )
        if not 0 <= self.n_cp < self.n_fft:
            raise ConfigError(f"n_cp must lie in [0, n_fft), got {self.n_cp}", key="n_cp")
        if self.n_data_cols < 1:
            raise ConfigError(f"n_data_cols must be >= 1, got {self.n_data_cols}", key="n_data_cols")
        for key in ("pilot_seed", "preamble_seed"):
            if not 0 <= getattr(self, key) < 2**64:
                raise ConfigError(f"{key} must be a 64-bit unsigned integer", key=key)
        if self.layout not in LAYOUTS:
            raise ConfigError(f"layout must be one of {LAYOUTS}, got {self.layout!r}", key="layout")

    @property
    def n_cols(self) -> int:
        return 3 + self.n_data_cols

    @property
    def symbol_len(self) -> int:
        return self.n_fft + self.n_cp

    @property
    def frame_len(self) -> int:
        return self.n_cols * self.symbol_len

    @property
    def bits_per_frame(self) -> int:
        return self.n_occ * self.n_data_cols


@dataclass(frozen=True, eq=False)
class OfdmFrame:
    """Frequency-domain frame ``[g | p | D | z]`` on the occupied subcarriers."""

    preamble: np.ndarray
    pilot: np.ndarray
    data: np.ndarray
    silence: np.ndarray

    @property
    def columns(self) -> np.ndarray:
        """All columns as an ``(n_cols, n_occ)`` array in transmit order."""
        return np.vstack([self.preamble, self.pilot, self.data.T, self.silence])

    @property
    def n_cols(self) -> int:
        return 3 + self.data.shape[1]


@dataclass(frozen=True, eq=False)
class SampleStream:
    """Complex baseband samples; ``origin`` is the absolute index of ``samples[0]``."""

    samples: np.ndarray
    origin: int = 0
    column_scales: tuple[float, ...] | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def end(self) -> int:
        return self.origin + self.samples.size


@lru_cache(maxsize=64)
def occupied_bins(cfg: FrameConfig) -> np.ndarray:
    """FFT bin index of each occupied subcarrier, in subcarrier order."""
    if cfg.layout == "natural":
        bins = np.arange(cfg.n_guard, cfg.n_guard + cfg.n_occ)
    else:
        bins = (np.arange(cfg.n_guard, cfg.n_guard + cfg.n_occ) - cfg.n_fft // 2) % cfg.n_fft
    bins.setflags(write=False)
    return bins


def map_subcarriers(cfg: FrameConfig, col) -> np.ndarray:
    """Place ``n_occ`` symbols into an ``n_fft`` spectrum; works on stacked columns too."""
    col = np.asarray(col, dtype=np.complex128)
    if col.ndim == 0 or col.shape[-1] != cfg.n_occ:
        raise DimensionError(f"expected {cfg.n_occ} subcarriers, got shape {col.shape}")
    out = np.zeros((*col.shape[:-1], cfg.n_fft), dtype=np.complex128)
    out[..., occupied_bins(cfg)] = col
    return out


def demap_subcarriers(cfg: FrameConfig, spectrum) -> np.ndarray:
    spectrum = np.asarray(spectrum, dtype=np.complex128)
    if spectrum.ndim == 0 or spectrum.shape[-1] != cfg.n_fft:
        raise DimensionError(f"expected {cfg.n_fft} bins, got shape {spectrum.shape}")
    return spectrum[..., occupied_bins(cfg)]


@lru_cache(maxsize=64)
def _preamble(cfg: FrameConfig) -> np.ndarray:
    rng = Rng(cfg.preamble_seed)
    g = np.zeros(cfg.n_occ, dtype=np.complex128)
    # only even FFT bins are loaded, which makes the time symbol two identical halves
    even = occupied_bins(cfg) % 2 == 0
    n = int(even.sum())
    g[even] = rng.signs(n) + 1j * rng.signs(n)
    g.setflags(write=False)
    return g


@lru_cache(maxsize=64)
def _pilot(cfg: FrameConfig) -> np.ndarray:
    p = Rng(cfg.pilot_seed).signs(cfg.n_occ).astype(np.complex128)
    p.setflags(write=False)
    return p


def generate_preamble(cfg: FrameConfig) -> np.ndarray:
    """Seeded synchronisation preamble.

    Subcarriers on even FFT bins carry ``±1 ± 1j`` (QPSK scaled by sqrt(2)),
    the rest are zero.  For the default layout that means odd occupied indices
    are zero.
    """
    return _preamble(cfg).copy()


def generate_pilot(cfg: FrameConfig) -> np.ndarray:
    """Seeded block-type pilot: ``±1`` on every occupied subcarrier."""
    return _pilot(cfg).copy()


def assemble_frame(cfg: FrameConfig, data_symbols) -> OfdmFrame:
    data = np.asarray(data_symbols, dtype=np.complex128)
    if data.ndim == 1 and cfg.n_data_cols == 1:
        data = data[:, None]
    if data.shape != (cfg.n_occ, cfg.n_data_cols):
        raise DimensionError(
            f"data must have shape ({cfg.n_occ}, {cfg.n_data_cols}), got {data.shape}"
        )
    return OfdmFrame(
        preamble=generate_preamble(cfg),
        pilot=generate_pilot(cfg),
        data=data.copy(),
        silence=np.zeros(cfg.n_occ, dtype=np.complex128),
    )


def frame_to_samples(cfg: FrameConfig, frame: OfdmFrame) -> SampleStream:
    """Serialize a frame: map, IFFT, optional per-column RMS scaling, add CP.

    When ``cfg.power_scaling`` is on, each column's time samples are divided by
    their RMS; zero-energy columns (silence) are left alone.  The factors that
    were applied are kept on the returned stream as ``column_scales``.
    """
    cols = frame.columns
    if cols.shape != (cfg.n_cols, cfg.n_occ):
        raise DimensionError(f"frame does not match config: {cols.shape} columns")
    body = ifft(map_subcarriers(cfg, cols))
    scales = np.ones(cfg.n_cols)
    if cfg.power_scaling:
        rms = np.sqrt(np.mean(np.abs(body) ** 2, axis=-1))
        nz = rms > 0
        scales[nz] = 1.0 / rms[nz]
        body = body * scales[:, None]
    if cfg.n_cp:
        body = np.concatenate((body[:, -cfg.n_cp:], body), axis=-1)
    return SampleStream(body.reshape(-1), 0, tuple(float(s) for s in scales))


def samples_to_frame(cfg: FrameConfig, stream: SampleStream, start: int) -> OfdmFrame:
    """Cut one frame out of ``stream`` beginning at absolute index ``start``.

    ``start`` is the first sample of the preamble's cyclic prefix.  The prefix
    itself is discarded, so ``start`` may precede the stream by up to ``n_cp``
    samples.
    """
    local = int(start) - stream.origin
    if local + cfg.n_cp < 0 or local + cfg.frame_len > len(stream):
        raise TruncationError(
            f"frame at {start} needs samples [{start}, {start + cfg.frame_len}) "
            f"but stream covers [{stream.origin}, {stream.end})"
        )
    first = local + cfg.n_cp
    idx = first + np.arange(cfg.n_cols)[:, None] * cfg.symbol_len + np.arange(cfg.n_fft)
    cols = demap_subcarriers(cfg, fft(stream.samples[idx]))
    return OfdmFrame(preamble=cols[0], pilot=cols[1], data=cols[2:-1].T, silence=cols[-1])
