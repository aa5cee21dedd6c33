"""FIR multipath plus AWGN channel.

SNR convention: ``snr_db`` is the per-subcarrier SNR of the occupied band,
i.e. mean symbol energy per occupied bin over noise energy per bin after the
receiver FFT.  :func:`add_awgn` works on a plain power ratio; callers that
transmit OFDM pass ``signal_power`` already referred to the occupied band
(see :func:`inband_reference_power`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DegenerateInputError
from .framing import FrameConfig, SampleStream
from .numerics import Rng, as_complex_vec

__all__ = [
    "PRESETS",
    "ChannelModel",
    "add_awgn",
    "apply_fir",
    "frequency_response",
    "inband_reference_power",
    "preset_taps",
]

TWO_TAP_FIR = (0.8 + 0.9j, 0.6 + 0.7j)

PRESETS: dict[str, tuple[complex, ...]] = {
    "two-tap": TWO_TAP_FIR,
    "flat": (1.0 + 0j,),
}


def preset_taps(name: str) -> np.ndarray:
    try:
        return np.array(PRESETS[name], dtype=np.complex128)
    except KeyError:
        raise ConfigError(f"unknown channel preset {name!r}; known: {sorted(PRESETS)}", key="channel") from None


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """Static FIR taps, noise level and a fixed leading delay.

    ``snr_db=None`` means noiseless.
    """

    taps: np.ndarray = field(default_factory=lambda: np.array(TWO_TAP_FIR))
    snr_db: float | None = None
    delay: int = 0
    noise_seed: int = 0

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.complex128).reshape(-1)
        if taps.size == 0 or not np.any(taps):
            raise ConfigError("channel taps must be non-empty and not all zero", key="taps")
        if not np.all(np.isfinite(taps)):
            raise ConfigError("channel taps must be finite", key="taps")
        object.__setattr__(self, "taps", taps)
        if self.delay < 0:
            raise ConfigError(f"delay must be >= 0, got {self.delay}", key="delay")
        if self.snr_db is not None and math.isinf(self.snr_db) and self.snr_db > 0:
            object.__setattr__(self, "snr_db", None)
        elif self.snr_db is not None and not math.isfinite(self.snr_db):
            raise ConfigError(f"snr_db must be finite or +inf, got {self.snr_db}", key="snr_db")

    @classmethod
    def preset(cls, name: str, **kw) -> "ChannelModel":
        return cls(taps=preset_taps(name), **kw)

    @property
    def noiseless(self) -> bool:
        return self.snr_db is None

    def with_snr(self, snr_db: float | None) -> "ChannelModel":
        return replace(self, snr_db=snr_db)

    def transmit(self, stream: SampleStream, rng: Rng | None = None,
                 signal_power: float | None = None) -> SampleStream:
        """Delay, filter and add noise; ``rng`` defaults to one seeded by ``noise_seed``."""
        x = stream.samples
        if self.delay:
            x = np.concatenate((np.zeros(self.delay, dtype=np.complex128), x))
        out = apply_fir(self.taps, SampleStream(x, stream.origin))
        if self.noiseless:
            return out
        return add_awgn(out, self.snr_db, rng or Rng(self.noise_seed), signal_power)


def apply_fir(taps, stream: SampleStream) -> SampleStream:
    """Full linear convolution; output is ``len(taps) - 1`` samples longer."""
    taps = as_complex_vec(taps, "taps")
    return SampleStream(np.convolve(stream.samples, taps), stream.origin)


def add_awgn(stream: SampleStream, snr_db: float | None, rng: Rng,
             signal_power: float | None = None) -> SampleStream:
    """Add circular complex Gaussian noise of variance ``signal_power / 10**(snr_db/10)``.

    ``signal_power`` defaults to the mean power of the whole stream.  Noise is
    added to every sample, including silent stretches.
    """
    x = stream.samples
    if x.size == 0:
        raise DegenerateInputError("cannot add noise to an empty stream")
    if snr_db is None or (math.isinf(snr_db) and snr_db > 0):
        return SampleStream(x.copy(), stream.origin)
    if signal_power is None:
        signal_power = float(np.mean(np.abs(x) ** 2))
    if not signal_power > 0:
        raise DegenerateInputError("signal power is zero; SNR is undefined")
    variance = signal_power / 10.0 ** (snr_db / 10.0)
    return SampleStream(x + rng.complex_normal(x.size, variance), stream.origin)


def frequency_response(taps, n_fft: int) -> np.ndarray:
    """``H[k] = sum_m taps[m] exp(-2j*pi*k*m/n_fft)`` evaluated directly."""
    taps = as_complex_vec(taps, "taps")
    if n_fft < taps.size:
        raise ConfigError(f"n_fft ({n_fft}) shorter than channel ({taps.size} taps)", key="n_fft")
    k = np.arange(n_fft)[:, None]
    m = np.arange(taps.size)[None, :]
    return np.exp(-2j * np.pi * k * m / n_fft) @ taps


def inband_reference_power(cfg: FrameConfig, stream: SampleStream, frame_start: int) -> float:
    """Signal power for the SNR definition, measured on a received frame.

    Mean power over the CP-free parts of the preamble, pilot and data symbols
    (silence excluded), scaled by ``n_fft / n_occ`` so that it refers to the
    occupied bandwidth only.
    """
    local = frame_start - stream.origin + cfg.n_cp
    cols = np.arange(cfg.n_cols - 1)[:, None] * cfg.symbol_len
    seg = stream.samples[local + cols + np.arange(cfg.n_fft)]
    return float(np.mean(np.abs(seg) ** 2)) * cfg.n_fft / cfg.n_occ

