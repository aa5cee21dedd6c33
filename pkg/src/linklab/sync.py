"""Frame timing from the repeated-half preamble (Schmidl & Cox metric)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, TruncationError
from .framing import FrameConfig, SampleStream

__all__ = ["DEFAULT_THRESHOLD", "SyncResult", "detect_frame", "longest_run", "timing_metric"]

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class SyncResult:
    detected: bool
    start_index: int
    peak_metric: float


def _window_sum(x: np.ndarray, n: int) -> np.ndarray:
    # explicit per-window sums: exact zeros on silent stretches and shift-invariant
    return sliding_window_view(x, n).sum(axis=-1)


def timing_metric(stream, half_len: int, normalization: str = "second_half") -> np.ndarray:
    """Timing metric ``M(d) = |P(d)|^2 / R(d)^2`` for ``d = 0 .. len - 2*half_len``.

    ``P(d)`` correlates the window ``[d, d+L)`` with ``[d+L, d+2L)``.  With the
    default normalization ``R(d)`` is the energy of the second half; windows
    where it vanishes give ``M = 0``.  That form is unbounded where the signal
    energy drops, e.g. a data symbol followed by silence gives ``M`` of about
    ``snr / L``.  ``"max"`` divides by the larger of the two half-window
    energies and ``"symmetric"`` by their mean; both keep ``M <= 1``.
    """
    s = stream.samples if isinstance(stream, SampleStream) else np.asarray(stream, dtype=np.complex128)
    L = int(half_len)
    if L < 1:
        raise ConfigError(f"half_len must be positive, got {half_len}", key="half_len")
    if s.size < 2 * L:
        raise TruncationError(f"stream of {s.size} samples is shorter than 2*half_len = {2 * L}")
    P = _window_sum(np.conj(s[:-L]) * s[L:], L)
    energy = np.abs(s) ** 2
    if normalization == "second_half":
        R = _window_sum(energy[L:], L)
    elif normalization == "max":
        R = np.maximum(_window_sum(energy[:-L], L), _window_sum(energy[L:], L))
    elif normalization == "symmetric":
        R = 0.5 * (_window_sum(energy[:-L], L) + _window_sum(energy[L:], L))
    else:
        raise ConfigError(f"unknown normalization {normalization!r}", key="normalization")
    M = np.zeros(R.size)
    ok = R > 0
    M[ok] = np.abs(P[ok]) ** 2 / R[ok] ** 2
    return M


def longest_run(mask: np.ndarray) -> tuple[int, int] | None:
    """``(first, last)`` indices of the longest run of True (earliest on ties)."""
    if not mask.any():
        return None
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    best = int(np.argmax(ends - starts))
    return int(starts[best]), int(ends[best])


def detect_frame(stream: SampleStream, cfg: FrameConfig, threshold: float = DEFAULT_THRESHOLD,
                 normalization: str = "max") -> SyncResult:
    """Locate the preamble in ``stream``.

    Takes the longest run of ``M(d) >= threshold`` and returns its midpoint
    minus ``n_cp``.  The metric plateau spans the preamble's cyclic prefix, so
    its midpoint is ``n_cp/2`` past the true CP start; backing off a full
    ``n_cp`` lands the estimate half a prefix early, which puts the FFT window
    in the middle of the ISI-free region.  The stream is zero-padded by
    ``n_fft/2`` on both sides so a preamble at the very start still yields a
    symmetric plateau; the returned index may therefore be negative.

    The default ``"max"`` normalization equals the second-half one on the
    plateau and its ramps but does not light up where a symbol is followed by
    silence.
    """
    if not 0 < threshold < 1:
        raise ConfigError(f"threshold must lie in (0, 1), got {threshold}", key="threshold")
    L = cfg.n_fft // 2
    pad = np.zeros(L, dtype=np.complex128)
    M = timing_metric(np.concatenate((pad, stream.samples, pad)), L, normalization)
    run = longest_run(M >= threshold)
    if run is None:
        return SyncResult(False, stream.origin, float(M.max(initial=0.0)))
    first, last = run
    mid = (first + last) // 2
    start = stream.origin + mid - L - cfg.n_cp
    return SyncResult(True, int(start), float(M[first:last + 1].max()))
