"""Monte-Carlo link runner: TX -> channel -> sync -> LS/ZF -> demap -> BER.

Every frame gets a random leading delay of ``0..max_delay`` samples, so the
synchronizer is exercised on every frame.  A frame the synchronizer misses
is booked as half of its bits in error.  All randomness for one run comes
from a single :class:`~linklab.numerics.Rng`; sweep points use independent
child streams derived from ``(master_seed, point_index)``, so serial and
parallel sweeps produce identical numbers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .channel import ChannelModel, add_awgn, apply_fir, frequency_response, inband_reference_power
from .errors import ConfigError, TruncationError
from .estimation import Equalizer, build_zf, equalize, estimate_snr, ls_estimate, write_chanest_csv
from .framing import (
    FrameConfig,
    SampleStream,
    assemble_frame,
    frame_to_samples,
    generate_pilot,
    occupied_bins,
    samples_to_frame,
)
from .modem import DEFAULT_MESSAGE, bpsk_demap, bpsk_map, message_to_bits
from .numerics import Rng
from .sync import DEFAULT_THRESHOLD, detect_frame

__all__ = [
    "BLOCK_BITS",
    "BerReport",
    "ChanestResult",
    "SweepResult",
    "channel_estimation_experiment",
    "run_link",
    "snr_estimates",
    "sweep_snr",
]

BLOCK_BITS = 100_000
MAX_DELAY = 256


@dataclass
class BerReport:
    bits_total: int = 0
    bit_errors: int = 0
    block_history: list[tuple[int, float]] = field(default_factory=list)
    remainder_bits: int = 0
    remainder_errors: int = 0
    snr_configured: float | None = None
    snr_estimated_mean: float = math.nan
    frames_detected: int = 0
    frames_missed: int = 0
    block_size: int = BLOCK_BITS

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total if self.bits_total else 0.0

    @property
    def frames_total(self) -> int:
        return self.frames_detected + self.frames_missed

    @property
    def missed_fraction(self) -> float:
        return self.frames_missed / self.frames_total if self.frames_total else 0.0

    def add_errors(self, errors: np.ndarray) -> None:
        """Append a run of per-bit error flags, closing blocks as they fill."""
        errors = np.asarray(errors, dtype=bool)
        pos = 0
        while pos < errors.size:
            take = min(self.block_size - self.remainder_bits, errors.size - pos)
            n_err = int(np.count_nonzero(errors[pos:pos + take]))
            self.remainder_bits += take
            self.remainder_errors += n_err
            self.bits_total += take
            self.bit_errors += n_err
            pos += take
            if self.remainder_bits == self.block_size:
                self.block_history.append((len(self.block_history), self.remainder_errors / self.block_size))
                self.remainder_bits = 0
                self.remainder_errors = 0

    def write_blocks_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["block_index", "ber"])
            for idx, ber in self.block_history:
                w.writerow([idx, repr(float(ber))])


@dataclass
class SweepResult:
    rows: list[tuple[float, float, float, float]]
    reports: list[BerReport] = field(default_factory=list, repr=False)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["snr_db", "ber", "snr_est_mean", "missed_frac"])
            for row in self.rows:
                w.writerow([repr(float(v)) for v in row])


@dataclass
class ChanestResult:
    bins: np.ndarray
    h_true: np.ndarray
    h_est: np.ndarray
    frames: int

    @property
    def max_abs_error(self) -> float:
        return float(np.max(np.abs(self.h_est - self.h_true)))

    @property
    def ratio(self) -> np.ndarray:
        return self.h_est / self.h_true

    def write_csv(self, path) -> None:
        write_chanest_csv(path, self.bins, self.h_true, self.h_est)


def _timing_rotation(cfg: FrameConfig, offset: int) -> np.ndarray:
    # an FFT window that starts `offset` samples late sees exp(+2j*pi*k*offset/N)
    return np.exp(2j * np.pi * occupied_bins(cfg) * offset / cfg.n_fft)


def _transmit_frame(cfg: FrameConfig, ch: ChannelModel, bits: np.ndarray, delay: int,
                    rng: Rng, tail: int) -> tuple[SampleStream, SampleStream]:
    symbols = bpsk_map(bits).reshape(cfg.n_data_cols, cfg.n_occ).T
    tx = frame_to_samples(cfg, assemble_frame(cfg, symbols))
    x = np.concatenate((np.zeros(delay, dtype=np.complex128), tx.samples,
                        np.zeros(tail, dtype=np.complex128)))
    y = apply_fir(ch.taps, SampleStream(x))
    if not ch.noiseless:
        y = add_awgn(y, ch.snr_db, rng, inband_reference_power(cfg, y, delay))
    return tx, y


def _run_link(cfg: FrameConfig, ch: ChannelModel, n_bits: int, rng: Rng, *,
              threshold: float = DEFAULT_THRESHOLD, max_delay: int = MAX_DELAY,
              ideal_timing: bool = False, ideal_csi: bool = False,
              message: bytes = DEFAULT_MESSAGE, corrected_snr: bool = False,
              regularization_floor: float | None = None,
              block_size: int = BLOCK_BITS) -> BerReport:
    if n_bits < block_size:
        raise ConfigError(f"n_bits must be at least {block_size}, got {n_bits}", key="n_bits")
    if max_delay < 0:
        raise ConfigError("max_delay must be >= 0", key="max_delay")
    msg_bits = message_to_bits(message)
    capacity = cfg.bits_per_frame
    n_frames = -(-n_bits // capacity)
    pilot = generate_pilot(cfg)
    true_gain = frequency_response(ch.taps, cfg.n_fft)[occupied_bins(cfg)] if ideal_csi else None
    missed_pattern = np.arange(capacity) % 2 == 0
    tail = cfg.n_fft // 2

    report = BerReport(snr_configured=ch.snr_db, block_size=block_size)
    snr_estimates = []
    for i in range(n_frames):
        count = min(capacity, n_bits - i * capacity)
        bits = msg_bits[(i * capacity + np.arange(capacity)) % msg_bits.size]
        delay = int(rng.integers(0, max_delay)) + ch.delay
        tx, y = _transmit_frame(cfg, ch, bits, delay, rng, tail)

        if ideal_timing:
            start = delay
        else:
            sync = detect_frame(y, cfg, threshold)
            start = sync.start_index if sync.detected else None
        rx = None
        if start is not None:
            try:
                rx = samples_to_frame(cfg, y, start)
            except TruncationError:
                rx = None
        if rx is None:
            report.frames_missed += 1
            report.add_errors(missed_pattern[:count])
            continue
        report.frames_detected += 1

        if ideal_csi:
            rot = _timing_rotation(cfg, start - delay)
            scales = np.asarray(tx.column_scales[2:-1])
            gains = true_gain * rot
            data = np.column_stack([
                equalize(Equalizer(1.0 / (gains * s), np.zeros(cfg.n_occ, bool)), rx.data[:, j])
                for j, s in enumerate(scales)
            ])
        else:
            eq = build_zf(ls_estimate(rx.pilot, pilot, regularization_floor))
            data = equalize(eq, rx.data)
        bits_hat = bpsk_demap(data.T.reshape(-1))
        report.add_errors((bits_hat != bits)[:count])
        snr_estimates.append(estimate_snr(rx.preamble, rx.silence, corrected_snr))

    if snr_estimates:
        report.snr_estimated_mean = float(np.mean(snr_estimates))
    return report


def run_link(cfg: FrameConfig, ch: ChannelModel, n_bits: int, master_seed: int, **kw) -> BerReport:
    """Send ``ceil(n_bits / capacity)`` frames through ``ch`` and count bit errors.

    Keyword options:

    ``threshold``
        sync detection threshold (default 0.5).
    ``max_delay``
        upper bound of the random per-frame delay (default 256).
    ``ideal_timing``
        skip synchronization and cut the frame at its true start.
    ``ideal_csi``
        equalize with the true channel response instead of the LS estimate.
    ``message``
        payload bytes, repeated cyclically (default ``1..20``).
    ``corrected_snr``
        report the noise-corrected SNR estimate.
    ``regularization_floor``
        ZF clamping floor, ``None`` for the relative default.
    """
    return _run_link(cfg, ch, n_bits, Rng(master_seed), **kw)


def _sweep_point(args, cfg, ch_template, n_bits, master_seed, kw):
    index, snr = args
    return _run_link(cfg, ch_template.with_snr(snr), n_bits, Rng.derive(master_seed, index), **kw)


def sweep_snr(cfg: FrameConfig, ch_template: ChannelModel, snr_list, n_bits_per_point: int,
              master_seed: int, workers: int = 1, **kw) -> SweepResult:
    """Run :func:`run_link` at every SNR; rows come back sorted by SNR."""
    snrs = sorted(float(s) for s in snr_list)
    if not snrs:
        raise ConfigError("snr_list must not be empty", key="snr_list")
    job = partial(_sweep_point, cfg=cfg, ch_template=ch_template, n_bits=n_bits_per_point,
                  master_seed=master_seed, kw=kw)
    points = list(enumerate(snrs))
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(points))) as pool:
            reports = list(pool.map(job, points))
    else:
        reports = [job(p) for p in points]
    rows = [(s, r.ber, r.snr_estimated_mean, r.missed_fraction) for s, r in zip(snrs, reports)]
    return SweepResult(rows, reports)


def channel_estimation_experiment(cfg: FrameConfig, ch: ChannelModel, snr_db: float | None,
                                  n_frames: int, seed: int) -> ChanestResult:
    """Average the LS estimate over ``n_frames`` frames and pair it with the true response.

    Frames are cut at their known start (the channel's fixed delay), so the
    comparison isolates estimation error from timing error.
    """
    if n_frames < 1:
        raise ConfigError(f"n_frames must be >= 1, got {n_frames}", key="n_frames")
    ch = ch.with_snr(snr_db)
    rng = Rng(seed)
    pilot = generate_pilot(cfg)
    bins = occupied_bins(cfg)
    acc = np.zeros(cfg.n_occ, dtype=np.complex128)
    for _ in range(n_frames):
        bits = (rng.integers(0, 1, cfg.bits_per_frame)).astype(np.uint8)
        _, y = _transmit_frame(cfg, ch, bits, ch.delay, rng, cfg.n_fft // 2)
        rx = samples_to_frame(cfg, y, ch.delay)
        acc += ls_estimate(rx.pilot, pilot).h_hat
    h_true = frequency_response(ch.taps, cfg.n_fft)[bins]
    return ChanestResult(bins=np.array(bins), h_true=h_true, h_est=acc / n_frames, frames=n_frames)


def snr_estimates(cfg: FrameConfig, ch: ChannelModel, n_frames: int, seed: int, *,
                  threshold: float = DEFAULT_THRESHOLD, corrected: bool = False) -> np.ndarray:
    """Preamble/silence SNR estimate (dB) of each detected frame out of ``n_frames``."""
    rng = Rng(seed)
    out = []
    for _ in range(n_frames):
        bits = rng.integers(0, 1, cfg.bits_per_frame).astype(np.uint8)
        delay = int(rng.integers(0, MAX_DELAY)) + ch.delay
        _, y = _transmit_frame(cfg, ch, bits, delay, rng, cfg.n_fft // 2)
        sync = detect_frame(y, cfg, threshold)
        if not sync.detected:
            continue
        try:
            rx = samples_to_frame(cfg, y, sync.start_index)
        except TruncationError:
            continue
        out.append(estimate_snr(rx.preamble, rx.silence, corrected))
    return np.array(out)
