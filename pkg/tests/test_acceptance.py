"""Exit criteria for the simulator.  Each test prints one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from linklab.channel import TWO_TAP_FIR, ChannelModel, add_awgn, apply_fir, frequency_response, inband_reference_power
from linklab.estimation import ls_estimate
from linklab.framing import (
    FrameConfig,
    SampleStream,
    assemble_frame,
    frame_to_samples,
    generate_pilot,
    occupied_bins,
    samples_to_frame,
)
from linklab.harness import channel_estimation_experiment, run_link, snr_estimates, sweep_snr
from linklab.modem import bpsk_map
from linklab.numerics import Rng, direct_dft, fft, ifft
from linklab.sync import detect_frame

CFG = FrameConfig()
FLAT = ChannelModel.preset("flat")
TWO_TAP = ChannelModel.preset("two-tap")


def record(number, title, passed, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {number}. {title}: {detail}")
    assert passed, detail


def q_function(x):
    return 0.5 * math.erfc(x / math.sqrt(2))


def binomial_sigma(p, n):
    return math.sqrt(p * (1 - p) / n)


def test_1_fft_oracle_equivalence():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst_dft = worst_trip = 0.0
    for n in (2**k for k in range(1, 9)):
        for _ in range(100):
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            worst_dft = max(worst_dft, np.max(np.abs(fft(x) - direct_dft(x))))
            worst_trip = max(worst_trip, np.max(np.abs(ifft(fft(x)) - x)))
    elapsed = time.perf_counter() - t0
    record(1, "FFT oracle equivalence", worst_dft < 1e-9 and worst_trip < 1e-12 and elapsed < 5,
           f"max|fft-dft|={worst_dft:.2e} (<1e-9), max|ifft(fft(x))-x|={worst_trip:.2e} (<1e-12), {elapsed:.2f}s (<5s)")


def test_2_frame_geometry():
    data = bpsk_map(np.random.default_rng(2).integers(0, 2, 48))[:, None]
    s = frame_to_samples(CFG, assemble_frame(CFG, data)).samples
    cols = s.reshape(CFG.n_cols, CFG.symbol_len)
    cp_ok = all(np.array_equal(c[:16], c[128:144]) for c in cols)
    record(2, "Frame geometry", s.size == 576 and cp_ok,
           f"{s.size} samples per frame (576), CP c[i]=c[i+128] on all {len(cols)} columns: {cp_ok}")


def test_3_exact_ls_recovery():
    data = bpsk_map(np.random.default_rng(3).integers(0, 2, 48))[:, None]
    tx = frame_to_samples(CFG, assemble_frame(CFG, data))
    rx = samples_to_frame(CFG, apply_fir(TWO_TAP_FIR, tx), 0)
    H = frequency_response(TWO_TAP_FIR, CFG.n_fft)[occupied_bins(CFG)]
    err = np.max(np.abs(ls_estimate(rx.pilot, generate_pilot(CFG)).h_hat - H))
    rep = run_link(CFG, TWO_TAP, 100_000, 3)
    record(3, "Exact LS recovery", err < 1e-6 and rep.ber == 0 and rep.bits_total == 100_000,
           f"max per-bin |h_hat-H|={err:.2e} (<1e-6), end-to-end BER={rep.ber} over {rep.bits_total} bits")


def test_4_awgn_oracle():
    # coherent BPSK reference: receiver given the true channel and frame start
    t0 = time.perf_counter()
    parts, ok = [], True
    for gamma_db, seed in ((0.0, 40), (4.0, 44), (8.0, 48)):
        n = 1_000_000
        rep = run_link(CFG, FLAT.with_snr(gamma_db), n, seed, ideal_timing=True, ideal_csi=True)
        p = q_function(math.sqrt(2 * 10 ** (gamma_db / 10)))
        z = (rep.ber - p) / binomial_sigma(p, n)
        ok &= abs(z) <= 3 and rep.bits_total == n
        parts.append(f"{gamma_db:g}dB ber={rep.ber:.4g} oracle={p:.4g} z={z:+.2f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120
    record(4, "AWGN oracle", ok, "; ".join(parts) + f"; {elapsed:.1f}s (<120s)")


def test_5_two_tap_fir_curve():
    n = 1_000_000
    rep = run_link(CFG, TWO_TAP.with_snr(16.0), n, 5)
    sweep = sweep_snr(CFG, TWO_TAP, range(0, 21, 2), 200_000, 55)
    bers = [r[1] for r in sweep.rows]
    worst = 0.0
    for a, b in zip(bers, bers[1:]):
        sigma = math.hypot(binomial_sigma(a, 200_000), binomial_sigma(b, 200_000))
        if b > a:
            worst = max(worst, (b - a) / sigma if sigma else math.inf)
    ok = rep.ber < 1e-3 and worst <= 2
    curve = ", ".join(f"{s:g}:{b:.2g}" for s, b, *_ in sweep.rows)
    record(5, "Two-tap FIR curve", ok,
           f"BER@16dB={rep.ber:.3g} over {rep.bits_total} bits (<1e-3); worst rise {worst:.2f} sigma (<=2); sweep {curve}")


def test_6_snr_estimator():
    parts, ok = [], True
    for gamma in (10.0, 20.0, 30.0):
        est = snr_estimates(CFG, FLAT.with_snr(gamma), 100, int(gamma))
        expected = gamma + 10 * math.log10(1 + 10 ** (-gamma / 10))
        mean = float(np.mean(est))
        ok &= est.size >= 90 and abs(mean - expected) <= 0.5
        parts.append(f"{gamma:g}dB mean={mean:.2f} expected={expected:.2f} ({est.size} frames)")
    record(6, "SNR estimator", ok, "; ".join(parts))


def _sync_trials(ch, seed):
    rng = Rng(seed)
    hits, errors = 0, []
    for _ in range(100):
        o = int(rng.integers(0, 500))
        bits = rng.integers(0, 1, 48)
        tx = frame_to_samples(CFG, assemble_frame(CFG, bpsk_map(bits)[:, None])).samples
        y = apply_fir(ch.taps, SampleStream(np.concatenate([np.zeros(o), tx, np.zeros(64)])))
        y = add_awgn(y, 20.0, rng, inband_reference_power(CFG, y, o))
        res = detect_frame(y, CFG, 0.5)
        if res.detected:
            errors.append(res.start_index - o)
            hits += -16 <= res.start_index - o <= 0
    return hits, errors


def test_7_sync_robustness():
    parts, ok = [], True
    for name, ch, seed in (("flat", FLAT, 70), ("two-tap", TWO_TAP, 71)):
        hits, errors = _sync_trials(ch, seed)
        ok &= hits >= 99
        parts.append(f"{name}: {hits}/100 in [-16,0], error range [{min(errors)},{max(errors)}]")
    false_alarms = sum(detect_frame(SampleStream(Rng(1000 + s).complex_normal(1000)), CFG, 0.5).detected
                       for s in range(100))
    ok &= false_alarms <= 1
    parts.append(f"noise-only false alarms {false_alarms}/100")
    record(7, "Sync robustness", ok, "; ".join(parts))


def test_8_power_scaling_bias():
    scaled_cfg = FrameConfig(power_scaling=True)
    res = channel_estimation_experiment(scaled_cfg, TWO_TAP, None, 5, 8)
    ratio = res.ratio
    var = float(np.var(ratio))
    positive = bool(np.all(np.abs(ratio.imag) < 1e-9) and np.all(ratio.real > 0))
    off = run_link(CFG, TWO_TAP, 100_000, 8)
    on = run_link(scaled_cfg, TWO_TAP, 100_000, 8)
    noisy_off = run_link(CFG, TWO_TAP.with_snr(10.0), 100_000, 8)
    noisy_on = run_link(scaled_cfg, TWO_TAP.with_snr(10.0), 100_000, 8)
    ok = var < 1e-10 and positive and ratio.real.mean() > 1 and off.ber == on.ber and \
        noisy_off.bit_errors == noisy_on.bit_errors
    record(8, "Power-scaling bias", ok,
           f"est/true ratio={ratio.real.mean():.4f} (var {var:.1e} <1e-10, positive real: {positive}); "
           f"BER noiseless off/on={off.ber}/{on.ber}, 10dB off/on={noisy_off.ber}/{noisy_on.ber}")


def test_9_determinism(tmp_path):
    def outputs(tag, workers):
        d = tmp_path / tag
        d.mkdir()
        sweep_snr(CFG, TWO_TAP, [6.0, 10.0, 14.0], 100_000, 99, workers=workers).write_csv(d / "sweep.csv")
        run_link(CFG, TWO_TAP.with_snr(9.0), 200_000, 99).write_blocks_csv(d / "ber_blocks.csv")
        channel_estimation_experiment(CFG, TWO_TAP, 20.0, 10, 99).write_csv(d / "chanest.csv")
        return {p.name: p.read_bytes() for p in d.iterdir()}

    serial_a, serial_b, parallel = outputs("a", 1), outputs("b", 1), outputs("c", 3)
    ok = serial_a == serial_b == parallel
    record(9, "Determinism", ok, f"{len(serial_a)} CSVs byte-identical across two serial runs and a 3-worker run: {ok}")
