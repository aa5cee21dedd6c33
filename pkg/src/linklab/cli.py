"""Command-line front end.

Settings come from four places; later ones win::

    built-in defaults < LINKLAB_SEED (seed only) < --config file < flags

The config file is flat ``key = value`` text, ``#`` starts a comment.  Keys
are the long flag names with underscores (``n_fft = 128``).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import PRESETS, ChannelModel, preset_taps
from .errors import ConfigError, LinkLabError
from .framing import FrameConfig
from .harness import channel_estimation_experiment, run_link, sweep_snr
from .modem import DEFAULT_MESSAGE

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

EXPERIMENTS = ("link", "sweep", "chanest")
SEED_ENV = "LINKLAB_SEED"
CARRIER_FREQ_HZ = 2.515e9


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_snr(text: str) -> float | None:
    t = text.strip().lower()
    if t in ("none", "inf", "+inf", "noiseless"):
        return None
    v = float(t)
    if not math.isfinite(v):
        raise ValueError(f"bad SNR {text!r}")
    return v


def _parse_snr_list(text: str) -> list[float]:
    t = text.strip()
    if ":" in t:
        start, stop, step = (float(v) for v in t.split(":"))
        if step <= 0:
            raise ValueError("step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(n)]
    return [float(v) for v in t.split(",") if v.strip()]


def _parse_taps(text: str) -> np.ndarray:
    return np.array([complex(v.strip().replace(" ", "").replace("i", "j"))
                     for v in text.replace(";", ",").split(",") if v.strip()])


def _parse_message(text: str) -> bytes:
    return bytes(int(v) for v in text.split(",") if v.strip())


def _parse_choice(*choices: str):
    def parse(text: str) -> str:
        t = text.strip().lower()
        if t not in choices:
            raise ValueError(f"expected one of {choices}, got {text!r}")
        return t
    return parse


def _parse_int(text) -> int:
    return int(str(text).strip())


# key -> (parser, default)
SETTINGS: dict[str, tuple] = {
    "n_fft": (_parse_int, 128),
    "n_occ": (_parse_int, 48),
    "n_guard": (_parse_int, None),
    "n_cp": (_parse_int, 16),
    "n_data_cols": (_parse_int, 1),
    "power_scaling": (_parse_bool, False),
    "pilot_seed": (_parse_int, FrameConfig.pilot_seed),
    "preamble_seed": (_parse_int, FrameConfig.preamble_seed),
    "layout": (_parse_choice("natural", "centered"), "natural"),
    "modulation": (_parse_choice("bpsk"), "bpsk"),
    "pilot_type": (_parse_choice("block"), "block"),
    "carrier_freq": (float, CARRIER_FREQ_HZ),
    "message": (_parse_message, DEFAULT_MESSAGE),
    "channel": (_parse_choice(*PRESETS), "two-tap"),
    "taps": (_parse_taps, None),
    "delay": (_parse_int, 0),
    "snr_db": (_parse_snr, 16.0),
    "snr_list": (_parse_snr_list, [float(s) for s in range(0, 21, 2)]),
    "n_bits": (_parse_int, 1_000_000),
    "n_frames": (_parse_int, 100),
    "threshold": (float, 0.5),
    "max_delay": (_parse_int, 256),
    "ideal_timing": (_parse_bool, False),
    "ideal_csi": (_parse_bool, False),
    "corrected_snr": (_parse_bool, False),
    "workers": (_parse_int, 1),
    "seed": (_parse_int, 0),
    "out": (str, "."),
}


@dataclass
class RunConfig:
    experiment: str
    frame: FrameConfig
    channel: ChannelModel
    n_bits: int
    n_frames: int
    snr_list: list[float]
    master_seed: int
    output_dir: Path
    threshold: float = 0.5
    max_delay: int = 256
    ideal_timing: bool = False
    ideal_csi: bool = False
    corrected_snr: bool = False
    workers: int = 1
    message: bytes = DEFAULT_MESSAGE
    carrier_freq: float = CARRIER_FREQ_HZ
    settings: dict = field(default_factory=dict, repr=False)

    @property
    def link_options(self) -> dict:
        return dict(threshold=self.threshold, max_delay=self.max_delay,
                    ideal_timing=self.ideal_timing, ideal_csi=self.ideal_csi,
                    message=self.message, corrected_snr=self.corrected_snr)


def read_config_file(path) -> dict[str, str]:
    """Read ``key = value`` lines; unknown keys are rejected."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}", key="config") from exc
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value", key="config")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "output_dir":
            key = "out"
        if key == "experiment":
            continue
        if key not in SETTINGS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}", key=key)
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file")
    for key in SETTINGS:
        flag = "--" + key.replace("_", "-")
        if key == "snr_db":
            common.add_argument("--snr", "--snr-db", dest=key, default=argparse.SUPPRESS,
                                help="SNR in dB per occupied subcarrier, or 'none' for noiseless")
        else:
            common.add_argument(flag, dest=key, default=argparse.SUPPRESS, metavar=key.upper())
    parser = argparse.ArgumentParser(prog="linklab", description="Baseband OFDM link simulator.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    sub.add_parser("link", parents=[common], help="BER of one link at one SNR")
    sub.add_parser("sweep", parents=[common], help="BER versus SNR")
    sub.add_parser("chanest", parents=[common], help="estimated vs true channel response")
    return parser


def parse_config(argv=None, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    args = build_parser().parse_args(argv)
    raw: dict = {}
    if SEED_ENV in environ:
        raw["seed"] = environ[SEED_ENV]
    if args.config:
        raw.update(read_config_file(args.config))
    raw.update({k: v for k, v in vars(args).items() if k in SETTINGS})
    return config_from_settings(args.experiment, raw)


def config_from_settings(experiment: str, raw: dict) -> RunConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}", key="experiment")
    values = {}
    for key, (parse, default) in SETTINGS.items():
        if key in raw and raw[key] is not None:
            try:
                values[key] = parse(raw[key]) if isinstance(raw[key], str) else raw[key]
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: {exc}", key=key) from exc
        else:
            values[key] = default

    frame = FrameConfig(**{k: values[k] for k in (
        "n_fft", "n_occ", "n_guard", "n_cp", "n_data_cols", "power_scaling",
        "pilot_seed", "preamble_seed", "layout")})
    taps = values["taps"] if values["taps"] is not None else preset_taps(values["channel"])
    channel = ChannelModel(taps=taps, snr_db=values["snr_db"], delay=values["delay"])
    if len(channel.taps) > frame.n_fft:
        raise ConfigError("channel is longer than the FFT", key="taps")
    if not values["message"]:
        raise ConfigError("message must not be empty", key="message")
    if not values["snr_list"]:
        raise ConfigError("snr_list must not be empty", key="snr_list")
    if not 0 < values["threshold"] < 1:
        raise ConfigError("threshold must lie in (0, 1)", key="threshold")
    for key in ("n_bits", "n_frames", "workers"):
        if values[key] < 1:
            raise ConfigError(f"{key} must be positive", key=key)
    if not 0 <= values["seed"] < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer", key="seed")
    return RunConfig(
        experiment=experiment, frame=frame, channel=channel,
        n_bits=values["n_bits"], n_frames=values["n_frames"], snr_list=values["snr_list"],
        master_seed=values["seed"], output_dir=Path(values["out"]),
        threshold=values["threshold"], max_delay=values["max_delay"],
        ideal_timing=values["ideal_timing"], ideal_csi=values["ideal_csi"],
        corrected_snr=values["corrected_snr"], workers=values["workers"],
        message=values["message"], carrier_freq=values["carrier_freq"], settings=values,
    )


def _check_output_dir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
        with tempfile.TemporaryFile(dir=path):
            pass
    except OSError as exc:
        raise ConfigError(f"output directory {path} is not writable: {exc}", key="out") from exc


def _publish(writer, target: Path) -> None:
    # write next to the target, then rename, so a failure leaves no partial file
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _fmt_db(x: float) -> str:
    return f"{x:.2f} dB" if math.isfinite(x) else str(x)


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    _check_output_dir(cfg.output_dir)
    if cfg.experiment == "link":
        rep = run_link(cfg.frame, cfg.channel, cfg.n_bits, cfg.master_seed, **cfg.link_options)
        _publish(rep.write_blocks_csv, cfg.output_dir / "ber_blocks.csv")
        print(f"bits={rep.bits_total} errors={rep.bit_errors} ber={rep.ber:.6g} "
              f"snr_est_mean={_fmt_db(rep.snr_estimated_mean)} "
              f"frames_detected={rep.frames_detected} frames_missed={rep.frames_missed}", file=out)
    elif cfg.experiment == "sweep":
        res = sweep_snr(cfg.frame, cfg.channel, cfg.snr_list, cfg.n_bits, cfg.master_seed,
                        workers=cfg.workers, **cfg.link_options)
        _publish(res.write_csv, cfg.output_dir / "sweep.csv")
        for (snr, ber, est, missed), rep in zip(res.rows, res.reports):
            print(f"snr={snr:g} dB bits={rep.bits_total} ber={ber:.6g} "
                  f"snr_est_mean={_fmt_db(est)} missed_frac={missed:.4f}", file=out)
    else:
        res = channel_estimation_experiment(cfg.frame, cfg.channel, cfg.channel.snr_db,
                                            cfg.n_frames, cfg.master_seed)
        _publish(res.write_csv, cfg.output_dir / "chanest.csv")
        print(f"frames={res.frames} bins={len(res.bins)} max_bin_error={res.max_abs_error:.3e}", file=out)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"linklab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except ConfigError as exc:
        print(f"linklab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LinkLabError, OSError, ValueError) as exc:
        print(f"linklab: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
