"""Baseband OFDM link simulator: framing, FIR/AWGN channel, Schmidl-Cox sync,
LS/ZF equalization, preamble/silence SNR estimation and BER Monte-Carlo."""

from .channel import ChannelModel, add_awgn, apply_fir, frequency_response
from .errors import ConfigError, DegenerateInputError, DimensionError, LinkLabError, TruncationError
from .estimation import build_zf, equalize, estimate_snr, ls_estimate
from .framing import FrameConfig, OfdmFrame, SampleStream, assemble_frame, frame_to_samples, samples_to_frame
from .harness import BerReport, SweepResult, channel_estimation_experiment, run_link, sweep_snr
from .numerics import Rng, fft, gaussian_pair, ifft
from .sync import SyncResult, detect_frame, timing_metric

__version__ = "0.1.0"
