"""Byte/bit conversion of the test message and BPSK (de)mapping.

Bits are taken MSB-first from each byte.  BPSK maps ``0 -> +1`` and
``1 -> -1``; the hard decision sends ``re >= 0`` to bit 0, so a symbol lying
exactly on the boundary decodes as 0.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

__all__ = [
    "DEFAULT_MESSAGE",
    "bits_to_message",
    "bpsk_demap",
    "bpsk_map",
    "cyclic_bits",
    "message_to_bits",
]

DEFAULT_MESSAGE = bytes(range(1, 21))


def message_to_bits(msg) -> np.ndarray:
    data = np.frombuffer(bytes(msg), dtype=np.uint8)
    if data.size == 0:
        raise ConfigError("message must not be empty", key="message")
    return np.unpackbits(data)


def bits_to_message(bits) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 8:
        raise ValueError(f"bit count {bits.size} is not a whole number of bytes")
    return np.packbits(bits).tobytes()


def cyclic_bits(msg, start: int, count: int) -> np.ndarray:
    """``count`` bits of the endlessly repeated message, beginning at bit ``start``."""
    bits = message_to_bits(msg)
    return bits[(start + np.arange(count)) % bits.size]


def bpsk_map(bits) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    return (1.0 - 2.0 * bits).astype(np.complex128)


def bpsk_demap(symbols) -> np.ndarray:
    return (np.real(np.asarray(symbols)) < 0).astype(np.uint8)
