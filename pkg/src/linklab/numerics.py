"""Complex-vector helpers, a radix-2 FFT and the seedable random source.

The FFT uses the usual engineering convention: the forward transform is
unnormalized, ``X[k] = sum_n x[n] exp(-2j*pi*k*n/N)``, and the inverse carries
the ``1/N`` factor so that ``ifft(fft(x)) == x``.  Both transforms operate on
the last axis, so a stack of equal-length vectors can be transformed in one
call.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import ConfigError, DimensionError

__all__ = [
    "Rng",
    "as_complex_vec",
    "direct_dft",
    "fft",
    "gaussian_pair",
    "ifft",
    "is_power_of_two",
]


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def as_complex_vec(values, name: str = "x") -> np.ndarray:
    """Return ``values`` as a 1-D complex128 array, checking the vector invariants."""
    arr = np.asarray(values, dtype=np.complex128)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


@lru_cache(maxsize=None)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=None)
def _twiddles(size: int, sign: int) -> np.ndarray:
    half = size // 2
    w = np.exp(sign * 2j * np.pi * np.arange(half) / size)
    w.setflags(write=False)
    return w


def _radix2(x: np.ndarray, sign: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim == 0:
        raise DimensionError("FFT input must have at least one axis")
    n = x.shape[-1]
    if not is_power_of_two(n):
        raise ConfigError(f"FFT length must be a power of two, got {n}", key="n_fft")
    lead = x.shape[:-1]
    # iterative decimation-in-time: bit-reverse, then butterflies of growing span
    y = x[..., _bit_reversal(n)]
    size = 2
    while size <= n:
        y = y.reshape(*lead, n // size, size)
        half = size // 2
        even = y[..., :half]
        odd = y[..., half:] * _twiddles(size, sign)
        y = np.concatenate((even + odd, even - odd), axis=-1)
        size *= 2
    return y.reshape(*lead, n)


def fft(x) -> np.ndarray:
    """Unnormalized forward DFT along the last axis (radix-2, power-of-two length)."""
    return _radix2(x, -1)


def ifft(X) -> np.ndarray:
    """Inverse DFT along the last axis with ``1/N`` scaling."""
    X = np.asarray(X, dtype=np.complex128)
    return _radix2(X, +1) / X.shape[-1]


def direct_dft(x, inverse: bool = False) -> np.ndarray:
    """O(N^2) matrix DFT of a 1-D vector; reference for testing, any length."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    k = np.arange(n)
    sign = 1.0 if inverse else -1.0
    mat = np.exp(sign * 2j * np.pi * np.outer(k, k) / n)
    out = mat @ x
    return out / n if inverse else out


class Rng:
    """Seeded random source backed by numpy's PCG64 bit generator.

    Two instances built from the same seed yield identical sequences.  Each
    instance is single-owner state; give every thread or process its own.
    ``Rng.derive(master, index)`` builds independent child streams through
    :class:`numpy.random.SeedSequence`.
    """

    def __init__(self, seed: int | np.random.SeedSequence = 0):
        if isinstance(seed, np.random.SeedSequence):
            self.seed = int(seed.entropy) if isinstance(seed.entropy, int) else None
            seq = seed
        else:
            seed = int(seed)
            if not 0 <= seed < 2**64:
                raise ConfigError(f"seed must be a 64-bit unsigned integer, got {seed}", key="seed")
            self.seed = seed
            seq = np.random.SeedSequence(seed)
        self._gen = np.random.Generator(np.random.PCG64(seq))

    @classmethod
    def derive(cls, master_seed: int, *path: int) -> "Rng":
        return cls(np.random.SeedSequence([int(master_seed), *map(int, path)]))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def normal(self, size) -> np.ndarray:
        return self._gen.standard_normal(size)

    def complex_normal(self, size, variance: float = 1.0) -> np.ndarray:
        """Circular complex Gaussian samples with ``E|n|^2 == variance``."""
        scale = np.sqrt(variance / 2.0)
        pair = self._gen.standard_normal((2, *np.atleast_1d(size)))
        return scale * (pair[0] + 1j * pair[1])

    def integers(self, low: int, high: int, size=None):
        """Uniform integers in ``[low, high]`` (inclusive)."""
        return self._gen.integers(low, high, size=size, endpoint=True)

    def signs(self, size) -> np.ndarray:
        return 1.0 - 2.0 * self._gen.integers(0, 2, size=size)


def gaussian_pair(rng: Rng) -> tuple[float, float]:
    """Two independent standard-normal draws."""
    a, b = rng.normal(2)
    return float(a), float(b)
