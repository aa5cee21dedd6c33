import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA, random_complex
from linklab.errors import ConfigError
from linklab.numerics import Rng, as_complex_vec, direct_dft, fft, gaussian_pair, ifft
from linklab.vecio import read_vector


def brute_dft(x, sign=-1):
    # plain double loop, independent of the matrix form in direct_dft
    n = len(x)
    out = []
    for k in range(n):
        acc = 0j
        for m in range(n):
            acc += x[m] * np.exp(sign * 2j * np.pi * k * m / n)
        out.append(acc)
    return np.array(out)


def test_fft_of_impulse_is_all_ones():
    x = np.zeros(8, complex)
    x[0] = 1
    np.testing.assert_allclose(fft(x), np.ones(8), atol=1e-15)


def test_fft_of_constant_is_impulse():
    expected = np.zeros(8, complex)
    expected[0] = 8
    np.testing.assert_allclose(fft(np.ones(8)), expected, atol=1e-12)


def test_ifft_of_impulse():
    X = np.zeros(8, complex)
    X[0] = 8
    np.testing.assert_allclose(ifft(X), np.ones(8), atol=1e-15)


def test_fft_matches_brute_force_n128(np_rng):
    x = random_complex(np_rng, 128)
    assert np.max(np.abs(fft(x) - brute_dft(x))) < 1e-9


def test_ifft_matches_brute_force_n64(np_rng):
    X = random_complex(np_rng, 64)
    assert np.max(np.abs(ifft(X) - brute_dft(X, +1) / 64)) < 1e-9


def test_round_trip_n128(np_rng):
    x = random_complex(np_rng, 128)
    assert np.max(np.abs(ifft(fft(x)) - x)) < 1e-12


@pytest.mark.parametrize("n", [2**k for k in range(1, 9)])
def test_fft_matches_oracle_all_sizes(n, np_rng):
    x = random_complex(np_rng, n)
    assert np.max(np.abs(fft(x) - direct_dft(x))) < 1e-9


def test_direct_dft_agrees_with_brute_force(np_rng):
    x = random_complex(np_rng, 12)
    np.testing.assert_allclose(direct_dft(x), brute_dft(x), atol=1e-12)


def test_batched_fft_transforms_last_axis(np_rng):
    x = random_complex(np_rng, 5 * 32).reshape(5, 32)
    y = fft(x)
    for row_in, row_out in zip(x, y):
        np.testing.assert_allclose(row_out, direct_dft(row_in), atol=1e-10)


@pytest.mark.parametrize("n", [3, 6, 100, 0])
def test_non_power_of_two_rejected(n):
    with pytest.raises(ConfigError):
        fft(np.ones(n))
    with pytest.raises(ConfigError):
        ifft(np.ones(n))


def test_length_one_is_identity():
    np.testing.assert_allclose(fft([3 + 4j]), [3 + 4j])


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_parseval(k, seed):
    x = random_complex(np.random.default_rng(seed), 2**k)
    X = fft(x)
    lhs = np.sum(np.abs(x) ** 2)
    assert abs(lhs - np.sum(np.abs(X) ** 2) / x.size) <= 1e-9 * lhs


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 8), seed=st.integers(0, 2**32 - 1),
       a=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       b=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_linearity(k, seed, a, b):
    rng = np.random.default_rng(seed)
    x, y = random_complex(rng, 2**k), random_complex(rng, 2**k)
    lhs = fft(a * x + b * y)
    rhs = a * fft(x) + b * fft(y)
    assert np.max(np.abs(lhs - rhs)) < 1e-9 * max(1.0, np.max(np.abs(rhs)))


def test_as_complex_vec_invariants():
    with pytest.raises(ValueError):
        as_complex_vec([])
    with pytest.raises(ValueError):
        as_complex_vec([1, np.nan])
    assert as_complex_vec([1, 2]).dtype == np.complex128


def test_gaussian_pair_golden():
    golden = read_vector(DATA / "gaussian_seed42.bin")[0]
    a, b = gaussian_pair(Rng(42))
    assert (a, b) == (golden.real, golden.imag)


def test_rng_reproducible():
    r1, r2 = Rng(5), Rng(5)
    assert [gaussian_pair(r1) for _ in range(5)] == [gaussian_pair(r2) for _ in range(5)]
    assert gaussian_pair(Rng(5)) != gaussian_pair(Rng(6))


def test_gaussian_moments():
    rng = Rng(123)
    draws = np.array([gaussian_pair(rng) for _ in range(500_000)]).ravel()
    assert draws.size == 1_000_000
    assert abs(draws.mean()) < 0.005
    assert abs(draws.var() - 1.0) < 0.01


def test_derived_streams_are_distinct():
    a = Rng.derive(1, 0).normal(4)
    b = Rng.derive(1, 1).normal(4)
    c = Rng.derive(0, 1).normal(4)
    assert not np.array_equal(a, b)
    assert not np.array_equal(b, c)
    np.testing.assert_array_equal(a, Rng.derive(1, 0).normal(4))


def test_seed_range_checked():
    with pytest.raises(ConfigError):
        Rng(-1)
    with pytest.raises(ConfigError):
        Rng(2**64)


def test_complex_normal_variance():
    n = Rng(9).complex_normal(200_000, variance=4.0)
    assert abs(np.mean(np.abs(n) ** 2) - 4.0) < 0.05
    assert abs(np.mean(n.real**2) - np.mean(n.imag**2)) < 0.05
