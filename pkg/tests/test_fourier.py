import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gzkstab import fourier

sizes = st.sampled_from([4, 8, 16, 32, 64, 128])


def test_real_basis_is_orthonormal():
    Q = fourier.real_basis(64)
    assert np.abs(Q.T @ Q - np.eye(64)).max() < 1e-13


@given(N=sizes, seed=st.integers(0, 2**31))
def test_coefficient_round_trip(N, seed):
    u = np.random.default_rng(seed).standard_normal(N)
    c = fourier.to_coeffs(u)
    assert np.allclose(c, fourier.real_basis(N).T @ u, atol=1e-12)
    assert np.allclose(fourier.from_coeffs(c), u, atol=1e-12)


def test_check_even_rejects_odd():
    with pytest.raises(ValueError):
        fourier.check_even(7)


def test_derivative_of_trig_mode():
    L, N = 3.0, 32
    x = fourier.grid(L, N)
    k = 2 * np.pi * 3 / L
    assert np.allclose(fourier.diff(np.sin(k * x), L), k * np.cos(k * x), atol=1e-11)
    assert np.allclose(fourier.diff(np.sin(k * x), L, 2), -k * k * np.sin(k * x), atol=1e-9)


@given(s=st.floats(-5, 5), t=st.floats(-5, 5), seed=st.integers(0, 1000))
def test_shift_composes(s, t, seed):
    L, N = 2.5, 32
    rng = np.random.default_rng(seed)
    u = fourier.resample(rng.standard_normal(12), N)  # band-limited, zero Nyquist content
    assert np.allclose(fourier.shift(fourier.shift(u, L, s), L, t), fourier.shift(u, L, s + t), atol=1e-12)


def test_shift_is_exact_on_trig_polynomial():
    L, N = 4.0, 16
    x = fourier.grid(L, N)
    u = np.cos(2 * np.pi * 2 * x / L) + 0.3 * np.sin(2 * np.pi * 5 * x / L)
    s = 0.37
    ref = np.cos(2 * np.pi * 2 * (x + s) / L) + 0.3 * np.sin(2 * np.pi * 5 * (x + s) / L)
    assert np.allclose(fourier.shift(u, L, s), ref, atol=1e-13)


@given(seed=st.integers(0, 1000), up=st.sampled_from([2, 4]))
def test_resample_up_then_down(seed, up):
    u = np.random.default_rng(seed).standard_normal(16)
    v = fourier.resample(fourier.resample(u, 16 * up), 16)
    assert np.allclose(u, v, atol=1e-12)


def test_tail_ratio():
    x = fourier.grid(1.0, 64)
    assert fourier.tail_ratio(np.cos(2 * np.pi * x)) < 1e-14
    assert fourier.tail_ratio(np.cos(2 * np.pi * 31 * x)) == pytest.approx(1.0)
