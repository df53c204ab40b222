"""Periodic grids, spectral derivatives and the real orthonormal Fourier basis.

Every matrix in the package is expressed in the basis returned by
:func:`real_basis`; its columns are ordered

    [mean, cos 1, sin 1, cos 2, sin 2, ..., cos M, sin M, Nyquist],  M = N/2 - 1

so the zero-mean, Nyquist-free subspace is the contiguous block ``1 .. N-2``.
"""

import numpy as np


def grid(L, N):
    return np.arange(N) * (L / N)


def check_even(N):
    if N < 4 or N % 2:
        raise ValueError(f"grid size must be an even integer >= 4, got {N}")


def wavenumbers(L, N):
    """Angular wavenumbers of ``np.fft.rfft`` output, length ``N//2 + 1``."""
    return 2.0 * np.pi * np.arange(N // 2 + 1) / L


def diff(u, L, order=1):
    """Spectral derivative of a real periodic grid function.

    The Nyquist coefficient is dropped for odd orders so the result stays real.
    """
    N = u.shape[-1]
    uh = np.fft.rfft(u)
    kap = wavenumbers(L, N)
    uh = uh * (1j * kap) ** order
    if order % 2:
        uh[..., -1] = 0.0
    return np.fft.irfft(uh, n=N)


def resample(u, N_new):
    """Trigonometric interpolation of ``u`` onto ``N_new`` equispaced points."""
    N = u.shape[-1]
    if N_new == N:
        return np.array(u, dtype=float)
    uh = np.fft.rfft(u)
    out = np.zeros(N_new // 2 + 1, dtype=complex)
    if N_new > N:
        out[: N // 2 + 1] = uh
        out[N // 2] *= 0.5
    else:
        out[:] = uh[: N_new // 2 + 1]
        # the pair +-N_new/2 folds onto the new Nyquist sample
        out[-1] = 2.0 * out[-1].real
    return np.fft.irfft(out * (N_new / N), n=N_new)


def shift(u, L, s):
    """Return ``u(x + s)`` on the same grid (exact for band-limited data)."""
    N = u.shape[-1]
    uh = np.fft.rfft(u)
    nyq = uh[..., -1].real * np.cos(np.pi * N * s / L)
    uh = uh * np.exp(1j * wavenumbers(L, N) * s)
    uh[..., -1] = nyq
    return np.fft.irfft(uh, n=N)


def tail_ratio(u, band=0.1):
    """Largest Fourier amplitude in the top ``band`` fraction of modes,
    relative to the largest amplitude overall."""
    a = np.abs(np.fft.rfft(u))
    top = a.max()
    if top == 0.0:
        return 0.0
    m = max(1, int(np.ceil(band * a.size)))
    return float(a[-m:].max() / top)


def basis_wavenumbers(L, N):
    """Wavenumber attached to each column of :func:`real_basis`."""
    M = N // 2 - 1
    kap = np.zeros(N)
    kap[1:-1] = np.repeat(2.0 * np.pi * np.arange(1, M + 1) / L, 2)
    kap[-1] = np.pi * N / L
    return kap


def real_basis(N):
    """Orthonormal ``N x N`` matrix whose columns are sampled real Fourier modes."""
    check_even(N)
    j = np.arange(N)
    M = N // 2 - 1
    Q = np.empty((N, N))
    Q[:, 0] = 1.0 / np.sqrt(N)
    n = np.arange(1, M + 1)
    arg = 2.0 * np.pi * np.outer(j, n) / N
    Q[:, 1:-1:2] = np.sqrt(2.0 / N) * np.cos(arg)
    Q[:, 2:-1:2] = np.sqrt(2.0 / N) * np.sin(arg)
    Q[:, -1] = (-1.0) ** j / np.sqrt(N)
    return Q


def to_coeffs(u):
    """Coordinates of grid data in :func:`real_basis` (``Q.T @ u`` via FFT)."""
    N = u.shape[-1]
    uh = np.fft.rfft(u)
    c = np.empty(u.shape, dtype=float)
    s = np.sqrt(2.0 / N)
    c[..., 0] = uh[..., 0].real / np.sqrt(N)
    c[..., 1:-1:2] = s * uh[..., 1:-1].real
    c[..., 2:-1:2] = -s * uh[..., 1:-1].imag
    c[..., -1] = uh[..., -1].real / np.sqrt(N)
    return c


def from_coeffs(c):
    """Inverse of :func:`to_coeffs`."""
    N = c.shape[-1]
    uh = np.empty(c.shape[:-1] + (N // 2 + 1,), dtype=complex)
    s = np.sqrt(N / 2.0)
    uh[..., 0] = c[..., 0] * np.sqrt(N)
    uh[..., 1:-1] = s * (c[..., 1:-1:2] - 1j * c[..., 2:-1:2])
    uh[..., -1] = c[..., -1] * np.sqrt(N)
    return np.fft.irfft(uh, n=N)
