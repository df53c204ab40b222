"""Fourier-collocation matrices of the linearized operators about a wave.

All matrices live in the orthonormal real Fourier basis of
:func:`gzkstab.fourier.real_basis`. The full operator

    Lop = -d^2/dx^2 + c - phi^p

keeps every column. Its projection onto mean-free functions,
``QL = Lop + (1/L) (phi^p, .)``, equals ``Pi Lop Pi`` there, i.e. the block
with the mean (and Nyquist) mode removed; on that block the derivative is
invertible. From it:

    R(k) = QL + k^2 I
    P(k) = D QL D^-1 + k^2 I
    T(k) = D (QL + k^2 I)      (transverse eigenproblem  T w = lambda w)
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.linalg

from . import fourier
from .errors import EigensolverError, ResolutionError

RESOLUTION_TOL = 1e-10
ZERO_TOL_REL = 1e-8
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SpectralOperator:
    matrix: np.ndarray
    basis: str  # "full" | "zero-mean"
    origin: str  # "L", "QL", "R", "P", "T", "D", "Dinv"
    N: int
    period: float
    k: Optional[float] = None
    symmetric: bool = False

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def real_spectrum(self):
        return self.symmetric or self.origin == "P"

    def symmetry_defect(self):
        A = self.matrix
        return float(np.max(np.abs(A - A.T)) / np.max(np.abs(A)))


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray  # complex, sorted by (real, imag)
    kernel_dim: int
    neg_count: Optional[int]
    zero_tol: float
    origin: str = ""
    k: Optional[float] = None
    N: int = 0
    eigvectors: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dim(self):
        return self.eigenvalues.size

    @property
    def max_real(self):
        return float(self.eigenvalues.real.max())

    @property
    def pos_count(self):
        return int(np.sum(self.eigenvalues.real > self.zero_tol))


@lru_cache(maxsize=16)
def _basis(N):
    Q = fourier.real_basis(N)
    Q.setflags(write=False)
    return Q


def zero_mean_slice(N):
    return slice(1, N - 1)


def to_zero_mean(u):
    """Zero-mean coordinates (mean and Nyquist dropped) of grid data."""
    return fourier.to_coeffs(u)[..., 1:-1]


def from_zero_mean(v):
    N = v.shape[-1] + 2
    c = np.zeros(v.shape[:-1] + (N,))
    c[..., 1:-1] = v
    return fourier.from_coeffs(c)


def profile_power(wave, N):
    """``phi^p`` sampled on N points, checked for resolution."""
    fourier.check_even(N)
    p = wave.params.p
    Nf = max(N, wave.N)
    fine = wave.on_grid(Nf) ** p
    a = np.abs(np.fft.rfft(fine))
    cut = max(1, int(0.9 * (N // 2)))
    if a.max() > 0 and a[cut:].max() / a.max() > RESOLUTION_TOL:
        raise ResolutionError(
            f"phi^p under-resolved at N={N}: tail/peak = {a[cut:].max() / a.max():.2e}"
        )
    return fourier.resample(fine, N) if Nf != N else fine


def minimal_grid(wave, N_min=32):
    """Smallest power-of-two grid on which ``phi^p`` passes the resolution check."""
    N = N_min
    while True:
        try:
            profile_power(wave, N)
            return N
        except ResolutionError:
            if N >= max(wave.N, N_min):
                raise
            N *= 2


def assemble_L(wave, N=None):
    """Full-basis matrix of ``-d^2/dx^2 + c - phi^p``; real symmetric."""
    N = wave.N if N is None else N
    P = wave.params
    Q = _basis(N)
    kap = fourier.basis_wavenumbers(P.L, N)
    v = P.c - profile_power(wave, N)
    A = Q.T @ (v[:, None] * Q)
    A[np.diag_indices(N)] += kap**2
    A = 0.5 * (A + A.T)
    return SpectralOperator(A, "full", "L", N, P.L, symmetric=True)


def assemble_QL(wave, N=None):
    """``QL = Lop + (1/L)(phi^p, .)`` on mean-free functions.

    For mean-free u the rank-one term is exactly minus the mean of ``Lop u``,
    so QL is the compression of Lop onto the modes ``n != 0``.
    """
    op = assemble_L(wave, N)
    s = zero_mean_slice(op.N)
    return SpectralOperator(op.matrix[s, s].copy(), "zero-mean", "QL", op.N, op.period, symmetric=True)


def assemble_R(wave, N=None, k=0.0, QL=None):
    if k < 0:
        raise ValueError("k must be non-negative")
    QL = assemble_QL(wave, N) if QL is None else QL
    A = QL.matrix + k**2 * np.eye(QL.dim)
    return SpectralOperator(A, "zero-mean", "R", QL.N, QL.period, k=float(k), symmetric=True)


def assemble_P(wave, N=None, k=0.0, QL=None):
    """``D QL D^-1 + k^2 I``; similar to R(k) but not symmetric."""
    if k < 0:
        raise ValueError("k must be non-negative")
    QL = assemble_QL(wave, N) if QL is None else QL
    D, Dinv = derivative_ops(QL.period, QL.N)
    A = D.matrix @ QL.matrix @ Dinv.matrix + k**2 * np.eye(QL.dim)
    return SpectralOperator(A, "zero-mean", "P", QL.N, QL.period, k=float(k))


def assemble_transverse(wave, N=None, k=0.0, QL=None):
    """``D (QL + k^2 I)``, the matrix of the transverse spectral problem."""
    if k < 0:
        raise ValueError("k must be non-negative")
    QL = assemble_QL(wave, N) if QL is None else QL
    D, _ = derivative_ops(QL.period, QL.N)
    A = D.matrix @ (QL.matrix + k**2 * np.eye(QL.dim))
    return SpectralOperator(A, "zero-mean", "T", QL.N, QL.period, k=float(k))


def derivative_ops(L, N):
    """d/dx and its inverse on mean-free functions, as zero-mean-basis matrices.

    Both are block diagonal: the (cos n, sin n) pair is mapped by
    ``[[0, kn], [-kn, 0]]`` and ``[[0, -1/kn], [1/kn, 0]]``, ``kn = 2 pi n / L``.
    """
    fourier.check_even(N)
    kap = fourier.basis_wavenumbers(L, N)[1:-1:2]
    m = N - 2
    D = np.zeros((m, m))
    Dinv = np.zeros((m, m))
    i = np.arange(0, m, 2)
    D[i, i + 1] = kap
    D[i + 1, i] = -kap
    Dinv[i, i + 1] = -1.0 / kap
    Dinv[i + 1, i] = 1.0 / kap
    return (
        SpectralOperator(D, "zero-mean", "D", N, L),
        SpectralOperator(Dinv, "zero-mean", "Dinv", N, L),
    )


def spectrum(op, zero_tol=None, vectors=False):
    """Dense eigendecomposition of an assembled operator.

    ``zero_tol`` defaults to ``1e-8 * max|lambda|``. ``neg_count`` is filled in
    only for operators with real spectrum (the symmetric ones and P(k)).
    """
    try:
        if op.symmetric:
            if vectors:
                lam, V = scipy.linalg.eigh(op.matrix)
            else:
                lam, V = scipy.linalg.eigh(op.matrix, eigvals_only=True), None
            lam = lam.astype(complex)
        else:
            if vectors:
                lam, V = scipy.linalg.eig(op.matrix)
            else:
                lam, V = scipy.linalg.eigvals(op.matrix), None
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"eigensolver failed on {op.origin}: {exc}") from exc
    if not np.all(np.isfinite(lam)):
        raise EigensolverError(f"non-finite eigenvalues for {op.origin}")
    order = np.lexsort((lam.imag, lam.real))
    lam = lam[order]
    if V is not None:
        V = V[:, order]
    if zero_tol is None:
        zero_tol = ZERO_TOL_REL * float(np.max(np.abs(lam)))
    kernel = int(np.sum(np.abs(lam) <= zero_tol))
    neg = int(np.sum(lam.real < -zero_tol)) if op.real_spectrum else None
    return SpectrumReport(lam, kernel, neg, float(zero_tol), op.origin, op.k, op.N, V)


def operator_scale(QL):
    """Largest ``|lambda|`` of QL; the reference magnitude for thresholds."""
    return float(np.max(np.abs(scipy.linalg.eigh(QL.matrix, eigvals_only=True))))
