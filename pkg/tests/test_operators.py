import numpy as np
import pytest
import scipy.linalg
from hypothesis import example, given
from hypothesis import strategies as st

from gzkstab import fourier, operators
from gzkstab.errors import ResolutionError
from gzkstab.instability import symmetry_defects
from gzkstab.wave import constant_wave

from oracles import alpha, cached_wave

BANK = [
    (1, 1.0, 1.2 * alpha(1)),
    (1, 1.0, 7.0),
    (2, 1.0, 2 * alpha(2)),
    (4, 1.0, 4 * alpha(4)),
    (2, 1.0, 2 * np.pi, "sign-changing"),
    (2, 2.0, 2 * np.pi, "sign-changing"),
]


def wave(i):
    return cached_wave(*BANK[i])


@pytest.mark.parametrize("i", range(len(BANK)))
def test_assembled_matrices_are_symmetric(i):
    w = wave(i)
    for op in (operators.assemble_L(w), operators.assemble_QL(w), operators.assemble_R(w, k=0.7)):
        assert op.symmetric
        assert op.symmetry_defect() < 1e-12
        assert np.all(operators.spectrum(op).eigenvalues.imag == 0)


@pytest.mark.parametrize("i", range(len(BANK)))
def test_kernel_of_L_is_derivative(i):
    w = wave(i)
    op = operators.assemble_L(w)
    d = fourier.to_coeffs(w.derivative())
    assert np.abs(op.matrix @ d).max() < 1e-8 * np.abs(op.matrix).max() * np.abs(d).max()
    rep = operators.spectrum(op, vectors=True)
    assert rep.kernel_dim == 1
    V = rep.eigvectors[:, np.abs(rep.eigenvalues) <= rep.zero_tol].real
    assert np.linalg.norm(V.T @ d) >= (1 - 1e-6) * np.linalg.norm(d)


@pytest.mark.parametrize("i", range(len(BANK)))
def test_QL_annihilates_derivative(i):
    w = wave(i)
    QL = operators.assemble_QL(w)
    d = operators.to_zero_mean(w.derivative())
    assert np.linalg.norm(QL.matrix @ d) < 1e-8 * operators.operator_scale(QL) * np.linalg.norm(d)


def test_negative_counts():
    assert operators.spectrum(operators.assemble_L(wave(1))).neg_count == 1
    assert operators.spectrum(operators.assemble_L(wave(4))).neg_count == 2
    assert operators.spectrum(operators.assemble_QL(wave(4))).neg_count == 1
    assert operators.spectrum(operators.assemble_QL(wave(5))).neg_count == 2


@pytest.mark.parametrize("i", [0, 2, 4])
def test_counts_stable_under_grid_doubling(i):
    w = wave(i)
    a = operators.spectrum(operators.assemble_QL(w, 128))
    b = operators.spectrum(operators.assemble_QL(w, 256))
    assert (a.neg_count, a.kernel_dim) == (b.neg_count, b.kernel_dim)
    c = operators.spectrum(operators.assemble_L(w, 128))
    d = operators.spectrum(operators.assemble_L(w, 256))
    assert (c.neg_count, c.kernel_dim) == (d.neg_count, d.kernel_dim)


def test_shift_law_at_matrix_level():
    w = wave(1)
    QL = operators.assemble_QL(w)
    R = operators.assemble_R(w, k=1.3, QL=QL)
    assert np.array_equal(R.matrix, QL.matrix + 1.3**2 * np.eye(QL.dim))
    lam0 = scipy.linalg.eigh(QL.matrix, eigvals_only=True)
    lam = scipy.linalg.eigh(R.matrix, eigvals_only=True)
    assert np.abs(lam - lam0 - 1.69).max() < 1e-10


@given(i=st.integers(0, len(BANK) - 1), k=st.floats(0.0, 3.0))
@example(i=1, k=0.0)
def test_P_and_R_are_similar(i, k):
    w = wave(i)
    QL = operators.assemble_QL(w)
    sR = operators.spectrum(operators.assemble_R(w, k=k, QL=QL))
    sP = operators.spectrum(operators.assemble_P(w, k=k, QL=QL))
    assert np.abs(np.sort(sP.eigenvalues.real) - np.sort(sR.eigenvalues.real)).max() < 1e-8
    assert sP.kernel_dim == sR.kernel_dim


@given(i=st.integers(0, len(BANK) - 1), k=st.floats(0.0, 3.0))
def test_transverse_spectrum_quadruple_symmetry(i, k):
    w = wave(i)
    lam = operators.spectrum(operators.assemble_transverse(w, k=k)).eigenvalues
    neg, conj = symmetry_defects(lam)
    assert neg < 1e-8 and conj < 1e-8


def test_derivative_ops():
    L, N = 5.0, 16
    D, Dinv = operators.derivative_ops(L, N)
    assert np.allclose(D.matrix @ Dinv.matrix, np.eye(N - 2), atol=1e-14)
    assert np.array_equal(D.matrix, -D.matrix.T)
    x = fourier.grid(L, N)
    n = 3
    kn = 2 * np.pi * n / L
    cos = operators.to_zero_mean(np.cos(kn * x))
    out = operators.from_zero_mean(D.matrix @ cos)
    assert np.allclose(out, -kn * np.sin(kn * x), atol=1e-12)
    assert abs(out.mean()) < 1e-14


def test_spectrum_neg_count_only_for_real_spectra():
    w = wave(1)
    assert operators.spectrum(operators.assemble_transverse(w, k=0.1)).neg_count is None
    assert operators.spectrum(operators.assemble_P(w, k=0.1)).neg_count is not None


def test_under_resolved_grid_is_refused():
    w = wave(3)
    with pytest.raises(ResolutionError):
        operators.assemble_L(w, 8)


def test_constant_profile_closed_form():
    w = constant_wave(1, 1.0, 7.0, N=32)
    lam = np.sort(operators.spectrum(operators.assemble_L(w)).eigenvalues.real)
    kap = fourier.basis_wavenumbers(7.0, 32)
    assert np.abs(lam - np.sort(kap**2 - 1.0)).max() < 1e-10


@pytest.mark.parametrize("i", [0, 1, 2, 3])
def test_ground_state_of_QL_is_even(i):
    w = wave(i)
    rep = operators.spectrum(operators.assemble_QL(w), vectors=True)
    g = operators.from_zero_mean(rep.eigvectors[:, 0].real)
    mirror = np.roll(g[::-1], 1)
    assert np.abs(g - mirror).max() < 1e-8 * np.abs(g).max()
