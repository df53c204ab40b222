import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gzkstab import operators
from gzkstab.errors import IntegratorError, MismatchError, NotApplicableError
from gzkstab.instability import (
    Verdict,
    default_k_grid,
    evolve_linearized,
    f_of_k,
    find_k0,
    generalized_check,
    growth_curve,
    spectral_scale,
    transverse_spectrum,
    verdict,
)
from gzkstab.wave import constant_wave

from oracles import alpha, cached_wave

P1 = (1, 1.0, 4 * alpha(1))
P2 = (2, 1.0, 2 * alpha(2))
SC1 = (2, 1.0, 2 * np.pi, "sign-changing")
SC2 = (2, 2.0, 2 * np.pi, "sign-changing")


def leading_mode(w, k):
    """Most unstable eigenpair of D(QL + k^2) as (lambda, grid vector)."""
    rep = transverse_spectrum(w, k=k, vectors=True)
    j = int(np.argmax(rep.eigenvalues.real))
    return rep.eigenvalues[j], rep.eigvectors[:, j]


@pytest.mark.parametrize("args", [P1, P2, SC1])
def test_f_is_shifted_parabola(args):
    w = cached_wave(*args)
    QL = operators.assemble_QL(w)
    f0 = f_of_k(w, QL=QL)
    assert f0 < 0
    for k in (0.3, 1.1, 2.0):
        assert abs(f_of_k(w, k=k, QL=QL) - (f0 + k * k)) < 1e-10


def test_negative_k_is_rejected():
    with pytest.raises(ValueError):
        f_of_k(cached_wave(*P1), k=-1.0)


def test_constant_profile_at_resonance_has_no_cutoff():
    # on L = 2 pi the lowest mean-free eigenvalue of QL is kappa_1^2 - 1 = 0
    w = constant_wave(1, 1.0, 2 * np.pi)
    assert abs(f_of_k(w)) < 1e-10
    with pytest.raises(NotApplicableError):
        find_k0(w)


@pytest.mark.parametrize("args", [P1, P2, SC1, SC2])
def test_cutoff_root_and_kernels(args):
    w = cached_wave(*args)
    QL = operators.assemble_QL(w)
    k0 = find_k0(w, QL=QL)
    assert abs(f_of_k(w, k=k0, QL=QL)) < 1e-8 * k0 * k0
    R = operators.spectrum(operators.assemble_R(w, k=k0, QL=QL))
    P = operators.spectrum(operators.assemble_P(w, k=k0, QL=QL))
    assert R.kernel_dim == 1 and P.kernel_dim == 1
    assert spectral_scale(QL) == pytest.approx(k0 * k0, rel=1e-14)


def test_zero_is_in_spectrum_at_k_zero():
    w = cached_wave(*P2)
    lam = transverse_spectrum(w, k=0.0).eigenvalues
    # the zero eigenvalue sits in a Jordan block, so it is only resolved to ~sqrt(eps)
    assert np.abs(lam).min() < 1e-10 * np.abs(lam).max()


@pytest.mark.parametrize("args", [P1, P2])
def test_real_pair_just_below_cutoff(args):
    w = cached_wave(*args)
    k0 = find_k0(w)
    lam = transverse_spectrum(w, k=0.95 * k0).eigenvalues
    top = lam[np.argmax(lam.real)]
    assert top.real > 0 and abs(top.imag) < 1e-8
    assert np.abs(lam + top).min() < 1e-8


def test_growth_vanishes_beyond_cutoff_and_at_onset():
    w = cached_wave(*P1)
    k0 = find_k0(w)
    scale = spectral_scale(operators.assemble_QL(w))
    curve = growth_curve(w, k0=k0)
    beyond = curve.k_samples > k0
    assert beyond.sum() == 10
    assert curve.max_re_lambda[beyond].max() < 1e-6 * scale
    near = growth_curve(w, k_grid=k0 * (1 - np.array([1e-1, 1e-2, 1e-3])), k0=k0).max_re_lambda
    assert near[0] > near[1] > near[2] > 0
    # the real pair emerges from a double zero: growth ~ sqrt(k0 - k)
    assert near[1] / near[2] == pytest.approx(math.sqrt(10), rel=0.05)


def test_default_grid_layout():
    g = default_k_grid(2.0)
    assert g.size == 50
    assert g[0] == pytest.approx(0.02)
    assert g[39] < 2.0 < g[40]
    assert g[-1] == pytest.approx(4.0)
    assert np.all(np.diff(g) > 0)


@settings(max_examples=10)
@given(i=st.integers(0, 3), frac=st.floats(0.05, 1.5))
def test_eigenpairs_solve_generalized_problem(i, frac):
    w = cached_wave(*[P1, P2, SC1, SC2][i])
    QL = operators.assemble_QL(w)
    k = frac * find_k0(w, QL=QL)
    rep = transverse_spectrum(w, k=k, QL=QL, vectors=True)
    for j in np.argsort(-rep.eigenvalues.real)[:3]:
        generalized_check(w, k=k, eigenpair=(rep.eigenvalues[j], rep.eigvectors[:, j]), QL=QL)


def test_random_vector_fails_generalized_check():
    w = cached_wave(*P1)
    QL = operators.assemble_QL(w)
    v = np.random.default_rng(1).standard_normal(QL.dim)
    with pytest.raises(MismatchError):
        generalized_check(w, k=0.1, eigenpair=(0.3, v), QL=QL)


@pytest.mark.parametrize("args", [P1, P2, (4, 1.0, 1.2 * alpha(4))])
def test_positive_waves_unstable_by_theorem(args):
    v = verdict(cached_wave(*args))
    assert v.verdict is Verdict.UNSTABLE_BY_THEOREM
    assert v.criterion == "positive-wave" and v.nR0 == 1
    assert v.max_growth > v.threshold
    assert 0 < v.growth.k_at_max < v.k0
    assert v.growth.symmetry.max() < 1e-8


def test_sign_changing_verdicts():
    low = verdict(cached_wave(*SC1))
    assert low.verdict is Verdict.UNSTABLE_BY_THEOREM and low.criterion == "sign-changing-nR0=1"
    high = verdict(cached_wave(*SC2))
    assert high.criterion == "k0-scan" and high.nR0 == 2
    assert high.verdict is Verdict.UNSTABLE_NUMERICAL_EVIDENCE
    assert high.growth.k_samples[0] == 0.0
    assert high.mass_derivative > 0


def test_no_negative_direction_is_inconclusive():
    # short period constant state: every mean-free eigenvalue kappa^2 - 1 is positive
    v = verdict(constant_wave(1, 1.0, 5.0))
    assert v.verdict is Verdict.INCONCLUSIVE and v.nR0 == 0


def test_evolution_follows_leading_eigenvalue():
    w = cached_wave(*P2)
    k = 0.7 * find_k0(w)
    lam, vec = leading_mode(w, k)
    w0 = operators.from_zero_mean(vec.real)
    res = evolve_linearized(w, k=k, w0=w0, expected_rate=lam.real)
    assert res.rate == pytest.approx(lam.real, rel=0.01)
    assert res.times[-1] == pytest.approx(res.T)


def test_evolution_beyond_cutoff_is_neutral():
    w = cached_wave(*P1)
    res = evolve_linearized(w, k=1.3 * find_k0(w), T=100.0)
    assert abs(res.rate) < 1e-3


def test_evolution_refuses_large_step():
    w = cached_wave(*P1)
    with pytest.raises(IntegratorError):
        evolve_linearized(w, k=0.1, dt=1.0, T=1.0)


def test_evolution_rejects_mean_only_data():
    w = cached_wave(*P1)
    with pytest.raises(ValueError):
        evolve_linearized(w, k=0.1, w0=np.ones(64), T=1.0)
