"""Negative-eigenvalue counting for the mean-free operator QL.

The count ``n(QL)`` follows from ``n(L)`` and the sign of ``q = (L^-1 1, 1)``:

    q < 0  ->  n(QL) = n(L) - 1
    q > 0  ->  n(QL) = n(L)
    q = 0  ->  n(QL) = n(L) - 1   (the kernel absorbs one direction)

Both sides are computed independently so the formula doubles as a
consistency check of the discretization.
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from . import fourier, operators
from .errors import NoSignChangeError, SolvabilityError
from .wave import Branch, solve_wave

log = logging.getLogger(__name__)

SOLVE_RESIDUAL_TOL = 1e-8
Q_ZERO_BAND = 1e-6  # relative to L
KERNEL_ALIGNMENT_TOL = 1e-6
BISECTION_RTOL = 1e-3

# c * L0^2 at which q changes sign on the zero-mean (sign-changing) family
THRESHOLD_CONSTANTS = {2: 56.277, 4: 43.665}


@dataclass
class LInverseOne:
    u: np.ndarray  # grid values of the solution
    residual: float
    kernel_dim: int
    kernel_alignment: float  # |proj of phi' on ker L| / |phi'|, nan if phi' = 0

    def inner_one(self, L):
        return float(np.sum(self.u) * L / self.u.size)


@dataclass
class IndexReport:
    q: float
    n0: int
    z0: int
    nL: int
    nR0_formula: int
    nR0_direct: int
    consistent: bool
    N: int = 0
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


def _deflated_inverse(lam, V, b, zero_tol):
    keep = np.abs(lam) > zero_tol
    return V[:, keep] @ ((V[:, keep].T @ b) / lam[keep])


def solve_L_inverse_one(wave, N=None, rhs=None, strict=True):
    """Minimum-norm solution of ``L u = rhs`` orthogonal to ker L.

    ``rhs`` defaults to the constant function 1. The kernel must be at most
    one-dimensional and, when present, aligned with phi' (or phi' may vanish
    identically, as for the constant profile). With ``strict`` the right-hand
    side must also be orthogonal to the kernel; otherwise its kernel component
    is ignored, which is the pseudo-inverse.
    """
    op = operators.assemble_L(wave, N)
    N = op.N
    lam, V = scipy.linalg.eigh(op.matrix)
    zero_tol = operators.ZERO_TOL_REL * float(np.max(np.abs(lam)))
    kern = np.abs(lam) <= zero_tol
    kdim = int(kern.sum())
    if kdim > 1:
        raise SolvabilityError(f"kernel of L has dimension {kdim}; expected at most 1")

    dphi = fourier.to_coeffs(fourier.diff(wave.on_grid(N), wave.params.L))
    dnorm = np.linalg.norm(dphi)
    align = float("nan")
    if kdim == 1:
        if dnorm < 1e-12 * max(1.0, np.abs(wave.phi).max()):
            raise SolvabilityError("L has a kernel but the profile is constant")
        align = float(np.linalg.norm(V[:, kern].T @ dphi) / dnorm)
        if align < 1 - KERNEL_ALIGNMENT_TOL:
            raise SolvabilityError(f"kernel of L is not along phi' (alignment {align:.3e})")

    b = fourier.to_coeffs(np.ones(N) if rhs is None else np.asarray(rhs, float))
    if strict and kdim == 1 and abs(V[:, kern].T @ b).max() > 1e-8 * np.linalg.norm(b):
        raise SolvabilityError("right-hand side is not orthogonal to ker L")
    coef = _deflated_inverse(lam, V, b, zero_tol)
    u = fourier.from_coeffs(coef)
    r = op.matrix @ coef - b
    if kdim == 1:
        r -= V[:, kern] @ (V[:, kern].T @ r)
    residual = float(np.max(np.abs(fourier.from_coeffs(r))))
    if residual > SOLVE_RESIDUAL_TOL:
        raise SolvabilityError(f"L u = 1 residual {residual:.2e} above {SOLVE_RESIDUAL_TOL:.0e}")
    return LInverseOne(u, residual, kdim, align)


def classify_q(q, L):
    """(n0, z0) from the sign of q, with ``|q| <= 1e-6 L`` read as zero."""
    if abs(q) <= Q_ZERO_BAND * L:
        return 0, 1
    return (1, 0) if q < 0 else (0, 0)


def index_quantity(wave, N=None):
    sol = solve_L_inverse_one(wave, N)
    N = sol.u.size
    L = wave.params.L
    q = sol.inner_one(L)
    n0, z0 = classify_q(q, L)
    nL = operators.spectrum(operators.assemble_L(wave, N)).neg_count
    nR0 = operators.spectrum(operators.assemble_QL(wave, N)).neg_count
    formula = nL - n0 - z0
    return IndexReport(q, n0, z0, nL, formula, nR0, formula == nR0, N,
                       {"solve_residual": sol.residual, "kernel_alignment": sol.kernel_alignment})


def mass_derivative(p, c, L, branch=Branch.POSITIVE, h=None, N=256):
    """Central difference of ``c -> int phi^2`` along the family of fixed period."""
    h = 1e-4 * c if h is None else h
    lo = solve_wave(p, c - h, L, branch, N=N).mass()
    hi = solve_wave(p, c + h, L, branch, N=N).mass()
    return (hi - lo) / (2 * h)


@dataclass
class ThresholdResult:
    p: int
    L0: float
    c_star: float
    bracket: tuple
    reference: float  # closed-form threshold constant / L0^2
    rel_error: float
    rows: list  # (c, q, nR0) for every evaluated c, sorted by c


def _q_of_c(p, c, L0, N):
    w = solve_wave(p, c, L0, Branch.SIGN_CHANGING, N=N)
    rep = index_quantity(w)
    return rep.q, rep.nR0_direct


def threshold_scan(p, L0, c_lo, c_hi, steps=8, N=256, rtol=BISECTION_RTOL):
    """Locate the speed at which q changes sign on the sign-changing family.

    ``steps`` equally spaced speeds bracket the first sign change, which is
    then bisected to relative width ``rtol``.
    """
    if p not in THRESHOLD_CONSTANTS:
        raise ValueError(f"threshold scan is defined for p in {sorted(THRESHOLD_CONSTANTS)}")
    if not (0 < c_lo < c_hi) or steps < 2:
        raise ValueError("need 0 < c_lo < c_hi and steps >= 2")
    rows = {}

    def q_at(c):
        if c not in rows:
            rows[c] = _q_of_c(p, c, L0, N)
        return rows[c][0]

    cs = np.linspace(c_lo, c_hi, steps)
    qs = [q_at(float(c)) for c in cs]
    a = b = None
    for i in range(steps - 1):
        if np.sign(qs[i]) != np.sign(qs[i + 1]) or qs[i] == 0.0:
            a, b = float(cs[i]), float(cs[i + 1])
            break
    if a is None:
        raise NoSignChangeError(
            f"q keeps one sign on c in [{c_lo}, {c_hi}] (p={p}, L0={L0})")
    qa = q_at(a)
    while (b - a) > rtol * 0.5 * (a + b):
        m = 0.5 * (a + b)
        qm = q_at(m)
        if np.sign(qm) == np.sign(qa):
            a, qa = m, qm
        else:
            b = m
    c_star = 0.5 * (a + b)
    ref = THRESHOLD_CONSTANTS[p] / L0**2
    table = [(c, q, n) for c, (q, n) in sorted(rows.items())]
    return ThresholdResult(p, L0, c_star, (a, b), ref, abs(c_star - ref) / ref, table)

