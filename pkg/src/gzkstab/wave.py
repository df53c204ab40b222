"""Periodic traveling-wave profiles of the generalized ZK equation.

A profile solves

    -phi'' + c phi - phi**(p+1) / (p+1) = 0,

i.e. it is the first component of a periodic orbit of the planar system
``phi' = xi, xi' = c phi - phi**(p+1)/(p+1)`` lying on the energy level

    xi**2/2 - c phi**2/2 + phi**(p+2) / ((p+1)(p+2)) = B.

Orbits with ``B0 < B < 0`` circle the centre ``phi* = ((p+1)c)**(1/p)`` and
give positive waves; for even integer ``p`` the levels ``B > 0`` surround both
centres and give sign-changing waves with zero mean.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import interpolate, optimize, special

from . import fourier
from .errors import (
    DegenerateOrbitError,
    NewtonDivergenceError,
    NoPeriodicOrbitError,
    NoWaveForPeriodError,
    QuadratureError,
    ResolutionError,
)

log = logging.getLogger(__name__)

DEFAULT_N = 256
MAX_N = 2048
QUAD_TOL = 1e-13
NEWTON_TOL = 1e-10
FOURIER_TAIL_TOL = 1e-12


class Branch(str, Enum):
    POSITIVE = "positive"
    SIGN_CHANGING = "sign-changing"


def is_even_integer(p):
    return float(p).is_integer() and int(p) % 2 == 0


@dataclass(frozen=True)
class WaveParams:
    p: float
    c: float
    L: float
    branch: Branch
    B: float

    def __post_init__(self):
        object.__setattr__(self, "branch", Branch(self.branch))
        if not (self.p > 0 and self.c > 0 and self.L > 0):
            raise ValueError(f"p, c, L must be positive: {self}")
        B0 = energy_floor(self.p, self.c)
        if self.branch is Branch.POSITIVE and not (B0 < self.B < 0):
            raise ValueError(f"positive branch needs B in ({B0}, 0), got {self.B}")
        if self.branch is Branch.SIGN_CHANGING:
            if not is_even_integer(self.p):
                raise ValueError("sign-changing branch needs an even integer p")
            if not self.B > 0:
                raise ValueError(f"sign-changing branch needs B > 0, got {self.B}")


@dataclass(frozen=True)
class PhasePortraitInfo:
    equilibria: tuple  # ((phi, xi, kind), ...)
    B0: float
    separatrix_energy: float = 0.0


def center_amplitude(p, c):
    return ((p + 1.0) * c) ** (1.0 / p)


def energy_floor(p, c):
    """Energy of the centre, ``B0 = -p (p+1)^(2/p) c^((p+2)/p) / (2(p+2))``."""
    return -p * (p + 1.0) ** (2.0 / p) * c ** ((p + 2.0) / p) / (2.0 * (p + 2.0))


def small_amplitude_period(p, c):
    """Limit of the period at the centre, ``2 pi / sqrt(p c)``."""
    return 2.0 * np.pi / np.sqrt(p * c)


def _power(h, m):
    # even integer exponents are the only ones used with negative bases
    if float(m).is_integer():
        return h ** int(m)
    return h**m


def energy(phi, xi, p, c):
    return 0.5 * xi**2 - 0.5 * c * phi**2 + _power(phi, p + 2) / ((p + 1.0) * (p + 2.0))


def orbit_polynomial(h, p, c, B):
    """``xi**2`` on the level set ``B`` as a function of ``phi = h``."""
    return -2.0 * _power(h, p + 2) / ((p + 1.0) * (p + 2.0)) + c * h**2 + 2.0 * B


def classify_phase_plane(p, c):
    if not (p > 0 and c > 0):
        raise ValueError("p and c must be positive")
    a = center_amplitude(p, c)
    eq = [(0.0, 0.0, "saddle"), (a, 0.0, "center")]
    if is_even_integer(p):
        eq.append((-a, 0.0, "center"))
    return PhasePortraitInfo(tuple(eq), energy_floor(p, c), 0.0)


def _root(f, lo, hi):
    return optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def turning_points(p, c, B):
    """Minimum and maximum ``(b1, b2)`` of the profile on the level set ``B``.

    For ``B0 < B < 0`` the orbit around the positive centre is returned; for
    ``B > 0`` (even integer ``p`` only) the outer orbit, for which ``b1 = -b2``.
    """
    B0 = energy_floor(p, c)
    if not (B0 < B < 0 or B > 0):
        raise NoPeriodicOrbitError(f"no periodic orbit at B={B!r} (need B in ({B0}, 0) or B > 0)")
    if B > 0 and not is_even_integer(p):
        raise NoPeriodicOrbitError("levels B > 0 are closed orbits only for even integer p")

    def F(h):
        return orbit_polynomial(h, p, c, B)

    a = center_amplitude(p, c)
    if not F(a) > 0:
        raise NoPeriodicOrbitError(f"root bracketing failed at B={B!r}: level too close to the centre")
    hmax = 2.0 * a
    while F(hmax) >= 0:
        hmax *= 2.0
        if not np.isfinite(hmax):
            raise NoPeriodicOrbitError("root bracketing failed: no upper turning point")
    b2 = _root(F, a, hmax)
    if B > 0:
        return -b2, b2
    return _root(F, 0.0, a), b2


# ---------------------------------------------------------------------------
# period quadrature

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_EPS = np.finfo(float).eps


def _inverse_sqrt_reduced(theta, b1, b2, p, c, B, tau=None):
    """``1/sqrt(G)`` where ``xi**2 = (h-b1)(b2-h) G(h)`` and
    ``h = b1 + (b2-b1) sin(theta)**2``.

    ``xi**2`` is evaluated either directly or expanded about the nearer
    turning point (where it vanishes), whichever has the smaller rounding
    bound; the expansion keeps full precision next to the turning points, the
    direct form near the saddle. For symmetric orbits pass ``tau = pi/4 -
    theta`` as well so the saddle crossing ``h = -b2 sin(2 tau)`` is exact.
    """
    w = b2 - b1
    s2 = np.sin(theta) ** 2
    c2 = np.cos(theta) ** 2
    lower = theta <= 0.25 * np.pi
    e = np.where(lower, b1, b2)
    d = np.where(lower, w * s2, -w * c2)
    far = np.where(lower, w * c2, w * s2)
    m = p + 2.0
    kappa = 2.0 / ((p + 1.0) * (p + 2.0))
    ratio = np.maximum(d / e, -1.0)
    with np.errstate(divide="ignore"):
        pow_diff = np.abs(e) ** m * np.expm1(m * np.log1p(ratio))
    lin = c * d * (2.0 * e + d)
    expanded = lin - kappa * pow_diff
    err_expanded = np.abs(lin) + kappa * np.abs(pow_diff)

    h = e + d if tau is None else -b2 * np.sin(2.0 * tau)
    hm = np.abs(h) ** m
    direct = c * h**2 + 2.0 * B - kappa * hm
    err_direct = c * h**2 + 2.0 * abs(B) + kappa * hm

    F = np.where(err_direct < err_expanded, direct, expanded)
    G = F / (np.abs(d) * far)
    return 1.0 / np.sqrt(G)


def _gl_panels(f, a, b):
    half = 0.5 * (b - a)
    x = half[:, None] * _GL_X + 0.5 * (a + b)[:, None]
    return half * (f(x) @ _GL_W)


def _adaptive_gauss(f, a, b, tol, max_levels=60, initial_panels=8, max_panels=4096):
    """Composite 16-point Gauss-Legendre with panel bisection.

    Each panel value is compared with the sum over its two halves; panels whose
    discrepancy exceeds both their share of ``tol * |I|`` and the rounding
    level of the panel value are bisected. Returns the
    total and the accepted (left, right, value) panels in ascending order.
    """
    edges = np.linspace(a, b, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    whole = _gl_panels(f, lo, hi)
    done = []
    total_guess = abs(whole.sum())
    for _ in range(max_levels):
        mid = 0.5 * (lo + hi)
        left = _gl_panels(f, lo, mid)
        right = _gl_panels(f, mid, hi)
        halves = left + right
        if not np.all(np.isfinite(halves)):
            raise QuadratureError("non-finite integrand in period quadrature")
        total_guess = abs(halves.sum() + sum(v for *_, v in done))
        err = np.abs(whole - halves)
        ok = (err <= tol * total_guess * (hi - lo) / (b - a)) | (err <= 64 * _EPS * np.abs(halves))
        for l_, m_, h_, vl, vr in zip(lo[ok], mid[ok], hi[ok], left[ok], right[ok]):
            done.append((l_, m_, vl))
            done.append((m_, h_, vr))
        if ok.all():
            done.sort()
            return sum(v for *_, v in done), done
        bad = ~ok
        if 2 * bad.sum() > max_panels:
            raise QuadratureError(f"period quadrature needs more than {max_panels} panels")
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        whole = np.concatenate([left[bad], right[bad]])
    raise QuadratureError(f"period quadrature did not converge after {max_levels} refinements")


class _OrbitQuadrature:
    """Half-period integral of one orbit together with its panel structure.

    ``L = 4 * int_0^{pi/2} dtheta / sqrt(G)``. Orbits symmetric about the
    saddle (``b1 = -b2``) are folded: the integral runs over ``tau = pi/4 -
    theta`` in ``[0, pi/4]`` and is doubled.
    """

    def __init__(self, p, c, B, tol):
        if B == energy_floor(p, c):
            raise DegenerateOrbitError("B equals B0: the orbit is the centre itself")
        self.b1, self.b2 = b1, b2 = turning_points(p, c, B)
        self.symmetric = b1 == -b2
        if self.symmetric:
            def f(tau):
                return _inverse_sqrt_reduced(0.25 * np.pi - tau, b1, b2, p, c, B, tau=tau)
            upper = 0.25 * np.pi
        else:
            def f(theta):
                return _inverse_sqrt_reduced(theta, b1, b2, p, c, B)
            upper = 0.5 * np.pi
        # close to the centre the expansion about a turning point cancels
        # ~ phi*/(b2-b1) digits; no tolerance below that floor is attainable
        floor = 1e3 * _EPS * max(abs(b1), abs(b2)) / (b2 - b1)
        self.f = f
        self.integral, self.panels = _adaptive_gauss(f, 0.0, upper, max(tol, floor))

    @property
    def period(self):
        return (8.0 if self.symmetric else 4.0) * self.integral

    def distance_table(self, sub=4):
        """Pairs ``(s, theta)`` with ``s`` the distance travelled from the minimum."""
        lo = np.array([pa[0] for pa in self.panels])
        hi = np.array([pa[1] for pa in self.panels])
        t = np.linspace(0.0, 1.0, sub + 1)
        edges = lo[:, None] + (hi - lo)[:, None] * t
        pieces = _gl_panels(self.f, edges[:, :-1].ravel(), edges[:, 1:].ravel())
        v = np.concatenate([[0.0], edges[:, 1:].ravel()])
        cum = 2.0 * np.concatenate([[0.0], np.cumsum(pieces)])
        if not self.symmetric:
            return cum, v
        quarter = cum[-1]
        s = np.concatenate([(quarter - cum)[::-1], quarter + cum[1:]])
        theta = np.concatenate([(0.25 * np.pi - v)[::-1], 0.25 * np.pi + v[1:]])
        return s, theta


def period_of_B(p, c, B, tol=QUAD_TOL):
    """Period of the orbit on energy level ``B``.

    With ``h = b1 + (b2-b1) sin^2(theta)`` both square-root endpoint
    singularities cancel and ``L = 4 * int_0^{pi/2} dtheta / sqrt(G)``.
    """
    return _OrbitQuadrature(p, c, B, tol).period


def _quadrature_profile(p, c, B, L, N, tol=QUAD_TOL):
    """Invert the half-period quadrature to sample phi with its maximum at x=0."""
    orbit = _OrbitQuadrature(p, c, B, tol)
    s, theta = orbit.distance_table()
    # scaled so the half period lands on L/2 exactly
    s = s * (0.5 * L / s[-1])
    theta_of_s = interpolate.PchipInterpolator(s, theta)
    x = fourier.grid(L, N)
    xm = np.minimum(x, L - x)
    th = theta_of_s(np.clip(0.5 * L - xm, 0.0, 0.5 * L))
    return orbit.b1 + (orbit.b2 - orbit.b1) * np.sin(th) ** 2


# ---------------------------------------------------------------------------
# period -> energy level


def _energy_coordinate(branch, p, c):
    """Map y in R to B on the branch; L(B(y)) is monotone in practice."""
    if branch is Branch.POSITIVE:
        B0 = energy_floor(p, c)
        return lambda y: B0 * special.expit(-y)
    return lambda y: np.exp(y)


def energy_brackets(p, c, L, branch, tol=QUAD_TOL):
    """All sign changes of ``period(B) - L`` on a sampled grid of the branch.

    Returns ``(y_coordinate, brackets)`` where each bracket is a pair of
    coordinates enclosing a root.
    """
    branch = Branch(branch)
    to_B = _energy_coordinate(branch, p, c)

    def mismatch(y):
        return period_of_B(p, c, to_B(y), tol) - L

    if branch is Branch.POSITIVE:
        alpha = small_amplitude_period(p, c)
        if L <= alpha:
            raise NoWaveForPeriodError(
                f"period below α(c): L={float(L)!r} <= 2π/√(pc) = {float(alpha)!r}"
            )
        ys = list(np.arange(-24.0, 40.0 + 1e-9, 2.0))
        vals = [mismatch(y) for y in ys]
        while vals[-1] < 0:
            if ys[-1] > 700:
                raise NoWaveForPeriodError(f"period L={L!r} is beyond the reach of the solver")
            ys.append(ys[-1] + 8.0)
            vals.append(mismatch(ys[-1]))
        if vals[0] > 0:
            raise NoWaveForPeriodError(f"period L={L!r} too close to alpha(c) to bracket")
    else:
        if not is_even_integer(p):
            raise NoWaveForPeriodError("sign-changing waves need an even integer p")
        ys = list(np.arange(-30.0, 30.0 + 1e-9, 2.0))
        vals = [mismatch(y) for y in ys]
        while vals[0] < 0:
            if ys[0] < -700:
                raise NoWaveForPeriodError(f"period L={L!r} is beyond the reach of the solver")
            ys.insert(0, ys[0] - 8.0)
            vals.insert(0, mismatch(ys[0]))
        while vals[-1] > 0:
            if ys[-1] > 700:
                raise NoWaveForPeriodError(f"period L={L!r} is below the reach of the solver")
            ys.append(ys[-1] + 8.0)
            vals.append(mismatch(ys[-1]))
    brackets = []
    for i in range(len(ys) - 1):
        if vals[i] == 0.0:
            brackets.append((ys[i], ys[i]))
        elif vals[i] * vals[i + 1] < 0:
            brackets.append((ys[i], ys[i + 1]))
    if not brackets:
        raise NoWaveForPeriodError(f"no energy level with period {L!r} on the {branch.value} branch")
    return mismatch, to_B, brackets


def energy_for_period(p, c, L, branch, tol=QUAD_TOL):
    """Energy level B whose orbit has period L, plus every bracket found."""
    mismatch, to_B, brackets = energy_brackets(p, c, L, branch, tol)
    if len(brackets) > 1:
        log.warning("period map not monotone: %d brackets for L=%r, using the first", len(brackets), L)
    lo, hi = brackets[0]
    y = lo if lo == hi else optimize.brentq(mismatch, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return float(to_B(y)), [(float(to_B(a)), float(to_B(b))) for a, b in brackets]


# ---------------------------------------------------------------------------
# Newton refinement on the collocation grid


@dataclass
class PeriodicWave:
    params: WaveParams
    phi: np.ndarray
    residual: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def N(self):
        return self.phi.size

    @property
    def x(self):
        return fourier.grid(self.params.L, self.N)

    @property
    def fourier(self):
        return np.fft.rfft(self.phi) / self.N

    @property
    def extrema(self):
        return float(self.phi.min()), float(self.phi.max())

    def derivative(self, order=1):
        return fourier.diff(self.phi, self.params.L, order)

    def on_grid(self, N):
        return fourier.resample(self.phi, N)

    def mass(self):
        """``int_0^L phi^2 dx``."""
        return float(np.sum(self.phi**2) * self.params.L / self.N)


def profile_residual(phi, p, c, L):
    return -fourier.diff(phi, L, 2) + c * phi - _power(phi, p + 1) / (p + 1.0)


def wave_residual(wave):
    """Max-norm of the profile equation residual, derivatives taken spectrally."""
    if wave.N == 0:
        raise ValueError("empty wave grid")
    P = wave.params
    return float(np.max(np.abs(profile_residual(wave.phi, P.p, P.c, P.L))))


def second_derivative_matrix(L, N):
    Q = fourier.real_basis(N)
    kap = fourier.basis_wavenumbers(L, N)
    return -(Q * kap**2) @ Q.T


def _newton_even(phi, p, c, L, tol, max_iter=60, max_halvings=20):
    """Newton iteration restricted to profiles even about x = 0.

    Evenness removes the translation mode spanned by phi', so the restricted
    Jacobian is invertible.
    """
    N = phi.size
    h = N // 2
    fold = np.minimum(np.arange(N), N - np.arange(N))
    E = np.zeros((N, h + 1))
    E[np.arange(N), fold] = 1.0
    D2 = second_derivative_matrix(L, N)
    u = phi[: h + 1].copy()

    def resid(v):
        return profile_residual(E @ v, p, c, L)

    r = resid(u)
    rn = np.max(np.abs(r))
    history = [rn]
    for it in range(max_iter):
        if rn < 1e-3 * tol:
            break
        full = E @ u
        J = (-D2 + np.diag(c - _power(full, p)))[: h + 1] @ E
        step = np.linalg.solve(J, -r[: h + 1])
        lam = 1.0
        for _ in range(max_halvings + 1):
            trial = u + lam * step
            with np.errstate(invalid="ignore", over="ignore"):
                rt = resid(trial)
            rtn = np.max(np.abs(rt))
            if np.isfinite(rtn) and rtn < rn:
                break
            lam *= 0.5
        else:
            if rn <= tol:
                break
            raise NewtonDivergenceError(
                f"Newton stalled at residual {rn:.3e} after {it} iterations", history
            )
        u, r, rn = trial, rt, rtn
        history.append(rn)
        if lam == 1.0 and np.max(np.abs(step)) < 1e-15 * np.max(np.abs(u)):
            break
    if not rn <= tol:
        raise NewtonDivergenceError(f"Newton residual {rn:.3e} above tolerance {tol:.1e}", history)
    return E @ u, rn, history


def canonical_phase(phi, L):
    """Shift phi so its maximum sits at x = 0 and symmetrize about it."""
    N = phi.size
    j = int(np.argmax(phi))
    s = j * L / N
    d1 = fourier.diff(phi, L, 1)
    d2 = fourier.diff(phi, L, 2)
    # Newton on phi'(x) = 0 from the best grid point, using trig interpolation
    kap = fourier.wavenumbers(L, N)
    h1 = np.fft.rfft(d1) / N
    h2 = np.fft.rfft(d2) / N
    weights = np.full(kap.size, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0

    def ev(hat, x):
        return np.sum(weights * (hat * np.exp(1j * kap * x)).real)

    for _ in range(20):
        ds = ev(h1, s) / ev(h2, s)
        s -= ds
        if abs(ds) < 1e-15 * L:
            break
    out = fourier.shift(phi, L, s)
    out = 0.5 * (out + np.roll(out[::-1], 1))
    return out


def solve_wave(p, c, L, branch=Branch.POSITIVE, N=DEFAULT_N, tol=NEWTON_TOL, quad_tol=QUAD_TOL,
               initial_guess=None, max_N=MAX_N):
    """Construct the L-periodic wave of speed c on the requested branch.

    The energy level is found from the period map, the quadrature is inverted
    to obtain a starting profile, and Newton on the Fourier collocation grid
    polishes it. The grid doubles until the top of the Fourier spectrum of
    phi drops below ``1e-12`` of its peak.

    Parameters
    ----------
    initial_guess : array, optional
        Starting profile in any phase; it is recentred on its maximum
        before Newton. Defaults to the quadrature profile.

    Raises
    ------
    NoWaveForPeriodError
        L is outside the range of the period map on this branch.
    NewtonDivergenceError
        Newton failed; ``history`` holds the residual sequence.
    """
    branch = Branch(branch)
    fourier.check_even(N)
    if branch is Branch.SIGN_CHANGING and not is_even_integer(p):
        raise NoWaveForPeriodError("sign-changing waves need an even integer p")
    B, brackets = energy_for_period(p, c, L, branch, quad_tol)
    params = WaveParams(p, c, L, branch, B)
    if initial_guess is None:
        phi = _quadrature_profile(p, c, B, L, N, quad_tol)
    else:
        phi = canonical_phase(fourier.resample(np.asarray(initial_guess, float), N), L)
    while True:
        phi, res, history = _newton_even(phi, p, c, L, tol)
        if fourier.tail_ratio(phi) < FOURIER_TAIL_TOL:
            break
        if 2 * N > max_N:
            raise ResolutionError(f"profile not resolved at N={N} (max {max_N})")
        N *= 2
        phi = fourier.resample(phi, N)
    wave = PeriodicWave(params, phi, res, {"newton_history": history, "energy_brackets": brackets})
    wave.residual = wave_residual(wave)
    if wave.residual > tol:
        raise NewtonDivergenceError(f"final residual {wave.residual:.3e} above {tol:.1e}", history)
    return wave


def constant_wave(p, c, L, N=DEFAULT_N):
    """The equilibrium phi = ((p+1)c)^(1/p) packaged as a degenerate wave.

    It is the B -> B0 end of the positive branch; the stored B is B0.
    """
    B0 = energy_floor(p, c)
    params = object.__new__(WaveParams)
    for k, v in dict(p=p, c=c, L=L, branch=Branch.POSITIVE, B=B0).items():
        object.__setattr__(params, k, v)
    phi = np.full(N, center_amplitude(p, c))
    w = PeriodicWave(params, phi, 0.0, {"constant": True})
    w.residual = wave_residual(w)
    return w
