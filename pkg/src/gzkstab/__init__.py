"""Periodic waves of the generalized Zakharov-Kuznetsov equation and their
transverse spectral stability."""

from .errors import GZKError
from .index import IndexReport, index_quantity, solve_L_inverse_one, threshold_scan
from .instability import (
    GrowthCurve,
    InstabilityVerdict,
    Verdict,
    evolve_linearized,
    f_of_k,
    find_k0,
    generalized_check,
    transverse_spectrum,
    verdict,
)
from .operators import (
    SpectralOperator,
    SpectrumReport,
    assemble_L,
    assemble_P,
    assemble_QL,
    assemble_R,
    assemble_transverse,
    derivative_ops,
    spectrum,
)
from .wave import (
    Branch,
    PeriodicWave,
    PhasePortraitInfo,
    WaveParams,
    classify_phase_plane,
    constant_wave,
    period_of_B,
    solve_wave,
    wave_residual,
)

__version__ = "0.1.0"
