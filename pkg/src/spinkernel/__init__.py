"""Fidelity-kernel SVM phase classification for anisotropic spin-1/2 chains.

Ground states of the transverse-field XY / XX / XXZ chain family are
compared through the fidelity kernel |<psi(x)|psi(x')>|^2, either in
closed form (free-fermion sector) or by exact diagonalization.  On top
of that sit a hard-margin kernel SVM locating pseudo-critical points, a
SWAP-test shot-noise sampler, Chebyshev shot-requirement bounds, and
finite-size drift fits.
"""

from .model import ModelParams, HamiltonianOperator, build_hamiltonian
from .freefermion import (
    MomentumGrid,
    BogoliubovState,
    bogoliubov_state,
    fidelity_xy,
    theta_sensitivity,
    free_energy_sum,
)
from .ed import GroundState, ground_state, fidelity_ed, EdConvergenceError
from .kernel import (
    GramMatrix,
    FidelityScan,
    AnalyticEngine,
    EdEngine,
    gram,
    fidelity_scan,
    benchmark_critical,
)
from .swaptest import ShotConfig, sample_entry, sample_gram
from .svm import LabeledSet, SvmModel, train, decision, boundary, midpoint_diagnostics
from .resources import (
    EnsembleStats,
    ShotBound,
    ShotBounds,
    ensemble_stats,
    shots_spread,
    shots_ca,
    kernel_histogram,
)
from .fss import DriftData, FitResult, fit_power, fit_bkt, FitError

__version__ = "0.1.0"
