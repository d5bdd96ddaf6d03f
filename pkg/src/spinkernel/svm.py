"""Hard-margin kernel SVM on precomputed Gram matrices.

The dual problem

    max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
    s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0

is solved by pairwise coordinate ascent (SMO).  The hard margin is
approximated by a large cap C (default 1e6): with noiseless separable
kernels no multiplier reaches it, while finite-shot (possibly non-PSD)
Gram matrices stay bounded.  Non-PSD inputs are solved as given; a
warning reports the most negative eigenvalue.

The zero crossing of the signed decision function d(x) along the control
axis is the SVM's pseudo-critical estimate.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .kernel import GramMatrix, kernel_value, _with_control
from .model import ModelParams

DEFAULT_C = 1e6
#: Multipliers below this fraction of the largest one are treated as zero.
SV_RELATIVE_THRESHOLD = 1e-8


class SvmConvergenceError(RuntimeError):
    """SMO failed to satisfy the KKT conditions within the sweep budget."""


@dataclass(frozen=True)
class LabeledSet:
    """Training points with phase labels along one control axis.

    Labels follow the windowed convention: y = -1 for the window below
    the transition (ordered side) and y = +1 above (disordered side).
    """

    points: tuple
    labels: np.ndarray
    control: str

    def __post_init__(self):
        if len(self.points) != len(self.labels):
            raise ValueError("labels must align with points")
        lab = set(np.unique(self.labels).tolist())
        if not lab <= {-1, 1}:
            raise ValueError(f"labels must be -1/+1, got {sorted(lab)}")
        if lab != {-1, 1}:
            raise ValueError("training set must contain both classes")

    @property
    def size(self) -> int:
        return len(self.points)

    def control_values(self) -> np.ndarray:
        if self.control == "h":
            return np.array([p.h for p in self.points])
        return np.array([p.delta for p in self.points])


def labeled_windows(base: ModelParams, control: str,
                    window_lo: tuple[float, float],
                    window_hi: tuple[float, float],
                    per_side: int) -> LabeledSet:
    """Equally spaced training windows on both sides of a transition.

    The windows must be disjoint with the lower one entirely below the
    upper one; their inner endpoints bracket the critical point.
    """
    if per_side < 1:
        raise ValueError("per_side must be >= 1")
    if not (window_lo[0] < window_lo[1] < window_hi[0] < window_hi[1]):
        raise ValueError(
            f"windows must satisfy lo[0] < lo[1] < hi[0] < hi[1], got "
            f"{window_lo} and {window_hi}")
    xs = np.concatenate([np.linspace(*window_lo, per_side),
                         np.linspace(*window_hi, per_side)])
    labels = np.concatenate([-np.ones(per_side, dtype=int),
                             np.ones(per_side, dtype=int)])
    points = tuple(_with_control(base, control, float(x)) for x in xs)
    return LabeledSet(points=points, labels=labels, control=control)


@dataclass
class SvmDiagnostics:
    sweeps: int = 0
    objective_history: list = field(default_factory=list)
    kkt_violation: float = np.inf
    kernel_min_eigenvalue: Optional[float] = None
    converged: bool = False


@dataclass(frozen=True)
class SvmModel:
    """Trained dual solution: multipliers, bias and support-vector set."""

    points: tuple
    labels: np.ndarray
    alphas: np.ndarray
    bias: float
    C: float
    kind: str
    control: str
    provenance: str
    diagnostics: SvmDiagnostics

    @property
    def sv_index(self) -> np.ndarray:
        amax = self.alphas.max()
        if amax <= 0.0:
            return np.array([], dtype=int)
        return np.flatnonzero(self.alphas > SV_RELATIVE_THRESHOLD * amax)

    def control_values(self) -> np.ndarray:
        if self.control == "h":
            return np.array([p.h for p in self.points])
        return np.array([p.delta for p in self.points])

    def dominant_support_vectors(self) -> tuple[int, int, bool]:
        """Largest-multiplier SV on each side of the transition.

        Ties go to the point nearest the window's inner endpoint.  The
        third element flags an ambiguous identification (a second SV on
        either side carries a comparable multiplier).
        """
        xs = self.control_values()
        sv = self.sv_index
        if sv.size == 0:
            raise ValueError("model has no support vectors")
        picks = []
        ambiguous = False
        for side, inner_sign in ((-1, +1), (+1, -1)):
            cand = sv[self.labels[sv] == side]
            if cand.size == 0:
                raise ValueError(f"no support vectors with label {side}")
            a = self.alphas[cand]
            near_max = a >= (1.0 - 1e-9) * a.max()
            tied = cand[near_max]
            # inner endpoint: largest x in the lower window, smallest in
            # the upper one
            pick = tied[np.argmax(inner_sign * xs[tied])]
            if np.sort(a)[::-1][1:2].size and np.sort(a)[::-1][1] > 0.5 * a.max():
                ambiguous = True
            picks.append(int(pick))
        return picks[0], picks[1], ambiguous

    def to_json_dict(self, config_hash: str = "none") -> dict:
        return {
            "schema": "spinkernel-svm-v1",
            "config_hash": config_hash,
            "C": self.C,
            "kind": self.kind,
            "control": self.control,
            "provenance": self.provenance,
            "bias": self.bias,
            "alphas": [float(a) for a in self.alphas],
            "labels": [int(v) for v in self.labels],
            "sv_index": [int(i) for i in self.sv_index],
            "points": [{"gamma": p.gamma, "delta": p.delta, "h": p.h,
                        "n_sites": p.n_sites} for p in self.points],
            "diagnostics": {
                "sweeps": self.diagnostics.sweeps,
                "objective": self.diagnostics.objective_history[-1]
                if self.diagnostics.objective_history else None,
                "kkt_violation": self.diagnostics.kkt_violation,
                "kernel_min_eigenvalue":
                    self.diagnostics.kernel_min_eigenvalue,
                "converged": self.diagnostics.converged,
            },
        }

    def write_json(self, path: Path, config_hash: str = "none"):
        Path(path).write_text(
            json.dumps(self.to_json_dict(config_hash), sort_keys=True) + "\n")


def _dual_objective(alpha, y, K):
    u = alpha * y
    return float(alpha.sum() - 0.5 * (u @ K @ u))


def train(K: GramMatrix, data: LabeledSet, C: float = DEFAULT_C,
          tol: float = 1e-6, max_sweeps: int = 10000) -> SvmModel:
    """Maximize the kernel dual by pairwise ascent to KKT tolerance `tol`.

    Each iteration picks the most violating pair for the equality
    constraint, solves the one-dimensional subproblem exactly (endpoint
    search when the pair direction is not concave, as happens for
    non-PSD sampled kernels), and stops when the KKT gap drops below
    `tol`.  Selection is deterministic, so retraining is reproducible.
    Raises SvmConvergenceError when the gap is still open after
    `max_sweeps` sweeps (m pair updates each).
    """
    if C <= 0:
        raise ValueError(f"C must be > 0, got {C}")
    m = data.size
    if K.size != m or any(kp.key != dp.key
                          for kp, dp in zip(K.points, data.points)):
        raise ValueError("Gram matrix points do not match the labeled set")
    Km = K.values
    y = data.labels.astype(float)
    alpha = np.zeros(m)
    diag = SvmDiagnostics()
    min_eig = float(np.linalg.eigvalsh(Km)[0])
    diag.kernel_min_eigenvalue = min_eig
    if min_eig < -1e-10:
        warnings.warn(
            f"training kernel is not PSD (min eigenvalue {min_eig:.3e}); "
            "solving the dual on the matrix as given", stacklevel=2)

    f = np.zeros(m)  # f_i = sum_j alpha_j y_j K_ij, kept incrementally
    kdiag = np.diag(Km).copy()
    tau = 1e-12
    max_iter = max_sweeps * m
    it = 0
    while True:
        # KKT gap: over directions that can still move, the largest and
        # smallest values of y_i - f_i (the bias bracket).
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        lo_mask = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        g = y - f
        m_up = np.max(g[up]) if np.any(up) else -np.inf
        m_lo = np.min(g[lo_mask]) if np.any(lo_mask) else np.inf
        if m_up - m_lo <= tol:
            diag.converged = True
            break
        if it >= max_iter:
            break
        i = int(np.flatnonzero(up)[np.argmax(g[up])])
        # second-order selection: among violating partners, take the one
        # with the largest one-step gain (keeps the search on the
        # physically dominant pairs and matches reference SMO behavior)
        cand = lo_mask & (g < g[i] - tau)
        idx = np.flatnonzero(cand)
        slopes = g[i] - g[idx]
        etas = np.maximum(kdiag[i] + kdiag[idx] - 2.0 * Km[i, idx], tau)
        j = int(idx[np.argmax(slopes * slopes / etas)])
        # move alpha_i along +y_i and alpha_j along -y_j by d >= 0
        d_hi = min(C - alpha[i] if y[i] > 0 else alpha[i],
                   alpha[j] if y[j] > 0 else C - alpha[j])
        eta = max(kdiag[i] + kdiag[j] - 2.0 * Km[i, j], tau)
        d = min((g[i] - g[j]) / eta, d_hi)
        if d <= 0.0:
            # numerically stuck pair: stop at the current gap
            diag.converged = m_up - m_lo <= max(tol, 1e-9 * max(1.0, abs(m_up)))
            break
        alpha[i] += y[i] * d
        alpha[j] -= y[j] * d
        np.clip(alpha, 0.0, C, out=alpha)
        # d(alpha_i y_i) = +d and d(alpha_j y_j) = -d
        f += d * (Km[i] - Km[j])
        it += 1
        if it % m == 0:
            diag.objective_history.append(_dual_objective(alpha, y, Km))
    diag.sweeps = it // m + (1 if it % m else 0)
    diag.objective_history.append(_dual_objective(alpha, y, Km))
    if not diag.converged:
        raise SvmConvergenceError(
            f"pairwise ascent not converged after {diag.sweeps} sweeps "
            f"(KKT tol {tol})")

    # Bias from the support-vector average of y_k - sum_i a_i y_i K_ik.
    amax = alpha.max()
    sv = np.flatnonzero(alpha > SV_RELATIVE_THRESHOLD * max(amax, 1e-300))
    if sv.size == 0:
        raise SvmConvergenceError("degenerate solution without support vectors")
    u = alpha * y
    bias = float(np.mean([y[k] - float(u[sv] @ Km[sv, k]) for k in sv]))
    d_all = Km @ u + bias
    kkt = 0.0
    for i in range(m):
        g = y[i] * d_all[i]
        if alpha[i] <= SV_RELATIVE_THRESHOLD * amax:
            kkt = max(kkt, 1.0 - g)
        elif alpha[i] >= C * (1 - 1e-12):
            kkt = max(kkt, g - 1.0)
        else:
            kkt = max(kkt, abs(g - 1.0))
    diag.kkt_violation = float(max(kkt, 0.0))
    return SvmModel(points=data.points, labels=data.labels.copy(),
                    alphas=alpha, bias=bias, C=C, kind=K.kind,
                    control=data.control, provenance=K.provenance,
                    diagnostics=diag)


def decision(model: SvmModel, x, engine) -> float:
    """Signed decision value d(x) = sum_i a_i y_i K(x_i, x) + bias.

    `x` may be a bare control value (the remaining parameters are taken
    from the training points) or a full ModelParams.
    """
    px = x if isinstance(x, ModelParams) else _with_control(
        model.points[0], model.control, float(x))
    n = px.n_sites
    sv = model.sv_index
    total = model.bias
    for i in sv:
        k = kernel_value(engine, model.points[i], px, model.kind, n)
        total += model.alphas[i] * model.labels[i] * k
    return float(total)


def boundary(model: SvmModel, bracket: tuple[float, float], engine,
             xtol: float = 1e-8) -> float:
    """Bisect the decision function's zero crossing inside `bracket`."""
    lo, hi = float(bracket[0]), float(bracket[1])
    d_lo = decision(model, lo, engine)
    d_hi = decision(model, hi, engine)
    if d_lo == 0.0:
        return lo
    if d_hi == 0.0:
        return hi
    if d_lo * d_hi > 0:
        raise ValueError(
            f"no sign change in bracket ({lo}, {hi}): d={d_lo:.3e}, {d_hi:.3e}")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        d_mid = decision(model, mid, engine)
        if d_mid == 0.0:
            return mid
        if d_mid * d_lo < 0:
            hi = mid
        else:
            lo, d_lo = mid, d_mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class MidpointDiagnostics:
    """Similarity curves to the two dominant SVs and their balance point."""

    x_left: float
    x_right: float
    grid: np.ndarray
    curve_left: np.ndarray
    curve_right: np.ndarray
    x_mid: float
    ambiguous: bool

    def write_csv(self, path: Path, config_hash: str = "none"):
        lines = ["# spinkernel-csv v1", f"# config-hash={config_hash}",
                 f"# x_left={self.x_left!r} x_right={self.x_right!r} "
                 f"x_mid={self.x_mid!r} ambiguous={int(self.ambiguous)}",
                 "x,sim_left,sim_right"]
        for x, fl, fr in zip(self.grid, self.curve_left, self.curve_right):
            lines.append(f"{float(x)!r},{float(fl)!r},{float(fr)!r}")
        Path(path).write_text("\n".join(lines) + "\n")


def midpoint_diagnostics(model: SvmModel, engine,
                         grid: Sequence[float]) -> MidpointDiagnostics:
    """Emit f(x_L, .) and f(x_R, .) curves and their crossing point.

    In the symmetric two-dominant-SV regime the equality constraint
    forces equal multipliers, the bias nearly vanishes, and the decision
    boundary sits where the two similarities balance.
    """
    i_l, i_r, ambiguous = model.dominant_support_vectors()
    p_l, p_r = model.points[i_l], model.points[i_r]
    xs = model.control_values()
    x_l, x_r = float(xs[i_l]), float(xs[i_r])
    n = p_l.n_sites
    grid = np.asarray(grid, dtype=float)

    def sim(p_ref, x):
        px = _with_control(model.points[0], model.control, float(x))
        return kernel_value(engine, p_ref, px, model.kind, n)

    curve_l = np.array([sim(p_l, x) for x in grid])
    curve_r = np.array([sim(p_r, x) for x in grid])

    def balance(x):
        return sim(p_l, x) - sim(p_r, x)

    lo, hi = x_l, x_r
    g_lo, g_hi = balance(lo), balance(hi)
    if g_lo == 0.0:
        x_mid = lo
    elif g_hi == 0.0 or g_lo * g_hi > 0:
        x_mid = hi if g_hi == 0.0 else float("nan")
    else:
        while hi - lo > 1e-10:
            mid = 0.5 * (lo + hi)
            g_mid = balance(mid)
            if g_mid == 0.0:
                lo = hi = mid
            elif g_mid * g_lo < 0:
                hi = mid
            else:
                lo, g_lo = mid, g_mid
        x_mid = 0.5 * (lo + hi)
    return MidpointDiagnostics(x_left=x_l, x_right=x_r, grid=grid,
                               curve_left=curve_l, curve_right=curve_r,
                               x_mid=x_mid, ambiguous=ambiguous)
