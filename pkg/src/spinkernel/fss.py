"""Finite-size drift fits for pseudo-critical points.

Two empirical drift laws are supported:

    power:  x_c(N) = x_c + a N^(-p)          (continuous transitions)
    bkt:    x_c(N) = x_c + A / (ln N + B)^2  (BKT logarithmic drift)

Both are fitted by Levenberg-Marquardt with analytic Jacobians; the
1-sigma uncertainties come from the covariance of the linearized problem
scaled by the residual variance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class FitError(RuntimeError):
    """Levenberg-Marquardt failed (non-convergence or singular Jacobian)."""


@dataclass(frozen=True)
class DriftData:
    """Pseudo-critical estimates x_c(N) over increasing system sizes."""

    sizes: np.ndarray
    estimates: np.ndarray
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sizes", np.asarray(self.sizes, dtype=float))
        object.__setattr__(self, "estimates",
                           np.asarray(self.estimates, dtype=float))
        if self.sizes.size < 3:
            raise ValueError("need at least 3 (N, estimate) points")
        if self.sizes.size != self.estimates.size:
            raise ValueError("sizes and estimates must align")
        if np.any(np.diff(self.sizes) <= 0):
            raise ValueError("sizes must be strictly increasing")


@dataclass(frozen=True)
class FitResult:
    """Best-fit parameters with 1-sigma uncertainties and diagnostics."""

    model: str
    param_names: tuple
    params: np.ndarray
    sigmas: np.ndarray
    residual_norm: float
    converged: bool
    n_points: int

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "params": {n: float(v) for n, v in zip(self.param_names,
                                                   self.params)},
            "sigmas": {n: float(s) for n, s in zip(self.param_names,
                                                   self.sigmas)},
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "n_points": self.n_points,
        }

    def __getitem__(self, name: str) -> float:
        return float(self.params[self.param_names.index(name)])

    def sigma(self, name: str) -> float:
        return float(self.sigmas[self.param_names.index(name)])


def _levenberg_marquardt(residual, jacobian, p0, max_iter=500,
                         lam0=1e-3, ftol=1.5e-8, xtol=1.5e-8, gtol=1e-12):
    """Classic LM with multiplicative damping (x10 up, /10 down).

    Termination follows the usual relative criteria: relative cost
    improvement below `ftol`, step below `xtol` relative to the
    parameters, or a vanishing scaled gradient.  `residual(p)` may
    return None to reject a parameter point (domain violation); such
    steps are treated like cost increases.
    """
    p = np.asarray(p0, dtype=float)
    r = residual(p)
    if r is None:
        raise FitError(f"initial parameters {p0} violate the model domain")
    cost = float(r @ r)
    lam = lam0
    converged = False
    for _ in range(max_iter):
        J = jacobian(p)
        JtJ = J.T @ J
        g = J.T @ r
        if not np.all(np.isfinite(JtJ)):
            raise FitError("singular Jacobian (non-finite entries)")
        if np.abs(g).max() <= gtol * max(1.0, cost):
            converged = True
            break
        stepped = False
        while lam < 1e14:
            damp = JtJ + lam * np.diag(np.maximum(np.diag(JtJ), 1e-30))
            try:
                delta = np.linalg.solve(damp, -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_new = p + delta
            r_new = residual(p_new)
            if r_new is not None:
                cost_new = float(r_new @ r_new)
                if cost_new <= cost:
                    improvement = cost - cost_new
                    p, r, cost = p_new, r_new, cost_new
                    lam = max(lam / 10.0, 1e-15)
                    stepped = True
                    if improvement <= ftol * max(cost, 1e-300) \
                            or np.linalg.norm(delta) <= xtol * (xtol + np.linalg.norm(p)):
                        converged = True
                    break
            lam *= 10.0
        if not stepped:
            # No downhill step at any damping: stationary point.
            converged = True
        if converged:
            break
    if not converged:
        raise FitError(f"no convergence after {max_iter} iterations")
    return p, r


def _finish(model, names, p, r, jacobian, n_points) -> FitResult:
    J = jacobian(p)
    dof = n_points - p.size
    ssr = float(r @ r)
    sigma2 = ssr / dof if dof > 0 else 0.0
    try:
        cov = sigma2 * np.linalg.inv(J.T @ J)
        sigmas = np.sqrt(np.maximum(np.diag(cov), 0.0))
    except np.linalg.LinAlgError:
        sigmas = np.full(p.size, np.nan)
    return FitResult(model=model, param_names=names, params=p, sigmas=sigmas,
                     residual_norm=float(np.sqrt(ssr)), converged=True,
                     n_points=n_points)


def fit_power(data: DriftData,
              init: Optional[Sequence[float]] = None) -> FitResult:
    """Fit x_c(N) = x_c + a N^(-p).

    Default start: x_c from the largest size, p = 1, and a solved from
    the smallest size.
    """
    n = data.sizes
    x = data.estimates

    if init is None:
        xc0 = x[-1]
        p0 = 1.0
        a0 = (x[0] - xc0) * n[0] ** p0
        init = (xc0, a0, p0)

    def residual(q):
        xc, a, p = q
        return x - (xc + a * n ** (-p))

    def jacobian(q):
        _xc, a, p = q
        npow = n ** (-p)
        # residual = x - model, so J = -d(model)/dq
        return -np.column_stack([np.ones_like(n), npow,
                                 -a * np.log(n) * npow])

    p_opt, r = _levenberg_marquardt(residual, jacobian, init)
    return _finish("power", ("x_c", "a", "p"), p_opt, r, jacobian, n.size)


def fit_bkt(data: DriftData,
            init: Optional[Sequence[float]] = None) -> FitResult:
    """Fit the BKT drift x_c(N) = x_c + A / (ln N + B)^2.

    Steps that would push ln N + B nonpositive are rejected inside the
    optimizer.  Default start: x_c from the largest size, B = 0, A
    solved from the smallest size.
    """
    if data.sizes.size < 4:
        raise ValueError("BKT fit needs at least 4 points")
    if np.any(data.sizes < 2):
        raise ValueError("BKT fit needs all N >= 2")
    n = data.sizes
    x = data.estimates
    ln = np.log(n)

    if init is None:
        xc0 = x[-1]
        b0 = 0.0
        a0 = (x[0] - xc0) * (ln[0] + b0) ** 2
        init = (xc0, a0, b0)

    def residual(q):
        xc, amp, b = q
        den = ln + b
        if np.any(den <= 1e-9):
            return None
        return x - (xc + amp / den ** 2)

    def jacobian(q):
        _xc, amp, b = q
        den = ln + b
        return -np.column_stack([np.ones_like(n), den ** -2.0,
                                 -2.0 * amp * den ** -3.0])

    p_opt, r = _levenberg_marquardt(residual, jacobian, init)
    return _finish("bkt", ("x_c", "A", "B"), p_opt, r, jacobian, n.size)
