"""Shared test oracles, independent of the library's computational paths.

The dense Hamiltonian here is assembled from Kronecker products of Pauli
matrices (site j occupies bit j, least-significant first), so it shares
no code with the package's matrix-free operator.  The brute-force SVM
dual solver enumerates active sets of the KKT system instead of doing
coordinate ascent.
"""

import numpy as np
import pytest

_I2 = np.eye(2)
_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
# sigma_y = i * SYI; products of two sigma_y are real: sy sy = -SYI SYI
_SYI = np.array([[0.0, -1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


def site_operator(n_sites, placed):
    """Kronecker chain with `placed[site]` inserted at the given sites."""
    m = np.eye(1)
    for j in range(n_sites):
        m = np.kron(placed.get(j, _I2), m)
    return m


def dense_hamiltonian(params):
    """Dense chain Hamiltonian by explicit Pauli Kronecker products."""
    n = params.n_sites
    h = np.zeros((1 << n, 1 << n))
    for i in range(n):
        j = (i + 1) % n
        h -= 0.5 * (1.0 + params.gamma) * site_operator(n, {i: _SX, j: _SX})
        h += 0.5 * (1.0 - params.gamma) * site_operator(n, {i: _SYI, j: _SYI})
        h -= params.delta * site_operator(n, {i: _SZ, j: _SZ})
        h -= params.h * site_operator(n, {i: _SZ})
    return h


def dense_ground_state(params):
    """Lowest eigenpair from the dense oracle."""
    evals, evecs = np.linalg.eigh(dense_hamiltonian(params))
    return evals[0], evecs[:, 0]


def brute_force_dual(kernel, labels, cap):
    """Exact maximizer of the SVM dual by KKT active-set enumeration.

    Every assignment of {at lower bound, at cap, free} to the M
    multipliers yields a linear system for the free ones plus the
    equality-constraint multiplier; feasible KKT-consistent candidates
    are collected and the best objective wins.  Exact for PSD kernels
    and exhaustive for M <= ~8.
    """
    kernel = np.asarray(kernel, dtype=float)
    y = np.asarray(labels, dtype=float)
    m = y.size
    q = kernel * np.outer(y, y)

    def objective(alpha):
        return alpha.sum() - 0.5 * alpha @ q @ alpha

    best = None
    for assignment in np.ndindex(*(3,) * m):
        free = [i for i, s in enumerate(assignment) if s == 2]
        alpha = np.where(np.array(assignment) == 1, cap, 0.0)
        k = len(free)
        # Unknowns: alpha_free and the equality multiplier mu.
        # Free rows: (q alpha)_i + mu y_i = 1; last row: sum alpha y = 0.
        a = np.zeros((k + 1, k + 1))
        b = np.zeros(k + 1)
        fixed = alpha.copy()
        for r, i in enumerate(free):
            fixed_contrib = q[i] @ fixed
            a[r, :k] = q[np.ix_([i], free)][0]
            a[r, k] = y[i]
            b[r] = 1.0 - fixed_contrib
        a[k, :k] = y[free]
        b[k] = -(fixed * y).sum()
        try:
            sol = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            continue
        if np.abs(a @ sol - b).max() > 1e-7:
            continue  # ill-conditioned system, not a valid KKT candidate
        alpha[free] = sol[:k]
        mu = sol[k] if k else None
        if np.any(alpha < -1e-9) or np.any(alpha > cap + 1e-9):
            continue
        if abs((alpha * y).sum()) > 1e-9:
            continue
        if mu is not None and free:
            grad_free = 1.0 - q @ alpha - mu * y
            if np.abs(grad_free[free]).max() > 1e-6:
                continue  # stationarity of the free block must hold
        if mu is not None:
            # KKT signs for the bound variables.
            grad = 1.0 - q @ alpha - mu * y
            ok = True
            for i, s in enumerate(assignment):
                if s == 0 and grad[i] > 1e-9:
                    ok = False
                elif s == 1 and grad[i] < -1e-9:
                    ok = False
            if not ok:
                continue
        val = objective(alpha)
        if best is None or val > best[0]:
            best = (val, alpha.copy())
    if best is None:
        raise RuntimeError("no feasible KKT point found")
    return best


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20250810)
