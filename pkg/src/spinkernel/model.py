"""Parameter space and matrix-free Hamiltonian for the anisotropic spin-1/2 chain.

The chain family (couplings in units of J = 1, periodic boundaries)

    H = - sum_i [ (1+gamma)/2 sx_i sx_{i+1} + (1-gamma)/2 sy_i sy_{i+1}
                  + delta sz_i sz_{i+1} ]  -  h sum_i sz_i

interpolates between the transverse-field Ising chain (gamma=1, delta=0),
the XY chain (0<gamma<1), the XX chain (gamma=0) and the XXZ chain
(gamma=0, delta!=0, h=0).

Basis convention: computational-basis bit b_i = 0 means sz_i = +1, and
site 1 is the least-significant bit.  All modules share this convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Largest chain the ED path will accept by default (state vectors only;
#: the 2^N x 2^N matrix is never formed).
DEFAULT_MAX_SITES = 24


@dataclass(frozen=True)
class ModelParams:
    """One point x = (gamma, delta, h, N) of the chain family.

    Parameters
    ----------
    gamma : float
        In-plane anisotropy, 0 <= gamma <= 1.
    delta : float
        Longitudinal zz coupling.
    h : float
        Transverse field, h >= 0.
    n_sites : int
        Chain length N; must be even and >= 4 (the free-fermion momentum
        grid needs N even, and N = 2 would double-count the wrap bond).
    """

    gamma: float
    delta: float
    h: float
    n_sites: int

    def __post_init__(self):
        if self.n_sites < 4 or self.n_sites % 2 != 0:
            raise ValueError(f"n_sites must be even and >= 4, got {self.n_sites}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.h < 0.0:
            raise ValueError(f"h must be >= 0, got {self.h}")

    def replace(self, **kwargs) -> "ModelParams":
        """Copy with some fields replaced."""
        fields = {"gamma": self.gamma, "delta": self.delta, "h": self.h,
                  "n_sites": self.n_sites}
        fields.update(kwargs)
        return ModelParams(**fields)

    @property
    def key(self) -> tuple:
        return (self.gamma, self.delta, self.h, self.n_sites)


@dataclass(frozen=True)
class HamiltonianOperator:
    """Matrix-free H for a ModelParams point.

    Immutable after construction; `apply` is reentrant and allocates
    nothing beyond the output vector and per-bond temporaries, so many
    operators can be applied concurrently.  All matrix elements are real,
    hence real-symmetric in the computational basis.
    """

    params: ModelParams
    dimension: int
    _diag: np.ndarray = field(repr=False)
    _bond_shapes: tuple = field(repr=False)
    _flip_coeff: np.ndarray = field(repr=False)

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Return H @ v without forming the dense matrix (cost O(N 2^N))."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.dimension,):
            raise ValueError(
                f"vector has shape {v.shape}, expected ({self.dimension},)")
        out = self._diag * v
        c = self._flip_coeff
        for shape in self._bond_shapes:
            # Flipping the two bond spins is a reversal along two axes of
            # the reshaped state; the coefficient depends only on whether
            # the (pre-flip) spins are parallel.
            out.reshape(shape)[...] += c * v.reshape(shape)[:, ::-1, :, ::-1, :]
        return out

    # Convenience so the operator can be used like a callable / matmul.
    __call__ = apply

    def __matmul__(self, v):
        return self.apply(v)


def _diagonal(params: ModelParams) -> np.ndarray:
    """Diagonal part -delta sum_i z_i z_{i+1} - h sum_i z_i over all basis states."""
    n = params.n_sites
    idx = np.arange(1 << n, dtype=np.int64)
    z = np.empty((n, idx.size), dtype=np.int8)
    for i in range(n):
        z[i] = 1 - 2 * ((idx >> i) & 1)
    diag = np.zeros(idx.size, dtype=np.float64)
    zz = np.zeros(idx.size, dtype=np.int64)
    for i in range(n):
        zz += z[i].astype(np.int64) * z[(i + 1) % n]
    diag -= params.delta * zz
    diag -= params.h * z.astype(np.int64).sum(axis=0)
    return diag


def build_hamiltonian(params: ModelParams,
                     max_sites: int = DEFAULT_MAX_SITES) -> HamiltonianOperator:
    """Construct the matrix-free chain Hamiltonian.

    The off-diagonal action per bond, on computational-basis spins
    (z_i, z_j), flips both spins with amplitude -gamma when they are
    parallel (pair creation/annihilation) and -1 when antiparallel
    (hopping); the diagonal carries the zz coupling and field terms.

    Raises
    ------
    ValueError
        If N exceeds `max_sites` (memory cap; vectors are 2^N doubles).
    """
    n = params.n_sites
    if n > max_sites:
        raise ValueError(
            f"n_sites={n} exceeds the memory cap max_sites={max_sites}")
    dim = 1 << n
    # Bond (i, i+1) acts on bit positions (i, i+1); the wrap bond (N-1, 0)
    # closes the ring.  Reshape (high, 2, mid, 2, low) in C order exposes
    # the two bond bits as axes 1 and 3.
    shapes = []
    for i in range(n):
        b1, b2 = sorted(((i, (i + 1) % n)))
        shapes.append((1 << (n - 1 - b2), 2, 1 << (b2 - b1 - 1), 2, 1 << b1))
    g = params.gamma
    coeff = np.array([[-g, -1.0], [-1.0, -g]]).reshape(1, 2, 1, 2, 1)
    return HamiltonianOperator(
        params=params,
        dimension=dim,
        _diag=_diagonal(params),
        _bond_shapes=tuple(shapes),
        _flip_coeff=coeff,
    )
