"""Forward scattering approximation.

Relative to a root configuration, the adjacency Hamiltonian splits as
``H = H+ + H-``, where ``H+`` moves one Hamming layer away from the root and
``H- = (H+)^T``. The recurrence ``beta_{j+1} |v_{j+1}> = H+ |v_j>`` then
produces an orthonormal chain whose ``j``-th vector lives on layer ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import Basis, SpinConfig, popcount
from .exceptions import ContractViolation, InvalidArgument, ResourceLimit

EXACT_TOL = 1e-10
DENSE_SU2_LIMIT = 2000


def _layers(basis: Basis, root: SpinConfig) -> np.ndarray:
    if root not in basis:
        raise InvalidArgument(f"root {root} is not in the basis")
    return popcount(basis.states ^ root.bits)


def split_pm(h: sp.spmatrix, basis: Basis, root: SpinConfig):
    """Return ``(H+, H-)`` for the given root.

    ``H+[i, j]`` is nonzero iff ``i`` lies one layer further from the root
    than ``j``.
    """
    layer = _layers(basis, root)
    coo = sp.coo_matrix(h)
    up = layer[coo.row] == layer[coo.col] + 1
    hp = sp.csr_matrix((coo.data[up], (coo.row[up], coo.col[up])), shape=h.shape)
    return hp, hp.T.tocsr()


@dataclass(frozen=True, eq=False)
class FsaChain:
    """Tridiagonal FSA model.

    Attributes
    ----------
    betas : ndarray
        ``beta_1 .. beta_L``.
    alphas : ndarray
        Diagonal ``alpha_0 .. alpha_L`` (zero for bipartite graphs).
    root : SpinConfig
    support : list of ndarray
        Basis indices carrying ``v_j`` (a subset of layer ``j``).
    values : list of ndarray
        Amplitudes of ``v_j`` on ``support[j]``.
    """

    betas: np.ndarray
    alphas: np.ndarray
    root: SpinConfig | None = None
    support: tuple = ()
    values: tuple = ()
    dim: int = 0

    @property
    def length(self) -> int:
        return len(self.betas)

    @property
    def has_vectors(self) -> bool:
        return bool(self.support)

    def vector(self, j: int) -> np.ndarray:
        v = np.zeros(self.dim)
        v[self.support[j]] = self.values[j]
        return v

    def matrix(self) -> sp.csc_matrix:
        """Orthonormal chain vectors as the columns of a ``D x (L+1)`` matrix."""
        rows = np.concatenate(self.support)
        cols = np.concatenate([np.full(len(s), j) for j, s in enumerate(self.support)])
        vals = np.concatenate(self.values)
        return sp.csc_matrix((vals, (rows, cols)), shape=(self.dim, len(self.support)))

    def gram(self) -> np.ndarray:
        v = self.matrix()
        return (v.T @ v).toarray()


def fsa_recurrence(hplus: sp.spmatrix, basis: Basis, root: SpinConfig,
                   h: sp.spmatrix | None = None, zero_tol: float = 1e-12) -> FsaChain:
    """Run ``beta_{j+1} v_{j+1} = H+ v_j`` from the root until ``H+ v_j = 0``.

    If ``h`` is given the diagonal terms ``alpha_j = <v_j|H|v_j>`` are computed
    and asserted to vanish.
    """
    i0 = basis.index(root)
    v = np.zeros(basis.dim)
    v[i0] = 1.0
    support, values, betas = [np.array([i0])], [np.array([1.0])], []
    hp = sp.csr_matrix(hplus)
    while True:
        w = hp @ v
        beta = float(np.linalg.norm(w))
        if beta <= zero_tol:
            break
        v = w / beta
        nz = np.flatnonzero(v)
        betas.append(beta)
        support.append(nz)
        values.append(v[nz])
        if len(betas) > basis.n_sites + 1:
            raise ContractViolation("FSA chain longer than the number of layers")
    alphas = np.zeros(len(support))
    if h is not None:
        hm = sp.csr_matrix(h)
        for j, (s, x) in enumerate(zip(support, values)):
            vec = np.zeros(basis.dim)
            vec[s] = x
            alphas[j] = vec @ (hm @ vec)
        if np.max(np.abs(alphas)) > 1e-10:
            raise ContractViolation("nonzero FSA diagonal in a bipartite model")
    return FsaChain(np.array(betas), alphas, root, tuple(support), tuple(values), basis.dim)


def fsa_chain(h: sp.spmatrix, basis: Basis, root: SpinConfig) -> FsaChain:
    hp, _ = split_pm(h, basis, root)
    return fsa_recurrence(hp, basis, root, h)


def exact_steps(hminus: sp.spmatrix, chain: FsaChain, tol: float = EXACT_TOL) -> int:
    """Largest ``m`` with ``||H- v_j - beta_j v_{j-1}|| <= tol * beta_j`` for all ``j <= m``."""
    if not chain.has_vectors:
        raise InvalidArgument("chain has no stored vectors")
    hm = sp.csr_matrix(hminus)
    for j in range(1, chain.length + 1):
        r = hm @ chain.vector(j) - chain.betas[j - 1] * chain.vector(j - 1)
        if np.linalg.norm(r) > tol * chain.betas[j - 1]:
            return j - 1
    return chain.length


def subspace_variance(h: sp.spmatrix, chain: FsaChain) -> float:
    """``Tr[P H^2 P] - Tr[(P H P)^2]`` over the chain subspace.

    Evaluated as ``||H V - V (V^T H V)||_F^2``, the squared leakage out of the
    subspace, which avoids cancelling two large traces.
    """
    if not chain.has_vectors:
        raise InvalidArgument("chain has no stored vectors")
    v = chain.matrix()
    hv = sp.csr_matrix(h) @ v
    hv = hv.toarray() if sp.issparse(hv) else np.asarray(hv)
    a = v.T @ hv
    leak = hv - v @ a
    return float(np.sum(leak * leak))


def fsa_spectrum(chain: FsaChain):
    """Eigenvalues and eigenvectors (chain basis) of the tridiagonal model."""
    if chain.length < 1:
        raise InvalidArgument("chain needs at least one coupling")
    a, b = np.asarray(chain.alphas, float), np.asarray(chain.betas, float)
    # dense: the chain is short and stemr fails on some zero-diagonal inputs
    return np.linalg.eigh(np.diag(a) + np.diag(b, 1) + np.diag(b, -1))


def broken_su2_residual(hplus: sp.spmatrix, hminus: sp.spmatrix, basis: Basis) -> float:
    """Spectral norm of ``[Hz, H+] - H+`` with ``Hz = [H+, H-] / 2``."""
    if basis.dim > DENSE_SU2_LIMIT:
        raise ResourceLimit(f"dense commutators need D <= {DENSE_SU2_LIMIT}")
    hp = sp.csr_matrix(hplus).toarray()
    hm = sp.csr_matrix(hminus).toarray()
    hz = 0.5 * (hp @ hm - hm @ hp)
    delta = hz @ hp - hp @ hz - hp
    return float(np.linalg.norm(delta, 2))
