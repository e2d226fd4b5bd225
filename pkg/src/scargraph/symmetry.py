"""Translation and inversion sectors.

A momentum state with ``K = 2*pi*k/N`` built on the orbit representative
``a`` (period ``p``) is

    |k, a> = p**-0.5 * sum_{r<p} exp(-i K r) T^r |a>,

which exists iff ``k * p = 0 mod N``. Inversion is the site-centred reflection
``i -> -i mod N`` (so the Neel state is inversion symmetric) and is resolved
only for ``k in {0, N/2}``, where it commutes with the momentum projector.

Sectors are represented by the isometry ``V`` (``D x d_sector``) whose columns
are the symmetric states, so ``H_sector = V^dagger H V``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import Basis, rotate
from .exceptions import InvalidArgument, UnsupportedModel


def reflect(states, n_sites: int):
    """Map bit ``i`` to bit ``-i mod N``."""
    s = np.asarray(states, dtype=np.int64)
    out = s & 1
    for i in range(1, n_sites):
        out = out | (((s >> i) & 1) << (n_sites - i))
    return out


def _require_translation(basis: Basis):
    if not basis.spec.is_translation_invariant(basis.n_sites):
        raise UnsupportedModel(f"{basis.spec.label} ({basis.spec.boundary}) is not translation invariant")


@dataclass(frozen=True)
class OrbitData:
    """Per-vertex orbit bookkeeping.

    Attributes
    ----------
    rep_index : ndarray
        Basis index of each vertex's orbit representative (minimal word).
    shift : ndarray
        ``r`` such that ``state = T^r rep``, with ``0 <= r < period``.
    period : ndarray
        Orbit length of each vertex.
    """

    rep_index: np.ndarray
    shift: np.ndarray
    period: np.ndarray

    @property
    def representatives(self) -> np.ndarray:
        return np.unique(self.rep_index)

    def orbit_sizes(self) -> np.ndarray:
        reps = self.representatives
        return self.period[reps]


def orbit_data(basis: Basis) -> OrbitData:
    _require_translation(basis)
    n = basis.n_sites
    st = basis.states
    rep = st.copy()
    period = np.full(len(st), n, dtype=np.int64)
    found = np.zeros(len(st), dtype=bool)
    # state = T^shift rep  <=>  rep = T^{-shift} state
    shift = np.zeros(len(st), dtype=np.int64)
    for r in range(1, n):
        rot = rotate(st, -r, n)
        newly = (rot == st) & ~found
        period[newly] = r
        found |= newly
        better = (rot < rep) & ~found
        rep[better] = rot[better]
        shift[better] = r
    rep_index = basis.lookup(rep)
    shift %= period
    return OrbitData(rep_index, shift, period)


def translation_orbits(basis: Basis) -> list[np.ndarray]:
    """Partition of the basis indices into translation orbits, sorted by representative."""
    od = orbit_data(basis)
    order = np.lexsort((od.shift, od.rep_index))
    reps, starts = np.unique(od.rep_index[order], return_index=True)
    return np.split(order, starts[1:])


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Symmetry-adapted basis of one ``(k, parity)`` sector.

    Attributes
    ----------
    k : int
        Momentum index, ``K = 2*pi*k/N``.
    parity : int or None
        Inversion eigenvalue, ``None`` when unresolved.
    representatives : ndarray
        Basis indices of the orbit representatives spanning each column
        (the smaller one for inversion pairs).
    norms : ndarray
        Number of basis configurations contributing to each column.
    projector : scipy.sparse.csc_matrix
        Isometry ``V`` with orthonormal columns.
    """

    basis: Basis
    k: int
    parity: int | None
    representatives: np.ndarray
    norms: np.ndarray
    projector: sp.csc_matrix

    @property
    def dim(self) -> int:
        return self.projector.shape[1]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.projector.data)

    def project_vector(self, psi: np.ndarray) -> np.ndarray:
        return self.projector.conj().T @ psi

    def lift(self, phi: np.ndarray) -> np.ndarray:
        return self.projector @ phi


def _momentum_columns(basis: Basis, od: OrbitData, k: int, reps: np.ndarray):
    """Rows, column ids and amplitudes of ``|k, a>`` for each rep in ``reps``."""
    n = basis.n_sites
    real = (2 * k) % n == 0
    p = od.period[reps]
    rows, cols, vals = [], [], []
    rep_states = basis.states[reps]
    for r in range(n):
        live = np.flatnonzero(p > r)
        if not len(live):
            break
        words = rotate(rep_states[live], r, n)
        rows.append(basis.lookup(words))
        cols.append(live)
        phase = np.exp(-2j * np.pi * k * r / n)
        if real:
            phase = np.round(phase.real)
        vals.append(np.full(len(live), phase) / np.sqrt(p[live]))
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def sector_basis(basis: Basis, k: int, parity: int | None = None) -> SectorBasis:
    """Build the ``(k, parity)`` isometry for a translation-invariant basis."""
    n = basis.n_sites
    if not 0 <= k < n:
        raise InvalidArgument(f"momentum index must be in [0, {n}), got {k}")
    inversion_ok = k == 0 or 2 * k == n
    if parity is not None:
        if parity not in (1, -1):
            raise InvalidArgument("parity must be +1 or -1")
        if not inversion_ok:
            raise InvalidArgument("inversion is only resolved for k = 0 and k = N/2")
    od = orbit_data(basis)
    reps = od.representatives
    reps = reps[(k * od.period[reps]) % n == 0]
    rows, cols, vals = _momentum_columns(basis, od, k, reps)
    mom = sp.csc_matrix((vals, (rows, cols)), shape=(basis.dim, len(reps)))
    if parity is None:
        return SectorBasis(basis, k, None, reps, od.period[reps], mom)

    refl = basis.lookup(reflect(basis.states[reps], n))
    partner = od.rep_index[refl]
    s = od.shift[refl]
    phase = np.round(np.cos(2 * np.pi * k * s / n))
    col_of = {int(r): j for j, r in enumerate(reps.tolist())}
    mcols, keep_reps = [], []
    for j, (a, b, ph) in enumerate(zip(reps.tolist(), partner.tolist(), phase.tolist())):
        if a == b:
            if ph == parity:
                mcols.append([(j, 1.0)])
                keep_reps.append(a)
        elif a < b:
            mcols.append([(j, 1 / np.sqrt(2)), (col_of[b], parity * ph / np.sqrt(2))])
            keep_reps.append(a)
    r_idx = [j for c in mcols for j, _ in c]
    c_idx = [ci for ci, c in enumerate(mcols) for _ in c]
    w = [v for c in mcols for _, v in c]
    combine = sp.csc_matrix((w, (r_idx, c_idx)), shape=(len(reps), len(mcols)))
    proj = (mom @ combine).tocsc()
    proj.eliminate_zeros()
    keep = np.array(keep_reps, dtype=np.int64)
    norms = np.asarray(np.diff(proj.indptr), dtype=np.int64)
    return SectorBasis(basis, k, parity, keep, norms, proj)


def project_sector(h: sp.spmatrix, basis: Basis, k: int, parity: int | None = None,
                   *, dense: bool = True):
    """Sector Hamiltonian ``V^dagger H V`` and its :class:`SectorBasis`."""
    sb = sector_basis(basis, k, parity)
    v = sb.projector
    hk = (v.conj().T @ (h @ v))
    if dense:
        hk = hk.toarray()
        if sb.is_real:
            hk = hk.real
        hk = 0.5 * (hk + hk.conj().T)
    return hk, sb


def sector_dimension_oracle(basis: Basis, k: int, parity: int | None = None) -> int:
    """Character-formula count ``Tr(P_k P_parity)`` from fixed-point counts."""
    n = basis.n_sites
    st = basis.states
    total = 0.0 + 0.0j
    refl = reflect(st, n)
    for r in range(n):
        rot = rotate(st, r, n)
        chi = np.exp(-2j * np.pi * k * r / n)
        term = np.count_nonzero(rot == st)
        if parity is not None:
            term = term + parity * np.count_nonzero(rotate(refl, r, n) == st)
        total += chi * term
    denom = n if parity is None else 2 * n
    val = total / denom
    if abs(val.imag) > 1e-9 or abs(val.real - round(val.real)) > 1e-9:
        raise InvalidArgument("character sum is not an integer")
    return int(round(val.real))


def iter_sectors(n_sites: int, resolve_parity: bool = True):
    """All ``(k, parity)`` labels whose dimensions add up to the full space."""
    for k in range(n_sites):
        if resolve_parity and (k == 0 or 2 * k == n_sites):
            yield k, 1
            yield k, -1
        else:
            yield k, None


def parse_sector(text: str) -> tuple[int, int | None]:
    """Parse ``k=<int>[,inv=+1|-1]``."""
    k, parity = None, None
    for part in text.split(","):
        key, _, val = part.partition("=")
        key = key.strip().lower()
        if key == "k":
            k = int(val)
        elif key in ("inv", "i", "parity"):
            parity = int(val)
            if parity not in (1, -1):
                raise InvalidArgument("inv must be +1 or -1")
        else:
            raise InvalidArgument(f"unknown sector key {key!r}")
    if k is None:
        raise InvalidArgument("sector selector needs k=<int>")
    return k, parity
