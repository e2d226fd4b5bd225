"""Exact-diagonalisation diagnostics: overlaps, entanglement, level statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .basis import Basis
from .exceptions import InvalidArgument
from .symmetry import SectorBasis, project_sector

DEGENERACY_TOL = 1e-10
EDGE_DISCARD = 0.025
UNFOLD_DEGREE = 5
BIN_WIDTH = 0.1
HIST_RANGE = (0.0, 4.0)


@dataclass(eq=False)
class SectorSpectrum:
    """Eigenpairs of one symmetry sector (``sector`` is None for the full space)."""

    energies: np.ndarray
    vectors: np.ndarray
    sector: SectorBasis | None = None

    @property
    def label(self) -> str:
        if self.sector is None:
            return "full"
        p = "" if self.sector.parity is None else f",inv={self.sector.parity:+d}"
        return f"k={self.sector.k}{p}"

    def full_vector(self, i: int) -> np.ndarray:
        v = self.vectors[:, i]
        return v if self.sector is None else self.sector.lift(v)


def diagonalize(h, basis: Basis, sectors=None) -> list[SectorSpectrum]:
    """Dense eigendecomposition of the full space or of selected ``(k, parity)`` sectors."""
    if sectors is None:
        mat = h.toarray() if hasattr(h, "toarray") else np.asarray(h)
        e, v = np.linalg.eigh(mat)
        return [SectorSpectrum(e, v, None)]
    out = []
    for k, parity in sectors:
        hk, sb = project_sector(h, basis, k, parity)
        if sb.dim == 0:
            continue
        e, v = np.linalg.eigh(hk)
        out.append(SectorSpectrum(e, v, sb))
    return out


@dataclass
class OverlapProfile:
    """Eigenstate energies with their overlap on a target state.

    Attributes
    ----------
    energies, overlaps : ndarray
        Merged over all supplied sectors.
    labels : list of str
        Sector of each entry.
    top_band : ndarray or None
        Indices of the selected top-band states, one per FSA energy.
    reference : ndarray or None
        The FSA energies used to place the bins.
    """

    energies: np.ndarray
    overlaps: np.ndarray
    labels: list
    top_band: np.ndarray | None = None
    reference: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def total_weight(self) -> float:
        return float(self.overlaps.sum())

    @property
    def top_energies(self) -> np.ndarray:
        return self.energies[self.top_band]

    def band_deviation(self) -> float:
        """Largest ``|E_top - E_fsa|`` as a fraction of the spectral bandwidth."""
        width = self.energies.max() - self.energies.min()
        return float(np.max(np.abs(self.top_energies - self.reference)) / width)


def select_top_band(energies, overlaps, reference) -> np.ndarray:
    """Maximal-overlap state in each bin centred on a reference energy.

    Bin edges are the midpoints between consecutive reference energies; the
    outer bins are unbounded.
    """
    ref = np.sort(np.asarray(reference, dtype=float))
    edges = 0.5 * (ref[1:] + ref[:-1])
    which = np.searchsorted(edges, energies)
    picks = []
    for b in range(len(ref)):
        idx = np.flatnonzero(which == b)
        if not len(idx):
            raise InvalidArgument(f"no eigenstate near reference energy {ref[b]:.6g}")
        picks.append(idx[np.argmax(overlaps[idx])])
    return np.array(picks)


def overlap_profile(spectra, target: np.ndarray, reference=None) -> OverlapProfile:
    """Overlaps ``|<target|E>|^2`` merged across sectors, with optional top-band marking.

    Parameters
    ----------
    spectra : list of SectorSpectrum
    target : ndarray
        State in the full basis.
    reference : array_like, optional
        FSA energies; one top-band state is picked per entry.
    """
    energies, overlaps, labels = [], [], []
    for sp_ in spectra:
        t = target if sp_.sector is None else sp_.sector.project_vector(target)
        ov = np.abs(sp_.vectors.conj().T @ t) ** 2
        energies.append(sp_.energies)
        overlaps.append(ov)
        labels += [sp_.label] * len(ov)
    e = np.concatenate(energies)
    o = np.concatenate(overlaps)
    prof = OverlapProfile(e, o, labels)
    if prof.total_weight < 1e-12:
        prof.meta["warning"] = "target is orthogonal to the supplied sectors"
        return prof
    if reference is not None:
        prof.reference = np.sort(np.asarray(reference, dtype=float))
        prof.top_band = select_top_band(e, o, prof.reference)
    return prof


def entanglement_entropy(vec: np.ndarray, basis: Basis, cut: int | None = None) -> float:
    """Von Neumann entropy of sites ``[0, cut)`` (default ``N/2``), natural log."""
    n = basis.n_sites
    if cut is None:
        if n % 2:
            raise InvalidArgument("the default half-chain cut needs N even")
        cut = n // 2
    if not 0 < cut < n:
        raise InvalidArgument("cut must split the chain")
    vec = np.asarray(vec)
    nrm = np.linalg.norm(vec)
    if abs(nrm - 1) > 1e-8:
        raise InvalidArgument(f"vector is not normalised (norm {nrm})")
    left = basis.states & ((1 << cut) - 1)
    right = basis.states >> cut
    lu, li = np.unique(left, return_inverse=True)
    ru, ri = np.unique(right, return_inverse=True)
    m = np.zeros((len(lu), len(ru)), dtype=vec.dtype)
    m[li, ri] = vec
    s = np.linalg.svd(m, compute_uv=False)
    p = s[s > 1e-16] ** 2
    p = p / p.sum()
    return float(-np.sum(p * np.log(p)))


def entropies(spectrum: SectorSpectrum, basis: Basis, cut: int | None = None) -> np.ndarray:
    return np.array([entanglement_entropy(spectrum.full_vector(i), basis, cut)
                     for i in range(len(spectrum.energies))])


def _prepare_levels(eigenvalues, edge_discard, tol):
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    if len(e) > 1:
        keep = np.concatenate([[True], np.diff(e) > tol])
        e = e[keep]
    cut = int(np.floor(edge_discard * len(e)))
    if cut:
        e = e[cut:len(e) - cut]
    return e


def r_statistic(eigenvalues, edge_discard: float = EDGE_DISCARD,
                degeneracy_tol: float = DEGENERACY_TOL) -> float:
    """Mean ratio of consecutive level spacings, ``min(s_n, s_n+1) / max(s_n, s_n+1)``."""
    e = _prepare_levels(eigenvalues, edge_discard, degeneracy_tol)
    s = np.diff(e)
    if len(s) < 10:
        raise InvalidArgument(f"need at least 10 spacings, got {len(s)}")
    r = np.minimum(s[1:], s[:-1]) / np.maximum(s[1:], s[:-1])
    return float(r.mean())


def wigner_surmise(s):
    s = np.asarray(s, dtype=float)
    return 0.5 * np.pi * s * np.exp(-0.25 * np.pi * s ** 2)


def wigner_surmise_cdf(s):
    return 1.0 - np.exp(-0.25 * np.pi * np.asarray(s, dtype=float) ** 2)


@dataclass
class SpacingHistogram:
    spacings: np.ndarray
    edges: np.ndarray
    density: np.ndarray
    ks_distance: float
    meta: dict = field(default_factory=dict)


def unfold_spacings(eigenvalues, degree: int = UNFOLD_DEGREE, edge_discard: float = EDGE_DISCARD,
                    degeneracy_tol: float = DEGENERACY_TOL) -> SpacingHistogram:
    """Unfold with a polynomial fit of the staircase and histogram the spacings."""
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    if len(e) < 200:
        raise InvalidArgument(f"unfolding needs at least 200 levels, got {len(e)}")
    e = _prepare_levels(e, edge_discard, degeneracy_tol)
    stair = np.arange(len(e), dtype=float)
    fit = Polynomial.fit(e, stair, deg=degree)
    s = np.diff(fit(e))
    s = s / s.mean()
    edges = np.arange(HIST_RANGE[0], HIST_RANGE[1] + BIN_WIDTH / 2, BIN_WIDTH)
    dens, _ = np.histogram(s, bins=edges, density=True)
    xs = np.sort(s)
    emp_hi = np.arange(1, len(xs) + 1) / len(xs)
    emp_lo = np.arange(len(xs)) / len(xs)
    cdf = wigner_surmise_cdf(xs)
    ks = float(max(np.max(emp_hi - cdf), np.max(cdf - emp_lo)))
    return SpacingHistogram(s, edges, dens, ks, {"degree": degree, "edge_discard": edge_discard})


@dataclass
class LevelStatistics:
    r: float
    n_levels: int
    edge_discard: float
    sector: str
    histogram: SpacingHistogram | None = None


def level_statistics(spectrum: SectorSpectrum, edge_discard: float = EDGE_DISCARD) -> LevelStatistics:
    e = spectrum.energies
    hist = unfold_spacings(e, edge_discard=edge_discard) if len(e) >= 200 else None
    return LevelStatistics(r_statistic(e, edge_discard), len(e), edge_discard, spectrum.label, hist)
