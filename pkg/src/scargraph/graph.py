"""Adjacency graphs of constrained Hilbert spaces.

The Hamiltonian of every model here is the adjacency matrix of its vertex
set: two configurations are joined iff they differ by a single spin flip.
Graphs are stored as symmetric ``scipy.sparse.csr_matrix`` objects with unit
weights and sorted column indices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.sparse import csgraph

from .basis import (
    MAX_DIMENSION,
    Basis,
    ConstraintSpec,
    SpinConfig,
    _downward_closure,
    enumerate_basis,
    hypergrid_states,
    popcount,
    to_bitstring,
)
from .exceptions import ContractViolation, InvalidArgument, ResourceLimit

MAX_EDGES = 400_000_000
PARTIAL_CUBE_EXHAUSTIVE = 10_000


def build_adjacency(basis: Basis) -> sp.csr_matrix:
    """Single-spin-flip adjacency matrix of ``basis``.

    Parameters
    ----------
    basis : Basis
        Sorted vertex set.

    Returns
    -------
    scipy.sparse.csr_matrix
        Symmetric ``D x D`` matrix of ones with sorted indices and an empty
        diagonal.
    """
    if basis.dim == 0:
        raise InvalidArgument("empty basis")
    if basis.dim > MAX_DIMENSION:
        raise ResourceLimit(f"dimension {basis.dim} exceeds the cap")
    states = basis.states
    rows, cols = [], []
    n_edges = 0
    for i in range(basis.n_sites):
        # only the raising direction; symmetrise afterwards
        src = np.flatnonzero(((states >> i) & 1) == 0)
        dst = basis.lookup(states[src] | (1 << i))
        hit = dst >= 0
        rows.append(src[hit])
        cols.append(dst[hit])
        n_edges += int(hit.sum())
        if 2 * n_edges > MAX_EDGES:
            raise ResourceLimit("edge count exceeds the cap")
    r = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    c = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    data = np.ones(2 * len(r))
    h = sp.csr_matrix((data, (np.concatenate([r, c]), np.concatenate([c, r]))),
                      shape=(basis.dim, basis.dim))
    h.sort_indices()
    return h


def raising_part(graph: sp.csr_matrix, basis: Basis) -> sp.csr_matrix:
    """Edges that add an excitation (``H = R + R^T``)."""
    coo = graph.tocoo()
    w = basis.weights
    keep = w[coo.row] > w[coo.col]
    return sp.csr_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])), shape=graph.shape)


def degrees(graph: sp.csr_matrix) -> np.ndarray:
    return np.diff(graph.indptr)


def check_bipartite(graph: sp.csr_matrix, basis: Basis) -> None:
    """Raise if an edge joins two configurations of equal weight parity."""
    coo = graph.tocoo()
    parity = basis.weights & 1
    if np.any(parity[coo.row] == parity[coo.col]):
        raise ContractViolation("edge inside a Hamming-parity class")


@dataclass(frozen=True)
class HammingLayers:
    """Distance of every vertex from a root configuration.

    Attributes
    ----------
    root : SpinConfig
    layer : ndarray of int
        ``layer[i]`` is the Hamming distance between vertex ``i`` and ``root``.
    """

    root: SpinConfig
    layer: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        return np.bincount(self.layer)

    @property
    def depth(self) -> int:
        return int(self.layer.max())

    def members(self, d: int) -> np.ndarray:
        return np.flatnonzero(self.layer == d)


def hamming_layers(graph: sp.csr_matrix, basis: Basis, root: SpinConfig) -> HammingLayers:
    if root not in basis:
        raise InvalidArgument(f"root {root} is not in the basis")
    layer = popcount(basis.states ^ root.bits)
    coo = graph.tocoo()
    if np.any(np.abs(layer[coo.row] - layer[coo.col]) != 1):
        raise ContractViolation("edge between non-consecutive Hamming layers")
    return HammingLayers(root, layer)


def is_downward_closed(basis: Basis) -> bool:
    st = basis.states
    for i in range(basis.n_sites):
        has = ((st >> i) & 1) == 1
        if np.any(basis.lookup(st[has] & ~(1 << i)) < 0):
            return False
    return True


def maximal_vertices(basis: Basis) -> set[SpinConfig]:
    """Generating set of a daisy cube: vertices with no one-bit extension.

    For a downward-closed set a vertex is maximal among all its supersets iff
    it is maximal among its one-bit supersets, because the intermediate
    configurations are present too.
    """
    if not is_downward_closed(basis):
        raise ContractViolation("basis is not downward closed")
    st = basis.states
    maximal = np.ones(len(st), dtype=bool)
    for i in range(basis.n_sites):
        free = ((st >> i) & 1) == 0
        ext = basis.lookup(st[free] | (1 << i)) >= 0
        idx = np.flatnonzero(free)[ext]
        maximal[idx] = False
    return {SpinConfig(int(s), basis.n_sites) for s in st[maximal]}


def daisy_closure(maximal, n_sites: int) -> np.ndarray:
    """Sorted downward closure of a collection of occupation words."""
    words = np.array([m.bits if isinstance(m, SpinConfig) else int(m) for m in maximal],
                     dtype=np.int64)
    return _downward_closure(words, n_sites)


def bridge_density(basis_size: int, n_sites: int) -> float:
    """Logarithmic position between two glued cubes (0) and the full cube (1)."""
    if n_sites < 2 or n_sites % 2:
        raise InvalidArgument("bridge density needs an even N >= 2")
    low = 2 ** (n_sites // 2 + 1) - 1
    high = 2 ** n_sites
    size = int(basis_size)
    if not low <= size <= high:
        raise InvalidArgument(f"|G|={size} outside [{low}, {high}]")
    return (math.log(size) - math.log(low)) / (math.log(high) - math.log(low))


def build_hypergrid_vertices(n_sites: int, pairing_offset: int) -> set[SpinConfig]:
    """Configurations whose pair cells all lie in ``{00, 10, 01}``.

    Offset 0 pairs sites ``(0,1), (2,3), ...``; offset 1 pairs
    ``(N-1,0), (1,2), ...``.
    """
    return {SpinConfig(int(s), n_sites) for s in hypergrid_states(n_sites, pairing_offset)}


def hypergrid_cells(n_sites: int, pairing_offset: int) -> list[tuple[int, int]]:
    """``(left, right)`` site pairs of the given pairing."""
    out = []
    for c in range(n_sites // 2):
        a = (2 * c - pairing_offset) % n_sites
        out.append((a, (a + 1) % n_sites))
    return out


def hypergrid_corners(n_sites: int, pairing_offset: int) -> np.ndarray:
    """Words whose every cell is ``L`` (``10``) or ``R`` (``01``)."""
    words = np.zeros(1, dtype=np.int64)
    for a, b in hypergrid_cells(n_sites, pairing_offset):
        words = np.concatenate([words | (1 << a), words | (1 << b)])
    return np.sort(words)


def _legal_cell_move(u: int, v: int, cells) -> bool:
    """True if ``u -> v`` is an ``L<->o`` or ``o<->R`` move with all cells legal."""
    for a, b in cells:
        for w in (u, v):
            if (w >> a) & 1 and (w >> b) & 1:
                return False
    return (u ^ v).bit_count() == 1


def build_2hg(n_sites: int) -> tuple[Basis, sp.csr_matrix]:
    """Union of the two hypergrids with hypergrid-legal single flips.

    An edge ``u - v`` is a one-bit flip that leaves every cell of some pairing
    in ``{o, L, R}`` at both endpoints. Because each hypergrid is downward
    closed, this coincides with the single-flip adjacency on the union: the
    larger endpoint of a flip lies in a hypergrid only if its subset does.
    """
    if n_sites % 2 or n_sites < 2:
        raise InvalidArgument("2HG needs an even number of sites")
    g0 = hypergrid_states(n_sites, 0)
    g1 = hypergrid_states(n_sites, 1)
    pxp = enumerate_basis(ConstraintSpec.pxp(), n_sites).states
    inter = np.intersect1d(g0, g1)
    if not np.array_equal(inter, pxp):
        raise ContractViolation("hypergrid intersection differs from the PXP vertex set")
    basis = Basis(ConstraintSpec.two_hypergrid(), n_sites, np.union1d(g0, g1))
    return basis, build_adjacency(basis)


def edge_free_corners(n_sites: int, pairing_offset: int,
                      host: ConstraintSpec | None = None) -> set[SpinConfig]:
    """Hypergrid corners none of whose host-model edges leave the hypergrid.

    Removing an excitation from a corner stays in the hypergrid, so a corner
    qualifies iff the host model (default: the (2,3) model ``kk:2``) allows no
    excitation to be added to it.
    """
    host = host or ConstraintSpec.kk(2)
    hb = enumerate_basis(host, n_sites)
    corners = hypergrid_corners(n_sites, pairing_offset)
    corners = corners[hb.lookup(corners) >= 0]
    out = set()
    for c in corners.tolist():
        ups = [c | (1 << i) for i in range(n_sites) if not (c >> i) & 1]
        if not ups or np.all(hb.lookup(np.array(ups, dtype=np.int64)) < 0):
            out.add(SpinConfig(c, n_sites))
    return out


@dataclass(frozen=True)
class PartialCubeResult:
    """Outcome of an isometric-embedding check.

    Truthiness equals ``is_partial_cube``. ``witness`` is a vertex index pair
    whose graph distance differs from its Hamming distance (``inf`` when the
    graph is disconnected); ``exhaustive`` is False when pairs were sampled.
    """

    is_partial_cube: bool
    witness: tuple[int, int] | None = None
    graph_distance: float | None = None
    hamming_distance: int | None = None
    exhaustive: bool = True

    def __bool__(self) -> bool:
        return self.is_partial_cube


def verify_partial_cube(graph: sp.csr_matrix, basis: Basis, *, n_samples: int = 10_000,
                        seed: int = 0, chunk: int = 256) -> PartialCubeResult:
    """Check that graph distance equals Hamming distance for all vertex pairs.

    Up to 10^4 vertices every pair is checked by breadth-first search;
    larger graphs are checked on ``n_samples`` random sources paired with all
    targets.
    """
    d = basis.dim
    states = basis.states
    if d <= PARTIAL_CUBE_EXHAUSTIVE:
        sources = np.arange(d)
        exhaustive = True
    else:
        rng = np.random.default_rng(seed)
        sources = rng.choice(d, size=min(n_samples, d), replace=False)
        exhaustive = False
        chunk = min(chunk, 16)
    for start in range(0, len(sources), chunk):
        src = sources[start:start + chunk]
        dist = csgraph.shortest_path(graph, method="D", unweighted=True, indices=src)
        ham = popcount(states[src, None] ^ states[None, :])
        bad = np.argwhere(dist != ham)
        if len(bad):
            i, j = bad[0]
            return PartialCubeResult(False, (int(src[i]), int(j)), float(dist[i, j]),
                                     int(ham[i, j]), exhaustive)
    return PartialCubeResult(True, exhaustive=exhaustive)


def export_matrix_market(graph: sp.csr_matrix, basis: Basis, path: str | Path,
                         metadata: dict | None = None) -> tuple[Path, Path]:
    """Write a pattern-symmetric Matrix Market file plus a JSON index sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lower = sp.tril(graph, k=-1, format="coo")
    pattern = sp.coo_matrix((np.ones(lower.nnz, dtype=np.int64), (lower.row, lower.col)),
                            shape=graph.shape)
    scipy.io.mmwrite(str(path), pattern, field="pattern", symmetry="symmetric")
    mtx = path if path.suffix == ".mtx" else path.with_name(path.name + ".mtx")
    sidecar = mtx.with_suffix(".json")
    payload = dict(metadata or {})
    payload["n_sites"] = basis.n_sites
    payload["index_base"] = 1
    payload["states"] = {str(i + 1): to_bitstring(s, basis.n_sites)
                         for i, s in enumerate(basis.states.tolist())}
    sidecar.write_text(json.dumps(payload, indent=1))
    return mtx, sidecar


def graph_for(spec: ConstraintSpec, n_sites: int) -> tuple[Basis, sp.csr_matrix]:
    """Basis and adjacency for any model, using the hypergrid rule for ``2hg``."""
    if spec.kind == "2hg":
        return build_2hg(n_sites)
    basis = enumerate_basis(spec, n_sites)
    return basis, build_adjacency(basis)
