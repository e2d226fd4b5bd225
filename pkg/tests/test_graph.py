import json
import math

import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bfs_distances, brute_adjacency, brute_states
from scargraph.basis import Basis, ConstraintSpec, SpinConfig, enumerate_basis, neel
from scargraph.exceptions import ContractViolation, InvalidArgument
from scargraph.graph import (
    bridge_density,
    build_2hg,
    build_adjacency,
    build_hypergrid_vertices,
    check_bipartite,
    daisy_closure,
    degrees,
    edge_free_corners,
    export_matrix_market,
    graph_for,
    hamming_layers,
    hypergrid_cells,
    is_downward_closed,
    maximal_vertices,
    raising_part,
    verify_partial_cube,
)

MODELS = [ConstraintSpec.pxp(), ConstraintSpec.two_hypercube(), ConstraintSpec.kk(2),
          ConstraintSpec.blockade(2), ConstraintSpec.rrange(2), ConstraintSpec.free()]


def words(strings):
    return {SpinConfig.from_string(s) for s in strings}


@pytest.mark.parametrize("spec", MODELS, ids=lambda s: s.label)
def test_adjacency_matches_bruteforce(spec):
    n = 8
    b = enumerate_basis(spec, n)
    h = build_adjacency(b)
    ref = brute_adjacency(b.states.tolist(), n)
    assert np.array_equal(h.toarray(), ref)
    assert (h != h.T).nnz == 0
    assert np.all(h.diagonal() == 0)
    check_bipartite(h, b)
    assert h.has_sorted_indices


def test_free_two_sites_is_square():
    b = enumerate_basis(ConstraintSpec.free(), 2)
    h = build_adjacency(b)
    assert h.nnz // 2 == 4
    assert np.all(degrees(h) == 2)


def test_pxp_four_site_degrees():
    b = enumerate_basis(ConstraintSpec.pxp(), 4)
    deg = dict(zip((str(c) for c in map(b.config, range(b.dim))), degrees(build_adjacency(b))))
    assert deg["0000"] == 4
    assert deg["1010"] == deg["0101"] == 2
    for s in ("1000", "0100", "0010", "0001"):
        assert deg[s] == 2
    assert build_adjacency(b).nnz // 2 == 8


def test_two_cube_four_sites():
    b = enumerate_basis(ConstraintSpec.two_hypercube(), 4)
    h = build_adjacency(b)
    assert b.dim == 7
    assert degrees(h)[b.index(0)] == 4
    lay = hamming_layers(h, b, SpinConfig.from_string("1010"))
    assert lay.populations.tolist() == [1, 2, 1, 2, 1]


def test_layers_examples():
    b = enumerate_basis(ConstraintSpec.free(), 4)
    lay = hamming_layers(build_adjacency(b), b, neel(4))
    assert lay.populations.tolist() == [1, 4, 6, 4, 1]
    assert lay.depth == 4
    b = enumerate_basis(ConstraintSpec.pxp(), 6)
    lay = hamming_layers(build_adjacency(b), b, neel(6))
    assert lay.populations.sum() == 18
    assert set(lay.members(0)) == {b.index(neel(6))}


def test_layers_reject_foreign_root():
    b = enumerate_basis(ConstraintSpec.pxp(), 4)
    with pytest.raises(InvalidArgument):
        hamming_layers(build_adjacency(b), b, SpinConfig.from_string("1100"))


def test_bipartite_violation_detected():
    b = enumerate_basis(ConstraintSpec.free(), 2)
    bad = sp.csr_matrix(np.array([[0, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 0]], float))
    with pytest.raises(ContractViolation):
        check_bipartite(bad, b)


def test_raising_part_splits_graph():
    b = enumerate_basis(ConstraintSpec.pxp(), 8)
    h = build_adjacency(b)
    up = raising_part(h, b)
    assert ((up + up.T) != h).nnz == 0
    coo = up.tocoo()
    assert np.all(b.weights[coo.row] == b.weights[coo.col] + 1)


def test_maximal_vertices_examples():
    b = enumerate_basis(ConstraintSpec.pxp(), 6)
    assert maximal_vertices(b) == words(["101010", "010101", "100100", "010010", "001001"])
    assert maximal_vertices(enumerate_basis(ConstraintSpec.free(), 3)) == words(["111"])
    assert maximal_vertices(enumerate_basis(ConstraintSpec.two_hypercube(), 4)) == words(["1010", "0101"])


@pytest.mark.parametrize("spec", MODELS + [ConstraintSpec.kk(3), ConstraintSpec.star(2)],
                         ids=lambda s: s.label)
def test_maximal_vertices_regenerate_basis(spec):
    for n in (6, 12):
        b = enumerate_basis(spec, n)
        assert is_downward_closed(b)
        assert np.array_equal(daisy_closure(maximal_vertices(b), n), b.states)


def test_maximal_requires_daisy():
    b = Basis(ConstraintSpec.free(), 2, np.array([0, 3]))
    with pytest.raises(ContractViolation):
        maximal_vertices(b)


def test_two_cube_is_induced_pxp_subgraph():
    n = 10
    pxp = enumerate_basis(ConstraintSpec.pxp(), n)
    two = enumerate_basis(ConstraintSpec.two_hypercube(), n)
    idx = pxp.lookup(two.states)
    assert np.all(idx >= 0)
    sub = build_adjacency(pxp)[idx][:, idx]
    assert (sub != build_adjacency(two)).nnz == 0


def test_bridge_density_examples():
    assert bridge_density(2 ** 7 - 1, 12) == 0
    assert bridge_density(2 ** 12, 12) == 1
    assert abs(bridge_density(322, 12) - 0.2679) < 1e-4
    with pytest.raises(InvalidArgument):
        bridge_density(10, 12)


# ---------------------------------------------------------------- hypergrids


def test_hypergrid_vertices():
    assert len(build_hypergrid_vertices(4, 0)) == 9
    assert SpinConfig.from_string("10011001") in build_hypergrid_vertices(8, 0)
    assert SpinConfig.from_string("11001100") in build_hypergrid_vertices(8, 1)
    assert hypergrid_cells(4, 1) == [(3, 0), (1, 2)]


@pytest.mark.parametrize("n", [4, 6, 8, 10, 12])
def test_hypergrid_intersection_is_pxp(n):
    g0 = {c.bits for c in build_hypergrid_vertices(n, 0)}
    g1 = {c.bits for c in build_hypergrid_vertices(n, 1)}
    assert len(g0) == len(g1) == 3 ** (n // 2)
    assert g0 & g1 == set(brute_states("pxp", None, n))


def test_2hg_union_count_and_edges():
    b, h = build_2hg(6)
    assert b.dim == 2 * 27 - 18 == 36
    assert np.array_equal(h.toarray(), brute_adjacency(b.states.tolist(), 6))
    for n in (8, 10, 12):
        b, _ = build_2hg(n)
        assert b.dim == 2 * 3 ** (n // 2) - len(brute_states("pxp", None, n))


def test_edge_free_corners_eight_sites():
    assert edge_free_corners(8, 0) == words(["10101010", "01010101", "10011001", "01100110"])
    assert edge_free_corners(8, 1) == words(["10101010", "01010101", "00110011", "11001100"])


def test_edge_free_corners_six_sites_only_neel():
    assert edge_free_corners(6, 0) | edge_free_corners(6, 1) == words(["101010", "010101"])


# ---------------------------------------------------------------- partial cubes


@pytest.mark.parametrize("spec", MODELS + [ConstraintSpec.kk(3), ConstraintSpec.star(2)],
                         ids=lambda s: s.label)
def test_partial_cube_models(spec):
    n = 6 if spec.kind == "star" else 8
    b, h = graph_for(spec, n)
    res = verify_partial_cube(h, b)
    assert res and res.exhaustive
    # BFS oracle on a few sources
    adj = h.toarray()
    for src in range(0, b.dim, max(1, b.dim // 5)):
        ham = [(int(s) ^ int(b.states[src])).bit_count() for s in b.states]
        assert bfs_distances(adj, src).tolist() == ham


def test_partial_cube_counterexample():
    # {00, 01, 10} with the 00 vertex removed from the edge set: 01 and 10 are disconnected
    b = Basis(ConstraintSpec.free(), 2, np.array([0, 1, 2]))
    h = sp.csr_matrix((3, 3))
    res = verify_partial_cube(h, b)
    assert not res
    assert res.graph_distance == math.inf
    # the induced subgraph on {00, 01, 11} is a path and is isometric
    b2 = Basis(ConstraintSpec.free(), 2, np.array([0, 1, 3]))
    assert verify_partial_cube(build_adjacency(b2), b2)


def test_partial_cube_sampled_mode():
    b, h = graph_for(ConstraintSpec.pxp(), 22)
    res = verify_partial_cube(h, b, n_samples=8)
    assert res and not res.exhaustive


@settings(max_examples=25, deadline=None)
@given(st.sets(st.integers(0, 2 ** 7 - 1), min_size=1, max_size=6))
def test_random_daisy_cubes_are_partial_cubes(maximal):
    # every downward-closed set is connected through 0 and isometric
    n = 7
    states = daisy_closure(maximal, n)
    b = Basis(ConstraintSpec.custom(maximal, n), n, states)
    assert verify_partial_cube(build_adjacency(b), b)


def test_matrix_market_export(tmp_path):
    b, h = graph_for(ConstraintSpec.pxp(), 6)
    mtx, side = export_matrix_market(h, b, tmp_path / "pxp6.mtx", metadata={"model": "pxp"})
    back = scipy.io.mmread(str(mtx)).tocsr()
    assert (back != h).nnz == 0
    assert "pattern symmetric" in mtx.read_text().splitlines()[0]
    meta = json.loads(side.read_text())
    assert meta["index_base"] == 1 and meta["model"] == "pxp"
    assert meta["states"]["1"] == "000000"
    assert len(meta["states"]) == b.dim
