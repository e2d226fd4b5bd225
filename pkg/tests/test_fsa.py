import math

import numpy as np
import pytest

from oracles import tridiag
from scargraph.basis import ConstraintSpec, SpinConfig, neel, state_from_label
from scargraph.chains import chain_revival, two_hypercube_chain
from scargraph.exceptions import InvalidArgument
from scargraph.fsa import (
    FsaChain,
    broken_su2_residual,
    exact_steps,
    fsa_chain,
    fsa_recurrence,
    fsa_spectrum,
    split_pm,
    subspace_variance,
)
from scargraph.graph import graph_for

S6 = math.sqrt(6)


def chain_for(spec, n, root=None):
    b, h = graph_for(spec, n)
    root = neel(n) if root is None else root
    hp, hm = split_pm(h, b, root)
    return b, h, hp, hm, fsa_recurrence(hp, b, root, h)


def test_split_pm_free_two_sites():
    b, h = graph_for(ConstraintSpec.free(), 2)
    root = SpinConfig.from_string("10")
    hp, hm = split_pm(h, b, root)
    i = {s: b.index(SpinConfig.from_string(s)) for s in ("00", "10", "01", "11")}
    assert hp[i["00"], i["10"]] == 1 and hp[i["11"], i["10"]] == 1
    assert hp[i["01"], i["00"]] == 1 and hp[i["01"], i["11"]] == 1
    assert hp[i["10"], i["00"]] == 0
    assert hp.nnz == 4


@pytest.mark.parametrize("spec", [ConstraintSpec.pxp(), ConstraintSpec.kk(2), ConstraintSpec.two_hypercube()],
                         ids=lambda s: s.label)
def test_split_pm_properties(spec):
    b, h = graph_for(spec, 10)
    hp, hm = split_pm(h, b, neel(10))
    assert ((hp + hm) != h).nnz == 0
    assert (hm != hp.T).nnz == 0
    # the root sits on layer 0, so nothing lowers it
    assert np.linalg.norm((hm @ b.basis_vector(neel(10)))) == 0


def test_free_betas_and_spectrum():
    _, _, _, _, ch = chain_for(ConstraintSpec.free(), 4)
    assert np.allclose(ch.betas, [2, S6, S6, 2])
    assert np.allclose(fsa_spectrum(ch)[0], [-4, -2, 0, 2, 4])
    assert np.allclose(ch.gram(), np.eye(5))


def test_two_cube_betas():
    _, _, _, hm, ch = chain_for(ConstraintSpec.two_hypercube(), 8)
    assert np.allclose(ch.betas, [2, S6, S6, 2, 2, S6, S6, 2])
    assert exact_steps(hm, ch) == 8


@pytest.mark.parametrize("n", [4, 8, 12, 16])
def test_two_cube_chain_is_exact(n):
    b, h, _, hm, ch = chain_for(ConstraintSpec.two_hypercube(), n)
    assert exact_steps(hm, ch) == n
    assert subspace_variance(h, ch) < 1e-10
    assert np.allclose(ch.betas, two_hypercube_chain(n // 2).betas)


@pytest.mark.parametrize("d,n", [(1, 8), (2, 12), (3, 12), (2, 9)])
def test_star_chain_length(d, n):
    root = SpinConfig(sum(1 << i for i in range(0, n, d + 1)), n)
    b, h, _, hm, ch = chain_for(ConstraintSpec.star(d), n, root)
    m = n // (d + 1)
    assert ch.length == 2 * m
    assert len(ch.support) == 1 + 2 * m
    assert subspace_variance(h, ch) < 1e-10


@pytest.mark.parametrize("spec", [ConstraintSpec.pxp(), ConstraintSpec.kk(2)], ids=lambda s: s.label)
def test_first_two_steps_exact(spec):
    _, _, _, hm, ch = chain_for(spec, 12)
    assert exact_steps(hm, ch) == 2


def test_sigma_e_values():
    _, h, _, _, ch = chain_for(ConstraintSpec.free(), 8)
    assert subspace_variance(h, ch) < 1e-10
    _, h, _, _, ch = chain_for(ConstraintSpec.pxp(), 12)
    assert subspace_variance(h, ch) > 1e-3


def test_sigma_e_against_trace_formula():
    b, h, _, _, ch = chain_for(ConstraintSpec.pxp(), 10)
    v = ch.matrix().toarray()
    p = v @ v.T
    hd = h.toarray()
    ref = np.trace(p @ hd @ hd @ p) - np.trace((p @ hd @ p) @ (p @ hd @ p))
    assert subspace_variance(h, ch) == pytest.approx(ref, rel=1e-10)


def test_chain_vectors_live_on_layers():
    b, h, _, _, ch = chain_for(ConstraintSpec.pxp(), 10)
    root = neel(10)
    for j, s in enumerate(ch.support):
        dist = [(int(x) ^ root.bits).bit_count() for x in b.states[s]]
        assert set(dist) == {j}


def test_projected_hamiltonian_is_the_chain():
    b, h, _, _, ch = chain_for(ConstraintSpec.kk(2), 10)
    v = ch.matrix().toarray()
    # only exact steps reproduce H; couplings on the superdiagonal always do
    proj = v.T @ h.toarray() @ v
    assert np.allclose(np.diag(proj, 1), ch.betas)
    assert np.allclose(np.diag(proj), 0)


def test_spectrum_of_single_coupling():
    e, vecs = fsa_spectrum(FsaChain(np.array([1.0]), np.zeros(2)))
    assert np.allclose(e, [-1, 1])
    assert np.allclose(np.abs(vecs), 1 / math.sqrt(2))


def test_spectrum_matches_dense_tridiagonal():
    betas = np.array([1.3, 0.2, 2.1, 0.7, 1.9])
    e, _ = fsa_spectrum(FsaChain(betas, np.zeros(6)))
    assert np.allclose(e, np.linalg.eigvalsh(tridiag(betas)))


def test_two_cube_spectrum_spacing_matches_period():
    # mid-spectrum levels come in near-degenerate pairs (even and odd about the
    # junction); the pair spacing sets the revival frequency
    ch = two_hypercube_chain(16)
    e, _ = fsa_spectrum(FsaChain(ch.betas, np.zeros(ch.n_sites)))
    c = len(e) // 2
    spacing = (e[c + 4] - e[c - 4]) / 8
    period = chain_revival(ch).revival.T
    assert spacing == pytest.approx(2 * math.pi / period, rel=0.03)


def test_broken_su2_residual():
    b, h = graph_for(ConstraintSpec.free(), 6)
    assert broken_su2_residual(*split_pm(h, b, neel(6)), b) < 1e-10
    for spec in (ConstraintSpec.pxp(), ConstraintSpec.two_hypercube()):
        b, h = graph_for(spec, 10)
        assert broken_su2_residual(*split_pm(h, b, neel(10)), b) > 1e-3


def test_root_must_be_in_basis():
    b, h = graph_for(ConstraintSpec.pxp(), 6)
    with pytest.raises(InvalidArgument):
        split_pm(h, b, SpinConfig.from_string("110000"))


def test_fsa_chain_helper():
    b, h = graph_for(ConstraintSpec.kk(2), 12)
    root = state_from_label("1100", 12)
    ch = fsa_chain(h, b, root)
    assert ch.root == root
    assert np.allclose(ch.gram(), np.eye(ch.length + 1), atol=1e-12)
