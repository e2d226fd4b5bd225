import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import inversion_matrix, translation_matrix
from scargraph.basis import ConstraintSpec, enumerate_basis, neel
from scargraph.exceptions import InvalidArgument, UnsupportedModel
from scargraph.graph import build_adjacency
from scargraph.symmetry import (
    iter_sectors,
    orbit_data,
    parse_sector,
    project_sector,
    reflect,
    sector_basis,
    sector_dimension_oracle,
    translation_orbits,
)


def orbit_words(basis):
    return sorted(sorted(basis.states[o].tolist()) for o in translation_orbits(basis))


def test_pxp_four_site_orbits():
    b = enumerate_basis(ConstraintSpec.pxp(), 4)
    assert orbit_words(b) == [[0], [1, 2, 4, 8], [5, 10]]
    assert sorted(orbit_data(b).orbit_sizes().tolist()) == [1, 2, 4]


def test_free_two_site_orbits():
    b = enumerate_basis(ConstraintSpec.free(), 2)
    assert orbit_words(b) == [[0], [1, 2], [3]]


@pytest.mark.parametrize("n", [4, 6, 8, 12])
def test_neel_period_two(n):
    b = enumerate_basis(ConstraintSpec.pxp(), n)
    od = orbit_data(b)
    assert od.period[b.index(neel(n))] == 2


@pytest.mark.parametrize("spec", [ConstraintSpec.pxp(), ConstraintSpec.kk(2), ConstraintSpec.free()],
                         ids=lambda s: s.label)
def test_orbit_invariants(spec):
    n = 10
    b = enumerate_basis(spec, n)
    od = orbit_data(b)
    assert np.all(n % od.period == 0)
    reps = od.representatives
    # representatives are the minimal words of their orbits
    for o in translation_orbits(b):
        assert b.states[od.rep_index[o[0]]] == b.states[o].min()
    assert od.period[reps].sum() == b.dim


def test_pxp_sector_dims():
    b = enumerate_basis(ConstraintSpec.pxp(), 4)
    assert [sector_basis(b, k).dim for k in range(4)] == [3, 1, 2, 1]


def test_free_two_site_sectors():
    b = enumerate_basis(ConstraintSpec.free(), 2)
    h = build_adjacency(b)
    h0, _ = project_sector(h, b, 0)
    assert h0.shape == (3, 3)
    assert np.allclose(np.linalg.eigvalsh(h0), [-2, 0, 2])
    h1, _ = project_sector(h, b, 1)
    assert np.allclose(np.linalg.eigvalsh(h1), [0])


def joint_dimension(states, n, k, parity):
    t = translation_matrix(states, n)
    p_k = sum(np.exp(2j * np.pi * k * r / n) * np.linalg.matrix_power(t, r) for r in range(n)) / n
    if parity is not None:
        p_k = p_k @ (np.eye(len(states)) + parity * inversion_matrix(states, n)) / 2
    return int(round(np.trace(p_k).real)), np.linalg.matrix_rank(p_k, tol=1e-8)


def test_kk2_twelve_site_even_sector_dimension():
    b = enumerate_basis(ConstraintSpec.kk(2), 12)
    sb = sector_basis(b, 0, 1)
    tr, rank = joint_dimension(b.states.tolist(), 12, 0, 1)
    assert sb.dim == tr == rank == sector_dimension_oracle(b, 0, 1) == 88


@pytest.mark.parametrize("spec,n", [(ConstraintSpec.pxp(), 8), (ConstraintSpec.kk(2), 6),
                                    (ConstraintSpec.free(), 6), (ConstraintSpec.pxp(), 9)])
def test_sector_dims_match_matrix_oracle(spec, n):
    b = enumerate_basis(spec, n)
    total = 0
    for k, parity in iter_sectors(n):
        sb = sector_basis(b, k, parity)
        tr, rank = joint_dimension(b.states.tolist(), n, k, parity)
        assert sb.dim == tr == rank == sector_dimension_oracle(b, k, parity)
        total += sb.dim
    assert total == b.dim


@pytest.mark.parametrize("spec", [ConstraintSpec.pxp(), ConstraintSpec.kk(2), ConstraintSpec.two_hypercube()],
                         ids=lambda s: s.label)
def test_sector_spectra_reassemble_full_spectrum(spec):
    n = 10
    b = enumerate_basis(spec, n)
    h = build_adjacency(b)
    full = np.linalg.eigvalsh(h.toarray())
    parts = []
    for k, parity in iter_sectors(n):
        hk, sb = project_sector(h, b, k, parity)
        v = sb.projector.toarray()
        assert np.allclose(v.conj().T @ v, np.eye(sb.dim), atol=1e-12)
        parts.append(np.linalg.eigvalsh(hk))
    assert np.allclose(np.sort(np.concatenate(parts)), full, atol=1e-12)


def test_sector_vectors_are_symmetric():
    n = 8
    b = enumerate_basis(ConstraintSpec.pxp(), n)
    t = translation_matrix(b.states.tolist(), n)
    p = inversion_matrix(b.states.tolist(), n)
    for k, parity in [(0, 1), (0, -1), (4, 1), (3, None)]:
        v = sector_basis(b, k, parity).projector.toarray()
        assert np.allclose(t @ v, np.exp(-2j * np.pi * k / n) * v) or \
            np.allclose(t @ v, np.exp(2j * np.pi * k / n) * v)
        if parity is not None:
            assert np.allclose(p @ v, parity * v)


def test_neel_lives_in_zero_and_pi_even_sectors():
    n = 12
    b = enumerate_basis(ConstraintSpec.pxp(), n)
    psi = b.basis_vector(neel(n))
    w = {(k, par): np.linalg.norm(sector_basis(b, k, par).project_vector(psi)) ** 2
         for k, par in iter_sectors(n)}
    assert abs(w[(0, 1)] + w[(6, 1)] - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2 ** 20 - 1))
def test_reflect_is_involution(n, w):
    w &= (1 << n) - 1
    assert int(reflect(reflect(w, n), n)) == w
    assert int(reflect(w, n)) & 1 == w & 1


def test_parse_sector():
    assert parse_sector("k=0,inv=+1") == (0, 1)
    assert parse_sector("k=3") == (3, None)
    assert parse_sector("k=6, inv=-1") == (6, -1)
    for bad in ("inv=1", "k=0,inv=2", "q=1"):
        with pytest.raises(InvalidArgument):
            parse_sector(bad)


def test_inversion_only_at_real_momenta():
    b = enumerate_basis(ConstraintSpec.pxp(), 8)
    with pytest.raises(InvalidArgument):
        sector_basis(b, 1, 1)


def test_translation_required():
    b = enumerate_basis(ConstraintSpec.pxp("obc"), 6)
    with pytest.raises(UnsupportedModel):
        orbit_data(b)
