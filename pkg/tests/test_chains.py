import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import expm_fidelity, tridiag
from scargraph.basis import ConstraintSpec
from scargraph.chains import (
    ChainPropagator,
    TbChain,
    bridged_middle_chain,
    bridged_sweep,
    chain_revival,
    estimate_exponent,
    evolve_chain,
    extrapolate_scaling,
    hypercube_chain,
    sector_return_amplitude,
    spectral_weights,
    star_sector_chains,
    star_symmetric_chain,
    star_symmetric_scan,
    two_hypercube_chain,
    two_hypercube_scaling,
)
from scargraph.dynamics import evolve
from scargraph.exceptions import InvalidArgument
from scargraph.graph import graph_for

R2, R3, R6 = math.sqrt(2), math.sqrt(3), math.sqrt(6)


def test_hypercube_couplings():
    assert np.allclose(hypercube_chain(1).betas, [1])
    assert np.allclose(hypercube_chain(2).betas, [R2, R2])
    assert np.allclose(hypercube_chain(4).betas, [2, R6, R6, 2])


def test_two_cube_couplings():
    assert np.allclose(two_hypercube_chain(2).betas, [R2] * 4)
    assert np.allclose(two_hypercube_chain(3).betas, [R3, 2, R3, R3, 2, R3])
    assert two_hypercube_chain(7).is_palindromic()


def test_star_sector_couplings():
    sym, anti = star_sector_chains(2, 1)
    assert np.allclose(sym.betas, [R2, 2]) and np.allclose(anti.betas, [R2])
    sym, anti = star_sector_chains(3, 2)
    assert np.allclose(sym.betas, [R3, 2, 3]) and np.allclose(anti.betas, [R3, 2])


def test_star_sectors_block_diagonalise_two_cube():
    # 7-state two-cube model: sector spectra reassemble the full spectrum
    b, h = graph_for(ConstraintSpec.two_hypercube(), 4)
    sym, anti = star_sector_chains(2, 1)
    parts = np.concatenate([np.linalg.eigvalsh(sym.matrix()), np.linalg.eigvalsh(anti.matrix()),
                            np.linalg.eigvalsh(anti.matrix())])
    # two further states are antisymmetric single-excitation combinations
    full = np.linalg.eigvalsh(h.toarray())
    assert set(np.round(parts, 10)) <= set(np.round(full, 10))


@pytest.mark.parametrize("n,d", [(2, 1), (3, 2), (4, 3)])
def test_sector_recombination_matches_star_model(n, d):
    m = n * (d + 1)
    b, h = graph_for(ConstraintSpec.star(d), m)
    corner = sum(1 << (i * (d + 1)) for i in range(n))
    psi = np.zeros(b.dim)
    psi[b.index(corner)] = 1
    times = np.linspace(0, 8, 17)
    ref = evolve(h, psi, times).amplitude
    amp = sector_return_amplitude(n, d, times)
    assert np.allclose(np.abs(amp) ** 2, np.abs(ref) ** 2, atol=1e-10)


def test_bridged_couplings():
    assert np.allclose(bridged_middle_chain(6, 0).betas, two_hypercube_chain(6).betas)
    b = bridged_middle_chain(4, 2).betas
    assert np.allclose(b[3:5], [R6, R6])
    n = 8
    assert np.allclose(bridged_middle_chain(n, n).betas[n - 1:n + 1], math.sqrt(2 * n))
    for bad in [(4, 1), (4, 6), (5, 2)]:
        with pytest.raises(InvalidArgument):
            bridged_middle_chain(*bad)


def test_star_symmetric_chain_coupling():
    assert star_symmetric_chain(3, 2).betas[-1] == pytest.approx(3)
    assert star_symmetric_chain(4, 1, 2).betas[-1] == pytest.approx(math.sqrt(12))


def test_chain_validation():
    for bad in ([], [1.0, -1.0], [[1.0]]):
        with pytest.raises(InvalidArgument):
            TbChain(np.array(bad))


@pytest.mark.parametrize("n", [1, 5, 20, 200])
def test_hypercube_returns_at_pi(n):
    s = evolve_chain(hypercube_chain(n), 0, [0.0, math.pi])
    assert abs(s.fidelity[1] - 1) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(0.2, 3.0), min_size=1, max_size=12), st.data())
def test_spectral_weights_match_eigenvectors(betas, data):
    ch = TbChain(np.array(betas))
    site = data.draw(st.integers(0, ch.n_sites - 1))
    e, w = spectral_weights(ch, site)
    ref_e, vecs = np.linalg.eigh(tridiag(betas))
    assert np.allclose(e, ref_e, atol=1e-10)
    assert np.allclose(w, vecs[site] ** 2, atol=1e-9)
    assert w.sum() == pytest.approx(1, abs=1e-9)


def test_chain_evolution_matches_expm():
    ch = two_hypercube_chain(5)
    times = np.linspace(0, 9, 10)
    for site in (0, 3):
        psi = np.zeros(ch.n_sites)
        psi[site] = 1
        got = evolve_chain(ch, site, times).fidelity
        assert np.allclose(got, expm_fidelity(ch.matrix(), psi, times), atol=1e-10)


def test_chebyshev_matches_spectral():
    ch = two_hypercube_chain(64)
    times = np.linspace(0, 12, 25)
    a = ChainPropagator(ch, 0, "spectral").amplitudes(times)
    c = ChainPropagator(ch, 0, "chebyshev").amplitudes(times)
    assert np.allclose(a, c, atol=1e-9)


def test_two_cube_revival_trend():
    f = [chain_revival(two_hypercube_chain(n)).revival for n in (16, 64, 256)]
    assert f[0].f0 > f[1].f0 > f[2].f0 > 0.7159
    assert f[0].T < f[1].T < f[2].T < 6.3


def test_large_two_cube_chain_stable():
    rev = chain_revival(two_hypercube_chain(2048)).revival
    assert 0.7159 < rev.f0 < 0.7161
    # the period converges slowly, roughly as N^-1/2
    assert 6.2 < rev.T < 6.282


def test_reflection_peak():
    s = chain_revival(two_hypercube_chain(64), reflection=True)
    f_r, t_r = s.reflection
    assert 0.3 * s.revival.T <= t_r <= 0.7 * s.revival.T
    assert 0 < f_r < s.revival.f0


def test_extrapolate_constant():
    fit = extrapolate_scaling([(n, 0.5) for n in (8, 16, 32, 64)])
    assert abs(fit.asymptote - 0.5) < 1e-10
    assert np.allclose(fit.coefficients[1:], 0, atol=1e-10)
    assert fit.error < 1e-10


def test_extrapolate_recovers_known_law():
    pts = [(n, 2.0 - 3 / n + 1 / n ** 2) for n in (10, 20, 40, 80, 160)]
    fit = extrapolate_scaling(pts)
    assert fit.asymptote == pytest.approx(2.0, abs=1e-10)
    assert np.allclose(fit.predict([10, 20]), [p[1] for p in pts[:2]])
    pts = [(n, 1.0 + 2 / math.sqrt(n) + 0.5 / n) for n in (16, 64, 256, 1024)]
    assert extrapolate_scaling(pts, "sqrt").asymptote == pytest.approx(1.0, abs=1e-10)
    assert extrapolate_scaling(pts, "auto").exponent == pytest.approx(0.5, abs=0.05)


def test_estimate_exponent():
    x = np.array([10.0, 20, 40, 80])
    assert estimate_exponent(x, 1 + x ** -0.7) == pytest.approx(0.7, abs=1e-6)
    assert estimate_exponent(x, np.array([1, 2, 1, 2.0])) == 1.0


def test_extrapolate_validation():
    with pytest.raises(InvalidArgument):
        extrapolate_scaling([(1, 1), (2, 1), (3, 1)])
    with pytest.raises(InvalidArgument):
        extrapolate_scaling([(4, 1), (2, 1), (3, 1), (5, 1)])
    with pytest.raises(InvalidArgument):
        extrapolate_scaling([(n, 1) for n in (1, 2, 3, 4)], form="exp")


def test_two_cube_extrapolation_target():
    data = two_hypercube_scaling([2 ** k for k in range(5, 11)], reflection=False)
    f_fit = extrapolate_scaling([(n, f) for n, f, *_ in data], form="auto")
    t_fit = extrapolate_scaling([(n, t) for n, _, t, *_ in data], form="auto")
    assert abs(f_fit.asymptote - 0.7159) < 0.001
    assert abs(t_fit.asymptote - 6.282) < 0.005


def test_star_symmetric_scan_d1_matches_bridged_symmetric_sector():
    s = star_symmetric_scan(1, 0, 16)
    direct = chain_revival(star_symmetric_chain(16, 1, 0)).revival
    assert s.revival.f0 == pytest.approx(direct.f0) and s.revival.T == pytest.approx(direct.T)
    times = np.linspace(0, 5, 11)
    s2 = star_symmetric_scan(1, 0, 16, times)
    assert np.allclose(s2.fidelity, evolve_chain(star_symmetric_chain(16, 1), 0, times).fidelity)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_star_symmetric_revivals_finite(d):
    assert star_symmetric_scan(d, 0, 100).revival.f0 > 0.1


def test_bridged_sweep_records():
    recs = bridged_sweep(12)
    assert [r.bridges for r in recs] == list(range(0, 13, 2))
    assert all(r.f0 > 0 and r.T > 0 for r in recs)
    assert recs[0].f0 == pytest.approx(chain_revival(two_hypercube_chain(12)).revival.f0)
    assert len({r.T_anti for r in recs}) == 1
    t_sym = [r.T_sym for r in recs]
    assert all(a > b for a, b in zip(t_sym, t_sym[1:]))
