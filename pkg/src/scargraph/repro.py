"""Desk-scale recipes behind each figure tag.

Every recipe returns a report ``{"tag", "tables", "checks"}`` where each check
is ``{"name", "passed", "detail"}``. ``quick=True`` shrinks every size so the
recipe finishes in seconds (used by the CLI tests).
"""

from __future__ import annotations


import numpy as np

from .basis import ConstraintSpec, neel, state_from_label, z_state
from .chains import (
    bridged_sweep,
    chain_revival,
    extrapolate_scaling,
    star_symmetric_chain,
    two_hypercube_scaling,
)
from .dynamics import fidelity_density, find_revival, scan_initial_states
from .fsa import fsa_chain, fsa_spectrum
from .graph import graph_for
from .sampler import (
    ensemble_statistics,
    model_marker,
    run_many,
    sigma_f0_correlation,
)
from .spectral import diagonalize, entropies, level_statistics, overlap_profile

TAGS = ("fig3", "fig4", "fig5", "fig6", "fig7", "fig10", "fig11", "fig13")


def _check(name, passed, **detail):
    return {"name": name, "passed": bool(passed), "detail": detail}


def top_band_deviation(spec: ConstraintSpec, n_sites: int) -> float:
    """Top-band/FSA energy mismatch from the Neel state, as a fraction of the bandwidth."""
    basis, h = graph_for(spec, n_sites)
    target = basis.basis_vector(neel(n_sites))
    ref = fsa_spectrum(fsa_chain(h, basis, neel(n_sites)))[0]
    spectra = diagonalize(h, basis, [(0, 1), (n_sites // 2, 1)])
    return overlap_profile(spectra, target, ref).band_deviation()


def fig3(quick: bool = False) -> dict:
    dims = [16, 32, 64, 128] if quick else [32, 64, 128, 256, 512, 1024, 2048]
    data = two_hypercube_scaling(dims)
    fit_f = extrapolate_scaling([(d[0], d[1]) for d in data], form="auto")
    fit_t = extrapolate_scaling([(d[0], d[2]) for d in data], form="auto")
    n_big, f_big, t_big, fr, tr = data[-1]
    checks = [
        _check("f0 asymptote 0.7159 +- 0.002", abs(fit_f.asymptote - 0.7159) <= 0.002,
               value=fit_f.asymptote, error=fit_f.error),
        _check("T asymptote 6.282 +- 0.01", abs(fit_t.asymptote - 6.282) <= 0.01,
               value=fit_t.asymptote, error=fit_t.error),
        _check("reflection peak in (0, 0.1) near T/2",
               0 < fr < 0.1 and abs(tr - t_big / 2) < 0.2 * t_big, f=fr, t=tr, T=t_big),
    ]
    return {"tag": "fig3",
            "tables": {"points": [dict(zip(("N", "f0", "T", "f_refl", "t_refl"), d)) for d in data],
                       "fit_f0": {"asymptote": fit_f.asymptote, "error": fit_f.error,
                                  "form": fit_f.form, "exponent": fit_f.exponent},
                       "fit_T": {"asymptote": fit_t.asymptote, "error": fit_t.error,
                                 "form": fit_t.form, "exponent": fit_t.exponent}},
            "checks": checks}


def fig4(quick: bool = False) -> dict:
    n = 12 if quick else 16
    rows = []
    for r in range(1, n // 4 + 1):
        spec = ConstraintSpec.rrange(r)
        basis, h = graph_for(spec, n)
        rev = find_revival(h, basis.basis_vector(neel(n))).revival
        scan = scan_initial_states(h, basis)
        best = scan.best
        rows.append({"r": r, "dim": basis.dim, "f0": rev.f0, "T": rev.T,
                     "best_state": best.state, "best_f0": best.f0, "best_T": best.T,
                     "mean_f0": scan.mean_f0, "std_f0": scan.std_f0})
    dev = top_band_deviation(ConstraintSpec.pxp(), n)
    return {"tag": "fig4", "tables": {"family": rows, "pxp_top_band_deviation": dev},
            "checks": [_check("PXP top band within 2% of the FSA energies", dev < 0.02,
                              deviation=dev, N=n)]}


def fig5(quick: bool = False) -> dict:
    n = 14 if quick else 20
    basis, h = graph_for(ConstraintSpec.kk(2), n)
    spec = diagonalize(h, basis, [(0, 1)])[0]
    ls = level_statistics(spec)
    hist = ls.histogram
    tables = {"N": n, "sector": ls.sector, "levels": ls.n_levels, "r": ls.r}
    if hist is not None:
        tables.update({"ks_distance": hist.ks_distance, "bin_edges": hist.edges,
                       "density": hist.density})
    return {"tag": "fig5", "tables": tables,
            "checks": [_check("<r> in [0.48, 0.56]", 0.48 <= ls.r <= 0.56, r=ls.r, N=n)]}


def fig6(quick: bool = False) -> dict:
    sizes = [12] if quick else [12, 16, 20]
    spec = ConstraintSpec.kk(2)
    rows = []
    for n in sizes:
        basis, h = graph_for(spec, n)
        for label in ("neel", "1100"):
            rev = find_revival(h, basis.basis_vector(state_from_label(label, n))).revival
            rows.append({"N": n, "state": label, "f0": rev.f0, "T": rev.T,
                         "density": fidelity_density(rev.f0, n)})
    n_band = 12 if quick else 16
    dev = top_band_deviation(spec, n_band)
    basis, h = graph_for(spec, n_band)
    sectors = diagonalize(h, basis, [(0, 1)])
    ref = fsa_spectrum(fsa_chain(h, basis, neel(n_band)))[0]
    prof = overlap_profile(sectors, basis.basis_vector(neel(n_band)), ref)
    ent = entropies(sectors[0], basis)
    top = prof.top_band
    checks = [
        _check("Neel density in [-0.02, 0]",
               all(-0.02 <= r["density"] <= 0 for r in rows if r["state"] == "neel"),
               values=[r["density"] for r in rows if r["state"] == "neel"]),
        _check("1100 density in [-0.06, 0]",
               all(-0.06 <= r["density"] <= 0 for r in rows if r["state"] == "1100"),
               values=[r["density"] for r in rows if r["state"] == "1100"]),
        _check("(2,3) top band within 2% of the FSA energies", dev < 0.02, deviation=dev, N=n_band),
    ]
    return {"tag": "fig6",
            "tables": {"fidelity": rows, "top_band_deviation": dev,
                       "top_band": [{"E": float(prof.energies[i]), "overlap": float(prof.overlaps[i]),
                                     "S": float(ent[i])} for i in top],
                       "mean_entropy": float(ent.mean())},
            "checks": checks}


def blockade_sizes(quick: bool = False) -> dict:
    """System sizes with comparable Hilbert-space dimensions per blockade radius."""
    return {1: 12, 2: 15, 3: 16} if quick else {1: 20, 2: 24, 3: 28}


def fig7(quick: bool = False) -> dict:
    rows = []
    for d, n in blockade_sizes(quick).items():
        basis, h = graph_for(ConstraintSpec.blockade(d), n)
        rev = find_revival(h, basis.basis_vector(z_state(n, d + 1))).revival
        rows.append({"d": d, "N": n, "dim": basis.dim, "f0": rev.f0, "T": rev.T})
    pxp = rows[0]["f0"]
    ok = all((r["f0"] if r["f0"] == r["f0"] else 0.0) * 2 <= pxp for r in rows[1:])
    return {"tag": "fig7", "tables": {"blockade": rows},
            "checks": [_check("blockade d=2,3 f0 at most half of PXP", ok,
                              f0=[r["f0"] for r in rows])]}


def fig10(quick: bool = False) -> dict:
    n = 40 if quick else 300
    recs = bridged_sweep(n)
    f0 = np.array([r.f0 for r in recs])
    gap = np.array([r.period_gap for r in recs])
    i, j = int(np.argmax(f0)), int(np.argmin(gap))
    return {"tag": "fig10",
            "tables": {"n": n, "sweep": [{"bridges": r.bridges, "f0": r.f0, "T": r.T,
                                          "T_sym": r.T_sym, "T_anti": r.T_anti} for r in recs]},
            "checks": [_check("f0 maximum within one step of the period-gap minimum",
                              abs(i - j) <= 1, argmax_f0=recs[i].bridges,
                              argmin_gap=recs[j].bridges)]}


def fig11(quick: bool = False, seeds=None, threads: int = 1) -> dict:
    n = 8 if quick else 12
    seeds = list(range(10)) if seeds is None else list(seeds)
    runs = run_many(n, seeds, threads=threads, sigma_e=True)
    pxp = model_marker(ConstraintSpec.pxp(), n)
    ens = ensemble_statistics(runs, markers={"pxp": pxp})
    return {"tag": "fig11", "tables": sampler_tables(ens, runs), "checks": sampler_checks(ens, runs, pxp)}


def sampler_tables(ens, runs) -> dict:
    return {"zero": vars(ens.zero), "bins": [vars(b) for b in ens.bins], "markers": ens.markers,
            "spearman_sigma_f0": sigma_f0_correlation(runs), "n_runs": ens.n_runs}


def sampler_checks(ens, runs, pxp) -> list:
    first = ens.first_nonzero_bin()
    rho = sigma_f0_correlation(runs)
    b = ens.bin_for(pxp["lam"])
    within = (b is not None and b.count > 1
              and abs(pxp["density"] - b.density_mean) <= 2 * b.density_std
              and abs(pxp["T"] - b.T_mean) <= 2 * b.T_std)
    return [
        _check("small-lambda density exceeds the lambda=0 value",
               first is not None and first.density_mean > ens.zero.density_mean,
               first_bin=first.density_mean if first else None, zero=ens.zero.density_mean),
        _check("Spearman(sigma_E, f0) <= -0.5", rho <= -0.5, rho=rho),
        _check("PXP within 2 std of its lambda bin", within, pxp=pxp,
               bin=None if b is None else vars(b)),
    ]


def fig13(quick: bool = False) -> dict:
    n = 50 if quick else 200
    rows = []
    for d in (1, 2, 3, 4):
        s = chain_revival(star_symmetric_chain(n, d, 0))
        rows.append({"d": d, "n": n, "f0": s.revival.f0, "T": s.revival.T})
    sweep = []
    for b in range(0, n + 1, max(2, n // 10) // 2 * 2):
        s = chain_revival(star_symmetric_chain(n, 1, b))
        sweep.append({"bridges": b, "f0": s.revival.f0, "T": s.revival.T})
    return {"tag": "fig13", "tables": {"star": rows, "bridge_sweep_d1": sweep},
            "checks": [_check("symmetric-sector revival for every d",
                              all(r["f0"] == r["f0"] and r["f0"] > 0.1 for r in rows),
                              f0=[r["f0"] for r in rows])]}


RECIPES = {"fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6, "fig7": fig7,
           "fig10": fig10, "fig11": fig11, "fig13": fig13}


def run(tag: str, quick: bool = False, **kw) -> dict:
    if tag not in RECIPES:
        from .exceptions import InvalidArgument

        raise InvalidArgument(f"unknown figure tag {tag!r}; choose from {', '.join(TAGS)}")
    return RECIPES[tag](quick=quick, **kw)
