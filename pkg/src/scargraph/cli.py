"""Command-line entry point: ``scargraph <subcommand> ...``.

Exit codes: 0 success, 1 unexpected error, 2 usage or invalid argument,
3 resource cap exceeded, 4 internal contract violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .basis import hilbert_dimension, parse_model, quantum_dimension, state_from_label
from .chains import (
    FIT_FORMS,
    bridged_middle_chain,
    chain_revival,
    evolve_chain,
    extrapolate_scaling,
    hypercube_chain,
    sector_return_amplitude,
    star_sector_chains,
    star_symmetric_chain,
    two_hypercube_chain,
    two_hypercube_scaling,
)
from .dynamics import DEFAULT_HORIZON, detect_first_revival, evolve, scan_initial_states, time_grid
from .exceptions import ContractViolation, InvalidArgument, ResourceLimit, UnsupportedModel
from .fsa import exact_steps, fsa_chain, fsa_spectrum, split_pm, subspace_variance
from .graph import export_matrix_market, graph_for
from .io import RunConfig, dumps, envelope, write_csv, write_json, write_jsonl
from .spectral import diagonalize, entropies, level_statistics, overlap_profile
from .symmetry import iter_sectors, parse_sector

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_RESOURCE, EXIT_CONTRACT = 0, 1, 2, 3, 4


def _emit(obj, out=None):
    if out:
        write_json(out, obj)
    else:
        print(dumps(obj))


def _model(args):
    return parse_model(args.model, args.bc)


def _config(args, **options) -> RunConfig:
    return RunConfig(
        subcommand=args.command,
        model=getattr(args, "model", None),
        n=getattr(args, "n", None),
        boundary=getattr(args, "bc", "pbc"),
        tmax=getattr(args, "tmax", None),
        out=getattr(args, "out", None),
        seed=getattr(args, "seed", None),
        sectors=list(getattr(args, "sector", None) or []),
        options=options,
    )


def cmd_dims(args):
    spec = _model(args)
    dim = hilbert_dimension(spec, args.n)
    try:
        alpha = quantum_dimension(spec)
    except (UnsupportedModel, InvalidArgument):
        alpha = None
    _emit(envelope(_config(args), {"model": spec.label, "N": args.n, "dim": str(dim), "alpha": alpha}),
          args.out)


def cmd_build_graph(args):
    spec = _model(args)
    basis, h = graph_for(spec, args.n)
    payload = {"model": spec.label, "N": args.n, "dim": basis.dim, "edges": int(h.nnz // 2)}
    if args.export:
        mtx, side = export_matrix_market(h, basis, args.export, metadata=_config(args).to_dict())
        payload.update({"matrix": str(mtx), "index": str(side)})
    _emit(envelope(_config(args), payload))


def cmd_evolve(args):
    spec = _model(args)
    basis, h = graph_for(spec, args.n)
    config = state_from_label(args.state, args.n)
    if config not in basis:
        raise InvalidArgument(f"state {config} is not in the {spec.label} basis")
    times = time_grid(args.tmax, args.points)
    series = evolve(h, basis.basis_vector(config), times)
    rev = series.revival
    notes = {"first_revival": {"f0": rev.f0, "T": rev.T, "found": rev.found}, "state": str(config)}
    rows = zip(series.times, series.fidelity)
    cfg = _config(args, state=args.state, points=args.points)
    if args.out:
        write_csv(args.out, ["t", "fidelity"], rows, cfg, notes)
        print(dumps(envelope(cfg, notes)))
    else:
        print("# " + json.dumps(notes))
        print("t,fidelity")
        for t, f in rows:
            print("%.17g,%.17g" % (t, f))


def cmd_scan(args):
    spec = _model(args)
    basis, h = graph_for(spec, args.n)
    scan = scan_initial_states(h, basis, args.tmax or DEFAULT_HORIZON, threads=args.threads)
    best = scan.best
    payload = {"model": spec.label, "N": args.n, "dim": basis.dim,
               "records": scan.records, "partial": scan.partial,
               "aggregates": {"mean_f0": scan.mean_f0, "std_f0": scan.std_f0,
                              "best": best, "ranking": [r.index for r in scan.ranking()[:10]]}}
    _emit(envelope(_config(args), payload), args.out)


def cmd_fsa(args):
    spec = _model(args)
    basis, h = graph_for(spec, args.n)
    root = state_from_label(args.state, args.n)
    if root not in basis:
        raise InvalidArgument(f"state {root} is not in the {spec.label} basis")
    hp, hm = split_pm(h, basis, root)
    chain = fsa_chain(h, basis, root)
    energies, _ = fsa_spectrum(chain)
    payload = {"model": spec.label, "N": args.n, "state": str(root),
               "betas": chain.betas, "exact_steps": exact_steps(hm, chain),
               "sigma_e": subspace_variance(h, chain), "eigenvalues": energies}
    _emit(envelope(_config(args, state=args.state), payload), args.out)


def _chain_for(args):
    if args.kind == "hypercube":
        return hypercube_chain(args.n)
    if args.kind == "2hc":
        return two_hypercube_chain(args.n)
    if args.kind == "star-sym":
        return star_symmetric_chain(args.n, args.d, args.bridges)
    if args.kind == "bridged":
        return bridged_middle_chain(args.n, args.bridges)
    raise InvalidArgument(f"unknown chain kind {args.kind!r}")


def cmd_chain(args):
    times = time_grid(args.tmax, args.points)
    if args.kind == "star":
        amp = sector_return_amplitude(args.n, args.d, times)
        fid = np.abs(amp) ** 2
        from .dynamics import FidelitySeries

        series = FidelitySeries(times, fid, amp)
        rev = detect_first_revival(series)
        sym, anti = star_sector_chains(args.n, args.d)
        extra = {"T_sym": chain_revival(sym).revival.T,
                 "T_anti": chain_revival(anti).revival.T if anti is not None else None}
    else:
        chain = _chain_for(args)
        series = evolve_chain(chain, 0, times)
        rev = detect_first_revival(series)
        extra = {"sites": chain.n_sites}
    notes = {"first_revival": {"f0": rev.f0, "T": rev.T, "found": rev.found}, **extra}
    cfg = _config(args, kind=args.kind, d=args.d, bridges=args.bridges, points=args.points)
    rows = zip(series.times, series.fidelity)
    if args.out:
        write_csv(args.out, ["t", "fidelity"], rows, cfg, notes)
    print(dumps(envelope(cfg, notes)))


def cmd_chain_scaling(args):
    dims = args.dims or [2 ** k for k in range(5, 12)]
    data = two_hypercube_scaling(dims)
    fits = {}
    for form in FIT_FORMS:
        ff = extrapolate_scaling([(d[0], d[1]) for d in data], form=form, seed=args.seed or 0)
        ft = extrapolate_scaling([(d[0], d[2]) for d in data], form=form, seed=args.seed or 0)
        fits[form] = {"f0": {"asymptote": ff.asymptote, "error": ff.error, "exponent": ff.exponent},
                      "T": {"asymptote": ft.asymptote, "error": ft.error, "exponent": ft.exponent}}
    payload = {"points": [dict(zip(("N", "f0", "T", "f_refl", "t_refl"), d)) for d in data],
               "fits": fits, "selected": args.form, "f0": fits[args.form]["f0"]["asymptote"],
               "T": fits[args.form]["T"]["asymptote"]}
    _emit(envelope(_config(args, dims=dims, form=args.form), payload), args.out)


def cmd_spectrum(args):
    spec = _model(args)
    basis, h = graph_for(spec, args.n)
    sectors = [parse_sector(s) for s in args.sector] if args.sector else list(iter_sectors(args.n))
    spectra = diagonalize(h, basis, sectors)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _config(args, target=args.target)
    write_csv(out / "eigenvalues.csv", ["sector", "index", "energy"],
              [(s.label, i, e) for s in spectra for i, e in enumerate(s.energies)], cfg)
    if args.target:
        target = state_from_label(args.target, args.n)
        ref = None
        try:
            ref = fsa_spectrum(fsa_chain(h, basis, target))[0]
        except InvalidArgument:
            pass
        prof = overlap_profile(spectra, basis.basis_vector(target), ref)
        top = set() if prof.top_band is None else set(int(i) for i in prof.top_band)
        write_csv(out / "overlaps.csv", ["sector", "energy", "overlap", "top_band"],
                  [(lab, e, o, int(i in top)) for i, (lab, e, o) in
                   enumerate(zip(prof.labels, prof.energies, prof.overlaps))], cfg,
                  {"total_weight": prof.total_weight, **prof.meta})
    ent_rows = []
    if args.n % 2 == 0:
        for s in spectra:
            for i, val in enumerate(entropies(s, basis)):
                ent_rows.append((s.label, i, s.energies[i], val))
    write_csv(out / "entropy.csv", ["sector", "index", "energy", "entropy"], ent_rows, cfg)
    stats = []
    for s in spectra:
        if len(s.energies) < 12:
            continue
        ls = level_statistics(s)
        rec = {"sector": ls.sector, "levels": ls.n_levels, "r": ls.r, "edge_discard": ls.edge_discard}
        if ls.histogram is not None:
            rec.update({"ks_distance": ls.histogram.ks_distance, "bin_edges": ls.histogram.edges,
                        "density": ls.histogram.density})
        stats.append(rec)
    write_json(out / "levelstats.json", envelope(cfg, {"sectors": stats}))
    print(dumps(envelope(cfg, {"dir": str(out), "sectors": [s.label for s in spectra]})))


def cmd_sample(args):
    from .sampler import METADATA, run_many

    seeds = list(range(args.seed or 0, (args.seed or 0) + args.seeds))
    runs = run_many(args.n, seeds, threads=args.threads, sigma_e=args.sigma_e,
                    seed_graph=args.seed_graph)
    cfg = _config(args, seeds=args.seeds, seed_graph=args.seed_graph, sigma_e=args.sigma_e,
                  **METADATA)
    rows = [r for run in runs for r in run]
    if args.out:
        write_jsonl(args.out, rows, cfg)
        print(dumps(envelope(cfg, {"records": len(rows), "runs": len(runs)})))
    else:
        for r in rows:
            print(dumps(r, indent=None))


def cmd_repro(args):
    from . import repro

    kw = {}
    if args.tag == "fig11":
        kw["threads"] = args.threads
    report = repro.run(args.tag, quick=args.quick, **kw)
    cfg = _config(args, tag=args.tag, quick=args.quick)
    if args.out:
        write_json(args.out, envelope(cfg, report))
    else:
        print(dumps(envelope(cfg, report["tables"])))
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {args.tag}: {c['name']} {dumps(c['detail'], indent=None)}")
    if args.strict and not all(c["passed"] for c in report["checks"]):
        return EXIT_ERROR
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scargraph", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads (default: logical cores)")
    sub = p.add_subparsers(dest="command", required=True)

    def model_cmd(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--model", required=True, help="free|pxp|blockade:d|rrange:r|kk:k|2hc|star:d|2hg|custom:file")
        s.add_argument("--n", type=int, required=True)
        s.add_argument("--bc", choices=("pbc", "obc"), default="pbc")
        return s

    s = model_cmd("dims", "exact Hilbert-space dimension and growth rate")
    s.add_argument("--out")
    s.set_defaults(func=cmd_dims)

    s = model_cmd("build-graph", "build the adjacency graph")
    s.add_argument("--export", help="Matrix Market path (a .json index is written beside it)")
    s.set_defaults(func=cmd_build_graph)

    s = model_cmd("evolve", "fidelity time series")
    s.add_argument("--state", default="neel")
    s.add_argument("--tmax", type=float, required=True)
    s.add_argument("--points", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_evolve)

    s = model_cmd("scan", "first revival from every basis state")
    s.add_argument("--tmax", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scan)

    s = model_cmd("fsa", "forward scattering approximation from a root state")
    s.add_argument("--state", default="neel")
    s.add_argument("--out")
    s.set_defaults(func=cmd_fsa)

    s = sub.add_parser("chain", help="tight-binding chain dynamics")
    s.add_argument("--kind", required=True, choices=("hypercube", "2hc", "star", "star-sym", "bridged"))
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--bridges", type=int, default=0)
    s.add_argument("--tmax", type=float, required=True)
    s.add_argument("--points", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_chain)

    s = sub.add_parser("chain-scaling", help="two-cube revival with large-N extrapolation")
    s.add_argument("--dims", type=int, nargs="+", help="cube dimensions (default 32..2048)")
    s.add_argument("--form", choices=FIT_FORMS, default="poly")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_chain_scaling)

    s = model_cmd("spectrum", "sector-resolved exact diagonalisation")
    s.add_argument("--sector", action="append", help="k=<int>[,inv=+1|-1]; repeatable")
    s.add_argument("--target", help="state for the overlap profile")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("sample", help="random-bridge daisy-cube sampler")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seeds", type=int, default=10, help="number of runs")
    s.add_argument("--seed", type=int, default=0, help="first seed")
    s.add_argument("--seed-graph", choices=("2hc", "star3", "star4"), default="2hc")
    s.add_argument("--sigma-e", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("repro", help="regenerate the data behind a figure")
    s.add_argument("tag")
    s.add_argument("--quick", action="store_true", help="reduced sizes")
    s.add_argument("--strict", action="store_true", help="exit 1 if any check fails")
    s.add_argument("--out")
    s.set_defaults(func=cmd_repro)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        code = args.func(args)
    except ResourceLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ContractViolation as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (InvalidArgument, UnsupportedModel, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
