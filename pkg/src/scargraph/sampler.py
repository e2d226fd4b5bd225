"""Random translation-invariant daisy cubes grown from glued hypercubes.

Starting from the orbit of the Neel state (two ``N/2``-cubes sharing the
empty configuration), the sampler repeatedly draws a uniformly random
configuration ``u`` of ``m`` excitations that is not contained in a seed
corner. If ``u`` is already a vertex, ``m`` advances; otherwise the whole
translation orbit of ``u`` is added as maximal vertices and the graph is
replaced by its downward closure. The run ends once ``m`` exceeds ``N``, at
which point the graph is the full hypercube.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .basis import Basis, ConstraintSpec, rotate, to_bitstring, z_state
from .dynamics import KrylovPropagator, find_revival, fidelity_density
from .exceptions import ContractViolation, InvalidArgument
from .fsa import fsa_chain, subspace_variance
from .graph import build_adjacency

SAMPLER_HORIZON = 4 * math.pi
SEED_GRAPHS = {"2hc": 1, "star3": 2, "star4": 3}
METADATA = {
    "candidate_distribution": "uniform over weight-m strings, rejecting strings below a seed corner",
    "m_advance": "m advances once per draw that lands inside the current graph",
}


@dataclass
class SampleRecord:
    step: int
    m: int
    lam: float
    size: int
    f0: float
    T: float
    sigma_e: float | None
    seed: int
    added: str | None
    fsa_length: int
    density: float = field(default=float("nan"))

    def to_dict(self) -> dict:
        return asdict(self)


def orbit(word: int, n_sites: int) -> np.ndarray:
    return np.unique(np.array([rotate(word, r, n_sites) for r in range(n_sites)], dtype=np.int64))


def subsets(word: int, n_sites: int) -> np.ndarray:
    pos = [i for i in range(n_sites) if (word >> i) & 1]
    counter = np.arange(1 << len(pos), dtype=np.int64)
    out = np.zeros_like(counter)
    for j, p in enumerate(pos):
        out |= ((counter >> j) & 1) << p
    return out


def seed_corners(n_sites: int, seed_graph: str = "2hc") -> np.ndarray:
    if seed_graph not in SEED_GRAPHS:
        raise InvalidArgument(f"seed graph must be one of {sorted(SEED_GRAPHS)}")
    d = SEED_GRAPHS[seed_graph]
    if n_sites % (d + 1):
        raise InvalidArgument(f"{seed_graph} needs N divisible by {d + 1}")
    return orbit(z_state(n_sites, d + 1).bits, n_sites)


def seed_dimension(n_sites: int, seed_graph: str = "2hc") -> int:
    d = SEED_GRAPHS[seed_graph]
    return (d + 1) * (2 ** (n_sites // (d + 1)) - 1) + 1


def lambda_of(size: int, n_sites: int, seed_graph: str = "2hc") -> float:
    """Bridge density relative to the seed graph (``0``) and the full cube (``1``)."""
    low = seed_dimension(n_sites, seed_graph)
    if not low <= size <= 2 ** n_sites:
        raise InvalidArgument("graph size outside the seed/full-cube range")
    return (math.log(size) - math.log(low)) / (n_sites * math.log(2) - math.log(low))


@dataclass
class DaisyGraph:
    """Mutable sampler state: maximal vertices and their downward closure."""

    n_sites: int
    maximal: set
    states: np.ndarray

    @classmethod
    def from_maximal(cls, words, n_sites: int) -> "DaisyGraph":
        states = np.unique(np.concatenate([subsets(int(w), n_sites) for w in words]))
        g = cls(n_sites, set(), states)
        g.maximal = {int(w) for w in words}
        g._prune()
        return g

    def contains(self, word: int) -> bool:
        i = np.searchsorted(self.states, word)
        return i < len(self.states) and self.states[i] == word

    def _prune(self):
        self.maximal = {w for w in self.maximal
                        if not any(v != w and (w & ~v) == 0 for v in self.maximal)}

    def basis(self) -> Basis:
        spec = ConstraintSpec.custom(sorted(self.maximal), self.n_sites)
        return Basis(spec, self.n_sites, self.states)


def add_orbit_closure(graph: DaisyGraph, u: int) -> bool:
    """Add the translation orbit of ``u`` and close downwards.

    Returns False (and leaves the graph unchanged) if ``u`` is already a vertex.
    """
    if graph.contains(u):
        return False
    n = graph.n_sites
    new = orbit(u, n)
    extra = np.concatenate([subsets(int(w), n) for w in new])
    graph.states = np.union1d(graph.states, extra)
    graph.maximal |= {int(w) for w in new}
    graph._prune()
    return True


def check_daisy(graph: DaisyGraph) -> None:
    st = graph.states
    n = graph.n_sites
    if not np.array_equal(np.sort(rotate(st, 1, n)), st):
        raise ContractViolation("sampled graph is not translation invariant")
    for i in range(n):
        has = ((st >> i) & 1) == 1
        down = st[has] & ~(1 << i)
        if not np.all(np.isin(down, st)):
            raise ContractViolation("sampled graph is not downward closed")


def draw_candidate(rng: np.random.Generator, n_sites: int, m: int, corners) -> int:
    """Uniform weight-``m`` word not dominated by any seed corner."""
    for _ in range(100_000):
        pos = rng.choice(n_sites, size=m, replace=False)
        u = int(np.sum(np.left_shift(1, pos.astype(np.int64))))
        if all(u & ~int(c) for c in corners):
            return u
    raise ContractViolation(f"no admissible candidate found at m={m}")


def diagnostics(graph: DaisyGraph, root: int, sigma_e: bool, horizon: float = SAMPLER_HORIZON):
    basis = graph.basis()
    h = build_adjacency(basis)
    psi = np.zeros(basis.dim)
    psi[basis.index(root)] = 1.0
    series = find_revival(h, psi, horizon=horizon, propagator=KrylovPropagator(h))
    rev = series.revival
    chain = fsa_chain(h, basis, basis.config(basis.index(root)))
    sig = subspace_variance(h, chain) if sigma_e else None
    return rev.f0, rev.T, sig, chain.length


def run_bridge_sampler(n_sites: int, seed: int, sigma_e: bool = False,
                       seed_graph: str = "2hc", horizon: float = SAMPLER_HORIZON,
                       diagnostics_on: bool = True) -> list:
    """One realisation of the random-bridge growth process.

    Parameters
    ----------
    n_sites : int
        Even chain length (at most 16).
    seed : int
        Seed for the counter-based Philox generator.
    sigma_e : bool
        Also record the FSA subspace variance at every step.
    seed_graph : {"2hc", "star3", "star4"}
        Starting corners: the Neel orbit, or the orbits of the period-3 or
        period-4 density waves.
    """
    if n_sites % 2 or n_sites < 4:
        raise InvalidArgument("the sampler needs an even N >= 4")
    if n_sites > 16:
        raise InvalidArgument("the sampler is limited to N <= 16")
    rng = np.random.Generator(np.random.Philox(seed))
    corners = seed_corners(n_sites, seed_graph)
    root = int(z_state(n_sites, SEED_GRAPHS[seed_graph] + 1).bits)
    graph = DaisyGraph.from_maximal(corners, n_sites)
    records = []

    def record(step, m, added):
        check_daisy(graph)
        size = len(graph.states)
        lam = lambda_of(size, n_sites, seed_graph)
        if diagnostics_on:
            f0, T, sig, length = diagnostics(graph, root, sigma_e, horizon)
        else:
            f0, T, sig, length = float("nan"), float("nan"), None, -1
        if seed_graph == "2hc" and diagnostics_on and length != n_sites:
            raise ContractViolation(f"FSA length {length} != N at step {step}")
        dens = fidelity_density(f0, n_sites) if f0 == f0 else float("nan")
        records.append(SampleRecord(step, m, lam, size, f0, T, sig, seed,
                                    None if added is None else to_bitstring(added, n_sites),
                                    length, dens))

    record(0, 2, None)
    m, step = 2, 0
    while m <= n_sites:
        u = draw_candidate(rng, n_sites, m, corners)
        if graph.contains(u):
            m += 1
            continue
        add_orbit_closure(graph, u)
        step += 1
        record(step, m, u)
    if len(graph.states) != 2 ** n_sites:
        raise ContractViolation("sampler terminated before reaching the full hypercube")
    return records


def run_many(n_sites: int, seeds, threads: int = 1, **kw) -> list:
    def one(s):
        return run_bridge_sampler(n_sites, int(s), **kw)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, seeds))
    return [one(s) for s in seeds]


@dataclass
class BinStats:
    lo: float
    hi: float
    count: int
    density_mean: float
    density_std: float
    T_mean: float
    T_std: float
    f0_mean: float
    f0_std: float

    def contains(self, lam: float) -> bool:
        return self.lo < lam <= self.hi


@dataclass
class EnsembleStats:
    zero: BinStats
    bins: list
    n_runs: int
    markers: dict = field(default_factory=dict)

    def bin_for(self, lam: float):
        if lam == 0:
            return self.zero
        for b in self.bins:
            if b.contains(lam):
                return b
        return None

    def first_nonzero_bin(self):
        for b in self.bins:
            if b.count:
                return b
        return None


def _spread(x):
    # shifting by a sample keeps identical values at exactly zero spread
    x = x[~np.isnan(x)]
    return float(np.std(x - x[0])) if len(x) else float("nan")


def _stats(lo, hi, recs):
    if not recs:
        nan = float("nan")
        return BinStats(lo, hi, 0, nan, nan, nan, nan, nan, nan)
    d = np.array([r.density for r in recs])
    t = np.array([r.T for r in recs])
    f = np.array([r.f0 for r in recs])
    return BinStats(lo, hi, len(recs), float(np.nanmean(d)), _spread(d),
                    float(np.nanmean(t)), _spread(t), float(np.nanmean(f)), _spread(f))


def ensemble_statistics(runs, n_bins: int = 10, min_runs: int = 10, markers=None) -> EnsembleStats:
    """Per-bin mean and spread of fidelity density and period.

    The ``lambda = 0`` seed graph forms its own bin; the rest of ``(0, 1]`` is
    split into ``n_bins`` equal bins. ``markers`` maps a model name to its
    ``(lambda, f0, T)`` for placement against the ensemble.
    """
    if len(runs) < min_runs:
        raise InvalidArgument(f"need at least {min_runs} runs, got {len(runs)}")
    recs = [r for run in runs for r in run]
    zero = _stats(0.0, 0.0, [r for r in recs if r.lam == 0])
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    bins = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = [r for r in recs if lo < r.lam <= hi]
        if not sel:
            warnings.warn(f"empty lambda bin ({lo:.2f}, {hi:.2f}]", stacklevel=2)
        bins.append(_stats(float(lo), float(hi), sel))
    return EnsembleStats(zero, bins, len(runs), dict(markers or {}))


def sigma_f0_correlation(runs) -> float:
    """Spearman rank correlation between subspace variance and revival fidelity."""
    recs = [r for run in runs for r in run if r.sigma_e is not None and r.f0 == r.f0]
    if len(recs) < 3:
        raise InvalidArgument("not enough records with subspace variance")
    rho = spearmanr([r.sigma_e for r in recs], [r.f0 for r in recs]).statistic
    return float(rho)


def model_marker(spec: ConstraintSpec, n_sites: int, horizon: float = SAMPLER_HORIZON) -> dict:
    """``lambda``, ``f0``, ``T`` and fidelity density of a built-in model from the Neel state."""
    from .basis import enumerate_basis, neel

    basis = enumerate_basis(spec, n_sites)
    h = build_adjacency(basis)
    rev = find_revival(h, basis.basis_vector(neel(n_sites)), horizon=horizon).revival
    lam = lambda_of(basis.dim, n_sites)
    return {"lam": lam, "f0": rev.f0, "T": rev.T, "density": fidelity_density(rev.f0, n_sites),
            "size": basis.dim}
