"""Tight-binding chains that reproduce hypercube-type graphs exactly.

A chain with couplings ``beta_1 .. beta_L`` has ``L + 1`` sites; its
Hamiltonian is the symmetric tridiagonal matrix with zero diagonal. The
``n``-cube seen from a corner is ``beta_j = sqrt(j (n - j + 1))``.

Return amplitudes from a chain site ``s`` are evaluated spectrally,
``A(t) = sum_m w_m exp(-i E_m t)``, with ``w_m = |<s|E_m>|^2`` obtained from
eigenvalues alone: ``w_m`` is the residue of the resolvent diagonal,
``prod_j (E_m - mu_j) / prod_{l != m} (E_m - E_l)``, where ``mu`` are the
eigenvalues of the chain with site ``s`` removed. Evaluated in log space this
is stable for chains of several thousand sites, where eigenvector solvers are
slow or fail to converge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar
from scipy.special import jv

from .dynamics import (
    DEFAULT_HORIZON,
    FidelitySeries,
    Revival,
    detect_first_revival,
    detect_reflection_peak,
    time_grid,
)
from .exceptions import InvalidArgument

CHEBYSHEV_THRESHOLD = 10_000
MAX_CHAIN_SITES = 200_001


@dataclass(frozen=True, eq=False)
class TbChain:
    """Zero-diagonal tight-binding chain.

    Attributes
    ----------
    betas : ndarray
        Positive nearest-neighbour couplings.
    tag : str
        Which construction produced the chain.
    """

    betas: np.ndarray
    tag: str = "custom"

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=float)
        if b.ndim != 1 or len(b) < 1:
            raise InvalidArgument("a chain needs at least one coupling")
        if np.any(b <= 0):
            raise InvalidArgument("couplings must be positive")
        if len(b) + 1 > MAX_CHAIN_SITES:
            raise InvalidArgument(f"chain longer than {MAX_CHAIN_SITES} sites")
        b.setflags(write=False)
        object.__setattr__(self, "betas", b)

    @property
    def length(self) -> int:
        return len(self.betas)

    @property
    def n_sites(self) -> int:
        return len(self.betas) + 1

    def matrix(self) -> np.ndarray:
        return np.diag(self.betas, 1) + np.diag(self.betas, -1)

    def spectrum(self) -> np.ndarray:
        return sla.eigvalsh_tridiagonal(np.zeros(self.n_sites), self.betas,
                                        lapack_driver="stebz")

    def reversed(self) -> "TbChain":
        return TbChain(self.betas[::-1].copy(), self.tag + ":reversed")

    def is_palindromic(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.betas, self.betas[::-1], atol=tol, rtol=0))


def hypercube_couplings(n: int) -> np.ndarray:
    if n < 1:
        raise InvalidArgument("cube dimension must be >= 1")
    j = np.arange(1, n + 1, dtype=float)
    return np.sqrt(j * (n - j + 1))


def hypercube_chain(n: int) -> TbChain:
    return TbChain(hypercube_couplings(n), f"hypercube:{n}")


def two_hypercube_chain(n: int) -> TbChain:
    """Two ``n``-cubes glued at a corner and seen from the opposite corner (``N = 2n`` spins)."""
    b = hypercube_couplings(n)
    return TbChain(np.concatenate([b, b[::-1]]), f"2hc:{n}")


def star_sector_chains(n: int, d: int) -> tuple[TbChain, TbChain]:
    """Symmetric and non-symmetric sectors of ``d + 1`` ``n``-cubes sharing a corner.

    The symmetric chain has ``n + 1`` sites and its last coupling scaled by
    ``sqrt(d + 1)``; the ``d`` degenerate non-symmetric chains stop one site
    short of the shared vertex.
    """
    if d < 1:
        raise InvalidArgument("d must be >= 1")
    b = hypercube_couplings(n)
    sym = b.copy()
    sym[-1] *= math.sqrt(d + 1)
    symmetric = TbChain(sym, f"star-sym:{n}:{d}")
    if n == 1:
        return symmetric, None
    return symmetric, TbChain(b[:-1].copy(), f"star-anti:{n}:{d}")


def _check_bridges(n: int, bridges: int):
    if n % 2:
        raise InvalidArgument("the bridged construction needs an even cube dimension")
    if bridges % 2 or not 0 <= bridges <= n:
        raise InvalidArgument("bridges must be even and in [0, n]")


def bridged_middle_chain(n: int, bridges: int) -> TbChain:
    """Two-cube chain with both middle couplings set to ``sqrt(n + bridges)``."""
    _check_bridges(n, bridges)
    b = hypercube_couplings(n)
    m = math.sqrt(n + bridges)
    return TbChain(np.concatenate([b[:-1], [m, m], b[:-1][::-1]]), f"bridged:{n}:{bridges}")


def star_symmetric_chain(n: int, d: int, bridges: int = 0) -> TbChain:
    """Symmetric sector of the star with the shared-vertex coupling ``sqrt((d+1)(n+bridges))``."""
    if bridges:
        _check_bridges(n, bridges)
    b = hypercube_couplings(n)
    b[-1] = math.sqrt((d + 1) * (n + bridges))
    return TbChain(b, f"star-sym:{n}:{d}:{bridges}")


def _log_abs_sum(x, y, chunk=512):
    """``sum_j log|x_i - y_j|`` for every ``i``."""
    out = np.empty(len(x))
    for s in range(0, len(x), chunk):
        d = np.abs(x[s:s + chunk, None] - y[None, :])
        out[s:s + chunk] = np.log(d).sum(axis=1)
    return out


def spectral_weights(chain: TbChain, start_site: int = 0):
    """Energies and weights ``|<start|E_m>|^2`` of a chain site."""
    n = chain.n_sites
    if not 0 <= start_site < n:
        raise InvalidArgument(f"start site must be in [0, {n})")
    if 0 < start_site < n - 1 and n <= 2000:
        energies, vecs = np.linalg.eigh(chain.matrix())
        return energies, vecs[start_site] ** 2
    energies = chain.spectrum()
    b = chain.betas
    parts = []
    if start_site > 0:
        left = b[: start_site - 1]
        parts.append(sla.eigvalsh_tridiagonal(np.zeros(start_site), left, lapack_driver="stebz")
                     if start_site > 1 else np.zeros(1))
    if start_site < n - 1:
        right = b[start_site + 1:]
        m = n - start_site - 1
        parts.append(sla.eigvalsh_tridiagonal(np.zeros(m), right, lapack_driver="stebz")
                     if m > 1 else np.zeros(1))
    mu = np.concatenate(parts) if parts else np.zeros(0)
    with np.errstate(divide="ignore"):
        num = _log_abs_sum(energies, mu)
        den = np.empty(n)
        for s in range(0, n, 512):
            d = np.abs(energies[s:s + 512, None] - energies[None, :])
            d[d == 0] = 1.0
            den[s:s + 512] = np.log(d).sum(axis=1)
    w = np.exp(num - den)
    return energies, w


def _chebyshev_amplitudes(chain: TbChain, start_site: int, times: np.ndarray) -> np.ndarray:
    """Matrix-free Chebyshev stepping of ``exp(-i H dt)`` between consecutive times."""
    b = chain.betas
    n = chain.n_sites
    gersh = np.zeros(n)
    gersh[:-1] += b
    gersh[1:] += b
    scale = float(gersh.max()) * 1.01

    def apply(v):
        out = np.zeros_like(v)
        out[:-1] += b * v[1:]
        out[1:] += b * v[:-1]
        return out / scale

    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise InvalidArgument("times must be sorted and non-negative")
    psi = np.zeros(n, dtype=complex)
    psi[start_site] = 1.0
    amps = np.empty(len(times), dtype=complex)
    t_prev = 0.0
    for i, t in enumerate(times):
        dt = t - t_prev
        if dt > 0:
            x = scale * dt
            k_max = int(x + 10 * x ** (1 / 3) + 30)
            coef = jv(np.arange(k_max + 1), x)
            v0, v1 = psi, apply(psi)
            acc = coef[0] * v0 + 2 * (-1j) * coef[1] * v1
            for k in range(2, k_max + 1):
                v0, v1 = v1, 2 * apply(v1) - v0
                acc = acc + 2 * (-1j) ** k * coef[k] * v1
            psi = acc
            t_prev = t
        amps[i] = psi[start_site]
    return amps


@dataclass
class ChainPropagator:
    """Return-amplitude evaluator for one chain site."""

    chain: TbChain
    start_site: int = 0
    method: str = "auto"
    energies: np.ndarray | None = field(default=None, repr=False)
    weights: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.method == "auto":
            self.method = "spectral" if self.chain.n_sites <= CHEBYSHEV_THRESHOLD else "chebyshev"
        if self.method == "spectral":
            self.energies, self.weights = spectral_weights(self.chain, self.start_site)
        elif self.method != "chebyshev":
            raise InvalidArgument(f"unknown chain method {self.method!r}")

    def amplitudes(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.method == "chebyshev":
            return _chebyshev_amplitudes(self.chain, self.start_site, times)
        out = np.empty(len(times), dtype=complex)
        for s in range(0, len(times), 1024):
            out[s:s + 1024] = np.exp(-1j * np.outer(times[s:s + 1024], self.energies)) @ self.weights
        return out


def evolve_chain(chain: TbChain, start_site: int, times, method: str = "auto") -> FidelitySeries:
    """Return probability of a particle started on ``start_site``."""
    prop = ChainPropagator(chain, start_site, method)
    amp = prop.amplitudes(times)
    series = FidelitySeries(np.asarray(times, dtype=float), np.abs(amp) ** 2, amp,
                            meta={"method": prop.method, "chain": chain.tag})
    series.revival = detect_first_revival(series)
    return series


def chain_revival(chain: TbChain, start_site: int = 0, horizon: float = DEFAULT_HORIZON,
                  max_horizon: float = 24 * math.pi, reflection: bool = False,
                  method: str = "auto", n_points: int | None = None) -> FidelitySeries:
    """Grid detection of the first revival, polished by bounded maximisation."""
    prop = ChainPropagator(chain, start_site, method)
    tmax = horizon
    while True:
        times = time_grid(tmax, n_points)
        amp = prop.amplitudes(times)
        series = FidelitySeries(times, np.abs(amp) ** 2, amp,
                                meta={"method": prop.method, "chain": chain.tag})
        rev = detect_first_revival(series)
        if (rev and rev.T < 0.95 * tmax) or tmax * 2 > max_horizon + 1e-12:
            break
        tmax *= 2
    if rev and prop.method == "spectral":
        dt = times[1] - times[0]
        lo = max(rev.T - dt, 1e-12)
        res = minimize_scalar(lambda x: -abs(prop.amplitudes(x)[0]) ** 2,
                              bounds=(lo, rev.T + dt), method="bounded",
                              options={"xatol": 1e-10})
        rev = Revival(float(min(-res.fun, 1.0)), float(res.x))
    series.revival = rev
    if reflection and rev:
        series.reflection = detect_reflection_peak(series, rev.T)
    series.meta["horizon"] = tmax
    return series


def sector_return_amplitude(n: int, d: int, times) -> np.ndarray:
    """Full star amplitude from a corner, ``(A_sym + d A_anti) / (d + 1)``."""
    sym, anti = star_sector_chains(n, d)
    a_sym = ChainPropagator(sym).amplitudes(times)
    a_anti = ChainPropagator(anti).amplitudes(times) if anti is not None else 0.0
    return (a_sym + d * a_anti) / (d + 1)


def star_symmetric_scan(d: int, bridges: int, n: int, times=None) -> FidelitySeries:
    """Corner fidelity of the symmetric-sector star chain with a modified shared coupling."""
    chain = star_symmetric_chain(n, d, bridges)
    if times is None:
        return chain_revival(chain)
    return evolve_chain(chain, 0, times)


@dataclass
class BridgeRecord:
    bridges: int
    f0: float
    T: float
    T_sym: float
    T_anti: float

    @property
    def period_gap(self) -> float:
        return abs(self.T_sym - self.T_anti)


def bridged_sweep(n: int, bridges=None) -> list:
    """Full-chain revival and sector periods for a range of bridge counts.

    Sector periods are the first revivals of the symmetric and antisymmetric
    sector chains on their own (both near ``pi``).
    """
    if bridges is None:
        bridges = range(0, n + 1, 2)
    b = hypercube_couplings(n)
    anti = TbChain(b[:-1].copy(), f"bridged-anti:{n}")
    t_anti = chain_revival(anti).revival.T
    out = []
    for k in bridges:
        full = chain_revival(bridged_middle_chain(n, k)).revival
        sym = TbChain(np.concatenate([b[:-1], [math.sqrt(2 * (n + k))]]), f"bridged-sym:{n}:{k}")
        t_sym = chain_revival(sym).revival.T
        out.append(BridgeRecord(int(k), full.f0, full.T, t_sym, t_anti))
    return out


# ---------------------------------------------------------------------------
# finite-size extrapolation

FIT_FORMS = ("poly", "sqrt", "auto")


@dataclass
class ScalingFit:
    """Least-squares extrapolation ``value(N) -> asymptote``.

    ``form`` is ``poly`` (``a + b/N + c/N^2``), ``sqrt``
    (``a + b N^-1/2 + c/N``) or ``auto`` (``a + b N^-p + c N^-2p`` with ``p``
    estimated from ratios of successive differences).
    """

    sizes: np.ndarray
    values: np.ndarray
    asymptote: float
    error: float
    coefficients: np.ndarray
    form: str
    exponent: float
    meta: dict = field(default_factory=dict)

    def predict(self, sizes) -> np.ndarray:
        x = np.asarray(sizes, dtype=float)
        return _design(x, self.exponent) @ self.coefficients


def _design(x, p):
    return np.column_stack([np.ones_like(x), x ** -p, x ** (-2 * p)])


def _lstsq(x, y, p):
    a = _design(x, p)
    if np.linalg.matrix_rank(a) < a.shape[1]:
        raise InvalidArgument("degenerate design matrix")
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    return coef, y - a @ coef


def estimate_exponent(x, y) -> float:
    """Leading correction exponent ``p`` in ``y ~ a + b N^-p``.

    For consecutive triples the ratio of successive differences behaves as
    ``(N_{i+1}/N_i)^-p``; the median over triples is returned, or 1 when the
    differences change sign.
    """
    dy = np.diff(y)
    ratios = dy[1:] / dy[:-1]
    if len(ratios) == 0 or np.any(ratios <= 0):
        return 1.0
    q = x[1:-1] / x[:-2]
    return float(np.median(-np.log(ratios) / np.log(q)))


def extrapolate_scaling(points, form: str = "poly", n_boot: int = 400, seed: int = 0) -> ScalingFit:
    """Fit ``value(N)`` and extrapolate to ``N -> inf``.

    Parameters
    ----------
    points : sequence of (N, value)
        At least four points with increasing ``N``.
    form : {"poly", "sqrt", "auto"}
    n_boot : int
        Residual-bootstrap resamples for the asymptote error.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 4:
        raise InvalidArgument("need at least four (N, value) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.any(np.diff(x) <= 0):
        raise InvalidArgument("sizes must be strictly increasing")
    if form == "poly":
        p = 1.0
    elif form == "sqrt":
        p = 0.5
    elif form == "auto":
        p = estimate_exponent(x, y) if np.ptp(y) > 0 else 1.0
    else:
        raise InvalidArgument(f"unknown fit form {form!r}")
    coef, resid = _lstsq(x, y, p)
    fitted = y - resid
    rng = np.random.Generator(np.random.Philox(seed))
    boot = np.empty(n_boot)
    for i in range(n_boot):
        yb = fitted + rng.choice(resid, size=len(resid), replace=True)
        boot[i] = _lstsq(x, yb, p)[0][0]
    err = float(np.std(boot)) if n_boot > 1 else 0.0
    return ScalingFit(x, y, float(coef[0]), err, coef, form, p,
                      {"n_boot": n_boot, "seed": seed, "rms_residual": float(np.sqrt(np.mean(resid ** 2)))})


def two_hypercube_scaling(cube_dims=None, reflection: bool = True) -> list:
    """Revival data ``(N, f0, T, f_refl, t_refl)`` of the two-cube chain for each cube dimension."""
    if cube_dims is None:
        cube_dims = [2 ** k for k in range(5, 12)]
    out = []
    for n in cube_dims:
        s = chain_revival(two_hypercube_chain(n), reflection=reflection)
        refl = s.reflection or (float("nan"), float("nan"))
        out.append((2 * n, s.revival.f0, s.revival.T, refl[0], refl[1]))
    return out
