"""Unitary time evolution, fidelity series and revival detection.

Two propagators are provided. :class:`DensePropagator` diagonalises ``H``
once; :class:`KrylovPropagator` runs Lanczos on the current state and reuses
one Krylov basis for as many grid times as its a-posteriori error estimate
allows, restarting from the propagated state when it does not.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize_scalar

from .basis import Basis, to_bitstring
from .exceptions import InvalidArgument

DENSE_LIMIT = 4000
KRYLOV_TOL = 1e-10
DEFAULT_HORIZON = 3 * math.pi
MAX_HORIZON = 24 * math.pi
POINTS_PER_WINDOW = 2000
DIP = 0.5
SIGNIFICANCE = 0.5


@dataclass(frozen=True)
class Revival:
    """First revival ``(f0, T)``; ``found`` is False for the no-revival result."""

    f0: float
    T: float
    found: bool = True

    @classmethod
    def none(cls) -> "Revival":
        return cls(float("nan"), float("nan"), False)

    def __bool__(self) -> bool:
        return self.found


@dataclass
class FidelitySeries:
    """Return probability ``|<psi0|psi(t)>|^2`` on a uniform grid.

    Attributes
    ----------
    times, fidelity : ndarray
    amplitude : ndarray or None
        Complex return amplitude, when the producer computed it.
    revival : Revival or None
        First-revival annotation, filled by :func:`annotate`.
    reflection : tuple or None
        ``(f, t)`` of the reflection peak, when requested.
    """

    times: np.ndarray
    fidelity: np.ndarray
    amplitude: np.ndarray | None = None
    revival: Revival | None = None
    reflection: tuple | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.fidelity = np.asarray(self.fidelity, dtype=float)
        if self.times.shape != self.fidelity.shape:
            raise InvalidArgument("times and fidelity differ in length")


def time_grid(tmax: float, n_points: int | None = None) -> np.ndarray:
    if tmax <= 0:
        raise InvalidArgument("tmax must be positive")
    if n_points is None:
        n_points = max(int(round(POINTS_PER_WINDOW * tmax / DEFAULT_HORIZON)), 16) + 1
    return np.linspace(0.0, tmax, n_points)


def _check_state(psi0, dim):
    psi0 = np.asarray(psi0)
    if psi0.shape != (dim,):
        raise InvalidArgument(f"state has shape {psi0.shape}, expected ({dim},)")
    nrm = np.linalg.norm(psi0)
    if abs(nrm - 1) > 1e-9:
        raise InvalidArgument(f"initial state is not normalised (norm {nrm})")
    return psi0


class DensePropagator:
    """Exact propagation through a full eigendecomposition of ``H``."""

    method = "dense"

    def __init__(self, h):
        mat = h.toarray() if sp.issparse(h) else np.asarray(h)
        self.energies, self.vectors = np.linalg.eigh(mat)
        self.dim = mat.shape[0]

    def spectral_weights(self, psi0) -> np.ndarray:
        return np.abs(self.vectors.conj().T @ psi0) ** 2

    def amplitudes(self, psi0, times) -> np.ndarray:
        c = self.vectors.conj().T @ psi0
        w = np.abs(c) ** 2
        return np.exp(-1j * np.outer(times, self.energies)) @ w

    def states(self, psi0, times) -> np.ndarray:
        c = self.vectors.conj().T @ psi0
        phases = np.exp(-1j * np.outer(self.energies, times))
        return self.vectors @ (c[:, None] * phases)

    def local_amplitude(self, psi0, t0: float, span: float):
        return lambda t: self.amplitudes(psi0, np.array([t]))[0]


def _lanczos(h, v0, m_max, breakdown=1e-13):
    """Lanczos with full reorthogonalisation.

    Returns the basis (columns), diagonal ``a``, off-diagonal ``b`` and the
    residual coupling ``beta_next`` (0 on invariant-subspace breakdown).
    """
    n = len(v0)
    q = np.zeros((n, m_max), dtype=complex)
    a = np.zeros(m_max)
    b = np.zeros(max(m_max - 1, 0))
    q[:, 0] = v0 / np.linalg.norm(v0)
    scale = 0.0
    for j in range(m_max):
        w = h @ q[:, j]
        a[j] = np.vdot(q[:, j], w).real
        w = w - a[j] * q[:, j]
        if j:
            w -= b[j - 1] * q[:, j - 1]
        basis = q[:, : j + 1]
        w -= basis @ (basis.conj().T @ w)
        w -= basis @ (basis.conj().T @ w)
        beta = np.linalg.norm(w)
        scale = max(scale, abs(a[j]), beta)
        if beta <= breakdown * max(scale, 1.0):
            return q[:, : j + 1], a[: j + 1], b[:j], 0.0
        if j + 1 == m_max:
            return q, a, b, beta
        b[j] = beta
        q[:, j + 1] = w / beta
    return q, a, b, 0.0


class _KrylovBlock:
    def __init__(self, h, phi, m_max):
        self.q, a, b, self.beta_next = _lanczos(h, phi, m_max)
        m = len(a)
        if m == 1:
            self.evals, self.evecs = a.copy(), np.ones((1, 1))
        else:
            # small and often zero-diagonal (bipartite graphs), where stemr can fail
            self.evals, self.evecs = np.linalg.eigh(np.diag(a) + np.diag(b, 1) + np.diag(b, -1))
        self.first = self.evecs[0, :].copy()

    def coeffs(self, tau):
        tau = np.atleast_1d(tau)
        ph = np.exp(-1j * np.outer(self.evals, tau))
        return self.evecs @ (self.first[:, None] * ph)

    def error(self, tau):
        if self.beta_next == 0.0:
            return np.zeros(np.atleast_1d(tau).shape)
        return self.beta_next * np.abs(self.coeffs(tau)[-1, :])


class KrylovPropagator:
    """Restarted Lanczos propagator with a per-step error bound.

    Parameters
    ----------
    h : sparse matrix
        Real-symmetric or Hermitian Hamiltonian.
    m_max : int
        Krylov dimension per restart.
    tol : float
        Bound on ``beta_{m+1} |e_m^T exp(-i T tau) e_1|`` accepted per block.
    """

    method = "krylov"

    def __init__(self, h, m_max: int = 40, tol: float = KRYLOV_TOL):
        self.h = h.tocsr() if sp.issparse(h) else sp.csr_matrix(h)
        self.dim = self.h.shape[0]
        self.m_max = min(m_max, self.dim)
        self.tol = tol
        self.restarts = 0

    def _run(self, psi0, times, want_states):
        times = np.asarray(times, dtype=float)
        if np.any(np.diff(times) < 0) or times[0] < 0:
            raise InvalidArgument("times must be sorted and non-negative")
        amps = np.zeros(len(times), dtype=complex)
        states = np.zeros((self.dim, len(times)), dtype=complex) if want_states else None
        phi = psi0.astype(complex)
        t_cur = 0.0
        i = 0
        while i < len(times) and times[i] == 0.0:
            amps[i] = np.vdot(psi0, phi)
            if want_states:
                states[:, i] = phi
            i += 1
        while i < len(times):
            block = _KrylovBlock(self.h, phi, self.m_max)
            self.restarts += 1
            overlap = block.q.conj().T @ psi0
            taus = times[i:] - t_cur
            err = block.error(taus)
            ok = np.flatnonzero(err > self.tol)
            n_ok = ok[0] if len(ok) else len(taus)
            if n_ok:
                c = block.coeffs(taus[:n_ok])
                amps[i:i + n_ok] = overlap.conj() @ c
                if want_states:
                    states[:, i:i + n_ok] = block.q @ c
                t_last = taus[n_ok - 1]
                i += n_ok
                if i == len(times):
                    break
                if n_ok > 1 or err[n_ok] <= 10 * self.tol:
                    phi = block.q @ block.coeffs(t_last)[:, 0]
                    t_cur += t_last
                    continue
                tau_hi = taus[n_ok]
            else:
                tau_hi = taus[0]
            # substep: largest tau in (0, tau_hi) within tolerance
            lo, hi = 0.0, tau_hi
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if block.error(mid)[0] <= self.tol:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < 1e-6 * tau_hi:
                    break
            if lo == 0.0:
                raise InvalidArgument("Krylov step size collapsed; raise m_max")
            phi = block.q @ block.coeffs(lo)[:, 0]
            t_cur += lo
        return amps, states

    def amplitudes(self, psi0, times) -> np.ndarray:
        return self._run(np.asarray(psi0, dtype=complex), times, False)[0]

    def states(self, psi0, times) -> np.ndarray:
        return self._run(np.asarray(psi0, dtype=complex), times, True)[1]

    def local_amplitude(self, psi0, t0: float, span: float):
        """Return amplitude on ``[t0, t0 + span]`` from a single Krylov block."""
        psi0 = np.asarray(psi0, dtype=complex)
        phi = self.states(psi0, np.array([t0]))[:, 0]
        block = _KrylovBlock(self.h, phi, self.m_max)
        if block.error(span)[0] > self.tol:
            return lambda t: self.amplitudes(psi0, np.array([t]))[0]
        overlap = block.q.conj().T @ psi0
        return lambda t: (overlap.conj() @ block.coeffs(t - t0))[0]


def make_propagator(h, method: str = "auto", **kw):
    if method == "auto":
        method = "dense" if h.shape[0] <= DENSE_LIMIT else "krylov"
    if method == "dense":
        return DensePropagator(h)
    if method == "krylov":
        return KrylovPropagator(h, **kw)
    raise InvalidArgument(f"unknown propagation method {method!r}")


def evolve(h, psi0, times, *, method: str = "auto", propagator=None,
           annotate_revival: bool = True) -> FidelitySeries:
    """Fidelity series of ``psi0`` under ``exp(-i H t)``.

    Parameters
    ----------
    h : sparse or dense matrix
    psi0 : ndarray
        Normalised initial state.
    times : array_like
        Sorted, non-negative sample times.
    method : {"auto", "dense", "krylov"}
        ``auto`` uses the dense eigendecomposition up to 4000 states.

    Returns
    -------
    FidelitySeries
    """
    psi0 = _check_state(psi0, h.shape[0])
    prop = propagator or make_propagator(h, method)
    amp = prop.amplitudes(psi0, np.asarray(times, dtype=float))
    series = FidelitySeries(np.asarray(times, dtype=float), np.abs(amp) ** 2, amp,
                            meta={"method": prop.method})
    if annotate_revival:
        series.revival = detect_first_revival(series)
    return series


def evolve_states(h, psi0, times, *, method: str = "auto") -> np.ndarray:
    """State vectors ``psi(t)`` as columns."""
    psi0 = _check_state(psi0, h.shape[0])
    return make_propagator(h, method).states(psi0, np.asarray(times, dtype=float))


def _local_maxima(f):
    f = np.asarray(f)
    if len(f) < 3:
        return np.zeros(0, dtype=np.int64)
    inner = (f[1:-1] > f[:-2]) & (f[1:-1] >= f[2:])
    return np.flatnonzero(inner) + 1


def _refine(t, f, i):
    """Vertex of the parabola through three neighbouring samples."""
    y0, y1, y2 = f[i - 1], f[i], f[i + 1]
    h = t[i + 1] - t[i]
    den = y0 - 2 * y1 + y2
    if den >= 0 or h <= 0:
        return t[i], y1
    x = 0.5 * (y0 - y2) / den
    x = min(max(x, -1.0), 1.0)
    return t[i] + x * h, y1 - 0.25 * (y0 - y2) * x


def detect_first_revival(series: FidelitySeries, dip: float = DIP,
                         significance: float = SIGNIFICANCE) -> Revival:
    """First significant local maximum after the fidelity has dipped.

    The series must first fall below ``dip``. Among the interior local maxima
    after that point, the first whose height is at least ``significance``
    times the tallest of them is the revival; this skips small reflection
    ripples that precede the main peak. The peak is refined by a quadratic
    through its three samples.
    """
    t, f = series.times, series.fidelity
    below = np.flatnonzero(f < dip)
    if not len(below):
        return Revival.none()
    start = below[0]
    peaks = _local_maxima(f)
    peaks = peaks[peaks > start]
    if not len(peaks):
        return Revival.none()
    tallest = f[peaks].max()
    first = peaks[np.flatnonzero(f[peaks] >= significance * tallest)[0]]
    tp, fp = _refine(t, f, first)
    return Revival(float(min(fp, 1.0)), float(tp))


def detect_reflection_peak(series: FidelitySeries, period: float,
                           window: tuple[float, float] = (0.3, 0.7)):
    """Tallest interior local maximum in ``[0.3 T, 0.7 T]``, or None."""
    t, f = series.times, series.fidelity
    peaks = _local_maxima(f)
    lo, hi = window[0] * period, window[1] * period
    peaks = peaks[(t[peaks] >= lo) & (t[peaks] <= hi)]
    if not len(peaks):
        return None
    i = peaks[np.argmax(f[peaks])]
    tp, fp = _refine(t, f, i)
    return float(fp), float(tp)


def polish_peak(prop, psi0, t_guess: float, dt: float) -> Revival:
    """Maximise the exact fidelity within one grid step of ``t_guess``."""

    lo = max(t_guess - dt, 1e-12)
    amp = prop.local_amplitude(psi0, lo, t_guess + dt - lo)

    def neg(t):
        return -abs(amp(t)) ** 2

    res = minimize_scalar(neg, bounds=(lo, t_guess + dt), method="bounded",
                          options={"xatol": 1e-10})
    return Revival(float(min(-res.fun, 1.0)), float(res.x))


def find_revival(h, psi0, *, horizon: float = DEFAULT_HORIZON, max_horizon: float = MAX_HORIZON,
                 method: str = "auto", propagator=None, reflection: bool = False,
                 polish: bool = True) -> FidelitySeries:
    """Evolve with a doubling horizon until a revival is found or ``max_horizon`` is hit.

    A candidate is only accepted if it is not within the last 5% of the
    window, so that a peak cut by the horizon is not mistaken for a maximum.
    With ``polish`` the grid estimate is replaced by a bounded scalar
    maximisation of the exact fidelity.
    """
    psi0 = _check_state(psi0, h.shape[0])
    prop = propagator or make_propagator(h, method)
    tmax = horizon
    while True:
        series = evolve(h, psi0, time_grid(tmax), propagator=prop)
        rev = series.revival
        if rev and rev.T < 0.95 * tmax:
            break
        if tmax * 2 > max_horizon + 1e-12:
            if not rev or rev.T >= 0.95 * tmax:
                series.revival = Revival.none() if not rev else rev
            break
        tmax *= 2
    if polish and series.revival:
        dt = series.times[1] - series.times[0]
        series.revival = polish_peak(prop, psi0, series.revival.T, dt)
    if reflection and series.revival:
        series.reflection = detect_reflection_peak(series, series.revival.T)
    series.meta["horizon"] = tmax
    return series


def fidelity_density(f0: float, n_sites: int) -> float:
    """``ln(f0) / N``; ``-inf`` for ``f0 = 0``."""
    if n_sites < 1:
        raise InvalidArgument("N must be positive")
    if not 0 <= f0 <= 1 + 1e-9:
        raise InvalidArgument(f"f0 must lie in [0, 1], got {f0}")
    if f0 == 0:
        return float("-inf")
    return math.log(min(f0, 1.0)) / n_sites


@dataclass
class ScanRecord:
    index: int
    state: str
    orbit_size: int
    f0: float
    T: float
    error: str | None = None


@dataclass
class RevivalScan:
    """Revival data for every initial basis state (one per translation orbit).

    Aggregates weight each representative by its orbit size, so they are
    averages over all basis states.
    """

    records: list
    meta: dict = field(default_factory=dict)

    def _valid(self):
        return [r for r in self.records if r.error is None]

    @property
    def partial(self) -> bool:
        return any(r.error is not None for r in self.records)

    @property
    def best(self) -> ScanRecord:
        recs = [r for r in self._valid() if not math.isnan(r.f0)]
        return max(recs, key=lambda r: r.f0)

    def _weighted(self, attr):
        recs = self._valid()
        vals = np.array([0.0 if math.isnan(getattr(r, attr)) else getattr(r, attr) for r in recs])
        w = np.array([r.orbit_size for r in recs], dtype=float)
        mean = float(np.average(vals, weights=w))
        std = float(np.sqrt(np.average((vals - mean) ** 2, weights=w)))
        return mean, std

    @property
    def mean_f0(self) -> float:
        return self._weighted("f0")[0]

    @property
    def std_f0(self) -> float:
        return self._weighted("f0")[1]

    def ranking(self) -> list:
        return sorted(self._valid(), key=lambda r: -(0.0 if math.isnan(r.f0) else r.f0))


def _representatives(basis: Basis):
    from .symmetry import orbit_data

    if basis.spec.is_translation_invariant(basis.n_sites):
        od = orbit_data(basis)
        reps = od.representatives
        return reps, od.period[reps]
    idx = np.arange(basis.dim)
    return idx, np.ones(basis.dim, dtype=np.int64)


def scan_initial_states(h, basis: Basis, horizon: float = DEFAULT_HORIZON, *,
                        method: str = "auto", threads: int = 1,
                        max_horizon: float = MAX_HORIZON) -> RevivalScan:
    """First revival from every basis state (one per translation orbit)."""
    reps, sizes = _representatives(basis)
    prop = make_propagator(h, method)

    def one(item):
        idx, size = item
        psi = np.zeros(basis.dim)
        psi[idx] = 1.0
        label = to_bitstring(basis.states[idx], basis.n_sites)
        try:
            rev = find_revival(h, psi, horizon=horizon, max_horizon=max_horizon,
                               propagator=prop).revival
            return ScanRecord(int(idx), label, int(size), rev.f0, rev.T)
        except Exception as exc:  # flagged, not fatal
            return ScanRecord(int(idx), label, int(size), float("nan"), float("nan"), repr(exc))

    items = list(zip(reps.tolist(), sizes.tolist()))
    if threads > 1 and isinstance(prop, KrylovPropagator):
        with ThreadPoolExecutor(threads) as pool:
            records = list(pool.map(one, items))
    else:
        records = [one(it) for it in items]
    return RevivalScan(records, {"method": prop.method, "horizon": horizon,
                                 "n_states": basis.dim, "n_orbits": len(items)})
