"""Constrained Hilbert spaces of spin-1/2 chains.

A configuration of ``N`` spins is stored as an integer occupation word, site
``i`` living in bit ``i`` (bit value 1 = excitation). Written as a string the
first character is site 0, so ``"1010"`` is the integer ``0b0101 = 5``.

Every constraint family here only ever forbids *adding* excitations, so all
vertex sets are downward closed (daisy cubes). Periodic chains are treated as
the infinite periodic extension: a blockade window longer than the ring wraps
around and may see the same excitation twice.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .exceptions import InvalidArgument, ResourceLimit, UnsupportedModel

MAX_SITES = 63
MAX_DIMENSION = 50_000_000
CACHE_ENV = "SCARGRAPH_CACHE"

KINDS = ("free", "pxp", "blockade", "rrange", "kk", "2hc", "star", "2hg", "custom")
_PARAM_KINDS = ("blockade", "rrange", "kk", "star")
BOUNDARIES = ("pbc", "obc")


@dataclass(frozen=True)
class SpinConfig:
    """One computational basis state."""

    bits: int
    n_sites: int

    def __post_init__(self):
        if not 1 <= self.n_sites <= MAX_SITES:
            raise InvalidArgument(f"n_sites must be in [1, {MAX_SITES}], got {self.n_sites}")
        if self.bits < 0 or self.bits >> self.n_sites:
            raise InvalidArgument(f"bits {self.bits:#x} do not fit in {self.n_sites} sites")

    @classmethod
    def from_string(cls, text: str) -> "SpinConfig":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise InvalidArgument(f"not a bitstring: {text!r}")
        return cls(int(text[::-1], 2), len(text))

    def __str__(self) -> str:
        return to_bitstring(self.bits, self.n_sites)

    def dominated_by(self, other: "SpinConfig") -> bool:
        """True if every excitation of ``self`` is also present in ``other``."""
        return self.n_sites == other.n_sites and self.bits & ~other.bits == 0

    @property
    def weight(self) -> int:
        return self.bits.bit_count()


def to_bitstring(bits: int, n_sites: int) -> str:
    return format(int(bits), f"0{n_sites}b")[::-1]


def from_bitstring(text: str) -> int:
    return SpinConfig.from_string(text).bits


def z_state(n_sites: int, period: int = 2, shift: int = 0) -> SpinConfig:
    """``|1 0..0 1 0..0 ...>`` with one excitation every ``period`` sites.

    ``period=2`` is the Neel state ``1010...``; ``shift`` translates it.
    """
    if n_sites % period:
        raise InvalidArgument(f"N={n_sites} is not a multiple of the period {period}")
    bits = sum(1 << ((i + shift) % n_sites) for i in range(0, n_sites, period))
    return SpinConfig(bits, n_sites)


def neel(n_sites: int) -> SpinConfig:
    return z_state(n_sites, 2)


def state_from_label(label: str, n_sites: int) -> SpinConfig:
    """Resolve CLI state labels: a bitstring, ``neel``, ``z3``, ``z4`` or ``1100``."""
    label = label.strip().lower()
    if label in ("neel", "z2"):
        return neel(n_sites)
    if label.startswith("z") and label[1:].isdigit():
        return z_state(n_sites, int(label[1:]))
    if label == "1100":
        if n_sites % 4:
            raise InvalidArgument("the 1100 pattern needs N divisible by 4")
        return SpinConfig.from_string("1100" * (n_sites // 4))
    config = SpinConfig.from_string(label)
    if config.n_sites != n_sites:
        raise InvalidArgument(f"state {label!r} has {config.n_sites} sites, expected {n_sites}")
    return config


@dataclass(frozen=True)
class ConstraintSpec:
    """Selector for a constrained model family.

    ``param`` is ``d`` for ``blockade``/``star``, ``r`` for ``rrange`` and ``k``
    for ``kk``. ``custom`` carries its generating (maximal) vertices and the
    number of sites they were written for.
    """

    kind: str
    param: int | None = None
    boundary: str = "pbc"
    maximal: tuple[int, ...] = field(default=(), compare=True)
    custom_sites: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown model kind {self.kind!r}")
        if self.boundary not in BOUNDARIES:
            raise InvalidArgument(f"boundary must be one of {BOUNDARIES}")
        if self.kind in _PARAM_KINDS:
            if self.param is None or self.param < 1:
                raise InvalidArgument(f"{self.kind} needs an integer parameter >= 1")
        elif self.param is not None:
            raise InvalidArgument(f"{self.kind} takes no parameter")
        if self.kind == "custom" and (not self.maximal or self.custom_sites is None):
            raise InvalidArgument("custom models need maximal vertices and a site count")

    # convenience constructors
    @classmethod
    def free(cls, boundary="pbc"):
        return cls("free", boundary=boundary)

    @classmethod
    def pxp(cls, boundary="pbc"):
        return cls("pxp", boundary=boundary)

    @classmethod
    def blockade(cls, d, boundary="pbc"):
        return cls("blockade", d, boundary)

    @classmethod
    def rrange(cls, r, boundary="pbc"):
        return cls("rrange", r, boundary)

    @classmethod
    def kk(cls, k, boundary="pbc"):
        return cls("kk", k, boundary)

    @classmethod
    def two_hypercube(cls, boundary="pbc"):
        return cls("2hc", boundary=boundary)

    @classmethod
    def star(cls, d, boundary="pbc"):
        return cls("star", d, boundary)

    @classmethod
    def two_hypergrid(cls):
        return cls("2hg")

    @classmethod
    def custom(cls, maximal, n_sites):
        return cls("custom", maximal=tuple(sorted(set(int(x) for x in maximal))),
                   custom_sites=n_sites, boundary="pbc")

    @property
    def label(self) -> str:
        if self.kind in _PARAM_KINDS:
            return f"{self.kind}:{self.param}"
        if self.kind == "custom":
            return f"custom[{self.custom_sites}:{len(self.maximal)}]"
        return self.kind

    def with_boundary(self, boundary: str) -> "ConstraintSpec":
        return ConstraintSpec(self.kind, self.param, boundary, self.maximal, self.custom_sites)

    def check_sites(self, n_sites: int, max_sites: int | None = MAX_SITES) -> None:
        """Raise if ``n_sites`` is incompatible with this family.

        ``max_sites=None`` lifts the word-size cap (exact counting only).
        """
        if n_sites < 1 or (max_sites is not None and n_sites > max_sites):
            raise InvalidArgument(f"N must be in [1, {max_sites}], got {n_sites}")
        if self.kind in ("2hc", "2hg") and n_sites % 2:
            raise InvalidArgument(f"{self.kind} needs an even number of sites")
        if self.kind == "star" and n_sites % (self.param + 1):
            raise InvalidArgument(f"star:{self.param} needs N divisible by {self.param + 1}")
        if self.kind == "2hg" and self.boundary != "pbc":
            raise UnsupportedModel("2hg is only defined with periodic pairings")
        if self.kind == "custom" and n_sites != self.custom_sites:
            raise InvalidArgument(f"custom model was defined for N={self.custom_sites}")

    def is_translation_invariant(self, n_sites: int) -> bool:
        if self.boundary != "pbc":
            return False
        if self.kind != "custom":
            return True
        mx = np.array(self.maximal, dtype=np.int64)
        closure = set(_downward_closure(mx, n_sites).tolist())
        return all(rotate(x, 1, n_sites) in closure for x in closure)


def parse_model(text: str, boundary: str = "pbc") -> ConstraintSpec:
    """Parse ``free | pxp | blockade:<d> | rrange:<r> | kk:<k> | 2hc | star:<d> | 2hg | custom:<file>``."""
    text = text.strip()
    name, _, arg = text.partition(":")
    name = name.lower()
    if name == "custom":
        if not arg:
            raise InvalidArgument("custom:<file> needs a file path")
        return load_custom(arg)
    if name in _PARAM_KINDS:
        if not arg.isdigit():
            raise InvalidArgument(f"{name} needs an integer parameter, e.g. {name}:2")
        return ConstraintSpec(name, int(arg), boundary)
    if arg:
        raise InvalidArgument(f"{name} takes no parameter")
    if name not in KINDS:
        raise InvalidArgument(f"unknown model {text!r}")
    if name == "2hg":
        return ConstraintSpec("2hg", boundary="pbc")
    return ConstraintSpec(name, boundary=boundary)


def load_custom(path: str | os.PathLike) -> ConstraintSpec:
    """Read a newline-separated list of maximal-vertex bitstrings."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InvalidArgument(f"{path}: no maximal vertices")
    configs = [SpinConfig.from_string(ln) for ln in lines]
    sizes = {c.n_sites for c in configs}
    if len(sizes) != 1:
        raise InvalidArgument(f"{path}: bitstrings have inconsistent lengths {sorted(sizes)}")
    return ConstraintSpec.custom([c.bits for c in configs], sizes.pop())


# ---------------------------------------------------------------------------
# bit kernels (vectorised over int64 arrays)


def popcount(states):
    return np.bitwise_count(np.asarray(states, dtype=np.int64)).astype(np.int64)


def rotate(states, shift: int, n_sites: int):
    """Translate by ``shift`` sites: bit ``i`` moves to bit ``(i + shift) mod N``."""
    shift %= n_sites
    mask = (1 << n_sites) - 1
    if isinstance(states, (int, np.integer)):
        s = int(states)
        return ((s << shift) | (s >> (n_sites - shift))) & mask if shift else s
    s = np.asarray(states, dtype=np.int64)
    if shift == 0:
        return s.copy()
    return ((s << shift) | (s >> (n_sites - shift))) & mask


def _roll_down(s, delta: int, n_sites: int, periodic: bool):
    """Word whose bit ``i`` is bit ``i + delta`` of ``s`` (wrapping if periodic)."""
    if periodic:
        return rotate(s, -delta, n_sites)
    if delta >= n_sites:
        return np.zeros_like(s)
    return s >> delta


def _pair_offsets(spec: ConstraintSpec, n_sites: int) -> list[int] | None:
    """Forbidden excitation separations for pairwise-exclusion families."""
    kind, p = spec.kind, spec.param
    if kind == "pxp":
        return [1]
    if kind == "blockade":
        return list(range(1, p + 1))
    if kind == "rrange":
        return list(range(1, 2 * p, 2))
    if kind == "2hc":
        return list(range(1, n_sites, 2))
    if kind == "star":
        return [dl for dl in range(1, n_sites) if dl % (p + 1)]
    return None


def _run_length(spec: ConstraintSpec) -> int | None:
    if spec.kind == "kk":
        return spec.param + 1
    return None


def _hypergrid_mask(states, n_sites: int, offset: int):
    """True where no pair cell (under pairing ``offset``) is doubly occupied."""
    s = np.asarray(states, dtype=np.int64)
    ok = np.ones(s.shape, dtype=bool)
    for c in range(n_sites // 2):
        a = (2 * c - offset) % n_sites
        b = (a + 1) % n_sites
        ok &= ~((((s >> a) & 1) == 1) & (((s >> b) & 1) == 1))
    return ok


def allowed_mask(spec: ConstraintSpec, n_sites: int, states) -> np.ndarray:
    """Vectorised constraint predicate over an array of occupation words."""
    spec.check_sites(n_sites)
    s = np.asarray(states, dtype=np.int64)
    if np.any((s < 0) | (s >> n_sites != 0)):
        raise InvalidArgument("state words do not fit in N sites")
    periodic = spec.boundary == "pbc"
    kind = spec.kind
    if kind == "free":
        return np.ones(s.shape, dtype=bool)
    offsets = _pair_offsets(spec, n_sites)
    if offsets is not None:
        ok = np.ones(s.shape, dtype=bool)
        for delta in offsets:
            ok &= (s & _roll_down(s, delta, n_sites, periodic)) == 0
        return ok
    run = _run_length(spec)
    if run is not None:
        t = s.copy()
        for step in range(1, run):
            t &= _roll_down(s, step, n_sites, periodic)
        return t == 0
    if kind == "2hg":
        return _hypergrid_mask(s, n_sites, 0) | _hypergrid_mask(s, n_sites, 1)
    if kind == "custom":
        mx = np.array(spec.maximal, dtype=np.int64)
        ok = np.zeros(s.shape, dtype=bool)
        for x in mx:
            ok |= (s & ~x) == 0
        return ok
    raise UnsupportedModel(kind)


def allows(spec: ConstraintSpec, config: SpinConfig) -> bool:
    """Whether ``config`` is a vertex of the constrained graph."""
    if spec.kind == "custom" and config.n_sites != spec.custom_sites:
        raise InvalidArgument("config size does not match the custom model")
    return bool(allowed_mask(spec, config.n_sites, np.array([config.bits]))[0])


# ---------------------------------------------------------------------------
# basis


@dataclass(frozen=True, eq=False)
class Basis:
    """Sorted constrained configurations with binary-search index lookup."""

    spec: ConstraintSpec
    n_sites: int
    states: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=np.int64)
        if states.ndim != 1:
            raise InvalidArgument("states must be one-dimensional")
        if len(states) > 1 and not np.all(np.diff(states) > 0):
            states = np.unique(states)
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return len(self.states)

    def lookup(self, words) -> np.ndarray:
        """Indices of ``words`` in the basis, ``-1`` where absent."""
        w = np.asarray(words, dtype=np.int64)
        idx = np.searchsorted(self.states, w)
        idx = np.minimum(idx, len(self.states) - 1)
        return np.where(self.states[idx] == w, idx, -1)

    def index(self, config: SpinConfig | int) -> int:
        bits = config.bits if isinstance(config, SpinConfig) else int(config)
        i = int(self.lookup(np.array([bits]))[0])
        if i < 0:
            raise InvalidArgument(f"{to_bitstring(bits, self.n_sites)} is not in the basis")
        return i

    def __contains__(self, config) -> bool:
        bits = config.bits if isinstance(config, SpinConfig) else int(config)
        return bool(self.lookup(np.array([bits]))[0] >= 0)

    def config(self, i: int) -> SpinConfig:
        return SpinConfig(int(self.states[i]), self.n_sites)

    def bitstrings(self) -> list[str]:
        return [to_bitstring(s, self.n_sites) for s in self.states.tolist()]

    def basis_vector(self, config: SpinConfig | int) -> np.ndarray:
        v = np.zeros(self.dim)
        v[self.index(config)] = 1.0
        return v

    @cached_property
    def weights(self) -> np.ndarray:
        return popcount(self.states)


def _downward_closure(maximal: np.ndarray, n_sites: int) -> np.ndarray:
    parts = []
    total = 0
    for x in np.asarray(maximal, dtype=np.int64).tolist():
        positions = [i for i in range(n_sites) if (x >> i) & 1]
        total += 1 << len(positions)
        if total > 4 * MAX_DIMENSION:
            raise ResourceLimit("downward closure exceeds the enumeration budget")
        counter = np.arange(1 << len(positions), dtype=np.int64)
        sub = np.zeros_like(counter)
        for j, pos in enumerate(positions):
            sub |= ((counter >> j) & 1) << pos
        parts.append(sub)
    return np.unique(np.concatenate(parts)) if parts else np.zeros(1, dtype=np.int64)


def hypergrid_states(n_sites: int, offset: int) -> np.ndarray:
    """All words whose pair cells avoid ``11`` under pairing ``offset``."""
    if n_sites % 2:
        raise InvalidArgument("hypergrids need an even number of sites")
    if offset not in (0, 1):
        raise InvalidArgument("pairing offset must be 0 or 1")
    states = np.zeros(1, dtype=np.int64)
    for c in range(n_sites // 2):
        a = (2 * c - offset) % n_sites
        b = (a + 1) % n_sites
        states = np.concatenate([states, states | (1 << a), states | (1 << b)])
    return np.sort(states)


def _grow(spec: ConstraintSpec, n_sites: int) -> np.ndarray:
    """Site-by-site generation with open-chain pruning, then the full check."""
    offsets = _pair_offsets(spec, n_sites)
    run = _run_length(spec)
    states = np.zeros(1, dtype=np.int64)
    for m in range(n_sites):
        cand = states | (1 << m)
        ok = np.ones(cand.shape, dtype=bool)
        if offsets is not None:
            for delta in offsets:
                if 0 <= m - delta:
                    ok &= ((cand >> (m - delta)) & 1) == 0
        elif run is not None and m >= run - 1:
            t = np.ones(cand.shape, dtype=bool)
            for step in range(1, run):
                t &= ((cand >> (m - step)) & 1) == 1
            ok &= ~t
        states = np.concatenate([states, cand[ok]])
        if len(states) > 2 * MAX_DIMENSION:
            raise ResourceLimit("enumeration exceeds the dimension cap")
    states = states[allowed_mask(spec, n_sites, states)]
    return np.sort(states)


def _cache_path(spec: ConstraintSpec, n_sites: int) -> Path | None:
    root = os.environ.get(CACHE_ENV)
    if not root or spec.kind == "custom":
        return None
    name = f"{spec.label.replace(':', '-')}_{spec.boundary}_N{n_sites}.npy"
    return Path(root) / name


def enumerate_basis(spec: ConstraintSpec, n_sites: int) -> Basis:
    """Materialise the sorted vertex set of ``spec`` on ``n_sites`` spins."""
    spec.check_sites(n_sites)
    if spec.kind not in ("custom", "2hg"):
        expected = hilbert_dimension(spec, n_sites)
        if expected > MAX_DIMENSION:
            raise ResourceLimit(f"dimension {expected} exceeds the cap {MAX_DIMENSION}")
    cache = _cache_path(spec, n_sites)
    if cache is not None and cache.exists():
        return Basis(spec, n_sites, np.load(cache))
    if spec.kind == "free":
        states = np.arange(1 << n_sites, dtype=np.int64)
    elif spec.kind == "2hg":
        states = np.union1d(hypergrid_states(n_sites, 0), hypergrid_states(n_sites, 1))
    elif spec.kind == "custom":
        states = _downward_closure(np.array(spec.maximal), n_sites)
    else:
        states = _grow(spec, n_sites)
    if len(states) > MAX_DIMENSION:
        raise ResourceLimit(f"dimension {len(states)} exceeds the cap {MAX_DIMENSION}")
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        np.save(cache, states)
    return Basis(spec, n_sites, states)


# ---------------------------------------------------------------------------
# exact counting


def transfer_matrix(spec: ConstraintSpec) -> np.ndarray:
    """Integer transfer matrix glueing one site onto the chain.

    Sizes: ``2r x 2r`` for ``rrange``, ``(d+1) x (d+1)`` for ``blockade`` and
    ``2^k x 2^k`` for ``kk``; ``pxp`` is the ``2 x 2`` Fibonacci matrix.
    """
    kind, p = spec.kind, spec.param
    if kind == "pxp":
        return np.array([[1, 1], [1, 0]], dtype=np.int64)
    if kind == "rrange":
        size = 2 * p
        m = np.zeros((size, size), dtype=np.int64)
        m[0, 0] = 1
        m[0, size - 1] += 1
        for i in range(1, size):
            m[i, i - 1] = 1
        # row 2 re-opens the excitation-free classes at odd distances
        for ell in range(1, p):
            m[1, 2 * ell] = 1
        return m
    if kind == "blockade":
        size = p + 1
        m = np.zeros((size, size), dtype=np.int64)
        m[0, 0] = 1
        m[size - 1, 0] = 1
        for i in range(size - 1):
            m[i, i + 1] = 1
        return m
    if kind == "kk":
        size = 1 << p
        half = size >> 1
        m = np.zeros((size, size), dtype=np.int64)
        for i in range(1, size + 1):
            c = (i + 1) // 2
            m[i - 1, c - 1] += 1
            j = half + c
            if not (i == size and j == size):
                m[i - 1, j - 1] += 1
        return m
    raise UnsupportedModel(f"no transfer matrix for {spec.label}")


def _boundary_matrix(size: int, boundary: str) -> np.ndarray:
    if boundary == "pbc":
        return np.eye(size, dtype=np.int64).astype(object)
    b = np.zeros((size, size), dtype=np.int64)
    b[0, :] = 1
    return b.astype(object)


def _int_matrix_power(m: np.ndarray, n: int) -> np.ndarray:
    result = np.eye(m.shape[0], dtype=np.int64).astype(object)
    base = m.astype(object)
    while n:
        if n & 1:
            result = result.dot(base)
        base = base.dot(base)
        n >>= 1
    return result


@dataclass(frozen=True)
class DimensionRecurrence:
    """Linear recurrence ``D_N = sum_j c_j D_{N-j}`` with per-boundary seeds.

    ``initial[bc]`` holds ``D_1 .. D_m`` where ``m`` is the recurrence order.
    """

    coefficients: tuple[int, ...]
    initial: dict

    @property
    def order(self) -> int:
        return len(self.coefficients)

    @property
    def characteristic_polynomial(self) -> np.ndarray:
        """Coefficients of ``z^m - c_1 z^{m-1} - ... - c_m``, highest power first."""
        return np.array([1] + [-c for c in self.coefficients], dtype=float)

    def value(self, n_sites: int, boundary: str = "pbc") -> int:
        seeds = list(self.initial[boundary])
        if n_sites < 1:
            raise InvalidArgument("N must be >= 1")
        if n_sites <= len(seeds):
            return seeds[n_sites - 1]
        vals = seeds[:]
        for _ in range(len(seeds), n_sites):
            vals.append(sum(c * vals[-j] for j, c in enumerate(self.coefficients, start=1)))
            vals = vals[-self.order:]
        return vals[-1]

    def sequence(self, n_max: int, boundary: str = "pbc") -> list[int]:
        return [self.value(n, boundary) for n in range(1, n_max + 1)]


def dimension_recurrence(spec: ConstraintSpec) -> DimensionRecurrence:
    kind, p = spec.kind, spec.param
    if kind == "pxp":
        return DimensionRecurrence((1, 1), {"pbc": (1, 3), "obc": (2, 3)})
    if kind == "rrange":
        coeffs = (1, 1) + tuple((-1) ** j for j in range(3, 2 * p + 1))
        pbc = tuple(1 if n % 2 else 2 ** (n // 2 + 1) - 1 for n in range(1, 2 * p + 1))
        obc = tuple(2 ** math.ceil(n / 2) + 2 ** (n - math.ceil(n / 2)) - 1
                    for n in range(1, 2 * p + 1))
        return DimensionRecurrence(coeffs, {"pbc": pbc, "obc": obc})
    if kind == "blockade":
        coeffs = (1,) + (0,) * (p - 1) + (1,)
        obc = tuple(n + 1 for n in range(1, p + 2))
        pbc = tuple(1 for _ in range(1, p + 1)) + (p + 2,)
        return DimensionRecurrence(coeffs, {"pbc": pbc, "obc": obc})
    if kind == "kk":
        coeffs = (1,) * (p + 1)
        obc = tuple(2 ** n for n in range(1, p + 1)) + (2 ** (p + 1) - 1,)
        pbc = tuple(2 ** n - 1 for n in range(1, p + 1)) + (2 ** (p + 1) - 1,)
        return DimensionRecurrence(coeffs, {"pbc": pbc, "obc": obc})
    raise UnsupportedModel(f"no dimension recurrence for {spec.label}")


def hilbert_dimension(spec: ConstraintSpec, n_sites: int, boundary: str | None = None) -> int:
    """Exact (arbitrary precision) number of allowed configurations."""
    bc = boundary or spec.boundary
    spec = spec.with_boundary(bc) if spec.kind not in ("custom",) else spec
    spec.check_sites(n_sites, None if spec.kind != "custom" else MAX_SITES)
    kind, p = spec.kind, spec.param
    if kind == "free":
        return 2 ** n_sites
    if kind == "2hc":
        return 2 ** (n_sites // 2 + 1) - 1
    if kind == "star":
        return (p + 1) * (2 ** (n_sites // (p + 1)) - 1) + 1
    if kind == "2hg":
        return 2 * 3 ** (n_sites // 2) - hilbert_dimension(ConstraintSpec.pxp(), n_sites)
    if kind == "custom":
        return len(enumerate_basis(spec, n_sites))
    m = transfer_matrix(spec)
    if m.shape[0] > 64:
        return dimension_recurrence(spec).value(n_sites, bc)
    power = _int_matrix_power(m, n_sites)
    return int(np.trace(power.dot(_boundary_matrix(m.shape[0], bc))))


def quantum_dimension(spec: ConstraintSpec) -> float:
    """Asymptotic growth ratio ``lim D_N / D_{N-1}``."""
    kind, p = spec.kind, spec.param
    if kind == "free":
        return 2.0
    if kind == "2hc":
        return math.sqrt(2.0)
    if kind == "star":
        return 2.0 ** (1.0 / (p + 1))
    if kind == "2hg":
        return math.sqrt(3.0)
    if kind in ("pxp", "rrange", "blockade", "kk"):
        ev = np.linalg.eigvals(transfer_matrix(spec).astype(float))
        return float(np.max(np.abs(ev)))
    raise UnsupportedModel(f"no quantum dimension for {spec.label}")


def recurrence_root(spec: ConstraintSpec) -> float:
    """Largest-magnitude root of the recurrence's characteristic polynomial."""
    roots = np.roots(dimension_recurrence(spec).characteristic_polynomial)
    return float(np.max(np.abs(roots)))
