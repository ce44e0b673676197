"""Construction and validation of N-qubit states.

Dense density matrices for the reference families (GHZ, W, Dicke, cluster,
Wei, Smolin, four-qubit singlet), triple-correlation states built from a
correlation triple, and white-noise mixtures.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ._linalg import hamming_weights, pauli_power, projector
from .errors import CapacityError, ParameterError, SchemaError, StateValidityError

#: Largest qubit count for which dense 2^n x 2^n matrices are built by default.
DEFAULT_DENSE_CAP = 12

#: Dimension above which the eager PSD eigenvalue check is skipped (it would
#: cost O(dim^3)); hermiticity and trace are always verified.
_PSD_CHECK_MAX_DIM = 1024

_HERMITICITY_TOL = 1e-12
_TRACE_TOL = 1e-12
_EIGENVALUE_FLOOR = -1e-9
_TRIPLE_TOL = 1e-12


def _check_cap(n: int, dense_cap: int) -> None:
    if n > dense_cap:
        raise CapacityError(f"n={n} exceeds the dense cap {dense_cap}")


@dataclass(frozen=True)
class CorrelationTriple:
    """The three full-weight correlations (<s1^xN>, <s2^xN>, <s3^xN>)."""

    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        for name, value in zip(("c1", "c2", "c3"), self):
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value}")
            if abs(value) > 1 + _TRIPLE_TOL:
                raise ParameterError(f"|{name}| must be <= 1, got {value}")

    def __iter__(self):
        return iter((self.c1, self.c2, self.c3))

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3], dtype=float)

    @property
    def abs_sum(self) -> float:
        return abs(self.c1) + abs(self.c2) + abs(self.c3)

    @classmethod
    def from_sequence(cls, c: Sequence[float]) -> "CorrelationTriple":
        c = list(c)
        if len(c) != 3:
            raise ParameterError(f"a correlation triple needs 3 entries, got {len(c)}")
        return cls(float(c[0]), float(c[1]), float(c[2]))


@dataclass(frozen=True)
class DenseState:
    """An N-qubit density matrix, validated on construction.

    Qubit 0 is the leftmost tensor factor and the computational basis is
    binary ordered. The matrix is frozen (read-only) after validation.
    """

    n: int
    rho: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"qubit count must be positive, got {self.n}")
        rho = np.array(self.rho, dtype=complex)
        dim = 2**self.n
        if rho.shape != (dim, dim):
            raise ParameterError(f"matrix shape {rho.shape} does not match n={self.n}")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > _HERMITICITY_TOL:
            raise StateValidityError(f"matrix is not Hermitian: residue {herm:.3e}")
        tr = np.trace(rho)
        if abs(tr - 1) > _TRACE_TOL:
            raise StateValidityError(f"trace is {tr}, expected 1")
        if dim <= _PSD_CHECK_MAX_DIM:
            lo = float(np.linalg.eigvalsh(rho)[0])
            if lo < _EIGENVALUE_FLOOR:
                raise StateValidityError(f"smallest eigenvalue {lo:.3e} below {_EIGENVALUE_FLOOR}")
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return 2**self.n

    @classmethod
    def from_vector(cls, psi: np.ndarray) -> "DenseState":
        psi = np.asarray(psi, dtype=complex)
        n = int(round(math.log2(psi.size)))
        if 2**n != psi.size:
            raise ParameterError(f"vector length {psi.size} is not a power of 2")
        return cls(n, projector(psi))

    def export_row_major(self) -> list:
        """Row-major list of [re, im] pairs, the dense exchange format."""
        flat = self.rho.reshape(-1)
        return [[float(z.real), float(z.imag)] for z in flat]


def _even_eigenvalue_terms(n: int, c: CorrelationTriple):
    """The four spectral expressions of an even-n triple-correlation state.

    Yields (value, sign, parity); each carries multiplicity 2^(n-2).
    """
    e = (-1) ** (n // 2)
    for sign in (+1, -1):
        for parity in (0, 1):
            val = (1 + sign * c.c1 + sign * e * (-1) ** parity * c.c2 + (-1) ** parity * c.c3) / 2**n
            yield val, sign, parity


@dataclass(frozen=True)
class M3NState:
    """Triple-correlation reference state: qubit count plus a valid triple.

    The density matrix is (1/2^n)(I + sum_j c_j sigma_j^{xn}); all single-qubit
    marginals are maximally mixed. Validity is the tetrahedron constraint for
    even n (four nonnegative spectral expressions) and the unit ball for odd n.
    """

    n: int
    c: CorrelationTriple

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError(f"qubit count must be >= 2, got {self.n}")
        if self.n % 2 == 0:
            worst = min(v for v, _, _ in _even_eigenvalue_terms(self.n, self.c))
            if worst < -_TRIPLE_TOL / 2**self.n:
                raise StateValidityError(
                    f"triple {tuple(self.c)} lies outside the physical tetrahedron "
                    f"for n={self.n} (spectral expression {worst * 2**self.n:.3e})"
                )
        else:
            r2 = float(np.sum(self.c.as_array() ** 2))
            if r2 > 1 + _TRIPLE_TOL:
                raise StateValidityError(
                    f"triple {tuple(self.c)} lies outside the unit ball (|c|^2 = {r2})"
                )

    @property
    def radius(self) -> float:
        return float(np.linalg.norm(self.c.as_array()))


@dataclass(frozen=True)
class SpectralLine:
    """One eigenvalue of a triple-correlation state with its degeneracy labels."""

    value: float
    multiplicity: int
    sign: int
    parity: int | None = None


# family tag -> set of accepted parameter names
_FAMILY_PARAMS = {
    "ghz": set(),
    "w": set(),
    "dicke": {"k"},
    "cluster_linear": set(),
    "cluster_rect": {"rows", "cols"},
    "wei": {"x"},
    "smolin": set(),
    "singlet4": set(),
    "m3n": {"c"},
    "white_noise_mix": {"inner", "q"},
}

#: families whose dense matrix is invariant under any qubit permutation
PERMUTATION_INVARIANT_FAMILIES = frozenset({"ghz", "w", "dicke", "smolin", "wei", "m3n"})


@dataclass(frozen=True)
class StateFamily:
    """A named state family with its parameters (qubit count supplied later)."""

    tag: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in _FAMILY_PARAMS:
            raise ParameterError(
                f"unknown family {self.tag!r}; known: {sorted(_FAMILY_PARAMS)}"
            )
        unknown = set(self.params) - _FAMILY_PARAMS[self.tag]
        if unknown:
            raise ParameterError(f"family {self.tag!r} got unknown params {sorted(unknown)}")
        object.__setattr__(self, "params", dict(self.params))

    # -- convenience constructors -------------------------------------------
    @classmethod
    def ghz(cls):
        return cls("ghz")

    @classmethod
    def w(cls):
        return cls("w")

    @classmethod
    def dicke(cls, k: int):
        return cls("dicke", {"k": int(k)})

    @classmethod
    def cluster_linear(cls):
        return cls("cluster_linear")

    @classmethod
    def cluster_rect(cls, rows: int = 2, cols: int | None = None):
        params = {"rows": int(rows)}
        if cols is not None:
            params["cols"] = int(cols)
        return cls("cluster_rect", params)

    @classmethod
    def wei(cls, x: float):
        return cls("wei", {"x": float(x)})

    @classmethod
    def smolin(cls):
        return cls("smolin")

    @classmethod
    def singlet4(cls):
        return cls("singlet4")

    @classmethod
    def m3n(cls, c) -> "StateFamily":
        triple = c if isinstance(c, CorrelationTriple) else CorrelationTriple.from_sequence(c)
        return cls("m3n", {"c": triple})

    @classmethod
    def white_noise_mix(cls, inner: "StateFamily", q: float):
        return cls("white_noise_mix", {"inner": inner, "q": float(q)})

    @classmethod
    def from_json_dict(cls, spec: Mapping) -> "StateFamily":
        """Parse the {"family": ..., "params": {...}} part of a state file."""
        try:
            tag = spec["family"]
        except KeyError:
            raise SchemaError('state spec is missing the "family" field')
        params = dict(spec.get("params", {}))
        if tag == "m3n" and "c" in params:
            params["c"] = CorrelationTriple.from_sequence(params["c"])
        if tag == "white_noise_mix" and "inner" in params:
            params["inner"] = cls.from_json_dict(params["inner"])
        try:
            return cls(tag, params)
        except ParameterError as exc:
            raise SchemaError(str(exc)) from exc


def load_state_spec(path) -> tuple[StateFamily, int]:
    """Read a state-specification JSON file, returning (family, n)."""
    with open(path) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if "n" not in spec:
        raise SchemaError(f'{path}: missing the "n" field')
    family = StateFamily.from_json_dict(spec)
    return family, int(spec["n"])


# -- family builders ----------------------------------------------------------

def _ghz_vector(n: int) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return v


def _w_vector(n: int) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    for k in range(n):
        v[1 << k] = 1
    return v / math.sqrt(n)


def _dicke_vector(n: int, k: int) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    for positions in itertools.combinations(range(n), k):
        idx = sum(1 << (n - 1 - p) for p in positions)
        v[idx] = 1
    return v / math.sqrt(math.comb(n, k))


def _graph_state_vector(n: int, edges) -> np.ndarray:
    """Plus states on every vertex, controlled-Z across every edge."""
    v = np.full(2**n, 1 / math.sqrt(2**n), dtype=complex)
    idx = np.arange(2**n)
    for a, b in edges:
        both = (((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)).astype(bool)
        v[both] *= -1
    return v


def _rect_edges(rows: int, cols: int):
    def vid(r, c):
        return r * cols + c

    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                edges.append((vid(r, c), vid(r + 1, c)))
    return edges


def _singlet4_vector() -> np.ndarray:
    v = np.zeros(16, dtype=complex)
    v[0b0011] = v[0b1100] = 1
    for idx in (0b0101, 0b0110, 0b1001, 0b1010):
        v[idx] = -0.5
    return v / math.sqrt(3)


def _wei_density(n: int, x: float) -> np.ndarray:
    if not 0 <= x <= 1:
        raise ParameterError(f"Wei parameter x must be in [0, 1], got {x}")
    if n < 4:
        raise ParameterError(f"the Wei family needs n >= 4, got {n}")
    dim = 2**n
    rho = x * projector(_ghz_vector(n))
    w = (1 - x) / (2 * n)
    diag = np.zeros(dim)
    for k in range(1, n + 1):
        idx = 2 ** (k - 1)
        diag[idx] += w
        diag[dim - 1 - idx] += w
    rho = rho + np.diag(diag).astype(complex)
    return rho


def build_state(family: StateFamily, n: int, *, dense_cap: int = DEFAULT_DENSE_CAP) -> DenseState:
    """Dense density matrix of a named family; pure families come out rank 1."""
    _check_cap(n, dense_cap)
    tag, params = family.tag, family.params
    if tag == "ghz":
        if n < 2:
            raise ParameterError("GHZ needs n >= 2")
        return DenseState.from_vector(_ghz_vector(n))
    if tag == "w":
        if n < 2:
            raise ParameterError("W needs n >= 2")
        return DenseState.from_vector(_w_vector(n))
    if tag == "dicke":
        k = int(params.get("k", n // 2))
        if not 0 <= k <= n:
            raise ParameterError(f"Dicke excitation k={k} outside 0..{n}")
        return DenseState.from_vector(_dicke_vector(n, k))
    if tag == "cluster_linear":
        if n < 2:
            raise ParameterError("linear cluster needs n >= 2")
        edges = [(k, k + 1) for k in range(n - 1)]
        return DenseState.from_vector(_graph_state_vector(n, edges))
    if tag == "cluster_rect":
        rows = int(params.get("rows", 2))
        cols = int(params.get("cols", n // rows if rows else 0))
        if rows < 2 or cols < 2 or rows * cols != n:
            raise ParameterError(
                f"rectangular cluster needs rows, cols >= 2 with rows*cols = n, "
                f"got {rows}x{cols} for n={n}"
            )
        return DenseState.from_vector(_graph_state_vector(n, _rect_edges(rows, cols)))
    if tag == "wei":
        return DenseState(n, _wei_density(n, float(params["x"])))
    if tag == "smolin":
        if n % 2 or n < 4:
            raise ParameterError(f"the generalised Smolin state needs even n >= 4, got n={n}")
        s = float((-1) ** (n // 2))
        return m3n_density(M3NState(n, CorrelationTriple(s, s, s)), dense_cap=dense_cap)
    if tag == "singlet4":
        if n != 4:
            raise ParameterError(f"the four-qubit singlet exists only at n=4, got n={n}")
        return DenseState.from_vector(_singlet4_vector())
    if tag == "m3n":
        return m3n_density(M3NState(n, params["c"]), dense_cap=dense_cap)
    if tag == "white_noise_mix":
        q = float(params["q"])
        if not 0 <= q <= 1:
            raise ParameterError(f"mixing probability q must be in [0, 1], got {q}")
        inner = build_state(params["inner"], n, dense_cap=dense_cap)
        dim = 2**n
        rho = q * inner.rho + (1 - q) * np.eye(dim) / dim
        return DenseState(n, rho)
    raise ParameterError(f"unknown family {tag!r}")


def m3n_density(state: M3NState, *, dense_cap: int = DEFAULT_DENSE_CAP) -> DenseState:
    """Dense matrix (1/2^n)(I + sum_j c_j sigma_j^{xn}) of a valid triple."""
    _check_cap(state.n, dense_cap)
    n = state.n
    dim = 2**n
    rho = np.eye(dim, dtype=complex)
    for j, cj in enumerate(state.c, start=1):
        if cj != 0:
            rho += cj * pauli_power(j, n)
    return DenseState(n, rho / dim)


def m3n_spectrum(state: M3NState) -> list[SpectralLine]:
    """Closed-form eigenvalues with sign/parity labels and multiplicities.

    Even n: four lines (sign, parity) with multiplicity 2^(n-2) each.
    Odd n: two lines (1 +/- r)/2^n with multiplicity 2^(n-1) each.
    """
    n = state.n
    if n % 2 == 0:
        return [
            SpectralLine(max(val, 0.0), 2 ** (n - 2), sign, parity)
            for val, sign, parity in _even_eigenvalue_terms(n, state.c)
        ]
    r = state.radius
    return [
        SpectralLine((1 + sign * r) / 2**n, 2 ** (n - 1), sign)
        for sign in (+1, -1)
    ]


def maximally_mixed(n: int) -> DenseState:
    return DenseState(n, np.eye(2**n, dtype=complex) / 2**n)


def permutation_conjugate(state: DenseState, perm: Sequence[int]) -> DenseState:
    """Relabel qubits of a dense state by the permutation ``perm``.

    ``perm[k]`` is the new position of qubit ``k``.
    """
    n = state.n
    if sorted(perm) != list(range(n)):
        raise ParameterError(f"not a permutation of 0..{n - 1}: {perm}")
    t = state.rho.reshape((2,) * (2 * n))
    axes = [0] * (2 * n)
    for k, p in enumerate(perm):
        axes[p] = k
        axes[n + p] = n + k
    t = np.transpose(t, axes)
    return DenseState(n, t.reshape(state.dim, state.dim))


__all__ = [
    "DEFAULT_DENSE_CAP",
    "CorrelationTriple",
    "DenseState",
    "M3NState",
    "SpectralLine",
    "StateFamily",
    "PERMUTATION_INVARIANT_FAMILIES",
    "build_state",
    "load_state_spec",
    "m3n_density",
    "m3n_spectrum",
    "maximally_mixed",
    "permutation_conjugate",
]
