"""LOCC reductions onto the two reference families.

Triple extraction with its explicit twirl channel (any state to the
triple-correlation family) and GHZ-diagonalisation (dephasing in the GHZ
basis). GHZ spectra serialise as ``{"n": 3, "p": {"000+": 0.97, ...}}``;
absent keys mean zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._linalg import SIGMA, conjugate_one_qubit
from .errors import CapacityError, ParameterError, SchemaError, StateValidityError
from .pauli import correlation_triple
from .qstate import DEFAULT_DENSE_CAP, DenseState, M3NState, build_state, StateFamily

_SUM_TOL = 1e-12
_NEG_TOL = -1e-12


@dataclass(frozen=True)
class GHZBasisIndex:
    """Index (i, sign) of the GHZ basis vector (|i> +/- |flip i>)/sqrt(2).

    ``i`` is restricted to bitstrings with leading bit 0, which picks one
    representative per flipped pair.
    """

    n: int
    i: int
    sign: int

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"qubit count must be positive, got {self.n}")
        if self.sign not in (+1, -1):
            raise ParameterError(f"sign must be +1 or -1, got {self.sign}")
        if not 0 <= self.i < 2 ** (self.n - 1):
            raise ParameterError(
                f"index {self.i} must have leading bit 0 for n={self.n} "
                f"(range 0..{2 ** (self.n - 1) - 1})"
            )

    @property
    def bits(self) -> str:
        return format(self.i, f"0{self.n}b")

    @property
    def key(self) -> str:
        return self.bits + ("+" if self.sign > 0 else "-")

    @classmethod
    def from_key(cls, key: str) -> "GHZBasisIndex":
        if len(key) < 2 or key[-1] not in "+-" or any(b not in "01" for b in key[:-1]):
            raise SchemaError(f"malformed GHZ basis key {key!r}; expected e.g. '001+'")
        return cls(len(key) - 1, int(key[:-1], 2), +1 if key[-1] == "+" else -1)


def ghz_basis_vector(idx: GHZBasisIndex, n: int) -> np.ndarray:
    """Unit vector (|i> + sign * |bitwise complement of i>)/sqrt(2)."""
    if idx.n != n:
        raise ParameterError(f"index is for n={idx.n}, not n={n}")
    v = np.zeros(2**n, dtype=complex)
    flip = 2**n - 1 - idx.i
    v[idx.i] += 1 / math.sqrt(2)
    v[flip] += idx.sign / math.sqrt(2)
    return v


@dataclass(frozen=True)
class GHZDiagonalState:
    """Eigenvalues of a GHZ-diagonal state, indexed by (i, sign).

    ``p`` has shape (2^(n-1), 2); column 0 holds the '+' branch, column 1
    the '-' branch. Entries are clipped to [0, inf) after validation.
    """

    n: int
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != (2 ** (self.n - 1), 2):
            raise ParameterError(
                f"spectrum shape {p.shape} does not match (2^{self.n - 1}, 2)"
            )
        if p.min() < _NEG_TOL:
            raise StateValidityError(f"negative eigenvalue {p.min():.3e}")
        total = float(p.sum())
        if abs(total - 1) > _SUM_TOL:
            raise StateValidityError(f"eigenvalues sum to {total}, expected 1")
        p = np.clip(p, 0.0, None)
        p.flags.writeable = False
        object.__setattr__(self, "p", p)

    @property
    def p_max(self) -> float:
        return float(self.p.max())

    def argmax(self) -> GHZBasisIndex:
        flat = int(np.argmax(self.p))
        return GHZBasisIndex(self.n, flat // 2, +1 if flat % 2 == 0 else -1)

    def value(self, idx: GHZBasisIndex) -> float:
        return float(self.p[idx.i, 0 if idx.sign > 0 else 1])

    def flat(self) -> np.ndarray:
        """Eigenvalues as a flat vector of length 2^n."""
        return self.p.reshape(-1)

    def dense(self) -> DenseState:
        """The dense matrix sum_i p_i |beta_i><beta_i|."""
        dim = 2**self.n
        rho = np.zeros((dim, dim), dtype=complex)
        for i in range(2 ** (self.n - 1)):
            for col, sign in ((0, +1), (1, -1)):
                w = self.p[i, col]
                if w:
                    v = ghz_basis_vector(GHZBasisIndex(self.n, i, sign), self.n)
                    rho += w * np.outer(v, v.conj())
        return DenseState(self.n, rho)

    # -- JSON exchange --------------------------------------------------------
    def to_json_dict(self) -> dict:
        entries = {}
        for i in range(2 ** (self.n - 1)):
            for col, sign in ((0, +1), (1, -1)):
                if self.p[i, col] != 0:
                    entries[GHZBasisIndex(self.n, i, sign).key] = float(self.p[i, col])
        return {"n": self.n, "p": entries}

    @classmethod
    def from_json_dict(cls, spec: dict) -> "GHZDiagonalState":
        try:
            n = int(spec["n"])
            entries = spec["p"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f'GHZ spectrum needs integer "n" and mapping "p": {exc}')
        p = np.zeros((2 ** (n - 1), 2))
        for key, value in entries.items():
            idx = GHZBasisIndex.from_key(str(key))
            if idx.n != n:
                raise SchemaError(f"key {key!r} has length {idx.n}, expected n={n}")
            p[idx.i, 0 if idx.sign > 0 else 1] = float(value)
        return cls(n, p)

    @classmethod
    def from_file(cls, path) -> "GHZDiagonalState":
        with open(path) as fh:
            try:
                spec = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_json_dict(spec)


def m3nfy(state: DenseState) -> M3NState:
    """Triple-correlation image of a state: same n, triple from three traces."""
    return M3NState(state.n, correlation_triple(state))


def _twirl_unitaries(n: int):
    """The 2(n-1) pairwise sigma_x then sigma_y conjugations, as (pauli, qubit) pairs."""
    for j in (1, 2):
        for k in range(n - 1):
            yield j, k


def apply_m3nfication_channel(
    state: DenseState, *, dense_cap: int = DEFAULT_DENSE_CAP
) -> DenseState:
    """The explicit twirl onto the triple-correlation family.

    Runs the 2(n-1)-step convex iteration rho -> (rho + U rho U^dag)/2 with
    U = sigma_a x sigma_a on adjacent qubit pairs (a = x then y), which equals
    the full 2^(2(n-1))-term mixture of products of those unitaries.
    """
    if state.n > dense_cap:
        raise CapacityError(f"n={state.n} exceeds the dense cap {dense_cap}")
    rho = np.array(state.rho)
    for j, k in _twirl_unitaries(state.n):
        conj = conjugate_one_qubit(rho, SIGMA[j], k, state.n)
        conj = conjugate_one_qubit(conj, SIGMA[j], k + 1, state.n)
        rho = 0.5 * (rho + conj)
    return DenseState(state.n, rho)


def ghz_diagonalise(state: DenseState) -> GHZDiagonalState:
    """Dephase in the GHZ basis: p_i^+/- = <beta_i^+/-| rho |beta_i^+/->.

    GHZ-diagonal inputs come back with their eigenvalues unchanged.
    """
    n = state.n
    half = 2 ** (n - 1)
    idx = np.arange(half)
    flip = 2**n - 1 - idx
    diag = np.real(np.diagonal(state.rho))
    cross = np.real(state.rho[idx, flip])
    mean = 0.5 * (diag[idx] + diag[flip])
    p = np.stack([mean + cross, mean - cross], axis=1)
    total = p.sum()
    if abs(total - 1) > 1e-10:
        raise StateValidityError(f"GHZ overlaps sum to {total}, expected 1")
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    return GHZDiagonalState(n, p)


def singlet_overlap_check() -> float:
    """Overlap of the four-qubit singlet with the GHZ vector (|0011>+|1100>)/sqrt(2).

    Equals 2/3, above the 1/2 threshold, so the singlet's genuine
    entanglement is certified by a single overlap measurement.
    """
    singlet = build_state(StateFamily.singlet4(), 4)
    beta = ghz_basis_vector(GHZBasisIndex(4, 0b0011, +1), 4)
    return float(np.real(beta.conj() @ singlet.rho @ beta))


__all__ = [
    "GHZBasisIndex",
    "GHZDiagonalState",
    "apply_m3nfication_channel",
    "ghz_basis_vector",
    "ghz_diagonalise",
    "m3nfy",
    "singlet_overlap_check",
]
