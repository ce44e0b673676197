"""Pauli correlation functions, correlation tensors, and local rotations.

The correlation-data exchange format used throughout the package is a JSON
object ``{"n": 4, "c": [c1, c2, c3], "sigma": [s1, s2, s3]}`` where ``sigma``
is optional (see :mod:`entbound.estimate` for the reader).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._linalg import SIGMA, SIGMA_STACK, apply_one_qubit
from .errors import CapacityError, ParameterError
from .qstate import CorrelationTriple, DenseState

#: largest qubit count for which the full 4^n tensor is materialised eagerly
EAGER_TENSOR_CAP = 8

_IMAG_TOL = 1e-10
_TWO_PI = 2 * math.pi


def expectation(state: DenseState, pauli_string: Sequence[int]) -> float:
    """Tr(rho * sigma_{i_1} x ... x sigma_{i_n}) as a real number.

    The imaginary residue must stay below 1e-10 (it does for Hermitian input).
    """
    string = [int(i) for i in pauli_string]
    if len(string) != state.n:
        raise ParameterError(
            f"pauli string length {len(string)} does not match n={state.n}"
        )
    if any(i not in (0, 1, 2, 3) for i in string):
        raise ParameterError(f"pauli indices must be in 0..3, got {string}")
    mat = state.rho
    for k, i in enumerate(string):
        if i != 0:
            mat = apply_one_qubit(mat, SIGMA[i], k, state.n)
    val = np.trace(mat)
    if abs(val.imag) >= _IMAG_TOL:
        raise ParameterError(f"imaginary residue {val.imag:.3e} in a Pauli expectation")
    return float(val.real)


def correlation_triple(state: DenseState) -> CorrelationTriple:
    """The canonical triple (<s1^xn>, <s2^xn>, <s3^xn>) of a dense state."""
    return CorrelationTriple(
        *(expectation(state, (j,) * state.n) for j in (1, 2, 3))
    )


def _contract_full_tensor(state: DenseState, paulis: np.ndarray) -> np.ndarray:
    """Contract rho with a (m, 2, 2) Pauli stack on every qubit -> (m,)*n."""
    n = state.n
    cur = state.rho.reshape((2,) * (2 * n))
    for k in range(n):
        remaining = n - k
        cur = np.tensordot(cur, paulis, axes=([0, remaining], [2, 1]))
    imag = float(np.max(np.abs(cur.imag))) if np.iscomplexobj(cur) else 0.0
    if imag > 1e-12:
        raise ParameterError(f"imaginary residue {imag:.3e} in the correlation tensor")
    return np.ascontiguousarray(cur.real)


@dataclass
class CorrelationTensor:
    """All Pauli correlations T[i_1 .. i_n] = Tr(rho sigma_{i_1} x ... x sigma_{i_n}).

    Eager tensors hold the full (4,)*n array; lazy ones (n above the cap)
    evaluate entries on demand and memoise them. Entry evaluation is
    idempotent, so concurrent fills are safe.
    """

    n: int
    full: np.ndarray | None = None
    _entries: dict = field(default_factory=dict)
    _state: DenseState | None = None
    _bloch: np.ndarray | None = None

    @property
    def eager(self) -> bool:
        return self.full is not None

    def entry(self, idx: Sequence[int]) -> float:
        idx = tuple(int(i) for i in idx)
        if len(idx) != self.n:
            raise ParameterError(f"index length {len(idx)} does not match n={self.n}")
        if self.full is not None:
            return float(self.full[idx])
        if idx not in self._entries:
            self._entries[idx] = expectation(self._state, idx)
        return self._entries[idx]

    def bloch(self) -> np.ndarray:
        """The (3,)*n block with indices restricted to 1..3 (what rotations mix)."""
        if self._bloch is None:
            if self.full is not None:
                self._bloch = np.ascontiguousarray(self.full[(slice(1, 4),) * self.n])
            else:
                self._bloch = _contract_full_tensor(self._state, SIGMA_STACK[1:])
        return self._bloch

    def diagonal_triple(self) -> CorrelationTriple:
        return CorrelationTriple(*(self.entry((j,) * self.n) for j in (1, 2, 3)))

    def is_symmetric(self, atol: float = 1e-10) -> bool:
        """True when every transposition of tensor modes leaves it unchanged.

        Adjacent-transposition checks suffice to generate the full symmetric
        group; uses the bloch block plus the mixed identity blocks.
        """
        if self.full is not None:
            t = self.full
        else:
            t = self.bloch()
        for k in range(self.n - 1):
            axes = list(range(self.n))
            axes[k], axes[k + 1] = axes[k + 1], axes[k]
            if not np.allclose(t, np.transpose(t, axes), atol=atol):
                return False
        return True


def correlation_tensor(
    state: DenseState, *, mode: str = "auto", eager_cap: int = EAGER_TENSOR_CAP
) -> CorrelationTensor:
    """Full correlation tensor; eager below the cap, per-entry lazy above.

    ``mode`` is "auto", "eager" or "lazy"; eager above the cap raises.
    """
    if mode not in ("auto", "eager", "lazy"):
        raise ParameterError(f"unknown tensor mode {mode!r}")
    eager = (mode == "eager") or (mode == "auto" and state.n <= eager_cap)
    if eager:
        if state.n > eager_cap:
            raise CapacityError(
                f"eager tensor needs 4^{state.n} entries; cap is n={eager_cap}"
            )
        full = _contract_full_tensor(state, SIGMA_STACK)
        zeros = (0,) * state.n
        if abs(full[zeros] - 1) > 1e-10:
            raise ParameterError(f"trace entry is {full[zeros]}, expected 1")
        return CorrelationTensor(state.n, full=full)
    return CorrelationTensor(state.n, _state=state)


# -- local rotations ----------------------------------------------------------

def su2_from_angles(angles: Sequence[float]) -> np.ndarray:
    """The single-qubit unitary parameterised by (theta, psi, phi)."""
    theta, psi, phi = angles
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c * np.exp(-0.5j * (psi + phi)), -1j * s * np.exp(-0.5j * (phi - psi))],
            [-1j * s * np.exp(0.5j * (phi - psi)), c * np.exp(0.5j * (psi + phi))],
        ]
    )


def so3_from_angles(angles: Sequence[float]) -> np.ndarray:
    """Image of the (theta, psi, phi) unitary under the adjoint map.

    Returns the orthogonal O with U (n.sigma) U^dag = (O n).sigma, so that
    rotating a state by U^{xn} turns the correlation tensor modes by O.
    """
    u = su2_from_angles(angles)
    o = np.empty((3, 3))
    for j in range(3):
        v = u @ SIGMA[j + 1] @ u.conj().T
        o[0, j] = v[0, 1].real
        o[1, j] = v[1, 0].imag
        o[2, j] = v[0, 0].real
    return o


def so3_to_angles(o: np.ndarray) -> tuple[float, float, float]:
    """Angles (theta, psi, phi) whose rotation matrix equals ``o``.

    Inverts the adjoint map through the quaternion lift; the returned triple
    satisfies so3_from_angles(angles) == o up to numerical noise.
    """
    o = np.asarray(o, dtype=float)
    if o.shape != (3, 3) or not np.allclose(o @ o.T, np.eye(3), atol=1e-8):
        raise ParameterError("not an orthogonal 3x3 matrix")
    if np.linalg.det(o) < 0:
        raise ParameterError("improper rotation (determinant -1) has no SU(2) lift")
    # quaternion (w, x, y, z) of the rotation, Shepperd's method
    tr = np.trace(o)
    cand = np.array([1 + tr, 1 + 2 * o[0, 0] - tr, 1 + 2 * o[1, 1] - tr, 1 + 2 * o[2, 2] - tr])
    k = int(np.argmax(cand))
    s = math.sqrt(max(cand[k], 0.0))
    if k == 0:
        w = s / 2
        x = (o[2, 1] - o[1, 2]) / (2 * s)
        y = (o[0, 2] - o[2, 0]) / (2 * s)
        z = (o[1, 0] - o[0, 1]) / (2 * s)
    elif k == 1:
        x = s / 2
        w = (o[2, 1] - o[1, 2]) / (2 * s)
        y = (o[0, 1] + o[1, 0]) / (2 * s)
        z = (o[0, 2] + o[2, 0]) / (2 * s)
    elif k == 2:
        y = s / 2
        w = (o[0, 2] - o[2, 0]) / (2 * s)
        x = (o[0, 1] + o[1, 0]) / (2 * s)
        z = (o[1, 2] + o[2, 1]) / (2 * s)
    else:
        z = s / 2
        w = (o[1, 0] - o[0, 1]) / (2 * s)
        x = (o[0, 2] + o[2, 0]) / (2 * s)
        y = (o[1, 2] + o[2, 1]) / (2 * s)
    # U = w I - i (x s1 + y s2 + z s3); match against the angle template
    theta = 2 * math.atan2(math.hypot(x, y), math.hypot(w, z))
    half_sum = math.atan2(z, w) if math.hypot(w, z) > 1e-15 else 0.0
    half_diff = math.atan2(y, x) if math.hypot(x, y) > 1e-15 else 0.0
    phi = (half_sum + half_diff) % _TWO_PI
    psi = (half_sum - half_diff) % _TWO_PI
    return (theta, psi, phi)


def _check_angles(angles: Sequence[float]) -> tuple[float, float, float]:
    if len(angles) != 3:
        raise ParameterError(f"an angle triple needs 3 entries, got {len(angles)}")
    theta, psi, phi = (float(a) for a in angles)
    if not -1e-12 <= theta <= math.pi + 1e-12:
        raise ParameterError(f"theta must lie in [0, pi], got {theta}")
    for name, a in (("psi", psi), ("phi", phi)):
        if not -1e-12 <= a < _TWO_PI + 1e-12:
            raise ParameterError(f"{name} must lie in [0, 2pi), got {a}")
    return (theta, psi, phi)


@dataclass(frozen=True)
class LocalRotation:
    """Per-qubit rotation angles (theta, psi, phi), optionally shared.

    A shared rotation stores a single triple applied to every qubit.
    """

    angles: tuple
    shared: bool = False

    def __post_init__(self):
        angles = tuple(_check_angles(a) for a in self.angles)
        if self.shared and len(angles) != 1:
            raise ParameterError("a shared rotation carries exactly one angle triple")
        if not angles:
            raise ParameterError("at least one angle triple is required")
        object.__setattr__(self, "angles", angles)

    @classmethod
    def identity(cls) -> "LocalRotation":
        return cls(((0.0, 0.0, 0.0),), shared=True)

    @classmethod
    def from_shared(cls, angles: Sequence[float]) -> "LocalRotation":
        return cls((tuple(angles),), shared=True)

    @classmethod
    def from_per_qubit(cls, angle_list: Iterable[Sequence[float]]) -> "LocalRotation":
        return cls(tuple(tuple(a) for a in angle_list), shared=False)

    def triples_for(self, n: int) -> tuple:
        if self.shared:
            return self.angles * n
        if len(self.angles) != n:
            raise ParameterError(
                f"rotation has {len(self.angles)} angle triples but the state has {n} qubits"
            )
        return self.angles

    def orthogonals(self, n: int) -> list[np.ndarray]:
        return [so3_from_angles(a) for a in self.triples_for(n)]

    def unitaries(self, n: int) -> list[np.ndarray]:
        return [su2_from_angles(a) for a in self.triples_for(n)]


def _contract_rows(bloch: np.ndarray, rows: Sequence[np.ndarray]) -> float:
    """Contract every mode of the (3,)*n tensor with one 3-vector per qubit."""
    cur = bloch
    for r in rows:
        cur = np.tensordot(r, cur, axes=(0, 0))
    return float(cur)


def rotated_triple(tensor: CorrelationTensor, rot: LocalRotation) -> CorrelationTriple:
    """Diagonal entries of the rotated tensor, (T~_{1..1}, T~_{2..2}, T~_{3..3}).

    Computed by mode-k contraction, O(n 3^n) instead of a dense conjugation.
    """
    os = [so3_from_angles(a) for a in rot.triples_for(tensor.n)]
    bloch = tensor.bloch()
    values = [_contract_rows(bloch, [o[i] for o in os]) for i in range(3)]
    clipped = [min(1.0, max(-1.0, v)) for v in values]
    return CorrelationTriple(*clipped)


__all__ = [
    "EAGER_TENSOR_CAP",
    "CorrelationTensor",
    "LocalRotation",
    "correlation_tensor",
    "correlation_triple",
    "expectation",
    "rotated_triple",
    "so3_from_angles",
    "so3_to_angles",
    "su2_from_angles",
]
