"""Distance functionals and closed-form multiparticle-entanglement values.

Covers the five distances (relative entropy, trace, infidelity, squared
Bures, squared Hellinger), the closed forms for triple-correlation states
(exact for even n under every distance, and for odd n under trace),
the genuine-entanglement closed form for GHZ-diagonal states, separability
classification, and closest-separable-state constructions.

Logarithms are base 2 throughout, with 0*log(0) = 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._linalg import hermitian_sqrt
from .errors import (
    AlreadySeparableError,
    ParameterError,
    UnsupportedDistanceError,
)
from .locc import GHZDiagonalState
from .qstate import CorrelationTriple, DenseState, M3NState

_EIG_ZERO = 1e-12
_SUPPORT_TOL = 1e-9
_SEP_TOL = 1e-12


class DistanceKind(str, enum.Enum):
    """The five contractive, jointly convex distances with closed forms."""

    RELATIVE_ENTROPY = "relative_entropy"
    TRACE = "trace"
    INFIDELITY = "infidelity"
    SQUARED_BURES = "squared_bures"
    SQUARED_HELLINGER = "squared_hellinger"

    @classmethod
    def parse(cls, text: str) -> "DistanceKind":
        key = text.strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "re": cls.RELATIVE_ENTROPY,
            "relative_entropy": cls.RELATIVE_ENTROPY,
            "tr": cls.TRACE,
            "trace": cls.TRACE,
            "f": cls.INFIDELITY,
            "infidelity": cls.INFIDELITY,
            "b": cls.SQUARED_BURES,
            "bures": cls.SQUARED_BURES,
            "squared_bures": cls.SQUARED_BURES,
            "h": cls.SQUARED_HELLINGER,
            "hellinger": cls.SQUARED_HELLINGER,
            "squared_hellinger": cls.SQUARED_HELLINGER,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ParameterError(
                f"unknown distance {text!r}; choose from "
                "relative_entropy, trace, infidelity, squared_bures, squared_hellinger"
            )


ALL_DISTANCES = tuple(DistanceKind)


@dataclass(frozen=True)
class SeparabilityLevel:
    """Either a partition-independent level M or an explicit partition.

    The partition is a multiset of group sizes; which qubits sit in which
    group never matters for the reference families.
    """

    m: int | None = None
    partition: tuple | None = None

    def __post_init__(self):
        if (self.m is None) == (self.partition is None):
            raise ParameterError("give exactly one of M or a partition")
        if self.m is not None:
            if self.m < 2:
                raise ParameterError(f"M must be >= 2, got {self.m}")
        else:
            parts = tuple(int(k) for k in self.partition)
            if len(parts) < 2 or any(k < 1 for k in parts):
                raise ParameterError(f"a partition needs >= 2 parts of size >= 1, got {parts}")
            object.__setattr__(self, "partition", parts)

    @classmethod
    def global_level(cls, n: int) -> "SeparabilityLevel":
        return cls(m=n)

    @classmethod
    def genuine(cls) -> "SeparabilityLevel":
        return cls(m=2)

    def check_for(self, n: int) -> None:
        if self.m is not None:
            if self.m > n:
                raise ParameterError(f"M={self.m} exceeds the qubit count {n}")
        elif sum(self.partition) != n:
            raise ParameterError(
                f"partition {self.partition} sums to {sum(self.partition)}, not n={n}"
            )

    def is_trivial(self, n: int) -> bool:
        """True when every triple-correlation state is separable at this level.

        Partition-independent: M <= ceil(n/2). Partition-dependent: at most
        one odd group size.
        """
        self.check_for(n)
        if self.m is not None:
            return self.m <= math.ceil(n / 2)
        odd = sum(1 for k in self.partition if k % 2)
        return odd <= 1

    def to_json_dict(self) -> dict:
        if self.m is not None:
            return {"M": self.m}
        return {"partition": list(self.partition)}


@dataclass(frozen=True)
class EntanglementReport:
    """A single entanglement figure with its defining choices."""

    value: float
    distance: DistanceKind
    level: SeparabilityLevel
    kind: str  # "exact" | "lower_bound"
    uncertainty: float | None = None
    meta: dict | None = None

    def __post_init__(self):
        if self.value < 0:
            raise ParameterError(f"entanglement value must be >= 0, got {self.value}")
        if self.kind not in ("exact", "lower_bound"):
            raise ParameterError(f"kind must be 'exact' or 'lower_bound', got {self.kind!r}")
        if self.uncertainty is not None and self.uncertainty < 0:
            raise ParameterError(f"uncertainty must be >= 0, got {self.uncertainty}")

    def to_json_dict(self) -> dict:
        out = {"value": self.value, "distance": self.distance.value}
        out.update(self.level.to_json_dict())
        out["kind"] = self.kind
        if self.uncertainty is not None:
            out["uncertainty"] = self.uncertainty
        if self.meta:
            out["meta"] = dict(self.meta)
        return out


# -- scalar closed forms -------------------------------------------------------

def _xlog2(x: float) -> float:
    return 0.0 if x <= 0 else x * math.log2(x)


def octahedron_excess(c: CorrelationTriple) -> float:
    """Half the amount by which |c1|+|c2|+|c3| exceeds the separability octahedron.

    Positive exactly when the triple lies outside the octahedron; equals the
    two-qubit concurrence for n = 2. Range [-1/2, 1].
    """
    return 0.5 * (c.abs_sum - 1.0)


def entanglement_from_excess(h: float, kind: DistanceKind) -> float:
    """Even-n entanglement of a triple-correlation state as a function of the excess.

    Defined for h in (0, 1]; callers short-circuit h <= 0 to zero.
    """
    if h <= 0:
        raise ParameterError(f"the closed form needs h > 0, got {h}")
    if h > 1 + 1e-12:
        raise ParameterError(f"h cannot exceed 1, got {h}")
    h = min(h, 1.0)
    if kind is DistanceKind.RELATIVE_ENTROPY:
        return 0.5 * (_xlog2(1 - h) + _xlog2(1 + h))
    if kind is DistanceKind.TRACE:
        return 0.5 * h
    if kind is DistanceKind.INFIDELITY:
        return 0.5 * (1 - math.sqrt(1 - h * h))
    # squared Bures and squared Hellinger coincide here
    return 2 - math.sqrt(1 - h) - math.sqrt(1 + h)


def excess_derivative(h: float, kind: DistanceKind) -> float:
    """d/dh of entanglement_from_excess, for first-order error propagation."""
    if not 0 < h < 1:
        raise ParameterError(f"the derivative needs h in (0, 1), got {h}")
    if kind is DistanceKind.RELATIVE_ENTROPY:
        return 0.5 * math.log2((1 + h) / (1 - h))
    if kind is DistanceKind.TRACE:
        return 0.5
    if kind is DistanceKind.INFIDELITY:
        return 0.5 * h / math.sqrt(1 - h * h)
    return 0.5 / math.sqrt(1 - h) - 0.5 / math.sqrt(1 + h)


def genuine_from_overlap(p_max: float, kind: DistanceKind) -> float:
    """Genuine entanglement of a GHZ-diagonal state from its largest eigenvalue.

    Defined for p_max in (1/2, 1]; callers short-circuit p_max <= 1/2 to zero.
    """
    if p_max <= 0.5:
        raise ParameterError(f"the closed form needs p_max > 1/2, got {p_max}")
    if p_max > 1 + 1e-12:
        raise ParameterError(f"p_max cannot exceed 1, got {p_max}")
    p = min(p_max, 1.0)
    if kind is DistanceKind.RELATIVE_ENTROPY:
        return 1 + _xlog2(p) + _xlog2(1 - p)
    if kind is DistanceKind.TRACE:
        return p - 0.5
    if kind is DistanceKind.INFIDELITY:
        return 0.5 - math.sqrt(p * (1 - p))
    return 2 - math.sqrt(2) * (math.sqrt(1 - p) + math.sqrt(p))


def overlap_derivative(p_max: float, kind: DistanceKind) -> float:
    """d/dp of genuine_from_overlap, for first-order error propagation."""
    if not 0.5 < p_max < 1:
        raise ParameterError(f"the derivative needs p_max in (1/2, 1), got {p_max}")
    p = p_max
    if kind is DistanceKind.RELATIVE_ENTROPY:
        return math.log2(p / (1 - p))
    if kind is DistanceKind.TRACE:
        return 1.0
    if kind is DistanceKind.INFIDELITY:
        return (2 * p - 1) / (2 * math.sqrt(p * (1 - p)))
    return (1 / math.sqrt(1 - p) - 1 / math.sqrt(p)) / math.sqrt(2)


# -- separability classification and closest states ---------------------------

def is_separable_m3n(state: M3NState, level: SeparabilityLevel) -> bool:
    """Whether a triple-correlation state is separable at the given level."""
    if level.is_trivial(state.n):
        return True
    return state.c.abs_sum <= 1 + _SEP_TOL


def _corner_barycentric(c: CorrelationTriple) -> tuple[float, float, float]:
    """Barycentric weights (p, q, r) of a corner state w.r.t. its face triangle.

    Works on magnitudes only; the corner's sign pattern is handled by the
    caller. The three weights are nonnegative exactly when the triple is
    physical, and p + q + r = 1.
    """
    a, b, d = abs(c.c1), abs(c.c2), abs(c.c3)
    delta = 3.0 - (a + b + d)
    if delta < 1e-12:
        return (1 / 3, 1 / 3, 1 / 3)
    p = (1 - a - b + d) / delta
    q = (1 - a + b - d) / delta
    r = (1 + a - b - d) / delta
    return (max(p, 0.0), max(q, 0.0), max(r, 0.0))


def closest_separable_even(state: M3NState, level: SeparabilityLevel) -> M3NState:
    """The face state closest to an even-n triple under every valid distance.

    It sits on the octahedron face bounding the state's tetrahedron corner,
    on the line through the corner vertex.
    """
    if state.n % 2:
        raise ParameterError("the common closest state exists only for even n")
    if level.is_trivial(state.n):
        raise ParameterError(f"level {level} is trivial for n={state.n}")
    if octahedron_excess(state.c) <= 0:
        raise AlreadySeparableError(f"triple {tuple(state.c)} is already separable")
    signs = [1.0 if x >= 0 else -1.0 for x in state.c]
    p, q, r = _corner_barycentric(state.c)
    out = CorrelationTriple(signs[0] * r, signs[1] * q, signs[2] * p)
    return M3NState(state.n, out)


def closest_separable_odd_trace(state: M3NState) -> M3NState:
    """Euclidean projection of an odd-n triple onto the octahedron boundary.

    The trace distance between odd-n triple-correlation states is half the
    Euclidean distance between their triples, so this is the closest
    separable state under trace distance. Triples on the boundary are
    returned unchanged; interior triples raise.
    """
    if state.n % 2 == 0:
        raise ParameterError("the Euclidean projection applies to odd n")
    c = state.c.as_array()
    total = float(np.sum(np.abs(c)))
    if total < 1 - _SEP_TOL:
        raise AlreadySeparableError(f"triple {tuple(state.c)} is inside the octahedron")
    if total <= 1 + _SEP_TOL:
        return state
    signs = np.where(c >= 0, 1.0, -1.0)
    mags = np.abs(c)
    face = (1 - total + 3 * mags) / 3
    if np.all(face >= -_SEP_TOL) and np.all(face <= 1 + _SEP_TOL):
        s = signs * np.clip(face, 0.0, 1.0)
        return M3NState(state.n, CorrelationTriple(*s))
    # edge case: drop the axis with the smallest projected distance
    reduced = total - mags  # sum over j != i of |c_j|
    f = np.sqrt(mags**2 + (1 - reduced) ** 2 / 2)
    k = int(np.argmin(f))
    s = np.zeros(3)
    for i in range(3):
        if i != k:
            s[i] = signs[i] * (1 - (total - mags[k] - mags[i]) + mags[i]) / 2
    s = np.clip(np.abs(s), 0.0, 1.0) * np.where(s >= 0, 1.0, -1.0)
    return M3NState(state.n, CorrelationTriple(*s))


def _odd_trace_value(c: CorrelationTriple) -> float:
    """The three-branch odd-n trace formula on a triple with positive excess."""
    h = octahedron_excess(c)
    mags = np.abs(c.as_array())
    if np.all(h <= 1.5 * mags):
        return h / math.sqrt(3)
    vals = 0.5 * np.sqrt(mags**2 + 0.5 * (2 * h - mags) ** 2)
    return float(np.min(vals))


def entanglement_m3n(
    state: M3NState, level: SeparabilityLevel, kind: DistanceKind
) -> EntanglementReport:
    """Exact entanglement of a triple-correlation state at a separability level.

    Even n: zero at trivial levels or nonpositive excess, else the closed form
    for the chosen distance. Odd n: only trace distance is supported (the
    closest state is distance-dependent otherwise); three-branch formula.
    """
    level.check_for(state.n)
    if state.n % 2 and kind is not DistanceKind.TRACE:
        raise UnsupportedDistanceError(
            f"odd n has no common closest separable state; only trace distance is "
            f"exact, got {kind.value}"
        )
    h = octahedron_excess(state.c)
    if level.is_trivial(state.n) or h <= 0:
        value = 0.0
    elif state.n % 2 == 0:
        value = entanglement_from_excess(h, kind)
    else:
        value = _odd_trace_value(state.c)
    return EntanglementReport(value, kind, level, "exact")


def lower_bound_from_triple(
    c: CorrelationTriple,
    n: int,
    level: SeparabilityLevel,
    kind: DistanceKind,
    *,
    validate_region: bool = True,
) -> EntanglementReport:
    """Accessible lower bound for any state with the given correlation triple.

    Same value as the exact formula on the matching triple-correlation state,
    reported with kind "lower_bound". ``validate_region=False`` skips the
    physical-region check so statistically perturbed triples (bootstrap
    resamples) can be evaluated.
    """
    if validate_region:
        report = entanglement_m3n(M3NState(n, c), level, kind)
        return EntanglementReport(report.value, kind, level, "lower_bound")
    level.check_for(n)
    if n % 2 and kind is not DistanceKind.TRACE:
        raise UnsupportedDistanceError("odd n supports only the trace distance")
    h = octahedron_excess(c)
    if level.is_trivial(n) or h <= 0:
        value = 0.0
    elif n % 2 == 0:
        value = entanglement_from_excess(h, kind)
    else:
        value = _odd_trace_value(c)
    return EntanglementReport(value, kind, level, "lower_bound")


def genuine_ghz_diag(state: GHZDiagonalState, kind: DistanceKind) -> EntanglementReport:
    """Exact genuine entanglement of a GHZ-diagonal state.

    Zero when the largest eigenvalue is at most 1/2, else a monotone function
    of that eigenvalue alone.
    """
    p = state.p_max
    value = 0.0 if p <= 0.5 else genuine_from_overlap(p, kind)
    return EntanglementReport(value, kind, SeparabilityLevel.genuine(), "exact")


# -- distances -----------------------------------------------------------------

def _clean_spectrum(w: np.ndarray) -> np.ndarray:
    if w.min() < -1e-9:
        raise ParameterError(f"matrix is not PSD: eigenvalue {w.min():.3e}")
    return np.clip(w, 0.0, None)


def matrix_distance(a: DenseState, b: DenseState, kind: DistanceKind) -> float:
    """One of the five distances between two density matrices.

    Relative entropy returns ``math.inf`` when the support of ``a`` is not
    contained in the support of ``b``.
    """
    if a.n != b.n:
        raise ParameterError(f"qubit counts differ: {a.n} vs {b.n}")
    if kind is DistanceKind.TRACE:
        w = np.linalg.eigvalsh(a.rho - b.rho)
        return 0.5 * float(np.sum(np.abs(w)))
    if kind is DistanceKind.RELATIVE_ENTROPY:
        wa = _clean_spectrum(np.linalg.eigvalsh(a.rho))
        wb, vb = np.linalg.eigh(b.rho)
        wb = _clean_spectrum(wb)
        overlaps = np.real(np.einsum("ij,jk,ki->i", vb.conj().T, a.rho, vb))
        overlaps = np.clip(overlaps, 0.0, None)
        null = wb <= _EIG_ZERO
        if float(np.sum(overlaps[null])) > _SUPPORT_TOL:
            return math.inf
        ent_a = float(np.sum([_xlog2(x) for x in wa]))
        cross = float(np.sum(overlaps[~null] * np.log2(wb[~null])))
        return max(ent_a - cross, 0.0)
    if kind is DistanceKind.SQUARED_HELLINGER:
        sa = hermitian_sqrt(a.rho)
        sb = hermitian_sqrt(b.rho)
        affinity = float(np.real(np.trace(sa @ sb)))
        return max(2.0 * (1.0 - affinity), 0.0)
    # infidelity and squared Bures both go through the Uhlmann fidelity
    sa = hermitian_sqrt(a.rho)
    w = _clean_spectrum(np.linalg.eigvalsh(sa @ b.rho @ sa))
    root_f = min(float(np.sum(np.sqrt(w))), 1.0)
    if kind is DistanceKind.INFIDELITY:
        return max(1.0 - root_f * root_f, 0.0)
    return max(2.0 * (1.0 - root_f), 0.0)


def classical_distance(p, q, kind: DistanceKind) -> float:
    """The classical counterpart of each distance on probability vectors.

    Matches matrix_distance on commuting density matrices.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ParameterError(f"need two equal-length vectors, got {p.shape} and {q.shape}")
    for name, v in (("p", p), ("q", q)):
        if v.min() < -1e-12:
            raise ParameterError(f"{name} has a negative entry {v.min():.3e}")
        if abs(v.sum() - 1) > 1e-9:
            raise ParameterError(f"{name} sums to {v.sum()}, expected 1")
    p = np.clip(p, 0.0, None)
    q = np.clip(q, 0.0, None)
    if kind is DistanceKind.TRACE:
        return 0.5 * float(np.sum(np.abs(p - q)))
    if kind is DistanceKind.RELATIVE_ENTROPY:
        support = p > 0
        if np.any(q[support] <= 0):
            return math.inf
        return max(float(np.sum(p[support] * np.log2(p[support] / q[support]))), 0.0)
    root_f = float(np.sum(np.sqrt(p * q)))
    if kind is DistanceKind.INFIDELITY:
        return max(1.0 - root_f * root_f, 0.0)
    # squared Bures and squared Hellinger coincide classically
    return max(2.0 * (1.0 - root_f), 0.0)


__all__ = [
    "ALL_DISTANCES",
    "DistanceKind",
    "EntanglementReport",
    "SeparabilityLevel",
    "classical_distance",
    "closest_separable_even",
    "closest_separable_odd_trace",
    "entanglement_from_excess",
    "entanglement_m3n",
    "excess_derivative",
    "genuine_from_overlap",
    "genuine_ghz_diag",
    "is_separable_m3n",
    "lower_bound_from_triple",
    "matrix_distance",
    "octahedron_excess",
    "overlap_derivative",
]
