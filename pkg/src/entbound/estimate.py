"""Measurement data to entanglement bounds with propagated uncertainty.

Simulates the three-setting local-measurement protocol, turns shot counts
into correlation estimates with standard errors, and propagates those errors
through the bound formulas: first-order delta method on the active branch,
with a parametric bootstrap fallback near the non-smooth points (the zero
threshold, sign kinks, odd-n branch switches, and the diverging endpoints).

Correlation-data files are JSON ``{"n": 4, "c": [..], "sigma": [..]}`` or CSV
with header ``n,c1,c2,c3,s1,s2,s3``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from ._linalg import apply_product_unitary
from .errors import CapacityError, ParameterError, SchemaError
from .measures import (
    DistanceKind,
    EntanglementReport,
    SeparabilityLevel,
    excess_derivative,
    genuine_from_overlap,
    lower_bound_from_triple,
    octahedron_excess,
    overlap_derivative,
)
from .pauli import LocalRotation
from .qstate import DEFAULT_DENSE_CAP, CorrelationTriple, DenseState

#: basis changes mapping the eigenbasis of sigma_j to the computational basis
_BASIS_CHANGE = {
    1: np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    2: np.array([[1, -1j], [1, 1j]], dtype=complex) / math.sqrt(2),
    3: np.eye(2, dtype=complex),
}

_DEFAULT_BOOTSTRAP = 10_000


@dataclass(frozen=True)
class MeasurementRecord:
    """Shot counts for one product-Pauli setting.

    Outcome strings use '+' and '-' per qubit; counts must add up to shots.
    """

    n: int
    axis: int
    shots: int
    counts: dict
    rotation: LocalRotation | None = None

    def __post_init__(self):
        if self.axis not in (1, 2, 3):
            raise ParameterError(f"axis must be 1, 2 or 3, got {self.axis}")
        if self.shots < 1:
            raise ParameterError(f"shots must be >= 1, got {self.shots}")
        total = 0
        for key, cnt in self.counts.items():
            if len(key) != self.n or any(ch not in "+-" for ch in key):
                raise ParameterError(f"malformed outcome string {key!r} for n={self.n}")
            if cnt < 0:
                raise ParameterError(f"negative count for outcome {key!r}")
            total += cnt
        if total != self.shots:
            raise ParameterError(f"counts sum to {total}, expected shots={self.shots}")
        object.__setattr__(self, "counts", dict(self.counts))

    def products(self) -> tuple[np.ndarray, np.ndarray]:
        """Outcome products (+/-1) and their counts, aligned arrays."""
        keys = sorted(self.counts)
        prods = np.array([np.prod([1 if ch == "+" else -1 for ch in k]) for k in keys], dtype=float)
        cnts = np.array([self.counts[k] for k in keys], dtype=float)
        return prods, cnts


@dataclass(frozen=True)
class TripleEstimate:
    """A correlation triple with one standard error per component."""

    c: CorrelationTriple
    sigma: tuple
    n: int | None = None

    def __post_init__(self):
        sigma = tuple(float(s) for s in self.sigma)
        if len(sigma) != 3 or any(s < 0 for s in sigma):
            raise ParameterError(f"sigma needs 3 nonnegative entries, got {self.sigma}")
        object.__setattr__(self, "sigma", sigma)

    def to_json_dict(self) -> dict:
        out = {"c": [self.c.c1, self.c.c2, self.c.c3], "sigma": list(self.sigma)}
        if self.n is not None:
            out["n"] = self.n
        return out


def simulate_measurements(
    state: DenseState,
    rot: LocalRotation | None,
    shots: int,
    seed: int,
    *,
    dense_cap: int = DEFAULT_DENSE_CAP,
) -> tuple[MeasurementRecord, MeasurementRecord, MeasurementRecord]:
    """Sample the three-setting protocol from the Born distribution.

    Setting j measures the rotated Pauli on every qubit; outcomes are
    deterministic for a fixed seed.
    """
    if state.n > dense_cap:
        raise CapacityError(f"n={state.n} exceeds the dense cap {dense_cap}")
    if shots < 1:
        raise ParameterError(f"shots must be >= 1, got {shots}")
    n = state.n
    us = rot.unitaries(n) if rot is not None else [np.eye(2, dtype=complex)] * n
    rng = np.random.default_rng(seed)
    records = []
    for axis in (1, 2, 3):
        ws = [_BASIS_CHANGE[axis] @ u for u in us]
        probs = np.real(np.diagonal(apply_product_unitary(np.array(state.rho), ws, n)))
        probs = np.clip(probs, 0.0, None)
        probs /= probs.sum()
        drawn = rng.multinomial(shots, probs)
        counts = {}
        for idx in np.nonzero(drawn)[0]:
            bits = format(idx, f"0{n}b")
            key = "".join("+" if b == "0" else "-" for b in bits)
            counts[key] = int(drawn[idx])
        records.append(MeasurementRecord(n, axis, shots, counts, rotation=rot))
    return tuple(records)


def counts_to_triple(records) -> TripleEstimate:
    """Sample means of the outcome products, with standard errors.

    sigma_j is the sample standard deviation of the products over sqrt(shots).
    """
    records = list(records)
    if len(records) != 3:
        raise ParameterError(f"need exactly three records, got {len(records)}")
    if len({r.n for r in records}) != 1:
        raise ParameterError("records disagree on the qubit count")
    if sorted(r.axis for r in records) != [1, 2, 3]:
        raise ParameterError("need one record per axis 1, 2, 3")
    cs, sigmas = [0.0] * 3, [0.0] * 3
    for rec in records:
        prods, cnts = rec.products()
        if cnts.sum() == 0:
            raise ParameterError("record has no counts")
        mean = float(np.sum(prods * cnts) / rec.shots)
        if rec.shots > 1:
            var = float(np.sum(cnts * (prods - mean) ** 2) / (rec.shots - 1))
        else:
            var = 0.0
        cs[rec.axis - 1] = mean
        sigmas[rec.axis - 1] = math.sqrt(max(var, 0.0) / rec.shots)
    return TripleEstimate(CorrelationTriple(*cs), tuple(sigmas), n=records[0].n)


# -- vectorised bound formulas for the bootstrap --------------------------------

def _excess_values_vec(h: np.ndarray, kind: DistanceKind) -> np.ndarray:
    h = np.clip(h, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is DistanceKind.RELATIVE_ENTROPY:
            lo = np.where(h < 1, (1 - h) * np.log2(np.maximum(1 - h, 1e-300)), 0.0)
            return 0.5 * (lo + (1 + h) * np.log2(1 + h))
        if kind is DistanceKind.TRACE:
            return 0.5 * h
        if kind is DistanceKind.INFIDELITY:
            return 0.5 * (1 - np.sqrt(np.clip(1 - h * h, 0.0, None)))
        return 2 - np.sqrt(np.clip(1 - h, 0.0, None)) - np.sqrt(1 + h)


def _odd_trace_values_vec(c: np.ndarray) -> np.ndarray:
    mags = np.abs(c)
    h = 0.5 * (mags.sum(axis=1) - 1)
    face = np.all(h[:, None] <= 1.5 * mags, axis=1)
    edge_vals = 0.5 * np.sqrt(mags**2 + 0.5 * (2 * h[:, None] - mags) ** 2)
    vals = np.where(face, h / math.sqrt(3), edge_vals.min(axis=1))
    return np.where(h > 0, vals, 0.0)


def _bound_values_vec(
    c: np.ndarray, n: int, level: SeparabilityLevel, kind: DistanceKind
) -> np.ndarray:
    if level.is_trivial(n):
        return np.zeros(c.shape[0])
    if n % 2:
        return _odd_trace_values_vec(c)
    h = 0.5 * (np.abs(c).sum(axis=1) - 1)
    return np.where(h > 0, _excess_values_vec(h, kind), 0.0)


def _overlap_values_vec(p: np.ndarray, kind: DistanceKind) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is DistanceKind.RELATIVE_ENTROPY:
            t1 = np.where(p > 0, p * np.log2(np.maximum(p, 1e-300)), 0.0)
            t2 = np.where(p < 1, (1 - p) * np.log2(np.maximum(1 - p, 1e-300)), 0.0)
            vals = 1 + t1 + t2
        elif kind is DistanceKind.TRACE:
            vals = p - 0.5
        elif kind is DistanceKind.INFIDELITY:
            vals = 0.5 - np.sqrt(np.clip(p * (1 - p), 0.0, None))
        else:
            vals = 2 - math.sqrt(2) * (np.sqrt(np.clip(1 - p, 0.0, None)) + np.sqrt(p))
    return np.where(p > 0.5, vals, 0.0)


# -- delta method ----------------------------------------------------------------

def _odd_trace_gradient(c: CorrelationTriple) -> np.ndarray:
    """Gradient of the odd-n trace formula on its active branch."""
    mags = np.abs(c.as_array())
    signs = np.where(c.as_array() >= 0, 1.0, -1.0)
    h = octahedron_excess(c)
    if np.all(h <= 1.5 * mags):
        return signs / (2 * math.sqrt(3))
    vals = 0.5 * np.sqrt(mags**2 + 0.5 * (2 * h - mags) ** 2)
    k = int(np.argmin(vals))
    u = mags[k]
    v = 2 * h - u
    s = math.sqrt(u * u + v * v / 2)
    grad = np.zeros(3)
    for j in range(3):
        if j == k:
            grad[j] = signs[j] * u / (2 * s)
        else:
            grad[j] = signs[j] * v / (4 * s)
    return grad


def _needs_bootstrap_triple(est: TripleEstimate, n: int) -> bool:
    c = est.c.as_array()
    sig = np.asarray(est.sigma)
    if np.all(sig == 0):
        return False
    h = octahedron_excess(est.c)
    sigma_h = 0.5 * math.sqrt(float(np.sum(sig**2)))
    if abs(h) <= 2 * sigma_h or h >= 1 - 2 * sigma_h:
        return True
    if np.any(np.abs(c) <= 2 * sig):
        return True
    if n % 2:
        mags = np.abs(c)
        for j in range(3):
            if abs(h - 1.5 * mags[j]) <= 2 * (sigma_h + 1.5 * sig[j]):
                return True
        vals = 0.5 * np.sqrt(mags**2 + 0.5 * (2 * h - mags) ** 2)
        order = np.sort(vals)
        if not np.all(h <= 1.5 * mags) and order[1] - order[0] <= 2 * sigma_h:
            return True
    return False


def bound_with_uncertainty(
    est: TripleEstimate,
    n: int,
    level: SeparabilityLevel,
    kind: DistanceKind,
    *,
    seed: int = 0,
    bootstrap_samples: int = _DEFAULT_BOOTSTRAP,
) -> EntanglementReport:
    """Lower bound from a measured triple with a propagated standard error.

    Uses the delta method on the active branch; switches to a parametric
    bootstrap (Gaussian per component, clipped to [-1, 1]) whenever the
    estimate sits within two standard errors of a kink or threshold.
    """
    base = lower_bound_from_triple(est.c, n, level, kind)
    sig = np.asarray(est.sigma, dtype=float)
    if level.is_trivial(n):
        return EntanglementReport(0.0, kind, level, "lower_bound", 0.0, {"method": "exact-zero"})

    if _needs_bootstrap_triple(est, n):
        rng = np.random.default_rng(seed)
        samples = rng.normal(est.c.as_array(), sig, size=(bootstrap_samples, 3))
        clipped = np.mean((samples < -1) | (samples > 1))
        samples = np.clip(samples, -1.0, 1.0)
        values = _bound_values_vec(samples, n, level, kind)
        unc = float(np.std(values, ddof=1))
        meta = {
            "method": "bootstrap",
            "seed": seed,
            "samples": bootstrap_samples,
            "clipped_fraction": float(clipped),
        }
        return EntanglementReport(base.value, kind, level, "lower_bound", unc, meta)

    h = octahedron_excess(est.c)
    if h <= 0 or np.all(sig == 0):
        unc = 0.0
    elif n % 2 == 0:
        unc = excess_derivative(h, kind) * 0.5 * math.sqrt(float(np.sum(sig**2)))
    else:
        grad = _odd_trace_gradient(est.c)
        unc = math.sqrt(float(np.sum((grad * sig) ** 2)))
    return EntanglementReport(base.value, kind, level, "lower_bound", unc, {"method": "delta"})


def genuine_bound_with_uncertainty(
    p_max: float,
    sigma: float,
    kind: DistanceKind,
    *,
    seed: int = 0,
    bootstrap_samples: int = _DEFAULT_BOOTSTRAP,
) -> EntanglementReport:
    """Genuine-entanglement lower bound from a measured GHZ overlap.

    Delta method away from the threshold; bootstrap near p_max = 1/2 (kink)
    and near p_max = 1 (diverging derivative for the non-trace distances).
    """
    if not 0 <= p_max <= 1:
        raise ParameterError(f"p_max must lie in [0, 1], got {p_max}")
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    level = SeparabilityLevel.genuine()
    value = 0.0 if p_max <= 0.5 else genuine_from_overlap(p_max, kind)

    near_kink = abs(p_max - 0.5) <= 2 * sigma or p_max >= 1 - 2 * sigma
    if sigma > 0 and near_kink:
        rng = np.random.default_rng(seed)
        samples = np.clip(rng.normal(p_max, sigma, size=bootstrap_samples), 0.0, 1.0)
        values = _overlap_values_vec(samples, kind)
        unc = float(np.std(values, ddof=1))
        meta = {"method": "bootstrap", "seed": seed, "samples": bootstrap_samples}
        return EntanglementReport(value, kind, level, "lower_bound", unc, meta)

    if sigma == 0 or p_max <= 0.5:
        unc = 0.0
    else:
        unc = overlap_derivative(min(p_max, 1 - 1e-12), kind) * sigma
    return EntanglementReport(value, kind, level, "lower_bound", unc, {"method": "delta"})


# -- file ingestion ----------------------------------------------------------------

def _parse_correlation_json(path) -> TripleEstimate:
    with open(path) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(spec, dict):
        raise SchemaError(f"{path}: top level must be an object")
    if "n" not in spec:
        raise SchemaError(f'{path}: missing field "n"')
    if "c" not in spec:
        raise SchemaError(f'{path}: missing field "c"')
    c = spec["c"]
    if not isinstance(c, list) or len(c) != 3:
        raise SchemaError(f'{path}: field "c" must be a list of 3 numbers, got {c!r}')
    sigma = spec.get("sigma", [0.0, 0.0, 0.0])
    if not isinstance(sigma, list) or len(sigma) != 3:
        raise SchemaError(f'{path}: field "sigma" must be a list of 3 numbers, got {sigma!r}')
    try:
        triple = CorrelationTriple.from_sequence(c)
        return TripleEstimate(triple, tuple(float(s) for s in sigma), n=int(spec["n"]))
    except (ParameterError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def _parse_correlation_csv(path) -> TripleEstimate:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty CSV")
    header = [h.strip() for h in rows[0]]
    if header[:4] != ["n", "c1", "c2", "c3"]:
        raise SchemaError(f"{path}: header must start with n,c1,c2,c3 got {header}")
    if len(rows) < 2:
        raise SchemaError(f"{path}: no data row")
    row = rows[1]
    if len(row) < 4:
        raise SchemaError(f"{path}: data row needs at least 4 columns, got {len(row)}")
    try:
        n = int(row[0])
        c = [float(x) for x in row[1:4]]
        sigma = [float(x) for x in row[4:7]] if len(row) >= 7 else [0.0, 0.0, 0.0]
        return TripleEstimate(CorrelationTriple.from_sequence(c), tuple(sigma), n=n)
    except (ParameterError, ValueError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def ingest_correlation_file(path) -> TripleEstimate:
    """Read a correlation-data file (JSON or CSV by extension)."""
    text = str(path)
    if text.endswith(".csv"):
        return _parse_correlation_csv(path)
    return _parse_correlation_json(path)


__all__ = [
    "MeasurementRecord",
    "TripleEstimate",
    "bound_with_uncertainty",
    "counts_to_triple",
    "genuine_bound_with_uncertainty",
    "ingest_correlation_file",
    "simulate_measurements",
]
