"""Brute-force verification of the closed formulas, plus proof-channel utilities.

The octahedron oracle minimises a matrix distance over a refined grid of
separable triples; the GHZ-diagonal oracle minimises a classical distance
over capped-simplex spectra. Neither touches the closed forms it checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ._linalg import ID2, SIGMA, apply_product_unitary, hermitian_sqrt, pauli_power
from .errors import CapacityError, ParameterError
from .locc import GHZBasisIndex, GHZDiagonalState, ghz_basis_vector
from .measures import DistanceKind, classical_distance, matrix_distance, octahedron_excess
from .qstate import CorrelationTriple, DenseState, M3NState, m3n_density

_ORACLE_DENSE_CAP = 5
_OMEGA_CAP = 6

_EIG_ZERO = 1e-12
_SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class OracleConfig:
    grid_resolution: int = 60
    refine_rounds: int = 3
    tolerance: float = 1e-6
    restarts: int = 6
    seed: int = 0

    def __post_init__(self):
        if self.grid_resolution < 4:
            raise ParameterError(f"grid_resolution must be >= 4, got {self.grid_resolution}")
        if self.refine_rounds < 0:
            raise ParameterError(f"refine_rounds must be >= 0, got {self.refine_rounds}")


# -- batched distances over m3n grids -------------------------------------------

def _batch_m3n(triples: np.ndarray, n: int) -> np.ndarray:
    """Dense matrices of many triples at once, shape (G, 2^n, 2^n)."""
    dim = 2**n
    paulis = np.stack([pauli_power(j, n) for j in (1, 2, 3)])
    out = np.einsum("gj,jab->gab", triples, paulis)
    out += np.eye(dim)[None, :, :]
    return out / dim


def _xlog2_vec(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log2(x[pos])
    return out


def _batch_distance(rho: np.ndarray, batch: np.ndarray, kind: DistanceKind) -> np.ndarray:
    """Distances from one state to a stack of states; matches matrix_distance."""
    if kind is DistanceKind.TRACE:
        w = np.linalg.eigvalsh(batch - rho[None])
        return 0.5 * np.sum(np.abs(w), axis=1)
    if kind is DistanceKind.RELATIVE_ENTROPY:
        wa = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
        ent_a = float(np.sum(_xlog2_vec(wa)))
        wb, vb = np.linalg.eigh(batch)
        wb = np.clip(wb, 0.0, None)
        overlaps = np.clip(np.real(np.einsum("gji,jk,gki->gi", vb.conj(), rho, vb)), 0.0, None)
        null = wb <= _EIG_ZERO
        leak = np.sum(np.where(null, overlaps, 0.0), axis=1)
        logs = np.where(null, 0.0, np.log2(np.where(null, 1.0, wb)))
        cross = np.sum(np.where(null, 0.0, overlaps) * logs, axis=1)
        vals = np.maximum(ent_a - cross, 0.0)
        vals[leak > _SUPPORT_TOL] = np.inf
        return vals
    if kind is DistanceKind.SQUARED_HELLINGER:
        sa = hermitian_sqrt(rho)
        wb, vb = np.linalg.eigh(batch)
        wb = np.sqrt(np.clip(wb, 0.0, None))
        sqrtb = np.einsum("gik,gk,gjk->gij", vb, wb, vb.conj())
        affinity = np.real(np.einsum("ij,gji->g", sa, sqrtb))
        return np.maximum(2.0 * (1.0 - affinity), 0.0)
    sa = hermitian_sqrt(rho)
    m = sa[None] @ batch @ sa[None]
    w = np.clip(np.linalg.eigvalsh(m), 0.0, None)
    root_f = np.minimum(np.sum(np.sqrt(w), axis=1), 1.0)
    if kind is DistanceKind.INFIDELITY:
        return np.maximum(1.0 - root_f**2, 0.0)
    return np.maximum(2.0 * (1.0 - root_f), 0.0)


def _face_points(signs, center, halfwidth, resolution) -> np.ndarray:
    """Triples on one octahedron face, gridded in barycentric coordinates.

    ``center``/``halfwidth`` restrict to a window (used by refinement rounds).
    """
    steps = np.linspace(0.0, 1.0, resolution + 1)
    u = center[0] - halfwidth + 2 * halfwidth * steps
    v = center[1] - halfwidth + 2 * halfwidth * steps
    uu, vv = np.meshgrid(u, v, indexing="ij")
    uu, vv = uu.reshape(-1), vv.reshape(-1)
    ww = 1.0 - uu - vv
    keep = (uu >= -1e-12) & (vv >= -1e-12) & (ww >= -1e-12)
    uu, vv, ww = uu[keep], vv[keep], np.clip(ww[keep], 0.0, None)
    verts = np.diag(np.asarray(signs, dtype=float))
    return np.stack([uu, vv, ww], axis=1) @ verts, np.stack([uu, vv], axis=1)


def brute_min_over_octahedron(
    state: M3NState, kind: DistanceKind, cfg: OracleConfig | None = None
) -> float:
    """Minimum distance from a triple-correlation state to the octahedron.

    Evaluates matrix distances on a barycentric grid over all eight faces and
    shrinks the grid around the incumbent by a factor 4 per refinement round.
    Separable inputs return 0 (the state itself is feasible).
    """
    cfg = cfg or OracleConfig()
    if state.n > _ORACLE_DENSE_CAP:
        raise CapacityError(f"the octahedron oracle is capped at n={_ORACLE_DENSE_CAP}")
    if octahedron_excess(state.c) <= 0:
        return 0.0
    rho = np.array(m3n_density(state).rho)

    best_val = math.inf
    best_face, best_bary = None, None
    all_signs = [
        (s1, s2, s3) for s1 in (1, -1) for s2 in (1, -1) for s3 in (1, -1)
    ]
    for signs in all_signs:
        pts, bary = _face_points(signs, (0.5, 0.5), 0.5, cfg.grid_resolution)
        vals = _batch_distance(rho, _batch_m3n(pts, state.n), kind)
        g = int(np.argmin(vals))
        if vals[g] < best_val:
            best_val = float(vals[g])
            best_face, best_bary = signs, bary[g]

    halfwidth = 0.5
    for _ in range(cfg.refine_rounds):
        halfwidth /= 4.0
        pts, bary = _face_points(best_face, best_bary, halfwidth, cfg.grid_resolution)
        if pts.shape[0] == 0:
            break
        vals = _batch_distance(rho, _batch_m3n(pts, state.n), kind)
        g = int(np.argmin(vals))
        if vals[g] < best_val:
            best_val = float(vals[g])
            best_bary = bary[g]
    return best_val


# -- GHZ-diagonal oracle ---------------------------------------------------------

def _project_capped_simplex(y: np.ndarray, cap: float = 0.5) -> np.ndarray:
    """Euclidean projection onto {q : 0 <= q <= cap, sum q = 1} by bisection."""
    lo = np.min(y) - cap - 1.0
    hi = np.max(y) + 1.0
    for _ in range(100):
        tau = 0.5 * (lo + hi)
        total = np.sum(np.clip(y - tau, 0.0, cap))
        if total > 1.0:
            lo = tau
        else:
            hi = tau
    return np.clip(y - 0.5 * (lo + hi), 0.0, cap)


def _analytic_candidate(p: np.ndarray) -> np.ndarray:
    q = np.array(p, dtype=float)
    k = int(np.argmax(q))
    rest = 1.0 - q[k]
    q[k] = 0.5
    if rest > 1e-15:
        scale = 0.5 / rest
        q[np.arange(q.size) != k] *= scale
    else:
        q[np.arange(q.size) != k] = 0.5 / (q.size - 1)
    return _project_capped_simplex(q)


def _trace_min_lp(p: np.ndarray) -> float:
    """Exact min of the classical trace distance over the capped simplex."""
    m = p.size
    c = np.concatenate([np.zeros(m), 0.5 * np.ones(m)])
    eye = np.eye(m)
    a_ub = np.block([[eye, -eye], [-eye, -eye]])
    b_ub = np.concatenate([p, -p])
    a_eq = np.concatenate([np.ones(m), np.zeros(m)])[None, :]
    bounds = [(0.0, 0.5)] * m + [(0.0, None)] * m
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"trace LP failed: {res.message}")
    return float(res.fun)


def _projected_descent(p: np.ndarray, q0: np.ndarray, grad, objective, max_iter=4000) -> float:
    q = np.array(q0)
    val = objective(q)
    step = 0.5
    for _ in range(max_iter):
        g = grad(q)
        improved = False
        s = step
        for _ in range(40):
            trial = _project_capped_simplex(q - s * g)
            tv = objective(trial)
            if tv < val - 1e-15:
                q, val, improved = trial, tv, True
                step = min(s * 2.0, 1e3)
                break
            s *= 0.5
        if not improved:
            break
    return val


def brute_min_biseparable_ghz(
    state: GHZDiagonalState, kind: DistanceKind, cfg: OracleConfig | None = None
) -> float:
    """Minimum classical distance from a GHZ spectrum to the biseparable set.

    The biseparable GHZ-diagonal spectra are exactly those with every entry
    at most 1/2. Trace distance is solved exactly as a linear program; the
    smooth distances run projected descent with restarts from the clamped
    analytic candidate and random feasible points.
    """
    cfg = cfg or OracleConfig()
    p = state.flat()
    if p.max() <= 0.5 + 1e-15:
        return 0.0
    if kind is DistanceKind.TRACE:
        return _trace_min_lp(p)

    support = p > 0
    floor = 1e-14

    if kind is DistanceKind.RELATIVE_ENTROPY:
        def objective(q):
            if np.any(q[support] <= 0):
                return math.inf
            return float(np.sum(p[support] * np.log2(p[support] / q[support])))

        def grad(q):
            g = np.zeros_like(q)
            qs = np.maximum(q[support], floor)
            g[support] = -p[support] / (qs * math.log(2))
            return g
    else:
        # infidelity / Bures / Hellinger all minimise through the affinity
        def objective(q):
            return -float(np.sum(np.sqrt(p[support] * np.maximum(q[support], 0.0))))

        def grad(q):
            g = np.zeros_like(q)
            qs = np.maximum(q[support], floor)
            g[support] = -0.5 * np.sqrt(p[support] / qs)
            return g

    rng = np.random.default_rng(cfg.seed)
    starts = [_analytic_candidate(p)]
    for _ in range(cfg.restarts):
        starts.append(_project_capped_simplex(rng.dirichlet(np.ones(p.size))))
    best = min(_projected_descent(p, q0, grad, objective) for q0 in starts)

    if kind is DistanceKind.RELATIVE_ENTROPY:
        return max(best, 0.0)
    root_f = min(-best, 1.0)
    if kind is DistanceKind.INFIDELITY:
        return max(1.0 - root_f**2, 0.0)
    return max(2.0 * (1.0 - root_f), 0.0)


# -- proof channels ---------------------------------------------------------------

def corner_triple(n: int, p: float, q: float, h: float) -> CorrelationTriple:
    """Triple of the corner state with barycentric (p, q) at excess level h.

    Uses the corner containing the vertex {-1, (-1)^(n/2), -1}; the face
    triangle at level h has vertices V1 = {-h, e h, -1}, V2 = {-h, e, -h},
    V3 = {-1, e h, -h} with e = (-1)^(n/2).
    """
    if n % 2:
        raise ParameterError("corner coordinates exist for even n only")
    e = float((-1) ** (n // 2))
    v1 = np.array([-h, e * h, -1.0])
    v2 = np.array([-h, e, -h])
    v3 = np.array([-1.0, e * h, -h])
    c = p * v1 + q * v2 + (1 - p - q) * v3
    return CorrelationTriple(*c)


def _corner_weights(n: int, c: CorrelationTriple) -> tuple[float, float, float]:
    """Invert corner_triple: (p, q, h) of a state in the reference corner."""
    e = float((-1) ** (n // 2))
    num = c.c1 - e * c.c2 + c.c3
    h = (-1.0 - num) / 2.0
    den = 3.0 + num
    if den < 1e-12:
        return (1 / 3, 1 / 3, h)
    p = (1 + c.c1 - e * c.c2 - c.c3) / den
    q = (1 + c.c1 + e * c.c2 + c.c3) / den
    return (p, q, h)


def _s_unitary(i: int) -> np.ndarray:
    return (ID2 + 1j * SIGMA[i]) / math.sqrt(2)


def _lambda_unitary_factors(n: int) -> tuple[list, list]:
    """Per-qubit factors of the two triangle-rotating product unitaries."""
    s1, s2 = _s_unitary(1), _s_unitary(2)
    half = n // 2 + 1
    u1, u2 = [], []
    for k in range(n):
        f = SIGMA[1] if k < half else ID2
        u1.append(s2 @ s1 @ f)
        u2.append(s1 @ f @ s2)
    return u1, u2


def apply_lambda_pq(state: DenseState, p: float, q: float) -> DenseState:
    """The three-term mixing channel that redistributes corner coordinates.

    Mixes the identity with two product unitaries that cyclically permute the
    face-triangle vertices; applied to the corner-edge state (1, 0, h) it
    produces (p, q, h), and with p = q = 1/3 it maps any corner state to the
    centroid at the same level h.
    """
    if state.n % 2:
        raise ParameterError("the mixing channel is defined for even n")
    if p < 0 or q < 0 or p + q > 1 + 1e-12:
        raise ParameterError(f"need p, q >= 0 with p + q <= 1, got {(p, q)}")
    u1, u2 = _lambda_unitary_factors(state.n)
    rho = np.array(state.rho)
    out = p * rho
    out += q * apply_product_unitary(rho, u1, state.n)
    out += (1 - p - q) * apply_product_unitary(rho, u2, state.n)
    return DenseState(state.n, out)


def check_translation_invariance(
    h: float, pairs, kind: DistanceKind, n: int
) -> float:
    """Max deviation of D((p,q,h),(p,q,0)) from the centroid value over pairs.

    The distance between a corner state and its face shadow depends only on
    h; returns the largest absolute deviation found.
    """
    if n % 2:
        raise ParameterError("translation invariance applies to even n")
    if not 0 <= h < 1:
        raise ParameterError(f"h must lie in [0, 1), got {h}")
    ref = matrix_distance(
        m3n_density(M3NState(n, corner_triple(n, 1 / 3, 1 / 3, h))),
        m3n_density(M3NState(n, corner_triple(n, 1 / 3, 1 / 3, 0.0))),
        kind,
    )
    worst = 0.0
    for p, q in pairs:
        d = matrix_distance(
            m3n_density(M3NState(n, corner_triple(n, p, q, h))),
            m3n_density(M3NState(n, corner_triple(n, p, q, 0.0))),
            kind,
        )
        worst = max(worst, abs(d - ref))
    return worst


_omega_cache: dict = {}


def _omega_parts(n: int):
    """GHZ basis vectors split by z-parity, with the Kraus completeness check."""
    if n in _omega_cache:
        return _omega_cache[n]
    even_idx = [i for i in range(2 ** (n - 1)) if bin(i).count("1") % 2 == 0]
    odd_idx = [i for i in range(2 ** (n - 1)) if bin(i).count("1") % 2 == 1]
    if len(even_idx) != len(odd_idx):
        raise ParameterError(f"parity split failed for n={n}")
    def vecs(idx_list, sign):
        return [ghz_basis_vector(GHZBasisIndex(n, i, sign), n) for i in idx_list]
    parts = (
        vecs(even_idx, +1),
        vecs(even_idx, -1),
        vecs(odd_idx, +1),
        vecs(odd_idx, -1),
    )
    dim = 2**n
    complete = np.zeros((dim, dim), dtype=complex)
    for group in parts:
        for v in group:
            complete += np.outer(v, v.conj())
    if np.max(np.abs(complete - np.eye(dim))) > 1e-12:
        raise RuntimeError("Kraus completeness check failed")
    _omega_cache[n] = parts
    return parts


def apply_omega(state: DenseState) -> DenseState:
    """The global rephasing channel collapsing even-parity GHZ weight onto odd '+'.

    Kraus operators |psi_j+><phi_j+|, |psi_j+><phi_j-|, |psi_j+><psi_j+|,
    |psi_j-><psi_j-| over the z-parity-split GHZ basis; trace preserving by
    basis completeness. Maps the corner centroid (1/3, 1/3, h) to (1, 0, h).
    """
    if state.n % 2:
        raise ParameterError("the rephasing channel is defined for even n")
    if state.n > _OMEGA_CAP:
        raise CapacityError(f"the rephasing channel is capped at n={_OMEGA_CAP}")
    phi_p, phi_m, psi_p, psi_m = _omega_parts(state.n)
    dim = state.dim
    out = np.zeros((dim, dim), dtype=complex)
    rho = state.rho
    for j in range(len(phi_p)):
        weight = 0.0
        for v in (phi_p[j], phi_m[j], psi_p[j]):
            weight += float(np.real(v.conj() @ rho @ v))
        out += weight * np.outer(psi_p[j], psi_p[j].conj())
        wm = float(np.real(psi_m[j].conj() @ rho @ psi_m[j]))
        out += wm * np.outer(psi_m[j], psi_m[j].conj())
    return DenseState(state.n, out)


def oracle_report(formula_value: float, oracle_value: float, cfg: OracleConfig) -> dict:
    return {
        "formula_value": formula_value,
        "oracle_value": oracle_value,
        "deviation": abs(formula_value - oracle_value),
        "config": {
            "grid_resolution": cfg.grid_resolution,
            "refine_rounds": cfg.refine_rounds,
            "tolerance": cfg.tolerance,
        },
    }


__all__ = [
    "OracleConfig",
    "apply_lambda_pq",
    "apply_omega",
    "brute_min_biseparable_ghz",
    "brute_min_over_octahedron",
    "check_translation_invariance",
    "corner_triple",
    "oracle_report",
]
