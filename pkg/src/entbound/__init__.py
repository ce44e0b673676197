"""Distance-based multiparticle-entanglement values and accessible lower bounds.

Exact closed forms for two reference families of N-qubit mixed states
(triple-correlation states and GHZ-diagonal states), brute-force oracles
verifying every formula, local-rotation optimisation of the accessible
bounds, and measurement-data ingestion with propagated uncertainty.
"""

from .errors import (
    AlreadySeparableError,
    CapacityError,
    EntboundError,
    ParameterError,
    SchemaError,
    StateValidityError,
    UnsupportedDistanceError,
)
from .qstate import (
    CorrelationTriple,
    DenseState,
    M3NState,
    StateFamily,
    build_state,
    m3n_density,
    m3n_spectrum,
)
from .pauli import (
    CorrelationTensor,
    LocalRotation,
    correlation_tensor,
    correlation_triple,
    expectation,
    rotated_triple,
    so3_from_angles,
)
from .locc import (
    GHZBasisIndex,
    GHZDiagonalState,
    apply_m3nfication_channel,
    ghz_basis_vector,
    ghz_diagonalise,
    m3nfy,
    singlet_overlap_check,
)
from .measures import (
    DistanceKind,
    EntanglementReport,
    SeparabilityLevel,
    classical_distance,
    closest_separable_even,
    closest_separable_odd_trace,
    entanglement_from_excess,
    entanglement_m3n,
    genuine_from_overlap,
    genuine_ghz_diag,
    is_separable_m3n,
    lower_bound_from_triple,
    matrix_distance,
    octahedron_excess,
)
from .optimize import OptimisationOptions, optimise_ghz_overlap, optimise_triple

__version__ = "0.1.0"
from .estimate import (
    MeasurementRecord,
    TripleEstimate,
    bound_with_uncertainty,
    counts_to_triple,
    genuine_bound_with_uncertainty,
    ingest_correlation_file,
    simulate_measurements,
)
from .oracle import (
    OracleConfig,
    apply_lambda_pq,
    apply_omega,
    brute_min_biseparable_ghz,
    brute_min_over_octahedron,
    check_translation_invariance,
    corner_triple,
)
