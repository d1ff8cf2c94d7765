"""Local-unitary invariants and equivalence testing for N x N bipartite states."""
from .equivalence import (EquivalenceVerdict, Outcome, compare_fingerprints, decide,
                          decide_equivalence, extract_witness, pure_decide, solve_intertwiner)
from .invariants import (InvariantFingerprint, StructureConstants, cubic_tensors, fingerprint,
                         is_generic, j_moments, metric_tensors, pure_invariants, reduce_trace,
                         structure_constants)
from .linalg import (ToleranceConfig, hermitian_eig, kron, nullspace, random_density,
                     random_haar_unitary, svd)
from .oracle import OracleReport, optimize_local, pure_oracle
from .states import (BipartiteDensityMatrix, EigenEnsemble, LocalUnitaryPair, PureState,
                     ReducedPair, apply_local, eigen_ensemble, reduced_pair, schmidt, validate)

__version__ = "0.1.0"
