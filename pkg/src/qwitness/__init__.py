"""Anticommutator-based quantumness witnesses.

For positive operators X, Y from a commuting algebra, {X, Y} = XY + YX is
nonnegative; quantum mechanics violates this.  This package builds the
witness pairs behind the CHSH inequality, its 4-cycle noncontextual variant,
and the N-qubit Svetlichny inequality, verifies the operator identities that
tie witnesses to inequality operators, computes classical and hybrid bounds
by exhaustive enumeration, and optimizes measurement settings to certify
quantum violations.
"""

__version__ = "0.1.0"

from .qobs import (  # noqa: F401
    BlochVector,
    Grouping,
    SettingsTable,
    bloch_observable,
    embed,
    expectation,
    ghz_state,
    group_observable,
    maximally_mixed,
    noisy_mixture,
    parity_projector,
    product_state,
    random_settings,
)
from .ineq import (  # noqa: F401
    CertificationError,
    ChshElement,
    InequalityOperator,
    SignPattern,
    chsh_element,
    chsh_operator,
    chsh_optimal_settings,
    cycle_from_settings,
    decompose_svetlichny,
    noncontextual_cycle,
    svetlichny_operator,
    svetlichny_pattern,
    svetlichny_sign,
)
from .witness import (  # noqa: F401
    WitnessIdentityError,
    WitnessPair,
    WitnessReport,
    element_witness,
    evaluate_witness,
    total_witness,
    witness_pair,
)
from .classical import (  # noqa: F401
    BoundResult,
    CapExceededError,
    DeterministicStrategy,
    HybridStrategy,
    hybrid_bound,
    lhv_bound,
    noncontextual_bound,
)
from .optimize import (  # noqa: F401
    Lcg64,
    OptimizationConfig,
    OptimizationResult,
    max_eigenvalue,
    maximize_expectation,
    maximize_violation,
    violation_threshold,
)
