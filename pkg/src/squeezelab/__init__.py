"""squeezelab: spin-squeezing entanglement witnesses that stay valid when
the particle number fluctuates."""

from .dynamics import SweepRow, oat_state, product_ket, sweep
from .examples import ExampleCurve, example1_curve, example1_state, example2_curves
from .hilbert import (
    DimensionCapError,
    HermiticityError,
    MultiSpinState,
    NumericalConsistencyError,
    StateValidationError,
    dimension_cap,
    embed_local,
    expect,
    herm_eig,
    herm_expm,
    kron,
)
from .invariant import (
    InvariantMatrices,
    build_invariant_dichotomic,
    build_invariant_spin,
    evaluate_generalized_invariant,
    evaluate_original_invariant,
    generalized_invariant_suite,
    original_invariant_suite,
)
from .observables import (
    ObservableTriple,
    ProjectorPair,
    alpha_check,
    collective_spin,
    dichotomic_from_levels,
    dichotomic_from_projectors,
    parse_observable_spec,
    rotate_triple,
    spin_matrices,
)
from .oracle import (
    QutritImage,
    SeparableSpec,
    VerificationSummary,
    check_convexity_lemma,
    check_master_bound,
    check_subset_bound,
    check_tighter_bound,
    qutrit_map,
    run_verification,
    sample_pure_product,
    sample_separable,
)
from .witness import (
    MomentSet,
    WitnessReport,
    delta,
    delta_prime,
    full_report,
    generalized_margin,
    moments,
    naive_margin,
    original_margin,
)

__version__ = "0.1.0"
