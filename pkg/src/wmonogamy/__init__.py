"""Entanglement measures and monogamy verification for W-class states.

The package computes concurrence, concurrence of assistance and formation/
assistance entropies for n-qubit generalized W-class states and their
reductions, solves convex-roof extensions numerically, and verifies a
family of monogamy inequalities both on single states and in seeded random
campaigns.  See the README for the CLI workbench.
"""

from .linalg import (
    DensityMatrix,
    PureState,
    Spectrum,
    density_of,
    hermitian_eig,
    ket_from_amplitudes,
    partial_trace,
    psd_sqrt,
    purity,
)
from .measures import (
    MeasureValue,
    WoottersSpectrum,
    binary_entropy,
    coa_mixed_2q,
    concurrence_mixed_2q,
    concurrence_pure,
    cut_value_w,
    entropy,
    eof_mixed_2q,
    eof_pure,
    f_of_c2,
    pair_value_w,
    wootters_spectrum,
)
from .monogamy import (
    DomainError,
    MonogamyQuery,
    MonogamyReport,
    check_coa_negative_power,
    check_coa_power,
    check_dual_coa,
    check_eoa_pair_sum,
    check_eof_pair_sum,
    check_eof_power,
    check_fig1_bounds,
    fig1_curves,
    iter_campaign,
    residual_concurrence_negative_power,
    residual_concurrence_power,
    run_query,
    summarize_reports,
)
from .roof import (
    EnsembleDecomposition,
    RoofProblem,
    RoofSolution,
    apply_mixing,
    coa_reduced_w,
    solve_roof,
    support_decomposition,
)
from .wstates import (
    RankTwoSupport,
    StructureError,
    WClassParams,
    WVacuumSplit,
    build_w_state,
    example_five_qubit_params,
    rank_two_support,
    read_state_json,
    reduced_pair,
    reduced_subset,
    sample_w_params,
    w_plus_vacuum_split,
    write_state_json,
)

__version__ = "0.1.0"
