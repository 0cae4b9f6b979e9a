//! Composite experiments on free martingales: the three-letter martingale with a triangular
//! coefficient profile, the square-function bound for polynomial martingales and constant
//! sweeps over the inequality harnesses.

pub mod martingale;
pub mod polymart;
pub mod square;
pub mod sweep;

pub use martingale::{
    build_theorem_d, calibrate_threshold, full_sum, hilbert_witness, martingale_factors,
    two_point_f, FElement, FreeMartingale, MartingaleSpec, ThresholdCalibration,
};
pub use polymart::{
    constant_martingale, prop_sq1_check, random_martingale, square_function_envelope,
};
pub use square::{
    k_estimate_report, k_estimate_sweep, matrix_equivalence_report, moment_ratio_norm,
    square_function_norms, square_function_ratio, square_function_ratio_with, strict_lower,
    strictly_increasing, triangular_projection_witness, NormRoute, SquareFunctionNorms,
    TriangularWitness, MATRIX_EQUIVALENCE_ENVELOPE,
};
pub use sweep::{
    constant_growth_sweep, equivalence_constant, product_grid, reference_envelope,
    standard_factors, summary_to_csv, Family, GridCell, SweepOutput, SweepSummary, SUMMARY_HEADER,
};
