//! Harnesses computing both sides of the free Khintchine, Rosenthal and length-reduction
//! inequalities, with the explicitly constanted directions recorded as checks.

pub mod brackets;
pub mod circular;
pub mod engine;
pub mod haagerup;
pub mod khintchine;
pub mod random;
pub mod reduction;
pub mod report;
pub mod rosenthal;

pub use brackets::{middle_norm, split_matrix, split_norm, SplitTerm};
pub use circular::{compress, geometric_mean, theorem_e_report, theorem_f_report};
pub use engine::{
    block_op, col_op, row_op, word_bra_pairing, word_ket_pairing, FreeNorms, NormValue,
};
pub use haagerup::{haagerup_report, random_haagerup, EXTRAPOLATION_SLACK};
pub use khintchine::{
    khintchine_report, lp_sum, middle_terms, sigma1_bound, sigma2_bound, split_term,
};
pub use reduction::{random_reduction_items, reduction_report, ReductionItem};
pub use report::{
    format_float, reports_from_csv, reports_from_jsonl, reports_to_csv, reports_to_jsonl,
    safe_ratio, sidecar_json, to_json_string, Check, CsvRow, InequalityReport, NamedValue,
};
pub use rosenthal::{
    expectation_col, expectation_row, lemma_bounds_report, rosenthal_report, sign_sweep,
    voiculescu_report,
};
