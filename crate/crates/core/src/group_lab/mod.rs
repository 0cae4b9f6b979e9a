//! Exact arithmetic in the group algebra of a free group.

mod element;
mod maps;
mod norms;
mod packed;
mod word;

pub use element::GroupAlgElement;
pub use maps::{
    bubble_identities_hold, complement_left, complement_right, dykema_residual, is_homogeneous,
    left_bubble_defect, left_projection, length_projection, map_l, map_q, map_r, parse_element,
    popa_example, popa_projection, reduce, right_bubble_defect, right_projection,
};
pub use norms::{
    lp_norm_even, op_norm_estimate, op_norm_estimate_with, trace_power, GroupOpNormEstimate,
    OpNormDiagnostics, DEFAULT_WORK_LIMIT,
};
pub use word::{words_of_letter_length, GroupWord};
