//! Reduced free products of finite-dimensional probability spaces.

mod factor;
mod fock;
mod oracle;
mod poly;
mod rep;

pub use factor::{catalan, gauss_quadrature, FactorKind, FreeFactor, Measure};
pub use fock::{
    bra_gram, ket_gram, key_len, vacuum_key, CompiledLetter, FreeOp, Key, OpTerm, SparseVec,
};
pub use oracle::{free_moment, free_moment_exact, free_moment_generic, DenseMat};
pub use poly::{sum_to_op, NcPoly, NcPolySpec, PolyMap, PolyTerm, TermSpec};
pub use rep::{scalar_e, word_counts, AlternatingWord, FreeProductRep};

/// make_factor: builds a factor from its configuration.
pub fn make_factor(kind: &FactorKind) -> crate::Result<FreeFactor> {
    FreeFactor::make(kind)
}
