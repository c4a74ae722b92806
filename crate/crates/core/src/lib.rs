//! Complementary sequence sets and complete complementary codes from
//! para-unitary polynomial matrices built over Butson-type Hadamard matrices.
//!
//! Every claim (para-unitarity, complementarity, orthogonality) is decided in
//! exact cyclotomic arithmetic; floating point appears only in PMEPR.

pub mod cyclotomic;
pub mod error;
pub mod functions;
pub mod genseed;
pub mod hadamard;
pub mod io;
pub mod polymatrix;
pub mod recursive;
pub mod seedpu;

pub use cyclotomic::{cyclotomic_polynomial, CoeffInt, CycInt, CycPoly};
pub use error::{Error, Result};
pub use functions::{are_mutually_orthogonal, is_cas, is_ccc, is_ccc_sequences, is_css, CorrelationProfile, QArray, QSequence};
pub use genseed::{build_generalized_seed, construction5_cosets, construction6_cosets, generalized_delay, theorem7_families, GenSeedSpec};
pub use hadamard::{are_equivalent, catalog, fourier_phase, walsh_kron_phase, PhaseMatrix};
pub use io::{FamilyFile, FamilyKind, Members, Provenance};
pub use polymatrix::{CycMatrix, FunctionMatrix, PolyMatrix};
pub use recursive::{
    compose_adb, corollary7_matrix, interleave_p, theorem10_matrix, theorem11_matrix, theorem8_matrix, theorem9_matrix, Order2Seed, Plan,
    PlanFile,
};
pub use seedpu::{build_seed, compute_sq, enumerate_s, named_construction, GeneralForm, NamedParams, QuadraticTerm, SeedSpec};

/// Cyclotomic integer with 64-bit coefficients.
pub type Cyc = CycInt<i64>;
/// Polynomial matrix with 64-bit coefficients.
pub type PolyMatrix64 = PolyMatrix<i64>;
