//! Factorized F-matrices for U(1)^(N-1) invariant vertex models.
//!
//! The crate builds R-matrix weight tables, verifies the relations they must satisfy,
//! constructs the F-matrix that turns products of R-matrices into diagonal operators,
//! twists monodromy operators into that basis, and evaluates domain-wall partition
//! functions by several independent routes.

pub mod dwpf;
pub mod error;
pub mod f_matrix;
pub mod monodromy;
pub mod relation_checks;
pub mod summation;
pub mod tensor_algebra;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;
