#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod expr;
pub mod fracops;
pub mod green;
pub(crate) mod interp;
pub mod psi;
pub mod quad;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use expr::{Expr, ExprAst, ExprError};
pub use fracops::GridFunction;
pub use green::{GreenKernel, GreenMaxReport};
pub use psi::{PsiChart, PsiKind};
pub use quad::{QuadConfig, QuadratureRule};
pub use solver::{BoundaryFunctional, ContractionCertificate, ExistenceCertificate, ProblemSpec, SolutionGrid};
pub use spectral::{EigenBoundReport, LyapunovReport, NystromOperator, PhiSpec};
