//! Representations of U_q(sl3) in the Gelfand-Zetlin basis, at generic q
//! and regularized at odd roots of unity.

pub mod error;
pub mod gzbasis;
pub mod linalg;
pub mod qarith;
pub mod repgeneric;
pub mod rootlimit;
pub mod structure;

pub use error::{QgzError, Result};
pub use gzbasis::{
    coordinates, dimension, enumerate_basis, in_teepee, s1_transform, s2_source_label, Basis,
    BasisState, Coordinates, GZPattern, RepLabel,
};
pub use linalg::SparseMatrix;
pub use qarith::{Jet, QParam, QPoint, RootOfUnity, C64};
pub use repgeneric::{Generator, GeneratorSet, OperatorTag, RelationReport, SparseOperator};
pub use rootlimit::{
    boundary_audit, casimir_structure, compare_with_oracle, limit_oracle, verify_root,
    BoundaryReport, CasimirReport, MixedBasis, OracleComparison, RegularizedRep, RootReport,
    TeepeeCensus,
};
pub use structure::{analyze, classify, Classification, StructureReport};
