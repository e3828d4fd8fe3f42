//! Residual-stress fields on the cube `[0, 2π]³` that are invisible to
//! plane-strain measurements, and the reconstruction problems built on them.

pub mod cosine;
pub mod diagnostics;
pub mod eigenstrain;
pub mod error;
pub mod field;
pub mod imagefit;
pub mod poly;
pub mod poorly;
pub mod recovery;
pub mod trig;

pub use cosine::{CosinePotential, NullBasis, NullGenerator, StressSeries};
pub use diagnostics::{Diagnostics, Tolerances};
pub use eigenstrain::{Certificate, PolyEigenstrain, ReductionResult};
pub use error::{Error, Result};
pub use field::{ElasticConstants, Face, Grid3, SymTensorField3, VectorField3};
pub use imagefit::{BinaryTarget, FitResult, SliceSpec};
pub use poly::{Poly, PolyVector, Rational};
pub use poorly::{PoorlyParamSPW, PoorlyParamU};
pub use recovery::{BoundaryMode, RecoveryMode, RecoveryProblem, RecoveryReport, ShearSolution};
