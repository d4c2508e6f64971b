//! Universal centralizer of SL(n+1, C) over a Steinberg cross section,
//! modelled as a concrete groupoid with tt*-Toda Stokes data, the
//! involutions σ and θ, and the multiplicative 2-form.

pub mod bondal;
pub mod connection;
pub mod error;
pub mod groupoid;
pub mod involutions;
pub mod linalg;
pub mod report;
pub mod roots;
pub mod stokes;
pub mod structural;
pub mod suite;
pub mod symplectic;
pub mod tangent;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Polynomial, C64};
pub use stokes::{Parity, QRoute, RootPair, RootSetData, SectionMembership, SectorIndex, SteinbergSection, StokesParams};
pub use structural::StructuralSet;
pub use groupoid::{CentralizerBasis, ComposablePair, GroupoidPoint};
pub use involutions::SlocalMembership;
pub use tangent::{Chart, TangentKind, TangentVector};
pub use report::{Check, Config, Suite, ToleranceClass, VerificationReport};
pub use suite::run_suite;
pub use symplectic::{Differential, Involution};
pub use bondal::BondalPoint;
pub use connection::{SymmetryKind, TodaInput};
