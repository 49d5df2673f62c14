//! Numerical verification of outcome-count bounds for collective qubit
//! measurements, together with precision, RMSE and mutual-information metrics
//! of standard phase and parameter estimation models.

pub mod error;
pub mod hilbert;
pub mod infometrics;
pub mod models;
pub mod protocol;
pub mod quadrature;
pub mod spin;
pub mod symmetry;

pub use error::{Error, Result};
pub use hilbert::{ComplexMatrix, EigenClustering, HermitianObservable, Spectrum, StateVector};
pub use infometrics::{AsymptoticKind, AsymptoticRow, Comparison, MetricReport, Table2Request, Table2Row};
pub use models::{EstimationModel, InversionRule, LogBase, ParamRange, QMetrologyModel, RangeKind};
pub use protocol::{ProtocolRun, ProtocolSpec};
pub use spin::{CGPair, CollectiveSpinOps, HalfInt};
pub use symmetry::{IrreducibilityReport, PermutationAction, SpinEigenspace};
