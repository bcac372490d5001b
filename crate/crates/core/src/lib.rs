//! Parity-operator phase super-resolution with coherent-plus-thermal Gaussian
//! states.
//!
//! The crate simulates the dark port of an interferometer in phase space,
//! estimates the parity expectation `<Π> = π W(0,0)` from ensembles of
//! quadrature samples (maximum likelihood or threshold counting), and
//! measures the resulting phase resolution and sensitivity against the
//! Cramér-Rao bound.
//!
//! Monte Carlo loops run on rayon when the default `parallel` feature is on
//! and sequentially otherwise; results are identical either way.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod exec;
pub mod experiment;
pub mod homodyne;
pub mod interferometer;
pub mod metrology;
pub mod rng;
pub mod states;

pub use error::{Error, Result};
pub use estimators::{ParityEstimate, ThresholdConfig};
pub use homodyne::{AcquisitionConfig, IQEnsemble, IQSample};
pub use interferometer::InterferometerConfig;
pub use states::{GaussianState, PhotonBudget};
