//! Purity and pure-state entanglement across general probabilistic theories.
//!
//! - [`gpt`]: finite systems given by state polytopes, effects and a
//!   finite group of reversible transformations.
//! - [`mixedness`]: the "more mixed than" preorder via linear programming,
//!   classical majorization and Birkhoff synthesis.
//! - [`monotones`]: purity monotones.
//! - [`quantum`]: Schmidt decomposition, purifications, LOCC convertibility
//!   and the explicit protocols behind it.
//! - [`boxworld`]: no-signalling boxes in exact arithmetic.
//! - [`harness`]: seeded cross-validation suites.

pub mod boxworld;
pub mod gpt;
pub mod harness;
pub mod lp;
pub mod mixedness;
pub mod monotones;
pub mod quantum;
pub mod sampling;

pub use boxworld::{BoxState, ExchangeWitness, LocalRelabeling, Side};
pub use gpt::{Effect, GptChannel, GptState, Measurement, TheorySystem};
pub use harness::{Counterexample, SuiteReport, TrialConfig};
pub use mixedness::{BirkhoffTerm, FeasibilityCertificate, Permutation, RaReChannel};
pub use monotones::{ConvexScalarFn, MonotoneReport};
pub use quantum::{DensityMatrix, KrausChannel, OneWayProtocol, PureBipartiteState, SchmidtData};
