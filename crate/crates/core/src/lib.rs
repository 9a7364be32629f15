//! And-Inverter Graph engine, synthesis transforms and bandit-driven
//! exploration of transform orderings.

pub mod aig;
pub mod bandit;
pub mod error;
pub mod flowspace;
pub mod harness;
pub mod io;
pub mod multistage;
pub mod scalar;
pub mod transforms;

pub use aig::{equivalent, Aig, EquivMode, Lit, Objective, QoR};
pub use error::{AigError, ExploreError, FlowError};
pub use flowspace::{Flow, Multiset};
pub use scalar::Scalar;
pub use transforms::{TransformKind, TransformReport};

pub type ArmStats = bandit::ArmStats<f64>;
pub type RegretLog = bandit::RegretLog<f64>;
pub type ExplorationResult = multistage::ExplorationResult<f64>;
pub type PullRecord = multistage::PullRecord<f64>;
