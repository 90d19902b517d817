//! Sharpe-ratio oriented multi-armed bandits.
//!
//! Regret-minimising index policies ([`rm`]), fixed-budget best-arm
//! identification ([`bai`]), closed-form theoretical bounds ([`bounds`]) and a
//! seeded Monte Carlo harness ([`harness`]) driven by JSON configs and named
//! presets.

pub mod bai;
pub mod bounds;
pub mod cli;
pub mod config;
pub mod env;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod plot;
pub mod presets;
pub mod quadrature;
pub mod report;
pub mod rm;
pub mod rng;
pub mod special;

pub use bai::{BaiKind, BaiOptions, BaiRun, SurLog};
pub use bounds::{BoundReport, Theorem};
pub use env::{ArmTruth, BanditInstance, BoundedDistribution, Gaps, Objective};
pub use error::{Error, Result};
pub use estimators::StreamingMoments;
pub use rm::{RmPolicy, RmPolicyConfig, RmPolicyKind};
pub use rng::RandomStream;
