//! Signed graphons, W-random signed graphs and the opinion dynamics they
//! drive, with tools for comparing finite-graph trajectories against their
//! graphon limits.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
mod error;
pub mod kernel;
pub mod linalg;
pub mod sampler;
mod scalar;

pub use error::{GraphonError, Result};
pub use scalar::Scalar;

pub use analysis::{DegreeReport, ErrorReport, TrajectoryComparison};
pub use dynamics::{InitialCondition, Model, OpinionTrajectory, Source};
pub use kernel::{kernel_difference, DegreeProfile, Discretization, GridMatrix, Kernel, KernelForm};
pub use sampler::{LatentScheme, LatentVariables, SignedAdjacency, SparsitySchedule};

pub type Kernel64 = Kernel<f64>;
pub type Kernel32 = Kernel<f32>;
pub type Trajectory64 = OpinionTrajectory<f64>;
pub type Adjacency64 = SignedAdjacency<f64>;
pub type Latents64 = LatentVariables<f64>;
