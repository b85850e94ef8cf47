//! Wasserstein-barycenter soft actor-critic (WBSAC) and a vanilla SAC
//! baseline, built on a small self-contained MLP/Adam stack.
//!
//! The crate is organized along the pipeline:
//!
//! * [`gauss_ot`] — diagonal-Gaussian distribution math: tanh-squashed
//!   log-densities, differential entropy, 2-Wasserstein distance, and the
//!   closed-form weighted barycenter.
//! * [`nn`] — MLP forward/backward, Adam, and polyak target averaging.
//! * [`agents`] — the WBSAC/SAC agents: twin critics, pessimistic and
//!   optimistic actors, barycentric exploration, replay, checkpointing.
//! * [`envs`] — a sparse-reward point maze, a dense-reward point-mass
//!   smoke environment, and state-visitation coverage instrumentation.
//! * [`harness`] — seeded experiment orchestration, CSV/plot/heatmap
//!   emission, and the numeric verification suites.

pub mod agents;
pub mod envs;
pub mod gauss_ot;
pub mod harness;
pub mod nn;
pub mod rngs;
