//! Generation pipeline for long-form "future problem" creativity-assessment
//! contexts.
//!
//! The pipeline composes four stages behind a single oracle abstraction:
//!
//! 1. [`planner`] — rule-guided hypertree search that turns a title/theme
//!    query into a structured outline.
//! 2. [`mcts`] — sentence-level Monte Carlo Tree Search that fills the
//!    outline with text, producing a seed context.
//! 3. [`qd`] — MAP-Elites quality-diversity optimization that evolves seed
//!    contexts across a 3D behavior grid.
//! 4. [`refiner`] — simulated participants that gate contexts on assessment
//!    effectiveness and route weak ones back to evolution.
//!
//! Every model call goes through [`gateway::Gateway`], which supports a live
//! OpenAI-compatible backend and a deterministic scripted mock backend, so
//! the whole pipeline runs hermetically in tests. [`metrics`] implements the
//! evaluation battery (pairwise judging, ROUGE, kappa, Spearman, R²) and
//! [`pipeline`] wires everything into an end-to-end run with persistence.

pub mod event;
pub mod gateway;
pub mod mcts;
pub mod metrics;
pub mod pipeline;
pub mod planner;
pub mod qd;
pub mod refiner;
pub mod rng;

#[cfg(feature = "cli")]
pub mod cli;

pub use gateway::{Gateway, OracleError};
pub use mcts::Context;
pub use planner::{Outline, Query};
pub use qd::EliteArchive;
