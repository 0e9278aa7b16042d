//! Structural properties of finitely generated subgroups of right-angled
//! Coxeter groups, decided by building completions: folded, cube-full,
//! edge-labeled cube complexes whose basepoint loops spell exactly the
//! reduced words of the subgroup.
//!
//! The crate is organized bottom-up:
//!
//! * [`graph`] — defining graphs and their predicates,
//! * [`word`] — reduction, equality and normal forms of group words,
//! * [`complex`] — labeled cube complexes and the fold / identification /
//!   attachment operations,
//! * [`engine`] — completion drivers (standard, graph-loop preserving,
//!   tree),
//! * [`analysis`] — the verdicts read off a finished completion
//!   (membership, quasiconvexity, index, torsion, normality, separability),
//! * [`reflection`] — trimmed reflection sets and their always-finite
//!   completions,
//! * [`embed`] — the finite-index embeddability search between RACGs.

pub mod analysis;
pub mod complex;
pub mod embed;
pub mod engine;
pub mod error;
pub mod graph;
pub mod reflection;
mod util;
pub mod word;

pub use complex::{CubeComplex, Hyperplane, PathInComplex};
pub use engine::{Budget, CompletionOutcome, CompletionStats, CompletionStatus};
pub use error::{Error, Result};
pub use graph::{DefiningGraph, GeneratorId};
pub use word::{Reflection, Word};
