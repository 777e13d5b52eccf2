//! Caputo time stepping on graded meshes: convolution weights, the optional
//! exponential-sum history and the fully discrete recursion.

pub mod expsum;
pub mod norm;
pub mod scheme;
pub mod weights;

pub use expsum::ExpSum;
pub use norm::{l2_spacetime_norm, l2_time_norm};
pub use scheme::{fast_history_apply, read_states, write_states, DecadePreconditioners, Scheme, SolutionTrajectory, SolverOptions, SolverStrategy};
pub use weights::{history_weights, toeplitz_generator, uniform_scale, GradedTimeMesh, HistoryWeights};
