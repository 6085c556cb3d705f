//! Motion-based communication toolkit.
//!
//! Two halves, one library:
//!
//! * [`seqkit`] — entropy-style complexity metrics for short dance-step
//!   sequences over the four-letter step alphabet `{A,B,C,D}`, corpus
//!   statistics (Pearson correlations against judge scores), and a simple
//!   per-step energy model.
//! * [`identity`], [`integrator`], [`solver`] — minimum-energy encoding of
//!   `m` distinguishable messages into the motion of a linear system: the
//!   closed-form identity-operator case, the n-th order integrator reduction
//!   to a finite-dimensional quadratic program over polynomial controls, and
//!   a multi-start numerical solver for the nullspace message-encoding
//!   subproblem.
//!
//! [`linalg`] holds the small dense kernels shared by the encoders
//! (pseudo-inverses, nullspace bases, regular simplexes, a generalized
//! symmetric eigensolver, shifted Legendre bases, exact rational Hilbert-type
//! matrices).
//!
//! Multi-start solvers fan restarts out with rayon when the `parallel`
//! feature (default) is enabled; results are merged by `(cost, restart
//! index)` so parallel and sequential runs return identical solutions.

pub mod identity;
pub mod integrator;
pub mod linalg;
pub mod poly;
pub mod seqkit;
pub mod solver;

mod exec;
mod opt;
