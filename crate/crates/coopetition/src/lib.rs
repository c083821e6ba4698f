//! Coopetition: payoff-matrix manipulation in iterated 3-player polymatrix
//! games.
//!
//! Player 1 (the manipulator) may replace the matrices governing what the
//! other two players earn from her, paying the entrywise infinity norm of
//! the change each round. This crate provides:
//!
//! - the game model and single-shot payoff accounting ([`polymatrix`]),
//! - a dense LP/feasibility solver ([`linsolve`]),
//! - synthesis of certified winning policies by compiling dominance
//!   conditions into linear programs ([`synth`]),
//! - no-regret learning opponents with regret accounting ([`agents`]),
//! - repeated-game simulation with win-rate and margin statistics
//!   ([`arena`]),
//! - the four built-in example games and their closed-form manipulated
//!   fixtures ([`games`]).
//!
//! All numerics are generic over the scalar type via [`scalar::Real`];
//! the `*64` aliases below fix `f64`, which is what the CLI uses.

pub mod agents;
pub mod arena;
pub mod games;
pub mod linsolve;
pub mod matrix;
pub mod polymatrix;
pub mod scalar;
pub mod synth;

pub use polymatrix::Player;
pub use scalar::Real;

pub type Matrix64 = matrix::Matrix<f64>;
pub type Game64 = polymatrix::PolymatrixGame<f64>;
pub type Strategy64 = polymatrix::MixedStrategy<f64>;
pub type CompleteStrategy64 = polymatrix::CompleteStrategy<f64>;
pub type Policy64 = synth::ManipulatorPolicy<f64>;
pub type Certificate64 = synth::PolicyCertificate<f64>;
pub type Lp64 = linsolve::LinearProgram<f64>;

pub type Matrix32 = matrix::Matrix<f32>;
pub type Game32 = polymatrix::PolymatrixGame<f32>;
