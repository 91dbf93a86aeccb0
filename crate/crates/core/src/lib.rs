//! Finite Markov chains, their mixing behaviour, and lamplighter (wreath
//! product) extensions.
//!
//! The crate is organised around a few building blocks:
//!
//! - [`chain`]: row-stochastic kernels (sparse with a dense fallback for
//!   small chains), the standard walk builders (cycle, 2-d torus, hypercube,
//!   complete graph), kernel validation and distribution evolution.
//! - [`spectral`]: eigenvalues of the π-symmetrized kernel, relaxation time,
//!   spectral gap, and the second singular value on L²(π).
//! - [`passage`]: expected hitting times, return-time tails, Monte Carlo
//!   first-passage estimates, and excursion coverage checks.
//! - [`metrics`]: total variation, L², separation and relative entropy
//!   distances to stationarity, their mixing times, and exact checks of the
//!   inequalities tying them together.
//! - [`coverage`]: the uncovered-set process, exact subset dynamic
//!   programming, seeded Monte Carlo surrogates, moment generating functions
//!   `E[θ^|S_t|]` and their threshold searches.
//! - [`lamplighter`]: explicit wreath-product chains for tiny bases, and the
//!   covered-set reduction that computes wreath-chain distances without
//!   enumerating lamp configurations.
//! - [`verify`]: orchestrated experiments over chain ladders (scaling bands,
//!   metric separations, inequality suites) emitting structured reports.
//!
//! All Monte Carlo paths draw from counter-based seeded streams (one stream
//! per replicate), so results are reproducible and independent of thread
//! count.

pub mod chain;
pub mod coverage;
pub mod lamplighter;
pub mod linalg;
pub mod metrics;
pub mod passage;
pub mod rng;
pub mod spectral;
pub mod verify;

pub use chain::{
    build_complete, build_cycle, build_hypercube, build_torus2d, evolve, ChainSpec,
    DistributionVector, MarkovChain,
};

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} must be at least {min}, got {got}")]
    InvalidSize {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("laziness must lie in [0, 1), got {0}")]
    InvalidLaziness(f64),

    #[error("{what} exceeds capacity: requested {requested}, cap {cap}; {hint}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
        hint: &'static str,
    },

    #[error("row {row} is not stochastic (sum {sum})")]
    NonStochasticRow { row: usize, sum: f64 },

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("row {row} references state {col}, out of bounds for {n} states")]
    IndexOutOfBounds { row: usize, col: usize, n: usize },

    #[error(
        "chain is reducible: support graph has {components} strongly connected \
         components, so the stationary distribution is not unique"
    )]
    ReducibleChain { components: usize },

    #[error("stationary solve did not converge: residual {residual}")]
    StationaryNotConverged { residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state index {state} for a chain with {n} states")]
    InvalidState { state: usize, n: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("stationary mass is zero at state {state}; separation and entropy are undefined")]
    AbsoluteContinuity { state: usize },

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    /// A mixing-time search ran out of horizon. Carries the last distance
    /// profile observed so callers can report how far the chain got.
    #[error(
        "horizon {horizon} exceeded before convergence; last profile at t={t}: \
         tv={tv}, l2={l2}, sep={sep}, entropy={entropy}"
    )]
    HorizonExceeded {
        horizon: u64,
        t: u64,
        tv: f64,
        l2: f64,
        sep: f64,
        entropy: f64,
    },

    #[error("threshold search exceeded horizon {horizon}; last value {last_value} at t={t}")]
    SearchHorizonExceeded { horizon: u64, t: u64, last_value: f64 },

    #[error("singular matrix in linear solve (pivot {pivot} at column {col})")]
    SingularMatrix { col: usize, pivot: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off_norm})")]
    EigenNotConverged { sweeps: usize, off_norm: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
