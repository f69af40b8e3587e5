//! Numerical toolkit for period-doubling renormalization of strongly
//! dissipative Hénon-like maps `F(x,y) = (f(x) - eps(x,y), x)`.
//!
//! The crate is organized bottom-up:
//!
//! * [`fnrep`] — Chebyshev representations of analytic functions of one and
//!   two variables, root finding, composition with refitting.
//! * [`unimodal`] — unimodal maps, their partition, unimodal renormalization,
//!   and the Feigenbaum fixed point `g` with `lambda = 2.5029...`.
//! * [`henon`] — the Hénon-like map data type and pointwise dynamics.
//! * [`manifolds`] — vertical graphs, the contraction-mapping graph pullback,
//!   local stable manifolds and the A/B/C partition.
//! * [`renorm`] — the Hénon renormalization operator, the tower `F_n`,
//!   rescaling levels and the tip.
//! * [`regions`] — the good/bad-region boundary `K_n` and its geometry.
//! * [`approach`] — closest-approach traces, thickness, double sequences and
//!   rate diagnostics for candidate wandering domains.

use once_cell::sync::Lazy;
use thiserror::Error;

pub mod approach;
pub mod fnrep;
pub mod henon;
pub mod manifolds;
pub mod regions;
pub mod renorm;
pub mod unimodal;

/// The Feigenbaum rescaling constant, `lambda = 2.5029...`, to the precision
/// the functional-equation solver reproduces it. Cross-checked in tests
/// against [`unimodal::solve_feigenbaum`].
pub const FEIGENBAUM_LAMBDA: f64 = 2.502907875095892;

/// Environment variable capping internal parallelism (number of worker
/// threads used for per-height manifold solves and grid refits).
pub const THREADS_ENV: &str = "HENON_RENORM_THREADS";

static POOL: Lazy<rayon::ThreadPool> = Lazy::new(|| {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(0); // 0 = rayon default
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
});

/// Run `op` on the crate's worker pool (respects `HENON_RENORM_THREADS`).
pub(crate) fn with_pool<R: Send>(op: impl FnOnce() -> R + Send) -> R {
    POOL.install(op)
}

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("fit needs at least {needed} samples, got {got}")]
    FitUnderdetermined { needed: usize, got: usize },
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
    #[error("x = {x} outside domain [{lo}, {hi}] (pad {pad})")]
    OutsideDomain { x: f64, lo: f64, hi: f64, pad: f64 },
    #[error("composition escapes outer domain: inner({x}) = {y} not in [{lo}, {hi}]")]
    CompositionRange { x: f64, y: f64, lo: f64, hi: f64 },
    #[error("no sign change on bracket [{lo}, {hi}]: f = {flo}, {fhi}")]
    NoBracket {
        lo: f64,
        hi: f64,
        flo: f64,
        fhi: f64,
    },
    #[error("root iteration stalled: |f| = {resid} after {iters} steps")]
    RootTolerance { resid: f64, iters: usize },
    #[error("schwarzian undefined: f'({x}) = {deriv} is too close to zero")]
    SchwarzianSingular { x: f64, deriv: f64 },
    #[error("not a unimodal map: {0}")]
    NotUnimodal(String),
    #[error("no fixed point with negative multiplier (not renormalizable structure)")]
    NoNegativeFixedPoint,
    #[error("map is not renormalizable: {0}")]
    NotRenormalizable(String),
    #[error("functional-equation solver diverged after {iters} iterations (residual {resid})")]
    SolverDiverged { iters: usize, resid: f64 },
    #[error("h_y is not monotone on branch [{lo}, {hi}] at y = {y}")]
    NonMonotoneBranch { lo: f64, hi: f64, y: f64 },
    #[error("inversion target {target} outside h_y image [{lo}, {hi}] at y = {y}")]
    TargetOutsideImage {
        target: f64,
        lo: f64,
        hi: f64,
        y: f64,
    },
    #[error("fixed-point search failed: {0}")]
    FixedPoint(String),
    #[error("multiplier {value} too close to the unit circle (non-hyperbolic)")]
    NonHyperbolic { value: f64 },
    #[error("graph pullback precondition failed at height y = {y}: {reason}")]
    PullbackPrecondition { y: f64, reason: String },
    #[error("contraction iteration did not converge at height y = {y} after {iters} steps")]
    ContractionFailure { y: f64, iters: usize },
    #[error("measured Lipschitz {measured} exceeds certified bound {certified}")]
    LipschitzCertificate { measured: f64, certified: f64 },
    #[error("partition construction failed: {0}")]
    Partition(String),
    #[error("renormalization failed: {0}")]
    Renormalization(String),
    #[error("tip computation failed: {0}")]
    Tip(String),
    #[error("planar set is empty or degenerate: {0}")]
    EmptySet(String),
    #[error("input set straddles {0} at step 0")]
    StraddleAtStart(String),
    #[error("invalid map definition: {0}")]
    MapSpec(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
