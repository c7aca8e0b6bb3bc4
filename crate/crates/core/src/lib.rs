//! Logarithmic averaging of normalized partial sums.
//!
//! The crate has three layers:
//!
//! * deterministic weight-sequence machinery: schemes `d_k`, prefix totals
//!   `D_N`, and the growth/decay diagnostics that decide whether a scheme
//!   is admissible ([`weights`]);
//! * stochastic models: seeded partial-sum paths `S_k`, their normalized
//!   values `T_k = S_k/a_k - b_k`, and the test-function catalog with
//!   integrals against the limit law ([`models`], [`functions`]);
//! * the averaging and verification layer: streaming computation of
//!   `A_N = D_N^{-1} sum d_k f(T_k)`, convergence experiments across seeds,
//!   and Monte Carlo verification of the covariance and moment bounds that
//!   drive the almost-sure convergence argument ([`averaging`],
//!   [`verification`]).
//!
//! Everything stochastic is deterministic given a `u64` seed: generators
//! are counter-based ChaCha8 substreams (see [`rng`]) and all parallel
//! reductions are ordered, so results are bit-identical across platforms
//! and thread counts.

pub mod averaging;
pub mod error;
pub mod functions;
pub mod models;
pub mod numeric;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod verification;
pub mod weights;

pub use error::{Error, Result};
pub use report::{
    BoundReport, Condition, ConditionReport, Estimate, Lemma, TracePoint, Verdict,
};
pub use weights::{
    check_c2, check_c3, lemma1_trace, lemma5_ratio, pair_sum_bruteforce,
    pair_sum_checkpoints, power_sum, prefix_sums, v_quantity, PairSumMode, PowerSumCache,
    PrefixCache, WeightScheme, PAIR_SUM_AGREEMENT,
};

pub use averaging::{
    default_checkpoints, ratio_consecutive, run_experiment, subsequence_checkpoints,
    CheckpointSummary, ConvergenceTrace, LogAverageAccumulator, INTEGRAL_TOL,
};
pub use functions::{
    integral_against, integral_quadrature, lipschitz_audit, AuditGrid, IntegralResult,
    LipschitzFunction, Method,
};
pub use models::{
    check_c4_growth, estimate_mu_moment, ks_statistic, simulate_path, IncrementLaw, LimitLaw,
    NormalizedForm, PathPoint, PathSample, PathStream, SequenceModel,
};
pub use verification::{lemma2_check, lemma3_check, lemma4_check, MeanTable, XiEstimator};
