//! Experiment configuration: JSON schema, defaults, validation, and the
//! string forms used by both config files and command-line flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use asclt_core::{IncrementLaw, LipschitzFunction, SequenceModel, WeightScheme};
use serde::{Deserialize, Serialize};

/// Output serialization for artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// One experiment, fully specified. Every field has a default, the default
/// configuration validates, and a config file only needs the fields it
/// wants to change. Flags override file values field by field.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// What to run: `check-weights`, `simulate`, `verify:lemma2` ..
    /// `verify:lemma5`, `sweep`, or `integral`.
    pub operation: String,
    /// Increment law: `standard-normal`, `rademacher`, `uniform`,
    /// `exponential`.
    pub model: String,
    /// Weight scheme: `harmonic`, `power:THETA`, `power-log:GAMMA`, or
    /// `custom:W1,W2,...`.
    pub weights: String,
    /// Integrand: `identity`, `abs`, `arctan`, `constant:C`,
    /// `clamped-linear:LO,HI`, `soft-indicator:X0,DELTA`.
    pub function: String,
    pub n_max: usize,
    /// Where `A_N` is recorded during `simulate`; must be increasing and
    /// within `[1, n_max]`. When empty, decade points `10^3..10^6` capped
    /// at `n_max` (or just `n_max` when it is below 1000).
    pub checkpoints: Vec<usize>,
    /// Explicit replica seeds. When empty, `seed_count` seeds are derived
    /// from `master_seed` (or the `ASCLT_SEED` environment variable).
    pub seeds: Vec<u64>,
    pub seed_count: usize,
    pub master_seed: u64,
    pub reps: usize,
    pub rho: f64,
    /// Exponent split in the moment condition; defaults to `rho / 2`.
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu: u32,
    pub p: u32,
    pub eta: f64,
    /// Index pairs for `verify:lemma2`.
    pub pairs: Vec<(usize, usize)>,
    /// Block start for `verify:lemma3`.
    pub k: usize,
    /// Window start for `verify:lemma3`; the window end is `n_max`.
    pub m: usize,
    /// Evaluation grid for `verify:lemma4`. When empty, powers of two from
    /// 64 up to `min(8192, n_max)`.
    pub n_grid: Vec<usize>,
    /// Artifact path; stdout when absent.
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Worker threads; 0 picks the machine default.
    pub threads: usize,
    /// Parameter grid for `sweep`: field name to list of values.
    pub sweep: BTreeMap<String, Vec<serde_json::Value>>,
    /// Operation each sweep point runs.
    pub sweep_operation: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            operation: "simulate".into(),
            model: "standard-normal".into(),
            weights: "harmonic".into(),
            function: "arctan".into(),
            n_max: 1_000_000,
            checkpoints: Vec::new(),
            seeds: Vec::new(),
            seed_count: 20,
            master_seed: 42,
            reps: 20_000,
            rho: 1.0,
            r: 0.5,
            alpha: 0.5,
            beta: 0.5,
            mu: 8,
            p: 2,
            eta: 0.9,
            pairs: vec![(4, 16), (16, 64), (64, 256)],
            k: 1,
            m: 1,
            n_grid: Vec::new(),
            out: None,
            format: Format::Json,
            threads: 0,
            sweep: BTreeMap::new(),
            sweep_operation: "verify:lemma5".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config parse error: {e}"))
    }

    /// Replica seeds: the explicit list, or a `seed_count`-long sequence
    /// derived from the master seed via splitmix64.
    pub fn resolved_seeds(&self) -> Vec<u64> {
        if !self.seeds.is_empty() {
            return self.seeds.clone();
        }
        let mut state = self.master_seed;
        (0..self.seed_count).map(|_| splitmix64(&mut state)).collect()
    }

    pub fn parse_model(&self) -> Result<SequenceModel, String> {
        let law = match self.model.as_str() {
            "standard-normal" => IncrementLaw::StandardNormal,
            "rademacher" => IncrementLaw::Rademacher,
            "uniform" => IncrementLaw::UniformCentered,
            "exponential" => IncrementLaw::ExponentialCentered,
            other => {
                return Err(format!(
                    "unknown model `{other}` (expected standard-normal, rademacher, uniform, or exponential)"
                ))
            }
        };
        Ok(SequenceModel::new(law))
    }

    pub fn parse_weights(&self) -> Result<WeightScheme, String> {
        let (name, arg) = split_spec(&self.weights);
        match (name, arg) {
            ("harmonic", None) => Ok(WeightScheme::harmonic()),
            ("power", Some(a)) => {
                let theta: f64 = a.parse().map_err(|_| bad_number("power", a))?;
                WeightScheme::power(theta).map_err(|e| e.to_string())
            }
            ("power-log", Some(a)) => {
                let gamma: f64 = a.parse().map_err(|_| bad_number("power-log", a))?;
                WeightScheme::power_log(gamma).map_err(|e| e.to_string())
            }
            ("custom", Some(a)) => {
                let table: Result<Vec<f64>, _> =
                    a.split(',').map(|s| s.trim().parse::<f64>()).collect();
                let table = table.map_err(|_| bad_number("custom", a))?;
                WeightScheme::custom(table).map_err(|e| e.to_string())
            }
            _ => Err(format!(
                "unknown weights `{}` (expected harmonic, power:THETA, power-log:GAMMA, or custom:W1,W2,...)",
                self.weights
            )),
        }
    }

    pub fn parse_function(&self) -> Result<LipschitzFunction, String> {
        let (name, arg) = split_spec(&self.function);
        match (name, arg) {
            ("identity", None) => Ok(LipschitzFunction::identity()),
            ("abs", None) => Ok(LipschitzFunction::abs()),
            ("arctan", None) => Ok(LipschitzFunction::arctan()),
            ("constant", Some(a)) => {
                let c: f64 = a.parse().map_err(|_| bad_number("constant", a))?;
                LipschitzFunction::constant(c).map_err(|e| e.to_string())
            }
            ("clamped-linear", Some(a)) => {
                let (lo, hi) = parse_pair(a).ok_or_else(|| bad_number("clamped-linear", a))?;
                LipschitzFunction::clamped_linear(lo, hi).map_err(|e| e.to_string())
            }
            ("soft-indicator", Some(a)) => {
                let (x0, delta) = parse_pair(a).ok_or_else(|| bad_number("soft-indicator", a))?;
                LipschitzFunction::soft_indicator(x0, delta).map_err(|e| e.to_string())
            }
            _ => Err(format!(
                "unknown function `{}` (expected identity, abs, arctan, constant:C, clamped-linear:LO,HI, or soft-indicator:X0,DELTA)",
                self.function
            )),
        }
    }

    /// The lemma4 grid: explicit, or powers of two from 64 to
    /// `min(8192, n_max)`.
    pub fn resolved_n_grid(&self) -> Vec<usize> {
        if !self.n_grid.is_empty() {
            return self.n_grid.clone();
        }
        let cap = self.n_max.min(8192);
        (6..=13).map(|e| 1usize << e).filter(|&n| n <= cap).collect()
    }

    /// Simulate checkpoints: explicit, or decade points capped at `n_max`.
    pub fn resolved_checkpoints(&self) -> Vec<usize> {
        if !self.checkpoints.is_empty() {
            return self.checkpoints.clone();
        }
        let decades: Vec<usize> =
            [1_000, 10_000, 100_000, 1_000_000].into_iter().filter(|&c| c <= self.n_max).collect();
        if decades.is_empty() {
            vec![self.n_max]
        } else {
            decades
        }
    }
}

/// Every violated constraint, with the offending values; empty iff the
/// configuration is runnable. Each message leads with the inequality.
pub fn validate_config(cfg: &ExperimentConfig) -> Vec<String> {
    let mut v = Vec::new();

    if !(cfg.r < cfg.rho) {
        v.push(format!("r < rho: got r = {}, rho = {}", cfg.r, cfg.rho));
    } else {
        let mu_min = 2f64.max((4.0 / (cfg.rho - cfg.r)).ceil()) as u32;
        if cfg.mu < mu_min {
            v.push(format!(
                "mu >= max(2, ceil(4/(rho - r))): got mu = {}, rho = {}, r = {} (requires mu >= {mu_min})",
                cfg.mu, cfg.rho, cfg.r
            ));
        }
    }
    if cfg.p > cfg.mu {
        v.push(format!("p <= mu: got p = {}, mu = {}", cfg.p, cfg.mu));
    }
    if cfg.p == 0 {
        v.push(format!("p >= 1: got p = {}", cfg.p));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        v.push(format!("alpha in (0,1): got alpha = {}", cfg.alpha));
    }
    if !(cfg.beta > 0.0 && cfg.beta < 1.0) {
        v.push(format!("beta in (0,1): got beta = {}", cfg.beta));
    }
    if !(cfg.rho > 0.0) {
        v.push(format!("rho > 0: got rho = {}", cfg.rho));
    }
    if !(cfg.eta > 0.0) {
        v.push(format!("eta > 0: got eta = {}", cfg.eta));
    }
    if cfg.n_max == 0 {
        v.push("n_max >= 1: got n_max = 0".into());
    }
    if cfg.reps < 1000 {
        v.push(format!("reps >= 1000: got reps = {}", cfg.reps));
    }
    if cfg.seeds.is_empty() && cfg.seed_count == 0 {
        v.push("seed_count >= 1 when seeds is empty".into());
    }
    if !cfg.checkpoints.is_empty() {
        if cfg.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            v.push(format!("checkpoints strictly increasing: got {:?}", cfg.checkpoints));
        }
        if cfg.checkpoints[0] == 0 || *cfg.checkpoints.last().unwrap() > cfg.n_max {
            v.push(format!(
                "checkpoints within [1, n_max]: got {:?} with n_max = {}",
                cfg.checkpoints, cfg.n_max
            ));
        }
    }
    if cfg.pairs.iter().any(|&(k, l)| k == 0 || k > l) {
        v.push(format!("pairs need 1 <= k <= l: got {:?}", cfg.pairs));
    }
    if cfg.k > cfg.m {
        v.push(format!("k <= m: got k = {}, m = {}", cfg.k, cfg.m));
    }
    if cfg.m == 0 || cfg.m > cfg.n_max {
        v.push(format!("1 <= m <= n_max: got m = {}, n_max = {}", cfg.m, cfg.n_max));
    }
    let grid = cfg.resolved_n_grid();
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        v.push(format!("n_grid strictly increasing and >= 1: got {grid:?}"));
    }

    if !matches!(
        cfg.operation.as_str(),
        "check-weights" | "simulate" | "verify:lemma2" | "verify:lemma3" | "verify:lemma4"
            | "verify:lemma5" | "sweep" | "integral"
    ) {
        v.push(format!("unknown operation `{}`", cfg.operation));
    }
    if cfg.operation == "sweep" {
        if cfg.sweep.is_empty() {
            v.push("sweep requires a nonempty `sweep` grid".into());
        }
        if cfg.sweep_operation == "sweep" {
            v.push("sweep_operation cannot itself be `sweep`".into());
        }
    }

    if let Err(e) = cfg.parse_model() {
        v.push(e);
    }
    if let Err(e) = cfg.parse_weights() {
        v.push(e);
    }
    if let Err(e) = cfg.parse_function() {
        v.push(e);
    }
    v
}

fn split_spec(spec: &str) -> (&str, Option<&str>) {
    match spec.split_once(':') {
        Some((name, arg)) => (name, Some(arg)),
        None => (spec, None),
    }
}

fn parse_pair(arg: &str) -> Option<(f64, f64)> {
    let (a, b) = arg.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn bad_number(what: &str, arg: &str) -> String {
    format!("malformed `{what}` argument `{arg}`")
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
