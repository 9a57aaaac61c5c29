use clap::ValueEnum;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverId {
    Davenport,
    Gp,
    Gs,
    Gm,
    TwoPoint,
    TwoPointWeighted,
    OnePoint,
}

impl SolverId {
    /// Point count the solver is restricted to, if any.
    pub fn required_n(self) -> Option<usize> {
        match self {
            SolverId::TwoPoint | SolverId::TwoPointWeighted => Some(2),
            SolverId::OnePoint => Some(1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    Uniform,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Emit {
    Csv,
    Json,
    Both,
}

impl Emit {
    pub fn csv(self) -> bool {
        matches!(self, Emit::Csv | Emit::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Emit::Json | Emit::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub solver: SolverId,
    pub n: usize,
    pub noise_sigma: f64,
    pub trials: u64,
    pub seed: u64,
    pub weight_mode: WeightMode,
    #[serde(skip)]
    pub emit: Emit,
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("--n must be at least 1")]
    NoPoints,
    #[error("--trials must be at least 1")]
    NoTrials,
    #[error("--noise must be finite and nonnegative, got {0}")]
    BadNoise(f64),
    #[error("solver {solver:?} needs --n {needed}, got {got}")]
    PointCount {
        solver: SolverId,
        needed: usize,
        got: usize,
    },
    #[error("solver two-point is the equal-weight solution; use --weights uniform or two-point-weighted")]
    WeightedUnweighted,
    #[error("BENCH_THREADS must be a positive integer, got {0:?}")]
    BadThreads(String),
}

impl ExperimentConfig {
    pub fn new(solver: SolverId, n: usize, noise_sigma: f64, trials: u64, seed: u64) -> Self {
        Self {
            solver,
            n,
            noise_sigma,
            trials,
            seed,
            weight_mode: WeightMode::Uniform,
            emit: Emit::Csv,
            timing: false,
        }
    }

    pub fn with_weights(mut self, mode: WeightMode) -> Self {
        self.weight_mode = mode;
        self
    }

    pub fn with_timing(mut self, timing: bool) -> Self {
        self.timing = timing;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::NoPoints);
        }
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(ConfigError::BadNoise(self.noise_sigma));
        }
        if let Some(needed) = self.solver.required_n() {
            if self.n != needed {
                return Err(ConfigError::PointCount {
                    solver: self.solver,
                    needed,
                    got: self.n,
                });
            }
        }
        if self.solver == SolverId::TwoPoint && self.weight_mode == WeightMode::Random {
            return Err(ConfigError::WeightedUnweighted);
        }
        Ok(())
    }
}

/// Reads the worker count from `BENCH_THREADS`; `None` means the default pool.
pub fn threads_from_env() -> Result<Option<usize>, ConfigError> {
    match std::env::var("BENCH_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(ConfigError::BadThreads(s)),
        },
    }
}
