use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use su2wahba::{
    one_point_align, quat_angular_error, solve_davenport, solve_gm, solve_gp, solve_gs,
    two_point_solve, ObservationSet, StereoObservationSet, UnitQuaternion,
};

use crate::config::{ExperimentConfig, SolverId};
use crate::sampling::{sample_trial, TrialRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub trial: u64,
    /// Geodesic error in degrees; NaN when the solver failed.
    pub theta_err_deg: f64,
    pub runtime_ns: Option<u64>,
}

impl TrialResult {
    pub fn failed(&self) -> bool {
        self.theta_err_deg.is_nan()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub median_theta_err_deg: f64,
    pub mean_theta_err_deg: f64,
    pub p90_theta_err_deg: f64,
    pub median_runtime_ns: Option<u64>,
    pub trials: u64,
    pub errors: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub summary: Summary,
    pub results: Vec<TrialResult>,
}

/// Solver input prepared outside the timed region.
pub enum Prepared {
    Sphere(ObservationSet),
    Stereo(StereoObservationSet),
}

pub fn prepare(solver: SolverId, obs: ObservationSet) -> Prepared {
    match solver {
        SolverId::Gp | SolverId::Gm => {
            Prepared::Stereo(StereoObservationSet::from_observations(&obs))
        }
        _ => Prepared::Sphere(obs),
    }
}

pub fn solve(solver: SolverId, input: &Prepared) -> su2wahba::Result<UnitQuaternion> {
    match (solver, input) {
        (SolverId::Gp, Prepared::Stereo(s)) => solve_gp(s).map(|r| r.q),
        (SolverId::Gm, Prepared::Stereo(s)) => solve_gm(s).map(|r| r.q),
        (SolverId::Davenport, Prepared::Sphere(o)) => solve_davenport(o).map(|r| r.q),
        (SolverId::Gs, Prepared::Sphere(o)) => solve_gs(o).map(|r| r.q),
        (SolverId::OnePoint, Prepared::Sphere(o)) => {
            let p = &o.as_slice()[0];
            Ok(one_point_align(&p.reference, &p.target))
        }
        (SolverId::TwoPoint | SolverId::TwoPointWeighted, Prepared::Sphere(o)) => {
            let [p1, p2] = [&o.as_slice()[0], &o.as_slice()[1]];
            Ok(two_point_solve(
                &p1.reference,
                &p2.reference,
                &p1.target,
                &p2.target,
                p1.weight,
                p2.weight,
            )
            .q)
        }
        _ => unreachable!("input prepared for a different solver"),
    }
}

pub fn run_trial(cfg: &ExperimentConfig, trial: u64) -> TrialResult {
    let mut rng = TrialRng::for_trial(cfg.seed, trial);
    let t = sample_trial(&mut rng, cfg.n, cfg.noise_sigma, cfg.weight_mode);
    let input = prepare(cfg.solver, t.obs);
    let start = Instant::now();
    let q = solve(cfg.solver, &input);
    let elapsed = start.elapsed();
    TrialResult {
        trial,
        theta_err_deg: q.map_or(f64::NAN, |q| quat_angular_error(&q, &t.q_gt)),
        runtime_ns: cfg
            .timing
            .then(|| u64::try_from(elapsed.as_nanos()).unwrap_or(u64::MAX)),
    }
}

/// Lower median for even counts.
pub fn lower_median<T: Copy + PartialOrd>(sorted: &[T]) -> Option<T> {
    (!sorted.is_empty()).then(|| sorted[(sorted.len() - 1) / 2])
}

/// Order statistic at index `ceil(0.9 n) − 1`.
pub fn p90<T: Copy>(sorted: &[T]) -> Option<T> {
    let n = sorted.len();
    (n > 0).then(|| sorted[(9 * n).div_ceil(10) - 1])
}

pub fn summarize(cfg: &ExperimentConfig, results: &[TrialResult]) -> Summary {
    let mut ok: Vec<f64> = results
        .iter()
        .filter(|r| !r.failed())
        .map(|r| r.theta_err_deg)
        .collect();
    ok.sort_by(f64::total_cmp);
    let mean = if ok.is_empty() {
        f64::NAN
    } else {
        ok.iter().sum::<f64>() / ok.len() as f64
    };
    let mut rt: Vec<u64> = results.iter().filter_map(|r| r.runtime_ns).collect();
    rt.sort_unstable();
    Summary {
        config: cfg.clone(),
        median_theta_err_deg: lower_median(&ok).unwrap_or(f64::NAN),
        mean_theta_err_deg: mean,
        p90_theta_err_deg: p90(&ok).unwrap_or(f64::NAN),
        median_runtime_ns: lower_median(&rt),
        trials: results.len() as u64,
        errors: results.iter().filter(|r| r.failed()).count() as u64,
    }
}

/// Runs every trial, in parallel when `threads` is not `Some(1)`. Results are
/// in trial order and independent of the worker count.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Experiment {
    let work = || -> Vec<TrialResult> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_trial(cfg, i))
            .collect()
    };
    let results = match threads {
        Some(1) => (0..cfg.trials).map(|i| run_trial(cfg, i)).collect(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .expect("thread pool")
            .install(work),
        None => work(),
    };
    Experiment {
        summary: summarize(cfg, &results),
        results,
    }
}
