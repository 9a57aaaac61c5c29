//! Per-trial random streams and synthetic observation sets.
//!
//! Every trial owns a ChaCha8 generator keyed by the experiment seed and
//! positioned on the stream numbered by the trial index, so trials can be
//! generated in any order or on any thread with identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use su2wahba::{rotate_vec, Observation, ObservationSet, UnitQuaternion, UnitVec3};

use crate::config::WeightMode;

const MIN_PRE_NORM: f64 = 1e-6;

pub struct TrialRng {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl TrialRng {
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Self { rng, spare: None }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Standard normal by the Marsaglia polar method. Each accepted pair
    /// yields two samples; the second is cached for the next call.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    fn gaussian3(&mut self) -> [f64; 3] {
        [self.gaussian(), self.gaussian(), self.gaussian()]
    }

    fn unit3(&mut self) -> UnitVec3 {
        loop {
            let v = self.gaussian3();
            if norm(&v) >= MIN_PRE_NORM {
                return UnitVec3::from_array(v).expect("nonzero");
            }
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub obs: ObservationSet,
    pub q_gt: UnitQuaternion,
}

/// Draws one synthetic instance.
///
/// Order of draws: the ground-truth quaternion (4 normals), then for each
/// point its reference (3 normals) and its noise (3 normals), then the
/// weights. Noise is drawn even when `sigma == 0`, in which case the targets
/// are the exact rotated references.
pub fn sample_trial(rng: &mut TrialRng, n: usize, sigma: f64, weights: WeightMode) -> Trial {
    let q_gt = loop {
        let q = [
            rng.gaussian(),
            rng.gaussian(),
            rng.gaussian(),
            rng.gaussian(),
        ];
        if norm(&q) >= MIN_PRE_NORM {
            break UnitQuaternion::from_array(q).expect("nonzero");
        }
    };
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let a = rng.unit3();
        let ra = rotate_vec(&q_gt, &a);
        let b = loop {
            let e = rng.gaussian3();
            if sigma == 0.0 {
                break ra;
            }
            let t = [
                ra.x() + sigma * e[0],
                ra.y() + sigma * e[1],
                ra.z() + sigma * e[2],
            ];
            if norm(&t) >= MIN_PRE_NORM {
                break UnitVec3::from_array(t).expect("nonzero");
            }
        };
        pairs.push((a, b));
    }
    let obs = pairs
        .into_iter()
        .map(|(a, b)| {
            let w = match weights {
                WeightMode::Uniform => 1.0,
                WeightMode::Random => loop {
                    let w = rng.uniform();
                    if w >= su2wahba::types::MIN_WEIGHT {
                        break w;
                    }
                },
            };
            Observation::new(a, b, w).expect("valid weight")
        })
        .collect();
    Trial {
        obs: ObservationSet::new(obs).expect("nonempty"),
        q_gt,
    }
}
