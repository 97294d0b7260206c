//! Path-following corrections fed to the coordination layer.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{DisturbanceSpec, Impulse};
use crate::mission::Kinematics;
use crate::mpc::{alpha_correction, AlphaParams};

/// Keeps the synthetic draws independent of the link-failure stream, which
/// uses the bare seed.
const SYNTHETIC_SALT: u64 = 0x5eed_d157_0b0e_0001;

/// `e_{k+1} = e_k·e^{−νh} + impulse`.
pub fn kinematic_tracker_step(error: &Vector3<f64>, nu: f64, h: f64, impulse: &Vector3<f64>) -> Vector3<f64> {
    error * (-nu * h).exp() + impulse
}

/// Correction `α` and measured position of one agent at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub alpha: f64,
    pub actual: Vector3<f64>,
}

/// Stateful disturbance source for a whole team.
#[derive(Debug, Clone)]
pub struct DisturbanceModel {
    spec: DisturbanceSpec,
    errors: Vec<Vector3<f64>>,
    seed: u64,
    step: f64,
}

impl DisturbanceModel {
    pub fn new(spec: &DisturbanceSpec, n_agents: usize, seed: u64, step: f64) -> Self {
        Self {
            spec: spec.clone(),
            errors: vec![Vector3::zeros(); n_agents],
            seed,
            step,
        }
    }

    /// Measurements at step `k ≥ 1` given each agent's reference point.
    pub fn measure(&mut self, k: u64, references: &[Kinematics<f64>], params: &AlphaParams<f64>) -> Vec<Measurement> {
        let h = self.step;
        match &self.spec {
            DisturbanceSpec::None => references
                .iter()
                .map(|r| Measurement {
                    alpha: 0.0,
                    actual: r.position,
                })
                .collect(),
            DisturbanceSpec::Synthetic { d, nu } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ SYNTHETIC_SALT);
                rng.set_stream(k);
                let envelope = d * (-nu * k as f64 * h).exp();
                references
                    .iter()
                    .map(|r| {
                        let alpha = envelope * rng.random_range(-1.0..=1.0);
                        Measurement {
                            alpha,
                            actual: r.position - unit(&r.velocity) * alpha,
                        }
                    })
                    .collect()
            }
            DisturbanceSpec::KinematicTracker { nu, impulses } => {
                let nu = *nu;
                references
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let kick = impulse_at(impulses, k, i, &r.velocity);
                        self.errors[i] = kinematic_tracker_step(&self.errors[i], nu, h, &kick);
                        let actual = r.position + self.errors[i];
                        Measurement {
                            alpha: alpha_correction(&r.position, &r.velocity, &actual, params),
                            actual,
                        }
                    })
                    .collect()
            }
        }
    }
}

fn unit(v: &Vector3<f64>) -> Vector3<f64> {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        Vector3::zeros()
    }
}

fn impulse_at(impulses: &[Impulse], k: u64, agent: usize, velocity: &Vector3<f64>) -> Vector3<f64> {
    impulses
        .iter()
        .filter(|imp| imp.step == k && imp.agent == agent)
        .fold(Vector3::zeros(), |acc, imp| {
            let world = imp
                .offset
                .map_or_else(Vector3::zeros, |o| Vector3::new(o[0], o[1], o[2]));
            let along = unit(velocity) * imp.along_track.unwrap_or(0.0);
            acc + world + along
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(n: usize) -> Vec<Kinematics<f64>> {
        vec![
            Kinematics {
                position: Vector3::zeros(),
                velocity: Vector3::new(2.0, 0.0, 0.0),
                acceleration: Vector3::zeros(),
            };
            n
        ]
    }

    fn params() -> AlphaParams<f64> {
        AlphaParams {
            beta: 1.0,
            regularizer: 1e-6,
        }
    }

    #[test]
    fn no_impulses_means_no_correction() {
        let spec = DisturbanceSpec::KinematicTracker {
            nu: 1.0,
            impulses: vec![],
        };
        let mut m = DisturbanceModel::new(&spec, 2, 0, 0.1);
        for k in 1..20 {
            for x in m.measure(k, &straight(2), &params()) {
                assert_eq!(x.alpha, 0.0);
                assert_eq!(x.actual, Vector3::zeros());
            }
        }
    }

    #[test]
    fn along_track_error_decays_at_rate_nu() {
        let (nu, h, e0) = (0.5, 0.1, 0.3);
        let spec = DisturbanceSpec::KinematicTracker {
            nu,
            impulses: vec![Impulse {
                step: 1,
                agent: 0,
                offset: None,
                along_track: Some(e0),
            }],
        };
        let mut m = DisturbanceModel::new(&spec, 1, 0, h);
        let speed = 2.0;
        for k in 1..50u64 {
            let a = m.measure(k, &straight(1), &params())[0].alpha;
            let want = e0 * (-nu * (k - 1) as f64 * h).exp() * speed / (speed + 1e-6);
            // ahead of the reference gives a negative correction
            assert!((a + want).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn synthetic_envelope_and_reproducibility() {
        let spec = DisturbanceSpec::Synthetic { d: 0.2, nu: 1.5 };
        let mut a = DisturbanceModel::new(&spec, 4, 9, 0.05);
        let mut b = DisturbanceModel::new(&spec, 4, 9, 0.05);
        for k in 1..100u64 {
            let xa = a.measure(k, &straight(4), &params());
            let xb = b.measure(k, &straight(4), &params());
            assert_eq!(xa, xb);
            let env = 0.2 * (-1.5 * k as f64 * 0.05).exp();
            assert!(xa.iter().all(|x| x.alpha.abs() <= env));
        }
    }
}
