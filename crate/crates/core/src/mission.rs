//! Desired trajectories, physical bounds and the virtual-time limits derived
//! from them.

use nalgebra::Vector3;
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MissionError {
    #[error("physical bounds violate 0 <= v_min < v_d_min <= v_d_max < v_max: {0}")]
    InconsistentSpeeds(String),
    #[error("a_d_max = {a_d_max} must be non-negative and below a_max = {a_max}")]
    InconsistentAcceleration { a_d_max: f64, a_max: f64 },
    #[error(
        "derived virtual-time acceleration bound {0} is not positive; \
         a_max leaves no authority after the nominal acceleration"
    )]
    NoAccelerationAuthority(f64),
    #[error("virtual-time rate bounds [{0}, {1}] must strictly bracket the nominal pace 1")]
    DegenerateRate(f64, f64),
    #[error("trajectory duration must be positive, got {0}")]
    BadDuration(f64),
    #[error("composite trajectory has no segments")]
    EmptyComposite,
}

/// Position, velocity and acceleration of a reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics<T: Real> {
    pub position: Vector3<T>,
    pub velocity: Vector3<T>,
    pub acceleration: Vector3<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment<T: Real> {
    pub start: Vector3<T>,
    pub end: Vector3<T>,
    pub duration: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryKind<T: Real> {
    /// Horizontal circle around `center`, optionally with a vertical
    /// oscillation `z_amplitude·sin(z_omega·γ)`.
    Circle {
        center: Vector3<T>,
        radius: T,
        omega: T,
        phase: T,
        z_amplitude: T,
        z_omega: T,
    },
    Line {
        start: Vector3<T>,
        end: Vector3<T>,
    },
    /// Consecutive straight segments traversed at constant speed each.
    Composite {
        segments: Vec<Segment<T>>,
    },
}

/// An analytic desired trajectory `x_d : [0, t*_d] → ℝ³`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesiredTrajectory<T: Real> {
    kind: TrajectoryKind<T>,
    duration: T,
}

impl<T: Real> DesiredTrajectory<T> {
    pub fn circle(center: Vector3<T>, radius: T, omega: T, phase: T, duration: T) -> Result<Self, MissionError> {
        Self::new(
            TrajectoryKind::Circle {
                center,
                radius,
                omega,
                phase,
                z_amplitude: T::zero(),
                z_omega: T::zero(),
            },
            duration,
        )
    }

    pub fn line(start: Vector3<T>, end: Vector3<T>, duration: T) -> Result<Self, MissionError> {
        Self::new(TrajectoryKind::Line { start, end }, duration)
    }

    pub fn composite(segments: Vec<Segment<T>>) -> Result<Self, MissionError> {
        if segments.is_empty() {
            return Err(MissionError::EmptyComposite);
        }
        if let Some(s) = segments.iter().find(|s| s.duration <= T::zero()) {
            return Err(MissionError::BadDuration(s.duration.as_f64()));
        }
        let duration = segments.iter().fold(T::zero(), |acc, s| acc + s.duration);
        Self::new(TrajectoryKind::Composite { segments }, duration)
    }

    pub fn new(kind: TrajectoryKind<T>, duration: T) -> Result<Self, MissionError> {
        if !(duration > T::zero()) {
            return Err(MissionError::BadDuration(duration.as_f64()));
        }
        if let TrajectoryKind::Composite { segments } = &kind {
            if segments.is_empty() {
                return Err(MissionError::EmptyComposite);
            }
        }
        Ok(Self { kind, duration })
    }

    pub fn kind(&self) -> &TrajectoryKind<T> {
        &self.kind
    }

    pub fn duration(&self) -> T {
        self.duration
    }

    /// Evaluates the trajectory at virtual time `gamma`, clamped to
    /// `[0, duration]`.
    pub fn eval(&self, gamma: T) -> Kinematics<T> {
        let g = gamma.max(T::zero()).min(self.duration);
        match &self.kind {
            TrajectoryKind::Circle {
                center,
                radius,
                omega,
                phase,
                z_amplitude,
                z_omega,
            } => {
                let th = *omega * g + *phase;
                let (s, c) = (th.sin(), th.cos());
                let zt = *z_omega * g;
                let r = *radius;
                let w = *omega;
                Kinematics {
                    position: center + Vector3::new(r * c, r * s, *z_amplitude * zt.sin()),
                    velocity: Vector3::new(-r * w * s, r * w * c, *z_amplitude * *z_omega * zt.cos()),
                    acceleration: Vector3::new(
                        -r * w * w * c,
                        -r * w * w * s,
                        -*z_amplitude * *z_omega * *z_omega * zt.sin(),
                    ),
                }
            }
            TrajectoryKind::Line { start, end } => {
                let vel = (end - start) / self.duration;
                Kinematics {
                    position: start + vel * g,
                    velocity: vel,
                    acceleration: Vector3::zeros(),
                }
            }
            TrajectoryKind::Composite { segments } => {
                let mut t0 = T::zero();
                let last = segments.len() - 1;
                for (k, seg) in segments.iter().enumerate() {
                    if g < t0 + seg.duration || k == last {
                        let vel = (seg.end - seg.start) / seg.duration;
                        let local = (g - t0).min(seg.duration);
                        return Kinematics {
                            position: seg.start + vel * local,
                            velocity: vel,
                            acceleration: Vector3::zeros(),
                        };
                    }
                    t0 += seg.duration;
                }
                unreachable!("composite has at least one segment")
            }
        }
    }

    /// Smallest and largest speed over `samples + 1` evenly spaced points.
    pub fn speed_range(&self, samples: usize) -> (T, T) {
        let n = samples.max(1);
        (0..=n)
            .map(|k| {
                self.eval(self.duration * T::lit(k as f64) / T::lit(n as f64))
                    .velocity
                    .norm()
            })
            .fold((T::infinity(), T::zero()), |(lo, hi), s| (lo.min(s), hi.max(s)))
    }

    /// Largest acceleration magnitude over `samples + 1` evenly spaced points.
    pub fn max_acceleration(&self, samples: usize) -> T {
        let n = samples.max(1);
        (0..=n)
            .map(|k| {
                self.eval(self.duration * T::lit(k as f64) / T::lit(n as f64))
                    .acceleration
                    .norm()
            })
            .fold(T::zero(), |m, a| m.max(a))
    }
}

/// Vehicle speed and acceleration limits together with the mission-specific
/// bounds of the desired trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalBounds<T: Real> {
    pub v_min: T,
    pub v_max: T,
    pub a_max: T,
    pub v_d_min: T,
    pub v_d_max: T,
    pub a_d_max: T,
}

impl<T: Real> PhysicalBounds<T> {
    pub fn validate(&self) -> Result<(), MissionError> {
        let ok = T::zero() <= self.v_min
            && self.v_min < self.v_d_min
            && self.v_d_min <= self.v_d_max
            && self.v_d_max < self.v_max;
        if !ok {
            return Err(MissionError::InconsistentSpeeds(format!(
                "v_min={}, v_d_min={}, v_d_max={}, v_max={}",
                self.v_min, self.v_d_min, self.v_d_max, self.v_max
            )));
        }
        if !(self.a_d_max >= T::zero() && self.a_d_max < self.a_max) {
            return Err(MissionError::InconsistentAcceleration {
                a_d_max: self.a_d_max.as_f64(),
                a_max: self.a_max.as_f64(),
            });
        }
        Ok(())
    }

    /// Most permissive virtual-time limits compatible with these bounds:
    /// `γ̇ ∈ [v_min/v_d_min, v_max/v_d_max]` and `γ̈_max` from the acceleration
    /// inequality taken with equality.
    pub fn derive_gamma_bounds(&self) -> Result<GammaBounds<T>, MissionError> {
        self.validate()?;
        let rate_min = self.v_min / self.v_d_min;
        let rate_max = self.v_max / self.v_d_max;
        let accel_max = (self.a_max - rate_max * rate_max * self.a_d_max) / self.v_d_max;
        if !(accel_max > T::zero()) {
            return Err(MissionError::NoAccelerationAuthority(accel_max.as_f64()));
        }
        GammaBounds::new(rate_min, rate_max, accel_max)
    }
}

/// Limits on the virtual-time rate `γ̇` and acceleration `|γ̈|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaBounds<T: Real> {
    pub rate_min: T,
    pub rate_max: T,
    pub accel_max: T,
}

impl<T: Real> GammaBounds<T> {
    pub fn new(rate_min: T, rate_max: T, accel_max: T) -> Result<Self, MissionError> {
        if !(rate_min < T::one() && T::one() < rate_max) {
            return Err(MissionError::DegenerateRate(rate_min.as_f64(), rate_max.as_f64()));
        }
        if !(accel_max > T::zero()) {
            return Err(MissionError::NoAccelerationAuthority(accel_max.as_f64()));
        }
        Ok(Self {
            rate_min,
            rate_max,
            accel_max,
        })
    }

    /// `δ̇_min = γ̇_min − 1`.
    pub fn deviation_rate_min(&self) -> T {
        self.rate_min - T::one()
    }

    /// `δ̇_max = γ̇_max − 1`.
    pub fn deviation_rate_max(&self) -> T {
        self.rate_max - T::one()
    }

    /// Whether `γ̈_max·v_d_max + γ̇_max²·a_d_max ≤ a_max` holds (up to rounding).
    pub fn respects(&self, b: &PhysicalBounds<T>) -> bool {
        let lhs = self.accel_max * b.v_d_max + self.rate_max * self.rate_max * b.a_d_max;
        lhs <= b.a_max * (T::one() + T::lit(1e-12))
            && self.rate_min >= b.v_min / b.v_d_min * (T::one() - T::lit(1e-12))
            && self.rate_max <= b.v_max / b.v_d_max * (T::one() + T::lit(1e-12))
    }
}

/// Smallest pairwise Euclidean distance; `+∞` with fewer than two points.
pub fn min_pairwise_separation<T: Real>(positions: &[Vector3<T>]) -> T {
    let mut best = T::infinity();
    for (i, a) in positions.iter().enumerate() {
        for b in &positions[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    #[test]
    fn circle_at_origin_of_time() {
        let w = 0.3;
        let c = DesiredTrajectory::circle(v(0.0, 0.0, 2.0), 5.0, w, 0.0, 70.0).unwrap();
        let k = c.eval(0.0);
        assert_abs_diff_eq!((k.position - v(5.0, 0.0, 2.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.velocity.norm(), 5.0 * w, epsilon = 1e-15);
    }

    #[test]
    fn line_midpoint_and_clamping() {
        let l = DesiredTrajectory::line(v(0.0, 0.0, 0.0), v(10.0, 0.0, 0.0), 10.0).unwrap();
        let k = l.eval(5.0);
        assert_eq!(k.position, v(5.0, 0.0, 0.0));
        assert_eq!(k.velocity, v(1.0, 0.0, 0.0));
        assert_eq!(l.eval(11.0), l.eval(10.0));
        assert_eq!(l.eval(-1.0), l.eval(0.0));
    }

    #[test]
    fn composite_walks_segments() {
        let t = DesiredTrajectory::composite(vec![
            Segment {
                start: v(0.0, 0.0, 0.0),
                end: v(2.0, 0.0, 0.0),
                duration: 2.0,
            },
            Segment {
                start: v(2.0, 0.0, 0.0),
                end: v(2.0, 6.0, 0.0),
                duration: 3.0,
            },
        ])
        .unwrap();
        assert_eq!(t.duration(), 5.0);
        assert_eq!(t.eval(1.0).position, v(1.0, 0.0, 0.0));
        assert_eq!(t.eval(3.5).position, v(2.0, 3.0, 0.0));
        assert_eq!(t.eval(3.5).velocity, v(0.0, 2.0, 0.0));
        assert_eq!(t.eval(9.0).position, v(2.0, 6.0, 0.0));
        assert!(DesiredTrajectory::<f64>::composite(vec![]).is_err());
    }

    #[test]
    fn finite_difference_velocity() {
        let trajs = vec![
            DesiredTrajectory::new(
                TrajectoryKind::Circle {
                    center: v(1.0, -2.0, 3.0),
                    radius: 4.0,
                    omega: 0.2,
                    phase: 0.7,
                    z_amplitude: 0.5,
                    z_omega: 0.9,
                },
                60.0,
            )
            .unwrap(),
            DesiredTrajectory::line(v(0.0, 1.0, 2.0), v(7.0, -3.0, 5.0), 12.0).unwrap(),
            DesiredTrajectory::composite(vec![
                Segment {
                    start: v(0.0, 0.0, 0.0),
                    end: v(3.0, 4.0, 0.0),
                    duration: 5.0,
                },
                Segment {
                    start: v(3.0, 4.0, 0.0),
                    end: v(3.0, 4.0, 9.0),
                    duration: 6.0,
                },
            ])
            .unwrap(),
        ];
        let eps = 1e-6;
        for t in &trajs {
            for k in 1..40 {
                let g = t.duration() * (k as f64 + 0.37) / 41.0;
                let fd = (t.eval(g + eps).position - t.eval(g - eps).position) / (2.0 * eps);
                assert!((fd - t.eval(g).velocity).norm() <= 1e-5, "{g}");
                let fa = (t.eval(g + eps).velocity - t.eval(g - eps).velocity) / (2.0 * eps);
                assert!((fa - t.eval(g).acceleration).norm() <= 1e-4, "{g}");
            }
        }
    }

    #[test]
    fn gamma_bounds_from_physical_limits() {
        let b = PhysicalBounds::<f64> {
            v_min: 0.0,
            v_d_min: 1.0,
            v_max: 6.0,
            v_d_max: 3.0,
            a_max: 10.0,
            a_d_max: 1.0,
        };
        let g = b.derive_gamma_bounds().unwrap();
        assert_eq!(g.rate_min, 0.0);
        assert_eq!(g.rate_max, 2.0);
        assert_eq!(g.accel_max, 2.0);
        // equality in the acceleration inequality
        assert_eq!(g.accel_max * b.v_d_max + g.rate_max.powi(2) * b.a_d_max, b.a_max);
        assert!(g.respects(&b));
        assert_eq!(g.deviation_rate_min(), -1.0);
        assert_eq!(g.deviation_rate_max(), 1.0);
    }

    #[test]
    fn degenerate_and_exhausted_bounds_rejected() {
        let b = PhysicalBounds::<f64> {
            v_min: 1.0,
            v_d_min: 1.0,
            v_max: 3.0,
            v_d_max: 3.0,
            a_max: 10.0,
            a_d_max: 1.0,
        };
        assert!(matches!(
            b.derive_gamma_bounds(),
            Err(MissionError::InconsistentSpeeds(_))
        ));
        let b = PhysicalBounds::<f64> {
            v_min: 0.0,
            v_d_min: 1.0,
            v_max: 6.0,
            v_d_max: 3.0,
            a_max: 4.0,
            a_d_max: 1.0,
        };
        assert_eq!(b.derive_gamma_bounds(), Err(MissionError::NoAccelerationAuthority(0.0)));
        assert!(matches!(
            GammaBounds::new(1.0, 1.0, 1.0),
            Err(MissionError::DegenerateRate(..))
        ));
    }

    #[test]
    fn separation() {
        assert_eq!(min_pairwise_separation(&[v(0.0, 0.0, 0.0), v(3.0, 4.0, 0.0)]), 5.0);
        assert_eq!(min_pairwise_separation(&[v(1.0, 1.0, 1.0), v(1.0, 1.0, 1.0)]), 0.0);
        assert_eq!(min_pairwise_separation(&[v(1.0, 1.0, 1.0)]), f64::INFINITY);
    }

    #[test]
    fn concentric_circles_one_meter_apart() {
        let inner = DesiredTrajectory::circle(v(0.0, 0.0, 0.0), 4.0, 0.1, 0.0, 60.0).unwrap();
        let outer = DesiredTrajectory::circle(v(0.0, 0.0, 0.0), 5.0, 0.1, 0.0, 60.0).unwrap();
        // brute-force sample over time
        let mut best = f64::INFINITY;
        for k in 0..=600 {
            let g = k as f64 * 0.1;
            best = best.min(min_pairwise_separation(&[
                inner.eval(g).position,
                outer.eval(g).position,
            ]));
        }
        assert_abs_diff_eq!(best, 1.0, epsilon = 1e-12);
    }
}
