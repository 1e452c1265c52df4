//! Closed-loop UAV waypoint guidance driven by sensor feedback.
//!
//! Every `T_update` seconds each of `K` sensors estimates the UAV position
//! with Gaussian error and the UAV moves by
//!
//! ```text
//! w_{l+1} = w_l - T_update * u_l,   u_l = clamp(mu * f_l, -u_limit, u_limit)
//! ```
//!
//! per axis. The feedback `f_l` is the mean offset from the target
//! (continuous), the majority of the sensors' offset signs computed
//! error-free (ideal MV), or that majority computed over the air (OAC MV).
//! Axes x, y, z use vote indices 1, 2, 3; any further indices carry
//! abstentions.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::Rng;

use crate::channel::{self, ChannelKind, ChannelModel};
use crate::codec::{Alpha, Encoder, EncoderConfig, Vote, VoteVector};
use crate::cs::{ComplexSequence, Permutation};
use crate::detector;
use crate::rng::substream;
use crate::{Error, Result, Scalar};

pub type Vec3<T> = [T; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Continuous,
    IdealMv,
    OacMv,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Continuous => "continuous",
            Strategy::IdealMv => "ideal_mv",
            Strategy::OacMv => "oac_mv",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(Strategy::Continuous),
            "ideal_mv" => Ok(Strategy::IdealMv),
            "oac_mv" => Ok(Strategy::OacMv),
            other => Err(Error::param(
                "strategy",
                format!("unknown strategy `{other}` (expected continuous, ideal_mv or oac_mv)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceConfig<T> {
    pub t_update: T,
    pub mu: T,
    pub u_limit: T,
    pub sigma_sensor2: T,
    pub k: usize,
    pub snr_db: T,
    pub m: usize,
    pub channel: ChannelKind,
    pub strategy: Strategy,
    pub waypoint_epsilon: T,
    pub max_rounds: u64,
    pub alpha: Alpha<T>,
    pub h: u32,
    pub phase_randomization: bool,
}

impl<T: Scalar> GuidanceConfig<T> {
    /// 10 ms updates, `mu = 2`, 3 m/s cap, sensor variance 2, 50 sensors,
    /// 10 dB SNR, `m = 6` over selective fading, 0.25 m waypoint radius.
    pub fn reference(strategy: Strategy) -> Self {
        Self {
            t_update: T::lit(0.01),
            mu: T::lit(2.0),
            u_limit: T::lit(3.0),
            sigma_sensor2: T::lit(2.0),
            k: 50,
            snr_db: T::lit(10.0),
            m: 6,
            channel: ChannelKind::SelectiveRayleigh,
            strategy,
            waypoint_epsilon: T::lit(0.25),
            max_rounds: 100_000,
            alpha: Alpha::Infinite,
            h: 2,
            phase_randomization: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} is not > 0")))
            }
        };
        positive("t_update", self.t_update)?;
        positive("mu", self.mu)?;
        positive("u_limit", self.u_limit)?;
        positive("waypoint_epsilon", self.waypoint_epsilon)?;
        if !(self.sigma_sensor2 >= T::zero()) {
            return Err(Error::param("sigma_sensor2", "must be >= 0"));
        }
        if self.k == 0 {
            return Err(Error::param("K", "at least one sensor is required"));
        }
        if self.strategy == Strategy::OacMv && self.m < 3 {
            return Err(Error::param("m", format!("oac_mv needs m >= 3, got {}", self.m)));
        }
        Ok(())
    }
}

/// `K` noisy position estimates `w + n_k`, `n_k ~ N(0, sigma2)` per axis.
pub fn sensor_estimates<T: Scalar, R: Rng + ?Sized>(
    true_pos: Vec3<T>,
    sigma2: T,
    k: usize,
    rng: &mut R,
) -> Vec<Vec3<T>> {
    let sd = sigma2.sqrt();
    (0..k)
        .map(|_| true_pos.map(|c| c + sd * T::standard_normal(rng)))
        .collect()
}

/// The over-the-air path used by [`Strategy::OacMv`].
#[derive(Debug, Clone)]
pub struct OacLink<T> {
    encoder: Encoder<T>,
    model: ChannelModel<T>,
}

impl<T: Scalar> OacLink<T> {
    pub fn new(cfg: &GuidanceConfig<T>) -> Result<Self> {
        if cfg.m < 3 {
            return Err(Error::param("m", format!("oac_mv needs m >= 3, got {}", cfg.m)));
        }
        let encoder = Encoder::new(EncoderConfig::new(
            Permutation::identity(cfg.m)?,
            cfg.h,
            cfg.alpha,
            cfg.phase_randomization,
        )?);
        let model = ChannelModel::from_snr_db(cfg.channel, cfg.snr_db)?;
        Ok(Self { encoder, model })
    }

    pub fn with_model(encoder: Encoder<T>, model: ChannelModel<T>) -> Result<Self> {
        if encoder.config().m() < 3 {
            return Err(Error::param("m", "oac_mv needs m >= 3"));
        }
        Ok(Self { encoder, model })
    }

    /// Detected majorities of the three axis votes after one channel use.
    pub fn compute<R: Rng + ?Sized>(&self, axis_votes: &[[Vote; 3]], rng: &mut R) -> Result<[i8; 3]> {
        let m = self.encoder.config().m();
        let len = 1usize << m;
        let k = axis_votes.len();
        let mut tx = vec![Complex::new(T::zero(), T::zero()); k * len];
        let mut votes = VoteVector::abstain(m);
        for (axes, row) in axis_votes.iter().zip(tx.chunks_exact_mut(len)) {
            votes.votes_mut()[..3].copy_from_slice(axes);
            self.encoder.encode_into(&votes, rng, row)?;
        }
        let ch = channel::draw_channel(&self.model, k, len, rng)?;
        let mut received = vec![Complex::new(T::zero(), T::zero()); len];
        channel::superpose_rows(&tx, &ch, &mut received)?;
        let decisions =
            detector::detect_mv_with(self.encoder.table(), &ComplexSequence::new(received)?)?;
        Ok([decisions[0], decisions[1], decisions[2]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback<T> {
    pub f: Vec3<T>,
    /// error-free majority of the sensors' votes
    pub mv_true: [i8; 3],
    /// majority the UAV acted on; `None` for continuous feedback
    pub mv_hat: Option<[i8; 3]>,
}

/// Velocity-update feedback for one round.
pub fn feedback<T: Scalar, R: Rng + ?Sized>(
    strategy: Strategy,
    estimates: &[Vec3<T>],
    target: Vec3<T>,
    link: Option<&OacLink<T>>,
    rng: &mut R,
) -> Result<Feedback<T>> {
    if estimates.is_empty() {
        return Err(Error::param("K", "at least one estimate is required"));
    }
    let votes: Vec<[Vote; 3]> = estimates
        .iter()
        .map(|e| [0, 1, 2].map(|l| Vote::sign_of(e[l] - target[l])))
        .collect();
    let mv_true = [0, 1, 2].map(|l| detector::majority(votes.iter().map(|v| &v[l])));
    let as_f = |d: [i8; 3]| d.map(|s| T::lit(s as f64));
    Ok(match strategy {
        Strategy::Continuous => {
            let k = T::lit(estimates.len() as f64);
            let f = [0, 1, 2].map(|l| {
                estimates.iter().map(|e| e[l]).fold(T::zero(), |a, b| a + b) / k - target[l]
            });
            Feedback {
                f,
                mv_true,
                mv_hat: None,
            }
        }
        Strategy::IdealMv => Feedback {
            f: as_f(mv_true),
            mv_true,
            mv_hat: Some(mv_true),
        },
        Strategy::OacMv => {
            let link = link.ok_or_else(|| Error::param("strategy", "oac_mv needs an OacLink"))?;
            let hat = link.compute(&votes, rng)?;
            Feedback {
                f: as_f(hat),
                mv_true,
                mv_hat: Some(hat),
            }
        }
    })
}

/// One step of the position recursion; returns `(new position, velocity)`.
pub fn step_dynamics<T: Scalar>(
    pos: Vec3<T>,
    f: Vec3<T>,
    mu: T,
    u_limit: T,
    t_update: T,
) -> (Vec3<T>, Vec3<T>) {
    let velocity = f.map(|fl| {
        let u = mu * fl;
        if fl < T::zero() {
            u.max(-u_limit)
        } else {
            u.min(u_limit)
        }
    });
    let next = [0, 1, 2].map(|l| pos[l] - t_update * velocity[l]);
    (next, velocity)
}

pub fn distance<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> T {
    (0..3)
        .map(|l| (a[l] - b[l]) * (a[l] - b[l]))
        .fold(T::zero(), |s, v| s + v)
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord<T> {
    pub round: u64,
    /// index of the waypoint being flown to
    pub waypoint: usize,
    /// position at the start of the round
    pub position: Vec3<T>,
    pub velocity: Vec3<T>,
    pub feedback: Vec3<T>,
    pub mv_true: [i8; 3],
    pub mv_hat: Option<[i8; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog<T> {
    pub rounds: Vec<RoundRecord<T>>,
    pub final_position: Vec3<T>,
    pub waypoints_reached: usize,
    /// false when `max_rounds` ran out first
    pub completed: bool,
}

impl<T: Scalar> TrajectoryLog<T> {
    pub fn rounds_taken(&self) -> u64 {
        self.rounds.len() as u64
    }

    /// Position at the start of round `l`; the final position afterwards.
    pub fn position_at(&self, l: usize) -> Vec3<T> {
        self.rounds
            .get(l)
            .map_or(self.final_position, |r| r.position)
    }
}

/// Flies through `waypoints` in order from `initial`.
///
/// Sensor noise and the over-the-air link draw from separate substreams of
/// `seed`, so strategies run with the same seed see the same sensor noise
/// for as long as their trajectories coincide.
pub fn run_mission<T: Scalar>(
    waypoints: &[Vec3<T>],
    initial: Vec3<T>,
    cfg: &GuidanceConfig<T>,
    seed: u64,
) -> Result<TrajectoryLog<T>> {
    cfg.validate()?;
    if waypoints.is_empty() {
        return Err(Error::param("waypoints", "at least one waypoint is required"));
    }
    let link = match cfg.strategy {
        Strategy::OacMv => Some(OacLink::new(cfg)?),
        _ => None,
    };
    let mut sensor_rng = substream(seed, 0);
    let mut link_rng = substream(seed, 1);

    let mut pos = initial;
    let mut wp = 0;
    let mut rounds = Vec::new();
    let mut round = 0u64;
    let completed = loop {
        while wp < waypoints.len() && distance(pos, waypoints[wp]) < cfg.waypoint_epsilon {
            wp += 1;
        }
        if wp == waypoints.len() {
            break true;
        }
        if round == cfg.max_rounds {
            break false;
        }
        let target = waypoints[wp];
        let estimates = sensor_estimates(pos, cfg.sigma_sensor2, cfg.k, &mut sensor_rng);
        let fb = feedback(cfg.strategy, &estimates, target, link.as_ref(), &mut link_rng)?;
        let (next, velocity) = step_dynamics(pos, fb.f, cfg.mu, cfg.u_limit, cfg.t_update);
        rounds.push(RoundRecord {
            round,
            waypoint: wp,
            position: pos,
            velocity,
            feedback: fb.f,
            mv_true: fb.mv_true,
            mv_hat: fb.mv_hat,
        });
        pos = next;
        round += 1;
    };
    Ok(TrajectoryLog {
        rounds,
        final_position: pos,
        waypoints_reached: wp,
        completed,
    })
}

/// Mean Euclidean distance between two trajectories, round by round, over
/// the longer of the two (a finished trajectory holds its final position).
pub fn trajectory_gap<T: Scalar>(a: &TrajectoryLog<T>, b: &TrajectoryLog<T>) -> T {
    let horizon = a.rounds.len().max(b.rounds.len()) + 1;
    let total = (0..horizon)
        .map(|l| distance(a.position_at(l), b.position_at(l)))
        .fold(T::zero(), |s, v| s + v);
    total / T::lit(horizon as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(strategy: Strategy) -> GuidanceConfig<f64> {
        GuidanceConfig::reference(strategy)
    }

    #[test]
    fn estimates_without_noise_are_exact() {
        let mut rng = substream(0, 0);
        let est = sensor_estimates([1.0, -2.0, 3.5], 0.0, 5, &mut rng);
        assert!(est.iter().all(|e| *e == [1.0, -2.0, 3.5]));
    }

    #[test]
    fn estimate_noise_statistics() {
        let mut rng = substream(1, 0);
        let n = 100_000;
        let est = sensor_estimates([4.0, 0.0, -1.0], 2.0, n, &mut rng);
        for (l, centre) in [4.0, 0.0, -1.0].into_iter().enumerate() {
            let mean = est.iter().map(|e| e[l]).sum::<f64>() / n as f64;
            let var = est.iter().map(|e| (e[l] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((var / 2.0 - 1.0).abs() < 0.02, "var {var}");
            let se = (2.0 / n as f64).sqrt();
            assert!((mean - centre).abs() < 3.0 * se, "mean {mean}");
        }
    }

    #[test]
    fn feedback_examples() {
        let mut rng = substream(2, 0);
        let target = [1.0, 2.0, 3.0];
        let fb = feedback(Strategy::Continuous, &vec![target; 4], target, None, &mut rng).unwrap();
        assert_eq!(fb.f, [0.0, 0.0, 0.0]);
        assert_eq!(fb.mv_hat, None);

        let east: Vec<Vec3<f64>> = (0..5).map(|i| [2.0 + i as f64, 1.0, 3.0]).collect();
        let fb = feedback(Strategy::IdealMv, &east, target, None, &mut rng).unwrap();
        assert_eq!(fb.f[0], 1.0);
        assert_eq!(fb.f[1], -1.0);
        // every sensor abstains on z, so the tie goes to +1
        assert_eq!(fb.f[2], 1.0);

        assert!(feedback(Strategy::OacMv, &east, target, None, &mut rng).is_err());
    }

    #[test]
    fn noiseless_link_matches_ideal_majority_for_unanimous_votes() {
        let mut c = cfg(Strategy::OacMv);
        c.channel = ChannelKind::Awgn;
        c.snr_db = 1000.0;
        let link = OacLink::new(&c).unwrap();
        let mut rng = substream(3, 0);
        let target = [0.0, 0.0, 0.0];
        for signs in [[1.0, 1.0, -1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, -1.0]] {
            let est: Vec<Vec3<f64>> = (0..50).map(|_| signs).collect();
            let ideal = feedback(Strategy::IdealMv, &est, target, None, &mut rng).unwrap();
            let oac = feedback(Strategy::OacMv, &est, target, Some(&link), &mut rng).unwrap();
            assert_eq!(ideal.f, oac.f);
            assert_eq!(oac.mv_hat, Some(oac.mv_true));
        }
        c.m = 2;
        assert!(OacLink::new(&c).is_err());
    }

    #[test]
    fn step_examples() {
        let (p, u) = step_dynamics([1.0, 2.0, 3.0], [0.0; 3], 2.0, 3.0, 0.01);
        assert_eq!(p, [1.0, 2.0, 3.0]);
        assert_eq!(u, [0.0; 3]);

        let (_, u) = step_dynamics([0.0; 3], [1.0, -1.0, 0.5], 2.0, 3.0, 0.01);
        assert_eq!(u, [2.0, -2.0, 1.0]);
        let (_, u) = step_dynamics([0.0; 3], [1.0, -1.0, 0.5], 5.0, 3.0, 0.01);
        assert_eq!(u, [3.0, -3.0, 2.5]);

        let (p, _) = step_dynamics([10.0, 0.0, 0.0], [1.0, 0.0, 0.0], 2.0, 3.0, 0.01);
        assert_relative_eq!(p[0], 9.98, epsilon = 1e-12);
    }

    #[test]
    fn mission_at_target_completes_immediately() {
        let log = run_mission(&[[1.0, 1.0, 1.0]], [1.0, 1.0, 1.0], &cfg(Strategy::IdealMv), 0).unwrap();
        assert!(log.completed);
        assert_eq!(log.rounds_taken(), 0);
        assert_eq!(log.final_position, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn continuous_noiseless_approach_is_monotone() {
        let mut c = cfg(Strategy::Continuous);
        c.sigma_sensor2 = 0.0;
        let target = [10.0, 8.0, 6.0];
        let log = run_mission(&[target], [0.0; 3], &c, 4).unwrap();
        assert!(log.completed);
        for l in 0..log.rounds.len() {
            let (a, b) = (log.position_at(l), log.position_at(l + 1));
            for axis in 0..3 {
                assert!((b[axis] - target[axis]).abs() <= (a[axis] - target[axis]).abs());
            }
        }
    }

    #[test]
    fn ideal_mv_constant_speed_arithmetic() {
        let mut c = cfg(Strategy::IdealMv);
        c.sigma_sensor2 = 0.0;
        // single axis of 10 m at 0.02 m per round
        let log = run_mission(&[[10.0, 0.0, 0.0]], [0.0, 0.0, 0.0], &c, 5).unwrap();
        assert!(log.completed);
        let r = log.rounds_taken() as i64;
        assert!((r - 500).abs() <= 13, "took {r} rounds");
    }

    #[test]
    fn max_rounds_is_reported() {
        let mut c = cfg(Strategy::IdealMv);
        c.max_rounds = 10;
        let log = run_mission(&[[10.0, 8.0, 6.0]], [0.0; 3], &c, 6).unwrap();
        assert!(!log.completed);
        assert_eq!(log.rounds_taken(), 10);
        assert_eq!(log.waypoints_reached, 0);
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(Strategy::OacMv);
        c.m = 2;
        assert!(c.validate().is_err());
        let mut c = cfg(Strategy::IdealMv);
        c.t_update = 0.0;
        assert!(c.validate().is_err());
        assert!(run_mission(&[], [0.0; 3], &cfg(Strategy::IdealMv), 0).is_err());
        assert_eq!("oac_mv".parse::<Strategy>().unwrap(), Strategy::OacMv);
        assert!("pid".parse::<Strategy>().is_err());
    }
}
