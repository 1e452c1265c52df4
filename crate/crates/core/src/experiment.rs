//! Seeded Monte Carlo experiments.
//!
//! Each trial draws from its own counter-based substream and returns an
//! integer error mask or a pair of metrics; results are collected in trial
//! order before any reduction, so output is identical for any worker count.

use num_complex::Complex;
use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{self, complex_gaussian, ChannelKind, ChannelModel};
use crate::codec::{Alpha, Encoder, EncoderConfig, Vote, VoteVector};
use crate::cs::{ComplexSequence, Permutation, PmeprMeter};
use crate::detector::{self, MetricPair, VoteCensus};
use crate::rng::{derive_seed, substream};
use crate::{Error, Result, Scalar};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Probabilities of a `+1`, `-1` and `0` vote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteDistribution {
    p: f64,
    q: f64,
    z: f64,
}

impl VoteDistribution {
    /// `q = 1 - p - z`.
    pub fn new(p: f64, z: f64) -> Result<Self> {
        let q = 1.0 - p - z;
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&z) {
            return Err(Error::param("p", format!("p = {p}, z = {z} must lie in [0, 1]")));
        }
        if q < -1e-12 {
            return Err(Error::InfeasibleDistribution { p, z, q });
        }
        Ok(Self { p, q: q.max(0.0), z })
    }

    pub fn from_pqz(p: f64, q: f64, z: f64) -> Result<Self> {
        if p < 0.0 || q < 0.0 || z < 0.0 || ((p + q + z) - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "p",
                format!("({p}, {q}, {z}) is not a probability vector"),
            ));
        }
        Ok(Self { p, q, z })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vote {
        let u: f64 = rng.random();
        if u < self.p {
            Vote::Plus
        } else if u < self.p + self.q {
            Vote::Minus
        } else {
            Vote::Zero
        }
    }
}

fn cast_alpha<T: Scalar>(alpha: Alpha<f64>) -> Alpha<T> {
    match alpha {
        Alpha::Finite(a) => Alpha::Finite(T::lit(a)),
        Alpha::Infinite => Alpha::Infinite,
    }
}

/// Maps `f` over `0..trials` in order, on `workers` threads (0 = rayon's
/// default pool).
fn map_trials<O, F>(workers: usize, trials: u64, f: F) -> Result<Vec<O>>
where
    O: Send,
    F: Fn(u64) -> O + Sync + Send,
{
    if workers == 1 {
        return Ok((0..trials).map(f).collect());
    }
    let run = || (0..trials).into_par_iter().map(&f).collect();
    if workers == 0 {
        return Ok(run());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))?;
    Ok(pool.install(run))
}

/// Wilson score interval for `successes` out of `n` at 95% confidence.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let phat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Functions computed per real channel dimension, `m / 2^(m+1)`.
pub fn computation_rate(m: u32) -> Result<Ratio<u64>> {
    if m == 0 || m > 62 {
        return Err(Error::ExponentOutOfRange(m as usize));
    }
    Ok(Ratio::new(m as u64, 1u64 << (m + 1)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CerExperimentConfig {
    pub k: usize,
    pub m_list: Vec<usize>,
    pub p_sweep: Vec<f64>,
    pub z: f64,
    pub channels: Vec<ChannelKind>,
    pub snr_db: f64,
    pub alpha: Alpha<f64>,
    pub h: u32,
    pub trials: u64,
    pub seed: u64,
    /// 0 = all available cores
    pub workers: usize,
}

impl CerExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("K", "at least one sensor is required"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials", "must be >= 1"));
        }
        if self.m_list.is_empty() || self.p_sweep.is_empty() || self.channels.is_empty() {
            return Err(Error::param("m_list", "sweep lists must be non-empty"));
        }
        for &m in &self.m_list {
            Permutation::identity(m)?;
        }
        for &p in &self.p_sweep {
            VoteDistribution::new(p, self.z)?;
        }
        if !self.snr_db.is_finite() {
            return Err(Error::param("snr_db", "must be finite"));
        }
        EncoderConfig::<f64>::new(Permutation::identity(1)?, self.h, self.alpha, true)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CerRow {
    pub channel: ChannelKind,
    pub m: usize,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub z: f64,
    pub alpha: Alpha<f64>,
    pub snr_db: f64,
    pub trials: u64,
    /// errors summed over all `m` indices
    pub errors: u64,
    /// errors per vote index, for diagnostics
    pub per_index_errors: Vec<u64>,
    pub cer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl CerRow {
    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CerResult {
    pub rows: Vec<CerRow>,
}

impl CerResult {
    pub fn find(&self, channel: ChannelKind, m: usize, p: f64) -> Option<&CerRow> {
        self.rows
            .iter()
            .find(|r| r.channel == channel && r.m == m && r.p == p)
    }
}

/// One over-the-air round: returns a bit mask of vote indices where the
/// detected majority differs from the true one.
fn cer_trial<T: Scalar, R: Rng + ?Sized>(
    encoder: &Encoder<T>,
    model: &ChannelModel<T>,
    dist: &VoteDistribution,
    k: usize,
    rng: &mut R,
) -> Result<u32> {
    let m = encoder.config().m();
    let len = 1usize << m;
    let votes: Vec<VoteVector> = (0..k)
        .map(|_| VoteVector::new((0..m).map(|_| dist.sample(rng)).collect()))
        .collect();
    let truth: Vec<i8> = (0..m)
        .map(|n| detector::majority(votes.iter().map(|v| &v.votes()[n])))
        .collect();

    let mut tx = vec![Complex::new(T::zero(), T::zero()); k * len];
    for (v, row) in votes.iter().zip(tx.chunks_exact_mut(len)) {
        encoder.encode_into(v, rng, row)?;
    }
    let ch = channel::draw_channel(model, k, len, rng)?;
    let mut received = vec![Complex::new(T::zero(), T::zero()); len];
    channel::superpose_rows(&tx, &ch, &mut received)?;
    let received = ComplexSequence::new(received)?;
    let decisions = detector::detect_mv_with(encoder.table(), &received)?;

    Ok(decisions
        .iter()
        .zip(&truth)
        .enumerate()
        .filter(|(_, (d, t))| d != t)
        .fold(0u32, |mask, (n, _)| mask | (1 << n)))
}

/// Runs every `(channel, m, p)` point of the sweep.
///
/// Trials at the same `(m, p)` share their random substreams across
/// channel kinds, so the vote draws are common to all channels.
pub fn run_cer_experiment<T: Scalar>(cfg: &CerExperimentConfig) -> Result<CerResult> {
    cfg.validate()?;
    let alpha = cast_alpha::<T>(cfg.alpha);
    let mut rows = Vec::new();
    for &kind in &cfg.channels {
        let model = ChannelModel::<T>::from_snr_db(kind, T::lit(cfg.snr_db))?;
        for &m in &cfg.m_list {
            let encoder = Encoder::new(EncoderConfig::new(
                Permutation::identity(m)?,
                cfg.h,
                alpha,
                true,
            )?);
            for &p in &cfg.p_sweep {
                let dist = VoteDistribution::new(p, cfg.z)?;
                let point_seed = derive_seed(derive_seed(cfg.seed, m as u64), p.to_bits());
                let masks = map_trials(cfg.workers, cfg.trials, |t| {
                    let mut rng = substream(point_seed, t);
                    cer_trial(&encoder, &model, &dist, cfg.k, &mut rng)
                })?
                .into_iter()
                .collect::<Result<Vec<u32>>>()?;

                let per_index_errors: Vec<u64> = (0..m)
                    .map(|n| masks.iter().filter(|&&mask| mask >> n & 1 == 1).count() as u64)
                    .collect();
                let errors: u64 = per_index_errors.iter().sum();
                let total = cfg.trials * m as u64;
                let (ci_low, ci_high) = wilson_interval(errors, total);
                rows.push(CerRow {
                    channel: kind,
                    m,
                    k: cfg.k,
                    p,
                    q: dist.q(),
                    z: dist.z(),
                    alpha: cfg.alpha,
                    snr_db: cfg.snr_db,
                    trials: cfg.trials,
                    errors,
                    per_index_errors,
                    cer: errors as f64 / total as f64,
                    ci_low,
                    ci_high,
                });
            }
        }
    }
    Ok(CerResult { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmeprExperimentConfig {
    /// recorded with the results; each sample is one sensor's sequence
    pub k: usize,
    pub m: usize,
    pub p: f64,
    pub z: f64,
    pub alpha: Alpha<f64>,
    pub h: u32,
    pub samples: u64,
    pub oversample: usize,
    pub seed: u64,
    pub workers: usize,
}

/// Sorted PMEPR samples in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct PmeprDistribution {
    pub samples_db: Vec<f64>,
}

impl PmeprDistribution {
    pub fn max(&self) -> f64 {
        self.samples_db.last().copied().unwrap_or(0.0)
    }

    /// Fraction of samples strictly below `threshold_db`.
    pub fn fraction_below(&self, threshold_db: f64) -> f64 {
        let below = self.samples_db.partition_point(|&x| x < threshold_db);
        below as f64 / self.samples_db.len() as f64
    }

    /// `P[PMEPR > x]` at `x = threshold_db`.
    pub fn ccdf_at(&self, threshold_db: f64) -> f64 {
        let not_above = self.samples_db.partition_point(|&x| x <= threshold_db);
        1.0 - not_above as f64 / self.samples_db.len() as f64
    }

    /// CCDF on a grid `0, step, 2 step, ...` up to `upper_db`.
    pub fn ccdf_table(&self, step_db: f64, upper_db: f64) -> Vec<(f64, f64)> {
        let points = (upper_db / step_db).round() as usize;
        (0..=points)
            .map(|i| {
                let x = i as f64 * step_db;
                (x, self.ccdf_at(x))
            })
            .collect()
    }
}

/// PMEPR of randomly voted, phase-randomized encoder outputs.
pub fn run_pmepr_experiment(cfg: &PmeprExperimentConfig) -> Result<PmeprDistribution> {
    if cfg.samples == 0 {
        return Err(Error::param("samples", "must be >= 1"));
    }
    let dist = VoteDistribution::new(cfg.p, cfg.z)?;
    let encoder = Encoder::<f64>::new(EncoderConfig::new(
        Permutation::identity(cfg.m)?,
        cfg.h,
        cfg.alpha,
        true,
    )?);
    // validates the oversampling factor up front
    PmeprMeter::<f64>::new(1 << cfg.m, cfg.oversample)?;
    let measure = |meter: &mut PmeprMeter<f64>, s: u64| -> Result<f64> {
        let mut rng = substream(cfg.seed, s);
        let v = VoteVector::new((0..cfg.m).map(|_| dist.sample(&mut rng)).collect());
        let seq = encoder.encode(&v, &mut rng)?;
        meter.measure(seq.elements())
    };
    let new_meter = || PmeprMeter::new(1 << cfg.m, cfg.oversample).expect("validated above");
    let values: Vec<Result<f64>> = if cfg.workers == 1 {
        let mut meter = new_meter();
        (0..cfg.samples).map(|s| measure(&mut meter, s)).collect()
    } else {
        let run = || {
            (0..cfg.samples)
                .into_par_iter()
                .map_init(new_meter, |meter, s| measure(meter, s))
                .collect()
        };
        if cfg.workers == 0 {
            run()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::param("workers", e.to_string()))?
                .install(run)
        }
    };
    let mut samples_db = values.into_iter().collect::<Result<Vec<f64>>>()?;
    samples_db.sort_by(f64::total_cmp);
    Ok(PmeprDistribution { samples_db })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Config {
    pub census: VoteCensus,
    pub alpha: Alpha<f64>,
    pub sigma2: f64,
    pub m: usize,
    /// vote index the census applies to; other indices vote uniformly at random
    pub index: usize,
    pub channel: ChannelKind,
    pub h: u32,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Lemma1Config {
    /// Selective fading, index 1, `H = 2`, all cores.
    pub fn new(
        census: VoteCensus,
        alpha: Alpha<f64>,
        sigma2: f64,
        m: usize,
        trials: u64,
        seed: u64,
    ) -> Self {
        Self {
            census,
            alpha,
            sigma2,
            m,
            index: 1,
            channel: ChannelKind::SelectiveRayleigh,
            h: 2,
            trials,
            seed,
            workers: 0,
        }
    }
}

/// Empirical metric means against the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Report {
    pub trials: u64,
    pub expected: MetricPair<f64>,
    pub mean: MetricPair<f64>,
    pub std_err: MetricPair<f64>,
    pub z_score: MetricPair<f64>,
}

impl Lemma1Report {
    /// Both means within `k` standard errors of the closed form.
    pub fn within(&self, k: f64) -> bool {
        self.z_score.m_plus.abs() < k && self.z_score.m_minus.abs() < k
    }

    pub fn passes(&self) -> bool {
        self.within(4.0)
    }
}

pub const MIN_LEMMA1_TRIALS: u64 = 10_000;

fn lemma1_trial<R: Rng + ?Sized>(
    cfg: &Lemma1Config,
    encoder: &Encoder<f64>,
    model: &ChannelModel<f64>,
    rng: &mut R,
) -> Result<MetricPair<f64>> {
    let m = cfg.m;
    let len = 1usize << m;
    let k = cfg.census.total();
    let received = if k == 0 {
        (0..len)
            .map(|_| complex_gaussian(rng, model.noise_variance()))
            .collect()
    } else {
        let mut tx = vec![Complex::new(0.0, 0.0); k * len];
        for (sensor, row) in tx.chunks_exact_mut(len).enumerate() {
            let mut votes: Vec<Vote> = (0..m)
                .map(|_| [Vote::Minus, Vote::Zero, Vote::Plus][rng.random_range(0..3)])
                .collect();
            votes[cfg.index - 1] = if sensor < cfg.census.k_plus {
                Vote::Plus
            } else if sensor < cfg.census.k_plus + cfg.census.k_minus {
                Vote::Minus
            } else {
                Vote::Zero
            };
            encoder.encode_into(&VoteVector::new(votes), rng, row)?;
        }
        let ch = channel::draw_channel(model, k, len, rng)?;
        let mut out = vec![Complex::new(0.0, 0.0); len];
        channel::superpose_rows(&tx, &ch, &mut out)?;
        out
    };
    detector::half_energies_with(encoder.table(), &ComplexSequence::new(received)?, cfg.index)
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: u64) -> (f64, f64) {
    let n_f = n as f64;
    let mean = values.clone().sum::<f64>() / n_f;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n_f - 1.0);
    (mean, (var / n_f).sqrt())
}

/// Monte Carlo check of the closed-form metric means.
pub fn validate_lemma1(cfg: &Lemma1Config) -> Result<Lemma1Report> {
    if cfg.trials < MIN_LEMMA1_TRIALS {
        return Err(Error::param(
            "trials",
            format!("{} is below the minimum of {MIN_LEMMA1_TRIALS}", cfg.trials),
        ));
    }
    if cfg.index == 0 || cfg.index > cfg.m {
        return Err(Error::IndexOutOfRange {
            n: cfg.index,
            m: cfg.m,
        });
    }
    let encoder = Encoder::new(EncoderConfig::new(
        Permutation::identity(cfg.m)?,
        cfg.h,
        cfg.alpha,
        true,
    )?);
    let model = ChannelModel::new(cfg.channel, cfg.sigma2, 1.0)?;
    let pairs = map_trials(cfg.workers, cfg.trials, |t| {
        let mut rng = substream(cfg.seed, t);
        lemma1_trial(cfg, &encoder, &model, &mut rng)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let (mp, sp) = mean_and_se(pairs.iter().map(|p| p.m_plus), cfg.trials);
    let (mm, sm) = mean_and_se(pairs.iter().map(|p| p.m_minus), cfg.trials);
    let expected = detector::expected_metrics(&cfg.census, cfg.alpha, cfg.sigma2, cfg.m);
    let z = |mean: f64, se: f64, want: f64| {
        if se > 0.0 {
            (mean - want) / se
        } else if (mean - want).abs() <= 1e-9 * want.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        }
    };
    Ok(Lemma1Report {
        trials: cfg.trials,
        expected,
        mean: MetricPair {
            m_plus: mp,
            m_minus: mm,
        },
        std_err: MetricPair {
            m_plus: sp,
            m_minus: sm,
        },
        z_score: MetricPair {
            m_plus: z(mp, sp, expected.m_plus),
            m_minus: z(mm, sm, expected.m_minus),
        },
    })
}
