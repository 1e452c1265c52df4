//! Fading, noise and over-the-air superposition.
//!
//! The received value on subcarrier `i` is
//! `R_i = sum_k h_{k,i} sqrt(P_k) t_{k,i} + w_i`. `CN(0, s)` denotes a
//! circular complex Gaussian with total variance `s`, i.e. real and
//! imaginary parts each `N(0, s/2)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::Rng;

use crate::cs::ComplexSequence;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// `h_{k,i} = 1`
    Awgn,
    /// one `CN(0, 1)` draw per sensor, shared by all subcarriers
    FlatRayleigh,
    /// independent `CN(0, 1)` per sensor and subcarrier
    SelectiveRayleigh,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::FlatRayleigh => "flat",
            ChannelKind::SelectiveRayleigh => "selective",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "awgn" => Ok(ChannelKind::Awgn),
            "flat" | "flat_rayleigh" => Ok(ChannelKind::FlatRayleigh),
            "selective" | "selective_rayleigh" => Ok(ChannelKind::SelectiveRayleigh),
            other => Err(Error::param(
                "channel",
                format!("unknown kind `{other}` (expected awgn, flat or selective)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel<T> {
    pub kind: ChannelKind,
    noise_variance: T,
    tx_power: T,
}

impl<T: Scalar> ChannelModel<T> {
    pub fn new(kind: ChannelKind, noise_variance: T, tx_power: T) -> Result<Self> {
        if !(noise_variance >= T::zero()) || !noise_variance.is_finite() {
            return Err(Error::param(
                "noise_variance",
                format!("{noise_variance} is not a finite value >= 0"),
            ));
        }
        if !(tx_power > T::zero()) || !tx_power.is_finite() {
            return Err(Error::param("tx_power", format!("{tx_power} is not > 0")));
        }
        Ok(Self {
            kind,
            noise_variance,
            tx_power,
        })
    }

    /// Unit transmit power and the noise variance for `snr_db`.
    pub fn from_snr_db(kind: ChannelKind, snr_db: T) -> Result<Self> {
        Self::new(kind, snr_to_noise_variance(snr_db), T::one())
    }

    pub fn noiseless(kind: ChannelKind) -> Self {
        Self {
            kind,
            noise_variance: T::zero(),
            tx_power: T::one(),
        }
    }

    pub fn noise_variance(&self) -> T {
        self.noise_variance
    }

    pub fn tx_power(&self) -> T {
        self.tx_power
    }
}

/// `sigma^2 = 10^(-snr_db / 10)` for unit transmit power.
pub fn snr_to_noise_variance<T: Scalar>(snr_db: T) -> T {
    T::lit(10.0).powf(-snr_db / T::lit(10.0))
}

/// One `CN(0, variance)` draw.
#[inline]
pub fn complex_gaussian<T: Scalar, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    let s = (variance / T::lit(2.0)).sqrt();
    let re = T::standard_normal(rng);
    let im = T::standard_normal(rng);
    Complex::new(re * s, im * s)
}

/// Per-sensor, per-subcarrier coefficients and per-subcarrier noise for
/// one channel use. Coefficients are stored sensor-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    sensors: usize,
    len: usize,
    tx_gain: T,
    coefficients: Vec<Complex<T>>,
    noise: Vec<Complex<T>>,
}

impl<T: Scalar> ChannelRealization<T> {
    /// Builds a realization from explicit values (unit transmit power).
    pub fn from_parts(
        sensors: usize,
        len: usize,
        coefficients: Vec<Complex<T>>,
        noise: Vec<Complex<T>>,
    ) -> Result<Self> {
        if coefficients.len() != sensors * len {
            return Err(Error::DimensionMismatch {
                what: "coefficient count",
                expected: sensors * len,
                actual: coefficients.len(),
            });
        }
        if noise.len() != len {
            return Err(Error::DimensionMismatch {
                what: "noise length",
                expected: len,
                actual: noise.len(),
            });
        }
        Ok(Self {
            sensors,
            len,
            tx_gain: T::one(),
            coefficients,
            noise,
        })
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `sqrt(P_k)`, identical for all sensors under power control.
    pub fn tx_gain(&self) -> T {
        self.tx_gain
    }

    pub fn coefficient(&self, k: usize, i: usize) -> Complex<T> {
        self.coefficients[k * self.len + i]
    }

    /// Coefficients of sensor `k` across subcarriers.
    pub fn row(&self, k: usize) -> &[Complex<T>] {
        &self.coefficients[k * self.len..(k + 1) * self.len]
    }

    pub fn noise(&self) -> &[Complex<T>] {
        &self.noise
    }
}

/// Draws fading coefficients (sensor-major) and then noise.
pub fn draw_channel<T: Scalar, R: Rng + ?Sized>(
    model: &ChannelModel<T>,
    sensors: usize,
    len: usize,
    rng: &mut R,
) -> Result<ChannelRealization<T>> {
    if sensors == 0 {
        return Err(Error::param("K", "at least one sensor is required"));
    }
    if len == 0 {
        return Err(Error::param("L", "sequence length must be positive"));
    }
    let one = Complex::new(T::one(), T::zero());
    let coefficients = match model.kind {
        ChannelKind::Awgn => vec![one; sensors * len],
        ChannelKind::FlatRayleigh => {
            let mut c = Vec::with_capacity(sensors * len);
            for _ in 0..sensors {
                let h = complex_gaussian(rng, T::one());
                c.extend(std::iter::repeat_n(h, len));
            }
            c
        }
        ChannelKind::SelectiveRayleigh => (0..sensors * len)
            .map(|_| complex_gaussian(rng, T::one()))
            .collect(),
    };
    let noise = (0..len)
        .map(|_| complex_gaussian(rng, model.noise_variance))
        .collect();
    Ok(ChannelRealization {
        sensors,
        len,
        tx_gain: model.tx_power.sqrt(),
        coefficients,
        noise,
    })
}

/// Superposes `sensors` transmitted rows, stored back to back in `tx`,
/// through `ch` into `out`.
pub fn superpose_rows<T: Scalar>(
    tx: &[Complex<T>],
    ch: &ChannelRealization<T>,
    out: &mut [Complex<T>],
) -> Result<()> {
    if tx.len() != ch.sensors * ch.len {
        return Err(Error::DimensionMismatch {
            what: "transmitted element count",
            expected: ch.sensors * ch.len,
            actual: tx.len(),
        });
    }
    if out.len() != ch.len {
        return Err(Error::DimensionMismatch {
            what: "received length",
            expected: ch.len,
            actual: out.len(),
        });
    }
    out.copy_from_slice(&ch.noise);
    for (t_row, h_row) in tx.chunks_exact(ch.len).zip(ch.coefficients.chunks_exact(ch.len)) {
        for ((r, t), h) in out.iter_mut().zip(t_row).zip(h_row) {
            *r += h * t * ch.tx_gain;
        }
    }
    Ok(())
}

/// `R_i = sum_k h_{k,i} sqrt(P_k) t_{k,i} + w_i`.
pub fn superpose<T: Scalar>(
    sequences: &[ComplexSequence<T>],
    ch: &ChannelRealization<T>,
) -> Result<ComplexSequence<T>> {
    if sequences.len() != ch.sensors {
        return Err(Error::DimensionMismatch {
            what: "sensor count",
            expected: ch.sensors,
            actual: sequences.len(),
        });
    }
    let mut tx = Vec::with_capacity(ch.sensors * ch.len);
    for s in sequences {
        if s.len() != ch.len {
            return Err(Error::DimensionMismatch {
                what: "sequence length",
                expected: ch.len,
                actual: s.len(),
            });
        }
        tx.extend_from_slice(s.elements());
    }
    let mut out = vec![Complex::new(T::zero(), T::zero()); ch.len];
    superpose_rows(&tx, ch, &mut out)?;
    ComplexSequence::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{Alpha, Encoder, EncoderConfig, VoteVector};
    use crate::rng::substream;
    use approx::assert_relative_eq;

    #[test]
    fn snr_conversion() {
        assert_eq!(snr_to_noise_variance(0.0f64), 1.0);
        assert_relative_eq!(snr_to_noise_variance(10.0f64), 0.1, max_relative = 1e-15);
        assert_relative_eq!(snr_to_noise_variance(20.0f64), 0.01, max_relative = 1e-15);
    }

    #[test]
    fn model_validation() {
        assert!(ChannelModel::new(ChannelKind::Awgn, -0.1, 1.0).is_err());
        assert!(ChannelModel::new(ChannelKind::Awgn, 0.1, 0.0).is_err());
        assert!(ChannelModel::new(ChannelKind::Awgn, f64::NAN, 1.0).is_err());
        assert_eq!("flat_rayleigh".parse::<ChannelKind>().unwrap(), ChannelKind::FlatRayleigh);
        assert!("rician".parse::<ChannelKind>().is_err());
    }

    #[test]
    fn awgn_coefficients_are_ones() {
        let mut rng = substream(0, 0);
        let ch = draw_channel(&ChannelModel::<f64>::noiseless(ChannelKind::Awgn), 3, 8, &mut rng).unwrap();
        for k in 0..3 {
            assert!(ch.row(k).iter().all(|h| *h == Complex::new(1.0, 0.0)));
        }
        assert!(draw_channel(&ChannelModel::<f64>::noiseless(ChannelKind::Awgn), 0, 8, &mut rng).is_err());
    }

    #[test]
    fn flat_rows_are_constant_with_unit_power() {
        let mut rng = substream(1, 0);
        let model = ChannelModel::<f64>::noiseless(ChannelKind::FlatRayleigh);
        let ch = draw_channel(&model, 4, 16, &mut rng).unwrap();
        for k in 0..4 {
            assert!(ch.row(k).iter().all(|h| *h == ch.coefficient(k, 0)));
        }
        let n = 1_000_000;
        let ch = draw_channel(&model, n, 1, &mut rng).unwrap();
        let p: Vec<f64> = (0..n).map(|k| ch.coefficient(k, 0).norm_sqr()).collect();
        let mean = p.iter().sum::<f64>() / n as f64;
        let var = p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        // |h|^2 is Exp(1), whose variance is also 1
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn selective_subcarriers_are_uncorrelated() {
        let mut rng = substream(2, 0);
        let model = ChannelModel::<f64>::noiseless(ChannelKind::SelectiveRayleigh);
        let n = 100_000;
        let ch = draw_channel(&model, n, 2, &mut rng).unwrap();
        let corr: Complex<f64> = (0..n)
            .map(|k| ch.coefficient(k, 0) * ch.coefficient(k, 1).conj())
            .sum::<Complex<f64>>()
            / n as f64;
        let power = (0..n).map(|k| ch.coefficient(k, 0).norm_sqr()).sum::<f64>() / n as f64;
        assert!(corr.norm() < 0.01, "correlation {corr}");
        assert!((power - 1.0).abs() < 0.01);
    }

    #[test]
    fn noise_power_matches_variance() {
        let mut rng = substream(3, 0);
        let model = ChannelModel::new(ChannelKind::Awgn, 0.1f64, 1.0).unwrap();
        let ch = draw_channel(&model, 1, 100_000, &mut rng).unwrap();
        let p = ch.noise().iter().map(|w| w.norm_sqr()).sum::<f64>() / 100_000.0;
        assert!((p / 0.1 - 1.0).abs() < 0.01, "noise power {p}");
    }

    fn encoded(k: usize, m: usize, seed: u64) -> Vec<ComplexSequence<f64>> {
        let enc = Encoder::new(EncoderConfig::with_defaults(m, Alpha::Infinite).unwrap());
        let mut rng = substream(seed, 0);
        (0..k)
            .map(|i| {
                let votes: Vec<i64> = (0..m).map(|n| ((i + n) % 3) as i64 - 1).collect();
                enc.encode(&VoteVector::from_ints(&votes).unwrap(), &mut rng).unwrap()
            })
            .collect()
    }

    #[test]
    fn identity_channel_examples() {
        let seqs = encoded(1, 3, 4);
        let mut rng = substream(4, 1);
        let ch = draw_channel(&ChannelModel::noiseless(ChannelKind::Awgn), 1, 8, &mut rng).unwrap();
        let r = superpose(&seqs, &ch).unwrap();
        assert_eq!(r, seqs[0]);
        assert_relative_eq!(r.energy(), 8.0, max_relative = 1e-15);

        let twice = vec![seqs[0].clone(), seqs[0].clone()];
        let ch = draw_channel(&ChannelModel::noiseless(ChannelKind::Awgn), 2, 8, &mut rng).unwrap();
        let r = superpose(&twice, &ch).unwrap();
        for (a, b) in r.elements().iter().zip(seqs[0].elements()) {
            assert_eq!(*a, b * 2.0);
        }
    }

    #[test]
    fn superpose_matches_elementwise_recomputation() {
        let seqs = encoded(50, 6, 5);
        let mut rng = substream(5, 1);
        let model = ChannelModel::new(ChannelKind::SelectiveRayleigh, 0.3, 1.0).unwrap();
        let ch = draw_channel(&model, 50, 64, &mut rng).unwrap();
        let r = superpose(&seqs, &ch).unwrap();
        for i in 0..64 {
            let mut want = ch.noise()[i];
            for (k, s) in seqs.iter().enumerate() {
                want += ch.coefficient(k, i) * s[i];
            }
            assert_eq!(r[i], want);
        }
    }

    #[test]
    fn superposition_is_linear() {
        let seqs = encoded(7, 4, 6);
        let mut rng = substream(6, 1);
        let model = ChannelModel::noiseless(ChannelKind::SelectiveRayleigh);
        let ch = draw_channel(&model, 7, 16, &mut rng).unwrap();
        let zero = vec![Complex::new(0.0, 0.0); 16];
        let split = |range: std::ops::Range<usize>| {
            let coeffs = range.clone().flat_map(|k| ch.row(k).to_vec()).collect();
            ChannelRealization::from_parts(range.len(), 16, coeffs, zero.clone()).unwrap()
        };
        let whole = superpose(&seqs, &ch).unwrap();
        let a = superpose(&seqs[..3], &split(0..3)).unwrap();
        let b = superpose(&seqs[3..], &split(3..7)).unwrap();
        for i in 0..16 {
            assert!((whole[i] - a[i] - b[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn superpose_rejects_mismatches() {
        let seqs = encoded(2, 3, 7);
        let mut rng = substream(7, 1);
        let ch = draw_channel(&ChannelModel::noiseless(ChannelKind::Awgn), 3, 8, &mut rng).unwrap();
        assert!(matches!(superpose(&seqs, &ch), Err(Error::DimensionMismatch { .. })));
        let ch = draw_channel(&ChannelModel::noiseless(ChannelKind::Awgn), 2, 16, &mut rng).unwrap();
        assert!(matches!(superpose(&seqs, &ch), Err(Error::DimensionMismatch { .. })));
    }
}
