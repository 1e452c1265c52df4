//! Vote vectors to transmitted sequences.
//!
//! Vote `v[n]` sets the amplitude weight `gamma_n` to `+alpha`, `0` or
//! `-alpha`; the offset `a'` then pins the sequence energy to `2^m`. The
//! phase coefficients `b_n, c'` are redrawn uniformly from `Z_H` for every
//! transmission when phase randomization is on.

use std::fmt;

use num_complex::Complex;
use rand::Rng;

use crate::cs::{self, AmplitudeWeight, ComplexSequence, CsParams, GrayTable, Permutation};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vote {
    Minus,
    Zero,
    Plus,
}

impl Vote {
    pub fn as_i8(self) -> i8 {
        match self {
            Vote::Minus => -1,
            Vote::Zero => 0,
            Vote::Plus => 1,
        }
    }

    /// Sign of `x`, with an exact zero mapping to an abstention.
    pub fn sign_of<T: Scalar>(x: T) -> Self {
        if x > T::zero() {
            Vote::Plus
        } else if x < T::zero() {
            Vote::Minus
        } else {
            Vote::Zero
        }
    }
}

impl TryFrom<i64> for Vote {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            -1 => Ok(Vote::Minus),
            0 => Ok(Vote::Zero),
            1 => Ok(Vote::Plus),
            other => Err(Error::InvalidVote(other)),
        }
    }
}

/// One sensor's votes for the `m` majority-vote computations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VoteVector(Vec<Vote>);

impl VoteVector {
    pub fn new(votes: Vec<Vote>) -> Self {
        Self(votes)
    }

    pub fn from_ints(votes: &[i64]) -> Result<Self> {
        votes
            .iter()
            .map(|&v| Vote::try_from(v))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn abstain(m: usize) -> Self {
        Self(vec![Vote::Zero; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn votes(&self) -> &[Vote] {
        &self.0
    }

    pub fn votes_mut(&mut self) -> &mut [Vote] {
        &mut self.0
    }
}

impl fmt::Display for VoteVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v.as_i8())?;
        }
        write!(f, ")")
    }
}

/// The amplitude scaling parameter `alpha > 0`, or its infinite limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Alpha<T> {
    pub fn finite(value: T) -> Result<Self> {
        if value.is_finite() && value > T::zero() {
            Ok(Alpha::Finite(value))
        } else if value == T::infinity() {
            Ok(Alpha::Infinite)
        } else {
            Err(Error::param("alpha", format!("{value} is not > 0")))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Alpha::Infinite)
    }

    /// `inf` for the limit, the number otherwise.
    pub fn to_f64(&self) -> f64 {
        match self {
            Alpha::Finite(v) => v.to_f64_lossy(),
            Alpha::Infinite => f64::INFINITY,
        }
    }
}

impl<T: Scalar> fmt::Display for Alpha<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(v) => write!(f, "{v}"),
            Alpha::Infinite => write!(f, "inf"),
        }
    }
}

/// Maps votes to amplitude weights: `+alpha`, `0`, `-alpha`.
pub fn modulate_votes<T: Scalar>(v: &VoteVector, alpha: Alpha<T>) -> Vec<AmplitudeWeight<T>> {
    v.votes()
        .iter()
        .map(|vote| match (vote, alpha) {
            (Vote::Zero, _) => AmplitudeWeight::zero(),
            (Vote::Plus, Alpha::Finite(a)) => AmplitudeWeight::Finite(a),
            (Vote::Minus, Alpha::Finite(a)) => AmplitudeWeight::Finite(-a),
            (Vote::Plus, Alpha::Infinite) => AmplitudeWeight::PlusInfinity,
            (Vote::Minus, Alpha::Infinite) => AmplitudeWeight::MinusInfinity,
        })
        .collect()
}

/// `ln((1 + e^{2g}) / 2)` without overflow for large `|g|`.
pub fn log_half_gain<T: Scalar>(g: T) -> T {
    let t = g + g;
    let softplus = t.max(T::zero()) + (-t.abs()).exp().ln_1p();
    softplus - T::LN_2()
}

/// The offset `a'` that gives the sequence a squared 2-norm of `2^m`.
pub fn normalization_offset<T: Scalar>(gamma: &[AmplitudeWeight<T>]) -> Result<T> {
    let mut acc = T::zero();
    for (pos, w) in gamma.iter().enumerate() {
        match w.finite() {
            Some(g) => acc += log_half_gain(g),
            None => return Err(Error::NonFiniteWeight(pos)),
        }
    }
    Ok(-acc / T::lit(2.0))
}

/// Offset for a weight vector that may contain infinite entries; those
/// carry their own normalization.
fn finite_offset<T: Scalar>(gamma: &[AmplitudeWeight<T>]) -> T {
    -gamma
        .iter()
        .filter_map(|w| w.finite())
        .map(log_half_gain)
        .fold(T::zero(), |a, b| a + b)
        / T::lit(2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig<T> {
    pi: Permutation,
    h: u32,
    alpha: Alpha<T>,
    phase_randomization: bool,
}

impl<T: Scalar> EncoderConfig<T> {
    pub fn new(pi: Permutation, h: u32, alpha: Alpha<T>, phase_randomization: bool) -> Result<Self> {
        if h < 2 || h % 2 != 0 {
            return Err(Error::param("H", format!("{h} is not an even integer >= 2")));
        }
        if let Alpha::Finite(a) = alpha {
            Alpha::finite(a)?;
        }
        Ok(Self {
            pi,
            h,
            alpha,
            phase_randomization,
        })
    }

    /// Identity permutation, `H = 2`, randomized phases.
    pub fn with_defaults(m: usize, alpha: Alpha<T>) -> Result<Self> {
        Self::new(Permutation::identity(m)?, 2, alpha, true)
    }

    pub fn m(&self) -> usize {
        self.pi.m()
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn pi(&self) -> &Permutation {
        &self.pi
    }

    pub fn alpha(&self) -> Alpha<T> {
        self.alpha
    }

    pub fn phase_randomization(&self) -> bool {
        self.phase_randomization
    }
}

/// A reusable encoder holding the index table for its `(m, pi)`.
#[derive(Debug, Clone)]
pub struct Encoder<T> {
    cfg: EncoderConfig<T>,
    table: GrayTable,
    roots: Vec<Complex<T>>,
}

impl<T: Scalar> Encoder<T> {
    pub fn new(cfg: EncoderConfig<T>) -> Self {
        let table = GrayTable::new(&cfg.pi);
        let roots = cs::unit_roots(cfg.h);
        Self { cfg, table, roots }
    }

    pub fn config(&self) -> &EncoderConfig<T> {
        &self.cfg
    }

    pub fn table(&self) -> &GrayTable {
        &self.table
    }

    fn check(&self, v: &VoteVector) -> Result<()> {
        if v.len() != self.cfg.m() {
            return Err(Error::DimensionMismatch {
                what: "vote vector length",
                expected: self.cfg.m(),
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// Draws `(c', b_1, ..., b_m)`, or all zeros without randomization.
    fn draw_phases<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, Vec<u32>) {
        let m = self.cfg.m();
        if !self.cfg.phase_randomization {
            return (0, vec![0; m]);
        }
        let h = self.cfg.h;
        let c = rng.random_range(0..h);
        let b = (0..m).map(|_| rng.random_range(0..h)).collect();
        (c, b)
    }

    /// The full parameter set this encoder would use for `v` with the
    /// given phase coefficients.
    pub fn params_for(&self, v: &VoteVector, b: Vec<u32>, c_offset: u32) -> Result<CsParams<T>> {
        self.check(v)?;
        let gamma = modulate_votes(v, self.cfg.alpha);
        let a = finite_offset(&gamma);
        CsParams::new(self.cfg.h, self.cfg.pi.clone(), gamma, a, b, c_offset)
    }

    pub fn encode<R: Rng + ?Sized>(&self, v: &VoteVector, rng: &mut R) -> Result<ComplexSequence<T>> {
        let mut out = ComplexSequence::zeros(self.cfg.m());
        self.encode_into(v, rng, out.elements_mut())?;
        Ok(out)
    }

    /// [`Encoder::encode`] into a caller-owned buffer of length `2^m`.
    pub fn encode_into<R: Rng + ?Sized>(
        &self,
        v: &VoteVector,
        rng: &mut R,
        out: &mut [Complex<T>],
    ) -> Result<()> {
        self.check(v)?;
        if out.len() != self.table.len() {
            return Err(Error::DimensionMismatch {
                what: "output buffer length",
                expected: self.table.len(),
                actual: out.len(),
            });
        }
        let (c, b) = self.draw_phases(rng);
        let gamma = modulate_votes(v, self.cfg.alpha);
        let a = finite_offset(&gamma);
        self.table.synthesize_into(&gamma, a, &b, c, &self.roots, out);
        Ok(())
    }
}

/// One-shot encoding; build an [`Encoder`] to amortize the index table.
pub fn encode<T: Scalar, R: Rng + ?Sized>(
    v: &VoteVector,
    cfg: &EncoderConfig<T>,
    rng: &mut R,
) -> Result<ComplexSequence<T>> {
    Encoder::new(cfg.clone()).encode(v, rng)
}
