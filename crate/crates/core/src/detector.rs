//! Energy-based majority-vote detection.
//!
//! For vote index `n` the receiver splits the subcarriers by the Gray
//! coordinate of index `n`, sums `|R_i|^2` over each half and decides
//! `+1` when the half with coordinate 1 carries at least as much energy.

use crate::codec::{Alpha, Vote};
use crate::cs::{ComplexSequence, GrayTable, Permutation};
use crate::{Error, Result, Scalar};

/// Half energies `(M+_n, M-_n)` for one vote index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricPair<T> {
    pub m_plus: T,
    pub m_minus: T,
}

impl<T: Scalar> MetricPair<T> {
    pub fn decision(&self) -> i8 {
        sign_tie_plus(self.m_plus - self.m_minus)
    }
}

/// Number of positive, negative and absent votes for one index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VoteCensus {
    pub k_plus: usize,
    pub k_minus: usize,
    pub k_zero: usize,
}

impl VoteCensus {
    pub fn new(k_plus: usize, k_minus: usize, k_zero: usize) -> Self {
        Self {
            k_plus,
            k_minus,
            k_zero,
        }
    }

    pub fn from_votes<'a>(votes: impl IntoIterator<Item = &'a Vote>) -> Self {
        votes.into_iter().fold(Self::default(), |mut c, v| {
            match v {
                Vote::Plus => c.k_plus += 1,
                Vote::Minus => c.k_minus += 1,
                Vote::Zero => c.k_zero += 1,
            }
            c
        })
    }

    pub fn total(&self) -> usize {
        self.k_plus + self.k_minus + self.k_zero
    }

    /// The true majority vote, ties going to `+1`.
    pub fn majority(&self) -> i8 {
        if self.k_plus >= self.k_minus {
            1
        } else {
            -1
        }
    }
}

/// `sign(x)` with `sign(0) = +1`.
#[inline]
pub fn sign_tie_plus<T: Scalar>(x: T) -> i8 {
    if x < T::zero() {
        -1
    } else {
        1
    }
}

/// Majority of a set of votes, ties (including no votes) going to `+1`.
pub fn majority<'a>(votes: impl IntoIterator<Item = &'a Vote>) -> i8 {
    let sum: i64 = votes.into_iter().map(|v| v.as_i8() as i64).sum();
    if sum < 0 {
        -1
    } else {
        1
    }
}

fn check_len<T: Scalar>(table: &GrayTable, r: &ComplexSequence<T>) -> Result<()> {
    if r.len() != table.len() {
        return Err(Error::DimensionMismatch {
            what: "received sequence length",
            expected: table.len(),
            actual: r.len(),
        });
    }
    Ok(())
}

pub fn half_energies<T: Scalar>(
    r: &ComplexSequence<T>,
    pi: &Permutation,
    n: usize,
) -> Result<MetricPair<T>> {
    half_energies_with(&GrayTable::new(pi), r, n)
}

pub fn half_energies_with<T: Scalar>(
    table: &GrayTable,
    r: &ComplexSequence<T>,
    n: usize,
) -> Result<MetricPair<T>> {
    check_len(table, r)?;
    let m = table.m();
    if n == 0 || n > m {
        return Err(Error::IndexOutOfRange { n, m });
    }
    let mut pair = MetricPair {
        m_plus: T::zero(),
        m_minus: T::zero(),
    };
    for (i, e) in r.elements().iter().enumerate() {
        if table.gray_bit(i, n) {
            pair.m_plus += e.norm_sqr();
        } else {
            pair.m_minus += e.norm_sqr();
        }
    }
    Ok(pair)
}

/// Metric pairs for every vote index in one pass over the sequence.
pub fn all_half_energies_with<T: Scalar>(
    table: &GrayTable,
    r: &ComplexSequence<T>,
) -> Result<Vec<MetricPair<T>>> {
    check_len(table, r)?;
    let m = table.m();
    let mut plus = vec![T::zero(); m];
    let mut minus = vec![T::zero(); m];
    for (i, e) in r.elements().iter().enumerate() {
        let power = e.norm_sqr();
        let bits = table.gray_bits(i);
        for n in 0..m {
            if (bits >> n) & 1 == 1 {
                plus[n] += power;
            } else {
                minus[n] += power;
            }
        }
    }
    Ok(plus
        .into_iter()
        .zip(minus)
        .map(|(m_plus, m_minus)| MetricPair { m_plus, m_minus })
        .collect())
}

/// The `m` majority-vote decisions, each `+1` or `-1`.
pub fn detect_mv<T: Scalar>(r: &ComplexSequence<T>, pi: &Permutation) -> Result<Vec<i8>> {
    detect_mv_with(&GrayTable::new(pi), r)
}

pub fn detect_mv_with<T: Scalar>(table: &GrayTable, r: &ComplexSequence<T>) -> Result<Vec<i8>> {
    Ok(all_half_energies_with(table, r)?
        .iter()
        .map(MetricPair::decision)
        .collect())
}

/// `1 / (1 + e^{-x})`
fn logistic<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// Closed-form means of `(M+_n, M-_n)` over channel and noise for a vote
/// census, amplitude scaling `alpha` and noise variance `sigma2`.
pub fn expected_metrics<T: Scalar>(
    census: &VoteCensus,
    alpha: Alpha<T>,
    sigma2: T,
    m: usize,
) -> MetricPair<T> {
    let (strong, weak) = match alpha {
        Alpha::Finite(a) => (logistic(a + a), logistic(-(a + a))),
        Alpha::Infinite => (T::one(), T::zero()),
    };
    let len = T::lit((1u64 << m) as f64);
    let kp = T::lit(census.k_plus as f64);
    let km = T::lit(census.k_minus as f64);
    let shared = len / T::lit(2.0) * (T::lit(census.k_zero as f64) + sigma2);
    MetricPair {
        m_plus: len * (kp * strong + km * weak) + shared,
        m_minus: len * (kp * weak + km * strong) + shared,
    }
}
