//! Complementary sequences from pseudo-Boolean functions.
//!
//! A sequence of length `L = 2^m` is indexed by the binary vectors
//! `x = (x_1, ..., x_m)` in lexicographic order, `i(x) = sum_j x_j 2^(m-j)`.
//! Element `i(x)` is `exp(f_r(x)) * exp(j 2 pi f_i(x) / H)` where
//!
//! ```text
//! f_r(x) = sum_n gamma_n g_n(x) + a'
//! f_i(x) = (H/2) sum_{n<m} x_{pi_n} x_{pi_(n+1)} + sum_n b_n x_{pi_n} + c'   (mod H)
//! ```
//!
//! and `g_n(x)` is the Gray coordinate `x_{pi_n} xor x_{pi_(n+1)}` (or
//! `x_{pi_m}` for `n = m`). Every choice of real `gamma_n, a'` and integer
//! `b_n, c'` gives a complementary sequence, so the OFDM symbol carrying it
//! has a PMEPR of at most 3 dB.

use std::fmt;
use std::ops::Index;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result, Scalar};

/// Largest supported sequence exponent (`L = 2^24`).
pub const MAX_M: usize = 24;

/// Default oversampling factor for [`pmepr_db`].
pub const DEFAULT_OVERSAMPLE: usize = 16;

fn check_m(m: usize) -> Result<()> {
    if m == 0 || m > MAX_M {
        Err(Error::ExponentOutOfRange(m))
    } else {
        Ok(())
    }
}

/// A point `x` of `Z_2^m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVector(Vec<u8>);

impl BitVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        check_m(bits.len())?;
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::param("bits", format!("entry {b} is not 0 or 1")));
        }
        Ok(Self(bits))
    }

    /// Inverse of [`BitVector::index`]: `x_j` is bit `m - j` of `index`.
    pub fn from_index(index: usize, m: usize) -> Result<Self> {
        check_m(m)?;
        if index >> m != 0 {
            return Err(Error::param(
                "index",
                format!("{index} does not fit in {m} bits"),
            ));
        }
        Ok(Self((1..=m).map(|j| ((index >> (m - j)) & 1) as u8).collect()))
    }

    /// All of `Z_2^m` in lexicographic order.
    pub fn all(m: usize) -> Result<impl Iterator<Item = BitVector>> {
        check_m(m)?;
        Ok((0..1usize << m).map(move |i| Self::from_index(i, m).expect("index fits")))
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    /// `x_j` for `1 <= j <= m`.
    pub fn bit(&self, j: usize) -> u8 {
        self.0[j - 1]
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    /// The decimal value of `x` read as a big-endian binary number.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }
}

/// `i(x) = sum_j x_j 2^(m-j)`.
pub fn index_of(x: &BitVector) -> usize {
    x.index()
}

/// A permutation `pi` of `{1, ..., m}`, stored one-based as written.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(one_based: Vec<usize>) -> Result<Self> {
        let m = one_based.len();
        check_m(m)?;
        let mut seen = vec![false; m];
        for &p in &one_based {
            if p == 0 || p > m || seen[p - 1] {
                return Err(Error::InvalidPermutation(one_based));
            }
            seen[p - 1] = true;
        }
        Ok(Self(one_based))
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::new((1..=m).collect())
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    /// `pi_n` for `1 <= n <= m`.
    pub fn get(&self, n: usize) -> usize {
        self.0[n - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// The Gray coordinate that decides which half of the sequence index
/// `i(x)` falls in for majority-vote index `n`.
pub fn gray_coordinate(x: &BitVector, pi: &Permutation, n: usize) -> Result<u8> {
    let m = pi.m();
    if x.m() != m {
        return Err(Error::DimensionMismatch {
            what: "bit vector length",
            expected: m,
            actual: x.m(),
        });
    }
    if n == 0 || n > m {
        return Err(Error::IndexOutOfRange { n, m });
    }
    let here = x.bit(pi.get(n));
    Ok(if n < m {
        here ^ x.bit(pi.get(n + 1))
    } else {
        here
    })
}

/// An amplitude weight `gamma_n`.
///
/// The infinite variants stand for the `alpha -> infinity` limit: the half
/// of the sequence that disagrees with the sign is zeroed and the other half
/// is scaled by `sqrt(2)`. They are never represented as large floats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeWeight<T> {
    Finite(T),
    PlusInfinity,
    MinusInfinity,
}

impl<T: Scalar> AmplitudeWeight<T> {
    pub fn zero() -> Self {
        AmplitudeWeight::Finite(T::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, AmplitudeWeight::Finite(_))
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            AmplitudeWeight::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Whether an infinite weight keeps elements whose Gray coordinate is `bit`.
    fn keeps(&self, bit: bool) -> bool {
        match self {
            AmplitudeWeight::PlusInfinity => bit,
            AmplitudeWeight::MinusInfinity => !bit,
            AmplitudeWeight::Finite(_) => true,
        }
    }
}

/// Parameters of one member of the sequence family.
///
/// `a_offset` scales the finite weights only; each infinite weight carries
/// its own `sqrt(2)` normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct CsParams<T> {
    m: usize,
    h: u32,
    pi: Permutation,
    gamma: Vec<AmplitudeWeight<T>>,
    a_offset: T,
    b: Vec<u32>,
    c_offset: u32,
}

impl<T: Scalar> CsParams<T> {
    /// Validates and builds a parameter set. `b` and `c_offset` are reduced
    /// modulo `h`.
    pub fn new(
        h: u32,
        pi: Permutation,
        gamma: Vec<AmplitudeWeight<T>>,
        a_offset: T,
        b: Vec<u32>,
        c_offset: u32,
    ) -> Result<Self> {
        let m = pi.m();
        if h == 0 {
            return Err(Error::EmptyPhaseAlphabet);
        }
        if m >= 2 && h % 2 != 0 {
            return Err(Error::OddPhaseAlphabet(h));
        }
        for (what, len) in [("gamma length", gamma.len()), ("b length", b.len())] {
            if len != m {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: m,
                    actual: len,
                });
            }
        }
        if let Some(pos) = gamma
            .iter()
            .position(|g| matches!(g, AmplitudeWeight::Finite(v) if !v.is_finite()))
        {
            return Err(Error::NonFiniteWeight(pos));
        }
        if !a_offset.is_finite() {
            return Err(Error::param("a_offset", "must be finite"));
        }
        Ok(Self {
            m,
            h,
            pi,
            gamma,
            a_offset,
            b: b.into_iter().map(|v| v % h).collect(),
            c_offset: c_offset % h,
        })
    }

    /// Unit-modulus member with all weights and offsets zero.
    pub fn unimodular(h: u32, pi: Permutation) -> Result<Self> {
        let m = pi.m();
        Self::new(h, pi, vec![AmplitudeWeight::zero(); m], T::zero(), vec![0; m], 0)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn pi(&self) -> &Permutation {
        &self.pi
    }

    pub fn gamma(&self) -> &[AmplitudeWeight<T>] {
        &self.gamma
    }

    pub fn a_offset(&self) -> T {
        self.a_offset
    }

    pub fn b(&self) -> &[u32] {
        &self.b
    }

    pub fn c_offset(&self) -> u32 {
        self.c_offset
    }

    /// True when any weight sits at the infinite limit.
    pub fn alpha_infinite(&self) -> bool {
        self.gamma.iter().any(|g| !g.is_finite())
    }
}

/// Log-amplitude of element `i(x)`.
///
/// Infinite weights contribute `ln sqrt(2)` on the kept half and `-inf`
/// on the zeroed half.
pub fn eval_f_r<T: Scalar>(x: &BitVector, params: &CsParams<T>) -> Result<T> {
    let mut acc = params.a_offset;
    for (idx, w) in params.gamma.iter().enumerate() {
        let g = gray_coordinate(x, &params.pi, idx + 1)? == 1;
        match w {
            AmplitudeWeight::Finite(v) => {
                if g {
                    acc += *v;
                }
            }
            inf => {
                if inf.keeps(g) {
                    acc += T::LN_2() / T::lit(2.0);
                } else {
                    return Ok(T::neg_infinity());
                }
            }
        }
    }
    Ok(acc)
}

/// Phase index of element `i(x)` in `Z_H`.
pub fn eval_f_i<T: Scalar>(x: &BitVector, params: &CsParams<T>) -> Result<u32> {
    let m = params.m;
    if x.m() != m {
        return Err(Error::DimensionMismatch {
            what: "bit vector length",
            expected: m,
            actual: x.m(),
        });
    }
    let h = params.h as u64;
    let xp = |n: usize| x.bit(params.pi.get(n)) as u64;
    let quad: u64 = (1..m).map(|n| xp(n) * xp(n + 1)).sum();
    let linear: u64 = (1..=m).map(|n| params.b[n - 1] as u64 * xp(n)).sum();
    let half = if m >= 2 { h / 2 } else { 0 };
    Ok(((half * quad + linear + params.c_offset as u64) % h) as u32)
}

/// `exp(j 2 pi k / H)`, exact on the quarter-turn points.
pub fn unit_root<T: Scalar>(k: u32, h: u32) -> Complex<T> {
    let k = k % h;
    if (4 * k as u64) % h as u64 == 0 {
        return match (4 * k as u64) / h as u64 {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        };
    }
    let theta = T::TAU() * T::lit(k as f64) / T::lit(h as f64);
    Complex::new(theta.cos(), theta.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct IndexBits {
    /// bit `n-1` is the Gray coordinate for index `n`
    gray: u32,
    /// bit `n-1` is `x_{pi_n}`
    perm: u32,
    /// parity of `sum_n x_{pi_n} x_{pi_(n+1)}`
    quad: bool,
}

/// Per-index bit layout for a fixed `(m, pi)`, shared by the encoder and
/// the detector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayTable {
    pi: Permutation,
    entries: Vec<IndexBits>,
}

impl GrayTable {
    pub fn new(pi: &Permutation) -> Self {
        let m = pi.m();
        let entries = (0..1usize << m)
            .map(|i| {
                let xp = |n: usize| ((i >> (m - pi.get(n))) & 1) as u32;
                let mut gray = 0u32;
                let mut perm = 0u32;
                let mut quad = 0u32;
                for n in 1..=m {
                    perm |= xp(n) << (n - 1);
                    let g = if n < m {
                        quad += xp(n) & xp(n + 1);
                        xp(n) ^ xp(n + 1)
                    } else {
                        xp(n)
                    };
                    gray |= g << (n - 1);
                }
                IndexBits {
                    gray,
                    perm,
                    quad: quad % 2 == 1,
                }
            })
            .collect();
        Self {
            pi: pi.clone(),
            entries,
        }
    }

    pub fn m(&self) -> usize {
        self.pi.m()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pi(&self) -> &Permutation {
        &self.pi
    }

    /// Gray coordinates of index `i`; bit `n-1` belongs to vote index `n`.
    #[inline]
    pub fn gray_bits(&self, i: usize) -> u32 {
        self.entries[i].gray
    }

    /// Gray coordinate of index `i` for vote index `n` (one-based).
    #[inline]
    pub fn gray_bit(&self, i: usize, n: usize) -> bool {
        (self.entries[i].gray >> (n - 1)) & 1 == 1
    }

    fn check(&self, params_pi: &Permutation) -> Result<()> {
        if &self.pi != params_pi {
            return Err(Error::param(
                "pi",
                format!("table built for {} but parameters use {}", self.pi, params_pi),
            ));
        }
        Ok(())
    }

    /// Writes the sequence described by the given weights and phase
    /// coefficients into `out`. Lengths are the caller's responsibility.
    pub(crate) fn synthesize_into<T: Scalar>(
        &self,
        gamma: &[AmplitudeWeight<T>],
        a_offset: T,
        b: &[u32],
        c_offset: u32,
        roots: &[Complex<T>],
        out: &mut [Complex<T>],
    ) {
        let h = roots.len() as u32;
        let m = self.m();
        let mut keep_one = 0u32;
        let mut keep_zero = 0u32;
        let mut finite: Vec<(u32, T)> = Vec::with_capacity(m);
        for (idx, w) in gamma.iter().enumerate() {
            match w {
                AmplitudeWeight::Finite(v) => {
                    if *v != T::zero() {
                        finite.push((1 << idx, *v));
                    }
                }
                AmplitudeWeight::PlusInfinity => keep_one |= 1 << idx,
                AmplitudeWeight::MinusInfinity => keep_zero |= 1 << idx,
            }
        }
        let infinite = (keep_one | keep_zero).count_ones() as i32;
        let mut scale = T::lit(2.0).powi(infinite / 2);
        if infinite % 2 == 1 {
            scale *= T::SQRT_2();
        }
        let half = if m >= 2 { h / 2 } else { 0 };

        // Amplitude as a function of the gray bits: the product of e^a and
        // e^gamma_n over the set bits, built one bit at a time. Falls back to
        // one exp per element when the partial products could leave the
        // floating-point range.
        let spread = finite.iter().fold(a_offset.abs(), |acc, &(_, v)| acc + v.abs());
        let amplitudes = if spread < T::lit(80.0) {
            let mut factors = vec![T::one(); m];
            for &(mask, v) in &finite {
                factors[mask.trailing_zeros() as usize] = v.exp();
            }
            let mut amp = vec![T::zero(); 1 << m];
            amp[0] = if a_offset == T::zero() {
                scale
            } else {
                scale * a_offset.exp()
            };
            for g in 1..amp.len() {
                let low = g & g.wrapping_neg();
                amp[g] = amp[g ^ low] * factors[low.trailing_zeros() as usize];
            }
            Some(amp)
        } else {
            None
        };

        // sum of b_n over the set permuted bits, reduced mod H
        let mut phases = vec![0u32; 1 << m];
        for g in 1..phases.len() {
            let low = g & g.wrapping_neg();
            let p = phases[g ^ low] + b[low.trailing_zeros() as usize];
            phases[g] = if p >= h { p - h } else { p };
        }
        let reduce = |p: u32| if p >= h { p - h } else { p };

        for (entry, slot) in self.entries.iter().zip(out.iter_mut()) {
            if entry.gray & keep_one != keep_one || entry.gray & keep_zero != 0 {
                *slot = Complex::new(T::zero(), T::zero());
                continue;
            }
            let amplitude = match &amplitudes {
                Some(amp) => amp[entry.gray as usize],
                None => {
                    let exponent = finite
                        .iter()
                        .filter(|(mask, _)| entry.gray & mask != 0)
                        .fold(a_offset, |acc, &(_, v)| acc + v);
                    scale * exponent.exp()
                }
            };
            let quad = if entry.quad { half } else { 0 };
            let phase = reduce(reduce(phases[entry.perm as usize] + quad) + c_offset);
            *slot = roots[phase as usize] * amplitude;
        }
    }
}

/// `H` unit roots `exp(j 2 pi k / H)`, `k = 0..H`.
pub(crate) fn unit_roots<T: Scalar>(h: u32) -> Vec<Complex<T>> {
    (0..h).map(|k| unit_root(k, h)).collect()
}

/// A length-`2^m` complex sequence, one value per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence<T> {
    m: usize,
    elements: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexSequence<T> {
    pub fn new(elements: Vec<Complex<T>>) -> Result<Self> {
        let len = elements.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::param(
                "elements",
                format!("length {len} is not 2^m with m >= 1"),
            ));
        }
        let m = len.trailing_zeros() as usize;
        check_m(m)?;
        Ok(Self { m, elements })
    }

    pub fn from_real(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    pub(crate) fn zeros(m: usize) -> Self {
        Self {
            m,
            elements: vec![Complex::new(T::zero(), T::zero()); 1 << m],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Complex<T>] {
        &self.elements
    }

    pub(crate) fn elements_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.elements
    }

    pub fn into_elements(self) -> Vec<Complex<T>> {
        self.elements
    }

    /// Squared 2-norm.
    pub fn energy(&self) -> T {
        self.elements.iter().map(|e| e.norm_sqr()).sum()
    }
}

impl<T> Index<usize> for ComplexSequence<T> {
    type Output = Complex<T>;

    fn index(&self, i: usize) -> &Complex<T> {
        &self.elements[i]
    }
}

/// Synthesizes the sequence for `params`.
pub fn build_cs<T: Scalar>(params: &CsParams<T>) -> ComplexSequence<T> {
    let table = GrayTable::new(&params.pi);
    build_cs_with(&table, params).expect("table built from the same permutation")
}

/// [`build_cs`] with a precomputed table for `(m, pi)`.
pub fn build_cs_with<T: Scalar>(
    table: &GrayTable,
    params: &CsParams<T>,
) -> Result<ComplexSequence<T>> {
    table.check(&params.pi)?;
    let roots = unit_roots(params.h);
    let mut out = ComplexSequence::zeros(params.m);
    table.synthesize_into(
        &params.gamma,
        params.a_offset,
        &params.b,
        params.c_offset,
        &roots,
        out.elements_mut(),
    );
    Ok(out)
}

/// Aperiodic autocorrelation `rho_a(k)`; zero for `|k| >= L`.
pub fn aacf<T: Scalar>(a: &[Complex<T>], k: isize) -> Complex<T> {
    let len = a.len() as isize;
    if k.abs() >= len {
        return Complex::new(T::zero(), T::zero());
    }
    if k >= 0 {
        let k = k as usize;
        a.iter()
            .zip(&a[k..])
            .map(|(x, y)| x.conj() * y)
            .fold(Complex::new(T::zero(), T::zero()), |s, v| s + v)
    } else {
        let k = (-k) as usize;
        a[k..]
            .iter()
            .zip(a)
            .map(|(x, y)| y * x.conj())
            .fold(Complex::new(T::zero(), T::zero()), |s, v| s + v)
    }
}

/// PMEPR measurement with a cached inverse FFT plan.
///
/// The envelope `|A(e^{j theta})|^2` is sampled at `oversample * L` equally
/// spaced points on the unit circle via a zero-padded inverse DFT.
pub struct PmeprMeter<T: Scalar> {
    len: usize,
    oversample: usize,
    fft: Arc<dyn Fft<T>>,
    buffer: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Scalar> fmt::Debug for PmeprMeter<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PmeprMeter")
            .field("len", &self.len)
            .field("oversample", &self.oversample)
            .finish()
    }
}

impl<T: Scalar> PmeprMeter<T> {
    pub fn new(len: usize, oversample: usize) -> Result<Self> {
        if oversample < 4 {
            return Err(Error::OversampleTooSmall(oversample));
        }
        let n = len * oversample;
        let fft = FftPlanner::new().plan_fft_inverse(n);
        let scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        Ok(Self {
            len,
            oversample,
            fft,
            buffer: vec![Complex::new(T::zero(), T::zero()); n],
            scratch,
        })
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    /// PMEPR of `a` in dB.
    pub fn measure(&mut self, a: &[Complex<T>]) -> Result<T> {
        if a.len() != self.len {
            return Err(Error::DimensionMismatch {
                what: "sequence length",
                expected: self.len,
                actual: a.len(),
            });
        }
        let nonzero = a.iter().filter(|e| e.norm_sqr() > T::zero()).count();
        match nonzero {
            0 => return Err(Error::ZeroSequence),
            // constant envelope
            1 => return Ok(T::zero()),
            _ => {}
        }
        self.buffer.fill(Complex::new(T::zero(), T::zero()));
        self.buffer[..a.len()].copy_from_slice(a);
        self.fft
            .process_with_scratch(&mut self.buffer, &mut self.scratch);
        let (peak, total) = self
            .buffer
            .iter()
            .map(|s| s.norm_sqr())
            .fold((T::zero(), T::zero()), |(p, t), v| (p.max(v), t + v));
        let mean = total / T::lit(self.buffer.len() as f64);
        Ok((T::lit(10.0) * (peak / mean).log10()).max(T::zero()))
    }
}

/// PMEPR of `a` in dB at the given oversampling factor (at least 4).
pub fn pmepr_db<T: Scalar>(a: &ComplexSequence<T>, oversample: usize) -> Result<T> {
    PmeprMeter::new(a.len(), oversample)?.measure(a.elements())
}
