//! Complex vector arithmetic, seeded random streams and the rank-one
//! linear-algebra kernels used by the precoders.

use alloc::vec::Vec;
use core::ops::Index;

pub use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Norms at or below this value are treated as zero.
pub const EPS_NORM: f64 = 1e-12;

pub(crate) fn hypot(re: f64, im: f64) -> f64 {
    libm::hypot(re, im)
}

/// A fixed-length vector of complex coefficients.
///
/// Channel vectors are row vectors and precoders are column vectors; both
/// share this representation and products never conjugate implicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVec(Vec<Complex64>);

impl ComplexVec {
    pub fn new(elements: Vec<Complex64>) -> Self {
        ComplexVec(elements)
    }

    pub fn zeros(n: usize) -> Self {
        ComplexVec(alloc::vec![Complex64::new(0.0, 0.0); n])
    }

    /// Builds a vector from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        ComplexVec(pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }

    /// Builds a vector from interleaved `[re0, im0, re1, im1, ...]` reals.
    pub fn from_interleaved(reals: &[f64]) -> Result<Self> {
        if reals.len() % 2 != 0 {
            return Err(Error::invalid("interleaved complex data needs an even length"));
        }
        Ok(ComplexVec(
            reals.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn conj(&self) -> ComplexVec {
        ComplexVec(self.0.iter().map(|c| c.conj()).collect())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    pub fn scale(&self, s: Complex64) -> ComplexVec {
        ComplexVec(self.0.iter().map(|&c| c * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> ComplexVec {
        ComplexVec(self.0.iter().map(|&c| c * s).collect())
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: Complex64, other: &ComplexVec) -> Result<ComplexVec> {
        check_len(self.len(), other.len())?;
        Ok(ComplexVec(
            self.0.iter().zip(&other.0).map(|(&a, &b)| a + s * b).collect(),
        ))
    }

    /// Appends `[re, im]` for every element to `out`.
    pub fn extend_interleaved(&self, out: &mut Vec<f64>) {
        for c in &self.0 {
            out.push(c.re);
            out.push(c.im);
        }
    }
}

impl Index<usize> for ComplexVec {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl From<Vec<Complex64>> for ComplexVec {
    fn from(v: Vec<Complex64>) -> Self {
        ComplexVec(v)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// `Σ a_k b_k` without conjugation.
pub fn inner(a: &ComplexVec, b: &ComplexVec) -> Result<Complex64> {
    check_len(a.len(), b.len())?;
    Ok(a.0.iter().zip(&b.0).map(|(&x, &y)| x * y).sum())
}

pub fn normalize(v: &ComplexVec) -> Result<ComplexVec> {
    let norm = v.norm();
    if norm <= EPS_NORM {
        return Err(Error::DegenerateVector { norm });
    }
    Ok(v.scale_real(1.0 / norm))
}

/// Projects `conj(h)` onto the orthogonal complement of `conj(g)`, so the
/// result `r` satisfies `g · r = 0`.
pub fn null_project(h: &ComplexVec, g: &ComplexVec) -> Result<ComplexVec> {
    check_len(h.len(), g.len())?;
    let g_norm_sqr = g.norm_sqr();
    if libm::sqrt(g_norm_sqr) <= EPS_NORM {
        return Err(Error::invalid("null_project: cross channel is zero"));
    }
    let hc = h.conj();
    let coeff = inner(g, &hc)? / g_norm_sqr;
    hc.add_scaled(-coeff, &g.conj())
}

/// Solves `(σ² I + gᴴ g) r = x` with the Sherman–Morrison closed form.
pub fn regularized_solve(g: &ComplexVec, sigma2: f64, x: &ComplexVec) -> Result<ComplexVec> {
    check_len(g.len(), x.len())?;
    if !(sigma2 > 0.0) {
        return Err(Error::invalid("regularized_solve: sigma2 must be positive"));
    }
    let coeff = inner(g, x)? / (sigma2 + g.norm_sqr());
    Ok(x.add_scaled(-coeff, &g.conj())?.scale_real(1.0 / sigma2))
}

/// Identifies an independent random stream derived from a run seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamId {
    Channel = 1,
    ExplorationNoise = 2,
    Init = 3,
    Replay = 4,
    TestSet = 5,
    Audit = 6,
    Fixture = 7,
}

/// Seeded ChaCha8 generator bound to a `(seed, stream)` pair.
///
/// Streams with distinct ids use disjoint ChaCha keystreams, so draws on
/// one never perturb another.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn derive(seed: u64, id: StreamId) -> Self {
        Self::new(seed, id as u64)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 32-bit words consumed so far.
    pub fn word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform_range(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.uniform()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

/// Draws `n` i.i.d. CN(0, 1) elements (variance 1/2 per real component).
pub fn sample_cn01(rng: &mut RngStream, n: usize) -> ComplexVec {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    ComplexVec(
        (0..n)
            .map(|_| {
                let re = rng.standard_normal() * s;
                let im = rng.standard_normal() * s;
                Complex64::new(re, im)
            })
            .collect(),
    )
}

/// Argument of `c` with `arg(0) = 0`.
pub fn arg(c: Complex64) -> f64 {
    if c.re == 0.0 && c.im == 0.0 {
        0.0
    } else {
        libm::atan2(c.im, c.re)
    }
}

/// `e^{jφ}`.
pub fn unit_phasor(phi: f64) -> Complex64 {
    Complex64::new(libm::cos(phi), libm::sin(phi))
}
