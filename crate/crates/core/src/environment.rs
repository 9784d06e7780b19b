//! The two-cell MISO interference channel: channel sampling, SINR, rates and
//! the collective reward.

use crate::numerics::{inner, sample_cn01, ComplexVec, RngStream};
use crate::{Error, Result};

/// Precoders whose norm deviates from one by more than this are rejected.
pub const PRECODER_NORM_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvConfig {
    n_t: usize,
    sigma_n2: f64,
}

impl EnvConfig {
    pub fn new(n_t: usize, sigma_n2: f64) -> Result<Self> {
        if n_t == 0 {
            return Err(Error::invalid("n_t must be at least 1"));
        }
        if !(sigma_n2 > 0.0) || !sigma_n2.is_finite() {
            return Err(Error::invalid("noise variance must be positive and finite"));
        }
        Ok(EnvConfig { n_t, sigma_n2 })
    }

    /// Average transmit SNR `ρ = 1/σ_n²` given in dB.
    pub fn from_snr_db(n_t: usize, snr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::invalid("snr_db must be finite"));
        }
        Self::new(n_t, libm::pow(10.0, -snr_db / 10.0))
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn sigma_n2(&self) -> f64 {
        self.sigma_n2
    }

    /// Symbol variance, fixed by the unit power constraint.
    pub fn sigma_d2(&self) -> f64 {
        1.0
    }

    pub fn snr(&self) -> f64 {
        1.0 / self.sigma_n2
    }
}

/// Direct (`h_i`) and cross (`g_i`) channels of both base stations.
///
/// `h_i` is BS i → UE i, `g_i` is BS i → the other UE.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub h1: ComplexVec,
    pub g1: ComplexVec,
    pub h2: ComplexVec,
    pub g2: ComplexVec,
}

impl ChannelRealization {
    pub fn new(h1: ComplexVec, g1: ComplexVec, h2: ComplexVec, g2: ComplexVec) -> Result<Self> {
        let n = h1.len();
        if n == 0 {
            return Err(Error::invalid("channel vectors must be non-empty"));
        }
        for v in [&g1, &h2, &g2] {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: v.len(),
                });
            }
        }
        Ok(ChannelRealization { h1, g1, h2, g2 })
    }

    pub fn n_t(&self) -> usize {
        self.h1.len()
    }

    /// `(h_i, g_i)` as seen by base station `agent` (0 or 1).
    pub fn local(&self, agent: usize) -> (&ComplexVec, &ComplexVec) {
        match agent {
            0 => (&self.h1, &self.g1),
            _ => (&self.h2, &self.g2),
        }
    }
}

pub fn sample_channel(rng: &mut RngStream, cfg: &EnvConfig) -> ChannelRealization {
    let n = cfg.n_t();
    let h1 = sample_cn01(rng, n);
    let g1 = sample_cn01(rng, n);
    let h2 = sample_cn01(rng, n);
    let g2 = sample_cn01(rng, n);
    ChannelRealization { h1, g1, h2, g2 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ue {
    One,
    Two,
}

/// Achieved rates in bits per channel use.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RatePair {
    pub r1: f64,
    pub r2: f64,
}

impl RatePair {
    pub fn new(r1: f64, r2: f64) -> Self {
        RatePair { r1, r2 }
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }

    pub fn weighted(&self, alpha: f64) -> f64 {
        alpha * self.r1 + (1.0 - alpha) * self.r2
    }
}

/// Returns `|c · w|² / ||w||²`, rejecting precoders off the unit sphere.
fn gain(c: &ComplexVec, w: &ComplexVec) -> Result<f64> {
    let norm_sqr = w.norm_sqr();
    let norm = libm::sqrt(norm_sqr);
    if (norm - 1.0).abs() > PRECODER_NORM_TOL {
        return Err(Error::NonUnitPrecoder { norm });
    }
    Ok(inner(c, w)?.norm_sqr() / norm_sqr)
}

pub fn sinr(
    ch: &ChannelRealization,
    w1: &ComplexVec,
    w2: &ComplexVec,
    cfg: &EnvConfig,
    ue: Ue,
) -> Result<f64> {
    let (desired, interferer, w_own, w_other) = match ue {
        Ue::One => (&ch.h1, &ch.g2, w1, w2),
        Ue::Two => (&ch.h2, &ch.g1, w2, w1),
    };
    let sd = cfg.sigma_d2();
    let signal = sd * gain(desired, w_own)?;
    let interference = sd * gain(interferer, w_other)?;
    Ok(signal / (cfg.sigma_n2() + interference))
}

pub(crate) fn rate_from_sinr(sinr: f64) -> f64 {
    libm::log1p(sinr) / core::f64::consts::LN_2
}

pub fn rate_pair(
    ch: &ChannelRealization,
    w1: &ComplexVec,
    w2: &ComplexVec,
    cfg: &EnvConfig,
) -> Result<RatePair> {
    let s1 = sinr(ch, w1, w2, cfg, Ue::One)?;
    let s2 = sinr(ch, w1, w2, cfg, Ue::Two)?;
    Ok(RatePair::new(rate_from_sinr(s1), rate_from_sinr(s2)))
}

/// `α r1 + (1 − α) r2`.
pub fn collective_reward(rp: &RatePair, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha must lie in [0, 1]"));
    }
    Ok(rp.weighted(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{normalize, null_project, unit_phasor};
    use num_complex::Complex64;

    fn e(n: usize, k: usize) -> ComplexVec {
        let mut v = alloc::vec![Complex64::new(0.0, 0.0); n];
        v[k] = Complex64::new(1.0, 0.0);
        ComplexVec::new(v)
    }

    #[test]
    fn interference_free_sinr() {
        let cfg = EnvConfig::new(2, 0.1).unwrap();
        let ch = ChannelRealization::new(e(2, 0), e(2, 0), e(2, 0), e(2, 0)).unwrap();
        // |h1 w1|² = 1 and |g2 w2|² = 0
        let s = sinr(&ch, &e(2, 0), &e(2, 1), &cfg, Ue::One).unwrap();
        assert!((s - 10.0).abs() < 1e-12);
        let rp = rate_pair(&ch, &e(2, 0), &e(2, 1), &cfg).unwrap();
        assert!((rp.r1 - 11f64.log2()).abs() < 1e-12);
        assert!((rp.r1 - 3.4594).abs() < 1e-4);
        // UE 2 gets |h2 w2|² = 0
        assert_eq!(rp.r2, 0.0);
    }

    #[test]
    fn nulled_interference_leaves_noise_only() {
        let cfg = EnvConfig::new(3, 0.1).unwrap();
        let mut rng = RngStream::new(3, 0);
        let ch = sample_channel(&mut rng, &cfg);
        let w1 = normalize(&ch.h1.conj()).unwrap();
        let w2 = normalize(&null_project(&ch.h2, &ch.g2).unwrap()).unwrap();
        let s = sinr(&ch, &w1, &w2, &cfg, Ue::One).unwrap();
        let expected = inner(&ch.h1, &w1).unwrap().norm_sqr() / cfg.sigma_n2();
        assert!((s - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn zero_signal_gives_zero_rate() {
        let cfg = EnvConfig::new(2, 0.1).unwrap();
        let ch = ChannelRealization::new(e(2, 0), e(2, 1), e(2, 1), e(2, 0)).unwrap();
        // w1 = e1 is orthogonal to conj(h1) = e0
        let s = sinr(&ch, &e(2, 1), &e(2, 0), &cfg, Ue::One).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn rejects_non_unit_precoders() {
        let cfg = EnvConfig::new(2, 0.1).unwrap();
        let ch = ChannelRealization::new(e(2, 0), e(2, 1), e(2, 1), e(2, 0)).unwrap();
        let big = e(2, 0).scale_real(1.1);
        assert!(matches!(
            rate_pair(&ch, &big, &e(2, 0), &cfg),
            Err(Error::NonUnitPrecoder { .. })
        ));
        // tiny drift is renormalized
        let drift = e(2, 0).scale_real(1.0 + 1e-8);
        assert!(rate_pair(&ch, &drift, &e(2, 0), &cfg).is_ok());
    }

    #[test]
    fn global_phase_shift_keeps_rates() {
        let cfg = EnvConfig::from_snr_db(3, 10.0).unwrap();
        let mut rng = RngStream::new(9, 0);
        let ch = sample_channel(&mut rng, &cfg);
        let w1 = normalize(&ch.h1.conj()).unwrap();
        let w2 = normalize(&ch.h2.conj()).unwrap();
        let p = unit_phasor(0.7);
        let shifted = ChannelRealization::new(
            ch.h1.scale(p),
            ch.g1.scale(p),
            ch.h2.scale(p),
            ch.g2.scale(p),
        )
        .unwrap();
        let a = rate_pair(&ch, &w1, &w2, &cfg).unwrap();
        let b = rate_pair(&shifted, &w1, &w2, &cfg).unwrap();
        assert!((a.r1 - b.r1).abs() < 1e-12 && (a.r2 - b.r2).abs() < 1e-12);
    }

    #[test]
    fn collective_reward_examples() {
        assert_eq!(collective_reward(&RatePair::new(2.0, 4.0), 0.5).unwrap(), 3.0);
        assert_eq!(collective_reward(&RatePair::new(1.25, 4.0), 1.0).unwrap(), 1.25);
        let r = collective_reward(&RatePair::new(3.0, 3.0), 2.0 / 3.0).unwrap();
        assert!((r - 3.0).abs() < 1e-15);
        assert!(collective_reward(&RatePair::new(1.0, 1.0), 1.5).is_err());
        assert!(collective_reward(&RatePair::new(1.0, 1.0), -0.1).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(EnvConfig::new(0, 0.1).is_err());
        assert!(EnvConfig::new(3, 0.0).is_err());
        let cfg = EnvConfig::from_snr_db(3, 10.0).unwrap();
        assert!((cfg.sigma_n2() - 0.1).abs() < 1e-15);
        assert!((cfg.snr() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn channel_lengths_must_agree() {
        assert!(ChannelRealization::new(e(3, 0), e(3, 0), e(2, 0), e(3, 0)).is_err());
    }
}
