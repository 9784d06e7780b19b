//! Agent observations built from local channel knowledge.
//!
//! A base station sees its own direct channel `h_i` and cross channel `g_i`.
//! Both are flattened into real features with real/imaginary parts
//! interleaved: `[re h_1, im h_1, ..., re h_n, im h_n, re g_1, im g_1, ...]`.
//!
//! With phase ambiguity elimination (PAE) each vector is first rotated so its
//! leading element is real and non-negative. Every `e^{jφ} c` then maps to
//! the same features, which removes a continuum of equivalent states the
//! actors would otherwise have to learn separately.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::numerics::{hypot, ComplexVec};
use crate::{Error, Result};

/// Rotates `c` by `e^{−j arg(c_1)}`; the first element becomes `|c_1|`.
///
/// `arg(0)` is taken as 0, so a zero leading element leaves `c` unchanged.
pub fn pae_map(c: &ComplexVec) -> ComplexVec {
    let Some(&first) = c.as_slice().first() else {
        return c.clone();
    };
    let mag = hypot(first.re, first.im);
    if mag == 0.0 {
        return c.clone();
    }
    let rot = Complex64::new(first.re / mag, -first.im / mag);
    let mut out: Vec<Complex64> = c.iter().map(|&x| x * rot).collect();
    out[0] = Complex64::new(mag, 0.0);
    ComplexVec::new(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentObservation {
    values: Vec<f64>,
    pae_applied: bool,
}

impl AgentObservation {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pae_applied(&self) -> bool {
        self.pae_applied
    }

    pub fn n_t(&self) -> usize {
        self.values.len() / 4
    }

    /// Splits the features back into `(h, g)`.
    pub fn unflatten(&self) -> (ComplexVec, ComplexVec) {
        let half = self.values.len() / 2;
        let pairs = |reals: &[f64]| {
            ComplexVec::new(
                reals
                    .chunks_exact(2)
                    .map(|p| Complex64::new(p[0], p[1]))
                    .collect(),
            )
        };
        (pairs(&self.values[..half]), pairs(&self.values[half..]))
    }
}

/// Appends the observation features of `(h, g)` to `out`.
pub fn write_observation(
    h: &ComplexVec,
    g: &ComplexVec,
    use_pae: bool,
    out: &mut Vec<f64>,
) -> Result<()> {
    if h.len() != g.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            actual: g.len(),
        });
    }
    if use_pae {
        pae_map(h).extend_interleaved(out);
        pae_map(g).extend_interleaved(out);
    } else {
        h.extend_interleaved(out);
        g.extend_interleaved(out);
    }
    Ok(())
}

pub fn build_observation(h: &ComplexVec, g: &ComplexVec, use_pae: bool) -> Result<AgentObservation> {
    let mut values = Vec::with_capacity(4 * h.len());
    write_observation(h, g, use_pae, &mut values)?;
    Ok(AgentObservation {
        values,
        pae_applied: use_pae,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sample_cn01, unit_phasor, RngStream};

    fn cv(pairs: &[(f64, f64)]) -> ComplexVec {
        ComplexVec::from_pairs(pairs)
    }

    #[test]
    fn pae_examples() {
        let out = pae_map(&cv(&[(0.0, 1.0), (1.0, 0.0)]));
        assert!((out[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((out[1] - Complex64::new(0.0, -1.0)).norm() < 1e-15);

        let c = cv(&[(1.0, 0.0), (0.3, -0.2), (-1.0, 2.0)]);
        assert_eq!(pae_map(&c), c);

        let z = cv(&[(0.0, 0.0), (0.3, -0.2)]);
        assert_eq!(pae_map(&z), z);
    }

    #[test]
    fn pae_is_phase_invariant_and_idempotent() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            let c = sample_cn01(&mut rng, 3);
            let phi = rng.uniform_range(-core::f64::consts::PI, core::f64::consts::PI);
            let a = pae_map(&c);
            let b = pae_map(&c.scale(unit_phasor(phi)));
            for k in 0..3 {
                assert!((a[k] - b[k]).norm() < 1e-12);
                assert!((a[k].norm() - c[k].norm()).abs() < 1e-12);
            }
            assert_eq!(pae_map(&a), a);
        }
    }

    #[test]
    fn observation_examples() {
        let obs = build_observation(&cv(&[(1.0, 0.0)]), &cv(&[(0.0, 1.0)]), true).unwrap();
        assert_eq!(obs.values(), &[1.0, 0.0, 1.0, 0.0]);
        assert!(obs.pae_applied());

        let obs = build_observation(&cv(&[(0.0, 1.0)]), &cv(&[(1.0, 0.0)]), false).unwrap();
        assert_eq!(obs.values(), &[0.0, 1.0, 1.0, 0.0]);

        let mut rng = RngStream::new(2, 0);
        let h = sample_cn01(&mut rng, 3);
        let g = sample_cn01(&mut rng, 3);
        let obs = build_observation(&h, &g, false).unwrap();
        assert_eq!(obs.values().len(), 12);
        assert_eq!(obs.unflatten(), (h.clone(), g.clone()));

        let obs = build_observation(&h, &g, true).unwrap();
        assert_eq!(obs.values()[1], 0.0);
        assert_eq!(obs.values()[7], 0.0);
        assert!(obs.values()[0] >= 0.0 && obs.values()[6] >= 0.0);

        assert!(build_observation(&h, &ComplexVec::zeros(2), true).is_err());
    }
}
