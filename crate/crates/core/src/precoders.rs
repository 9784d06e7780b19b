//! Closed-form baseline precoders and the MRT/ZF-parameterized sweep of the
//! achievable rate region.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;

use crate::environment::{rate_from_sinr, rate_pair, ChannelRealization, EnvConfig, RatePair};
use crate::numerics::{inner, normalize, null_project, regularized_solve, ComplexVec};
use crate::{Error, Result};

/// Default number of λ samples per axis of the sweep.
pub const DEFAULT_GRID_SIZE: usize = 101;

/// One unit-norm precoder per base station.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecodingPair {
    pub w1: ComplexVec,
    pub w2: ComplexVec,
}

impl PrecodingPair {
    pub fn new(w1: ComplexVec, w2: ComplexVec) -> Self {
        PrecodingPair { w1, w2 }
    }

    pub fn rates(&self, ch: &ChannelRealization, cfg: &EnvConfig) -> Result<RatePair> {
        rate_pair(ch, &self.w1, &self.w2, cfg)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub lambda1: f64,
    pub lambda2: f64,
    pub pair: PrecodingPair,
    pub rates: RatePair,
}

/// Maximum ratio transmission: `conj(h) / ||h||`.
pub fn mrt(h: &ComplexVec) -> Result<ComplexVec> {
    normalize(&h.conj())
}

/// Zero forcing: MRT restricted to the null space of the cross channel.
pub fn zf(h: &ComplexVec, g: &ComplexVec) -> Result<ComplexVec> {
    normalize(&null_project(h, g)?)
}

/// Maximizer of the signal-to-leakage-and-noise ratio.
///
/// `(σ²I + gᴴg)⁻¹ hᴴh` has rank one, so its principal eigenvector is
/// `(σ²I + gᴴg)⁻¹ hᴴ` up to scale.
pub fn slnr(h: &ComplexVec, g: &ComplexVec, sigma_n2: f64) -> Result<ComplexVec> {
    if h.norm() <= crate::numerics::EPS_NORM {
        return Err(Error::DegenerateVector { norm: h.norm() });
    }
    normalize(&regularized_solve(g, sigma_n2, &h.conj())?)
}

/// `|h w|² / (σ² + |g w|²)` for unit symbol power.
pub fn slnr_value(h: &ComplexVec, g: &ComplexVec, w: &ComplexVec, sigma_n2: f64) -> Result<f64> {
    let signal = inner(h, w)?.norm_sqr();
    let leak = inner(g, w)?.norm_sqr();
    Ok(signal / (sigma_n2 + leak))
}

fn combine(mrt: &ComplexVec, zf: &ComplexVec, lambda: f64) -> Result<ComplexVec> {
    normalize(
        &mrt.scale_real(lambda)
            .add_scaled(Complex64::new(1.0 - lambda, 0.0), zf)?,
    )
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid("lambda must lie in [0, 1]"));
    }
    Ok(())
}

/// `w_i = normalize(λ_i mrt(h_i) + (1 − λ_i) zf(h_i, g_i))`.
pub fn parameterized_pair(
    ch: &ChannelRealization,
    lambda1: f64,
    lambda2: f64,
) -> Result<PrecodingPair> {
    check_lambda(lambda1)?;
    check_lambda(lambda2)?;
    let w1 = combine(&mrt(&ch.h1)?, &zf(&ch.h1, &ch.g1)?, lambda1)?;
    let w2 = combine(&mrt(&ch.h2)?, &zf(&ch.h2, &ch.g2)?, lambda2)?;
    Ok(PrecodingPair::new(w1, w2))
}

/// The named reference precoder pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    MrtMrt,
    ZfZf,
    SlnrSlnr,
    MrtZf,
    ZfMrt,
}

impl Baseline {
    pub const ALL: [Baseline; 5] = [
        Baseline::MrtMrt,
        Baseline::ZfZf,
        Baseline::SlnrSlnr,
        Baseline::MrtZf,
        Baseline::ZfMrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::MrtMrt => "mrt_mrt",
            Baseline::ZfZf => "zf_zf",
            Baseline::SlnrSlnr => "slnr_slnr",
            Baseline::MrtZf => "mrt_zf",
            Baseline::ZfMrt => "zf_mrt",
        }
    }
}

pub fn baseline_pair(
    ch: &ChannelRealization,
    cfg: &EnvConfig,
    which: Baseline,
) -> Result<PrecodingPair> {
    let (w1, w2) = match which {
        Baseline::MrtMrt => (mrt(&ch.h1)?, mrt(&ch.h2)?),
        Baseline::ZfZf => (zf(&ch.h1, &ch.g1)?, zf(&ch.h2, &ch.g2)?),
        Baseline::SlnrSlnr => (
            slnr(&ch.h1, &ch.g1, cfg.sigma_n2())?,
            slnr(&ch.h2, &ch.g2, cfg.sigma_n2())?,
        ),
        Baseline::MrtZf => (mrt(&ch.h1)?, zf(&ch.h2, &ch.g2)?),
        Baseline::ZfMrt => (zf(&ch.h1, &ch.g1)?, mrt(&ch.h2)?),
    };
    Ok(PrecodingPair::new(w1, w2))
}

/// Evaluates every `(λ1, λ2)` of a uniform `grid_size × grid_size` grid on
/// `[0, 1]²`. Points are ordered by λ1 index, then λ2 index.
pub fn sweep_rate_region(
    ch: &ChannelRealization,
    cfg: &EnvConfig,
    grid_size: usize,
) -> Result<Vec<SweepPoint>> {
    if grid_size < 2 {
        return Err(Error::invalid("grid_size must be at least 2"));
    }
    let lambdas: Vec<f64> = (0..grid_size)
        .map(|i| i as f64 / (grid_size - 1) as f64)
        .collect();

    // Per-BS precoders and their signal / leakage gains only depend on the
    // own λ, so the grid reduces to a table lookup.
    let side = |h: &ComplexVec, g: &ComplexVec| -> Result<Vec<(ComplexVec, f64, f64)>> {
        let m = mrt(h)?;
        let z = zf(h, g)?;
        lambdas
            .iter()
            .map(|&l| {
                let w = combine(&m, &z, l)?;
                let signal = inner(h, &w)?.norm_sqr();
                let leak = inner(g, &w)?.norm_sqr();
                Ok((w, signal, leak))
            })
            .collect()
    };
    let bs1 = side(&ch.h1, &ch.g1)?;
    let bs2 = side(&ch.h2, &ch.g2)?;

    let sd = cfg.sigma_d2();
    let mut points = Vec::with_capacity(grid_size * grid_size);
    for (i, (w1, s1, l1)) in bs1.iter().enumerate() {
        for (j, (w2, s2, l2)) in bs2.iter().enumerate() {
            let r1 = rate_from_sinr(sd * s1 / (cfg.sigma_n2() + sd * l2));
            let r2 = rate_from_sinr(sd * s2 / (cfg.sigma_n2() + sd * l1));
            points.push(SweepPoint {
                lambda1: lambdas[i],
                lambda2: lambdas[j],
                pair: PrecodingPair::new(w1.clone(), w2.clone()),
                rates: RatePair::new(r1, r2),
            });
        }
    }
    Ok(points)
}

/// `a` dominates `b`: at least as good in both rates, strictly better in one.
pub fn dominates(a: &RatePair, b: &RatePair) -> bool {
    a.r1 >= b.r1 && a.r2 >= b.r2 && (a.r1 > b.r1 || a.r2 > b.r2)
}

/// Indices of the non-dominated points, ordered by ascending `r1`.
pub fn pareto_indices(rates: &[RatePair]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rates.len()).collect();
    order.sort_by(|&a, &b| {
        rates[b]
            .r1
            .partial_cmp(&rates[a].r1)
            .unwrap_or(Ordering::Equal)
            .then(rates[b].r2.partial_cmp(&rates[a].r2).unwrap_or(Ordering::Equal))
            .then(a.cmp(&b))
    });

    // Walk groups of equal r1 from the largest down. A point survives iff
    // its r2 beats everything with larger r1 and ties the best of its group.
    let mut keep = Vec::new();
    let mut best_r2 = f64::NEG_INFINITY;
    let mut start = 0;
    while start < order.len() {
        let r1 = rates[order[start]].r1;
        let mut end = start;
        while end < order.len() && rates[order[end]].r1 == r1 {
            end += 1;
        }
        let group_max = rates[order[start]].r2;
        for &idx in &order[start..end] {
            let r2 = rates[idx].r2;
            if r2 == group_max && r2 > best_r2 {
                keep.push(idx);
            }
        }
        best_r2 = best_r2.max(group_max);
        start = end;
    }
    keep.reverse();
    keep
}

/// The Pareto-optimal subset of `points`, sorted by ascending `r1`.
pub fn pareto_frontier(points: &[SweepPoint]) -> Result<Vec<SweepPoint>> {
    if points.is_empty() {
        return Err(Error::Empty("pareto_frontier needs at least one point"));
    }
    let rates: Vec<RatePair> = points.iter().map(|p| p.rates).collect();
    Ok(pareto_indices(&rates)
        .into_iter()
        .map(|i| points[i].clone())
        .collect())
}

/// The point with the largest `r1 + r2`; ties go to larger `r1`, then
/// larger `λ1`.
pub fn max_sum_rate_point(points: &[SweepPoint]) -> Result<&SweepPoint> {
    let key = |p: &SweepPoint| (p.rates.sum(), p.rates.r1, p.lambda1);
    points
        .iter()
        .max_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.partial_cmp(&kb.0)
                .unwrap_or(Ordering::Equal)
                .then(ka.1.partial_cmp(&kb.1).unwrap_or(Ordering::Equal))
                .then(ka.2.partial_cmp(&kb.2).unwrap_or(Ordering::Equal))
        })
        .ok_or(Error::Empty("max_sum_rate_point needs at least one point"))
}

/// Largest `α r1 + (1 − α) r2` over the sweep.
pub fn max_weighted_objective(points: &[SweepPoint], alpha: f64) -> Result<f64> {
    points
        .iter()
        .map(|p| p.rates.weighted(alpha))
        .reduce(f64::max)
        .ok_or(Error::Empty("max_weighted_objective needs at least one point"))
}
