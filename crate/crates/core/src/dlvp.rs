//! De la Vallée-Poussin kernels and means, continuous `L¹` norms of
//! trigonometric polynomials, and ratio checkers for the classical
//! inequalities relating them.
//!
//! None of the inequalities checked here comes with an explicit constant, so
//! the checkers return the measured quantities and leave the comparison to the
//! caller.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::spectral::{wiener_norm, wiener_norm_poly, TrigPoly};
use crate::zp::{interval_members, min_abs_rep, PrimeContext, ZpSet};
use crate::{Error, Result};

/// Target relative change between successive quadrature refinements.
pub const QUADRATURE_RTOL: f64 = 1e-8;
/// Hard cap on midpoint samples.
pub const QUADRATURE_MAX_SAMPLES: usize = 1 << 26;
const QUADRATURE_MIN_SAMPLES: usize = 1024;
const SAMPLES_PER_FREQUENCY: usize = 64;
const CHUNK: usize = 1 << 12;

/// Exact de la Vallée-Poussin weight of frequency `x` for order `n`:
/// `1` on `|x| ≤ n`, `(2n − |x| + 1)/(n + 1)` on `n < |x| ≤ 2n`, `0` beyond.
pub fn vdp_weight(n: u64, x: i64) -> Ratio<u64> {
    let ax = x.unsigned_abs();
    if ax <= n {
        Ratio::from_integer(1)
    } else if ax <= 2 * n {
        Ratio::new(2 * n - ax + 1, n + 1)
    } else {
        Ratio::from_integer(0)
    }
}

fn weight_f64(n: u64, x: i64) -> f64 {
    let w = vdp_weight(n, x);
    *w.numer() as f64 / *w.denom() as f64
}

fn check_order(n: u64, ctx: &PrimeContext) -> Result<()> {
    if n == 0 || 4 * n > ctx.p() {
        return Err(Error::invalid(format!("order n = {n} must satisfy 1 <= n <= p/4 (p = {})", ctx.p())));
    }
    Ok(())
}

/// `V_n(γ) = Σ_x w_n(x) e_p(xγ)` as a coefficient vector.
pub fn vdp_polynomial(n: u64, ctx: &PrimeContext) -> Result<TrigPoly> {
    check_order(n, ctx)?;
    let coeffs = (0..ctx.p()).map(|r| Complex64::new(weight_f64(n, min_abs_rep(r, ctx).value()), 0.0)).collect();
    TrigPoly::new(*ctx, coeffs)
}

/// `F * G`, the coefficientwise product. On the value side this is
/// `(1/p) Σ_{ξ₁+ξ₂=γ} F(ξ₁) G(ξ₂)`.
pub fn spectral_convolution(f: &TrigPoly, g: &TrigPoly) -> Result<TrigPoly> {
    f.context().check_same(g.context())?;
    let coeffs = f.coeffs().iter().zip(g.coeffs()).map(|(a, b)| a * b).collect();
    TrigPoly::new(*f.context(), coeffs)
}

/// The de la Vallée-Poussin mean `F * V_n`.
pub fn vdp_mean(f: &TrigPoly, n: u64) -> Result<TrigPoly> {
    let ctx = *f.context();
    check_order(n, &ctx)?;
    let coeffs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(r, &c)| {
            let w = vdp_weight(n, min_abs_rep(r as u64, &ctx).value());
            if *w.numer() == *w.denom() {
                c
            } else {
                c * (*w.numer() as f64 / *w.denom() as f64)
            }
        })
        .collect();
    TrigPoly::new(ctx, coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousL1Result {
    pub value: f64,
    pub samples_used: usize,
    /// Relative change at the last refinement.
    pub convergence_gap: f64,
    pub converged: bool,
}

/// `∫₀¹ |Σ_j c_j e(b_j u)| du` by the composite midpoint rule, doubling the
/// sample count until successive estimates agree to [`QUADRATURE_RTOL`].
pub fn continuous_l1(freqs: &[f64], coeffs: &[Complex64]) -> Result<ContinuousL1Result> {
    if freqs.len() != coeffs.len() {
        return Err(Error::LengthMismatch { expected: freqs.len(), got: coeffs.len() });
    }
    if let Some(i) = freqs.iter().position(|b| !b.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if let Some(i) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut sorted = freqs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("frequencies must be distinct"));
    }
    let terms: Vec<(f64, Complex64)> =
        freqs.iter().copied().zip(coeffs.iter().copied()).filter(|(_, c)| c.norm() > 0.0).collect();
    if terms.is_empty() {
        return Ok(ContinuousL1Result { value: 0.0, samples_used: 0, convergence_gap: 0.0, converged: true });
    }
    let max_freq = terms.iter().map(|(b, _)| b.abs()).fold(0.0, f64::max);
    let start = ((SAMPLES_PER_FREQUENCY as f64) * (max_freq + 1.0)).ceil() as usize;
    let mut n = start.max(QUADRATURE_MIN_SAMPLES).min(QUADRATURE_MAX_SAMPLES);
    let mut prev = midpoint(&terms, n);
    let mut gap = f64::INFINITY;
    while n < QUADRATURE_MAX_SAMPLES {
        n *= 2;
        let cur = midpoint(&terms, n);
        gap = if cur == 0.0 { (cur - prev).abs() } else { ((cur - prev) / cur).abs() };
        prev = cur;
        if gap < QUADRATURE_RTOL {
            return Ok(ContinuousL1Result { value: cur, samples_used: n, convergence_gap: gap, converged: true });
        }
    }
    Ok(ContinuousL1Result { value: prev, samples_used: n, convergence_gap: gap, converged: false })
}

/// Integer-frequency convenience wrapper around [`continuous_l1`].
pub fn continuous_l1_int(freqs: &[i64], coeffs: &[Complex64]) -> Result<ContinuousL1Result> {
    let f: Vec<f64> = freqs.iter().map(|&b| b as f64).collect();
    continuous_l1(&f, coeffs)
}

fn midpoint(terms: &[(f64, Complex64)], n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut acc = 0.0;
            for j in ci * CHUNK..((ci + 1) * CHUNK).min(n) {
                let u = (j as f64 + 0.5) * h;
                let mut s = Complex64::new(0.0, 0.0);
                for &(b, c) in terms {
                    // Reduce the phase before scaling to keep it accurate for large b·u.
                    let phase = (b * u).fract();
                    s += c * Complex64::from_polar(1.0, TAU * phase);
                }
                acc += s.norm();
            }
            acc
        })
        .collect();
    partial.iter().sum::<f64>() * h
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiscContRatio {
    /// `(1/p) Σ_γ |F(γ)|`.
    pub discrete: f64,
    /// `∫₀¹ |Σ_x c_x e(xu)| du` over signed representatives `x`.
    pub continuous: f64,
    pub ratio: f64,
    pub quadrature: ContinuousL1Result,
}

/// Discrete versus continuous `L¹` norm of a polynomial supported on `|x| ≤ p/3`.
pub fn disc_cont_ratio(f: &TrigPoly) -> Result<DiscContRatio> {
    let ctx = *f.context();
    let mut freqs = Vec::new();
    let mut coeffs = Vec::new();
    for (r, &c) in f.coeffs().iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let x = min_abs_rep(r as u64, &ctx).value();
        if 3 * x.unsigned_abs() > ctx.p() {
            return Err(Error::invalid(format!("coefficient at x = {x} lies outside |x| <= p/3")));
        }
        freqs.push(x);
        coeffs.push(c);
    }
    if coeffs.is_empty() {
        return Err(Error::invalid("zero polynomial has no ratio"));
    }
    let discrete = wiener_norm_poly(f) / ctx.p() as f64;
    let quadrature = continuous_l1_int(&freqs, &coeffs)?;
    Ok(DiscContRatio { discrete, continuous: quadrature.value, ratio: discrete / quadrature.value, quadrature })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HardyRatio {
    pub integral: f64,
    /// `Σ_j |c_j| / j`.
    pub harmonic_sum: f64,
    pub ratio: f64,
    pub quadrature: ContinuousL1Result,
}

/// `∫₀¹ |Σ_j c_j e(b_j u)| du` against `Σ_j |c_j|/j` for strictly increasing real `b`.
pub fn hardy_ratio(b: &[f64], c: &[Complex64]) -> Result<HardyRatio> {
    if b.is_empty() {
        return Err(Error::invalid("need at least one frequency"));
    }
    if b.len() != c.len() {
        return Err(Error::LengthMismatch { expected: b.len(), got: c.len() });
    }
    if b.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("frequencies must be strictly increasing"));
    }
    let harmonic_sum: f64 = c.iter().enumerate().map(|(j, cj)| cj.norm() / (j + 1) as f64).sum();
    if harmonic_sum == 0.0 {
        return Err(Error::invalid("all coefficients are zero"));
    }
    let quadrature = continuous_l1(b, c)?;
    Ok(HardyRatio { integral: quadrature.value, harmonic_sum, ratio: quadrature.value / harmonic_sum, quadrature })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShellConcentration {
    pub n: u64,
    pub eta: f64,
    /// `|B ∩ [-n, n]|`.
    pub inner_count: usize,
    /// `|B ∩ [-2n, 2n]|`.
    pub outer_count: usize,
    pub applicable: bool,
    /// `min(ln(1/η), ln |B ∩ [-2n, 2n]|)`, absent when the outer window is empty.
    pub bound: Option<f64>,
    pub measured_norm: f64,
    pub err_bound: f64,
}

/// Checks whether `B` is concentrated on `[-n, n]` inside `[-2n, 2n]` and
/// pairs the resulting lower-bound shape with the measured Wiener norm.
pub fn shell_concentration_check(b: &ZpSet, n: u64, eta: f64) -> Result<ShellConcentration> {
    let ctx = *b.context();
    if n == 0 || 6 * n > ctx.p() {
        return Err(Error::invalid(format!("n = {n} must satisfy 1 <= n <= p/6 (p = {})", ctx.p())));
    }
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::invalid(format!("eta = {eta} must lie in (0, 1/2)")));
    }
    let inner_count = interval_members(b, n)?.len();
    let outer_count = interval_members(b, 2 * n)?.len();
    let applicable = outer_count >= 2 && inner_count as f64 >= (1.0 - eta) * outer_count as f64;
    let bound = (outer_count > 0).then(|| (1.0 / eta).ln().min((outer_count as f64).ln()));
    let norm = wiener_norm(b);
    Ok(ShellConcentration {
        n,
        eta,
        inner_count,
        outer_count,
        applicable,
        bound,
        measured_norm: norm.norm,
        err_bound: norm.err_bound,
    })
}
