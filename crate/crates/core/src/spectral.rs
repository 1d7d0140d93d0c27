//! Fourier analysis on `Z_p`.
//!
//! Normalisation: `f̂(γ) = (1/p) Σ_x f(x) e_p(xγ)` with `e_p(u) = exp(2πiu/p)`,
//! inverted by `f(x) = Σ_γ f̂(γ) e_p(-xγ)`. The Wiener norm of `f` is
//! `Σ_γ |f̂(γ)|`.
//!
//! The direct `O(p²)` summation is the reference path. For larger `p` an FFT
//! (mixed radix / Rader via `rustfft`) is used; both are deterministic.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::zp::{PrimeContext, Precision, ZpSet};
use crate::{Error, Result};

/// Largest `p` for which [`TransformMethod::Auto`] uses direct summation.
pub const DIRECT_THRESHOLD: u64 = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransformMethod {
    Direct,
    Fast,
    /// Direct for small `p` or extended precision, FFT otherwise.
    #[default]
    Auto,
}

impl TransformMethod {
    fn resolve(self, ctx: &PrimeContext) -> TransformMethod {
        match self {
            TransformMethod::Auto if ctx.precision() == Precision::Extended || ctx.p() <= DIRECT_THRESHOLD => {
                TransformMethod::Direct
            }
            TransformMethod::Auto => TransformMethod::Fast,
            m => m,
        }
    }
}

/// Value-side view: `f̂(γ)` for every `γ ∈ Z_p` plus a uniform absolute error bound.
#[derive(Debug, Clone)]
pub struct Spectrum {
    ctx: PrimeContext,
    values: Vec<Complex64>,
    err_bound: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumEntry {
    pub gamma: u64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

impl Spectrum {
    /// Wraps externally supplied values; the error bound must be finite and non-negative.
    pub fn new(ctx: PrimeContext, values: Vec<Complex64>, err_bound: f64) -> Result<Self> {
        check_values(&ctx, &values)?;
        if !(err_bound >= 0.0 && err_bound.is_finite()) {
            return Err(Error::invalid(format!("error bound {err_bound} must be finite and >= 0")));
        }
        Ok(Self { ctx, values, err_bound })
    }

    pub fn context(&self) -> &PrimeContext {
        &self.ctx
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Uniform absolute error bound for each value.
    pub fn err_bound(&self) -> f64 {
        self.err_bound
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    pub fn entries(&self) -> Vec<SpectrumEntry> {
        self.values
            .iter()
            .enumerate()
            .map(|(g, v)| SpectrumEntry { gamma: g as u64, re: v.re, im: v.im, abs: v.norm() })
            .collect()
    }
}

/// Coefficient-side view of `F(γ) = Σ_x c_x e_p(xγ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    ctx: PrimeContext,
    coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn new(ctx: PrimeContext, coeffs: Vec<Complex64>) -> Result<Self> {
        check_values(&ctx, &coeffs)?;
        Ok(Self { ctx, coeffs })
    }

    pub fn zero(ctx: PrimeContext) -> Self {
        Self { ctx, coeffs: vec![Complex64::new(0.0, 0.0); ctx.p() as usize] }
    }

    /// Builds a polynomial from `(signed frequency, coefficient)` pairs.
    pub fn from_terms(ctx: PrimeContext, terms: impl IntoIterator<Item = (i64, Complex64)>) -> Result<Self> {
        let mut poly = Self::zero(ctx);
        for (x, c) in terms {
            poly.coeffs[ctx.reduce(x) as usize] += c;
        }
        check_values(&ctx, &poly.coeffs)?;
        Ok(poly)
    }

    pub fn context(&self) -> &PrimeContext {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at residue `x`.
    pub fn coeff(&self, x: u64) -> Complex64 {
        self.coeffs[(x % self.ctx.p()) as usize]
    }

    /// `F(γ)` for every `γ`.
    pub fn evaluate(&self) -> Vec<Complex64> {
        let p = self.ctx.p() as f64;
        forward_values(&self.ctx, &self.coeffs, TransformMethod::Auto).into_iter().map(|v| v * p).collect()
    }
}

/// Result of a Wiener-norm computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub norm: f64,
    pub err_bound: f64,
}

pub fn fourier_transform(ctx: &PrimeContext, f: &[Complex64]) -> Result<Spectrum> {
    fourier_transform_with(ctx, f, TransformMethod::Auto)
}

pub fn fourier_transform_with(ctx: &PrimeContext, f: &[Complex64], method: TransformMethod) -> Result<Spectrum> {
    check_values(ctx, f)?;
    let values = forward_values(ctx, f, method);
    let max_abs = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(Spectrum { ctx: *ctx, values, err_bound: per_value_error(ctx, max_abs) })
}

/// Transform of a real-valued function.
pub fn fourier_transform_real(ctx: &PrimeContext, f: &[f64]) -> Result<Spectrum> {
    let f: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fourier_transform(ctx, &f)
}

/// Spectrum of the indicator `χ_A`.
pub fn indicator_spectrum(a: &ZpSet) -> Spectrum {
    let ctx = *a.context();
    let f: Vec<Complex64> = a.indicator().into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    let values = forward_values(&ctx, &f, TransformMethod::Auto);
    let max_abs = if a.is_empty() { 0.0 } else { 1.0 };
    Spectrum { ctx, values, err_bound: per_value_error(&ctx, max_abs) }
}

pub fn inverse_transform(spectrum: &Spectrum) -> Result<Vec<Complex64>> {
    inverse_transform_with(spectrum, TransformMethod::Auto)
}

pub fn inverse_transform_with(spectrum: &Spectrum, method: TransformMethod) -> Result<Vec<Complex64>> {
    let ctx = spectrum.ctx;
    check_values(&ctx, &spectrum.values)?;
    Ok(match method.resolve(&ctx) {
        TransformMethod::Fast => {
            let mut buf = spectrum.values.clone();
            // rustfft's forward transform uses exp(-2πi·xγ/p), which is e_p(-xγ).
            plan(ctx.p() as usize, false).process(&mut buf);
            buf
        }
        _ => direct_sum(&ctx, &spectrum.values, true),
    })
}

/// `‖χ_A‖_A = Σ_γ |χ̂_A(γ)|`, with `‖χ_∅‖_A = 0`.
pub fn wiener_norm(a: &ZpSet) -> NormReport {
    if a.is_empty() {
        return NormReport { norm: 0.0, err_bound: 0.0 };
    }
    let spec = indicator_spectrum(a);
    NormReport { norm: spec.l1(), err_bound: a.context().p() as f64 * spec.err_bound }
}

/// Wiener norm of an arbitrary function on `Z_p`.
pub fn wiener_norm_fn(ctx: &PrimeContext, f: &[Complex64]) -> Result<NormReport> {
    let spec = fourier_transform(ctx, f)?;
    Ok(NormReport { norm: spec.l1(), err_bound: ctx.p() as f64 * spec.err_bound })
}

/// `Σ_γ |F(γ)|` for `F` given by its coefficients.
pub fn wiener_norm_poly(poly: &TrigPoly) -> f64 {
    poly.evaluate().iter().map(|v| v.norm()).sum()
}

/// `8·p·u·max|f|` for plain `f64`; compensated accumulation removes the factor `p`.
fn per_value_error(ctx: &PrimeContext, max_abs: f64) -> f64 {
    let u = ctx.precision().unit_roundoff();
    match ctx.precision() {
        Precision::Float64 => 8.0 * ctx.p() as f64 * u * max_abs,
        Precision::Extended => 16.0 * u * max_abs,
    }
}

fn check_values(ctx: &PrimeContext, v: &[Complex64]) -> Result<()> {
    let p = ctx.p() as usize;
    if v.len() != p {
        return Err(Error::LengthMismatch { expected: p, got: v.len() });
    }
    if let Some(i) = v.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

fn forward_values(ctx: &PrimeContext, f: &[Complex64], method: TransformMethod) -> Vec<Complex64> {
    let scale = 1.0 / ctx.p() as f64;
    match method.resolve(ctx) {
        TransformMethod::Fast => {
            let mut buf = f.to_vec();
            // rustfft's inverse transform is the unnormalised exp(+2πi·xγ/p) sum.
            plan(ctx.p() as usize, true).process(&mut buf);
            buf.iter_mut().for_each(|v| *v *= scale);
            buf
        }
        _ => direct_sum(ctx, f, false).into_iter().map(|v| v * scale).collect(),
    }
}

/// Table of `e_p(j)` for `0 ≤ j < p`.
fn roots_of_unity(p: usize) -> Vec<Complex64> {
    (0..p).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / p as f64)).collect()
}

/// `out(γ) = Σ_x f(x) e_p(±xγ)`, summed in increasing `x` for every `γ`.
fn direct_sum(ctx: &PrimeContext, f: &[Complex64], negate: bool) -> Vec<Complex64> {
    let p = ctx.p() as usize;
    let roots = roots_of_unity(p);
    let compensated = ctx.precision() == Precision::Extended;
    let one = |gamma: usize| -> Complex64 {
        let step = if negate { (p - gamma) % p } else { gamma };
        let mut idx = 0usize;
        if compensated {
            let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
            for &fx in f {
                let t = fx * roots[idx];
                re.add(t.re);
                im.add(t.im);
                idx += step;
                if idx >= p {
                    idx -= p;
                }
            }
            Complex64::new(re.total(), im.total())
        } else {
            let mut acc = Complex64::new(0.0, 0.0);
            for &fx in f {
                acc += fx * roots[idx];
                idx += step;
                if idx >= p {
                    idx -= p;
                }
            }
            acc
        }
    };
    if p >= 256 {
        (0..p).into_par_iter().map(one).collect()
    } else {
        (0..p).map(one).collect()
    }
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((len, inverse))
            .or_insert_with(|| if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) })
            .clone()
    })
}
