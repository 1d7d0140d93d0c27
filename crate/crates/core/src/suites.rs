//! Randomized invariant suites.
//!
//! Each check draws its instances from a seeded ChaCha stream, so a suite
//! run is reproducible from `(seed, trials, primes)`. Checks report counters
//! and the worst observed slack instead of stopping at the first failure.

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dlvp::{spectral_convolution, vdp_mean, vdp_polynomial};
use crate::energy::{energy_via_wiener_check, sumset_int, t_k_lower_bound_check, Sign};
use crate::scattered::{random_family, verify_nk_uniform, verify_scattered_bound, ScatteredFamily};
use crate::spectral::{fourier_transform, inverse_transform, wiener_norm, wiener_norm_poly, TrigPoly};
use crate::structure::find_dilate;
use crate::zp::{affine_dilate, complement, is_prime, min_abs_rep, PrimeContext, ZpSet};
use crate::{Error, Result};

pub const SUITES: [&str; 6] = ["young", "vdp", "parseval", "scattered", "blichfeldt", "tk-lower"];

/// Relative tolerance for the exact identities.
pub const IDENTITY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed `lhs / rhs` for inequalities, or relative error for identities.
    pub worst: f64,
    pub first_failure: Option<String>,
}

impl CheckSummary {
    fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), trials: 0, failures: 0, worst: 0.0, first_failure: None }
    }

    fn record(&mut self, ok: bool, metric: f64, detail: impl FnOnce() -> String) {
        self.trials += 1;
        if metric.is_finite() && metric > self.worst {
            self.worst = metric;
        }
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(detail());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub primes: Vec<u64>,
    pub checks: Vec<CheckSummary>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Overrides the suite's default primes.
    pub primes: Option<Vec<u64>>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { primes: None, trials: 100, seed: 1 }
    }
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let primes = |default: &[u64]| -> Result<Vec<u64>> {
        let ps = cfg.primes.clone().unwrap_or_else(|| default.to_vec());
        for &p in &ps {
            PrimeContext::new(p)?;
        }
        Ok(ps)
    };
    let t = cfg.trials;
    let (ps, checks) = match name {
        "young" => {
            let ps = primes(&[13, 101, 1009])?;
            let checks = vec![young_inequality(&ps, t, &mut rng)?, dual_convolution(&ps, t.min(20), &mut rng)?];
            (ps, checks)
        }
        "vdp" => {
            let ps = primes(&[13, 101, 1009])?;
            let checks = vec![kernel_norm_exhaustive(&ps)?, mean_bound(&ps, t, &mut rng)?, mean_reproduction(&ps, t, &mut rng)?];
            (ps, checks)
        }
        "parseval" => {
            let ps = primes(&[13, 101, 1009, 10007])?;
            let mut checks = round_trip_and_parseval(&ps, t, &mut rng)?;
            checks.extend(set_identities(&ps, t, &mut rng)?);
            (ps, checks)
        }
        "scattered" => (Vec::new(), scattered_bounds(t, &mut rng)?),
        "blichfeldt" => {
            let ps = cfg.primes.clone().unwrap_or_default();
            (ps.clone(), vec![blichfeldt_dilates(&ps, t, &mut rng)?])
        }
        "tk-lower" => {
            let ps = primes(&[5, 7, 11, 13, 17, 19, 23, 29, 31])?;
            let mut checks = tk_lower(&ps, t, 3, &mut rng)?;
            checks.push(sum_difference(t, &mut rng)?);
            (ps, checks)
        }
        other => return Err(Error::invalid(format!("unknown suite {other:?}; expected one of {}", SUITES.join(", ")))),
    };
    let passed = checks.iter().all(CheckSummary::passed);
    Ok(SuiteReport { suite: name.to_string(), seed: cfg.seed, trials: t, primes: ps, checks, passed })
}

fn random_complex<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn random_poly<R: Rng + ?Sized>(ctx: PrimeContext, rng: &mut R) -> TrigPoly {
    TrigPoly::new(ctx, random_complex(rng, ctx.p() as usize)).expect("length matches")
}

fn random_subset<R: Rng + ?Sized>(ctx: PrimeContext, rng: &mut R, min: usize, max: usize) -> ZpSet {
    let p = ctx.p() as usize;
    let size = rng.random_range(min..=max.min(p));
    ZpSet::from_residues(ctx, rand::seq::index::sample(rng, p, size).into_iter().map(|x| x as u64))
}

/// Fourier round trip and Parseval `Σ|f̂|² = (1/p) Σ|f|²` on random complex functions.
pub fn round_trip_and_parseval<R: Rng + ?Sized>(primes: &[u64], trials: usize, rng: &mut R) -> Result<Vec<CheckSummary>> {
    let mut round = CheckSummary::new("fourier_round_trip");
    let mut pars = CheckSummary::new("parseval");
    for &p in primes {
        let ctx = PrimeContext::new(p)?;
        for _ in 0..trials {
            let f = random_complex(rng, p as usize);
            let spec = fourier_transform(&ctx, &f)?;
            let back = inverse_transform(&spec)?;
            let scale = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let err = f.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
            round.record(err <= IDENTITY_RTOL, err, || format!("p = {p}: round-trip relative error {err:e}"));
            let lhs: f64 = spec.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * p as f64;
            let rhs: f64 = f.iter().map(|z| z.norm_sqr()).sum();
            let rel = (lhs - rhs).abs() / rhs;
            pars.record(rel <= IDENTITY_RTOL, rel, || format!("p = {p}: Parseval relative error {rel:e}"));
        }
    }
    Ok(vec![round, pars])
}

/// Norm at least one, the complement identity and dilation invariance on random sets.
pub fn set_identities<R: Rng + ?Sized>(primes: &[u64], trials: usize, rng: &mut R) -> Result<Vec<CheckSummary>> {
    let mut trivial = CheckSummary::new("trivial_lower_bound");
    let mut compl = CheckSummary::new("complement_identity");
    let mut dil = CheckSummary::new("dilation_invariance");
    for &p in primes {
        let ctx = PrimeContext::new(p)?;
        for _ in 0..trials {
            let a = random_subset(ctx, rng, 1, p as usize - 1);
            let na = wiener_norm(&a);
            let tol = na.err_bound + 1e-12;
            trivial.record(na.norm >= 1.0 - tol, 1.0 / na.norm, || format!("p = {p}, |A| = {}: norm {}", a.len(), na.norm));

            let nc = wiener_norm(&complement(&a));
            let want = na.norm + 1.0 - 2.0 * a.len() as f64 / p as f64;
            let err = (nc.norm - want).abs();
            compl.record(err <= tol + nc.err_bound, err, || format!("p = {p}, |A| = {}: complement off by {err:e}", a.len()));

            let q = rng.random_range(1..p);
            let x0 = rng.random_range(0..p);
            let nd = wiener_norm(&affine_dilate(&a, q, x0)?);
            let err = (nd.norm - na.norm).abs();
            dil.record(err <= tol + nd.err_bound, err, || format!("p = {p}, q = {q}: dilation changed norm by {err:e}"));
        }
    }
    Ok(vec![trivial, compl, dil])
}

/// `Σ|F*G| ≤ (1/p) Σ|F| Σ|G|`.
pub fn young_inequality<R: Rng + ?Sized>(primes: &[u64], trials: usize, rng: &mut R) -> Result<CheckSummary> {
    let mut c = CheckSummary::new("young_inequality");
    for &p in primes {
        let ctx = PrimeContext::new(p)?;
        for _ in 0..trials {
            let (f, g) = (random_poly(ctx, rng), random_poly(ctx, rng));
            let lhs = wiener_norm_poly(&spectral_convolution(&f, &g)?);
            let rhs = wiener_norm_poly(&f) * wiener_norm_poly(&g) / p as f64;
            c.record(lhs <= rhs * (1.0 + IDENTITY_RTOL), lhs / rhs, || format!("p = {p}: {lhs} > {rhs}"));
        }
    }
    Ok(c)
}

/// Coefficientwise product against `(1/p)` times the value-side cyclic convolution.
pub fn dual_convolution<R: Rng + ?Sized>(primes: &[u64], trials: usize, rng: &mut R) -> Result<CheckSummary> {
    let mut c = CheckSummary::new("dual_convolution");
    for &p in primes {
        let ctx = PrimeContext::new(p)?;
        let n = p as usize;
        for _ in 0..trials {
            let (f, g) = (random_poly(ctx, rng), random_poly(ctx, rng));
            let got = spectral_convolution(&f, &g)?.evaluate();
            let (fv, gv) = (f.evaluate(), g.evaluate());
            let scale = got.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
            let mut err: f64 = 0.0;
            for (gamma, value) in got.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for xi in 0..n {
                    acc += fv[xi] * gv[(gamma + n - xi) % n];
                }
                err = err.max((acc / p as f64 - value).norm() / scale);
            }
            c.record(err <= 1e-8, err, || format!("p = {p}: dual convolution relative error {err:e}"));
        }
    }
    Ok(c)
}

/// `Σ_γ |V_n(γ)| ≤ 3p` for every `1 ≤ n ≤ p/4`.
pub fn kernel_norm_exhaustive(primes: &[u64]) -> Result<CheckSummary> {
    let mut c = CheckSummary::new("kernel_norm");
    for &p in primes {
        let ctx = PrimeContext::new(p)?;
        for n in 1..=p / 4 {
            let v = wiener_norm_poly(&vdp_polynomial(n, &ctx)?);
            let rhs = 3.0 * p as f64;
            c.record(v <= rhs * (1.0 + IDENTITY_RTOL), v / rhs, || format!("p = {p}, n = {n}: {v} > 3p"));
        }
    }
    Ok(c)
}

/// `Σ|F * V_n| ≤ 3 Σ|F|`.
pub fn mean_bound<R: Rng + ?Sized>(primes: &[u64], trials: usize, rng: &mut R) -> Result<CheckSummary> {
    let mut c = CheckSummary::new("mean_bound");
    for &p in primes {
        let ctx = PrimeContext::new(p)?;
        if p < 4 {
            continue;
        }
        for _ in 0..trials {
            let f = random_poly(ctx, rng);
            let n = rng.random_range(1..=p / 4);
            let lhs = wiener_norm_poly(&vdp_mean(&f, n)?);
            let rhs = 3.0 * wiener_norm_poly(&f);
            c.record(lhs <= rhs * (1.0 + IDENTITY_RTOL), lhs / rhs, || format!("p = {p}, n = {n}: {lhs} > {rhs}"));
        }
    }
    Ok(c)
}

/// Means leave polynomials supported on `|x| ≤ n` unchanged.
pub fn mean_reproduction<R: Rng + ?Sized>(primes: &[u64], trials: usize, rng: &mut R) -> Result<CheckSummary> {
    let mut c = CheckSummary::new("mean_reproduction");
    for &p in primes {
        let ctx = PrimeContext::new(p)?;
        if p < 4 {
            continue;
        }
        for _ in 0..trials {
            let n = rng.random_range(1..=p / 4);
            let terms: Vec<(i64, Complex64)> =
                (-(n as i64)..=n as i64).map(|x| (x, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))).collect();
            let f = TrigPoly::from_terms(ctx, terms)?;
            let g = vdp_mean(&f, n)?;
            let same = f.coeffs() == g.coeffs();
            c.record(same, if same { 0.0 } else { 1.0 }, || format!("p = {p}, n = {n}: mean changed a low coefficient"));
        }
    }
    Ok(c)
}

/// Both scattered-family bounds on random families with `I ≤ 6`, `M ≤ 4`,
/// `m ≤ 4`, `k ≤ 3`, plus the fixed family `({3}, {9})`.
pub fn scattered_bounds<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> Result<Vec<CheckSummary>> {
    let mut energy = CheckSummary::new("scattered_energy_bound");
    let mut uniform = CheckSummary::new("scattered_nk_bound");
    let mut fixed = CheckSummary::new("scattered_fixed_family");
    for _ in 0..trials {
        let f = random_family(rng, 6, 4, 4, 6);
        let k = rng.random_range(1..=3);
        let e = verify_scattered_bound(&f, k)?;
        energy.record(e.holds, 1.0 / e.slack_ratio, || format!("k = {k}, family {f:?}: T_k = {} > {}", e.t_k_exact, e.bound));
        let u = verify_nk_uniform(&f, k)?;
        let r = crate::util::big_to_f64(&u.max_nk) / crate::util::big_to_f64(&u.bound);
        uniform.record(u.holds, r, || format!("k = {k}, family {f:?}: max N_k = {} > {}", u.max_nk, u.bound));
    }
    let f = ScatteredFamily::new(1, vec![1, 2], vec![vec![3], vec![9]]);
    let t = verify_scattered_bound(&f, 2)?.t_k_exact;
    let ok = t == BigUint::from(6u32);
    fixed.record(ok, 0.0, || format!("T_2({{3, 9}}) = {t}, expected 6"));
    Ok(vec![energy, uniform, fixed])
}

/// Smallest `q ≥ 1` by intersecting the residue classes `q ≡ r x_i^{-1}`, `|r| ≤ t_i`.
pub fn dilate_oracle(ctx: &PrimeContext, generators: &[u64], targets: &[u64]) -> Option<u64> {
    let p = ctx.p() as usize;
    let mut allowed = vec![true; p];
    allowed[0] = false;
    for (&g, &t) in generators.iter().zip(targets) {
        let inv = ctx.inverse(g % ctx.p())?;
        let mut row = vec![false; p];
        for r in -(t as i64)..=(t as i64) {
            row[ctx.mul(ctx.reduce(r), inv) as usize] = true;
        }
        for (a, b) in allowed.iter_mut().zip(row) {
            *a &= b;
        }
    }
    allowed.iter().position(|&b| b).map(|q| q as u64)
}

/// Dilate search on instances with `Π α_i ≥ 1/p`, `α_i < 1/2`, `d ≤ 3`, `p ≤ 1009`.
/// Minkowski's theorem guarantees a witness for every such instance.
pub fn blichfeldt_dilates<R: Rng + ?Sized>(primes: &[u64], trials: usize, rng: &mut R) -> Result<CheckSummary> {
    let pool: Vec<u64> = if primes.is_empty() { (11..=1009).filter(|&p| is_prime(p)).collect() } else { primes.to_vec() };
    let mut c = CheckSummary::new("dilate_search");
    for _ in 0..trials {
        let p = pool[rng.random_range(0..pool.len())];
        let ctx = PrimeContext::new(p)?;
        let half = ctx.half();
        // Largest d for which Π α_i ≥ 1/p is reachable with every α_i < 1/2.
        let alpha_max = (half.max(2) as f64 - 0.5) / p as f64;
        let d_max = (1..=3usize).rev().find(|&d| alpha_max.powi(d as i32) >= 1.0 / p as f64).unwrap_or(1);
        let d = rng.random_range(1..=d_max);
        // Targets log-uniform in [1, (p-1)/2), redrawn until Π α_i ≥ 1/p with α_i = (t_i + 1/2)/p.
        let (targets, alphas) = loop {
            let t: Vec<u64> = (0..d).map(|_| ((half as f64).powf(rng.random::<f64>()).floor() as u64).clamp(1, half.max(2) - 1)).collect();
            let a: Vec<f64> = t.iter().map(|&ti| (ti as f64 + 0.5) / p as f64).collect();
            if a.iter().product::<f64>() >= 1.0 / p as f64 {
                break (t, a);
            }
        };
        let gens: Vec<u64> = (0..d).map(|_| rng.random_range(1..p)).collect();
        let floors: Vec<u64> = alphas.iter().map(|a| (p as f64 * a).floor() as u64).collect();
        debug_assert_eq!(floors, targets);
        let got = find_dilate(&ctx, &gens, &floors)?;
        let oracle = dilate_oracle(&ctx, &gens, &floors);
        let within = got.as_ref().is_some_and(|w| {
            gens.iter().zip(&floors).all(|(&g, &t)| min_abs_rep(ctx.mul(w.q, g), &ctx).magnitude() <= t)
        });
        let ok = within && got.as_ref().map(|w| w.q) == oracle;
        c.record(ok, 0.0, || format!("p = {p}, gens {gens:?}, targets {floors:?}: got {:?}, oracle {oracle:?}", got.map(|w| w.q)));
    }
    Ok(c)
}

/// `T_k(Q) ≥ |Q|^{2k} / (|A| K^{2k-2})` for `Q ⊆ A`, and `T_2(A) ≥ |A|³ / K²`.
pub fn tk_lower<R: Rng + ?Sized>(primes: &[u64], trials: usize, max_k: u32, rng: &mut R) -> Result<Vec<CheckSummary>> {
    let mut lower = CheckSummary::new("energy_lower_from_norm");
    let mut via = CheckSummary::new("energy_via_wiener");
    for _ in 0..trials {
        let p = primes[rng.random_range(0..primes.len())];
        let ctx = PrimeContext::new(p)?;
        let a = random_subset(ctx, rng, 1, p as usize);
        let members = a.to_vec();
        let q_size = rng.random_range(1..=members.len());
        let q = ZpSet::from_residues(ctx, rand::seq::index::sample(rng, members.len(), q_size).into_iter().map(|i| members[i]));
        let k = rng.random_range(1..=max_k);
        let r = t_k_lower_bound_check(&a, &q, k)?;
        let lhs = crate::util::big_to_f64(&r.lhs);
        lower.record(r.holds, r.rhs / lhs, || format!("p = {p}, A = {members:?}, Q = {:?}, k = {k}: {} < {}", q.to_vec(), r.lhs, r.rhs));
        let w = energy_via_wiener_check(&a)?;
        let lhs = crate::util::big_to_f64(&w.lhs);
        via.record(w.holds, w.rhs / lhs, || format!("p = {p}, A = {members:?}: {} < {}", w.lhs, w.rhs));
    }
    Ok(vec![lower, via])
}

/// `|A| |A+A| ≤ |A−A|²` on random integer sets.
pub fn sum_difference<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> Result<CheckSummary> {
    let mut c = CheckSummary::new("sum_difference");
    for _ in 0..trials {
        let size = rng.random_range(1..=24usize);
        let span = rng.random_range(size as i64..=200);
        let a: Vec<i64> = rand::seq::index::sample(rng, span as usize + 1, size).into_iter().map(|x| x as i64 - span / 2).collect();
        let (_, plus) = sumset_int(&a, &a, Sign::Plus)?;
        let lhs = a.len() as u128 * plus.sum_size as u128;
        let rhs = (plus.diff_size as u128).pow(2);
        c.record(lhs <= rhs, lhs as f64 / rhs as f64, || format!("A = {a:?}: {lhs} > {rhs}"));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SuiteConfig {
        SuiteConfig { primes: None, trials: 5, seed }
    }

    #[test]
    fn every_suite_passes_briefly() {
        for name in SUITES {
            let cfg = if name == "vdp" || name == "young" { SuiteConfig { primes: Some(vec![13, 101]), ..small(3) } } else { small(3) };
            let r = run_suite(name, &cfg).unwrap();
            assert!(r.passed, "{name}: {:?}", r.checks);
            assert!(r.checks.iter().all(|c| c.trials > 0), "{name}");
        }
    }

    #[test]
    fn unknown_suite_rejected() {
        assert!(run_suite("nope", &small(1)).is_err());
    }

    #[test]
    fn suites_are_reproducible() {
        let a = serde_json::to_string(&run_suite("tk-lower", &small(9)).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite("tk-lower", &small(9)).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oracle_agrees_on_hand_case() {
        let k = PrimeContext::new(11).unwrap();
        assert_eq!(dilate_oracle(&k, &[3], &[1]), Some(4));
    }

    #[test]
    fn dilate_instances_exist_for_smallest_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = blichfeldt_dilates(&[11, 13], 100, &mut rng).unwrap();
        assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn failures_are_counted() {
        let mut c = CheckSummary::new("x");
        c.record(true, 0.5, String::new);
        c.record(false, 2.0, || "bad".into());
        c.record(false, 1.0, || "worse".into());
        assert_eq!((c.trials, c.failures, c.worst), (3, 2, 2.0));
        assert_eq!(c.first_failure.as_deref(), Some("bad"));
    }
}
