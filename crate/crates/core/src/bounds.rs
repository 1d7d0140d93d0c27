//! Leading-order lower bounds for `‖χ_A‖_A` and searches for sets that come
//! close to them.
//!
//! Every bound is evaluated with its implicit constant set to 1 and any
//! `o(1)` exponent set to 0, so values are for ratio reports only.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::spectral::wiener_norm;
use crate::zp::{is_prime, PrimeContext, ZpSet};
use crate::{Error, Result};

pub const EXHAUSTIVE_CAP: u64 = 10_000_000;
pub const MIN_BOUND_PRIME: u64 = 11;
pub const ANNEAL_T0: f64 = 0.5;
pub const ANNEAL_COOLING: f64 = 0.995;
/// Norms closer than this are treated as equal when merging candidates.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Large-density bound, `η ≥ (ln p)^{-1/4} (lnln p)^{1/2}`.
    CharLarge,
    /// Small-density bound, `η < (ln p)^{-1/4} (lnln p)^{1/2}`.
    CharSmallDensity,
    /// `ln |A|` for `2 ≤ |A| ≤ exp((ln p / lnln p)^{1/3})`.
    Charsmall,
    /// `(ln(p/|A|))^{1/3} / lnln(p/|A|)` for medium-size sets.
    Mediumsize,
    /// The bound `1`.
    Trivial,
    /// Conjectured `ln |A|` for `2 ≤ |A| < p/2`.
    Conjecture,
}

impl Theorem {
    pub const ALL: [Theorem; 6] =
        [Theorem::CharLarge, Theorem::CharSmallDensity, Theorem::Charsmall, Theorem::Mediumsize, Theorem::Trivial, Theorem::Conjecture];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::CharLarge => "char_large",
            Theorem::CharSmallDensity => "char_small_density",
            Theorem::Charsmall => "charsmall",
            Theorem::Mediumsize => "mediumsize",
            Theorem::Trivial => "trivial",
            Theorem::Conjecture => "conjecture",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Parse { what: "theorem", detail: format!("unknown theorem {s:?}") })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundEvaluation {
    pub theorem: Theorem,
    pub p: u64,
    pub n: u64,
    /// `|A| / p`.
    pub density_eta: f64,
    /// `None` where the displayed formula is undefined or nonpositive.
    pub value: Option<f64>,
    pub regime_ok: bool,
    pub form: &'static str,
}

/// `L^{1/3} / ln L`, the medium-size shape at `L = ln(p/|A|)`.
pub fn mediumsize_shape(l: f64) -> Option<f64> {
    (l > 1.0).then(|| l.cbrt() / l.ln())
}

/// `exp((ln p / lnln p)^{1/3})`.
pub fn small_set_threshold(p: u64) -> f64 {
    let lp = (p as f64).ln();
    (lp / lp.ln()).cbrt().exp()
}

/// `(ln p)^{-1/4} (lnln p)^{1/2}`.
pub fn density_threshold(p: u64) -> f64 {
    let lp = (p as f64).ln();
    lp.powf(-0.25) * lp.ln().sqrt()
}

pub fn eval_bound(theorem: Theorem, p: u64, n: u64) -> Result<BoundEvaluation> {
    if p < MIN_BOUND_PRIME {
        return Err(Error::invalid(format!("bound evaluation needs p >= {MIN_BOUND_PRIME}, got {p}")));
    }
    if !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    if n == 0 || n >= p {
        return Err(Error::invalid(format!("set size {n} must satisfy 1 <= n < p = {p}")));
    }
    let lp = (p as f64).ln();
    let llp = lp.ln();
    let eta = n as f64 / p as f64;
    let nf = n as f64;
    let positive = |v: f64| (v.is_finite() && v > 0.0).then_some(v);
    let (value, regime_ok) = match theorem {
        Theorem::Trivial => (Some(1.0), true),
        Theorem::Conjecture => (positive(nf.ln()), n >= 2 && 2 * n < p),
        Theorem::Charsmall => (positive(nf.ln()), n >= 2 && nf <= small_set_threshold(p)),
        Theorem::Mediumsize => {
            (mediumsize_shape((p as f64 / nf).ln()), nf >= small_set_threshold(p) && 3 * n <= p)
        }
        Theorem::CharLarge => {
            let inner = 1.0 + (eta * eta * lp.sqrt() / llp).ln();
            let v = (inner > 0.0).then(|| lp.sqrt() / llp * eta.powf(1.5) / inner.sqrt());
            (v.and_then(positive), eta >= density_threshold(p) && 2 * n < p)
        }
        Theorem::CharSmallDensity => (positive(eta.sqrt() * lp.powf(0.25) / llp.sqrt()), eta < density_threshold(p) && 2 * n < p),
    };
    Ok(BoundEvaluation { theorem, p, n, density_eta: eta, value, regime_ok, form: "leading-order" })
}

#[derive(Debug, Clone, Serialize)]
pub struct ApNormRow {
    pub n: u64,
    pub norm: f64,
    pub err_bound: f64,
    /// `norm / ln n`; absent for `n = 1`.
    pub ratio: Option<f64>,
    /// `2 ≤ n < p/2`.
    pub in_natural_range: bool,
}

/// Wiener norms of the intervals `{0, …, n−1}`.
pub fn ap_norm_profile(p: u64, lengths: &[u64]) -> Result<Vec<ApNormRow>> {
    let ctx = PrimeContext::new(p)?;
    lengths
        .iter()
        .map(|&n| {
            if n == 0 || n >= p {
                return Err(Error::invalid(format!("length {n} must satisfy 1 <= n < p = {p}")));
            }
            let r = wiener_norm(&ZpSet::from_residues(ctx, 0..n));
            Ok(ApNormRow {
                n,
                norm: r.norm,
                err_bound: r.err_bound,
                ratio: (n >= 2).then(|| r.norm / (n as f64).ln()),
                in_natural_range: n >= 2 && 2 * n < p,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    LocalSearch,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::LocalSearch => "local_search",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub strategy: Strategy,
    pub seed: u64,
    /// Maximum number of candidate norm evaluations.
    pub budget: u64,
    /// Exhaustive search only over sets containing `{0, 1}`.
    pub orbit_reduction: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundComparison {
    pub theorem: Theorem,
    pub value: Option<f64>,
    pub regime_ok: bool,
    /// `best_norm / value`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalResult {
    pub p: u64,
    pub n: u64,
    pub strategy: Strategy,
    pub seed: Option<u64>,
    pub orbit_reduction: bool,
    pub best_set: Vec<u64>,
    pub best_norm: f64,
    pub err_bound: f64,
    pub evaluations: u64,
    pub budget_exhausted: bool,
    pub bound_comparisons: Vec<BoundComparison>,
}

impl ExtremalResult {
    pub const CSV_HEADER: [&'static str; 13] = [
        "p",
        "n",
        "strategy",
        "best_norm",
        "err_bound",
        "bound_mediumsize",
        "bound_charsmall",
        "ratio_mediumsize",
        "ratio_charsmall",
        "evaluations",
        "budget_exhausted",
        "seed",
        "best_set",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let cmp = |t: Theorem| self.bound_comparisons.iter().find(|c| c.theorem == t);
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        let medium = cmp(Theorem::Mediumsize);
        let small = cmp(Theorem::Charsmall);
        vec![
            self.p.to_string(),
            self.n.to_string(),
            self.strategy.name().to_string(),
            self.best_norm.to_string(),
            self.err_bound.to_string(),
            opt(medium.and_then(|c| c.value)),
            opt(small.and_then(|c| c.value)),
            opt(medium.and_then(|c| c.ratio)),
            opt(small.and_then(|c| c.ratio)),
            self.evaluations.to_string(),
            self.budget_exhausted.to_string(),
            self.seed.map_or_else(String::new, |s| s.to_string()),
            self.best_set.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
        ]
    }
}

/// `C(n, k)` saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Cheap `‖χ_A‖_A` for small `p` with a shared root table.
struct NormKernel {
    p: usize,
    roots: Vec<(f64, f64)>,
}

impl NormKernel {
    fn new(p: u64) -> Self {
        let roots = (0..p).map(|j| {
            let t = 2.0 * PI * j as f64 / p as f64;
            (t.cos(), t.sin())
        });
        Self { p: p as usize, roots: roots.collect() }
    }

    fn norm(&self, set: &[u64]) -> f64 {
        let p = self.p;
        let mut total = 0.0;
        for g in 0..p {
            let (mut re, mut im) = (0.0, 0.0);
            for &a in set {
                let (c, s) = self.roots[(a as usize * g) % p];
                re += c;
                im += s;
            }
            total += re.hypot(im);
        }
        total / p as f64
    }
}

/// `(norm, set)` with smaller norm first, then lexicographically smaller set.
fn better(a: &(f64, Vec<u64>), b: &(f64, Vec<u64>)) -> bool {
    if (a.0 - b.0).abs() <= TIE_TOLERANCE {
        a.1.cmp(&b.1) == Ordering::Less
    } else {
        a.0 < b.0
    }
}

fn merge(best: Option<(f64, Vec<u64>)>, cand: (f64, Vec<u64>)) -> Option<(f64, Vec<u64>)> {
    match best {
        Some(b) if !better(&cand, &b) => Some(b),
        _ => Some(cand),
    }
}

/// Advances `c` (strictly increasing, entries `< limit`) to the next combination.
fn next_combination(c: &mut [u64], limit: u64) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < limit - (k - i) as u64 {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn extremal_search(p: u64, n: u64, cfg: &SearchConfig) -> Result<ExtremalResult> {
    let ctx = PrimeContext::new(p)?;
    if n == 0 || n >= p {
        return Err(Error::invalid(format!("set size {n} must satisfy 1 <= n < p = {p}")));
    }
    if cfg.budget == 0 {
        return Err(Error::invalid("budget must be positive"));
    }
    let (best, evaluations, exhausted) = match cfg.strategy {
        Strategy::Exhaustive => exhaustive(p, n, cfg)?,
        Strategy::LocalSearch => local_search(p, n, cfg),
    };
    let best_set = best.1;
    let report = wiener_norm(&ZpSet::from_residues(ctx, best_set.iter().copied()));
    let bound_comparisons = if p >= MIN_BOUND_PRIME {
        Theorem::ALL
            .iter()
            .map(|&t| {
                let e = eval_bound(t, p, n)?;
                Ok(BoundComparison { theorem: t, value: e.value, regime_ok: e.regime_ok, ratio: e.value.map(|v| report.norm / v) })
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(ExtremalResult {
        p,
        n,
        strategy: cfg.strategy,
        seed: (cfg.strategy == Strategy::LocalSearch).then_some(cfg.seed),
        orbit_reduction: cfg.orbit_reduction && cfg.strategy == Strategy::Exhaustive,
        best_set,
        best_norm: report.norm,
        err_bound: report.err_bound,
        evaluations,
        budget_exhausted: exhausted,
        bound_comparisons,
    })
}

const CHUNK: usize = 1 << 14;

fn exhaustive(p: u64, n: u64, cfg: &SearchConfig) -> Result<((f64, Vec<u64>), u64, bool)> {
    if n == 1 {
        return Ok(((1.0, vec![0]), 1, false));
    }
    // Every set with two or more elements has an affine image containing {0, 1}.
    let reduce = cfg.orbit_reduction;
    let (free, pool_start) = if reduce { (n - 2, 2) } else { (n, 0) };
    let total = binomial(p - pool_start, free);
    if total > EXHAUSTIVE_CAP {
        return Err(Error::invalid(format!(
            "exhaustive search over {total} candidates exceeds {EXHAUSTIVE_CAP}; use local_search"
        )));
    }
    let kernel = NormKernel::new(p);
    let fixed: Vec<u64> = if reduce { vec![0, 1] } else { Vec::new() };
    let mut comb: Vec<u64> = (pool_start..pool_start + free).collect();
    let mut best: Option<(f64, Vec<u64>)> = None;
    let mut evaluated = 0u64;
    let mut more = true;
    while more && evaluated < cfg.budget {
        let room = (cfg.budget - evaluated).min(CHUNK as u64) as usize;
        let mut chunk = Vec::with_capacity(room);
        while more && chunk.len() < room {
            let mut set = fixed.clone();
            set.extend_from_slice(&comb);
            chunk.push(set);
            more = free > 0 && next_combination(&mut comb, p);
        }
        evaluated += chunk.len() as u64;
        let local = chunk
            .into_par_iter()
            .map(|s| (kernel.norm(&s), s))
            .fold(|| None, merge)
            .collect::<Vec<_>>();
        for cand in local.into_iter().flatten() {
            best = merge(best, cand);
        }
    }
    Ok((best.expect("at least one candidate"), evaluated, more))
}

fn local_search(p: u64, n: u64, cfg: &SearchConfig) -> ((f64, Vec<u64>), u64, bool) {
    if n == 1 {
        return ((1.0, vec![0]), 1, false);
    }
    let restarts = (cfg.budget / 2_500).clamp(1, 16);
    let per = (cfg.budget / restarts).max(1);
    let kernel = NormKernel::new(p);
    let results: Vec<(f64, Vec<u64>)> =
        (0..restarts).into_par_iter().map(|r| anneal(&kernel, n as usize, cfg.seed, r, per)).collect();
    let best = results.into_iter().fold(None, merge).expect("at least one restart");
    // The search always stops on its budget.
    (best, per * restarts, true)
}

/// One annealing run with single-element swaps and an incrementally updated
/// spectrum.
fn anneal(kernel: &NormKernel, n: usize, seed: u64, stream: u64, budget: u64) -> (f64, Vec<u64>) {
    let p = kernel.p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut member = vec![false; p];
    let mut inside: Vec<usize> = rand::seq::index::sample(&mut rng, p, n).into_vec();
    for &a in &inside {
        member[a] = true;
    }
    let mut outside: Vec<usize> = (0..p).filter(|&x| !member[x]).collect();
    let mut spec = vec![(0.0f64, 0.0f64); p];
    for (g, s) in spec.iter_mut().enumerate() {
        for &a in &inside {
            let (c, sn) = kernel.roots[(a * g) % p];
            s.0 += c;
            s.1 += sn;
        }
    }
    let norm_of = |s: &[(f64, f64)]| s.iter().map(|(re, im)| re.hypot(*im)).sum::<f64>() / p as f64;
    let mut current = norm_of(&spec);
    let sorted = |v: &[usize]| {
        let mut s: Vec<u64> = v.iter().map(|&x| x as u64).collect();
        s.sort_unstable();
        s
    };
    let mut best = (current, sorted(&inside));
    let mut temperature = ANNEAL_T0;
    let sweep = n.max(1) as u64;
    let mut trial = vec![(0.0f64, 0.0f64); p];
    for step in 1..budget {
        let i = rng.random_range(0..inside.len());
        let j = rng.random_range(0..outside.len());
        let (a, b) = (inside[i], outside[j]);
        for g in 0..p {
            let (ca, sa) = kernel.roots[(a * g) % p];
            let (cb, sb) = kernel.roots[(b * g) % p];
            trial[g] = (spec[g].0 - ca + cb, spec[g].1 - sa + sb);
        }
        let candidate = norm_of(&trial);
        let delta = candidate - current;
        if delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp() {
            std::mem::swap(&mut spec, &mut trial);
            current = candidate;
            inside[i] = b;
            outside[j] = a;
            let cand = (current, sorted(&inside));
            if better(&cand, &best) {
                best = cand;
            }
        }
        if step % sweep == 0 {
            temperature *= ANNEAL_COOLING;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::Strategy;
    use crate::zp::affine_dilate;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn bound_examples() {
        for (p, n) in [(11, 1), (101, 50), (1009, 3)] {
            let e = eval_bound(Theorem::Trivial, p, n).unwrap();
            assert_eq!(e.value, Some(1.0));
            assert!(e.regime_ok);
        }
        let e = mediumsize_shape(E.powi(3)).unwrap();
        assert!((e - E / 3.0).abs() < 1e-12);
        assert!((e - 0.906).abs() < 1e-3);
        assert!((eval_bound(Theorem::Charsmall, 101, 2).unwrap().value.unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(eval_bound(Theorem::Trivial, 7, 2).is_err());
        assert!(eval_bound(Theorem::Trivial, 101, 0).is_err());
        assert!(eval_bound(Theorem::Trivial, 101, 101).is_err());
        assert!(eval_bound(Theorem::Trivial, 100, 3).is_err());
    }

    #[test]
    fn regimes() {
        let p = 1_000_003;
        let t = small_set_threshold(p);
        let below = t.floor() as u64;
        assert!(eval_bound(Theorem::Charsmall, p, below).unwrap().regime_ok);
        assert!(!eval_bound(Theorem::Mediumsize, p, below).unwrap().regime_ok);
        assert!(eval_bound(Theorem::Mediumsize, p, below + 1).unwrap().regime_ok);
        assert!(!eval_bound(Theorem::Mediumsize, p, p / 3 + 1).unwrap().regime_ok);
        assert!(!eval_bound(Theorem::Conjecture, p, p / 2 + 1).unwrap().regime_ok);
        // The density threshold stays above 1/2 for every 64-bit p, so only
        // the small-density branch is ever in range.
        assert!(density_threshold(u64::MAX) > 0.5);
        assert!(!eval_bound(Theorem::CharLarge, p, p / 2 - 1).unwrap().regime_ok);
        assert!(eval_bound(Theorem::CharSmallDensity, p, p / 2 - 1).unwrap().regime_ok);
        assert!(!eval_bound(Theorem::CharSmallDensity, p, p / 2 + 1).unwrap().regime_ok);
        // Medium-size formula is undefined once p/|A| < e.
        assert_eq!(eval_bound(Theorem::Mediumsize, 101, 40).unwrap().value, None);
    }

    #[test]
    fn ap_profile() {
        let rows = ap_norm_profile(3, &[2]).unwrap();
        assert!((rows[0].norm - 4.0 / 3.0).abs() < 1e-12);
        assert!((rows[0].ratio.unwrap() - 4.0 / (3.0 * 2f64.ln())).abs() < 1e-12);
        assert!((rows[0].ratio.unwrap() - 1.924).abs() < 1e-3);
        assert!(!rows[0].in_natural_range);
        let rows = ap_norm_profile(101, &[1, 10]).unwrap();
        assert!((rows[0].norm - 1.0).abs() < 1e-12);
        assert_eq!(rows[0].ratio, None);
        assert!(rows[1].in_natural_range);
        assert!(ap_norm_profile(101, &[0]).is_err());
        assert!(ap_norm_profile(101, &[101]).is_err());
    }

    #[test]
    fn combinations_and_binomials() {
        assert_eq!(binomial(7, 2), 21);
        assert_eq!(binomial(13, 3), 286);
        assert_eq!(binomial(3, 5), 0);
        let mut c = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut c, 7) {
            count += 1;
        }
        assert_eq!(count, 21);
    }

    fn cfg(strategy: Strategy, orbit_reduction: bool) -> SearchConfig {
        SearchConfig { strategy, seed: 42, budget: 10_000, orbit_reduction }
    }

    #[test]
    fn singletons() {
        for s in [Strategy::Exhaustive, Strategy::LocalSearch] {
            let r = extremal_search(13, 1, &cfg(s, false)).unwrap();
            assert!((r.best_norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pairs_mod_7() {
        let k = PrimeContext::new(7).unwrap();
        let r = extremal_search(7, 2, &cfg(Strategy::Exhaustive, false)).unwrap();
        assert_eq!(r.evaluations, 21);
        let ap = wiener_norm(&ZpSet::from_residues(k, [0, 1])).norm;
        assert!((r.best_norm - ap).abs() < 1e-12);
        let mut min = f64::INFINITY;
        for a in 0..7 {
            for b in a + 1..7 {
                min = min.min(wiener_norm(&ZpSet::from_residues(k, [a, b])).norm);
            }
        }
        assert!((r.best_norm - min).abs() < 1e-12);
    }

    #[test]
    fn local_vs_exhaustive_p13() {
        let ex = extremal_search(13, 3, &cfg(Strategy::Exhaustive, false)).unwrap();
        let ls = extremal_search(13, 3, &cfg(Strategy::LocalSearch, false)).unwrap();
        assert!(ls.best_norm >= ex.best_norm - 1e-9);
        assert!(ls.budget_exhausted);
        let again = extremal_search(13, 3, &cfg(Strategy::LocalSearch, false)).unwrap();
        assert_eq!(ls.best_set, again.best_set);
        assert_eq!(ls.csv_record(), again.csv_record());
        assert!(ex.bound_comparisons.iter().any(|c| c.theorem == Theorem::Charsmall));
    }

    #[test]
    fn orbit_reduction_agrees() {
        for (p, n) in [(5u64, 2u64), (7, 3), (11, 4), (13, 4)] {
            let full = extremal_search(p, n, &cfg(Strategy::Exhaustive, false)).unwrap();
            let red = extremal_search(p, n, &cfg(Strategy::Exhaustive, true)).unwrap();
            assert!((full.best_norm - red.best_norm).abs() < 1e-9, "p={p} n={n}");
            assert!(red.evaluations < full.evaluations);
        }
    }

    #[test]
    fn budget_flag() {
        let r = extremal_search(13, 4, &SearchConfig { budget: 10, ..cfg(Strategy::Exhaustive, false) }).unwrap();
        assert!(r.budget_exhausted);
        assert_eq!(r.evaluations, 10);
        assert!(extremal_search(101, 6, &cfg(Strategy::Exhaustive, false)).is_err());
    }

    proptest! {
        #[test]
        fn kernel_matches_library(members in proptest::collection::btree_set(0u64..31, 1..10)) {
            let k = PrimeContext::new(31).unwrap();
            let set: Vec<u64> = members.into_iter().collect();
            let a = wiener_norm(&ZpSet::from_residues(k, set.iter().copied())).norm;
            prop_assert!((NormKernel::new(31).norm(&set) - a).abs() < 1e-12);
        }

        #[test]
        fn affine_images_share_norm(members in proptest::collection::btree_set(0u64..13, 2..6), q in 1u64..13, c in 0u64..13) {
            let k = PrimeContext::new(13).unwrap();
            let a = ZpSet::from_residues(k, members);
            let b = affine_dilate(&a, q, c).unwrap();
            prop_assert!((wiener_norm(&a).norm - wiener_norm(&b).norm).abs() < 1e-12);
        }
    }
}
