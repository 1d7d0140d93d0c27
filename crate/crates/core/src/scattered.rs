//! Scattered families in 4-adic shells and the medium-size proof tracer.
//!
//! A scattered family is a union of `I` blocks of `M` integers each, block
//! `i` living in `[-4^i m, -4^i m/2) ∪ (4^i m/2, 4^i m]`. Such unions have
//! small additive energy, which the tracer pits against the lower bound
//! forced by a small Wiener norm.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::dlvp::{shell_concentration_check, ShellConcentration};
use crate::energy::{nk_profile, t_k, t_k_capped, Summands, DEFAULT_CELL_CAP};
use crate::spectral::wiener_norm;
use crate::structure::{localization_radius, localize};
use crate::util::{big_as_string, big_to_f64};
use crate::zp::{interval_members, ZpSet};
use crate::{Error, Result};

/// Block indices beyond this would push `4^i m` past `i64`.
pub const MAX_BLOCK_INDEX: u32 = 28;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScatteredFamily {
    pub m: u64,
    #[serde(rename = "M")]
    pub big_m: usize,
    pub indices: Vec<u32>,
    pub blocks: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub valid: bool,
    pub violations: Vec<String>,
}

impl ScatteredFamily {
    pub fn new(m: u64, indices: Vec<u32>, blocks: Vec<Vec<i64>>) -> Self {
        let big_m = blocks.first().map_or(0, Vec::len);
        Self { m, big_m, indices, blocks }
    }

    /// Number of blocks `I`.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// All elements, sorted.
    pub fn union(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.blocks.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }
}

/// Whether `b` lies in `[-4^i m, -4^i m/2) ∪ (4^i m/2, 4^i m]`.
pub fn in_shell(b: i64, i: u32, m: u64) -> bool {
    let outer = (1i128 << (2 * i)) * m as i128;
    // Compare 2|b| with 4^i m to keep the half-integer endpoint exact.
    let b2 = 2 * (b as i128).abs();
    b2 > outer && b2 <= 2 * outer
}

pub fn validate_scattered(f: &ScatteredFamily) -> Validation {
    let mut violations = Vec::new();
    if f.m == 0 {
        violations.push("scale m must be positive".to_string());
    }
    if f.big_m == 0 {
        violations.push("block size M must be positive".to_string());
    }
    if f.indices.is_empty() {
        violations.push("at least one block is required".to_string());
    }
    if f.indices.len() != f.blocks.len() {
        violations.push(format!("{} indices for {} blocks", f.indices.len(), f.blocks.len()));
    }
    if f.indices.windows(2).any(|w| w[0] >= w[1]) {
        violations.push("indices must be strictly increasing".to_string());
    }
    for (&i, block) in f.indices.iter().zip(&f.blocks) {
        if i == 0 || i > MAX_BLOCK_INDEX {
            violations.push(format!("index {i} outside 1..={MAX_BLOCK_INDEX}"));
            continue;
        }
        if block.len() != f.big_m {
            violations.push(format!("block {i} has {} elements, expected M = {}", block.len(), f.big_m));
        }
        let mut sorted = block.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            violations.push(format!("block {i} repeats an element"));
        }
        for &b in block {
            if !in_shell(b, i, f.m) {
                violations.push(format!("{b} is outside shell {i} at scale m = {}", f.m));
            }
        }
    }
    Validation { valid: violations.is_empty(), violations }
}

/// `2^{8k} k^k I^k M^{2k-1}`.
pub fn scattered_tk_bound(i: u64, m: u64, k: u32) -> Result<BigUint> {
    if i == 0 || m == 0 || k == 0 {
        return Err(Error::invalid("I, M and k must be positive"));
    }
    Ok(BigUint::from(2u32).pow(8 * k) * BigUint::from(k).pow(k) * BigUint::from(i).pow(k) * BigUint::from(m).pow(2 * k - 1))
}

/// `2^{6k} k^k M^{k-1}`.
pub fn nk_uniform_bound(m: u64, k: u32) -> Result<BigUint> {
    if m == 0 || k == 0 {
        return Err(Error::invalid("M and k must be positive"));
    }
    Ok(BigUint::from(2u32).pow(6 * k) * BigUint::from(k).pow(k) * BigUint::from(m).pow(k - 1))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatteredBoundCheck {
    pub k: u32,
    #[serde(serialize_with = "big_as_string")]
    pub t_k_exact: BigUint,
    #[serde(serialize_with = "big_as_string")]
    pub bound: BigUint,
    /// `bound / t_k_exact`.
    pub slack_ratio: f64,
    pub holds: bool,
}

fn require_valid(f: &ScatteredFamily) -> Result<()> {
    let v = validate_scattered(f);
    if v.valid {
        Ok(())
    } else {
        Err(Error::invalid(format!("invalid scattered family: {}", v.violations.join("; "))))
    }
}

pub fn verify_scattered_bound(f: &ScatteredFamily, k: u32) -> Result<ScatteredBoundCheck> {
    require_valid(f)?;
    let union = f.union();
    let t = t_k(Summands::Integers(&union), k)?;
    let bound = scattered_tk_bound(f.block_count() as u64, f.big_m as u64, k)?;
    let slack_ratio = ratio(&bound, &t);
    Ok(ScatteredBoundCheck { k, holds: t <= bound, t_k_exact: t, bound, slack_ratio })
}

#[derive(Debug, Clone, Serialize)]
pub struct NkUniformCheck {
    pub k: u32,
    #[serde(serialize_with = "big_as_string")]
    pub max_nk: BigUint,
    /// Smallest `x` attaining the maximum.
    pub argmax: i64,
    #[serde(serialize_with = "big_as_string")]
    pub bound: BigUint,
    pub holds: bool,
}

pub fn verify_nk_uniform(f: &ScatteredFamily, k: u32) -> Result<NkUniformCheck> {
    require_valid(f)?;
    let union = f.union();
    let report = nk_profile(Summands::Integers(&union), k)?;
    let (argmax, max_nk) = report
        .profile
        .iter()
        .fold((0i64, BigUint::zero()), |acc, (x, c)| if *c > acc.1 { (*x, c.clone()) } else { acc });
    let bound = nk_uniform_bound(f.big_m as u64, k)?;
    Ok(NkUniformCheck { k, holds: max_nk <= bound, max_nk, argmax, bound })
}

fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    if den.is_zero() {
        return f64::INFINITY;
    }
    // Scale down both sides before converting so huge values stay finite.
    let shift = num.bits().max(den.bits()).saturating_sub(1000);
    let (n, d) = (num >> shift, den >> shift);
    n.to_f64().unwrap_or(f64::INFINITY) / d.to_f64().unwrap_or(f64::INFINITY)
}

/// Draws a valid family with `I ≤ max_blocks`, `M ≤ max_size`, `m ≤ max_scale`
/// and indices in `1..=max_index`.
pub fn random_family<R: Rng + ?Sized>(rng: &mut R, max_blocks: usize, max_size: usize, max_scale: u64, max_index: u32) -> ScatteredFamily {
    let max_index = max_index.clamp(1, MAX_BLOCK_INDEX);
    let blocks_wanted = rng.random_range(1..=max_blocks.clamp(1, max_index as usize));
    let m = rng.random_range(1..=max_scale.max(1));
    let mut pool: Vec<u32> = (1..=max_index).collect();
    let mut indices = Vec::with_capacity(blocks_wanted);
    for _ in 0..blocks_wanted {
        indices.push(pool.swap_remove(rng.random_range(0..pool.len())));
    }
    indices.sort_unstable();
    // Shell i holds exactly 4^i m integers.
    let capacity = (1usize << (2 * indices[0])).saturating_mul(m as usize);
    let big_m = rng.random_range(1..=max_size.clamp(1, capacity));
    let blocks = indices
        .iter()
        .map(|&i| {
            let outer = (1i64 << (2 * i)) * m as i64;
            let inner = outer / 2;
            let mut block: Vec<i64> = Vec::with_capacity(big_m);
            while block.len() < big_m {
                let b = rng.random_range(inner + 1..=outer) * if rng.random_bool(0.5) { 1 } else { -1 };
                if !block.contains(&b) {
                    block.push(b);
                }
            }
            block.sort_unstable();
            block
        })
        .collect();
    ScatteredFamily { m, big_m, indices, blocks }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShellDecomposition {
    pub p: u64,
    pub m: u64,
    /// Largest `l ≥ 1` with `3·2^l·m < p`; `0` when there is none.
    pub l_0: u32,
    /// `D_l` as signed representatives ordered by `(|b|, b)`, for `0 ≤ l ≤ l_0`.
    pub shells: Vec<Vec<i64>>,
    /// `|D_l \ D_{l-1}|` for `1 ≤ l ≤ l_0`.
    pub deltas: Vec<usize>,
    pub degenerate: bool,
}

impl ShellDecomposition {
    /// Elements of `D_l \ D_{l-1}` in `(|b|, b)` order.
    pub fn layer(&self, l: u32) -> Vec<i64> {
        let bound = (1i64 << (l - 1)) * self.m as i64;
        self.shells[l as usize].iter().copied().filter(|b| b.abs() > bound).collect()
    }
}

fn max_level(p: u64, m: u64) -> u32 {
    if m == 0 {
        return 0;
    }
    let mut l = 0;
    while l < 62 && 3u128 * (m as u128) << (l + 1) < p as u128 {
        l += 1;
    }
    l
}

pub fn shell_decomposition(b: &ZpSet, m: u64) -> Result<ShellDecomposition> {
    if m == 0 {
        return Err(Error::invalid("m must be positive"));
    }
    let p = b.context().p();
    let l_0 = max_level(p, m);
    if l_0 == 0 {
        return Ok(ShellDecomposition { p, m, l_0, shells: Vec::new(), deltas: Vec::new(), degenerate: true });
    }
    let shells: Vec<Vec<i64>> = (0..=l_0)
        .map(|l| {
            let mut reps = interval_members(b, m << l).map(|s| s.signed_reps())?;
            reps.sort_unstable_by_key(|&x| (x.abs(), x));
            Ok(reps)
        })
        .collect::<Result<_>>()?;
    let deltas = shells.windows(2).map(|w| w[1].len() - w[0].len()).collect();
    Ok(ShellDecomposition { p, m, l_0, shells, deltas, degenerate: false })
}

/// Takes the `M` smallest elements (by `(|b|, b)`) of each even layer
/// `D_l \ D_{l-1}` as the block with index `l/2`.
pub fn extract_scattered(shells: &ShellDecomposition, big_m: usize) -> Result<ScatteredFamily> {
    if shells.degenerate || shells.l_0 < 2 {
        return Err(Error::invalid("shell decomposition has no even layer"));
    }
    if big_m == 0 {
        return Err(Error::invalid("M must be positive"));
    }
    let mut indices = Vec::new();
    let mut blocks = Vec::new();
    for l in (2..=shells.l_0).step_by(2) {
        let layer = shells.layer(l);
        if layer.len() < big_m {
            return Err(Error::SparseShell { l, found: layer.len(), needed: big_m });
        }
        let mut block = layer[..big_m].to_vec();
        block.sort_unstable();
        indices.push(l / 2);
        blocks.push(block);
    }
    Ok(ScatteredFamily { m: shells.m, big_m, indices, blocks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Degenerate,
    SparseShell,
    Scattered,
}

#[derive(Debug, Clone, Serialize)]
pub struct Inequality {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs <= rhs` or `lhs >= rhs` as named by `relation`.
    pub relation: &'static str,
    pub holds: bool,
}

impl Inequality {
    fn le(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Self { name, lhs, rhs, relation: "<=", holds: lhs <= rhs }
    }

    fn ge(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Self { name, lhs, rhs, relation: ">=", holds: lhs >= rhs }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationTrail {
    pub x0: u64,
    pub q: u64,
    pub captured: usize,
    pub search_space: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct SparseShellTrail {
    pub l: u32,
    pub delta: usize,
    /// `2^{l-1} m`.
    pub n: u64,
    pub concentration: Option<ShellConcentration>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatteredTrail {
    pub family: ScatteredFamily,
    pub q_size: usize,
    #[serde(serialize_with = "opt_big")]
    pub t_k_integers: Option<BigUint>,
    #[serde(serialize_with = "opt_big")]
    pub t_k_residues: Option<BigUint>,
    #[serde(serialize_with = "big_as_string")]
    pub upper_bound: BigUint,
    pub lower_bound: f64,
}

fn opt_big<S: serde::Serializer>(v: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::util::opt_big_as_string(v, s)
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub p: u64,
    pub a_size: usize,
    #[serde(rename = "K")]
    pub big_k: f64,
    pub norm_err_bound: f64,
    pub eps: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub d_eps: f64,
    /// `exp(-C K)`.
    pub trace_eta: f64,
    #[serde(rename = "M")]
    pub big_m: u64,
    pub m: u64,
    /// `m` as computed before clamping to `(p-1)/2`.
    pub m_raw: u64,
    pub l_0: u32,
    #[serde(rename = "I")]
    pub big_i: u32,
    pub k: Option<u32>,
    pub branch: Branch,
    pub localization: Option<LocalizationTrail>,
    pub deltas: Vec<usize>,
    pub sparse_shell: Option<SparseShellTrail>,
    pub scattered: Option<ScatteredTrail>,
    pub inequalities: Vec<Inequality>,
    pub notes: Vec<String>,
    pub verdict: String,
}

impl TraceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace report serializes")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceConfig {
    pub eps: f64,
    pub c: f64,
    pub k_override: Option<u32>,
    /// Cell cap handed to the energy convolutions.
    pub cell_cap: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { eps: 0.1, c: 1.0, k_override: None, cell_cap: DEFAULT_CELL_CAP }
    }
}

pub fn trace_theorem3(a: &ZpSet, eps: f64, c: f64, k_override: Option<u32>) -> Result<TraceReport> {
    trace_with(a, &TraceConfig { eps, c, k_override, ..TraceConfig::default() })
}

/// Runs the medium-size argument on a concrete set and records every
/// parameter and inequality met on the way.
pub fn trace_with(a: &ZpSet, cfg: &TraceConfig) -> Result<TraceReport> {
    let ctx = *a.context();
    let p = ctx.p();
    if a.is_empty() {
        return Err(Error::invalid("A must be nonempty"));
    }
    if 3 * a.len() as u64 > p {
        return Err(Error::invalid(format!("|A| = {} exceeds p/3", a.len())));
    }
    if !(cfg.eps > 0.0 && cfg.eps.is_finite()) || !(cfg.c > 0.0 && cfg.c.is_finite()) {
        return Err(Error::invalid("eps and C must be positive and finite"));
    }
    if cfg.k_override == Some(0) {
        return Err(Error::invalid("k override must be at least 1"));
    }

    let norm = wiener_norm(a);
    let big_k = norm.norm.max(1.0);
    let a_size = a.len();
    let d_eps = big_k.ln().powf(3.0 + cfg.eps);
    let trace_eta = (-cfg.c * big_k).exp();
    let big_m = (trace_eta * a_size as f64 * (-d_eps).exp()).floor() as u64;
    let m_raw = localization_radius(a_size as u64, p, d_eps);
    let m = m_raw.min(ctx.half());

    let mut r = TraceReport {
        p,
        a_size,
        big_k,
        norm_err_bound: norm.err_bound,
        eps: cfg.eps,
        c: cfg.c,
        d_eps,
        trace_eta,
        big_m,
        m,
        m_raw,
        l_0: 0,
        big_i: 0,
        k: None,
        branch: Branch::Degenerate,
        localization: None,
        deltas: Vec::new(),
        sparse_shell: None,
        scattered: None,
        inequalities: Vec::new(),
        notes: Vec::new(),
        verdict: String::new(),
    };
    if m_raw != m {
        r.notes.push(format!("m clamped from {m_raw} to (p-1)/2 = {m}"));
    }
    if m == 0 {
        r.notes.push("localization radius m is 0".to_string());
        return Ok(finish_degenerate(r));
    }

    let loc = localize(a, m)?;
    r.inequalities.push(Inequality::ge("localization_capture", loc.captured as f64, a_size as f64 * (-d_eps).exp()));
    r.localization = Some(LocalizationTrail { x0: loc.x0, q: loc.q, captured: loc.captured, search_space: loc.search_space });
    let b = loc.set;

    let shells = shell_decomposition(&b, m)?;
    r.l_0 = shells.l_0;
    r.deltas = shells.deltas.clone();
    if big_m == 0 || shells.l_0 < 2 {
        if big_m == 0 {
            r.notes.push("block size M = floor(exp(-CK)|A|exp(-d_eps)) is 0".to_string());
        }
        if shells.l_0 < 2 {
            r.notes.push(format!("l_0 = {} < 2", shells.l_0));
        }
        return Ok(finish_degenerate(r));
    }
    r.big_i = shells.l_0 / 2;

    if let Some(pos) = shells.deltas.iter().position(|&d| (d as u64) < big_m) {
        let l = pos as u32 + 1;
        let n = m << (l - 1);
        let concentration = if trace_eta < 0.5 {
            let check = shell_concentration_check(&b, n, trace_eta)?;
            if let Some(bound) = check.bound {
                r.inequalities.push(Inequality::ge("shell_concentration_norm", check.measured_norm + check.err_bound, bound));
            }
            Some(check)
        } else {
            r.notes.push(format!("exp(-CK) = {trace_eta} is not below 1/2; concentration check skipped"));
            None
        };
        r.sparse_shell = Some(SparseShellTrail { l, delta: shells.deltas[pos], n, concentration });
        r.branch = Branch::SparseShell;
        r.verdict = format!("layer l = {l} holds {} < M = {big_m} points; norm lower bound via concentration", shells.deltas[pos]);
        return Ok(r);
    }

    let family = extract_scattered(&shells, big_m as usize)?;
    debug_assert!(validate_scattered(&family).valid);
    let k = cfg.k_override.unwrap_or_else(|| (big_k.floor() as u32).max(1));
    r.k = Some(k);
    r.branch = Branch::Scattered;
    let union = family.union();
    let q_size = union.len();
    let big_i = family.block_count() as u64;
    let upper_bound = scattered_tk_bound(big_i, big_m, k)?;
    // Lower bound with the unpadded norm, matching K above.
    let exponent = 2.0 * k as f64;
    let lower_bound = (q_size as f64).powf(exponent) / (a_size as f64 * big_k.powf(exponent - 2.0));
    let q_set = ZpSet::from_integers(ctx, union.iter().copied());

    let t_int = t_k_capped(Summands::Integers(&union), k, cfg.cell_cap);
    let t_res = t_k_capped(Summands::Residues(&q_set), k, cfg.cell_cap);
    match &t_int {
        Ok(t) => r.inequalities.push(Inequality::le("scattered_energy_upper", big_to_f64(t), big_to_f64(&upper_bound))),
        Err(e) => r.notes.push(format!("integer T_k not computed: {e}")),
    }
    match &t_res {
        Ok(t) => r.inequalities.push(Inequality::ge("energy_lower_from_norm", big_to_f64(t), lower_bound)),
        Err(e) => r.notes.push(format!("T_k over Z_p not computed: {e}")),
    }
    let final_lhs = q_size as f64 / a_size as f64 * (big_i as f64).powi(k as i32 - 1);
    let final_rhs = big_k.powi(3 * k as i32 - 2) * 2f64.powi(8 * k as i32);
    r.inequalities.push(Inequality::le("final_pair", final_lhs, final_rhs));
    let partial = t_int.is_err() || t_res.is_err();
    r.scattered = Some(ScatteredTrail {
        family,
        q_size,
        t_k_integers: t_int.ok(),
        t_k_residues: t_res.ok(),
        upper_bound,
        lower_bound,
    });
    let failed: Vec<&str> = r.inequalities.iter().filter(|i| !i.holds).map(|i| i.name).collect();
    r.verdict = match (partial, failed.is_empty()) {
        (true, _) => "scattered branch; energy budget exhausted, partial report".to_string(),
        (false, true) => format!("scattered branch with I = {big_i}, k = {k}; all recorded inequalities hold"),
        (false, false) => format!("scattered branch with I = {big_i}, k = {k}; failing: {}", failed.join(", ")),
    };
    Ok(r)
}

fn finish_degenerate(mut r: TraceReport) -> TraceReport {
    r.branch = Branch::Degenerate;
    r.verdict = format!("degenerate at desk scale: M = {}, l_0 = {}", r.big_m, r.l_0);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::oracle::{nk_brute_force, t_k_brute_force};
    use crate::zp::PrimeContext;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fam(m: u64, indices: Vec<u32>, blocks: Vec<Vec<i64>>) -> ScatteredFamily {
        ScatteredFamily::new(m, indices, blocks)
    }

    #[test]
    fn endpoints() {
        assert!(validate_scattered(&fam(1, vec![1, 2], vec![vec![3], vec![9]])).valid);
        assert!(!validate_scattered(&fam(1, vec![1], vec![vec![2]])).valid);
        assert!(validate_scattered(&fam(1, vec![1], vec![vec![4]])).valid);
        assert!(validate_scattered(&fam(1, vec![1], vec![vec![-4]])).valid);
        assert!(!validate_scattered(&fam(1, vec![1], vec![vec![-2]])).valid);
        assert!(!validate_scattered(&fam(1, vec![1], vec![vec![5]])).valid);
        // Odd scale: 4^1·3/2 = 6 is excluded, 7 is not.
        assert!(!validate_scattered(&fam(3, vec![1], vec![vec![6]])).valid);
        assert!(validate_scattered(&fam(3, vec![1], vec![vec![-7]])).valid);
        let uneven = ScatteredFamily { m: 1, big_m: 1, indices: vec![1, 2], blocks: vec![vec![3], vec![9, 10]] };
        assert!(!validate_scattered(&uneven).valid);
        assert!(!validate_scattered(&fam(1, vec![2, 1], vec![vec![9], vec![3]])).valid);
    }

    #[test]
    fn bound_values() {
        assert_eq!(scattered_tk_bound(1, 1, 1).unwrap(), BigUint::from(256u32));
        assert_eq!(scattered_tk_bound(2, 1, 2).unwrap(), BigUint::from(1_048_576u32));
        assert_eq!(scattered_tk_bound(2, 2, 2).unwrap(), BigUint::from(8_388_608u32));
        assert_eq!(nk_uniform_bound(1, 2).unwrap(), BigUint::from(16_384u32));
    }

    #[test]
    fn small_family_energy() {
        let f = fam(1, vec![1, 2], vec![vec![3], vec![9]]);
        let r = verify_scattered_bound(&f, 2).unwrap();
        assert_eq!(r.t_k_exact, BigUint::from(6u32));
        assert!(r.holds);
        let n = verify_nk_uniform(&f, 2).unwrap();
        assert_eq!((n.max_nk.clone(), n.argmax), (BigUint::from(2u32), 12));
        let single = fam(1, vec![1], vec![vec![3]]);
        assert_eq!(verify_scattered_bound(&single, 1).unwrap().t_k_exact, BigUint::from(1u32));
        assert_eq!(verify_nk_uniform(&single, 1).unwrap().max_nk, BigUint::from(1u32));
        assert!(verify_scattered_bound(&fam(1, vec![1], vec![vec![2]]), 2).is_err());
    }

    #[test]
    fn shells_at_p101() {
        let k = PrimeContext::new(101).unwrap();
        let b = ZpSet::from_integers(k, [0, 1, -1]);
        let s = shell_decomposition(&b, 1).unwrap();
        assert_eq!(s.l_0, 5);
        assert_eq!(s.deltas, vec![0; 5]);
        let spread = ZpSet::from_integers(k, [0, 2, -4, 8, 16, -32]);
        let s = shell_decomposition(&spread, 1).unwrap();
        assert!(s.deltas.iter().all(|&d| d >= 1));
        let f = extract_scattered(&s, 1).unwrap();
        assert_eq!(f.indices, vec![1, 2]);
        assert_eq!(f.blocks, vec![vec![-4], vec![16]]);
        assert!(validate_scattered(&f).valid);
        let sparse = ZpSet::from_integers(k, [0, 2, 8, 16, -32]);
        let s = shell_decomposition(&sparse, 1).unwrap();
        assert!(matches!(extract_scattered(&s, 1), Err(Error::SparseShell { l: 2, .. })));
        assert!(shell_decomposition(&b, 17).unwrap().degenerate);
    }

    #[test]
    fn degenerate_singleton() {
        let k = PrimeContext::new(101).unwrap();
        let r = trace_theorem3(&ZpSet::from_residues(k, [0]), 0.1, 1.0, None).unwrap();
        assert_eq!(r.branch, Branch::Degenerate);
        assert_eq!(r.big_m, 0);
    }

    #[test]
    fn ap_trace_has_trail() {
        let k = PrimeContext::new(1009).unwrap();
        let a = ZpSet::from_residues(k, 0..20);
        let r = trace_theorem3(&a, 0.1, 1.0, None).unwrap();
        assert!(matches!(r.branch, Branch::Degenerate | Branch::SparseShell));
        assert!(r.big_k > 1.0 && r.d_eps > 0.0);
        assert_eq!(r.to_json(), trace_theorem3(&a, 0.1, 1.0, None).unwrap().to_json());
    }

    #[test]
    fn branch_fixtures() {
        let k307 = PrimeContext::new(307).unwrap();
        let r = trace_theorem3(&ZpSet::from_residues(k307, 0..33), 1.0, 1.0, Some(2)).unwrap();
        assert_eq!(r.branch, Branch::SparseShell);
        assert_eq!((r.m, r.l_0, r.big_m), (4, 4, 1));
        assert_eq!(r.sparse_shell.as_ref().unwrap().l, 4);

        // An interval localized at m = 1 fills the first five dyadic layers.
        let k101 = PrimeContext::new(101).unwrap();
        let r = trace_theorem3(&ZpSet::from_residues(k101, 0..20), 0.1, 1.0, Some(2)).unwrap();
        assert_eq!(r.branch, Branch::Scattered);
        assert_eq!((r.m, r.l_0, r.big_m, r.big_i), (1, 5, 1, 2));
        for name in ["scattered_energy_upper", "energy_lower_from_norm", "final_pair"] {
            assert!(r.inequalities.iter().any(|i| i.name == name && i.holds), "{name}");
        }
        let trail = r.scattered.as_ref().unwrap();
        assert!(validate_scattered(&trail.family).valid);
        let u = trail.family.union();
        assert_eq!(trail.t_k_integers.clone().unwrap(), t_k_brute_force(Summands::Integers(&u), 2).unwrap());
    }

    #[test]
    fn trace_rejects_large_sets() {
        let k = PrimeContext::new(31).unwrap();
        assert!(trace_theorem3(&ZpSet::from_residues(k, 0..11), 0.1, 1.0, None).is_err());
        assert!(trace_theorem3(&ZpSet::empty(k), 0.1, 1.0, None).is_err());
    }

    proptest! {
        #[test]
        fn random_families_respect_bounds(seed in any::<u64>(), k in 1u32..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_family(&mut rng, 6, 4, 4, 6);
            prop_assert!(validate_scattered(&f).valid);
            prop_assert!(verify_scattered_bound(&f, k).unwrap().holds);
            prop_assert!(verify_nk_uniform(&f, k).unwrap().holds);
        }

        #[test]
        fn small_families_match_brute_force(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_family(&mut rng, 3, 3, 2, 3);
            let u = f.union();
            let r = verify_scattered_bound(&f, 2).unwrap();
            prop_assert_eq!(r.t_k_exact, t_k_brute_force(Summands::Integers(&u), 2).unwrap());
            let max = nk_brute_force(Summands::Integers(&u), 2).unwrap().into_iter().map(|(_, c)| c).max().unwrap();
            prop_assert_eq!(verify_nk_uniform(&f, 2).unwrap().max_nk, BigUint::from(max));
        }

        #[test]
        fn shells_nest(members in proptest::collection::btree_set(0u64..211, 1..40), m in 1u64..12) {
            let k = PrimeContext::new(211).unwrap();
            let b = ZpSet::from_residues(k, members);
            let s = shell_decomposition(&b, m).unwrap();
            prop_assume!(!s.degenerate);
            for w in s.shells.windows(2) {
                prop_assert!(w[0].iter().all(|x| w[1].contains(x)));
            }
            prop_assert_eq!(s.deltas.iter().sum::<usize>() + s.shells[0].len(), s.shells[s.l_0 as usize].len());
            if let Ok(f) = extract_scattered(&s, 1) {
                prop_assert!(validate_scattered(&f).valid);
            }
        }
    }
}
