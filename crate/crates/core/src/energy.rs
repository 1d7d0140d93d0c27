//! Representation profiles `N_k`, additive energies `T_k` and sumsets.
//!
//! `N_k(x)` counts ordered `k`-tuples from `Q` summing to `x`, and
//! `T_k(Q) = Σ_x N_k(x)²` counts solutions of
//! `x_1 + … + x_k = x'_1 + … + x'_k`. All counts are exact. `T_k` is available
//! through three independent routes: iterated convolution (the main path),
//! brute-force enumeration of `2k`-tuples ([`oracle`]), and the spectral
//! identity `T_k(Q) = p^{2k-1} Σ_γ |χ̂_Q(γ)|^{2k}` over `Z_p`.

use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::spectral::{indicator_spectrum, wiener_norm};
use crate::util::{big_as_string, big_to_f64};
use crate::zp::ZpSet;
use crate::{Error, Result};

/// Default cap on the number of cells a convolution may allocate.
pub const DEFAULT_CELL_CAP: usize = 100_000_000;

/// Default cap on the number of `2k`-tuples the brute-force oracle may visit.
pub const BRUTE_FORCE_CAP: u64 = 100_000_000;

/// Spectral `T_k` estimates whose error estimate exceeds this are flagged.
pub const SPECTRAL_WARN_THRESHOLD: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Integers,
    Residues,
}

/// A finite set of summands, either in `Z` or in `Z_p`.
#[derive(Debug, Clone, Copy)]
pub enum Summands<'a> {
    /// Distinct integers (duplicates are ignored).
    Integers(&'a [i64]),
    Residues(&'a ZpSet),
}

impl Summands<'_> {
    pub fn domain(&self) -> Domain {
        match self {
            Summands::Integers(_) => Domain::Integers,
            Summands::Residues(_) => Domain::Residues,
        }
    }

    fn modulus(&self) -> Option<u64> {
        match self {
            Summands::Integers(_) => None,
            Summands::Residues(s) => Some(s.context().p()),
        }
    }

    /// Sorted, deduplicated elements; residues as `0..p`.
    fn elements(&self) -> Vec<i64> {
        match self {
            Summands::Integers(v) => {
                let mut v = v.to_vec();
                v.sort_unstable();
                v.dedup();
                v
            }
            Summands::Residues(s) => s.iter().map(|r| r as i64).collect(),
        }
    }
}

/// Exact `N_k` profile and `T_k`.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub k: u32,
    pub domain: Domain,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    pub set_size: usize,
    #[serde(serialize_with = "big_as_string")]
    pub t_k: BigUint,
    /// Nonzero `(x, N_k(x))` pairs in increasing `x`.
    #[serde(serialize_with = "profile_pairs")]
    pub profile: Vec<(i64, BigUint)>,
    pub spectral_estimate: Option<f64>,
}

impl EnergyReport {
    pub fn max_nk(&self) -> BigUint {
        self.profile.iter().map(|(_, c)| c).max().cloned().unwrap_or_default()
    }

    pub fn nk(&self, x: i64) -> BigUint {
        match self.profile.binary_search_by_key(&x, |(y, _)| *y) {
            Ok(i) => self.profile[i].1.clone(),
            Err(_) => BigUint::zero(),
        }
    }

    /// `Σ_x N_k(x)`.
    pub fn mass(&self) -> BigUint {
        self.profile.iter().map(|(_, c)| c).sum()
    }
}

fn profile_pairs<S: Serializer>(v: &[(i64, BigUint)], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (x, c) in v {
        seq.serialize_element(&(x, c.to_string()))?;
    }
    seq.end()
}

/// `N_k` profile and `T_k` by `k - 1` convolutions of the indicator count vector.
pub fn nk_profile(q: Summands<'_>, k: u32) -> Result<EnergyReport> {
    nk_profile_capped(q, k, DEFAULT_CELL_CAP)
}

pub fn nk_profile_capped(q: Summands<'_>, k: u32, cell_cap: usize) -> Result<EnergyReport> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let elems = q.elements();
    if elems.is_empty() {
        return Err(Error::invalid("summand set must be nonempty"));
    }
    let n = elems.len() as f64;
    // |Q|^{2k} bounds every N_k(x)² and their sum; stay in u128 when it fits.
    let narrow = 2.0 * k as f64 * n.log2() < 126.0;
    let (offset, profile, t_k) = if narrow {
        convolve::<u128>(&q, &elems, k, cell_cap)?
    } else {
        convolve::<BigUint>(&q, &elems, k, cell_cap)?
    };
    let spectral_estimate = match q {
        Summands::Residues(s) => Some(t_k_spectral(s, k)?.value),
        Summands::Integers(_) => None,
    };
    Ok(EnergyReport {
        k,
        domain: q.domain(),
        p: q.modulus(),
        set_size: elems.len(),
        t_k,
        profile: profile.into_iter().map(|(i, c)| (i as i64 + offset, c)).collect(),
        spectral_estimate,
    })
}

trait Count: Clone + Zero + One + CheckedAdd + CheckedMul + Into<BigUint> {}
impl Count for u128 {}
impl Count for BigUint {}

type Convolved = (i64, Vec<(usize, BigUint)>, BigUint);

fn convolve<T: Count>(q: &Summands<'_>, elems: &[i64], k: u32, cell_cap: usize) -> Result<Convolved> {
    let overflow = || Error::Budget("count overflow in narrow accumulator".into());
    let (len, offset, shifts, modulus): (usize, i64, Vec<usize>, Option<usize>) = match q {
        Summands::Integers(_) => {
            let lo = elems[0];
            let width = (elems[elems.len() - 1] - lo) as u128;
            let cells = width * k as u128 + 1;
            if cells > cell_cap as u128 {
                return Err(Error::Budget(format!("profile needs {cells} cells, cap is {cell_cap}")));
            }
            let shifts = elems.iter().map(|&x| (x - lo) as usize).collect();
            (cells as usize, lo * k as i64, shifts, None)
        }
        Summands::Residues(s) => {
            let p = s.context().p() as usize;
            if p > cell_cap {
                return Err(Error::Budget(format!("profile needs {p} cells, cap is {cell_cap}")));
            }
            (p, 0, elems.iter().map(|&x| x as usize).collect(), Some(p))
        }
    };
    let mut cur = vec![T::zero(); len];
    for &s in &shifts {
        cur[s] = T::one();
    }
    let mut width = shifts.iter().copied().max().unwrap_or(0);
    for _ in 1..k {
        let mut next = vec![T::zero(); len];
        let span = match modulus {
            Some(p) => p,
            None => width + 1,
        };
        for (i, c) in cur[..span].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for &s in &shifts {
                let j = match modulus {
                    Some(p) => (i + s) % p,
                    None => i + s,
                };
                next[j] = next[j].checked_add(c).ok_or_else(overflow)?;
            }
        }
        if modulus.is_none() {
            width += shifts.iter().copied().max().unwrap_or(0);
        }
        cur = next;
    }
    let mut t = T::zero();
    let mut profile = Vec::new();
    for (i, c) in cur.into_iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let sq = c.checked_mul(&c).ok_or_else(overflow)?;
        t = t.checked_add(&sq).ok_or_else(overflow)?;
        profile.push((i, c.into()));
    }
    Ok((offset, profile, t.into()))
}

/// Exact `T_k(Q)`.
pub fn t_k(q: Summands<'_>, k: u32) -> Result<BigUint> {
    Ok(nk_profile(q, k)?.t_k)
}

/// Integer-domain `T_k` with a custom cell cap.
pub fn t_k_capped(q: Summands<'_>, k: u32, cell_cap: usize) -> Result<BigUint> {
    Ok(nk_profile_capped(q, k, cell_cap)?.t_k)
}

/// Result of evaluating the spectral identity for `T_k`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralEnergy {
    pub value: f64,
    /// First-order propagation of the spectrum error bound plus rounding.
    pub error_estimate: f64,
    /// Set when the error estimate exceeds [`SPECTRAL_WARN_THRESHOLD`].
    pub amplified: bool,
}

/// `p^{2k-1} Σ_γ |χ̂_Q(γ)|^{2k}`, accumulated as `(1/p) Σ_γ |p·χ̂_Q(γ)|^{2k}`
/// so intermediate values never exceed `|Q|^{2k}`.
pub fn t_k_spectral(q: &ZpSet, k: u32) -> Result<SpectralEnergy> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let p = q.context().p() as f64;
    let spec = indicator_spectrum(q);
    let e = 2 * k as i32;
    let mut sum = 0.0;
    let mut deriv = 0.0;
    for v in spec.values() {
        let y = p * v.norm();
        sum += y.powi(e);
        deriv += y.powi(e - 1);
    }
    let value = sum / p;
    let u = f64::EPSILON / 2.0;
    let error_estimate = 2.0 * k as f64 * spec.err_bound() * deriv + (e as f64 + p) * u * value;
    Ok(SpectralEnergy { value, error_estimate, amplified: error_estimate > SPECTRAL_WARN_THRESHOLD })
}

/// Outcome of checking `T_k(Q) ≥ |Q|^{2k} / (|A| K^{2k-2})` with `K ≥ ‖χ_A‖_A`.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundCheck {
    pub k: u32,
    #[serde(serialize_with = "big_as_string")]
    pub lhs: BigUint,
    pub rhs: f64,
    /// Wiener norm of `A` padded by its error bound.
    pub norm_bound: f64,
    pub holds: bool,
}

pub fn t_k_lower_bound_check(a: &ZpSet, q: &ZpSet, k: u32) -> Result<LowerBoundCheck> {
    a.context().check_same(q.context())?;
    if a.is_empty() || q.is_empty() {
        return Err(Error::invalid("A and Q must be nonempty"));
    }
    if let Some(missing) = q.iter().find(|&x| !a.contains(x)) {
        return Err(Error::NotSubset(missing));
    }
    let norm = wiener_norm(a);
    let big_k = norm.norm + norm.err_bound;
    let lhs = t_k(Summands::Residues(q), k)?;
    let exponent = 2.0 * k as f64;
    let rhs = (q.len() as f64).powf(exponent) / (a.len() as f64 * big_k.powf(exponent - 2.0));
    let holds = big_to_f64(&lhs) >= rhs;
    Ok(LowerBoundCheck { k, lhs, rhs, norm_bound: big_k, holds })
}

/// `T_2(A) ≥ |A|³ / ‖χ_A‖²`.
pub fn energy_via_wiener_check(a: &ZpSet) -> Result<LowerBoundCheck> {
    t_k_lower_bound_check(a, a, 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn apply(self, a: i64, b: i64) -> i64 {
        match self {
            Sign::Plus => a + b,
            Sign::Minus => a - b,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Exact rational, serialized as `"num/den"`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fraction(pub Ratio<BigUint>);

impl Fraction {
    fn new(num: BigUint, den: BigUint) -> Self {
        Fraction(Ratio::new(num, den))
    }

    pub fn to_f64(&self) -> f64 {
        let (n, d) = (self.0.numer(), self.0.denom());
        match (n.to_f64(), d.to_f64()) {
            (Some(n), Some(d)) => n / d,
            _ => f64::NAN,
        }
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Sizes of `A + B`, `A − B`, and the doubling and energy-deficiency of `A`.
#[derive(Debug, Clone, Serialize)]
pub struct SumsetReport {
    pub sum_size: usize,
    pub diff_size: usize,
    /// `|A + A| / |A|`.
    pub doubling: Fraction,
    /// `L = |A|³ / T_2(A)`.
    pub energy_deficiency: Fraction,
}

/// `A ± B` in `Z_p`.
pub fn sumset_zp(a: &ZpSet, b: &ZpSet, sign: Sign) -> Result<(ZpSet, SumsetReport)> {
    a.context().check_same(b.context())?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("sumset operands must be nonempty"));
    }
    let ctx = *a.context();
    let combine = |x: &ZpSet, y: &ZpSet, s: Sign| {
        let ys: Vec<i64> = y.iter().map(|v| v as i64).collect();
        ZpSet::from_integers(ctx, x.iter().flat_map(|u| ys.iter().map(move |&v| s.apply(u as i64, v))))
    };
    let out = combine(a, b, sign);
    let report = SumsetReport {
        sum_size: combine(a, b, Sign::Plus).len(),
        diff_size: combine(a, b, Sign::Minus).len(),
        doubling: Fraction::new(combine(a, a, Sign::Plus).len().into(), a.len().into()),
        energy_deficiency: Fraction::new(
            BigUint::from(a.len()).pow(3),
            t_k(Summands::Residues(a), 2)?,
        ),
    };
    Ok((out, report))
}

/// `A ± B` in `Z`; the returned set is sorted.
pub fn sumset_int(a: &[i64], b: &[i64], sign: Sign) -> Result<(Vec<i64>, SumsetReport)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("sumset operands must be nonempty"));
    }
    let combine = |x: &[i64], y: &[i64], s: Sign| -> Vec<i64> {
        let mut v: Vec<i64> = x.iter().flat_map(|&u| y.iter().map(move |&w| s.apply(u, w))).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let a_set = Summands::Integers(a).elements();
    let b_set = Summands::Integers(b).elements();
    let out = combine(&a_set, &b_set, sign);
    let report = SumsetReport {
        sum_size: combine(&a_set, &b_set, Sign::Plus).len(),
        diff_size: combine(&a_set, &b_set, Sign::Minus).len(),
        doubling: Fraction::new(combine(&a_set, &a_set, Sign::Plus).len().into(), a_set.len().into()),
        energy_deficiency: Fraction::new(
            BigUint::from(a_set.len()).pow(3),
            t_k(Summands::Integers(&a_set), 2)?,
        ),
    };
    Ok((out, report))
}

/// Brute-force enumeration, kept independent of the convolution path.
pub mod oracle {
    use super::*;

    fn check_budget(n: usize, arity: u32, cap: u64) -> Result<()> {
        let visits = (n as f64).powi(arity as i32);
        if visits > cap as f64 {
            return Err(Error::Budget(format!("{visits:.0} tuples exceeds brute-force cap {cap}")));
        }
        Ok(())
    }

    /// Visits every tuple in `elems^arity`, calling `f` with the index odometer.
    fn for_each_tuple(n: usize, arity: usize, mut f: impl FnMut(&[usize])) {
        let mut idx = vec![0usize; arity];
        loop {
            f(&idx);
            let mut pos = arity;
            loop {
                if pos == 0 {
                    return;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < n {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    /// `T_k` by checking all `|Q|^{2k}` tuples `(x_1..x_k, x'_1..x'_k)`.
    pub fn t_k_brute_force(q: Summands<'_>, k: u32) -> Result<BigUint> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        let elems = q.elements();
        check_budget(elems.len(), 2 * k, BRUTE_FORCE_CAP)?;
        let modulus = q.modulus().map(|p| p as i64);
        let k = k as usize;
        let mut count: u64 = 0;
        for_each_tuple(elems.len(), 2 * k, |idx| {
            let lhs: i64 = idx[..k].iter().map(|&i| elems[i]).sum();
            let rhs: i64 = idx[k..].iter().map(|&i| elems[i]).sum();
            let diff = lhs - rhs;
            let equal = match modulus {
                Some(p) => diff.rem_euclid(p) == 0,
                None => diff == 0,
            };
            if equal {
                count += 1;
            }
        });
        Ok(BigUint::from(count))
    }

    /// `N_k` by enumerating all `|Q|^k` tuples; returns sorted `(x, count)` pairs.
    pub fn nk_brute_force(q: Summands<'_>, k: u32) -> Result<Vec<(i64, u64)>> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        let elems = q.elements();
        check_budget(elems.len(), k, BRUTE_FORCE_CAP)?;
        let modulus = q.modulus().map(|p| p as i64);
        let mut counts = std::collections::BTreeMap::new();
        for_each_tuple(elems.len(), k as usize, |idx| {
            let s: i64 = idx.iter().map(|&i| elems[i]).sum();
            let s = match modulus {
                Some(p) => s.rem_euclid(p),
                None => s,
            };
            *counts.entry(s).or_insert(0u64) += 1;
        });
        Ok(counts.into_iter().collect())
    }
}
