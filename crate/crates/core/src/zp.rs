//! Residue arithmetic and dense subsets of `Z_p`.
//!
//! Everything downstream is computed relative to a [`PrimeContext`]. Intervals
//! `[-n, n]` inside `Z_p` are taken through signed representatives, which are
//! unique because `p` is odd.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::{Error, Result};

/// Floating-point policy for the spectral routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Plain `f64` accumulation.
    #[default]
    Float64,
    /// `f64` with compensated (Neumaier) accumulation in the direct transform.
    Extended,
}

impl Precision {
    /// Unit roundoff of the working format.
    pub fn unit_roundoff(self) -> f64 {
        f64::EPSILON / 2.0
    }
}

/// The modulus `p` together with the numeric policy used on top of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeContext {
    p: u64,
    precision: Precision,
}

impl PrimeContext {
    /// Largest modulus accepted; keeps every product of two residues in `u64`.
    pub const MAX_P: u64 = u32::MAX as u64;

    pub fn new(p: u64) -> Result<Self> {
        Self::with_precision(p, Precision::Float64)
    }

    pub fn with_precision(p: u64, precision: Precision) -> Result<Self> {
        if p < 3 || p % 2 == 0 || p > Self::MAX_P || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        Ok(Self { p, precision })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// `(p - 1) / 2`, the largest magnitude of a signed representative.
    #[inline]
    pub fn half(&self) -> u64 {
        (self.p - 1) / 2
    }

    #[inline]
    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a % self.p) * (b % self.p) % self.p
    }

    /// Multiplicative inverse of a nonzero residue.
    pub fn inverse(&self, a: u64) -> Option<u64> {
        let a = a % self.p;
        if a == 0 {
            return None;
        }
        Some(pow_mod(a, self.p - 2, self.p))
    }

    pub(crate) fn check_same(&self, other: &PrimeContext) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ContextMismatch { left: self.p, right: other.p });
        }
        Ok(())
    }
}

/// Signed representative of a residue, the unique integer in `(-p/2, p/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct SignedRep(i64);

impl SignedRep {
    #[inline]
    pub fn value(self) -> i64 {
        self.0
    }

    #[inline]
    pub fn magnitude(self) -> u64 {
        self.0.unsigned_abs()
    }
}

impl fmt::Display for SignedRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Minimal-absolute-value representative of `x` modulo `p`.
#[inline]
pub fn min_abs_rep(x: u64, ctx: &PrimeContext) -> SignedRep {
    let x = x % ctx.p;
    if x <= ctx.half() {
        SignedRep(x as i64)
    } else {
        SignedRep(x as i64 - ctx.p as i64)
    }
}

/// A subset of `Z_p` stored as a dense bitmap.
#[derive(Clone)]
pub struct ZpSet {
    ctx: PrimeContext,
    words: Vec<u64>,
    len: usize,
}

impl ZpSet {
    pub fn empty(ctx: PrimeContext) -> Self {
        let words = vec![0; (ctx.p as usize).div_ceil(64)];
        Self { ctx, words, len: 0 }
    }

    pub fn full(ctx: PrimeContext) -> Self {
        Self::from_residues(ctx, 0..ctx.p)
    }

    /// Builds a set from residues; values are reduced mod `p`, duplicates collapse.
    pub fn from_residues(ctx: PrimeContext, residues: impl IntoIterator<Item = u64>) -> Self {
        let mut s = Self::empty(ctx);
        for r in residues {
            s.insert(r % ctx.p);
        }
        s
    }

    /// Builds a set from arbitrary integers, reducing each mod `p`.
    pub fn from_integers(ctx: PrimeContext, values: impl IntoIterator<Item = i64>) -> Self {
        let mut s = Self::empty(ctx);
        for v in values {
            s.insert(ctx.reduce(v));
        }
        s
    }

    pub(crate) fn insert(&mut self, r: u64) {
        let (w, b) = ((r / 64) as usize, r % 64);
        let mask = 1u64 << b;
        if self.words[w] & mask == 0 {
            self.words[w] |= mask;
            self.len += 1;
        }
    }

    #[inline]
    pub fn contains(&self, r: u64) -> bool {
        if r >= self.ctx.p {
            return false;
        }
        self.words[(r / 64) as usize] >> (r % 64) & 1 == 1
    }

    #[inline]
    pub fn context(&self) -> &PrimeContext {
        &self.ctx
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Members in increasing residue order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(wi as u64 * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }

    /// Signed representatives of the members, in increasing residue order.
    pub fn signed_reps(&self) -> Vec<i64> {
        self.iter().map(|r| min_abs_rep(r, &self.ctx).value()).collect()
    }

    /// Indicator function `χ_A` as a length-`p` real vector.
    pub fn indicator(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.ctx.p as usize];
        for r in self.iter() {
            v[r as usize] = 1.0;
        }
        v
    }

    pub fn is_subset_of(&self, other: &ZpSet) -> bool {
        self.ctx.p == other.ctx.p && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

impl PartialEq for ZpSet {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.p == other.ctx.p && self.words == other.words
    }
}

impl Eq for ZpSet {}

impl fmt::Debug for ZpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ZpSet(p={}, ", self.ctx.p)?;
        f.debug_set().entries(self.iter()).finish()?;
        write!(f, ")")
    }
}

impl Serialize for ZpSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ZpSet", 2)?;
        st.serialize_field("p", &self.ctx.p)?;
        st.serialize_field("members", &self.to_vec())?;
        st.end()
    }
}

/// `{q (a - x0) mod p : a ∈ A}`.
pub fn affine_dilate(a: &ZpSet, q: u64, x0: u64) -> Result<ZpSet> {
    let ctx = *a.context();
    let q = q % ctx.p;
    if q == 0 {
        return Err(Error::DegenerateDilation(ctx.p));
    }
    let x0 = x0 % ctx.p;
    Ok(ZpSet::from_residues(ctx, a.iter().map(|x| ctx.mul(q, (x + ctx.p - x0) % ctx.p))))
}

/// Members whose signed representative lies in `[-n, n]`.
pub fn interval_members(a: &ZpSet, n: u64) -> Result<ZpSet> {
    let ctx = *a.context();
    if n > ctx.half() {
        return Err(Error::WindowTooWide { n, p: ctx.p });
    }
    Ok(ZpSet::from_residues(
        ctx,
        a.iter().filter(|&r| min_abs_rep(r, &ctx).magnitude() <= n),
    ))
}

pub fn complement(a: &ZpSet) -> ZpSet {
    let ctx = *a.context();
    ZpSet::from_residues(ctx, (0..ctx.p).filter(|&r| !a.contains(r)))
}

/// Parses a comma-separated residue list such as `"0,1,4"` (whitespace and
/// negative values allowed; everything is reduced mod `p`).
pub fn parse_set_literal(ctx: PrimeContext, literal: &str) -> Result<ZpSet> {
    let values = parse_int_list(literal)?;
    Ok(ZpSet::from_integers(ctx, values))
}

/// Parses set-file contents: one integer per line, `#` starts a comment.
pub fn parse_set_file(ctx: PrimeContext, contents: &str) -> Result<ZpSet> {
    let mut values = Vec::new();
    for (lineno, line) in contents.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v = line.parse::<i64>().map_err(|e| Error::Parse {
            what: "set file",
            detail: format!("line {}: {line:?}: {e}", lineno + 1),
        })?;
        values.push(v);
    }
    Ok(ZpSet::from_integers(ctx, values))
}

/// Comma-separated integers; the empty string yields an empty list.
pub fn parse_int_list(s: &str) -> Result<Vec<i64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<i64>().map_err(|e| Error::Parse { what: "integer list", detail: format!("{t:?}: {e}") })
        })
        .collect()
}

fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u128;
    let mut b = (base % m) as u128;
    let m128 = m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Deterministic Miller–Rabin; the base set is exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n) as u128;
        if x == 1 || x == (n - 1) as u128 {
            continue;
        }
        for _ in 1..s {
            x = x * x % n as u128;
            if x == (n - 1) as u128 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
