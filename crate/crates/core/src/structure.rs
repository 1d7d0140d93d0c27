//! Generalized arithmetic progressions and dilate search.
//!
//! The lattice-pigeonhole step that shrinks the generators of a progression
//! into short windows is carried out by exhaustive search over `q ∈ Z_p^*`,
//! which at the sizes handled here is exact.

use std::fmt;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::util::big_as_string;
use crate::zp::{affine_dilate, interval_members, min_abs_rep, parse_int_list, PrimeContext, ZpSet};
use crate::{Error, Result};

/// Largest `Π w_i` that [`gap_enumerate`] will expand.
pub const GAP_ENUMERATION_CAP: u64 = 10_000_000;

/// `P(x0; x̄; w̄) = {x0 + Σ v_i x_i : 0 ≤ v_i < w_i}` in `Z_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapDescriptor {
    ctx: PrimeContext,
    x0: u64,
    generators: Vec<u64>,
    widths: Vec<u64>,
}

impl GapDescriptor {
    pub fn new(ctx: PrimeContext, x0: i64, generators: &[i64], widths: &[u64]) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::invalid("a progression needs at least one generator"));
        }
        if generators.len() != widths.len() {
            return Err(Error::LengthMismatch { expected: generators.len(), got: widths.len() });
        }
        let gens: Vec<u64> = generators.iter().map(|&g| ctx.reduce(g)).collect();
        if let Some(i) = gens.iter().position(|&g| g == 0) {
            return Err(Error::invalid(format!("generator {} is 0 mod {}", generators[i], ctx.p())));
        }
        if widths.contains(&0) {
            return Err(Error::invalid("widths must be positive"));
        }
        Ok(Self { ctx, x0: ctx.reduce(x0), generators: gens, widths: widths.to_vec() })
    }

    /// Parses `"x0; x1,…,xd; w1,…,wd"`.
    pub fn parse(ctx: PrimeContext, literal: &str) -> Result<Self> {
        let parts: Vec<&str> = literal.split(';').collect();
        if parts.len() != 3 {
            return Err(Error::Parse { what: "GAP literal", detail: format!("expected 'x0; gens; widths', got {literal:?}") });
        }
        let x0 = parts[0]
            .trim()
            .parse::<i64>()
            .map_err(|e| Error::Parse { what: "GAP base point", detail: e.to_string() })?;
        let gens = parse_int_list(parts[1])?;
        let widths = parse_int_list(parts[2])?
            .into_iter()
            .map(|w| u64::try_from(w).map_err(|_| Error::invalid(format!("width {w} must be positive"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ctx, x0, &gens, &widths)
    }

    pub fn context(&self) -> &PrimeContext {
        &self.ctx
    }

    pub fn x0(&self) -> u64 {
        self.x0
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn widths(&self) -> &[u64] {
        &self.widths
    }

    pub fn dimension(&self) -> usize {
        self.generators.len()
    }

    /// `Π w_i`.
    pub fn size(&self) -> BigUint {
        self.widths.iter().map(|&w| BigUint::from(w)).product()
    }
}

impl fmt::Display for GapDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        write!(f, "{}; {}; {}", self.x0, join(&self.generators), join(&self.widths))
    }
}

impl Serialize for GapDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("GapDescriptor", 5)?;
        st.serialize_field("x0", &self.x0)?;
        st.serialize_field("generators", &self.generators)?;
        st.serialize_field("widths", &self.widths)?;
        st.serialize_field("dimension", &self.dimension())?;
        st.serialize_field("size", &self.size().to_string())?;
        st.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapEnumeration {
    pub set: ZpSet,
    #[serde(serialize_with = "big_as_string")]
    pub size: BigUint,
    /// All `Π w_i` combinations give distinct residues.
    pub proper: bool,
}

pub fn gap_enumerate(gap: &GapDescriptor) -> Result<GapEnumeration> {
    let size = gap.size();
    if size > BigUint::from(GAP_ENUMERATION_CAP) {
        return Err(Error::Budget(format!("GAP size {size} exceeds enumeration cap {GAP_ENUMERATION_CAP}")));
    }
    let ctx = gap.ctx;
    let mut points = vec![gap.x0];
    for (&g, &w) in gap.generators.iter().zip(&gap.widths) {
        let mut next = Vec::with_capacity(points.len() * w as usize);
        for &base in &points {
            let mut x = base;
            for _ in 0..w {
                next.push(x);
                x = (x + g) % ctx.p();
            }
        }
        points = next;
    }
    let set = ZpSet::from_residues(ctx, points.iter().copied());
    let proper = set.len() == points.len();
    Ok(GapEnumeration { set, size, proper })
}

/// A dilation `q` with `|q·x_i| ≤ t_i` for every generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DilateWitness {
    pub q: u64,
    /// `|q·x_i|` as signed-representative magnitudes.
    pub achieved: Vec<u64>,
    pub targets: Vec<u64>,
}

/// Smallest `q ∈ {1, …, p−1}` with `|q·x_i| ≤ t_i` for all `i`, or `None`.
pub fn find_dilate(ctx: &PrimeContext, generators: &[u64], targets: &[u64]) -> Result<Option<DilateWitness>> {
    if generators.len() != targets.len() {
        return Err(Error::LengthMismatch { expected: generators.len(), got: targets.len() });
    }
    if generators.iter().any(|&g| g % ctx.p() == 0) {
        return Err(Error::invalid("generators must be nonzero mod p"));
    }
    if let Some(&t) = targets.iter().find(|&&t| t == 0 || t > ctx.half()) {
        return Err(Error::invalid(format!("target {t} must satisfy 1 <= t < p/2")));
    }
    let magnitudes = |q: u64| generators.iter().map(move |&g| min_abs_rep(ctx.mul(q, g), ctx).magnitude());
    let hit = (1..ctx.p())
        .into_par_iter()
        .find_first(|&q| magnitudes(q).zip(targets).all(|(m, &t)| m <= t));
    Ok(hit.map(|q| DilateWitness { q, achieved: magnitudes(q).collect(), targets: targets.to_vec() }))
}

#[derive(Debug, Clone, Serialize)]
pub struct BlichfeldtParams {
    /// `α_i = (|A|/p)^{1/d} / w_i`.
    pub alphas: Vec<f64>,
    /// `⌊p·α_i⌋`.
    pub targets: Vec<u64>,
    /// `⌊d_ε · p · (|A|/p)^{1/d_ε}⌋`.
    pub m: u64,
    /// `m == 0`.
    pub degenerate: bool,
}

pub fn blichfeldt_params(a_size: u64, ctx: &PrimeContext, gap: &GapDescriptor, d_eps: f64) -> Result<BlichfeldtParams> {
    let p = ctx.p();
    if a_size == 0 || a_size > p {
        return Err(Error::invalid(format!("set size {a_size} must lie in [1, p]")));
    }
    if !(d_eps > 0.0 && d_eps.is_finite()) {
        return Err(Error::invalid(format!("d_eps = {d_eps} must be positive")));
    }
    let density = a_size as f64 / p as f64;
    let d = gap.dimension() as f64;
    let alphas: Vec<f64> = gap.widths.iter().map(|&w| density.powf(1.0 / d) / w as f64).collect();
    let targets = alphas.iter().map(|a| (p as f64 * a).floor() as u64).collect();
    let m = localization_radius(a_size, p, d_eps);
    Ok(BlichfeldtParams { alphas, targets, m, degenerate: m == 0 })
}

/// `⌊d · p · (|A|/p)^{1/d}⌋`, `0` when `d` is not positive.
pub fn localization_radius(a_size: u64, p: u64, d_eps: f64) -> u64 {
    if !(d_eps > 0.0) {
        return 0;
    }
    let v = d_eps * p as f64 * (a_size as f64 / p as f64).powf(1.0 / d_eps);
    if v.is_finite() && v > 0.0 {
        v.floor().min(u64::MAX as f64) as u64
    } else {
        0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Localization {
    pub x0: u64,
    pub q: u64,
    pub m: u64,
    /// `B = q(A − x0)`.
    pub set: ZpSet,
    /// `|B ∩ [-m, m]|`.
    pub captured: usize,
    pub search_space: &'static str,
}

const LOCALIZE_SEARCH_SPACE: &str = "q over Z_p^*, x0 over elements of A";

/// Maximises `|q(A − x0) ∩ [-m, m]|` over `q ∈ Z_p^*` and `x0 ∈ A`; ties go
/// to the smallest `q`, then the smallest `x0`.
pub fn localize(a: &ZpSet, m: u64) -> Result<Localization> {
    let ctx = *a.context();
    if m == 0 || m > ctx.half() {
        return Err(Error::invalid(format!("m = {m} must satisfy 1 <= m < p/2 (p = {})", ctx.p())));
    }
    if a.is_empty() {
        return Ok(Localization { x0: 0, q: 1, m, set: a.clone(), captured: 0, search_space: LOCALIZE_SEARCH_SPACE });
    }
    let elems = a.to_vec();
    let p = ctx.p() as i64;
    let per_q: Vec<(usize, u64)> = (1..ctx.p())
        .into_par_iter()
        .map(|q| {
            let mut ys: Vec<i64> = elems.iter().map(|&x| ctx.mul(q, x) as i64).collect();
            ys.sort_unstable();
            let ext: Vec<i64> = ys.iter().map(|y| y - p).chain(ys.iter().copied()).chain(ys.iter().map(|y| y + p)).collect();
            let mut best = (0usize, u64::MAX);
            for &x0 in &elems {
                let y0 = ctx.mul(q, x0) as i64;
                let lo = ext.partition_point(|&y| y < y0 - m as i64);
                let hi = ext.partition_point(|&y| y <= y0 + m as i64);
                let count = hi - lo;
                if count > best.0 {
                    best = (count, x0);
                }
            }
            best
        })
        .collect();
    let (qi, &(captured, x0)) = per_q
        .iter()
        .enumerate()
        .fold((0usize, &per_q[0]), |acc, (i, cand)| if cand.0 > acc.1 .0 { (i, cand) } else { acc });
    let q = qi as u64 + 1;
    let set = affine_dilate(a, q, x0)?;
    debug_assert_eq!(interval_members(&set, m)?.len(), captured);
    Ok(Localization { x0, q, m, set, captured, search_space: LOCALIZE_SEARCH_SPACE })
}

/// Best one-dimensional progression of a given length.
#[derive(Debug, Clone, Serialize)]
pub struct ApScan {
    pub gap: GapDescriptor,
    /// `|A ∩ P|`.
    pub hits: usize,
    /// `|A ∩ P| / |A|`.
    pub ratio: f64,
}

/// Heuristic scan over all progressions `{x0 + v·s : 0 ≤ v < len}` for the
/// one meeting `A` most often; smallest step `s`, then smallest `x0`, wins ties.
pub fn best_ap_scan(a: &ZpSet, len: u64) -> Result<ApScan> {
    let ctx = *a.context();
    if a.is_empty() {
        return Err(Error::invalid("cannot scan an empty set"));
    }
    if len == 0 || len > ctx.p() {
        return Err(Error::invalid(format!("length {len} must lie in [1, p]")));
    }
    let elems = a.to_vec();
    let p = ctx.p() as i64;
    // Progressions with step s and -s coincide up to the base point.
    let per_step: Vec<(usize, u64)> = (1..=ctx.half())
        .into_par_iter()
        .map(|s| {
            let inv = ctx.inverse(s).expect("nonzero step");
            let mut ys: Vec<(i64, u64)> = elems.iter().map(|&x| (ctx.mul(inv, x) as i64, x)).collect();
            ys.sort_unstable();
            let ext: Vec<i64> = ys.iter().map(|y| y.0).chain(ys.iter().map(|y| y.0 + p)).collect();
            let mut best = (0usize, u64::MAX);
            for &(y0, x0) in &ys {
                let lo = ext.partition_point(|&y| y < y0);
                let hi = ext.partition_point(|&y| y < y0 + len as i64);
                let count = hi - lo;
                if count > best.0 || (count == best.0 && x0 < best.1) {
                    best = (count, x0);
                }
            }
            best
        })
        .collect();
    let (si, &(hits, x0)) = per_step
        .iter()
        .enumerate()
        .fold((0usize, &per_step[0]), |acc, (i, cand)| if cand.0 > acc.1 .0 { (i, cand) } else { acc });
    let gap = GapDescriptor::new(ctx, x0 as i64, &[si as i64 + 1], &[len])?;
    Ok(ApScan { gap, hits, ratio: hits as f64 / a.len() as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suites::dilate_oracle;
    use proptest::prelude::*;

    fn ctx(p: u64) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    #[test]
    fn gap_examples() {
        let k = ctx(101);
        let e = gap_enumerate(&GapDescriptor::new(k, 0, &[1], &[7]).unwrap()).unwrap();
        assert_eq!(e.set, ZpSet::from_residues(k, 0..7));
        let e = gap_enumerate(&GapDescriptor::new(k, 0, &[1, 10], &[3, 2]).unwrap()).unwrap();
        assert_eq!(e.set.to_vec(), vec![0, 1, 2, 10, 11, 12]);
        assert!(e.proper);
        let k5 = ctx(5);
        let e = gap_enumerate(&GapDescriptor::new(k5, 1, &[2], &[3]).unwrap()).unwrap();
        assert_eq!(e.set, ZpSet::from_residues(k5, [1, 3, 0]));
        let e = gap_enumerate(&GapDescriptor::new(k5, 0, &[1], &[7]).unwrap()).unwrap();
        assert!(!e.proper);
        assert_eq!(e.size, BigUint::from(7u32));
        assert!(matches!(
            gap_enumerate(&GapDescriptor::new(k, 0, &[1, 2], &[10_000, 10_000]).unwrap()),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn gap_literals() {
        let k = ctx(101);
        let g = GapDescriptor::parse(k, "3; 1, 10; 3,2").unwrap();
        assert_eq!((g.x0(), g.generators(), g.widths()), (3, &[1u64, 10][..], &[3u64, 2][..]));
        assert_eq!(GapDescriptor::parse(k, &g.to_string()).unwrap(), g);
        assert!(GapDescriptor::parse(k, "0; 101; 3").is_err());
        assert!(GapDescriptor::parse(k, "0; 1; 0").is_err());
        assert!(GapDescriptor::parse(k, "0; 1,2; 3").is_err());
        assert!(GapDescriptor::parse(k, "0; 1").is_err());
    }

    #[test]
    fn dilate_examples() {
        let w = find_dilate(&ctx(11), &[3], &[1]).unwrap().unwrap();
        assert_eq!((w.q, w.achieved.clone()), (4, vec![1]));
        assert_eq!(find_dilate(&ctx(7), &[1], &[1]).unwrap().unwrap().q, 1);
        assert_eq!(find_dilate(&ctx(13), &[2, 3], &[6, 6]).unwrap().unwrap().q, 1);
        assert!(find_dilate(&ctx(13), &[0], &[1]).is_err());
        assert!(find_dilate(&ctx(13), &[1], &[7]).is_err());
        assert!(find_dilate(&ctx(13), &[1], &[0]).is_err());
    }

    #[test]
    fn dilate_not_found() {
        // Needs |q| ≤ 1 and |2q| ≤ 1 at once: impossible for q ≠ 0.
        assert_eq!(find_dilate(&ctx(101), &[1, 2], &[1, 1]).unwrap(), None);
        assert_eq!(dilate_oracle(&ctx(101), &[1, 2], &[1, 1]), None);
    }

    #[test]
    fn blichfeldt_param_examples() {
        let k = ctx(1009);
        let g = GapDescriptor::new(k, 0, &[1], &[504]).unwrap();
        let r = blichfeldt_params(504, &k, &g, 1.0).unwrap();
        assert!((r.alphas[0] - (504.0 / 1009.0) / 504.0).abs() < 1e-15);
        assert!((r.alphas[0] - 0.000991).abs() < 1e-6);
        assert_eq!(r.m, 504);
        let full = blichfeldt_params(1009, &k, &GapDescriptor::new(k, 0, &[1, 2], &[4, 5]).unwrap(), 2.5).unwrap();
        assert_eq!(full.alphas, vec![0.25, 0.2]);
        assert_eq!(full.m, (2.5f64 * 1009.0).floor() as u64);
        let tiny = blichfeldt_params(1, &k, &g, 0.05).unwrap();
        assert!(tiny.degenerate);
        assert!(blichfeldt_params(0, &k, &g, 1.0).is_err());
        assert!(blichfeldt_params(5, &k, &g, 0.0).is_err());
    }

    #[test]
    fn localize_examples() {
        let k = ctx(101);
        let ap = ZpSet::from_residues(k, 0..9);
        let r = localize(&ap, 10).unwrap();
        assert_eq!((r.q, r.x0, r.captured), (1, 0, 9));

        // {0,5,10} is 5·{0,1,2}; q = 6 maps it to {0,-1,-2}.
        let k31 = ctx(31);
        let a = ZpSet::from_residues(k31, [0, 5, 10]);
        let r = localize(&a, 2).unwrap();
        assert_eq!((r.q, r.x0, r.captured), (6, 0, 3));
        assert_eq!(r.set, ZpSet::from_integers(k31, [0, -1, -2]));
        assert_eq!(interval_members(&affine_dilate(&a, 25, 0).unwrap(), 2).unwrap().len(), 3);

        let a = ZpSet::from_residues(k31, [3, 17, 29]);
        assert_eq!(localize(&a, 15).unwrap().captured, 3);
        assert!(localize(&a, 16).is_err());
        assert!(localize(&a, 0).is_err());
    }

    #[test]
    fn ap_scan_finds_hidden_progression() {
        let k = ctx(101);
        // 7·{0..9} plus noise.
        let a = ZpSet::from_residues(k, (0..10).map(|v| 7 * v).chain([50, 51, 83]));
        let r = best_ap_scan(&a, 10).unwrap();
        assert_eq!(r.hits, 10);
        assert_eq!(r.gap.generators(), &[7]);
        let members = gap_enumerate(&r.gap).unwrap().set;
        assert!(members.iter().all(|x| a.contains(x)));
    }

    proptest! {
        #[test]
        fn find_dilate_matches_oracle(p_idx in 0usize..6, gens in proptest::collection::vec(1u64..1000, 1..4), t in proptest::collection::vec(1u64..60, 3)) {
            let p = [11u64, 31, 101, 211, 503, 1009][p_idx];
            let k = ctx(p);
            let gens: Vec<u64> = gens.iter().map(|g| (g % (p - 1)) + 1).collect();
            let targets: Vec<u64> = t[..gens.len()].iter().map(|&x| x.min(k.half())).collect();
            let got = find_dilate(&k, &gens, &targets).unwrap();
            prop_assert_eq!(got.as_ref().map(|w| w.q), dilate_oracle(&k, &gens, &targets));
            if let Some(w) = got {
                prop_assert!(w.achieved.iter().zip(&w.targets).all(|(a, t)| a <= t));
            }
        }

        #[test]
        fn gap_image_bound(p_idx in 0usize..3, x0 in 0i64..500, gens in proptest::collection::vec(1i64..500, 1..4), widths in proptest::collection::vec(1u64..6, 3), q in 1u64..500) {
            let p = [101u64, 211, 503][p_idx];
            let k = ctx(p);
            let gens: Vec<i64> = gens.iter().map(|g| g % (p as i64 - 1) + 1).collect();
            let gap = GapDescriptor::new(k, x0, &gens, &widths[..gens.len()]).unwrap();
            let q = q % (p - 1) + 1;
            let bound: u64 = gap.generators().iter().zip(gap.widths()).map(|(&g, &w)| w * min_abs_rep(k.mul(q, g), &k).magnitude()).sum();
            for x in gap_enumerate(&gap).unwrap().set.iter() {
                let image = min_abs_rep(k.mul(q, (x + p - gap.x0()) % p), &k).magnitude();
                prop_assert!(image < bound.max(1) || (image == 0 && bound == 0));
            }
        }

        #[test]
        fn localize_is_optimal_on_its_grid(members in proptest::collection::btree_set(0u64..53, 1..8), m in 1u64..26) {
            let k = ctx(53);
            let a = ZpSet::from_residues(k, members);
            let r = localize(&a, m).unwrap();
            let mut best = 0;
            for q in 1..53 {
                for x0 in a.iter() {
                    best = best.max(interval_members(&affine_dilate(&a, q, x0).unwrap(), m).unwrap().len());
                }
            }
            prop_assert_eq!(r.captured, best);
            prop_assert_eq!(interval_members(&r.set, m).unwrap().len(), r.captured);
        }
    }
}
