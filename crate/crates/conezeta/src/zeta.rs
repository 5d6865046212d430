//! Numeric evaluation of cone zeta sums by truncated lattice summation.
//!
//! All evaluators share one engine: a deterministic chunked Kahan summation
//! over a box of positive integer parameters. Chunk boundaries and the final
//! combine order are fixed, so the parallel and serial paths produce bit
//! identical results.

use crate::cones::{open_subdivision, Cone};
use crate::decorated::DecoratedClosedCone;
use crate::exactlin::{lex_cmp_ints, Int, Rat, RatVec};
use crate::{Error, Result};
use itertools::Itertools;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};
use std::collections::BTreeSet;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// An open cone with one exponent per ambient coordinate, summed over its
/// lattice points with the convention 0^s = 1 for coordinates that vanish.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct DecoratedOpenCone {
    cone: Cone,
    s: Vec<u32>,
}

impl DecoratedOpenCone {
    pub fn new(cone: Cone, s: Vec<u32>) -> Result<DecoratedOpenCone> {
        if !cone.is_open() {
            return Err(Error::Precondition("cone must be open".into()));
        }
        if s.len() != cone.ambient_dim() {
            return Err(Error::Shape(
                "one exponent per ambient coordinate is required".into(),
            ));
        }
        for g in cone.generators() {
            if g.iter().any(|x| x.is_negative()) {
                return Err(Error::Precondition(
                    "generators must lie in the closed first orthant".into(),
                ));
            }
        }
        Ok(DecoratedOpenCone { cone, s })
    }

    pub fn from_i64(gens: &[Vec<i64>], s: &[u32]) -> Result<DecoratedOpenCone> {
        let dim = s.len();
        DecoratedOpenCone::new(Cone::open_cone(dim, gens)?, s.to_vec())
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn exponents(&self) -> &[u32] {
        &self.s
    }

    /// Canonical representative under simultaneous permutation of the ambient
    /// coordinates of the generators and the exponent vector. Lattice sums
    /// are invariant under this action, so it is the right notion of equality
    /// for cancellation in relations.
    pub fn canonical_key(&self) -> (Vec<Vec<Int>>, Vec<u32>) {
        let dim = self.cone.ambient_dim();
        let mut best: Option<(Vec<Vec<Int>>, Vec<u32>)> = None;
        for perm in (0..dim).permutations(dim) {
            let mut gens: Vec<Vec<Int>> = self
                .cone
                .generators()
                .iter()
                .map(|g| perm.iter().map(|&j| g[j].clone()).collect())
                .collect();
            gens.sort_by(|a, b| lex_cmp_ints(a, b));
            let s: Vec<u32> = perm.iter().map(|&j| self.s[j]).collect();
            let cand = (gens, s);
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
        best.expect("at least the identity permutation")
    }

    /// The open pieces of a full smooth subdivision, in a fixed order.
    pub fn smooth_open_pieces(&self) -> Result<Vec<Cone>> {
        if self.cone.is_zero_cone() {
            return Ok(vec![self.cone.clone()]);
        }
        let closed = self.cone.closure().full_smooth_subdivision()?;
        let sub = open_subdivision(&self.cone, &closed)?;
        let mut pieces = sub.pieces;
        pieces.sort();
        Ok(pieces)
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct ZetaResult {
    pub value: f64,
    #[serde(rename = "N")]
    pub depth: usize,
    pub error_estimate: f64,
    pub certified: bool,
}

fn powneg(x: f64, s: u32) -> f64 {
    if s == 0 {
        return 1.0;
    }
    let mut p = x;
    for _ in 1..s {
        p *= x;
    }
    1.0 / p
}

const BLOCK: usize = 8;

struct SumSpec {
    /// One row per linear form: coefficients over the summation parameters.
    forms: Vec<Vec<f64>>,
    s: Vec<u32>,
    /// With `allow_zero` a vanishing form contributes a factor 1 (the 0^s = 1
    /// convention); without it a vanishing form poisons the sum with NaN.
    allow_zero: bool,
}

impl SumSpec {
    fn params(&self) -> usize {
        self.forms.first().map_or(0, |f| f.len())
    }

    fn point(&self, vals: &[f64]) -> f64 {
        let mut prod = 1.0;
        for (i, &v) in vals.iter().enumerate() {
            if v == 0.0 {
                if self.s[i] > 0 && !self.allow_zero {
                    return f64::NAN;
                }
            } else {
                prod *= powneg(v, self.s[i]);
            }
        }
        prod
    }

    fn recurse(&self, level: usize, vals: &mut Vec<Vec<f64>>, n: usize, sum: &mut f64, c: &mut f64) {
        let k = self.forms.len();
        if level == self.params() {
            let v = self.point(vals.last().expect("one frame per level"));
            let y = v - *c;
            let t = *sum + y;
            *c = (t - *sum) - y;
            *sum = t;
            return;
        }
        for _m in 1..=n {
            {
                let (prev, cur) = vals.split_at_mut(level + 1);
                let base = &prev[level];
                let cur = &mut cur[0];
                for i in 0..k {
                    cur[i] = base[i];
                }
            }
            for i in 0..k {
                vals[level + 1][i] += self.forms[i][level] * (_m as f64);
            }
            self.recurse(level + 1, vals, n, sum, c);
        }
    }

    fn block_sum(&self, m1_lo: usize, m1_hi: usize, n: usize) -> f64 {
        let k = self.forms.len();
        let r = self.params();
        let mut sum = 0.0;
        let mut c = 0.0;
        let mut vals: Vec<Vec<f64>> = vec![vec![0.0; k]; r + 1];
        for m1 in m1_lo..=m1_hi {
            for i in 0..k {
                vals[1][i] = self.forms[i][0] * (m1 as f64);
            }
            self.recurse(1, &mut vals, n, &mut sum, &mut c);
        }
        sum
    }

    fn sum(&self, n: usize) -> Result<f64> {
        let r = self.params();
        if r == 0 {
            // single (empty) summation point
            return Ok(self.point(&[]));
        }
        let blocks: Vec<(usize, usize)> = (1..=n)
            .step_by(BLOCK)
            .map(|lo| (lo, (lo + BLOCK - 1).min(n)))
            .collect();
        #[cfg(feature = "parallel")]
        let partials: Vec<f64> = blocks
            .par_iter()
            .map(|&(lo, hi)| self.block_sum(lo, hi, n))
            .collect();
        #[cfg(not(feature = "parallel"))]
        let partials: Vec<f64> = blocks
            .iter()
            .map(|&(lo, hi)| self.block_sum(lo, hi, n))
            .collect();
        let mut sum = 0.0;
        let mut c = 0.0;
        for v in partials {
            let y = v - c;
            let t = sum + y;
            c = (t - sum) - y;
            sum = t;
        }
        if sum.is_nan() {
            return Err(Error::Pole("a linear form vanishes on the summation range".into()));
        }
        Ok(sum)
    }
}

fn int_rows_to_f64(rows: &[Vec<Int>]) -> Result<Vec<Vec<f64>>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    x.to_f64()
                        .filter(|v| v.abs() < 9.0e15)
                        .ok_or_else(|| Error::Domain("entry too large for evaluation".into()))
                })
                .collect()
        })
        .collect()
}

/// Estimate the limit of a truncated sum from partial sums at depths N/2, N
/// and 2N. The tails here behave like (a + b log N)/N to leading order;
/// fitting that model at the three depths gives S_{N/2} + 4(S_{2N} - S_N),
/// which cancels both the 1/N and the (log N)/N terms.
fn extrapolate(s_half: f64, s_n: f64, s_2n: f64, depth: usize) -> f64 {
    if depth < 2 {
        return 2.0 * s_2n - s_n;
    }
    s_half + 4.0 * (s_2n - s_n)
}

/// Sufficient convergence test for a multiple sum of the shape
/// sum over m in Z^r_{>0} of prod_i (f_i . m)^{-s_i} with nonnegative forms:
/// for every nonempty subset J of parameters, the total exponent of the forms
/// meeting J must exceed |J|.
fn forms_converge(forms: &[Vec<Int>], s: &[u32]) -> bool {
    let r = forms.first().map_or(0, |f| f.len());
    if forms
        .iter()
        .any(|f| f.iter().any(|x| x.is_negative()))
    {
        return false;
    }
    for mask in 1u32..(1u32 << r) {
        let mut total: u64 = 0;
        for (i, f) in forms.iter().enumerate() {
            let meets = (0..r).any(|j| mask & (1 << j) != 0 && !f[j].is_zero());
            if meets {
                total += s[i] as u64;
            }
        }
        if total <= mask.count_ones() as u64 {
            return false;
        }
    }
    true
}

/// Forms of an open smooth piece: one per ambient coordinate, coefficients
/// indexed by the summation parameters (columns of the generator matrix).
fn piece_forms(piece: &Cone, s: &[u32]) -> (Vec<Vec<Int>>, Vec<u32>) {
    let gens = piece.generators();
    let dim = piece.ambient_dim();
    let forms: Vec<Vec<Int>> = (0..dim)
        .map(|j| gens.iter().map(|g| g[j].clone()).collect())
        .collect();
    (forms, s.to_vec())
}

pub fn is_convergent_sufficient(c: &DecoratedOpenCone) -> Result<bool> {
    if c.cone().is_zero_cone() {
        return Ok(true);
    }
    for piece in c.smooth_open_pieces()? {
        let (forms, s) = piece_forms(&piece, c.exponents());
        // drop zero forms with zero exponent, they contribute a factor 1
        let keep: Vec<usize> = (0..forms.len())
            .filter(|&i| s[i] > 0 || forms[i].iter().any(|x| !x.is_zero()))
            .collect();
        let forms: Vec<Vec<Int>> = keep.iter().map(|&i| forms[i].clone()).collect();
        let s2: Vec<u32> = keep.iter().map(|&i| s[i]).collect();
        if !forms_converge(&forms, &s2) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Truncated zeta sum of a decorated open cone: the lattice points of each
/// smooth open piece are parametrized by positive integer combinations of its
/// generators, truncated at the given depth.
pub fn eval_open_czv(c: &DecoratedOpenCone, depth: usize) -> Result<ZetaResult> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be positive".into()));
    }
    let certified = is_convergent_sufficient(c)?;
    if c.cone().is_zero_cone() {
        return Ok(ZetaResult {
            value: 1.0,
            depth,
            error_estimate: 0.0,
            certified,
        });
    }
    let mut s_half = 0.0;
    let mut s_n = 0.0;
    let mut s_2n = 0.0;
    for piece in c.smooth_open_pieces()? {
        let (forms, s) = piece_forms(&piece, c.exponents());
        let spec = SumSpec {
            forms: int_rows_to_f64(&forms)?,
            s,
            allow_zero: true,
        };
        s_half += spec.sum((depth / 2).max(1))?;
        s_n += spec.sum(depth)?;
        s_2n += spec.sum(2 * depth)?;
    }
    Ok(ZetaResult {
        value: extrapolate(s_half, s_n, s_2n, depth),
        depth,
        error_estimate: (s_2n - s_n).abs(),
        certified,
    })
}

/// Truncated zeta sum of a decorated closed smooth cone: the parameters run
/// over the ambient coordinates and the forms are the decorated generators.
pub fn eval_lzv(d: &DecoratedClosedCone, depth: usize) -> Result<ZetaResult> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be positive".into()));
    }
    if d.items().is_empty() {
        return Ok(ZetaResult {
            value: 1.0,
            depth,
            error_estimate: 0.0,
            certified: true,
        });
    }
    let forms: Vec<Vec<Int>> = d.items().iter().map(|(g, _)| g.clone()).collect();
    let s: Vec<u32> = d.items().iter().map(|(_, e)| *e).collect();
    for (f, e) in forms.iter().zip(&s) {
        if *e > 0 && f.iter().all(|x| x.is_zero()) {
            return Err(Error::Pole(format!("{:?}", f)));
        }
    }
    let certified = forms_converge(&forms, &s);
    let spec = SumSpec {
        forms: int_rows_to_f64(&forms)?,
        s: s.clone(),
        allow_zero: false,
    };
    let s_half = spec.sum((depth / 2).max(1))?;
    let s_n = spec.sum(depth)?;
    let s_2n = spec.sum(2 * depth)?;
    Ok(ZetaResult {
        value: extrapolate(s_half, s_n, s_2n, depth),
        depth,
        error_estimate: (s_2n - s_n).abs(),
        certified,
    })
}

/// Truncated Shintani sum for an arbitrary integer coefficient matrix: rows
/// are linear forms in the summation parameters.
pub fn eval_shintani(rows: &[Vec<i64>], s: &[u32], depth: usize) -> Result<ZetaResult> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be positive".into()));
    }
    if rows.len() != s.len() {
        return Err(Error::Shape("one exponent per matrix row is required".into()));
    }
    let r = rows.first().map_or(0, |x| x.len());
    if rows.iter().any(|x| x.len() != r) {
        return Err(Error::Shape("matrix rows differ in length".into()));
    }
    for (f, e) in rows.iter().zip(s) {
        if *e > 0 && f.iter().all(|&x| x == 0) {
            return Err(Error::Pole(format!("{:?}", f)));
        }
    }
    let int_rows: Vec<Vec<Int>> = rows
        .iter()
        .map(|x| x.iter().map(|&v| Int::from(v)).collect())
        .collect();
    let certified = forms_converge(&int_rows, s);
    let spec = SumSpec {
        forms: rows
            .iter()
            .map(|x| x.iter().map(|&v| v as f64).collect())
            .collect(),
        s: s.to_vec(),
        allow_zero: false,
    };
    let s_half = spec.sum((depth / 2).max(1))?;
    let s_n = spec.sum(depth)?;
    let s_2n = spec.sum(2 * depth)?;
    Ok(ZetaResult {
        value: extrapolate(s_half, s_n, s_2n, depth),
        depth,
        error_estimate: (s_2n - s_n).abs(),
        certified,
    })
}

/// Truncated multiple zeta value with the same parametrized truncation that
/// `eval_open_czv` uses on a standard nested chain cone, so identities proved
/// by subdivision hold exactly at every truncation depth.
pub fn mzv_partial(s: &[u32], depth: usize) -> Result<f64> {
    let k = s.len();
    if k == 0 {
        return Ok(1.0);
    }
    let forms: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| if j >= i { 1.0 } else { 0.0 }).collect())
        .collect();
    let spec = SumSpec {
        forms,
        s: s.to_vec(),
        allow_zero: false,
    };
    spec.sum(depth)
}

pub fn mzv(s: &[u32], depth: usize) -> Result<ZetaResult> {
    let s_half = mzv_partial(s, (depth / 2).max(1))?;
    let s_n = mzv_partial(s, depth)?;
    let s_2n = mzv_partial(s, 2 * depth)?;
    Ok(ZetaResult {
        value: extrapolate(s_half, s_n, s_2n, depth),
        depth,
        error_estimate: (s_2n - s_n).abs(),
        certified: s.first().map_or(true, |&x| x >= 2),
    })
}

/// Lattice points of a cone inside the box [0, b]^dim, found by direct
/// membership tests. Exact and slow, intended as an oracle.
pub fn lattice_points_box(c: &Cone, b: i64) -> Result<Vec<Vec<i64>>> {
    let dim = c.ambient_dim();
    let mut out = Vec::new();
    let mut idx = vec![0i64; dim];
    loop {
        let x = RatVec(idx.iter().map(|&v| Rat::from_integer(Int::from(v))).collect());
        if c.contains_point(&x)? {
            out.push(idx.clone());
        }
        let mut level = dim;
        loop {
            if level == 0 {
                return Ok(out);
            }
            level -= 1;
            if idx[level] < b {
                idx[level] += 1;
                for v in idx.iter_mut().skip(level + 1) {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// Lattice points of an open cone inside the box [0, b]^dim, produced by the
/// piecewise parametrization that the evaluator sums over. Returns an error
/// if two pieces produce the same point.
pub fn lattice_points_param(c: &DecoratedOpenCone, b: i64) -> Result<Vec<Vec<i64>>> {
    let dim = c.cone().ambient_dim();
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    for piece in c.smooth_open_pieces()? {
        if piece.is_zero_cone() {
            if !seen.insert(vec![0; dim]) {
                return Err(Error::Verification("pieces overlap".into()));
            }
            continue;
        }
        let gens = piece.generators();
        let r = gens.len();
        let mut m = vec![1i64; r];
        'outer: loop {
            let mut p = vec![Int::zero(); dim];
            for (i, g) in gens.iter().enumerate() {
                for j in 0..dim {
                    p[j] += &g[j] * Int::from(m[i]);
                }
            }
            let small: Option<Vec<i64>> = p.iter().map(|x| x.to_i64()).collect();
            if let Some(pt) = small {
                if pt.iter().all(|&v| v <= b) && !seen.insert(pt) {
                    return Err(Error::Verification("pieces overlap".into()));
                }
            }
            let mut level = r;
            loop {
                if level == 0 {
                    break 'outer;
                }
                level -= 1;
                if m[level] < b {
                    m[level] += 1;
                    for v in m.iter_mut().skip(level + 1) {
                        *v = 1;
                    }
                    break;
                }
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Exact rational sum of prod_j p_j^{-s_j} (with 0^s = 1) over a point set.
pub fn exact_sum(points: &[Vec<i64>], s: &[u32]) -> Rat {
    let mut total = Rat::zero();
    for p in points {
        let mut denom = Int::one();
        for (j, &v) in p.iter().enumerate() {
            if v != 0 {
                for _ in 0..s[j] {
                    denom *= Int::from(v);
                }
            }
        }
        total += Rat::new(Int::one(), denom);
    }
    total
}

#[derive(Serialize, Deserialize)]
struct OpenConeJson {
    cone: Cone,
    s: Vec<u32>,
}

impl Serialize for DecoratedOpenCone {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OpenConeJson {
            cone: self.cone.clone(),
            s: self.s.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DecoratedOpenCone {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let j = OpenConeJson::deserialize(deserializer)?;
        DecoratedOpenCone::new(j.cone, j.s).map_err(D::Error::custom)
    }
}
