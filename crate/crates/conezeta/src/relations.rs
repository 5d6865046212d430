//! Cone pairs, transposition, stuffle and shuffle subdivisions, the double
//! subdivision relation pipeline, numeric verification and symbolic reduction
//! over chain cones.

use crate::cones::{
    open_subdivision, split_by_hyperplane, facet_functionals, Cone, SpanCoords, Subdivision,
    SubdivisionKind,
};
use crate::decorated::{DecoratedClosedCone, DecoratedSum};
use crate::exactlin::{ints, z_basis_completion, Int, Rat, RatMatrix, RatVec};
use crate::zeta::{eval_open_czv, DecoratedOpenCone, ZetaResult};
use crate::{Error, Result};
use itertools::Itertools;
use num::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

pub type CanonKey = (Vec<Vec<Int>>, Vec<u32>);

/// A nonnegative unimodular matrix with exponents, giving an open cone on its
/// columns and a decorated closed cone on its rows with positive exponent.
#[derive(Clone, Debug)]
pub struct ConePair {
    rows: Vec<Vec<i64>>,
    s: Vec<u32>,
    open_side: DecoratedOpenCone,
    closed_side: DecoratedClosedCone,
}

impl ConePair {
    pub fn new(rows: &[Vec<i64>], s: &[u32]) -> Result<ConePair> {
        let r = rows.len();
        if r == 0 || rows.iter().any(|x| x.len() != r) {
            return Err(Error::Shape("matrix must be square and nonempty".into()));
        }
        if s.len() != r {
            return Err(Error::Shape("one exponent per row is required".into()));
        }
        if rows.iter().flatten().any(|&x| x < 0) {
            return Err(Error::Precondition("matrix entries must be nonnegative".into()));
        }
        let m = RatMatrix::from_i64_rows(rows)?;
        let det = m.determinant()?;
        if det.abs() != Rat::one() {
            return Err(Error::Precondition("matrix must be unimodular".into()));
        }
        let cols: Vec<Vec<i64>> = (0..r).map(|j| rows.iter().map(|x| x[j]).collect()).collect();
        let open_side = DecoratedOpenCone::from_i64(&cols, s)?;
        let decorated: Vec<(Vec<i64>, u32)> = rows
            .iter()
            .zip(s)
            .filter(|(_, &e)| e > 0)
            .map(|(g, &e)| (g.clone(), e))
            .collect();
        let closed_side = if decorated.is_empty() {
            DecoratedClosedCone::empty(r)
        } else {
            DecoratedClosedCone::from_i64(r, &decorated)?
        };
        Ok(ConePair {
            rows: rows.to_vec(),
            s: s.to_vec(),
            open_side,
            closed_side,
        })
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn exponents(&self) -> &[u32] {
        &self.s
    }

    pub fn open_side(&self) -> &DecoratedOpenCone {
        &self.open_side
    }

    pub fn closed_side(&self) -> &DecoratedClosedCone {
        &self.closed_side
    }
}

/// Transposition of a decorated closed smooth cone: complete the generators to
/// a nonnegative unimodular basis (completion rows carry exponent 0) and read
/// the columns as an open cone. Lattice sums are preserved.
pub fn transpose(d: &DecoratedClosedCone) -> Result<DecoratedOpenCone> {
    let r = d.ambient_dim();
    let gens: Vec<Vec<Int>> = d.items().iter().map(|(g, _)| g.clone()).collect();
    if gens.iter().flatten().any(|x| x.is_negative()) {
        return Err(Error::Precondition(
            "transpose needs nonnegative generators".into(),
        ));
    }
    let mut rows = gens.clone();
    if rows.len() < r {
        let m = RatMatrix::from_int_rows(&gens)?;
        let completion = z_basis_completion(&m)?;
        let range: i64 = if gens.len() <= 3 { 12 } else { 3 };
        for w in completion {
            let mut best: Option<Vec<Int>> = None;
            let k = gens.len();
            let mut coeffs = vec![-range; k];
            loop {
                let mut cand = w.clone();
                for (i, g) in gens.iter().enumerate() {
                    for j in 0..r {
                        cand[j] += &g[j] * Int::from(coeffs[i]);
                    }
                }
                if cand.iter().all(|x| !x.is_negative())
                    && best.as_ref().map_or(true, |b| cand < *b)
                {
                    best = Some(cand);
                }
                let mut level = k;
                let mut advanced = false;
                while level > 0 {
                    level -= 1;
                    if coeffs[level] < range {
                        coeffs[level] += 1;
                        for v in coeffs.iter_mut().skip(level + 1) {
                            *v = -range;
                        }
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    break;
                }
            }
            match best {
                Some(b) => rows.push(b),
                None => {
                    return Err(Error::Precondition(
                        "no nonnegative basis completion found".into(),
                    ))
                }
            }
        }
    }
    let m = RatMatrix::from_int_rows(&rows)?;
    if m.nrows() != r || m.determinant()?.abs() != Rat::one() {
        return Err(Error::Precondition(
            "generators do not extend to a unimodular basis".into(),
        ));
    }
    let cols: Vec<Vec<Int>> = (0..r)
        .map(|j| rows.iter().map(|x| x[j].clone()).collect())
        .collect();
    let mut s = vec![0u32; r];
    for (i, (_, e)) in d.items().iter().enumerate() {
        s[i] = *e;
    }
    DecoratedOpenCone::new(Cone::new(r, true, &cols)?, s)
}

/// The stuffle subdivision of the product of two open chain cones of depths k
/// and l, with pieces indexed by pairs of order preserving injections that
/// jointly cover the merged chain.
pub fn stuffle_subdivision(k: usize, l: usize) -> Result<Subdivision> {
    if k == 0 || l == 0 {
        return Err(Error::Precondition("depths must be positive".into()));
    }
    let dim = k + l;
    let mut parent_gens: Vec<Vec<i64>> = Vec::new();
    for i in 1..=k {
        let mut g = vec![0i64; dim];
        for j in 0..i {
            g[j] = 1;
        }
        parent_gens.push(g);
    }
    for i in 1..=l {
        let mut g = vec![0i64; dim];
        for j in 0..i {
            g[k + j] = 1;
        }
        parent_gens.push(g);
    }
    let parent = Cone::open_cone(dim, &parent_gens)?;
    let mut pieces = Vec::new();
    for m in k.max(l)..=(k + l) {
        for phi in (1..=m).combinations(k) {
            for psi in (1..=m).combinations(l) {
                let covered: BTreeSet<usize> =
                    phi.iter().chain(psi.iter()).copied().collect();
                if covered.len() != m {
                    continue;
                }
                let mut gens: Vec<Vec<i64>> = Vec::new();
                for j in 1..=m {
                    let mut g = vec![0i64; dim];
                    for (a, &pos) in phi.iter().enumerate() {
                        if pos <= j {
                            g[a] = 1;
                        }
                    }
                    for (b, &pos) in psi.iter().enumerate() {
                        if pos <= j {
                            g[k + b] = 1;
                        }
                    }
                    gens.push(g);
                }
                pieces.push(Cone::open_cone(dim, &gens)?);
            }
        }
    }
    pieces.sort();
    Ok(Subdivision {
        parent,
        pieces,
        kind: SubdivisionKind::Open,
    })
}

/// The decorated product of two closed chain cones together with its shuffle
/// subdivision, pushed through the algebraic subdivision operator.
pub fn shuffle_decomposition(s: &[u32], t: &[u32]) -> Result<DecoratedSum> {
    let k = s.len();
    let l = t.len();
    if k == 0 || l == 0 {
        return Err(Error::Precondition("depths must be positive".into()));
    }
    if s.iter().chain(t).any(|&e| e == 0) {
        return Err(Error::Precondition("exponents must be positive".into()));
    }
    let dim = k + l;
    let mut items: Vec<(Vec<i64>, u32)> = Vec::new();
    for i in 0..k {
        let mut g = vec![0i64; dim];
        for j in i..k {
            g[j] = 1;
        }
        items.push((g, s[i]));
    }
    for b in 0..l {
        let mut g = vec![0i64; dim];
        for j in b..l {
            g[k + j] = 1;
        }
        items.push((g, t[b]));
    }
    let d = DecoratedClosedCone::from_i64(dim, &items)?;
    // shuffles: merged chains keeping 0..k-1 and k..k+l-1 in order
    let mut pieces = Vec::new();
    for left_slots in (0..dim).combinations(k) {
        let slots: BTreeSet<usize> = left_slots.iter().copied().collect();
        let mut chain = vec![0usize; dim];
        let mut li = 0;
        let mut ri = 0;
        for (pos, c) in chain.iter_mut().enumerate() {
            if slots.contains(&pos) {
                *c = li;
                li += 1;
            } else {
                *c = k + ri;
                ri += 1;
            }
        }
        let mut gens: Vec<Vec<i64>> = Vec::new();
        for j in 0..dim {
            let mut g = vec![0i64; dim];
            for &coord in &chain[j..] {
                g[coord] = 1;
            }
            gens.push(g);
        }
        pieces.push(Cone::closed(dim, &gens)?);
    }
    pieces.sort();
    pieces.dedup();
    let geo = Subdivision {
        parent: d.underlying_cone(),
        pieces,
        kind: SubdivisionKind::Closed,
    };
    crate::decorated::algebraic_subdivide(&d, &geo)
}

/// Star subdivision of a closed cone wrapped as a Subdivision.
pub fn star_closed_subdivision(parent: &Cone, point: &[i64]) -> Result<Subdivision> {
    let pieces = parent.star_subdivide(&ints(point))?;
    Ok(Subdivision {
        parent: parent.clone(),
        pieces,
        kind: SubdivisionKind::Closed,
    })
}

/// Star subdivision of an open cone: subdivide the closure and restrict the
/// open parts of all faces to the open parent.
pub fn star_open_subdivision(parent: &Cone, point: &[i64]) -> Result<Subdivision> {
    if !parent.is_open() {
        return Err(Error::Precondition("parent must be open".into()));
    }
    let closed = star_closed_subdivision(&parent.closure(), point)?;
    open_subdivision(parent, &closed)
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub matrix: Vec<Vec<i64>>,
    pub s: Vec<u32>,
    pub open_pieces: usize,
    pub closed_terms: usize,
}

/// A formal rational combination of decorated open cones in the kernel of the
/// open zeta sum, produced by subtracting the transposed closed subdivision
/// from the open subdivision of a cone pair.
#[derive(Clone, Debug)]
pub struct Relation {
    pub terms: Vec<(Rat, DecoratedOpenCone)>,
    pub provenance: Provenance,
}

fn cancel(
    terms: impl IntoIterator<Item = (Rat, DecoratedOpenCone)>,
) -> Vec<(Rat, DecoratedOpenCone)> {
    let mut map: BTreeMap<CanonKey, (Rat, DecoratedOpenCone)> = BTreeMap::new();
    for (c, cone) in terms {
        let key = cone.canonical_key();
        match map.get_mut(&key) {
            Some((acc, _)) => *acc += c,
            None => {
                map.insert(key, (c, cone));
            }
        }
    }
    map.into_values().filter(|(c, _)| !c.is_zero()).collect()
}

/// Build the double subdivision relation of a pair from an open subdivision
/// of its open side and an algebraic subdivision of its closed side.
pub fn double_subdivision_relation(
    pair: &ConePair,
    open_div: &Subdivision,
    closed_sum: &DecoratedSum,
) -> Result<Relation> {
    if open_div.kind != SubdivisionKind::Open || open_div.parent != *pair.open_side().cone() {
        return Err(Error::Precondition(
            "open subdivision does not match the pair".into(),
        ));
    }
    let mut terms: Vec<(Rat, DecoratedOpenCone)> = Vec::new();
    for p in &open_div.pieces {
        terms.push((
            Rat::one(),
            DecoratedOpenCone::new(p.clone(), pair.exponents().to_vec())?,
        ));
    }
    let open_pieces = terms.len();
    let mut closed_terms = 0;
    for (d, c) in closed_sum.terms() {
        if d.ambient_dim() != pair.matrix().len() {
            return Err(Error::Precondition(
                "closed subdivision does not match the pair".into(),
            ));
        }
        terms.push((-c.clone(), transpose(d)?));
        closed_terms += 1;
    }
    Ok(Relation {
        terms: cancel(terms),
        provenance: Provenance {
            matrix: pair.matrix().to_vec(),
            s: pair.exponents().to_vec(),
            open_pieces,
            closed_terms,
        },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub total: f64,
    pub bound: f64,
    pub ok: bool,
    pub terms: Vec<ZetaResult>,
}

/// Evaluate every term of a relation and check that the combination vanishes
/// within the tolerance plus the accumulated error estimates. All terms must
/// be certified convergent.
pub fn verify_relation(rel: &Relation, depth: usize, tol: f64) -> Result<Verification> {
    let mut total = 0.0;
    let mut bound = tol;
    let mut results = Vec::new();
    for (c, cone) in &rel.terms {
        let z = eval_open_czv(cone, depth)?;
        if !z.certified {
            return Err(Error::Verification(
                "a relation term is not certified convergent".into(),
            ));
        }
        let cf = c
            .to_f64()
            .ok_or_else(|| Error::Domain("coefficient too large".into()))?;
        total += cf * z.value;
        bound += cf.abs() * z.error_estimate;
        results.push(z);
    }
    Ok(Verification {
        total,
        bound,
        ok: total.abs() <= bound,
        terms: results,
    })
}

/// Classify a decorated open cone as a scalar multiple of a multiple zeta
/// value: rays give a power of a single zeta, chain cones give an MZV tuple.
pub fn classify_mzv(doc: &DecoratedOpenCone) -> Option<(Vec<u32>, Rat)> {
    let gens = doc.cone().generators();
    let s = doc.exponents();
    if doc.cone().is_zero_cone() {
        return Some((Vec::new(), Rat::one()));
    }
    if gens.len() == 1 {
        let v = &gens[0];
        let mut total = 0u32;
        let mut scalar = Rat::one();
        for (j, x) in v.iter().enumerate() {
            if x.is_positive() {
                total += s[j];
                let mut p = Int::one();
                for _ in 0..s[j] {
                    p *= x;
                }
                scalar /= Rat::from_integer(p);
            }
        }
        return Some((vec![total], scalar));
    }
    // chain cone: 0/1 generators with nested supports of sizes 1..m
    let m = gens.len();
    let mut supports: Vec<BTreeSet<usize>> = Vec::new();
    for g in gens {
        let mut sup = BTreeSet::new();
        for (j, x) in g.iter().enumerate() {
            if x.is_one() {
                sup.insert(j);
            } else if !x.is_zero() {
                return None;
            }
        }
        supports.push(sup);
    }
    supports.sort_by_key(|s| s.len());
    let mut order = Vec::new();
    let mut prev: BTreeSet<usize> = BTreeSet::new();
    for (i, sup) in supports.iter().enumerate() {
        if sup.len() != i + 1 || !prev.is_subset(sup) {
            return None;
        }
        let added: Vec<usize> = sup.difference(&prev).copied().collect();
        order.push(added[0]);
        prev = sup.clone();
    }
    let _ = m;
    Some((order.iter().map(|&j| s[j]).collect(), Rat::one()))
}

fn chen_parent_order(c: &Cone) -> Option<Vec<usize>> {
    let dim = c.ambient_dim();
    for perm in (0..dim).permutations(dim) {
        let ok = c.generators().iter().all(|g| {
            (0..dim.saturating_sub(1)).all(|i| g[perm[i]] >= g[perm[i + 1]])
        });
        if ok {
            return Some(perm);
        }
    }
    None
}

fn chen_cone(dim: usize, order: &[usize], open: bool) -> Result<Cone> {
    let mut gens: Vec<Vec<Int>> = Vec::new();
    for i in 1..=dim {
        let mut g = vec![Int::zero(); dim];
        for &j in &order[..i] {
            g[j] = Int::one();
        }
        gens.push(g);
    }
    Cone::new(dim, open, &gens)
}

/// Rewrite one non-MZV term inside a chain cone parent: express the parent as
/// the disjoint union of open pieces obtained by cutting along the term's
/// facet hyperplanes, and solve for the term.
fn expand_in_chen_parent(
    doc: &DecoratedOpenCone,
) -> Result<Option<(DecoratedOpenCone, Vec<DecoratedOpenCone>)>> {
    let c = doc.cone();
    let dim = c.ambient_dim();
    if c.generators().len() != dim || c.dimension() != dim {
        return Ok(None);
    }
    let order = match chen_parent_order(c) {
        Some(o) => o,
        None => return Ok(None),
    };
    let p_closed = chen_cone(dim, &order, false)?;
    let p_open = chen_cone(dim, &order, true)?;
    let closure = c.closure();
    let span = SpanCoords::new(&closure)?;
    let facets = facet_functionals(&closure, &span)?;
    let mut pieces = vec![p_closed.clone()];
    for h in &facets {
        let mut next = Vec::new();
        for p in pieces {
            let (pos, neg) = split_by_hyperplane(&p, h)?;
            for side in [pos, neg] {
                if side.dimension() == dim {
                    next.push(side);
                }
            }
        }
        pieces = next;
    }
    let mut simplicial = Vec::new();
    for p in pieces {
        simplicial.extend(p.simplicialize()?.pieces);
    }
    simplicial.sort();
    simplicial.dedup();
    let sub = Subdivision {
        parent: p_closed,
        pieces: simplicial,
        kind: SubdivisionKind::Closed,
    };
    let open_div = open_subdivision(&p_open, &sub)?;
    let mut outside = Vec::new();
    let mut saw_inside = false;
    for piece in open_div.pieces {
        let interior: Vec<Rat> = {
            let mut pt = vec![Rat::zero(); dim];
            for g in piece.generators() {
                for j in 0..dim {
                    pt[j] += Rat::from_integer(g[j].clone());
                }
            }
            pt
        };
        if c.contains_point(&RatVec(interior))? {
            saw_inside = true;
        } else {
            outside.push(DecoratedOpenCone::new(piece, doc.exponents().to_vec())?);
        }
    }
    if !saw_inside {
        return Ok(None);
    }
    let parent = DecoratedOpenCone::new(p_open, doc.exponents().to_vec())?;
    Ok(Some((parent, outside)))
}

/// Symbolic reduction of a relation to a rational combination of multiple
/// zeta values, normalized by the coefficient of the minimal key (shortest
/// tuple, then lexicographic). Returns None when the rewriting does not
/// settle on chain cones and rays.
pub fn reduce_over_chen(rel: &Relation) -> Result<Option<BTreeMap<Vec<u32>, Rat>>> {
    let mut terms = rel.terms.clone();
    let mut rounds = 0;
    loop {
        let mut target: Option<usize> = None;
        for (i, (_, cone)) in terms.iter().enumerate() {
            if classify_mzv(cone).is_none() {
                target = Some(i);
                break;
            }
        }
        let Some(i) = target else { break };
        rounds += 1;
        if rounds > 60 {
            return Ok(None);
        }
        let (coeff, cone) = terms.remove(i);
        let Some((parent, outside)) = expand_in_chen_parent(&cone)? else {
            return Ok(None);
        };
        terms.push((coeff.clone(), parent));
        for piece in outside {
            terms.push((-coeff.clone(), piece));
        }
        terms = cancel(terms);
    }
    let mut out: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
    for (c, cone) in &terms {
        let (tuple, scalar) = classify_mzv(cone).expect("loop ended with all terms classified");
        let entry = out.entry(tuple).or_insert_with(Rat::zero);
        *entry += c * scalar;
    }
    out.retain(|_, v| !v.is_zero());
    let pivot = out
        .iter()
        .min_by_key(|(k, _)| (k.len(), (*k).clone()))
        .map(|(_, v)| v.clone());
    if let Some(p) = pivot {
        for v in out.values_mut() {
            *v /= &p;
        }
    }
    Ok(Some(out))
}

#[derive(Serialize)]
struct RelationTermJson {
    coeff: String,
    cone: Cone,
    s: Vec<u32>,
}

#[derive(Serialize)]
struct RelationJson {
    terms: Vec<RelationTermJson>,
    provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    mzv_form: Option<BTreeMap<String, String>>,
}

impl Relation {
    pub fn to_json(&self, mzv: Option<&BTreeMap<Vec<u32>, Rat>>) -> serde_json::Value {
        let terms = self
            .terms
            .iter()
            .map(|(c, cone)| RelationTermJson {
                coeff: crate::exactlin::rat_to_string(c),
                cone: cone.cone().clone(),
                s: cone.exponents().to_vec(),
            })
            .collect();
        let mzv_form = mzv.map(|m| {
            m.iter()
                .map(|(k, v)| {
                    let name = format!(
                        "zeta({})",
                        k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
                    );
                    (name, crate::exactlin::rat_to_string(v))
                })
                .collect()
        });
        serde_json::to_value(RelationJson {
            terms,
            provenance: self.provenance.clone(),
            mzv_form,
        })
        .expect("relation serialization cannot fail")
    }
}
