//! Rational polyhedral cones in V-representation, their face structure, and
//! the subdivision engines: simplicialization, smooth (unimodular)
//! subdivision, common refinement and open subdivision, plus a lattice-point
//! box oracle for checking subdivisions.

use crate::exactlin::{
    lattice_index, lex_cmp_ints, nullspace, primitive, saturation_basis, subsets_of_size, Int, Rat,
    RatMatrix, RatVec,
};
use crate::{Error, Result};
use num::{BigInt, One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeSet;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Cone {
    ambient_dim: usize,
    open: bool,
    generators: Vec<Vec<Int>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SubdivisionKind {
    Closed,
    Open,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subdivision {
    pub parent: Cone,
    pub pieces: Vec<Cone>,
    pub kind: SubdivisionKind,
}

impl Cone {
    pub fn new(ambient_dim: usize, open: bool, generators: &[Vec<Int>]) -> Result<Cone> {
        let mut gens: Vec<Vec<Int>> = Vec::new();
        for g in generators {
            if g.len() != ambient_dim {
                return Err(Error::Shape(format!(
                    "generator has length {}, ambient dimension is {}",
                    g.len(),
                    ambient_dim
                )));
            }
            match primitive(g) {
                Some(p) => gens.push(p),
                None => return Err(Error::Domain("zero vector as generator".into())),
            }
        }
        gens.sort_by(|a, b| lex_cmp_ints(a, b));
        gens.dedup();
        Ok(Cone {
            ambient_dim,
            open,
            generators: gens,
        })
    }

    pub fn closed(ambient_dim: usize, gens: &[Vec<i64>]) -> Result<Cone> {
        let g: Vec<Vec<Int>> = gens
            .iter()
            .map(|v| v.iter().map(|&x| Int::from(x)).collect())
            .collect();
        Cone::new(ambient_dim, false, &g)
    }

    pub fn open_cone(ambient_dim: usize, gens: &[Vec<i64>]) -> Result<Cone> {
        let g: Vec<Vec<Int>> = gens
            .iter()
            .map(|v| v.iter().map(|&x| Int::from(x)).collect())
            .collect();
        Cone::new(ambient_dim, true, &g)
    }

    pub fn zero(ambient_dim: usize, open: bool) -> Cone {
        Cone {
            ambient_dim,
            open,
            generators: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn generators(&self) -> &[Vec<Int>] {
        &self.generators
    }

    pub fn closure(&self) -> Cone {
        Cone {
            open: false,
            ..self.clone()
        }
    }

    pub fn with_open(&self, open: bool) -> Cone {
        Cone {
            open,
            ..self.clone()
        }
    }

    pub fn is_zero_cone(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generator_matrix(&self) -> Result<RatMatrix> {
        if self.generators.is_empty() {
            return Err(Error::Shape("zero cone has no generator matrix".into()));
        }
        RatMatrix::from_int_rows(&self.generators)
    }

    pub fn dimension(&self) -> usize {
        if self.generators.is_empty() {
            return 0;
        }
        self.generator_matrix().expect("nonempty").rank()
    }

    /// Generators with those lying in the cone of the others removed.
    pub fn minimal_generators(&self) -> Vec<Vec<Int>> {
        let mut kept: Vec<Vec<Int>> = self.generators.clone();
        let mut i = 0;
        while i < kept.len() {
            let candidate = kept[i].clone();
            let others: Vec<Vec<Int>> = kept
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, g)| g.clone())
                .collect();
            if in_nonneg_span(&others, &RatVec::from_ints(&candidate), self.ambient_dim) {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        kept
    }

    /// Smoothness: the (redundancy-free) generators are independent and span
    /// a primitive sublattice. Returns the primary generating set when smooth.
    pub fn is_smooth(&self) -> Option<Vec<Vec<Int>>> {
        if self.generators.is_empty() {
            return Some(Vec::new());
        }
        let minimal = self.minimal_generators();
        let m = RatMatrix::from_int_rows(&minimal).ok()?;
        if m.rank() != minimal.len() {
            return None;
        }
        if lattice_index(&m).ok()? != Int::one() {
            return None;
        }
        Some(minimal)
    }

    pub fn is_simplicial(&self) -> bool {
        if self.generators.is_empty() {
            return true;
        }
        let m = self.generator_matrix().expect("nonempty");
        m.rank() == self.generators.len()
    }

    pub fn contains_point(&self, x: &RatVec) -> Result<bool> {
        if x.dim() != self.ambient_dim {
            return Err(Error::Shape("point dimension mismatch".into()));
        }
        if self.generators.is_empty() {
            return Ok(x.is_zero());
        }
        if !self.open {
            return Ok(in_nonneg_span(&self.generators, x, self.ambient_dim));
        }
        // relative interior of the closure
        let closure = self.closure();
        let span = SpanCoords::new(&closure)?;
        if span.coords(x).is_none() {
            return Ok(false);
        }
        for h in facet_functionals(&closure, &span)? {
            if int_covector_apply(&h, x) <= Rat::zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Maximal subspace contained in the (closed) cone, if any, together with
    /// the strongly convex projection onto its orthogonal complement within
    /// the span.
    pub fn contains_line(&self) -> Result<Option<(Vec<Vec<Int>>, Cone)>> {
        if self.open {
            return Err(Error::Precondition("contains_line expects a closed cone".into()));
        }
        if self.generators.is_empty() {
            return Ok(None);
        }
        let span = SpanCoords::new(self)?;
        let facets = facet_functionals(self, &span)?;
        // lineality = span ∩ {h = 0 for all facet functionals}
        let mut rows: Vec<RatVec> = facets.iter().map(|h| RatVec::from_ints(h)).collect();
        // restrict to the span: add equations cutting out the span itself
        let span_cut = nullspace(&span.basis_rows(), self.ambient_dim);
        rows.extend(span_cut);
        let lin = nullspace(&rows, self.ambient_dim);
        if lin.is_empty() {
            return Ok(None);
        }
        let lbasis: Vec<Vec<Int>> = lin
            .iter()
            .map(|v| v.to_primitive_ints().expect("nonzero basis vector"))
            .collect();
        // project generators orthogonally to the lineality space
        let lmat = RatMatrix::from_int_rows(&lbasis)?;
        let gram = lmat.mul(&lmat.transpose())?;
        let gram_inv = gram.inverse()?;
        let mut proj_gens: Vec<Vec<Int>> = Vec::new();
        for g in &self.generators {
            let gv = RatVec::from_ints(g);
            let coeffs = gram_inv.mul_vec(&lmat.mul_vec(&gv)?)?;
            let mut p = gv.clone();
            for (i, c) in coeffs.0.iter().enumerate() {
                p = p.sub(&RatVec::from_ints(&lbasis[i]).scale(c));
            }
            if let Some(pi) = p.to_primitive_ints() {
                proj_gens.push(pi);
            }
        }
        let cp = Cone::new(self.ambient_dim, false, &proj_gens)?;
        Ok(Some((lbasis, cp)))
    }

    /// Barycentric simplicial subdivision. Cones with lines are split into an
    /// orthant decomposition of the lineality space times a simplicialized
    /// strongly convex part.
    pub fn simplicialize(&self) -> Result<Subdivision> {
        if self.open {
            return Err(Error::Precondition("simplicialize expects a closed cone".into()));
        }
        if self.is_simplicial() {
            return Ok(Subdivision {
                parent: self.clone(),
                pieces: vec![self.clone()],
                kind: SubdivisionKind::Closed,
            });
        }
        if let Some((lbasis, cp)) = self.contains_line()? {
            let sub_cp = cp.simplicialize()?;
            let mut pieces = Vec::new();
            let p = lbasis.len();
            for signs in 0..(1u32 << p) {
                let signed: Vec<Vec<Int>> = lbasis
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        if signs & (1 << i) != 0 {
                            b.iter().map(|x| -x.clone()).collect()
                        } else {
                            b.clone()
                        }
                    })
                    .collect();
                for piece in &sub_cp.pieces {
                    let mut gens = signed.clone();
                    gens.extend(piece.generators().iter().cloned());
                    pieces.push(Cone::new(self.ambient_dim, false, &gens)?);
                }
                if sub_cp.pieces.is_empty() {
                    pieces.push(Cone::new(self.ambient_dim, false, &signed)?);
                }
            }
            pieces.sort();
            pieces.dedup();
            return Ok(Subdivision {
                parent: self.clone(),
                pieces,
                kind: SubdivisionKind::Closed,
            });
        }
        // pointed, non-simplicial: barycentric pieces indexed by flags of faces
        let span = SpanCoords::new(self)?;
        let faces = face_lattice(self, &span)?;
        let n = self.dimension();
        let full: BTreeSet<usize> = (0..self.generators.len()).collect();
        let mut pieces = Vec::new();
        let mut chain: Vec<BTreeSet<usize>> = vec![full.clone()];
        collect_flags(self, &faces, n, &mut chain, &mut pieces)?;
        pieces.sort();
        pieces.dedup();
        Ok(Subdivision {
            parent: self.clone(),
            pieces,
            kind: SubdivisionKind::Closed,
        })
    }

    /// Stellar subdivision of a simplicial cone at a point of the cone.
    pub fn star_subdivide(&self, x: &[Int]) -> Result<Vec<Cone>> {
        if !self.is_simplicial() || self.generators.is_empty() {
            return Err(Error::Precondition("star subdivision needs a simplicial cone".into()));
        }
        let m = self.generator_matrix()?.transpose();
        let t = m
            .solve(&RatVec::from_ints(x))?
            .ok_or_else(|| Error::Precondition("point not in the span of the cone".into()))?;
        if t.0.iter().any(|c| c.is_negative()) {
            return Err(Error::Precondition("point not inside the cone".into()));
        }
        let mut out = Vec::new();
        for (i, ti) in t.0.iter().enumerate() {
            if ti.is_zero() {
                continue;
            }
            let mut gens: Vec<Vec<Int>> = self
                .generators
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, g)| g.clone())
                .collect();
            gens.push(x.to_vec());
            out.push(Cone::new(self.ambient_dim, false, &gens)?);
        }
        Ok(out)
    }

    /// Subdivide a simplicial strongly convex cone into smooth cones by
    /// repeated stellar subdivision at fundamental-parallelepiped points.
    pub fn smooth_subdivide(&self) -> Result<Subdivision> {
        if self.open {
            return Err(Error::Precondition("smooth_subdivide expects a closed cone".into()));
        }
        if !self.is_simplicial() {
            return Err(Error::Precondition("smooth_subdivide expects a simplicial cone".into()));
        }
        let mut done = Vec::new();
        let mut work = vec![self.clone()];
        while let Some(c) = work.pop() {
            if c.is_zero_cone() {
                done.push(c);
                continue;
            }
            let idx = lattice_index(&c.generator_matrix()?)?;
            if idx.is_one() {
                done.push(c);
                continue;
            }
            let candidates = parallelepiped_points(&c)?;
            let mut best: Option<(Int, Vec<Int>, Vec<Cone>)> = None;
            for x in candidates {
                let pieces = c.star_subdivide(&x)?;
                let mut max_idx = Int::zero();
                for p in &pieces {
                    let pi = lattice_index(&p.generator_matrix()?)?;
                    if pi > max_idx {
                        max_idx = pi;
                    }
                }
                let better = match &best {
                    None => true,
                    Some((bi, bx, _)) => {
                        max_idx < *bi
                            || (max_idx == *bi && lex_cmp_ints(&x, bx) == std::cmp::Ordering::Less)
                    }
                };
                if better {
                    best = Some((max_idx, x, pieces));
                }
            }
            let (_, _, pieces) =
                best.ok_or_else(|| Error::Precondition("no subdivision point found".into()))?;
            work.extend(pieces);
        }
        done.sort();
        done.dedup();
        Ok(Subdivision {
            parent: self.clone(),
            pieces: done,
            kind: SubdivisionKind::Closed,
        })
    }

    /// Simplicialize, then smooth-subdivide every simplicial piece.
    pub fn full_smooth_subdivision(&self) -> Result<Subdivision> {
        let simp = self.closure().simplicialize()?;
        let mut pieces = Vec::new();
        for p in &simp.pieces {
            pieces.extend(p.smooth_subdivide()?.pieces);
        }
        pieces.sort();
        pieces.dedup();
        Ok(Subdivision {
            parent: self.closure(),
            pieces,
            kind: SubdivisionKind::Closed,
        })
    }

    /// All nonzero faces of this closed cone, as closed cones.
    pub fn face_cones(&self) -> Result<Vec<Cone>> {
        if self.generators.is_empty() {
            return Ok(vec![]);
        }
        let span = SpanCoords::new(self)?;
        let faces = face_lattice(self, &span)?;
        let mut out = Vec::new();
        for f in faces {
            if f.is_empty() {
                continue;
            }
            let gens: Vec<Vec<Int>> = f.iter().map(|&i| self.generators[i].clone()).collect();
            out.push(Cone::new(self.ambient_dim, false, &gens)?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

fn collect_flags(
    cone: &Cone,
    faces: &[BTreeSet<usize>],
    dim_needed: usize,
    chain: &mut Vec<BTreeSet<usize>>,
    pieces: &mut Vec<Cone>,
) -> Result<()> {
    let top = chain.last().expect("chain nonempty").clone();
    if dim_needed == 1 {
        // materialize the piece from the interior points of the chain
        let mut gens: Vec<Vec<Int>> = Vec::new();
        for f in chain.iter() {
            let mut sum = vec![Int::zero(); cone.ambient_dim()];
            for &i in f {
                for (a, b) in sum.iter_mut().zip(&cone.generators()[i]) {
                    *a += b;
                }
            }
            gens.push(primitive(&sum).expect("face interior point is nonzero"));
        }
        pieces.push(Cone::new(cone.ambient_dim(), false, &gens)?);
        return Ok(());
    }
    for f in faces {
        if f.is_empty() || !f.is_subset(&top) || f == &top {
            continue;
        }
        let gens: Vec<Vec<Int>> = f.iter().map(|&i| cone.generators()[i].clone()).collect();
        let d = RatMatrix::from_int_rows(&gens)?.rank();
        if d != dim_needed - 1 {
            continue;
        }
        chain.push(f.clone());
        collect_flags(cone, faces, dim_needed - 1, chain, pieces)?;
        chain.pop();
    }
    Ok(())
}

/// Is x a nonnegative combination of the given vectors? Conical Caratheodory:
/// check all independent subsets.
pub fn in_nonneg_span(gens: &[Vec<Int>], x: &RatVec, ambient: usize) -> bool {
    if x.is_zero() {
        return true;
    }
    if gens.is_empty() {
        return false;
    }
    let _ = ambient;
    let m = RatMatrix::from_int_rows(gens).expect("nonempty");
    let rank = m.rank();
    for size in 1..=rank {
        for subset in subsets_of_size(gens.len(), size) {
            let rows: Vec<Vec<Int>> = subset.iter().map(|&i| gens[i].clone()).collect();
            let sm = RatMatrix::from_int_rows(&rows).expect("nonempty");
            if sm.rank() != size {
                continue;
            }
            if let Ok(Some(sol)) = sm.transpose().solve(x) {
                if sol.0.iter().all(|c| !c.is_negative()) {
                    return true;
                }
            }
        }
    }
    false
}

/// Rational coordinates within the linear span of a cone.
pub struct SpanCoords {
    basis: Vec<RatVec>,      // rows: ambient vectors spanning the space
    pseudo_inv: RatMatrix,   // d x k, coords(x) = P x for x in the span
}

impl SpanCoords {
    pub fn new(cone: &Cone) -> Result<SpanCoords> {
        let gens = cone.generators();
        if gens.is_empty() {
            return Err(Error::Shape("zero cone has no span".into()));
        }
        // greedy independent subset
        let mut basis: Vec<RatVec> = Vec::new();
        for g in gens {
            let mut cand = basis.clone();
            cand.push(RatVec::from_ints(g));
            let m = RatMatrix::from_rows(cand.clone())?;
            if m.rank() == cand.len() {
                basis = cand;
            }
        }
        let b = RatMatrix::from_rows(basis.clone())?; // d x k, rows = basis
        let gram = b.mul(&b.transpose())?;
        let pseudo_inv = gram.inverse()?.mul(&b)?;
        Ok(SpanCoords { basis, pseudo_inv })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_rows(&self) -> Vec<RatVec> {
        self.basis.clone()
    }

    /// Coordinates of x in the span, or None if x is outside the span.
    pub fn coords(&self, x: &RatVec) -> Option<RatVec> {
        let c = self.pseudo_inv.mul_vec(x).ok()?;
        // verify x = sum c_i basis_i
        let mut back = RatVec::zero(x.dim());
        for (ci, bi) in c.0.iter().zip(&self.basis) {
            back = back.add(&bi.scale(ci));
        }
        if back == *x {
            Some(c)
        } else {
            None
        }
    }

    /// Pull a span-coordinate covector back to a primitive ambient covector.
    pub fn covector_to_ambient(&self, f: &RatVec) -> Option<Vec<Int>> {
        let mut h = RatVec::zero(self.pseudo_inv.ncols());
        for (fi, row) in f.0.iter().zip(self.pseudo_inv.rows()) {
            h = h.add(&row.scale(fi));
        }
        h.to_primitive_ints()
    }
}

pub fn int_covector_apply(h: &[Int], x: &RatVec) -> Rat {
    RatVec::from_ints(h).dot(x)
}

pub fn int_dot(a: &[Int], b: &[Int]) -> Int {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Facet functionals of a closed cone, as primitive ambient covectors that
/// are nonnegative on the cone and vanish on a facet. Empty for dim 0.
pub fn facet_functionals(cone: &Cone, span: &SpanCoords) -> Result<Vec<Vec<Int>>> {
    let d = span.dim();
    let gens = cone.generators();
    let coords: Vec<RatVec> = gens
        .iter()
        .map(|g| span.coords(&RatVec::from_ints(g)).expect("generator in span"))
        .collect();
    let mut out: BTreeSet<Vec<Int>> = BTreeSet::new();
    for subset in subsets_of_size(gens.len(), d - 1) {
        let rows: Vec<RatVec> = subset.iter().map(|&i| coords[i].clone()).collect();
        if !rows.is_empty() {
            let m = RatMatrix::from_rows(rows.clone())?;
            if m.rank() != d - 1 {
                continue;
            }
        }
        let kernel = nullspace(&rows, d);
        if kernel.len() != 1 {
            continue;
        }
        let f = &kernel[0];
        let values: Vec<Rat> = coords.iter().map(|c| f.dot(c)).collect();
        let has_pos = values.iter().any(|v| v.is_positive());
        let has_neg = values.iter().any(|v| v.is_negative());
        let oriented = if has_neg && !has_pos {
            f.scale(&-Rat::one())
        } else if !has_neg {
            f.clone()
        } else {
            continue;
        };
        if let Some(h) = span.covector_to_ambient(&oriented) {
            out.insert(h);
        }
    }
    Ok(out.into_iter().collect())
}

/// All faces of a pointed closed cone as generator-index subsets, including
/// the cone itself and excluding the apex.
pub fn face_lattice(cone: &Cone, span: &SpanCoords) -> Result<Vec<BTreeSet<usize>>> {
    let gens = cone.generators();
    let facets = facet_functionals(cone, span)?;
    let zero_sets: Vec<BTreeSet<usize>> = facets
        .iter()
        .map(|h| {
            gens.iter()
                .enumerate()
                .filter(|(_, g)| int_dot(h, g).is_zero())
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let full: BTreeSet<usize> = (0..gens.len()).collect();
    let mut faces: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    faces.insert(full.clone());
    let mut work = vec![full];
    while let Some(f) = work.pop() {
        for z in &zero_sets {
            let inter: BTreeSet<usize> = f.intersection(z).cloned().collect();
            if inter.is_empty() || faces.contains(&inter) {
                continue;
            }
            faces.insert(inter.clone());
            work.push(inter);
        }
    }
    Ok(faces.into_iter().collect())
}

/// Primitive nonzero lattice points derived from the half-open fundamental
/// parallelepiped of a simplicial cone, candidates for stellar subdivision.
pub fn parallelepiped_points(cone: &Cone) -> Result<Vec<Vec<Int>>> {
    let gens = cone.generators();
    let r = gens.len();
    let m = cone.generator_matrix()?;
    let sat = saturation_basis(&m)?;
    let w = RatMatrix::from_int_rows(&sat)?;
    // generator coordinates in the saturation basis
    let wt = w.transpose();
    let mut a_rows: Vec<Vec<Int>> = Vec::new();
    for g in gens {
        let sol = wt
            .solve(&RatVec::from_ints(g))?
            .ok_or_else(|| Error::Rank("generator outside saturation span".into()))?;
        let ints: Vec<Int> = sol
            .0
            .iter()
            .map(|x| {
                debug_assert!(x.denom().is_one());
                x.numer().clone()
            })
            .collect();
        a_rows.push(ints);
    }
    let a = RatMatrix::from_int_rows(&a_rows)?;
    let (h, _) = crate::exactlin::hermite_normal_form(&a)?;
    let pivots: Vec<Int> = (0..r).map(|i| h.entry(i, i).numer().clone()).collect();
    let at = a.transpose();
    let mut points: BTreeSet<Vec<Int>> = BTreeSet::new();
    let mut rep = vec![Int::zero(); r];
    loop {
        // map the coset representative into the half-open parallelepiped
        let t = at
            .solve(&RatVec::from_ints(&rep))?
            .expect("full rank");
        let frac: Vec<Rat> = t.0.iter().map(|x| x - x.floor()).collect();
        if frac.iter().any(|x| !x.is_zero()) {
            let mut pt = RatVec::zero(cone.ambient_dim());
            for (fi, g) in frac.iter().zip(gens) {
                pt = pt.add(&RatVec::from_ints(g).scale(fi));
            }
            let ints: Vec<Int> = pt
                .0
                .iter()
                .map(|x| {
                    debug_assert!(x.denom().is_one());
                    x.numer().clone()
                })
                .collect();
            if let Some(p) = primitive(&ints) {
                points.insert(p);
            }
        }
        // next representative
        let mut i = 0;
        loop {
            if i == r {
                return Ok(points.into_iter().collect());
            }
            rep[i] += 1;
            if rep[i] < pivots[i] {
                break;
            }
            rep[i] = Int::zero();
            i += 1;
        }
    }
}

/// Split a closed cone by a hyperplane functional; returns the two closed
/// parts (either may coincide with the input or be lower-dimensional).
pub fn split_by_hyperplane(cone: &Cone, h: &[Int]) -> Result<(Cone, Cone)> {
    let gens = cone.generators();
    let mut pos: Vec<Vec<Int>> = Vec::new();
    let mut neg: Vec<Vec<Int>> = Vec::new();
    for g in gens {
        let v = int_dot(h, g);
        if !v.is_negative() {
            pos.push(g.clone());
        }
        if !v.is_positive() {
            neg.push(g.clone());
        }
    }
    for (i, gi) in gens.iter().enumerate() {
        let vi = int_dot(h, gi);
        for gj in gens.iter().skip(i + 1) {
            let vj = int_dot(h, gj);
            if (vi.is_positive() && vj.is_negative()) || (vi.is_negative() && vj.is_positive()) {
                // h(vi) gj - h(gj) gi lies on the hyperplane, inside the cone
                let (a, b, u, v) = if vi.is_positive() {
                    (gi, gj, &vi, &vj)
                } else {
                    (gj, gi, &vj, &vi)
                };
                let cut: Vec<Int> = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| u * y - v * x)
                    .collect();
                if let Some(p) = primitive(&cut) {
                    pos.push(p.clone());
                    neg.push(p);
                }
            }
        }
    }
    let mk = |g: &[Vec<Int>]| -> Result<Cone> {
        if g.is_empty() {
            Ok(Cone::zero(cone.ambient_dim(), false))
        } else {
            Cone::new(cone.ambient_dim(), false, &g.to_vec())
        }
    };
    Ok((mk(&pos)?, mk(&neg)?))
}

/// Common refinement of closed cones spanning the same subspace, using the
/// arrangement of all facet functionals of all simplicial pieces.
pub fn common_refinement(cones: &[Cone]) -> Result<Vec<Subdivision>> {
    if cones.is_empty() {
        return Ok(vec![]);
    }
    let d0 = cones[0].dimension();
    let all_gens: Vec<Vec<Int>> = cones
        .iter()
        .flat_map(|c| c.generators().iter().cloned())
        .collect();
    let all_rank = RatMatrix::from_int_rows(&all_gens)?.rank();
    for c in cones {
        if c.dimension() != d0 || c.is_open() {
            return Err(Error::Precondition("cones must be closed with equal spans".into()));
        }
    }
    if all_rank != d0 {
        return Err(Error::Precondition("cones do not span the same subspace".into()));
    }
    let mut functionals: BTreeSet<Vec<Int>> = BTreeSet::new();
    for c in cones {
        let simp = c.simplicialize()?;
        for p in &simp.pieces {
            let span = SpanCoords::new(p)?;
            for h in facet_functionals(p, &span)? {
                // canonical sign: first nonzero entry positive
                let canon = canonical_sign(&h);
                functionals.insert(canon);
            }
        }
    }
    let functionals: Vec<Vec<Int>> = functionals.into_iter().collect();
    let mut out = Vec::new();
    for c in cones {
        let mut parts = vec![c.clone()];
        for h in &functionals {
            let mut next = Vec::new();
            for p in &parts {
                let (pos, neg) = split_by_hyperplane(p, h)?;
                for q in [pos, neg] {
                    if !q.is_zero_cone() && q.dimension() == d0 {
                        next.push(q);
                    }
                }
            }
            next.sort();
            next.dedup();
            parts = next;
        }
        let mut pieces = Vec::new();
        for p in &parts {
            pieces.extend(p.simplicialize()?.pieces);
        }
        pieces.sort();
        pieces.dedup();
        out.push(Subdivision {
            parent: c.clone(),
            pieces,
            kind: SubdivisionKind::Closed,
        });
    }
    Ok(out)
}

pub fn canonical_sign(h: &[Int]) -> Vec<Int> {
    match h.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => h.iter().map(|v| -v.clone()).collect(),
        _ => h.to_vec(),
    }
}

/// Open subdivision induced by a closed subdivision of the closure: the
/// relative interiors of all faces of all pieces that lie inside the open
/// parent.
pub fn open_subdivision(parent: &Cone, closed: &Subdivision) -> Result<Subdivision> {
    if !parent.is_open() {
        return Err(Error::Precondition("parent must be an open cone".into()));
    }
    if closed.kind != SubdivisionKind::Closed || closed.parent != parent.closure() {
        return Err(Error::Precondition(
            "closed subdivision does not match the parent's closure".into(),
        ));
    }
    let mut pieces: BTreeSet<Cone> = BTreeSet::new();
    for p in &closed.pieces {
        let mut candidates = p.face_cones()?;
        candidates.push(p.clone());
        for f in candidates {
            let opened = f.with_open(true);
            if pieces.contains(&opened) {
                continue;
            }
            // canonical relative-interior point: sum of the face generators
            let mut sum = RatVec::zero(parent.ambient_dim());
            for g in f.generators() {
                sum = sum.add(&RatVec::from_ints(g));
            }
            if parent.contains_point(&sum)? {
                pieces.insert(opened);
            }
        }
    }
    Ok(Subdivision {
        parent: parent.clone(),
        pieces: pieces.into_iter().collect(),
        kind: SubdivisionKind::Open,
    })
}

/// Lattice-point oracle on [0, box]^k: cover for closed subdivisions, exact
/// partition for open subdivisions. Also checks piece dimensions/containment.
pub fn verify_subdivision(s: &Subdivision, box_bound: i64) -> Result<bool> {
    let k = s.parent.ambient_dim();
    match s.kind {
        SubdivisionKind::Closed => {
            let pd = s.parent.dimension();
            for p in &s.pieces {
                if p.dimension() != pd {
                    return Ok(false);
                }
                for g in p.generators() {
                    if !s.parent.contains_point(&RatVec::from_ints(g))? {
                        return Ok(false);
                    }
                }
            }
        }
        SubdivisionKind::Open => {
            for p in &s.pieces {
                if !p.is_open() {
                    return Ok(false);
                }
            }
        }
    }
    let mut point = vec![0i64; k];
    loop {
        let x = RatVec(point.iter().map(|&v| crate::exactlin::rat(v)).collect());
        let in_parent = s.parent.contains_point(&x)?;
        let mut count = 0;
        for p in &s.pieces {
            if p.contains_point(&x)? {
                count += 1;
                if s.kind == SubdivisionKind::Closed && in_parent {
                    break;
                }
            }
        }
        match s.kind {
            SubdivisionKind::Closed => {
                if in_parent && count == 0 {
                    return Ok(false);
                }
                if !in_parent && count > 0 {
                    return Ok(false);
                }
            }
            SubdivisionKind::Open => {
                if in_parent && count != 1 {
                    return Ok(false);
                }
                if !in_parent && count != 0 {
                    return Ok(false);
                }
            }
        }
        let mut i = 0;
        loop {
            if i == k {
                return Ok(true);
            }
            point[i] += 1;
            if point[i] <= box_bound {
                break;
            }
            point[i] = 0;
            i += 1;
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ConeJson {
    ambient_dim: usize,
    open: bool,
    generators: Vec<Vec<i64>>,
}

impl Serialize for Cone {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let gens = self
            .generators
            .iter()
            .map(|g| {
                g.iter()
                    .map(|x| {
                        x.try_into()
                            .map_err(|_| serde::ser::Error::custom("generator entry too large"))
                    })
                    .collect::<std::result::Result<Vec<i64>, S::Error>>()
            })
            .collect::<std::result::Result<Vec<_>, S::Error>>()?;
        ConeJson {
            ambient_dim: self.ambient_dim,
            open: self.open,
            generators: gens,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Cone {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let j = ConeJson::deserialize(deserializer)?;
        let gens: Vec<Vec<Int>> = j
            .generators
            .iter()
            .map(|g| g.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Cone::new(j.ambient_dim, j.open, &gens).map_err(D::Error::custom)
    }
}
