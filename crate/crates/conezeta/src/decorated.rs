//! Decorated smooth closed cones, conical derivations, algebraic subdivision
//! and the map into pure fractions.

use crate::cones::{Cone, Subdivision, SubdivisionKind};
use crate::exactlin::{dual_rows, lex_cmp_ints, rat, Int, Rat, RatMatrix};
use crate::fractions::{FracSum, LinearForm, Poles};
use crate::{Error, Result};
use num::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

/// A monomial [v_1]^{s_1}...[v_k]^{s_k} over the primary set of a smooth
/// closed cone; exponents are at least 1 and the generators are canonically
/// sorted.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DecoratedClosedCone {
    ambient_dim: usize,
    items: Vec<(Vec<Int>, u32)>,
}

impl DecoratedClosedCone {
    pub fn new(ambient_dim: usize, items: &[(Vec<Int>, u32)]) -> Result<DecoratedClosedCone> {
        let gens: Vec<Vec<Int>> = items.iter().map(|(g, _)| g.clone()).collect();
        let cone = Cone::new(ambient_dim, false, &gens)?;
        if cone.generators().len() != gens.len() {
            return Err(Error::Precondition(
                "generators must be primitive and distinct".into(),
            ));
        }
        match cone.is_smooth() {
            Some(primary) if primary.len() == gens.len() => {}
            _ => {
                return Err(Error::Precondition(
                    "underlying cone is not smooth on the given generators".into(),
                ))
            }
        }
        if items.iter().any(|(_, s)| *s == 0) {
            return Err(Error::Precondition("exponents must be at least 1".into()));
        }
        let mut items: Vec<(Vec<Int>, u32)> = items.to_vec();
        items.sort_by(|a, b| lex_cmp_ints(&a.0, &b.0));
        Ok(DecoratedClosedCone { ambient_dim, items })
    }

    pub fn from_i64(ambient_dim: usize, items: &[(Vec<i64>, u32)]) -> Result<DecoratedClosedCone> {
        let conv: Vec<(Vec<Int>, u32)> = items
            .iter()
            .map(|(g, s)| (g.iter().map(|&x| Int::from(x)).collect(), *s))
            .collect();
        DecoratedClosedCone::new(ambient_dim, &conv)
    }

    /// The weight-0 empty decorated cone.
    pub fn empty(ambient_dim: usize) -> DecoratedClosedCone {
        DecoratedClosedCone {
            ambient_dim,
            items: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn items(&self) -> &[(Vec<Int>, u32)] {
        &self.items
    }

    pub fn weight(&self) -> u32 {
        self.items.iter().map(|(_, s)| s).sum()
    }

    pub fn underlying_cone(&self) -> Cone {
        let gens: Vec<Vec<Int>> = self.items.iter().map(|(g, _)| g.clone()).collect();
        Cone::new(self.ambient_dim, false, &gens).expect("validated at construction")
    }

    /// Monomial product; the merged generator set must still be the primary
    /// set of a smooth cone.
    pub fn multiply(&self, other: &DecoratedClosedCone) -> Result<DecoratedClosedCone> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::Shape("ambient dimensions differ".into()));
        }
        let mut merged: BTreeMap<Vec<Int>, u32> = BTreeMap::new();
        for (g, s) in self.items.iter().chain(&other.items) {
            *merged.entry(g.clone()).or_insert(0) += s;
        }
        let items: Vec<(Vec<Int>, u32)> = merged.into_iter().collect();
        DecoratedClosedCone::new(self.ambient_dim, &items)
    }
}

#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct DecoratedSum {
    terms: BTreeMap<DecoratedClosedCone, Rat>,
}

impl DecoratedSum {
    pub fn zero() -> DecoratedSum {
        DecoratedSum::default()
    }

    pub fn from_cone(d: DecoratedClosedCone) -> DecoratedSum {
        let mut s = DecoratedSum::zero();
        s.add_term(Rat::one(), d);
        s
    }

    pub fn add_term(&mut self, coeff: Rat, cone: DecoratedClosedCone) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(cone.clone()).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&cone);
        }
    }

    pub fn add(&self, other: &DecoratedSum) -> DecoratedSum {
        let mut out = self.clone();
        for (d, c) in &other.terms {
            out.add_term(c.clone(), d.clone());
        }
        out
    }

    pub fn sub(&self, other: &DecoratedSum) -> DecoratedSum {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> DecoratedSum {
        if c.is_zero() {
            return DecoratedSum::zero();
        }
        DecoratedSum {
            terms: self
                .terms
                .iter()
                .map(|(d, v)| (d.clone(), v * c))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DecoratedClosedCone, &Rat)> {
        self.terms.iter()
    }

    pub fn multiply_cone(&self, d: &DecoratedClosedCone) -> Result<DecoratedSum> {
        let mut out = DecoratedSum::zero();
        for (t, c) in &self.terms {
            out.add_term(c.clone(), t.multiply(d)?);
        }
        Ok(out)
    }
}

/// The conical derivation in coordinate direction i:
/// delta_i([v_1]^{s_1}...) = sum_j s_j (e_i, v_j) [..][v_j]^{s_j+1}[..].
pub fn conical_derive(sum: &DecoratedSum, i: usize) -> Result<DecoratedSum> {
    let mut out = DecoratedSum::zero();
    for (d, coeff) in sum.terms() {
        if i >= d.ambient_dim() {
            return Err(Error::Shape("coordinate index out of range".into()));
        }
        for j in 0..d.items().len() {
            let (g, s) = &d.items()[j];
            let pairing = g[i].clone();
            if pairing.is_zero() {
                continue;
            }
            let mut items = d.items().to_vec();
            items[j].1 = s + 1;
            let bumped = DecoratedClosedCone::new(d.ambient_dim(), &items)?;
            out.add_term(
                coeff * rat(*s as i64) * Rat::from_integer(pairing),
                bumped,
            );
        }
    }
    Ok(out)
}

/// Apply the derivation dual to basis[target] (with respect to the dual basis
/// of the given independent generator family), `order` times.
pub fn conical_derive_dual(
    sum: &DecoratedSum,
    basis: &[Vec<Int>],
    target: usize,
    order: u32,
) -> Result<DecoratedSum> {
    if target >= basis.len() {
        return Err(Error::Shape("target index out of range".into()));
    }
    let a = RatMatrix::from_int_rows(basis)?;
    let d = dual_rows(&a)?;
    let dual = d.row(target).clone();
    let mut cur = sum.clone();
    for _ in 0..order {
        let mut next = DecoratedSum::zero();
        for (j, c) in dual.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            next = next.add(&conical_derive(&cur, j)?.scale(c));
        }
        cur = next;
    }
    Ok(cur)
}

/// Algebraic subdivision: apply prod_i (1/(s_i-1)!) delta_{v_i*}^{s_i-1} to
/// the plain sum of the smooth subdivision pieces of the underlying cone.
pub fn algebraic_subdivide(d: &DecoratedClosedCone, geo: &Subdivision) -> Result<DecoratedSum> {
    if geo.kind != SubdivisionKind::Closed || geo.parent != d.underlying_cone() {
        return Err(Error::Precondition(
            "subdivision does not match the underlying cone".into(),
        ));
    }
    let basis: Vec<Vec<Int>> = d.items().iter().map(|(g, _)| g.clone()).collect();
    let mut sum = DecoratedSum::zero();
    for p in &geo.pieces {
        let primary = p.is_smooth().ok_or_else(|| {
            Error::Precondition("subdivision has a non-smooth piece".into())
        })?;
        let items: Vec<(Vec<Int>, u32)> = primary.into_iter().map(|g| (g, 1)).collect();
        sum.add_term(Rat::one(), DecoratedClosedCone::new(d.ambient_dim(), &items)?);
    }
    for (i, (_, s)) in d.items().iter().enumerate() {
        if *s <= 1 {
            continue;
        }
        sum = conical_derive_dual(&sum, &basis, i, s - 1)?;
        let mut factorial = Rat::one();
        for j in 2..=(s - 1) {
            factorial *= rat(j as i64);
        }
        sum = sum.scale(&(Rat::one() / factorial));
    }
    Ok(sum)
}

/// The decorated cone-to-fraction map:
/// [v_1]^{s_1}...[v_k]^{s_k} -> w(v_1,...,v_k) / prod L_i^{s_i}.
pub fn phi_dm(sum: &DecoratedSum) -> Result<FracSum> {
    let mut out = FracSum::zero();
    for (d, coeff) in sum.terms() {
        if d.items().is_empty() {
            out.add_term(coeff.clone(), Poles::new());
            continue;
        }
        let gens: Vec<Vec<Int>> = d.items().iter().map(|(g, _)| g.clone()).collect();
        let m = RatMatrix::from_int_rows(&gens)?.transpose();
        let w = m.minor_weight()?;
        let mut c = coeff * w;
        let mut poles = Poles::new();
        for (g, s) in d.items() {
            let (form, scale) = LinearForm::normalize(g)?;
            for _ in 0..*s {
                c /= &scale;
            }
            *poles.entry(form).or_insert(0) += s;
        }
        out.add_term(c, poles);
    }
    Ok(out)
}

/// Rebuild [v_1]^{s_1}...[v_k]^{s_k} from the undecorated cone via iterated
/// dual derivations with factorial normalization.
pub fn reconstruct_from_duals(d: &DecoratedClosedCone) -> Result<DecoratedSum> {
    let basis: Vec<Vec<Int>> = d.items().iter().map(|(g, _)| g.clone()).collect();
    let items: Vec<(Vec<Int>, u32)> = basis.iter().map(|g| (g.clone(), 1)).collect();
    let mut sum =
        DecoratedSum::from_cone(DecoratedClosedCone::new(d.ambient_dim(), &items)?);
    for (i, (_, s)) in d.items().iter().enumerate() {
        if *s <= 1 {
            continue;
        }
        sum = conical_derive_dual(&sum, &basis, i, s - 1)?;
        let mut factorial = Rat::one();
        for j in 2..=(s - 1) {
            factorial *= rat(j as i64);
        }
        sum = sum.scale(&(Rat::one() / factorial));
    }
    Ok(sum)
}

#[derive(Serialize, Deserialize)]
struct DecoratedJson {
    generators: Vec<Vec<i64>>,
    exponents: Vec<u32>,
}

impl Serialize for DecoratedClosedCone {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let generators = self
            .items
            .iter()
            .map(|(g, _)| {
                g.iter()
                    .map(|x| {
                        x.try_into()
                            .map_err(|_| serde::ser::Error::custom("generator entry too large"))
                    })
                    .collect::<std::result::Result<Vec<i64>, S::Error>>()
            })
            .collect::<std::result::Result<Vec<_>, S::Error>>()?;
        DecoratedJson {
            generators,
            exponents: self.items.iter().map(|(_, s)| *s).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DecoratedClosedCone {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let j = DecoratedJson::deserialize(deserializer)?;
        if j.generators.len() != j.exponents.len() {
            return Err(D::Error::custom("generators and exponents differ in length"));
        }
        if j.generators.is_empty() {
            return Err(D::Error::custom("decorated cone needs generators"));
        }
        let ambient = j.generators[0].len();
        let items: Vec<(Vec<Int>, u32)> = j
            .generators
            .iter()
            .zip(&j.exponents)
            .map(|(g, &s)| (g.iter().map(|&x| Int::from(x)).collect(), s))
            .collect();
        DecoratedClosedCone::new(ambient, &items).map_err(D::Error::custom)
    }
}
