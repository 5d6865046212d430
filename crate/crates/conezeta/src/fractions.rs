//! Fractions with linear-form poles: the cone-to-fraction map, canonical
//! pure-fraction normal forms via no-broken-circuit rewriting, positive
//! decomposition, and the two derivations.

use crate::cones::Cone;
use crate::exactlin::{
    dual_rows, primitive, rat, rat_from_str, rat_to_string, subsets_of_size, Int,
    Rat, RatMatrix, RatVec,
};
use crate::{Error, Result};
use num::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};

/// Primitive integer covector with positive leading coefficient.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LinearForm(Vec<Int>);

impl LinearForm {
    /// Normalize an integer covector: returns the form and the scalar c with
    /// covector = c * form.
    pub fn normalize(v: &[Int]) -> Result<(LinearForm, Rat)> {
        let p = primitive(v).ok_or_else(|| Error::Domain("zero linear form".into()))?;
        let g = Rat::new(
            v.iter().find(|x| !x.is_zero()).expect("nonzero").clone(),
            p.iter().find(|x| !x.is_zero()).expect("nonzero").clone(),
        );
        let (p, g) = if p.iter().find(|x| !x.is_zero()).expect("nonzero").is_negative() {
            (p.iter().map(|x| -x.clone()).collect::<Vec<Int>>(), -g)
        } else {
            (p, g)
        };
        Ok((LinearForm(p), g))
    }

    pub fn coeffs(&self) -> &[Int] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, x: &RatVec) -> Rat {
        RatVec::from_ints(&self.0).dot(x)
    }

    pub fn to_ratvec(&self) -> RatVec {
        RatVec::from_ints(&self.0)
    }
}

pub type Poles = BTreeMap<LinearForm, u32>;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FracTerm {
    pub coeff: Rat,
    pub poles: Poles,
}

impl FracTerm {
    pub fn constant(c: Rat) -> FracTerm {
        FracTerm {
            coeff: c,
            poles: Poles::new(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.poles.values().sum()
    }

    pub fn is_pure(&self) -> bool {
        if self.poles.is_empty() {
            return true;
        }
        let rows: Vec<Vec<Int>> = self.poles.keys().map(|f| f.0.clone()).collect();
        let m = RatMatrix::from_int_rows(&rows).expect("nonempty");
        m.rank() == rows.len()
    }
}

/// Canonically ordered Q-linear combination of fraction terms, keyed by the
/// pole multiset. The empty sum is zero; the empty pole multiset is the
/// constant 1.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct FracSum {
    terms: BTreeMap<Poles, Rat>,
}

impl FracSum {
    pub fn zero() -> FracSum {
        FracSum::default()
    }

    pub fn constant(c: Rat) -> FracSum {
        let mut s = FracSum::zero();
        s.add_term(c, Poles::new());
        s
    }

    pub fn from_term(t: FracTerm) -> FracSum {
        let mut s = FracSum::zero();
        s.add_term(t.coeff, t.poles);
        s
    }

    pub fn add_term(&mut self, coeff: Rat, poles: Poles) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(poles).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn add(&self, other: &FracSum) -> FracSum {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(c.clone(), p.clone());
        }
        out
    }

    pub fn sub(&self, other: &FracSum) -> FracSum {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> FracSum {
        if c.is_zero() {
            return FracSum::zero();
        }
        FracSum {
            terms: self
                .terms
                .iter()
                .map(|(p, v)| (p.clone(), v * c))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = FracTerm> + '_ {
        self.terms.iter().map(|(p, c)| FracTerm {
            coeff: c.clone(),
            poles: p.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// The cone-to-fraction map: a simplicial cone goes to its minor weight over
/// the product of its generator forms, general cones sum over a simplicial
/// subdivision, cones with lines go to zero, the zero cone to the constant 1.
pub fn phi(cone: &Cone) -> Result<FracSum> {
    if cone.is_open() {
        return Err(Error::Precondition("phi expects a closed cone".into()));
    }
    if cone.is_zero_cone() {
        return Ok(FracSum::constant(Rat::one()));
    }
    if cone.contains_line()?.is_some() {
        return Ok(FracSum::zero());
    }
    if cone.is_simplicial() {
        let m = cone.generator_matrix()?.transpose(); // generators as columns
        let w = m.minor_weight()?;
        let mut poles = Poles::new();
        let mut coeff = w;
        for g in cone.generators() {
            let (form, scale) = LinearForm::normalize(g)?;
            coeff /= scale;
            *poles.entry(form).or_insert(0) += 1;
        }
        let mut s = FracSum::zero();
        s.add_term(coeff, poles);
        return Ok(s);
    }
    let simp = cone.simplicialize()?;
    let mut out = FracSum::zero();
    for p in &simp.pieces {
        out = out.add(&phi(p)?);
    }
    Ok(out)
}

fn forms_of(sum: &FracSum) -> Vec<LinearForm> {
    let mut set: BTreeSet<LinearForm> = BTreeSet::new();
    for t in sum.terms() {
        for f in t.poles.keys() {
            set.insert(f.clone());
        }
    }
    set.into_iter().collect()
}

/// Minimal dependent subsets (circuits) of a form family, as index sets into
/// the sorted family.
fn circuits(forms: &[LinearForm]) -> Vec<Vec<usize>> {
    if forms.is_empty() {
        return vec![];
    }
    let rows: Vec<Vec<Int>> = forms.iter().map(|f| f.0.clone()).collect();
    let rank_of = |idx: &[usize]| -> usize {
        let sub: Vec<Vec<Int>> = idx.iter().map(|&i| rows[i].clone()).collect();
        RatMatrix::from_int_rows(&sub).expect("nonempty").rank()
    };
    let full_rank = rank_of(&(0..forms.len()).collect::<Vec<_>>());
    let mut out = Vec::new();
    for size in 2..=(full_rank + 1).min(forms.len()) {
        'subset: for subset in subsets_of_size(forms.len(), size) {
            if rank_of(&subset) == size {
                continue;
            }
            for drop in 0..size {
                let smaller: Vec<usize> = subset
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != drop)
                    .map(|(_, &i)| i)
                    .collect();
                if rank_of(&smaller) != smaller.len() {
                    continue 'subset;
                }
            }
            out.push(subset);
        }
    }
    out
}

/// Rewrite every term into the no-broken-circuit basis of the arrangement of
/// all forms in the sum. Output terms are pure; the result is a canonical
/// representative of the rational function.
pub fn canonical_form(sum: &FracSum) -> Result<FracSum> {
    let forms = forms_of(sum);
    let circs = circuits(&forms);
    let mut out = FracSum::zero();
    // Rewriting replaces a factor by a form of strictly larger index, so the
    // descending index multiset of a term grows lexicographically. Popping the
    // smallest key first therefore visits each pole multiset at most once,
    // and merging coefficients up front keeps the agenda polynomial even when
    // many rewrite paths reach the same term.
    let key_of = |poles: &Poles| -> Vec<usize> {
        let mut key = Vec::new();
        for (f, &mult) in poles.iter() {
            let i = forms.binary_search(f).expect("form registered");
            key.extend(std::iter::repeat(i).take(mult as usize));
        }
        key.sort_unstable_by(|a, b| b.cmp(a));
        key
    };
    let mut agenda: BTreeMap<Vec<usize>, FracTerm> = BTreeMap::new();
    let enqueue = |agenda: &mut BTreeMap<Vec<usize>, FracTerm>, t: FracTerm| {
        match agenda.entry(key_of(&t.poles)) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().coeff += &t.coeff;
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(t);
            }
        }
    };
    for t in sum.terms() {
        enqueue(&mut agenda, t);
    }
    while let Some((key, t)) = agenda.pop_first() {
        if t.coeff.is_zero() {
            continue;
        }
        let support: BTreeSet<usize> = key.iter().copied().collect();
        // a broken circuit is a circuit minus its largest element; a term is
        // reduced when its support contains no broken circuit
        let hit = circs.iter().find(|c| {
            let (_, rest) = c.split_last().expect("circuits have size >= 2");
            rest.iter().all(|i| support.contains(i))
        });
        let c = match hit {
            Some(c) => c,
            None => {
                out.add_term(t.coeff, t.poles);
                continue;
            }
        };
        let (last, rest) = c.split_last().expect("nonempty");
        // express forms[last] over the independent rest
        let rows: Vec<Vec<Int>> = rest.iter().map(|&i| forms[i].0.clone()).collect();
        let m = RatMatrix::from_int_rows(&rows)?.transpose();
        let target = RatVec::from_ints(&forms[*last].0);
        let a = m
            .solve(&target)?
            .expect("circuit guarantees dependence");
        for (j, &fi) in rest.iter().enumerate() {
            if a.0[j].is_zero() {
                continue;
            }
            let mut poles = t.poles.clone();
            let f = &forms[fi];
            let mult = poles.get_mut(f).expect("in support");
            if *mult == 1 {
                poles.remove(f);
            } else {
                *mult -= 1;
            }
            *poles.entry(forms[*last].clone()).or_insert(0) += 1;
            enqueue(
                &mut agenda,
                FracTerm {
                    coeff: &t.coeff * &a.0[j],
                    poles,
                },
            );
        }
    }
    Ok(out)
}

/// Decompose into pure fractions; same rewriting engine as canonical_form.
pub fn decompose_pure(sum: &FracSum) -> Result<FracSum> {
    canonical_form(sum)
}

pub fn equals(f: &FracSum, g: &FracSum) -> Result<bool> {
    Ok(canonical_form(&f.sub(g))?.is_zero())
}

/// Positive pure decomposition for a term whose forms all have nonnegative
/// coefficients.
pub fn decompose_pure_positive(t: &FracTerm) -> Result<FracSum> {
    for f in t.poles.keys() {
        if f.0.iter().any(|x| x.is_negative()) {
            return Err(Error::Precondition(
                "a pole form has a negative coefficient".into(),
            ));
        }
    }
    if !t.coeff.is_positive() {
        return Err(Error::Precondition("term coefficient must be positive".into()));
    }
    let mut out = FracSum::zero();
    let mut work = vec![t.clone()];
    while let Some(t) = work.pop() {
        if t.is_pure() {
            out.add_term(t.coeff, t.poles);
            continue;
        }
        let forms: Vec<LinearForm> = t.poles.keys().cloned().collect();
        // all relations L = sum a_j f_j over independent subsets; pick the one
        // with the fewest negative coefficients, smallest L / subset on ties
        let mut best: Option<(usize, usize, Vec<usize>, Vec<Rat>)> = None;
        for (li, l) in forms.iter().enumerate() {
            let others: Vec<usize> = (0..forms.len()).filter(|&i| i != li).collect();
            for size in 2..=others.len() {
                for subset in subsets_of_size(others.len(), size) {
                    let idx: Vec<usize> = subset.iter().map(|&j| others[j]).collect();
                    let rows: Vec<Vec<Int>> =
                        idx.iter().map(|&i| forms[i].0.clone()).collect();
                    let m = RatMatrix::from_int_rows(&rows)?;
                    if m.rank() != idx.len() {
                        continue;
                    }
                    let sol = match m.transpose().solve(&RatVec::from_ints(&l.0))? {
                        Some(s) => s,
                        None => continue,
                    };
                    if sol.0.iter().any(|x| x.is_zero()) {
                        continue;
                    }
                    let p = sol.0.iter().filter(|x| x.is_negative()).count();
                    let better = match &best {
                        None => true,
                        Some((bp, bl, bidx, _)) => {
                            p < *bp || (p == *bp && (li < *bl || (li == *bl && idx < *bidx)))
                        }
                    };
                    if better {
                        best = Some((p, li, idx, sol.0));
                    }
                }
            }
        }
        let (p, li, idx, coeffs) = best.ok_or_else(|| {
            Error::Precondition("impure term admits no dependency relation".into())
        })?;
        let l = forms[li].clone();
        if p == 0 {
            // all-positive relation: push one multiplicity onto l
            for (j, &fi) in idx.iter().enumerate() {
                let mut poles = t.poles.clone();
                let f = &forms[fi];
                let mult = poles.get_mut(f).expect("in poles");
                if *mult == 1 {
                    poles.remove(f);
                } else {
                    *mult -= 1;
                }
                *poles.entry(l.clone()).or_insert(0) += 1;
                work.push(FracTerm {
                    coeff: &t.coeff * &coeffs[j],
                    poles,
                });
            }
        } else {
            // split 1/(A B) against c A + B with c = -a_1 > 0, where A is the
            // first negative-coefficient member and B is l
            let neg_pos = coeffs
                .iter()
                .position(|x| x.is_negative())
                .expect("p > 0");
            let a_form = forms[idx[neg_pos]].clone();
            let c = -coeffs[neg_pos].clone();
            let mixed = RatVec(
                a_form
                    .0
                    .iter()
                    .zip(&l.0)
                    .map(|(x, y)| &c * Rat::from_integer(x.clone()) + Rat::from_integer(y.clone()))
                    .collect(),
            );
            let mixed_ints = mixed
                .to_primitive_ints()
                .ok_or_else(|| Error::Domain("degenerate mixed form".into()))?;
            let (m_form, _) = LinearForm::normalize(&mixed_ints)?;
            // sigma with c*A + B = sigma * m_form exactly
            let i0 = m_form
                .0
                .iter()
                .position(|x| !x.is_zero())
                .expect("nonzero form");
            let sigma_total = &mixed.0[i0] / Rat::from_integer(m_form.0[i0].clone());
            // 1/(A B) = (1/sigma)/(A M) + (c/sigma)/(M B)
            let mut poles1 = t.poles.clone();
            decrement(&mut poles1, &l);
            *poles1.entry(m_form.clone()).or_insert(0) += 1;
            work.push(FracTerm {
                coeff: &t.coeff / &sigma_total,
                poles: poles1,
            });
            let mut poles2 = t.poles.clone();
            decrement(&mut poles2, &a_form);
            *poles2.entry(m_form.clone()).or_insert(0) += 1;
            work.push(FracTerm {
                coeff: &t.coeff * &c / &sigma_total,
                poles: poles2,
            });
        }
    }
    Ok(out)
}

fn decrement(poles: &mut Poles, f: &LinearForm) {
    let mult = poles.get_mut(f).expect("form present");
    if *mult == 1 {
        poles.remove(f);
    } else {
        *mult -= 1;
    }
}

/// The derivation in coordinate direction i (the negated partial derivative).
pub fn derive(sum: &FracSum, i: usize) -> Result<FracSum> {
    let mut out = FracSum::zero();
    for t in sum.terms() {
        for (f, &mult) in &t.poles {
            if i >= f.dim() {
                return Err(Error::Shape("coordinate index out of range".into()));
            }
            let ai = &f.0[i];
            if ai.is_zero() {
                continue;
            }
            let mut poles = t.poles.clone();
            *poles.get_mut(f).expect("present") += 1;
            out.add_term(&t.coeff * rat(mult as i64) * Rat::from_integer(ai.clone()), poles);
        }
    }
    Ok(out)
}

/// Apply the derivation dual to forms[target] (w.r.t. the given independent
/// family), `order` times.
pub fn derive_dual(
    sum: &FracSum,
    forms: &[LinearForm],
    target: usize,
    order: u32,
) -> Result<FracSum> {
    if target >= forms.len() {
        return Err(Error::Shape("target index out of range".into()));
    }
    let rows: Vec<Vec<Int>> = forms.iter().map(|f| f.0.clone()).collect();
    let a = RatMatrix::from_int_rows(&rows)?;
    let d = dual_rows(&a)?; // errors if dependent
    let dual = d.row(target).clone();
    let mut cur = sum.clone();
    for _ in 0..order {
        let mut next = FracSum::zero();
        for (j, c) in dual.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            next = next.add(&derive(&cur, j)?.scale(c));
        }
        cur = next;
    }
    Ok(cur)
}

pub fn homogeneous_components(sum: &FracSum) -> BTreeMap<u32, FracSum> {
    let mut out: BTreeMap<u32, FracSum> = BTreeMap::new();
    for t in sum.terms() {
        out.entry(t.degree())
            .or_insert_with(FracSum::zero)
            .add_term(t.coeff, t.poles);
    }
    out
}

pub fn evaluate(sum: &FracSum, x: &RatVec) -> Result<Rat> {
    let mut total = Rat::zero();
    for t in sum.terms() {
        let mut val = t.coeff.clone();
        for (f, &mult) in &t.poles {
            let fx = f.apply(x);
            if fx.is_zero() {
                return Err(Error::Pole(format!("{:?}", f.0)));
            }
            for _ in 0..mult {
                val /= &fx;
            }
        }
        total += val;
    }
    Ok(total)
}

#[derive(Serialize, Deserialize)]
struct PoleJson {
    form: Vec<i64>,
    mult: u32,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    poles: Vec<PoleJson>,
}

impl Serialize for FracSum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut out = Vec::new();
        for t in self.terms() {
            let poles = t
                .poles
                .iter()
                .map(|(f, &mult)| {
                    let form = f
                        .0
                        .iter()
                        .map(|x| {
                            x.try_into()
                                .map_err(|_| serde::ser::Error::custom("form entry too large"))
                        })
                        .collect::<std::result::Result<Vec<i64>, S::Error>>()?;
                    Ok(PoleJson { form, mult })
                })
                .collect::<std::result::Result<Vec<_>, S::Error>>()?;
            out.push(TermJson {
                coeff: rat_to_string(&t.coeff),
                poles,
            });
        }
        out.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FracSum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<TermJson>::deserialize(deserializer)?;
        let mut out = FracSum::zero();
        for t in terms {
            let coeff = rat_from_str(&t.coeff).map_err(D::Error::custom)?;
            let mut coeff = coeff;
            let mut poles = Poles::new();
            for p in t.poles {
                if p.mult == 0 {
                    return Err(D::Error::custom("pole multiplicity must be positive"));
                }
                let ints: Vec<Int> = p.form.iter().map(|&x| Int::from(x)).collect();
                let (form, scale) = LinearForm::normalize(&ints).map_err(D::Error::custom)?;
                for _ in 0..p.mult {
                    coeff /= &scale;
                }
                *poles.entry(form).or_insert(0) += p.mult;
            }
            out.add_term(coeff, poles);
        }
        Ok(out)
    }
}
