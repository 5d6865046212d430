//! Exact rational linear algebra: vectors, matrices, determinants, minor
//! weights, Hermite normal form, linear solving and dual bases. Everything
//! here is over arbitrary-precision rationals; no floating point.

use crate::{Error, Result};
use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, Zero};

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn int(n: i64) -> Int {
    Int::from(n)
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(int(n))
}

pub fn rat2(n: i64, d: i64) -> Rat {
    Rat::new(int(n), int(d))
}

/// Parse "p/q" or "p".
pub fn rat_from_str(s: &str) -> Result<Rat> {
    let parse_int = |t: &str| -> Result<Int> {
        t.trim()
            .parse::<Int>()
            .map_err(|_| Error::Schema(format!("bad integer {t:?}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(Error::Schema("zero denominator".into()));
            }
            Ok(Rat::new(parse_int(p)?, den))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn gcd_vec(v: &[Int]) -> Int {
    v.iter().fold(Int::zero(), |g, x| g.gcd(x))
}

/// Divide an integer vector by the gcd of its entries. None for the zero vector.
pub fn primitive(v: &[Int]) -> Option<Vec<Int>> {
    let g = gcd_vec(v);
    if g.is_zero() {
        return None;
    }
    Some(v.iter().map(|x| x / &g).collect())
}

pub fn ints(v: &[i64]) -> Vec<Int> {
    v.iter().map(|&x| int(x)).collect()
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct RatVec(pub Vec<Rat>);

impl RatVec {
    pub fn zero(n: usize) -> Self {
        RatVec(vec![Rat::zero(); n])
    }

    pub fn from_ints(v: &[Int]) -> Self {
        RatVec(v.iter().map(|x| Rat::from_integer(x.clone())).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &RatVec) -> Rat {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a * b)
            .fold(Rat::zero(), |acc, x| acc + x)
    }

    pub fn add(&self, other: &RatVec) -> RatVec {
        RatVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RatVec) -> RatVec {
        RatVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Rat) -> RatVec {
        RatVec(self.0.iter().map(|a| a * c).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    /// Clear denominators and divide by the content; None for zero.
    pub fn to_primitive_ints(&self) -> Option<Vec<Int>> {
        let mut lcm = Int::one();
        for x in &self.0 {
            lcm = lcm.lcm(x.denom());
        }
        let cleared: Vec<Int> = self
            .0
            .iter()
            .map(|x| x.numer() * (&lcm / x.denom()))
            .collect();
        primitive(&cleared)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMatrix {
    rows: Vec<RatVec>,
    cols: usize,
}

impl RatMatrix {
    pub fn from_rows(rows: Vec<RatVec>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Shape("matrix needs at least one row".into()));
        }
        let cols = rows[0].dim();
        if rows.iter().any(|r| r.dim() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(RatMatrix { rows, cols })
    }

    pub fn from_int_rows(rows: &[Vec<Int>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| RatVec::from_ints(r)).collect())
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| RatVec(r.iter().map(|&x| rat(x)).collect()))
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut v = RatVec::zero(n);
                v.0[i] = Rat::one();
                v
            })
            .collect();
        RatMatrix { rows, cols: n }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &RatVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[RatVec] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rat {
        &self.rows[i].0[j]
    }

    pub fn transpose(&self) -> RatMatrix {
        let rows = (0..self.cols)
            .map(|j| RatVec((0..self.nrows()).map(|i| self.entry(i, j).clone()).collect()))
            .collect();
        RatMatrix {
            rows,
            cols: self.nrows(),
        }
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != other.nrows() {
            return Err(Error::Shape("dimension mismatch in multiply".into()));
        }
        let ot = other.transpose();
        let rows = self
            .rows
            .iter()
            .map(|r| RatVec(ot.rows.iter().map(|c| r.dot(c)).collect()))
            .collect();
        Ok(RatMatrix {
            rows,
            cols: other.ncols(),
        })
    }

    pub fn mul_vec(&self, v: &RatVec) -> Result<RatVec> {
        if self.cols != v.dim() {
            return Err(Error::Shape("dimension mismatch in matrix-vector".into()));
        }
        Ok(RatVec(self.rows.iter().map(|r| r.dot(v)).collect()))
    }

    pub fn determinant(&self) -> Result<Rat> {
        if self.nrows() != self.cols {
            return Err(Error::Shape("determinant of non-square matrix".into()));
        }
        let n = self.nrows();
        let mut m: Vec<Vec<Rat>> = self.rows.iter().map(|r| r.0.clone()).collect();
        let mut det = Rat::one();
        for col in 0..n {
            let pivot = (col..n).find(|&i| !m[i][col].is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => return Ok(Rat::zero()),
            };
            if pivot != col {
                m.swap(pivot, col);
                det = -det;
            }
            let p = m[col][col].clone();
            det *= &p;
            for i in (col + 1)..n {
                if m[i][col].is_zero() {
                    continue;
                }
                let f = &m[i][col] / &p;
                for j in col..n {
                    let sub = &f * &m[col][j];
                    m[i][j] -= sub;
                }
            }
        }
        Ok(det)
    }

    pub fn rank(&self) -> usize {
        let mut m: Vec<Vec<Rat>> = self.rows.iter().map(|r| r.0.clone()).collect();
        let (nr, nc) = (self.nrows(), self.cols);
        let mut r = 0;
        for col in 0..nc {
            if r == nr {
                break;
            }
            let pivot = (r..nr).find(|&i| !m[i][col].is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => continue,
            };
            m.swap(pivot, r);
            let p = m[r][col].clone();
            for i in (r + 1)..nr {
                if m[i][col].is_zero() {
                    continue;
                }
                let f = &m[i][col] / &p;
                for j in col..nc {
                    let sub = &f * &m[r][j];
                    m[i][j] -= sub;
                }
            }
            r += 1;
        }
        r
    }

    /// Solve Ax = b. Leftmost pivot, lowest row index; free variables set to 0.
    pub fn solve(&self, b: &RatVec) -> Result<Option<RatVec>> {
        if b.dim() != self.nrows() {
            return Err(Error::Shape("rhs length mismatch".into()));
        }
        let (nr, nc) = (self.nrows(), self.cols);
        let mut m: Vec<Vec<Rat>> = self
            .rows
            .iter()
            .zip(&b.0)
            .map(|(r, bi)| {
                let mut row = r.0.clone();
                row.push(bi.clone());
                row
            })
            .collect();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut r = 0;
        for col in 0..nc {
            if r == nr {
                break;
            }
            let pivot = (r..nr).find(|&i| !m[i][col].is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => continue,
            };
            m.swap(pivot, r);
            let p = m[r][col].clone();
            for j in col..=nc {
                m[r][j] = &m[r][j] / &p;
            }
            for i in 0..nr {
                if i == r || m[i][col].is_zero() {
                    continue;
                }
                let f = m[i][col].clone();
                for j in col..=nc {
                    let sub = &f * &m[r][j];
                    m[i][j] -= sub;
                }
            }
            pivots.push((r, col));
            r += 1;
        }
        for i in r..nr {
            if !m[i][nc].is_zero() {
                return Ok(None);
            }
        }
        let mut x = RatVec::zero(nc);
        for &(ri, ci) in &pivots {
            x.0[ci] = m[ri][nc].clone();
        }
        Ok(Some(x))
    }

    pub fn inverse(&self) -> Result<RatMatrix> {
        if self.nrows() != self.cols {
            return Err(Error::Shape("inverse of non-square matrix".into()));
        }
        let n = self.nrows();
        let id = RatMatrix::identity(n);
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            match self.solve(id.row(j))? {
                // solving A x = e_j column-wise: assemble from columns of I
                Some(x) => cols.push(x),
                None => return Err(Error::Rank("singular matrix".into())),
            }
        }
        // cols[j] solves A x = e_j, so they are the columns of A^{-1}
        let rows = (0..n)
            .map(|i| RatVec((0..n).map(|j| cols[j].0[i].clone()).collect()))
            .collect();
        RatMatrix::from_rows(rows)
    }

    /// w(v_1,...,v_k): sum of |det| over all k-row minors. Columns must be
    /// independent.
    pub fn minor_weight(&self) -> Result<Rat> {
        let k = self.cols;
        if self.rank() != k {
            return Err(Error::Rank("columns are linearly dependent".into()));
        }
        let n = self.nrows();
        let mut total = Rat::zero();
        for subset in subsets_of_size(n, k) {
            let rows: Vec<RatVec> = subset.iter().map(|&i| self.rows[i].clone()).collect();
            let minor = RatMatrix::from_rows(rows)?;
            total += minor.determinant()?.abs();
        }
        Ok(total)
    }

    pub fn is_integer(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.0.iter().all(|x| x.denom().is_one()))
    }

    pub fn to_int_rows(&self) -> Result<Vec<Vec<Int>>> {
        if !self.is_integer() {
            return Err(Error::Domain("non-integer entries".into()));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| r.0.iter().map(|x| x.numer().clone()).collect())
            .collect())
    }
}

pub fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

fn floor_div(a: &Int, b: &Int) -> Int {
    a.div_floor(b)
}

/// Row-style Hermite normal form of an integer matrix: H = U * M with U
/// unimodular, H in staircase form with positive pivots and entries above a
/// pivot reduced into [0, pivot).
pub fn hermite_normal_form(m: &RatMatrix) -> Result<(RatMatrix, RatMatrix)> {
    let mut h = m.to_int_rows()?;
    let nr = h.len();
    let nc = m.ncols();
    let mut u: Vec<Vec<Int>> = (0..nr)
        .map(|i| (0..nr).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
        .collect();
    let mut r = 0;
    for col in 0..nc {
        if r == nr {
            break;
        }
        loop {
            // smallest nonzero |entry| among rows r.., lowest index on ties
            let mut best: Option<usize> = None;
            for i in r..nr {
                if h[i][col].is_zero() {
                    continue;
                }
                best = match best {
                    None => Some(i),
                    Some(b) => {
                        if h[i][col].abs() < h[b][col].abs() {
                            Some(i)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
            let b = match best {
                Some(b) => b,
                None => break,
            };
            h.swap(r, b);
            u.swap(r, b);
            let mut reduced_any = false;
            for i in (r + 1)..nr {
                if h[i][col].is_zero() {
                    continue;
                }
                let q = floor_div(&h[i][col], &h[r][col]);
                if !q.is_zero() {
                    for j in 0..nc {
                        let sub = &q * &h[r][j];
                        h[i][j] -= sub;
                    }
                    for j in 0..nr {
                        let sub = &q * &u[r][j];
                        u[i][j] -= sub;
                    }
                }
                if !h[i][col].is_zero() {
                    reduced_any = true;
                }
            }
            if !reduced_any {
                break;
            }
        }
        if !h[r][col].is_zero() {
            if h[r][col].sign() == Sign::Minus {
                for x in h[r].iter_mut() {
                    *x = -x.clone();
                }
                for x in u[r].iter_mut() {
                    *x = -x.clone();
                }
            }
            for i in 0..r {
                let q = floor_div(&h[i][col], &h[r][col]);
                if !q.is_zero() {
                    for j in 0..nc {
                        let sub = &q * &h[r][j];
                        h[i][j] -= sub;
                    }
                    for j in 0..nr {
                        let sub = &q * &u[r][j];
                        u[i][j] -= sub;
                    }
                }
            }
            r += 1;
        }
    }
    Ok((
        RatMatrix::from_int_rows(&h)?,
        RatMatrix::from_int_rows(&u)?,
    ))
}

/// Index of the row lattice of M inside its saturation: the gcd of all
/// maximal minors of an HNF basis of the lattice (the product of the Smith
/// invariant factors).
pub fn lattice_index(m: &RatMatrix) -> Result<Int> {
    let r = m.rank();
    if r == 0 {
        return Ok(Int::one());
    }
    let (h, _) = hermite_normal_form(m)?;
    let basis: Vec<RatVec> = h.rows()[..r].to_vec();
    let bm = RatMatrix::from_rows(basis)?;
    let mut g = Int::zero();
    for subset in subsets_of_size(bm.ncols(), r) {
        let rows: Vec<RatVec> = bm
            .rows()
            .iter()
            .map(|row| RatVec(subset.iter().map(|&j| row.0[j].clone()).collect()))
            .collect();
        let d = RatMatrix::from_rows(rows)?.determinant()?;
        g = g.gcd(d.numer());
        if g.is_one() {
            break;
        }
    }
    Ok(g)
}

/// Basis of the saturation lattice span(M) ∩ Z^k, as rows.
pub fn saturation_basis(m: &RatMatrix) -> Result<Vec<Vec<Int>>> {
    let r = m.rank();
    if r == 0 {
        return Ok(Vec::new());
    }
    let (_, u) = hermite_normal_form(&m.transpose())?;
    // U * M^T = HNF, so M = T^T * W where W = first r rows of (U^{-1})^T
    // generate the saturation.
    let uinv = u.inverse()?;
    let uinv_t = uinv.transpose();
    let rows = uinv_t.to_int_rows()?;
    Ok(rows[..r].to_vec())
}

/// For a primitive full-row-rank integer matrix M (lattice index 1 in its
/// saturation = Z^k restriction), rows completing M's rows to a Z-basis of
/// Z^k. Errors if the lattice is not primitive.
pub fn z_basis_completion(m: &RatMatrix) -> Result<Vec<Vec<Int>>> {
    let r = m.nrows();
    let k = m.ncols();
    if m.rank() != r {
        return Err(Error::Rank("rows are linearly dependent".into()));
    }
    if lattice_index(m)? != Int::one() {
        return Err(Error::Precondition("row lattice is not primitive".into()));
    }
    let (_, u) = hermite_normal_form(&m.transpose())?;
    let uinv = u.inverse()?;
    let uinv_t = uinv.transpose();
    let rows = uinv_t.to_int_rows()?;
    Ok(rows[r..k].to_vec())
}

/// Dual rows: for independent rows L_1..L_k, returns rows L_1*..L_k* with
/// (L_i, L_j*) = delta_ij, canonically chosen as (A A^T)^{-1} A.
pub fn dual_rows(a: &RatMatrix) -> Result<RatMatrix> {
    if a.rank() != a.nrows() {
        return Err(Error::Rank("rows are linearly dependent".into()));
    }
    let g = a.mul(&a.transpose())?;
    let ginv = g.inverse()?;
    ginv.mul(a)
}

pub fn lex_cmp_ints(a: &[Int], b: &[Int]) -> std::cmp::Ordering {
    a.iter().cmp(b.iter())
}

/// Basis of the right nullspace {x : r . x = 0 for all rows r}. `rows` may be
/// empty, in which case the basis of the full space is returned.
pub fn nullspace(rows: &[RatVec], dim: usize) -> Vec<RatVec> {
    if rows.is_empty() {
        return RatMatrix::identity(dim).rows().to_vec();
    }
    let nr = rows.len();
    let mut m: Vec<Vec<Rat>> = rows.iter().map(|r| r.0.clone()).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..dim {
        if r == nr {
            break;
        }
        let pivot = (r..nr).find(|&i| !m[i][col].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => continue,
        };
        m.swap(pivot, r);
        let p = m[r][col].clone();
        for j in col..dim {
            m[r][j] = &m[r][j] / &p;
        }
        for i in 0..nr {
            if i == r || m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col].clone();
            for j in col..dim {
                let sub = &f * &m[r][j];
                m[i][j] -= sub;
            }
        }
        pivots.push(col);
        r += 1;
    }
    let mut basis = Vec::new();
    for free in 0..dim {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = RatVec::zero(dim);
        v.0[free] = Rat::one();
        for (ri, &pc) in pivots.iter().enumerate() {
            v.0[pc] = -m[ri][free].clone();
        }
        basis.push(v);
    }
    basis
}
