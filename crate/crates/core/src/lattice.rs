//! Exact integer linear algebra: Hermite/Smith normal forms, determinants,
//! integer kernels, unimodularity and primitive-vector reduction.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

/// A vector in Z^n.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeVector(pub Vec<Int>);

impl LatticeVector {
    pub fn new(entries: Vec<Int>) -> Self {
        LatticeVector(entries)
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        LatticeVector(entries.iter().map(|&v| Int::from(v)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        LatticeVector(vec![Int::zero(); dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![Int::zero(); dim];
        v[i] = Int::one();
        LatticeVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|e| e.is_zero())
    }

    pub fn dot(&self, other: &LatticeVector) -> Int {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, s: &Int) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| a * s).collect())
    }

    /// `self` divided by the gcd of its entries.
    pub fn primitive(&self) -> Result<LatticeVector> {
        if self.is_zero() {
            return Err(Error::ZeroVector);
        }
        let mut g = Int::zero();
        for e in &self.0 {
            g = g.gcd(e);
        }
        Ok(LatticeVector(self.0.iter().map(|e| e / &g).collect()))
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Dense row-major matrix over Z.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Int>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<LatticeVector>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.dim());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.dim(), c, "ragged rows");
            data.extend(row.0);
        }
        IntegerMatrix { rows: r, cols: c, data }
    }

    pub fn from_cols(cols: Vec<LatticeVector>) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |v| v.dim());
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.dim(), r, "ragged columns");
            for i in 0..r {
                m[(i, j)] = col.0[i].clone();
            }
        }
        m
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| LatticeVector::from_i64(r)).collect())
    }

    pub fn row(&self, i: usize) -> LatticeVector {
        LatticeVector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn col(&self, j: usize) -> LatticeVector {
        LatticeVector((0..self.rows).map(|i| self[(i, j)].clone()).collect())
    }

    pub fn transpose(&self) -> IntegerMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, other.rows);
        let mut p = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = &self[(i, k)] * &other[(k, j)];
                    p[(i, j)] += add;
                }
            }
        }
        p
    }

    pub fn mul_vec(&self, v: &LatticeVector) -> LatticeVector {
        assert_eq!(self.cols, v.dim());
        LatticeVector(
            (0..self.rows)
                .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v.0[j]).sum())
                .collect(),
        )
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// row a -= q * row b
    fn row_sub(&mut self, a: usize, b: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let sub = q * &self[(b, j)];
            self[(a, j)] -= sub;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self[(i, j)].clone();
            self[(i, j)] = v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntegerMatrix {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntegerMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Row-style Hermite normal form: returns `(H, U)` with `U` unimodular and
/// `U * m = H`. Pivots are positive, entries above each pivot are reduced
/// into `[0, pivot)`.
pub fn hermite_normal_form(m: &IntegerMatrix) -> (IntegerMatrix, IntegerMatrix) {
    let mut h = m.clone();
    let mut u = IntegerMatrix::identity(m.rows);
    let mut pivot_row = 0;
    let mut pivots: Vec<(usize, usize)> = Vec::new();

    for col in 0..h.cols {
        if pivot_row == h.rows {
            break;
        }
        // Clear the column below pivot_row by gcd elimination.
        loop {
            let mut best: Option<usize> = None;
            for i in pivot_row..h.rows {
                if !h[(i, col)].is_zero() {
                    best = match best {
                        None => Some(i),
                        Some(b) if h[(i, col)].abs() < h[(b, col)].abs() => Some(i),
                        other => other,
                    };
                }
            }
            let Some(b) = best else { break };
            h.swap_rows(pivot_row, b);
            u.swap_rows(pivot_row, b);
            let mut done = true;
            for i in (pivot_row + 1)..h.rows {
                if h[(i, col)].is_zero() {
                    continue;
                }
                let q = h[(i, col)].div_floor(&h[(pivot_row, col)]);
                h.row_sub(i, pivot_row, &q);
                u.row_sub(i, pivot_row, &q);
                if !h[(i, col)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(pivot_row, col)].is_zero() {
            continue;
        }
        if h[(pivot_row, col)].is_negative() {
            h.negate_row(pivot_row);
            u.negate_row(pivot_row);
        }
        pivots.push((pivot_row, col));
        pivot_row += 1;
    }

    // Reduce entries above each pivot.
    for &(r, c) in pivots.iter() {
        for i in 0..r {
            let q = h[(i, c)].div_floor(&h[(r, c)]);
            h.row_sub(i, r, &q);
            u.row_sub(i, r, &q);
        }
    }
    (h, u)
}

/// Exact determinant via fraction-free (Bareiss) elimination.
pub fn determinant(m: &IntegerMatrix) -> Result<Int> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Int::one());
    }
    let mut a = m.clone();
    let mut sign = 1i32;
    let mut prev = Int::one();
    for k in 0..n - 1 {
        if a[(k, k)].is_zero() {
            let swap = (k + 1..n).find(|&i| !a[(i, k)].is_zero());
            match swap {
                Some(i) => {
                    a.swap_rows(k, i);
                    sign = -sign;
                }
                None => return Ok(Int::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[(k, k)] * &a[(i, j)] - &a[(i, k)] * &a[(k, j)];
                a[(i, j)] = &num / &prev;
            }
            a[(i, k)] = Int::zero();
        }
        prev = a[(k, k)].clone();
    }
    let d = a[(n - 1, n - 1)].clone();
    Ok(if sign < 0 { -d } else { d })
}

pub fn is_unimodular(m: &IntegerMatrix) -> Result<bool> {
    Ok(determinant(m)?.abs().is_one())
}

/// Invariant factors of the Smith normal form (nonzero diagonal entries,
/// positive, each dividing the next).
pub fn smith_invariant_factors(m: &IntegerMatrix) -> Vec<Int> {
    let mut a = m.clone();
    let rows = a.rows;
    let cols = a.cols;
    let mut factors = Vec::new();
    let mut offset = 0;
    while offset < rows && offset < cols {
        // Find a nonzero pivot in the trailing block.
        let mut pivot = None;
        'search: for i in offset..rows {
            for j in offset..cols {
                if !a[(i, j)].is_zero() {
                    pivot = Some((i, j));
                    break 'search;
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap_rows(offset, pi);
        // swap columns offset <-> pj
        for i in 0..rows {
            let tmp = a[(i, offset)].clone();
            a[(i, offset)] = a[(i, pj)].clone();
            a[(i, pj)] = tmp;
        }
        // Eliminate row/column `offset` with gcd reductions.
        loop {
            let mut changed = false;
            for i in offset + 1..rows {
                if a[(i, offset)].is_zero() {
                    continue;
                }
                if a[(i, offset)].abs() < a[(offset, offset)].abs() {
                    a.swap_rows(offset, i);
                }
                let q = a[(i, offset)].div_floor(&a[(offset, offset)]);
                a.row_sub(i, offset, &q);
                if !a[(i, offset)].is_zero() {
                    changed = true;
                }
            }
            for j in offset + 1..cols {
                if a[(offset, j)].is_zero() {
                    continue;
                }
                if a[(offset, j)].abs() < a[(offset, offset)].abs() {
                    for i in 0..rows {
                        let tmp = a[(i, offset)].clone();
                        a[(i, offset)] = a[(i, j)].clone();
                        a[(i, j)] = tmp;
                    }
                }
                let q = a[(offset, j)].div_floor(&a[(offset, offset)]);
                for i in 0..rows {
                    let sub = &q * &a[(i, offset)];
                    a[(i, j)] -= sub;
                }
                if !a[(offset, j)].is_zero() {
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        // Pivot must divide every entry of the trailing block.
        let mut fixed = true;
        'divcheck: for i in offset + 1..rows {
            for j in offset + 1..cols {
                if !(&a[(i, j)] % &a[(offset, offset)]).is_zero() {
                    // Fold the offending row into row `offset` and retry.
                    for jj in 0..cols {
                        let add = a[(i, jj)].clone();
                        a[(offset, jj)] += add;
                    }
                    fixed = false;
                    break 'divcheck;
                }
            }
        }
        if !fixed {
            continue;
        }
        factors.push(a[(offset, offset)].abs());
        offset += 1;
    }
    factors
}

pub fn rank(m: &IntegerMatrix) -> usize {
    smith_invariant_factors(m).len()
}

/// Lattice basis of `{v in Z^cols : m * v = 0}`, returned in Hermite normal
/// form of the kernel lattice.
pub fn integer_kernel(m: &IntegerMatrix) -> Vec<LatticeVector> {
    let (ht, ut) = hermite_normal_form(&m.transpose());
    let mut basis = Vec::new();
    for i in 0..ht.rows {
        if ht.row(i).is_zero() {
            basis.push(ut.row(i));
        }
    }
    if basis.is_empty() {
        return basis;
    }
    let (hk, _) = hermite_normal_form(&IntegerMatrix::from_rows(basis));
    (0..hk.rows)
        .map(|i| hk.row(i))
        .filter(|r| !r.is_zero())
        .collect()
}

/// Solve `A * x = b` over the rationals where `A` has full column rank.
/// Returns `None` when the system is inconsistent.
pub fn solve_rational(a: &IntegerMatrix, b: &LatticeVector) -> Option<Vec<Rat>> {
    solve_rational_rhs(a, &b.0.iter().map(|e| Rat::from(e.clone())).collect::<Vec<_>>())
}

/// Rational Gaussian elimination; `a` is rows x cols, rhs has `rows` entries.
/// Returns a solution if one exists (free variables set to zero).
pub fn solve_rational_rhs(a: &IntegerMatrix, rhs: &[Rat]) -> Option<Vec<Rat>> {
    let rows = a.rows;
    let cols = a.cols;
    assert_eq!(rhs.len(), rows);
    let mut m: Vec<Vec<Rat>> = (0..rows)
        .map(|i| {
            let mut row: Vec<Rat> = (0..cols).map(|j| Rat::from(a[(i, j)].clone())).collect();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].clone();
        for v in m[r].iter_mut() {
            *v = &*v / &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..=cols {
                    let sub = &f * &m[r][j];
                    m[i][j] = &m[i][j] - &sub;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    // Inconsistent if a zero row has nonzero rhs.
    for i in r..rows {
        if !m[i][cols].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rat::zero(); cols];
    for (k, &c) in pivot_cols.iter().enumerate() {
        x[c] = m[k][cols].clone();
    }
    Some(x)
}

/// Inverse of a unimodular (or any invertible-over-Q) square matrix, exact.
/// Returns entries as rationals.
pub fn inverse_rational(a: &IntegerMatrix) -> Option<Vec<Vec<Rat>>> {
    if !a.is_square() {
        return None;
    }
    let n = a.rows;
    let mut cols_out = Vec::with_capacity(n);
    for j in 0..n {
        let e = LatticeVector::unit(n, j);
        let x = solve_rational(a, &e)?;
        // verify (solve_rational zero-fills free vars; reject singular)
        cols_out.push(x);
    }
    // cols_out[j] is the j-th column of the inverse
    let mut rows = vec![vec![Rat::zero(); n]; n];
    for j in 0..n {
        for i in 0..n {
            rows[i][j] = cols_out[j][i].clone();
        }
    }
    // sanity: A * inv = I
    for i in 0..n {
        for j in 0..n {
            let mut s = Rat::zero();
            for k in 0..n {
                s += Rat::from(a[(i, k)].clone()) * &rows[k][j];
            }
            let expect = if i == j { Rat::one() } else { Rat::zero() };
            if s != expect {
                return None;
            }
        }
    }
    Some(rows)
}

/// Extend a set of independent primitive vectors (the rows of `basis`,
/// spanning a saturated sublattice) to a basis of Z^n. Returns the n x n
/// unimodular matrix whose first `basis.rows` rows are a lattice basis of
/// the saturation of the row span, the rest completing it.
pub fn saturate_and_extend(basis: &IntegerMatrix) -> IntegerMatrix {
    let n = basis.cols;
    // HNF of the rows gives a lattice basis of the row span's lattice; the
    // saturation is obtained via the kernel-of-kernel trick.
    let ker = integer_kernel(basis); // basis of row-span-perp lattice
    let sat = if ker.is_empty() {
        // full rank: saturation of row span is all of Z^n
        (0..n).map(|i| LatticeVector::unit(n, i)).collect::<Vec<_>>()
    } else {
        integer_kernel(&IntegerMatrix::from_rows(ker))
    };
    // Complete greedily with unit vectors, accepting a candidate when the
    // enlarged row set still spans a saturated sublattice (all SNF invariant
    // factors equal to 1).
    let mut rows = sat;
    for i in 0..n {
        if rows.len() == n {
            break;
        }
        let cand = LatticeVector::unit(n, i);
        let mut trial = rows.clone();
        trial.push(cand);
        let tm = IntegerMatrix::from_rows(trial.clone());
        let f = smith_invariant_factors(&tm);
        if f.len() == trial.len() && f.iter().all(|v| v.is_one()) {
            rows = trial;
        }
    }
    assert_eq!(rows.len(), n, "failed to extend lattice basis");
    IntegerMatrix::from_rows(rows)
}
