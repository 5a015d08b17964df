//! Dense matrices over commutative rings: division-free characteristic
//! polynomials, compound and Kronecker matrices, elementary divisors over the
//! local ring `GR(p^m, d)`, and ranks over finite fields.

use std::fmt;

use crate::error::{Error, Result};
use crate::wittring::{Approx, FieldElement, GaloisRingElement};

/// The ring operations the matrix routines need. Elements carry their ring,
/// so constants are produced from an existing element.
pub trait CommRing: Clone + PartialEq {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
}

impl CommRing for GaloisRingElement {
    fn zero_like(&self) -> Self {
        GaloisRingElement::zero_like(self)
    }
    fn one_like(&self) -> Self {
        GaloisRingElement::one_like(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
}

impl CommRing for FieldElement {
    fn zero_like(&self) -> Self {
        FieldElement::zero(self.params())
    }
    fn one_like(&self) -> Self {
        FieldElement::one(self.params())
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
}

impl CommRing for Approx {
    fn zero_like(&self) -> Self {
        Approx::zero_like(self)
    }
    fn one_like(&self) -> Self {
        Approx::one_like(self)
    }
    fn plus(&self, o: &Self) -> Self {
        Approx::plus(self, o)
    }
    fn minus(&self, o: &Self) -> Self {
        Approx::minus(self, o)
    }
    fn times(&self, o: &Self) -> Self {
        Approx::times(self, o)
    }
    fn negated(&self) -> Self {
        Approx::negated(self)
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.cols.max(1))).finish()
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged matrix".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols.max(1)).map(<[T]>::to_vec).collect()
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix<T> {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }
}

impl<T: CommRing> Matrix<T> {
    pub fn identity_like(n: usize, sample: &T) -> Self {
        let (zero, one) = (sample.zero_like(), sample.one_like());
        Matrix::from_fn(n, n, |i, j| if i == j { one.clone() } else { zero.clone() })
    }

    pub fn mul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "matrix shapes do not compose");
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = self.get(i, 0).times(other.get(0, j));
            for k in 1..self.cols {
                acc = acc.plus(&self.get(i, k).times(other.get(k, j)));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = self.get(i, 0).times(&v[0]);
                for k in 1..self.cols {
                    acc = acc.plus(&self.get(i, k).times(&v[k]));
                }
                acc
            })
            .collect()
    }

    pub fn kron(&self, other: &Matrix<T>) -> Matrix<T> {
        let (r2, c2) = (other.rows, other.cols);
        Matrix::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self.get(i / r2, j / c2).times(other.get(i % r2, j % c2))
        })
    }

    /// Characteristic polynomial `det(X·I − A)`, coefficients lowest degree
    /// first (monic, length `n + 1`), by Berkowitz's division-free recurrence.
    pub fn charpoly(&self) -> Vec<T> {
        assert!(self.is_square(), "characteristic polynomial of a non-square matrix");
        let n = self.rows;
        assert!(n > 0, "characteristic polynomial of an empty matrix");
        let one = self.data[0].one_like();
        // highest-degree-first coefficients of the leading principal minors
        let mut prev: Vec<T> = vec![one.clone()];
        for k in 1..=n {
            let a = self.get(k - 1, k - 1);
            // s_t = r · B^t · c with B the leading (k-1)-block
            let mut s = Vec::with_capacity(k.saturating_sub(1));
            if k > 1 {
                let mut w: Vec<T> = (0..k - 1).map(|i| self.get(i, k - 1).clone()).collect();
                for t in 0..k - 1 {
                    let mut acc = self.get(k - 1, 0).times(&w[0]);
                    for j in 1..k - 1 {
                        acc = acc.plus(&self.get(k - 1, j).times(&w[j]));
                    }
                    s.push(acc);
                    if t + 1 < k - 1 {
                        w = (0..k - 1)
                            .map(|i| {
                                let mut acc = self.get(i, 0).times(&w[0]);
                                for j in 1..k - 1 {
                                    acc = acc.plus(&self.get(i, j).times(&w[j]));
                                }
                                acc
                            })
                            .collect();
                    }
                }
            }
            let mut next = Vec::with_capacity(k + 1);
            for l in 0..=k {
                let mut c = if l < prev.len() { prev[l].clone() } else { one.zero_like() };
                if l >= 1 && l - 1 < prev.len() {
                    c = c.minus(&a.times(&prev[l - 1]));
                }
                if l >= 2 {
                    for i in 0..=l - 2 {
                        if i < prev.len() && l - 2 - i < s.len() {
                            c = c.minus(&prev[i].times(&s[l - 2 - i]));
                        }
                    }
                }
                next.push(c);
            }
            prev = next;
        }
        prev.reverse();
        prev
    }

    pub fn determinant(&self) -> T {
        let cp = self.charpoly();
        if self.rows % 2 == 0 {
            cp[0].clone()
        } else {
            cp[0].negated()
        }
    }

    /// The `i`-th compound matrix: minors indexed by `i`-subsets in
    /// lexicographic order (rows by the target subset, columns by the source).
    pub fn compound(&self, i: usize) -> Matrix<T> {
        assert!(self.is_square() && i >= 1 && i <= self.rows);
        let subsets = index_subsets(self.rows, i);
        Matrix::from_fn(subsets.len(), subsets.len(), |a, b| self.submatrix(&subsets[a], &subsets[b]).determinant())
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn index_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x);
            rec(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl Matrix<GaloisRingElement> {
    /// `σ^k` applied entrywise.
    pub fn frobenius_pow(&self, k: usize) -> Self {
        self.map(|x| x.frobenius_pow(k))
    }

    /// Reduction modulo `p`.
    pub fn residue(&self) -> Matrix<FieldElement> {
        self.map(GaloisRingElement::residue)
    }

    /// Exponents of the elementary divisors over `GR(p^m, d)`, ascending.
    ///
    /// Pivots are entries of minimal valuation, ties broken in row-major
    /// order. Fails with [`Error::InsufficientPrecision`] if a residual block
    /// vanishes modulo `p^m` before all divisors are found.
    pub fn elementary_divisors(&self) -> Result<Vec<u32>> {
        let mut a = self.clone();
        let n = a.rows.min(a.cols);
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut best: Option<(u32, usize, usize)> = None;
            for i in k..a.rows {
                for j in k..a.cols {
                    let v = a.get(i, j).valuation();
                    if best.map_or(true, |(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
            let (v, pi, pj) = best.expect("nonempty block");
            let m = a.get(pi, pj).precision();
            if v >= m {
                return Err(Error::InsufficientPrecision(format!(
                    "{} elementary divisor(s) vanish modulo p^{m}",
                    n - k
                )));
            }
            a.swap_rows(k, pi);
            a.swap_cols(k, pj);
            let pivot = a.get(k, k).clone();
            let unit = divide_by_p_power(&pivot, v).inv()?;
            for i in k + 1..a.rows {
                let factor = &divide_by_p_power(a.get(i, k), v) * &unit;
                for j in k..a.cols {
                    let t = &factor * a.get(k, j);
                    let new = a.get(i, j) - &t;
                    a.set(i, j, new);
                }
            }
            for j in k + 1..a.cols {
                let factor = &divide_by_p_power(a.get(k, j), v) * &unit;
                for i in k..a.rows {
                    let t = &factor * a.get(i, k);
                    let new = a.get(i, j) - &t;
                    a.set(i, j, new);
                }
            }
            out.push(v);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Inverse of a matrix whose determinant is a unit.
    pub fn inverse(&self) -> Result<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let sample = self.data[0].clone();
        let mut a = self.clone();
        let mut inv = Matrix::identity_like(n, &sample);
        for k in 0..n {
            let pivot_row = (k..n)
                .find(|&i| a.get(i, k).is_unit())
                .ok_or_else(|| Error::NonUnit(self.determinant().valuation()))?;
            a.swap_rows(k, pivot_row);
            inv.swap_rows(k, pivot_row);
            let pinv = a.get(k, k).inv()?;
            for j in 0..n {
                let x = a.get(k, j) * &pinv;
                a.set(k, j, x);
                let y = inv.get(k, j) * &pinv;
                inv.set(k, j, y);
            }
            for i in 0..n {
                if i == k || a.get(i, k).is_zero() {
                    continue;
                }
                let f = a.get(i, k).clone();
                for j in 0..n {
                    let x = a.get(i, j) - &(&f * a.get(k, j));
                    a.set(i, j, x);
                    let y = inv.get(i, j) - &(&f * inv.get(k, j));
                    inv.set(i, j, y);
                }
            }
        }
        Ok(inv)
    }
}

/// `a / p^v` for `a` divisible by `p^v`, as a coordinate-wise quotient.
fn divide_by_p_power(a: &GaloisRingElement, v: u32) -> GaloisRingElement {
    let pv = a.params().p_pow(v);
    let coords = a.coords().iter().map(|&c| c / pv).collect();
    GaloisRingElement::from_coords_reduced(a.params(), a.precision(), coords).expect("same ring")
}

impl Matrix<FieldElement> {
    /// `x ↦ x^{p^k}` applied entrywise.
    pub fn frobenius_pow(&self, k: usize) -> Self {
        self.map(|x| x.frobenius_pow(k))
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..a.cols {
            let Some(pr) = (rank..a.rows).find(|&i| !a.get(i, col).is_zero()) else {
                continue;
            };
            a.swap_rows(rank, pr);
            let inv = a.get(rank, col).inv().expect("nonzero field element");
            for i in rank + 1..a.rows {
                if a.get(i, col).is_zero() {
                    continue;
                }
                let f = a.get(i, col) * &inv;
                for j in col..a.cols {
                    let x = a.get(i, j) - &(&f * a.get(rank, j));
                    a.set(i, j, x);
                }
            }
            rank += 1;
            if rank == a.rows {
                break;
            }
        }
        rank
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wittring::FieldParams;
    use std::sync::Arc;

    fn el(f: &Arc<FieldParams>, m: u32, v: i64) -> GaloisRingElement {
        GaloisRingElement::from_int(f, m, v).unwrap()
    }

    fn int_matrix(f: &Arc<FieldParams>, m: u32, rows: &[&[i64]]) -> Matrix<GaloisRingElement> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| el(f, m, v)).collect()).collect()).unwrap()
    }

    /// Leibniz expansion, the independent determinant oracle.
    fn leibniz<T: CommRing>(a: &Matrix<T>) -> T {
        fn perms(n: usize) -> Vec<(Vec<usize>, bool)> {
            if n == 0 {
                return vec![(vec![], true)];
            }
            let mut out = Vec::new();
            for (p, even) in perms(n - 1) {
                for pos in 0..n {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    let swaps = n - 1 - pos;
                    out.push((q, even == (swaps % 2 == 0)));
                }
            }
            out
        }
        let n = a.rows();
        let zero = a.get(0, 0).zero_like();
        perms(n).into_iter().fold(zero, |acc, (p, even)| {
            let mut term = a.get(0, 0).one_like();
            for (i, &j) in p.iter().enumerate() {
                term = term.times(a.get(i, j));
            }
            if even {
                acc.plus(&term)
            } else {
                acc.minus(&term)
            }
        })
    }

    #[test]
    fn berkowitz_matches_leibniz_and_cayley_hamilton() {
        let f = FieldParams::get(3, 2).unwrap();
        let m = 4;
        let n = f.p_pow(m);
        for size in 1..=4usize {
            for seed in 0..6u64 {
                let a = Matrix::from_fn(size, size, |i, j| {
                    let k = seed * 31 + (i * 7 + j * 3) as u64;
                    GaloisRingElement::from_coords(&f, m, vec![(k * k + 5) % n, (k * 13 + i as u64) % n]).unwrap()
                });
                let cp = a.charpoly();
                assert_eq!(cp.len(), size + 1);
                assert_eq!(cp[size], a.get(0, 0).one_like());
                assert_eq!(a.determinant(), leibniz(&a));
                // Cayley–Hamilton
                let mut acc = Matrix::from_fn(size, size, |_, _| a.get(0, 0).zero_like());
                let mut pw = Matrix::identity_like(size, a.get(0, 0));
                for c in &cp {
                    let term = pw.map(|x| x * c);
                    acc = Matrix::from_fn(size, size, |i, j| acc.get(i, j) + term.get(i, j));
                    pw = pw.mul(&a);
                }
                assert!(acc.entries().all(GaloisRingElement::is_zero));
            }
        }
    }

    #[test]
    fn charpoly_small_example() {
        let f = FieldParams::get(2, 1).unwrap();
        // [[1, 2], [2, 0]] at p = 2: X^2 - X - 4
        let a = int_matrix(&f, 5, &[&[1, 2], &[2, 0]]);
        let cp = a.charpoly();
        assert_eq!(cp, vec![el(&f, 5, -4), el(&f, 5, -1), el(&f, 5, 1)]);
    }

    #[test]
    fn elementary_divisors_examples() {
        let f = FieldParams::get(2, 1).unwrap();
        let diag = int_matrix(&f, 6, &[&[4, 0, 0], &[0, 1, 0], &[0, 0, 2]]);
        assert_eq!(diag.elementary_divisors().unwrap(), vec![0, 1, 2]);
        // example family at t = 1: [[1, p], [p, 0]]
        let ex = int_matrix(&f, 4, &[&[1, 2], &[2, 0]]);
        assert_eq!(ex.elementary_divisors().unwrap(), vec![0, 2]);
        let undetermined = int_matrix(&f, 2, &[&[1, 0], &[0, 4]]);
        assert!(matches!(undetermined.elementary_divisors(), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn elementary_divisors_sum_to_det_valuation() {
        let f = FieldParams::get(5, 2).unwrap();
        let m = 6;
        let n = f.p_pow(m);
        for seed in 0..30u64 {
            let a = Matrix::from_fn(3, 3, |i, j| {
                let k = seed * 17 + (i * 5 + j) as u64;
                let scale = f.p_pow(((k * 7) % 3) as u32);
                GaloisRingElement::from_coords_reduced(&f, m, vec![(k * k + 1) * scale % n, (k * 3) * scale % n])
                    .unwrap()
            });
            let det_v = a.determinant().valuation();
            match a.elementary_divisors() {
                Ok(ed) if det_v < m => assert_eq!(ed.iter().sum::<u32>(), det_v),
                Ok(_) => {}
                Err(_) => assert!(det_v >= m),
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let f = FieldParams::get(2, 2).unwrap();
        let a = Matrix::from_rows(vec![
            vec![
                GaloisRingElement::from_coords(&f, 3, vec![1, 1]).unwrap(),
                GaloisRingElement::from_coords(&f, 3, vec![2, 5]).unwrap(),
            ],
            vec![
                GaloisRingElement::from_coords(&f, 3, vec![0, 4]).unwrap(),
                GaloisRingElement::from_coords(&f, 3, vec![3, 0]).unwrap(),
            ],
        ])
        .unwrap();
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity_like(2, a.get(0, 0)));
        let singular = int_matrix(&FieldParams::get(2, 1).unwrap(), 3, &[&[2, 0], &[0, 1]]);
        assert!(singular.inverse().is_err());
    }

    #[test]
    fn compound_of_diagonal_and_kron_determinant() {
        let f = FieldParams::get(3, 1).unwrap();
        let a = int_matrix(&f, 6, &[&[1, 0, 0], &[0, 3, 0], &[0, 0, 9]]);
        let c2 = a.compound(2);
        // subsets {0,1}, {0,2}, {1,2}
        assert_eq!(c2, int_matrix(&f, 6, &[&[3, 0, 0], &[0, 9, 0], &[0, 0, 27]]));
        assert_eq!(a.compound(3).get(0, 0), &a.determinant());
        let b = int_matrix(&f, 6, &[&[1, 2], &[4, 5]]);
        let k = a.kron(&b);
        assert_eq!(k.rows(), 6);
        let da = a.determinant();
        let db = b.determinant();
        // det(A ⊗ B) = det(A)^2 det(B)^3
        assert_eq!(k.determinant(), &(&da * &da) * &(&(&db * &db) * &db));
    }

    #[test]
    fn field_rank() {
        let f = FieldParams::get(2, 2).unwrap();
        let z = FieldElement::zero(&f);
        let o = FieldElement::one(&f);
        let w = FieldElement::from_index(&f, 2);
        let a = Matrix::from_rows(vec![vec![o.clone(), w.clone()], vec![w.clone(), &w * &w]]).unwrap();
        assert_eq!(a.rank(), 1);
        let b = Matrix::from_rows(vec![vec![o.clone(), z.clone()], vec![z.clone(), w]]).unwrap();
        assert_eq!(b.rank(), 2);
        assert_eq!(Matrix::from_rows(vec![vec![z.clone(), z.clone()]]).unwrap().rank(), 0);
    }

    #[test]
    fn subsets_and_binomials() {
        assert_eq!(index_subsets(4, 2).len(), 6);
        assert_eq!(index_subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(binomial(8, 4), 70);
    }
}
