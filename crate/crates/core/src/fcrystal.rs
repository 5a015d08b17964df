//! Fⁿ-crystals over `F_{p^d}` at finite precision.
//!
//! A crystal is a twist `n ≥ 1` and an `r × r` matrix `M` over `W_m(F_{p^d})`
//! acting by `F(x) = M·σⁿ(x)`, so `F(e_j) = Σ_i M[i][j]·e_i`. Composition then
//! gives `F^s(x) = M·σⁿ(M)⋯σ^{(s-1)n}(M)·σ^{sn}(x)`.
//!
//! For example over `F_4` with `n = 1` and `M = [[0, p], [1, 0]]`, `F(e_1) = e_2`
//! and `F(e_2) = p·e_1`, so `F²` is multiplication by `p`.

use std::sync::Arc;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::linalg::{binomial, Matrix};
use crate::wittring::{base_change_element, FieldParams, GaloisRingElement};

#[derive(Clone, Debug, PartialEq)]
pub struct FCrystal {
    base: Arc<FieldParams>,
    twist: usize,
    precision: u32,
    matrix: Matrix<GaloisRingElement>,
    det_valuation: u32,
}

impl FCrystal {
    /// Validate a matrix as a crystal: square, entries in `W_m(F_{p^d})`, and
    /// `det` nonzero modulo `p^m`.
    pub fn new(base: &Arc<FieldParams>, twist: usize, m: u32, matrix: Matrix<GaloisRingElement>) -> Result<Self> {
        if twist == 0 {
            return Err(Error::InvalidInput("twist must be at least 1".into()));
        }
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::InvalidInput(format!(
                "crystal matrix must be square and nonempty, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        for x in matrix.entries() {
            if x.params() != base || x.precision() != m {
                return Err(Error::ParamMismatch(format!(
                    "entry in GR({}^{}, {}) but crystal over GR({}^{m}, {})",
                    x.p(),
                    x.precision(),
                    x.params().d(),
                    base.p(),
                    base.d()
                )));
            }
        }
        let det_valuation = matrix.determinant().valuation();
        if det_valuation >= m {
            return Err(Error::NotACrystal(m));
        }
        Ok(FCrystal { base: base.clone(), twist, precision: m, matrix, det_valuation })
    }

    /// Build from integer entries.
    pub fn from_int_rows(base: &Arc<FieldParams>, twist: usize, m: u32, rows: &[Vec<i64>]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| GaloisRingElement::from_int(base, m, v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        FCrystal::new(base, twist, m, Matrix::from_rows(rows)?)
    }

    /// The rank-1 crystal `[1]`.
    pub fn unit(base: &Arc<FieldParams>, twist: usize, m: u32) -> Result<Self> {
        let one = GaloisRingElement::one(base, m)?;
        FCrystal::new(base, twist, m, Matrix::from_fn(1, 1, |_, _| one.clone()))
    }

    pub fn identity(base: &Arc<FieldParams>, twist: usize, m: u32, rank: usize) -> Result<Self> {
        let one = GaloisRingElement::one(base, m)?;
        FCrystal::new(base, twist, m, Matrix::identity_like(rank, &one))
    }

    pub fn base(&self) -> &Arc<FieldParams> {
        &self.base
    }

    pub fn p(&self) -> u64 {
        self.base.p()
    }

    pub fn twist(&self) -> usize {
        self.twist
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<GaloisRingElement> {
        &self.matrix
    }

    pub fn det_valuation(&self) -> u32 {
        self.det_valuation
    }

    /// `F(x) = M·σⁿ(x)`.
    pub fn apply(&self, x: &[GaloisRingElement]) -> Result<Vec<GaloisRingElement>> {
        if x.len() != self.rank() {
            return Err(Error::RankMismatch(x.len(), self.rank()));
        }
        let sx: Vec<_> = x.iter().map(|c| c.frobenius_pow(self.twist)).collect();
        if sx.iter().any(|c| !c.same_ring(self.matrix.get(0, 0))) {
            return Err(Error::ParamMismatch("vector not over the crystal's ring".into()));
        }
        Ok(self.matrix.mul_vec(&sx))
    }

    /// The same crystal in the basis given by the columns of `u`:
    /// `U⁻¹·M·σⁿ(U)`.
    pub fn change_basis(&self, u: &Matrix<GaloisRingElement>) -> Result<Self> {
        if u.rows() != self.rank() || u.cols() != self.rank() {
            return Err(Error::RankMismatch(u.rows(), self.rank()));
        }
        let m = u.inverse()?.mul(&self.matrix).mul(&u.frobenius_pow(self.twist));
        FCrystal::new(&self.base, self.twist, self.precision, m)
    }

    /// Truncate to precision `m' ≤ m`.
    pub fn truncate(&self, m: u32) -> Result<Self> {
        let matrix = self.matrix.entries().map(|x| x.change_precision(m)).collect::<Result<Vec<_>>>()?;
        let r = self.rank();
        FCrystal::new(&self.base, self.twist, m, Matrix::from_fn(r, r, |i, j| matrix[i * r + j].clone()))
    }

    /// Reinterpret the coordinates at a higher precision (canonical lift of
    /// each coordinate to `[0, p^m)`). Integer matrices keep their meaning.
    pub fn lift_canonical(&self, m: u32) -> Result<Self> {
        self.base.check_precision(m)?;
        if m < self.precision {
            return Err(Error::InvalidInput(format!("cannot lift from precision {} to {m}", self.precision)));
        }
        FCrystal::new(&self.base, self.twist, m, self.matrix.map(|x| x.lift_canonical(m)))
    }

    /// `C₁ ⊕ C₂`, block diagonal.
    pub fn direct_sum(&self, other: &FCrystal) -> Result<Self> {
        self.check_compatible(other)?;
        let (r1, r2) = (self.rank(), other.rank());
        let zero = self.matrix.get(0, 0).zero_like();
        let m = Matrix::from_fn(r1 + r2, r1 + r2, |i, j| match (i < r1, j < r1) {
            (true, true) => self.matrix.get(i, j).clone(),
            (false, false) => other.matrix.get(i - r1, j - r1).clone(),
            _ => zero.clone(),
        });
        FCrystal::new(&self.base, self.twist, self.precision, m)
    }

    /// `∧^i C` with the default caps.
    pub fn exterior_power(&self, i: usize) -> Result<Self> {
        self.exterior_power_capped(i, &Caps::default())
    }

    /// `∧^i C`: the `i`-th compound matrix in the lexicographic basis of
    /// `i`-subsets. The twist stays `n`, since `∧^iF` is still σⁿ-linear.
    /// `∧⁰C` is `[1]` with twist 1.
    pub fn exterior_power_capped(&self, i: usize, caps: &Caps) -> Result<Self> {
        let r = self.rank();
        if i > r {
            return Err(Error::IndexOutOfRange { index: i, max: r });
        }
        if i == 0 {
            return FCrystal::unit(&self.base, 1, self.precision);
        }
        let dim = binomial(r, i);
        if dim > caps.max_derived_rank {
            return Err(Error::CapExceeded(format!("exterior power of rank {dim} > {}", caps.max_derived_rank)));
        }
        FCrystal::new(&self.base, self.twist, self.precision, self.matrix.compound(i))
    }

    /// `C₁ ⊗ C₂` (Kronecker product); both twists must agree.
    pub fn tensor_product(&self, other: &FCrystal) -> Result<Self> {
        self.tensor_product_capped(other, &Caps::default())
    }

    pub fn tensor_product_capped(&self, other: &FCrystal, caps: &Caps) -> Result<Self> {
        self.check_compatible(other)?;
        let dim = self.rank() * other.rank();
        if dim > caps.max_derived_rank {
            return Err(Error::CapExceeded(format!("tensor product of rank {dim} > {}", caps.max_derived_rank)));
        }
        FCrystal::new(&self.base, self.twist, self.precision, self.matrix.kron(&other.matrix))
    }

    /// `C^{⊗c}` for `c ≥ 1`.
    pub fn tensor_power(&self, c: usize) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidInput("tensor power exponent must be at least 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..c {
            acc = acc.tensor_product(self)?;
        }
        Ok(acc)
    }

    /// `(M, F^s)`: twist `s·n`, matrix `M·σⁿ(M)⋯σ^{(s-1)n}(M)`.
    pub fn iterate(&self, s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidInput("iterate exponent must be at least 1".into()));
        }
        FCrystal::new(&self.base, s * self.twist, self.precision, self.iterate_matrix(s))
    }

    pub(crate) fn iterate_matrix(&self, s: usize) -> Matrix<GaloisRingElement> {
        let mut acc = self.matrix.clone();
        for k in 1..s {
            acc = acc.mul(&self.matrix.frobenius_pow(k * self.twist));
        }
        acc
    }

    /// Re-embed over `F_{p^{d'}}`.
    pub fn base_change(&self, d_new: usize) -> Result<Self> {
        let target = FieldParams::get(self.p(), d_new)?;
        if d_new % self.base.d() != 0 {
            return Err(Error::NotASubfield { small: self.base.d(), large: d_new });
        }
        let entries = self.matrix.entries().map(|x| base_change_element(x, &target)).collect::<Result<Vec<_>>>()?;
        let r = self.rank();
        FCrystal::new(&target, self.twist, self.precision, Matrix::from_fn(r, r, |i, j| entries[i * r + j].clone()))
    }

    fn check_compatible(&self, other: &FCrystal) -> Result<()> {
        if self.base != other.base || self.precision != other.precision || self.twist != other.twist {
            return Err(Error::ParamMismatch(format!(
                "crystals over (p={}, d={}, m={}, n={}) and (p={}, d={}, m={}, n={})",
                self.p(),
                self.base.d(),
                self.precision,
                self.twist,
                other.p(),
                other.base.d(),
                other.precision,
                other.twist
            )));
        }
        Ok(())
    }
}

/// The standard crystal `E(a/b)`: multiplication by `T` on `1, T, …, T^{b-1}`
/// with `T^b = p^a`, twisted by `σⁿ`. Its Newton polygon is the single slope
/// `a/b` for every twist.
pub fn standard_e(a: u64, b: u64, twist: usize, base: &Arc<FieldParams>, m: u32) -> Result<FCrystal> {
    if b == 0 || num_integer::gcd(a, b) != 1 {
        return Err(Error::InvalidSlope { a, b });
    }
    if m as u64 <= a {
        return Err(Error::InsufficientPrecision(format!("E({a}/{b}) needs precision above {a}, got {m}")));
    }
    let b = b as usize;
    let zero = GaloisRingElement::zero(base, m)?;
    let pa = zero.p_power_like(a as u32);
    let one = zero.one_like();
    let matrix = Matrix::from_fn(b, b, |i, j| {
        if i != (j + 1) % b {
            zero.clone()
        } else if j + 1 == b {
            pa.clone()
        } else {
            one.clone()
        }
    });
    FCrystal::new(base, twist, m, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64, d: usize) -> Arc<FieldParams> {
        FieldParams::get(p, d).unwrap()
    }

    #[test]
    fn validation() {
        let b = f(2, 1);
        assert_eq!(FCrystal::identity(&b, 3, 4, 3).unwrap().det_valuation(), 0);
        assert_eq!(FCrystal::from_int_rows(&b, 1, 4, &[vec![0, 0], vec![0, 0]]), Err(Error::NotACrystal(4)));
        let ex = FCrystal::from_int_rows(&b, 1, 4, &[vec![1, 2], vec![2, 0]]).unwrap();
        assert_eq!(ex.det_valuation(), 2);
        let other = GaloisRingElement::one(&f(2, 2), 4).unwrap();
        assert!(matches!(
            FCrystal::new(&b, 1, 4, Matrix::from_fn(1, 1, |_, _| other.clone())),
            Err(Error::ParamMismatch(_))
        ));
    }

    #[test]
    fn standard_e_matrices() {
        let b = f(2, 1);
        let e12 = standard_e(1, 2, 1, &b, 3).unwrap();
        assert_eq!(e12, FCrystal::from_int_rows(&b, 1, 3, &[vec![0, 2], vec![1, 0]]).unwrap());
        assert_eq!(standard_e(0, 1, 1, &b, 3).unwrap().matrix().get(0, 0).coords(), &[1]);
        assert_eq!(standard_e(1, 1, 1, &b, 3).unwrap().matrix().get(0, 0).coords(), &[2]);
        assert_eq!(standard_e(2, 4, 1, &b, 5), Err(Error::InvalidSlope { a: 2, b: 4 }));
        assert!(matches!(standard_e(1, 2, 1, &b, 1), Err(Error::InsufficientPrecision(_))));
        // E(a/b) iterated b times is p^a times the identity (here d = 1)
        let e = standard_e(3, 4, 1, &b, 13).unwrap();
        let it = e.iterate(4).unwrap();
        assert_eq!(it.matrix(), &Matrix::identity_like(4, e.matrix().get(0, 0)).map(|x| x.scale(8)));
    }

    #[test]
    fn semilinearity() {
        let base = f(3, 2);
        let m = 3;
        let n = base.p_pow(m);
        let el = |a: u64, b: u64| GaloisRingElement::from_coords(&base, m, vec![a % n, b % n]).unwrap();
        let c = FCrystal::new(
            &base,
            1,
            m,
            Matrix::from_rows(vec![vec![el(1, 2), el(3, 0)], vec![el(0, 9), el(4, 4)]]).unwrap(),
        )
        .unwrap();
        for k in 0..20u64 {
            let lambda = el(k * 5 + 1, k * 7);
            let x = vec![el(k, 2 * k + 1), el(3 * k + 2, k * k)];
            let lx: Vec<_> = x.iter().map(|c| &lambda * c).collect();
            let lhs = c.apply(&lx).unwrap();
            let fx = c.apply(&x).unwrap();
            let rhs: Vec<_> = fx.iter().map(|c| &lambda.frobenius() * c).collect();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn iterate_prime_field_is_power_and_respects_frobenius() {
        let b = f(5, 1);
        let c = FCrystal::from_int_rows(&b, 1, 4, &[vec![1, 5], vec![3, 25]]).unwrap();
        let it = c.iterate(3).unwrap();
        assert_eq!(it.matrix(), &c.matrix().mul(c.matrix()).mul(c.matrix()));
        assert_eq!(it.twist(), 3);
        assert_eq!(c.iterate(1).unwrap(), c);
        // F^s(x) = F(F(...x))
        let b4 = f(2, 2);
        let el = |a: u64, bb: u64| GaloisRingElement::from_coords(&b4, 3, vec![a, bb]).unwrap();
        let c4 = FCrystal::new(
            &b4,
            1,
            3,
            Matrix::from_rows(vec![vec![el(1, 1), el(2, 0)], vec![el(0, 1), el(3, 2)]]).unwrap(),
        )
        .unwrap();
        let x = vec![el(5, 1), el(2, 7)];
        let twice = c4.apply(&c4.apply(&x).unwrap()).unwrap();
        assert_eq!(c4.iterate(2).unwrap().apply(&x).unwrap(), twice);
    }

    #[test]
    fn sums_tensors_exteriors() {
        let b = f(2, 1);
        let e12 = standard_e(1, 2, 1, &b, 6).unwrap();
        let e0 = standard_e(0, 1, 1, &b, 6).unwrap();
        let s = e12.direct_sum(&e0).unwrap();
        assert_eq!(s.rank(), 3);
        assert_eq!(e12.tensor_power(2).unwrap().rank(), 4);
        assert_eq!(s.exterior_power(1).unwrap(), s);
        let top = s.exterior_power(3).unwrap();
        assert_eq!(top.matrix().get(0, 0), &s.matrix().determinant());
        let zeroth = s.exterior_power(0).unwrap();
        assert_eq!((zeroth.rank(), zeroth.twist()), (1, 1));
        assert_eq!(s.exterior_power(4), Err(Error::IndexOutOfRange { index: 4, max: 3 }));
        let tight = Caps::default().with_overrides("derived_rank=2").unwrap();
        assert!(matches!(s.exterior_power_capped(2, &tight), Err(Error::CapExceeded(_))));
        let other_twist = standard_e(0, 1, 2, &b, 6).unwrap();
        assert!(matches!(e12.tensor_product(&other_twist), Err(Error::ParamMismatch(_))));
    }

    #[test]
    fn base_change_and_truncation() {
        let b = f(2, 1);
        let e = standard_e(1, 2, 1, &b, 4).unwrap();
        assert_eq!(e.base_change(1).unwrap(), e);
        let big = e.base_change(2).unwrap();
        assert_eq!(big.base().d(), 2);
        assert_eq!(big.det_valuation(), 1);
        let b2 = f(2, 2);
        let e2 = standard_e(1, 2, 1, &b2, 4).unwrap();
        assert_eq!(e2.base_change(3), Err(Error::NotASubfield { small: 2, large: 3 }));
        assert_eq!(e.truncate(2).unwrap().precision(), 2);
        assert_eq!(e.truncate(1), Err(Error::NotACrystal(1)));
        assert_eq!(e.truncate(2).unwrap().lift_canonical(4).unwrap(), e);
    }

    #[test]
    fn change_basis_inverse() {
        let b = f(3, 2);
        let el = |a: u64, bb: u64| GaloisRingElement::from_coords(&b, 3, vec![a, bb]).unwrap();
        let c = FCrystal::new(
            &b,
            1,
            3,
            Matrix::from_rows(vec![vec![el(1, 1), el(3, 0)], vec![el(0, 1), el(3, 2)]]).unwrap(),
        )
        .unwrap();
        let u = Matrix::from_rows(vec![vec![el(1, 0), el(2, 1)], vec![el(0, 0), el(1, 2)]]).unwrap();
        let c2 = c.change_basis(&u).unwrap();
        let back = c2.change_basis(&u.inverse().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(c2.det_valuation(), c.det_valuation());
    }
}
