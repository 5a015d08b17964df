use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::field::FieldElement;
use super::modulus::{addmod, mulmod, submod};
use super::params::FieldParams;
use crate::error::{Error, Result};

/// An element of the Galois ring `GR(p^m, d) ≅ W_m(F_{p^d})`.
///
/// Coordinates are residues modulo `p^m` in the basis `1, u, …, u^{d-1}`.
/// Arithmetic operators panic on mismatched `(p, d, m)`; the `try_*` methods
/// report [`Error::ParamMismatch`] instead.
#[derive(Clone)]
pub struct GaloisRingElement {
    params: Arc<FieldParams>,
    precision: u32,
    coords: Vec<u64>,
}

impl PartialEq for GaloisRingElement {
    fn eq(&self, other: &Self) -> bool {
        *self.params == *other.params && self.precision == other.precision && self.coords == other.coords
    }
}

impl Eq for GaloisRingElement {}

impl fmt::Debug for GaloisRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for GaloisRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.len() == 1 {
            write!(f, "{}", self.coords[0])
        } else {
            write!(f, "{:?}", self.coords)
        }
    }
}

impl GaloisRingElement {
    pub fn zero(params: &Arc<FieldParams>, m: u32) -> Result<Self> {
        params.check_precision(m)?;
        Ok(Self { params: params.clone(), precision: m, coords: vec![0; params.d()] })
    }

    pub fn one(params: &Arc<FieldParams>, m: u32) -> Result<Self> {
        Self::from_int(params, m, 1)
    }

    /// The image of an integer.
    pub fn from_int(params: &Arc<FieldParams>, m: u32, value: i64) -> Result<Self> {
        params.check_precision(m)?;
        let n = params.p_pow(m);
        let r = value.rem_euclid(n as i64) as u64;
        let mut coords = vec![0; params.d()];
        coords[0] = r % n;
        Ok(Self { params: params.clone(), precision: m, coords })
    }

    /// Validating constructor: every coordinate must lie in `[0, p^m)`.
    pub fn from_coords(params: &Arc<FieldParams>, m: u32, coords: Vec<u64>) -> Result<Self> {
        params.check_precision(m)?;
        if coords.len() != params.d() {
            return Err(Error::InvalidInput(format!("expected {} coordinates, got {}", params.d(), coords.len())));
        }
        let n = params.p_pow(m);
        if let Some(bad) = coords.iter().find(|&&c| c >= n) {
            return Err(Error::InvalidInput(format!("coordinate {bad} not below p^m = {n}")));
        }
        Ok(Self { params: params.clone(), precision: m, coords })
    }

    /// Constructor reducing every coordinate modulo `p^m`.
    pub fn from_coords_reduced(params: &Arc<FieldParams>, m: u32, mut coords: Vec<u64>) -> Result<Self> {
        params.check_precision(m)?;
        coords.resize(params.d(), 0);
        let n = params.p_pow(m);
        for c in coords.iter_mut() {
            *c %= n;
        }
        Ok(Self { params: params.clone(), precision: m, coords })
    }

    pub(crate) fn raw(params: Arc<FieldParams>, precision: u32, coords: Vec<u64>) -> Self {
        Self { params, precision, coords }
    }

    pub fn params(&self) -> &Arc<FieldParams> {
        &self.params
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn p(&self) -> u64 {
        self.params.p()
    }

    fn modulus(&self) -> u64 {
        self.params.p_pow(self.precision)
    }

    pub fn same_ring(&self, other: &Self) -> bool {
        *self.params == *other.params && self.precision == other.precision
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.same_ring(other) {
            Ok(())
        } else {
            Err(Error::ParamMismatch(format!(
                "({}, {}, {}) vs ({}, {}, {})",
                self.p(),
                self.params.d(),
                self.precision,
                other.p(),
                other.params.d(),
                other.precision
            )))
        }
    }

    pub fn zero_like(&self) -> Self {
        Self { params: self.params.clone(), precision: self.precision, coords: vec![0; self.coords.len()] }
    }

    pub fn one_like(&self) -> Self {
        let mut z = self.zero_like();
        z.coords[0] = 1 % self.modulus();
        z
    }

    /// `p^k` in this ring (zero once `k >= m`).
    pub fn p_power_like(&self, k: u32) -> Self {
        let mut z = self.zero_like();
        if k < self.precision {
            z.coords[0] = self.params.p_pow(k);
        }
        z
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        let n = self.modulus();
        let coords = self.coords.iter().zip(&other.coords).map(|(&a, &b)| addmod(a, b, n)).collect();
        Self { params: self.params.clone(), precision: self.precision, coords }
    }

    fn sub_unchecked(&self, other: &Self) -> Self {
        let n = self.modulus();
        let coords = self.coords.iter().zip(&other.coords).map(|(&a, &b)| submod(a, b, n)).collect();
        Self { params: self.params.clone(), precision: self.precision, coords }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.modulus();
        let d = self.coords.len();
        if d == 1 {
            return Self {
                params: self.params.clone(),
                precision: self.precision,
                coords: vec![mulmod(self.coords[0], other.coords[0], n)],
            };
        }
        let mut prod = vec![0u64; 2 * d - 1];
        for (i, &a) in self.coords.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coords.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                prod[i + j] = addmod(prod[i + j], mulmod(a, b, n), n);
            }
        }
        let f = self.params.lifted_modulus(self.precision);
        for i in (d..2 * d - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for j in 0..d {
                let t = mulmod(c, f[j], n);
                prod[i - d + j] = submod(prod[i - d + j], t, n);
            }
        }
        prod.truncate(d);
        Self { params: self.params.clone(), precision: self.precision, coords: prod }
    }

    pub fn neg_ref(&self) -> Self {
        let n = self.modulus();
        let coords = self.coords.iter().map(|&a| if a == 0 { 0 } else { n - a }).collect();
        Self { params: self.params.clone(), precision: self.precision, coords }
    }

    /// Multiply by an integer.
    pub fn scale(&self, k: i64) -> Self {
        let n = self.modulus();
        let k = k.rem_euclid(n as i64) as u64;
        let coords = self.coords.iter().map(|&a| mulmod(a, k, n)).collect();
        Self { params: self.params.clone(), precision: self.precision, coords }
    }

    pub fn pow(&self, mut exp: u64) -> Self {
        let mut acc = self.one_like();
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    /// `p`-adic valuation, capped at the precision (`m` means "at least `m`").
    pub fn valuation(&self) -> u32 {
        let p = self.p();
        let mut best = self.precision;
        for &c in &self.coords {
            if c == 0 {
                continue;
            }
            let mut v = 0;
            let mut x = c;
            while x % p == 0 {
                x /= p;
                v += 1;
            }
            best = best.min(v);
        }
        best
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == 0
    }

    /// Multiplicative inverse of a unit.
    pub fn inv(&self) -> Result<Self> {
        let v = self.valuation();
        if v > 0 {
            return Err(Error::NonUnit(v));
        }
        let r = self.residue().inv()?;
        let mut b = r.as_ring().lift_canonical(self.precision);
        let two = self.one_like().scale(2);
        let mut correct = 1u32;
        while correct < self.precision {
            b = b.mul_unchecked(&two.sub_unchecked(&self.mul_unchecked(&b)));
            correct *= 2;
        }
        Ok(b)
    }

    /// The Witt Frobenius `σ`, realized as `u ↦ u^p`.
    pub fn frobenius(&self) -> Self {
        self.frobenius_pow(1)
    }

    /// `σ^k`.
    pub fn frobenius_pow(&self, k: usize) -> Self {
        let d = self.coords.len();
        if d == 1 || k % d == 0 {
            return self.clone();
        }
        let n = self.modulus();
        let table = self.params.frobenius_table(k);
        let mut out = vec![0u64; d];
        for (j, &c) in self.coords.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (i, &t) in table[j].iter().enumerate() {
                out[i] = addmod(out[i], mulmod(c, t % n, n), n);
            }
        }
        Self { params: self.params.clone(), precision: self.precision, coords: out }
    }

    /// Reduction modulo `p`.
    pub fn residue(&self) -> FieldElement {
        let p = self.p();
        FieldElement::from_ring_unchecked(Self {
            params: self.params.clone(),
            precision: 1,
            coords: self.coords.iter().map(|&c| c % p).collect(),
        })
    }

    /// Truncation to precision `m' <= m`.
    pub fn change_precision(&self, m: u32) -> Result<Self> {
        if m > self.precision {
            return Err(Error::PrecisionIncrease { from: self.precision, to: m });
        }
        if m == 0 {
            return Err(Error::PrecisionOverflow { p: self.p(), m });
        }
        let n = self.params.p_pow(m);
        Ok(Self { params: self.params.clone(), precision: m, coords: self.coords.iter().map(|&c| c % n).collect() })
    }

    /// Reinterpret the canonical coordinate representatives at another precision.
    ///
    /// Going up this picks the lift with coordinates in `[0, p^m)`; it is a
    /// choice of lift, not a ring map. Panics above the word precision.
    pub fn lift_canonical(&self, m: u32) -> Self {
        assert!(m >= 1 && m <= self.params.max_precision());
        let n = self.params.p_pow(m);
        Self { params: self.params.clone(), precision: m, coords: self.coords.iter().map(|&c| c % n).collect() }
    }

    /// Teichmüller representative of a field element: the unique root of
    /// unity (or zero) lifting `x`.
    pub fn teichmuller(x: &FieldElement, m: u32) -> Result<Self> {
        let params = x.params();
        params.check_precision(m)?;
        let q = params.q();
        let mut y = x.as_ring().lift_canonical(m);
        for _ in 1..m {
            y = y.pow(q);
        }
        Ok(y)
    }
}

impl Add for &GaloisRingElement {
    type Output = GaloisRingElement;
    fn add(self, rhs: Self) -> GaloisRingElement {
        self.try_add(rhs).expect("ring mismatch in addition")
    }
}

impl Sub for &GaloisRingElement {
    type Output = GaloisRingElement;
    fn sub(self, rhs: Self) -> GaloisRingElement {
        self.try_sub(rhs).expect("ring mismatch in subtraction")
    }
}

impl Mul for &GaloisRingElement {
    type Output = GaloisRingElement;
    fn mul(self, rhs: Self) -> GaloisRingElement {
        self.try_mul(rhs).expect("ring mismatch in multiplication")
    }
}

impl Neg for &GaloisRingElement {
    type Output = GaloisRingElement;
    fn neg(self) -> GaloisRingElement {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, d: usize) -> Arc<FieldParams> {
        FieldParams::get(p, d).unwrap()
    }

    fn all_elements(params: &Arc<FieldParams>, m: u32) -> Vec<GaloisRingElement> {
        let n = params.p_pow(m);
        let d = params.d();
        let total = n.pow(d as u32);
        (0..total)
            .map(|mut k| {
                let mut coords = vec![0; d];
                for c in coords.iter_mut() {
                    *c = k % n;
                    k /= n;
                }
                GaloisRingElement::from_coords(params, m, coords).unwrap()
            })
            .collect()
    }

    #[test]
    fn integer_examples() {
        let r = ring(2, 1);
        let a = GaloisRingElement::from_int(&r, 3, 3).unwrap();
        let b = GaloisRingElement::from_int(&r, 3, 6).unwrap();
        assert_eq!((&a + &b).coords(), &[1]);
        let r3 = ring(3, 1);
        let two = GaloisRingElement::from_int(&r3, 2, 2).unwrap();
        assert_eq!(two.inv().unwrap().coords(), &[5]);
        let twelve = GaloisRingElement::from_int(&r, 4, 12).unwrap();
        assert_eq!(twelve.valuation(), 2);
        assert_eq!(GaloisRingElement::zero(&r, 4).unwrap().valuation(), 4);
        let five = GaloisRingElement::from_int(&r, 3, 5).unwrap();
        assert_eq!(five.change_precision(1).unwrap().coords(), &[1]);
        assert_eq!(five.change_precision(3).unwrap(), five);
        assert!(matches!(five.change_precision(4), Err(Error::PrecisionIncrease { .. })));
        assert!(matches!(twelve.inv(), Err(Error::NonUnit(2))));
    }

    #[test]
    fn mismatch_is_reported() {
        let a = GaloisRingElement::one(&ring(2, 1), 3).unwrap();
        let b = GaloisRingElement::one(&ring(2, 1), 2).unwrap();
        let c = GaloisRingElement::one(&ring(3, 1), 3).unwrap();
        assert!(matches!(a.try_add(&b), Err(Error::ParamMismatch(_))));
        assert!(matches!(a.try_mul(&c), Err(Error::ParamMismatch(_))));
    }

    #[test]
    fn ring_axioms_exhaustive() {
        for (p, d, m) in [(2u64, 1usize, 3u32), (2, 2, 2), (3, 1, 2)] {
            let r = ring(p, d);
            let els = all_elements(&r, m);
            let zero = GaloisRingElement::zero(&r, m).unwrap();
            let one = GaloisRingElement::one(&r, m).unwrap();
            for a in &els {
                assert_eq!(&(a + &zero), a);
                assert_eq!(&(a * &one), a);
                assert!((a + &(-a)).is_zero());
                for b in &els {
                    assert_eq!(a + b, b + a);
                    assert_eq!(a * b, b * a);
                    let vab = (a * b).valuation();
                    assert_eq!(vab, (a.valuation() + b.valuation()).min(m));
                    for c in &els {
                        assert_eq!(&(a + b) + c, a + &(b + c));
                        assert_eq!(&(a * b) * c, a * &(b * c));
                        assert_eq!(a * &(b + c), &(a * b) + &(a * c));
                    }
                }
                if a.is_unit() {
                    assert_eq!(a * &a.inv().unwrap(), one);
                }
            }
        }
    }

    #[test]
    fn frobenius_is_automorphism_of_order_d() {
        for (p, d, m) in [(2u64, 2usize, 2u32), (2, 3, 3), (3, 2, 3), (5, 2, 2)] {
            let r = ring(p, d);
            let els: Vec<_> = (0..40u64)
                .map(|k| {
                    let coords = (0..d as u64).map(|j| (k * 7 + j * 13 + k * j * 5) % r.p_pow(m)).collect();
                    GaloisRingElement::from_coords(&r, m, coords).unwrap()
                })
                .collect();
            for a in &els {
                let mut x = a.clone();
                for _ in 0..d {
                    x = x.frobenius();
                }
                assert_eq!(&x, a);
                assert_eq!(a.frobenius().residue(), a.residue().pow(p));
                for b in &els {
                    assert_eq!((a + b).frobenius(), &a.frobenius() + &b.frobenius());
                    assert_eq!((a * b).frobenius(), &a.frobenius() * &b.frobenius());
                }
            }
            let u = GaloisRingElement::from_coords(&r, m, {
                let mut c = vec![0; d];
                c[1] = 1;
                c
            })
            .unwrap();
            assert_eq!(u.frobenius(), u.pow(p));
            // exact order d: the generator u is moved by every σ^k, 0 < k < d
            for k in 1..d {
                assert_ne!(u.frobenius_pow(k), u);
            }
        }
    }

    #[test]
    fn teichmuller_examples() {
        let r = ring(3, 1);
        let two = FieldElement::from_index(&r, 2);
        assert_eq!(GaloisRingElement::teichmuller(&two, 2).unwrap().coords(), &[8]);
        let f4 = ring(2, 2);
        for m in [1u32, 3, 6] {
            let all: Vec<_> = FieldElement::all(&f4).collect();
            for x in &all {
                let t = GaloisRingElement::teichmuller(x, m).unwrap();
                assert_eq!(&t.residue(), x);
                assert_eq!(t.pow(f4.q()), t);
                assert_eq!(t.frobenius(), GaloisRingElement::teichmuller(&x.pow(2), m).unwrap());
                for y in &all {
                    let ty = GaloisRingElement::teichmuller(y, m).unwrap();
                    let txy = GaloisRingElement::teichmuller(&(x * y), m).unwrap();
                    assert_eq!(&t * &ty, txy);
                }
            }
        }
    }
}
