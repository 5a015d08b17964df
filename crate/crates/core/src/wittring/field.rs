use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::element::GaloisRingElement;
use super::params::FieldParams;
use crate::error::{Error, Result};

/// An element of `F_{p^d}`: a Galois-ring element at precision one.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement(GaloisRingElement);

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FieldElement {
    pub(crate) fn from_ring_unchecked(x: GaloisRingElement) -> Self {
        debug_assert_eq!(x.precision(), 1);
        FieldElement(x)
    }

    pub fn zero(params: &Arc<FieldParams>) -> Self {
        FieldElement(GaloisRingElement::zero(params, 1).expect("precision one is always valid"))
    }

    pub fn one(params: &Arc<FieldParams>) -> Self {
        FieldElement(GaloisRingElement::one(params, 1).expect("precision one is always valid"))
    }

    pub fn from_coords(params: &Arc<FieldParams>, coords: Vec<u64>) -> Result<Self> {
        GaloisRingElement::from_coords(params, 1, coords).map(FieldElement)
    }

    pub fn from_int(params: &Arc<FieldParams>, value: i64) -> Self {
        FieldElement(GaloisRingElement::from_int(params, 1, value).expect("precision one is always valid"))
    }

    /// Element whose coordinates are the base-`p` digits of `index`
    /// (coordinate of `1` least significant).
    pub fn from_index(params: &Arc<FieldParams>, mut index: u64) -> Self {
        let p = params.p();
        let coords = (0..params.d())
            .map(|_| {
                let c = index % p;
                index /= p;
                c
            })
            .collect();
        FieldElement(GaloisRingElement::raw(params.clone(), 1, coords))
    }

    /// Inverse of [`FieldElement::from_index`].
    pub fn index(&self) -> u64 {
        let p = self.0.p();
        self.0.coords().iter().rev().fold(0u64, |acc, &c| acc * p + c)
    }

    /// All field elements in index order.
    pub fn all(params: &Arc<FieldParams>) -> impl Iterator<Item = FieldElement> + '_ {
        (0..params.q()).map(move |k| FieldElement::from_index(params, k))
    }

    pub fn params(&self) -> &Arc<FieldParams> {
        self.0.params()
    }

    pub fn coords(&self) -> &[u64] {
        self.0.coords()
    }

    pub fn as_ring(&self) -> &GaloisRingElement {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn pow(&self, exp: u64) -> Self {
        FieldElement(self.0.pow(exp))
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NonUnit(1));
        }
        Ok(self.pow(self.params().q() - 2))
    }

    /// `x ↦ x^{p^k}`.
    pub fn frobenius_pow(&self, k: usize) -> Self {
        FieldElement(self.0.frobenius_pow(k))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.0.try_add(&other.0).map(FieldElement)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.0.try_mul(&other.0).map(FieldElement)
    }

    /// Integer encoding for lexicographic comparisons.
    pub fn sort_key(&self) -> u64 {
        self.index()
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> FieldElement {
        FieldElement(&self.0 + &rhs.0)
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> FieldElement {
        FieldElement(&self.0 - &rhs.0)
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> FieldElement {
        FieldElement(&self.0 * &rhs.0)
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement(-&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_inverse_and_frobenius() {
        for (p, d) in [(2u64, 3usize), (3, 2), (5, 1), (2, 4)] {
            let f = FieldParams::get(p, d).unwrap();
            let one = FieldElement::one(&f);
            for x in FieldElement::all(&f) {
                assert_eq!(FieldElement::from_index(&f, x.index()), x);
                assert_eq!(x.frobenius_pow(1), x.pow(p));
                assert_eq!(x.pow(f.q()), x);
                if !x.is_zero() {
                    assert_eq!(&x * &x.inv().unwrap(), one);
                }
            }
        }
    }

    #[test]
    fn zero_is_not_invertible() {
        let f = FieldParams::get(3, 2).unwrap();
        assert!(FieldElement::zero(&f).inv().is_err());
    }
}
