//! Galois-ring values carrying their own absolute precision.
//!
//! A value `x + O(p^k)` is stored as a representative at the word precision of
//! the ring together with `k`. Products track the sharper bound
//! `min(v(a) + k_b, v(b) + k_a)`, so a chain of products of non-units keeps
//! more digits than the input precision.

use super::element::GaloisRingElement;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Approx {
    value: GaloisRingElement,
    prec: u32,
}

impl Approx {
    /// Treat `a` as known modulo `p^{a.precision()}` and widen its storage.
    pub fn from_element(a: &GaloisRingElement) -> Approx {
        let w = a.params().max_precision();
        Approx { value: a.lift_canonical(w), prec: a.precision() }
    }

    pub fn exact(a: &GaloisRingElement, prec: u32) -> Approx {
        let w = a.params().max_precision();
        Approx { value: a.lift_canonical(w), prec: prec.min(w) }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn value(&self) -> &GaloisRingElement {
        &self.value
    }

    /// Lower bound for the valuation; equals the precision when undetermined.
    pub fn valuation(&self) -> u32 {
        self.value.valuation().min(self.prec)
    }

    pub fn is_determined(&self) -> bool {
        self.value.valuation() < self.prec
    }

    pub fn zero_like(&self) -> Approx {
        let w = self.value.params().max_precision();
        Approx { value: self.value.zero_like(), prec: w }
    }

    pub fn one_like(&self) -> Approx {
        let w = self.value.params().max_precision();
        Approx { value: self.value.one_like(), prec: w }
    }

    pub fn plus(&self, o: &Approx) -> Approx {
        Approx { value: &self.value + &o.value, prec: self.prec.min(o.prec) }
    }

    pub fn minus(&self, o: &Approx) -> Approx {
        Approx { value: &self.value - &o.value, prec: self.prec.min(o.prec) }
    }

    pub fn negated(&self) -> Approx {
        Approx { value: -&self.value, prec: self.prec }
    }

    pub fn times(&self, o: &Approx) -> Approx {
        let w = self.value.params().max_precision();
        let prec = (self.valuation() + o.prec).min(o.valuation() + self.prec).min(w);
        Approx { value: &self.value * &o.value, prec }
    }

    pub fn frobenius_pow(&self, k: usize) -> Approx {
        Approx { value: self.value.frobenius_pow(k), prec: self.prec }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wittring::FieldParams;

    #[test]
    fn product_of_nonunits_gains_precision() {
        let f = FieldParams::get(2, 1).unwrap();
        let p2 = GaloisRingElement::from_int(&f, 4, 4).unwrap();
        let a = Approx::from_element(&p2);
        let sq = a.times(&a);
        assert_eq!(sq.precision(), 6);
        assert_eq!(sq.valuation(), 4);
        assert!(sq.is_determined());
        let unit = Approx::from_element(&GaloisRingElement::from_int(&f, 4, 3).unwrap());
        assert_eq!(unit.times(&a).precision(), 4);
    }

    #[test]
    fn tracked_precision_is_sound() {
        // any two lifts of the inputs agree on the product up to the tracked precision
        let f = FieldParams::get(3, 2).unwrap();
        let m = 3;
        let n = f.p_pow(m);
        for k in 0..50u64 {
            let a = GaloisRingElement::from_coords(&f, m, vec![(k * 9) % n, (k * 3 + 9) % n]).unwrap();
            let b = GaloisRingElement::from_coords(&f, m, vec![(k * 7 + 3) % n, (k * 27) % n]).unwrap();
            let prod = Approx::from_element(&a).times(&Approx::from_element(&b));
            let w = f.max_precision();
            let shift = GaloisRingElement::from_int(&f, w, n as i64).unwrap();
            let a2 = &a.lift_canonical(w) + &(&shift * &GaloisRingElement::from_int(&f, w, 5).unwrap());
            let b2 = &b.lift_canonical(w) + &(&shift * &GaloisRingElement::from_coords(&f, w, vec![1, 2]).unwrap());
            let other = &a2 * &b2;
            let diff = &other - prod.value();
            assert!(diff.valuation() >= prod.precision());
        }
    }
}
