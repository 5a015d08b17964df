use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use super::modulus::{is_prime, least_irreducible, mul_mod_poly, pow_mod_poly, submod};
use crate::error::{Error, Result};

/// Largest exponent `m` with `p^m < 2^63`.
pub(crate) fn word_precision(p: u64) -> u32 {
    let limit: u128 = 1u128 << 63;
    let mut m = 0u32;
    let mut acc: u128 = 1;
    while acc * p as u128 <= limit - 1 {
        acc *= p as u128;
        m += 1;
    }
    m
}

/// The finite field `F_{p^d}` together with the data of its Galois-ring lifts.
///
/// The modulus is the least monic irreducible (see [`least_irreducible`]); the
/// ring `W_m(F_{p^d}) = (Z/p^m)[u]/(f̂)` uses the lift `f̂` whose roots are
/// Teichmüller representatives, so the Witt Frobenius is `u ↦ u^p`.
pub struct FieldParams {
    p: u64,
    d: usize,
    modulus: Vec<u64>,
    max_precision: u32,
    /// `p^k` for `k` in `0..=max_precision`.
    powers: Vec<u64>,
    /// `f̂` reduced modulo `p^k`, indexed by `k`.
    lifts: Vec<Vec<u64>>,
    /// `frobenius[k][j]` = coordinates of `σ^k(u^j)` modulo `p^max_precision`.
    frobenius: Vec<Vec<Vec<u64>>>,
}

impl fmt::Debug for FieldParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.p, self.d)
    }
}

impl PartialEq for FieldParams {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.d == other.d
    }
}

impl Eq for FieldParams {}

static TABLE: OnceLock<Mutex<HashMap<(u64, usize), Arc<FieldParams>>>> = OnceLock::new();

impl FieldParams {
    /// Shared parameters for `F_{p^d}`. Memoized; safe under concurrent first use.
    pub fn get(p: u64, d: usize) -> Result<Arc<FieldParams>> {
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        if d == 0 {
            return Err(Error::InvalidInput("extension degree must be >= 1".into()));
        }
        if (d as u32) * (64 - p.leading_zeros()) > 62 {
            return Err(Error::CapExceeded(format!("field size {p}^{d} exceeds 2^62")));
        }
        let table = TABLE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = table.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(found) = guard.get(&(p, d)) {
            return Ok(found.clone());
        }
        let built = Arc::new(Self::build(p, d));
        guard.insert((p, d), built.clone());
        Ok(built)
    }

    fn build(p: u64, d: usize) -> FieldParams {
        let modulus = least_irreducible(p, d);
        let w = word_precision(p);
        let mut powers = Vec::with_capacity(w as usize + 1);
        let mut acc = 1u64;
        for _ in 0..=w {
            powers.push(acc);
            acc = acc.wrapping_mul(p);
        }
        let big = powers[w as usize];
        let q = p.pow(d as u32);

        let lift = if d == 1 {
            modulus.clone()
        } else {
            // Teichmüller root of the naive lift, then its conjugates' product.
            let naive: Vec<u64> = modulus.clone();
            let mut tau = vec![0u64; d];
            tau[1] = 1;
            for _ in 1..w {
                tau = pow_mod_poly(&tau, q, &naive, big);
            }
            // product over i of (Y - tau^{p^i}) with coefficients in the naive ring
            let mut prod: Vec<Vec<u64>> = vec![one_vec(d)];
            let mut conj = tau.clone();
            for _ in 0..d {
                let mut next = vec![vec![0u64; d]; prod.len() + 1];
                for (i, c) in prod.iter().enumerate() {
                    for k in 0..d {
                        next[i + 1][k] = (next[i + 1][k] + c[k]) % big;
                    }
                    let t = mul_mod_poly(c, &conj, &naive, big);
                    for k in 0..d {
                        next[i][k] = submod(next[i][k], t[k], big);
                    }
                }
                prod = next;
                conj = pow_mod_poly(&conj, p, &naive, big);
            }
            prod.iter()
                .map(|c| {
                    debug_assert!(c[1..].iter().all(|&x| x == 0));
                    c[0]
                })
                .collect()
        };
        debug_assert!(lift.iter().zip(&modulus).all(|(a, b)| a % p == *b));

        let lifts =
            (0..=w as usize).map(|k| lift.iter().map(|&c| if k == 0 { 0 } else { c % powers[k] }).collect()).collect();

        let mut frobenius = Vec::with_capacity(d);
        let mut image_u = vec![0u64; d];
        if d == 1 {
            image_u[0] = 1;
        } else {
            image_u[1] = 1;
        }
        for _ in 0..d {
            let mut cols = Vec::with_capacity(d);
            let mut pw = one_vec(d);
            for _ in 0..d {
                cols.push(pw.clone());
                pw = if d == 1 { pw } else { mul_mod_poly(&pw, &image_u, &lift, big) };
            }
            frobenius.push(cols);
            if d > 1 {
                image_u = pow_mod_poly(&image_u, p, &lift, big);
            }
        }

        FieldParams { p, d, modulus, max_precision: w, powers, lifts, frobenius }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Field size `q = p^d`.
    pub fn q(&self) -> u64 {
        self.p.pow(self.d as u32)
    }

    /// Monic irreducible modulus over `F_p`, lowest degree first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// The Teichmüller lift of the modulus at precision `m`.
    pub fn lifted_modulus(&self, m: u32) -> &[u64] {
        &self.lifts[m as usize]
    }

    /// Largest supported precision: `p^m < 2^63`.
    pub fn max_precision(&self) -> u32 {
        self.max_precision
    }

    pub(crate) fn check_precision(&self, m: u32) -> Result<()> {
        if m == 0 || m > self.max_precision {
            return Err(Error::PrecisionOverflow { p: self.p, m });
        }
        Ok(())
    }

    /// `p^k`; `k` must not exceed the maximal precision.
    pub fn p_pow(&self, k: u32) -> u64 {
        self.powers[k as usize]
    }

    pub(crate) fn frobenius_table(&self, k: usize) -> &[Vec<u64>] {
        &self.frobenius[k % self.d]
    }
}

fn one_vec(d: usize) -> Vec<u64> {
    let mut v = vec![0u64; d];
    v[0] = 1;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_precision_values() {
        assert_eq!(word_precision(2), 62);
        assert_eq!(word_precision(3), 39);
        assert_eq!(word_precision(5), 27);
    }

    #[test]
    fn lifted_modulus_reduces_to_modulus() {
        for (p, d) in [(2, 2), (2, 3), (3, 2), (5, 2), (2, 4)] {
            let f = FieldParams::get(p, d).unwrap();
            for m in [1, 2, 5] {
                let lift = f.lifted_modulus(m);
                for (a, b) in lift.iter().zip(f.modulus()) {
                    assert_eq!(a % p, *b);
                }
            }
        }
    }

    #[test]
    fn rejects_composite() {
        assert!(FieldParams::get(4, 1).is_err());
        assert!(FieldParams::get(3, 0).is_err());
    }

    #[test]
    fn concurrent_first_use_is_consistent() {
        let handles: Vec<_> = (0..8).map(|_| std::thread::spawn(|| FieldParams::get(7, 3).unwrap())).collect();
        let all: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        for a in &all {
            assert!(Arc::ptr_eq(a, &all[0]));
        }
    }
}
