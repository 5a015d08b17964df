//! Canonical embeddings `GR(p^m, d) → GR(p^m, d')` for `d | d'`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::element::GaloisRingElement;
use super::field::FieldElement;
use super::modulus::{addmod, mulmod, prime_factors};
use super::params::FieldParams;
use crate::error::{Error, Result};

/// Images of `1, u, …, u^{d-1}` of the small ring inside the large one,
/// at the word precision of the large ring.
pub struct Embedding {
    source: Arc<FieldParams>,
    target: Arc<FieldParams>,
    images: Vec<Vec<u64>>,
}

type EmbeddingTable = Mutex<HashMap<(u64, usize, usize), Arc<Embedding>>>;
static EMBEDDINGS: OnceLock<EmbeddingTable> = OnceLock::new();

impl Embedding {
    /// The embedding of `F_{p^d}` into `F_{p^{d'}}`.
    ///
    /// For `d = d'` this is the identity. Otherwise `u` maps to the Teichmüller
    /// lift of `h^k`, where `h = g^{(p^{d'}-1)/(p^d-1)}` for the first `g` (in
    /// index order) making `h` a generator of `F_{p^d}^*`, and `k` is the least
    /// exponent with `h^k` a root of the modulus.
    pub fn get(source: &Arc<FieldParams>, target: &Arc<FieldParams>) -> Result<Arc<Embedding>> {
        let (p, d, big) = (source.p(), source.d(), target.d());
        if target.p() != p {
            return Err(Error::ParamMismatch(format!("characteristic {p} vs {}", target.p())));
        }
        if big % d != 0 {
            return Err(Error::NotASubfield { small: d, large: big });
        }
        let table = EMBEDDINGS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = table.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(e) = guard.get(&(p, d, big)) {
            return Ok(e.clone());
        }
        let e = Arc::new(Self::build(source, target));
        guard.insert((p, d, big), e.clone());
        Ok(e)
    }

    fn build(source: &Arc<FieldParams>, target: &Arc<FieldParams>) -> Embedding {
        let d = source.d();
        let w = target.max_precision();
        let images = if d == target.d() {
            (0..d)
                .map(|j| {
                    let mut c = vec![0u64; d];
                    c[j] = 1;
                    c
                })
                .collect()
        } else if d == 1 {
            let mut c = vec![0u64; target.d()];
            c[0] = 1;
            vec![c]
        } else {
            let root = find_root(source, target);
            let tau = GaloisRingElement::teichmuller(&root, w).expect("word precision is valid");
            let mut out = Vec::with_capacity(d);
            let mut pw = tau.one_like();
            for _ in 0..d {
                out.push(pw.coords().to_vec());
                pw = &pw * &tau;
            }
            out
        };
        Embedding { source: source.clone(), target: target.clone(), images }
    }

    pub fn source(&self) -> &Arc<FieldParams> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FieldParams> {
        &self.target
    }

    pub fn apply(&self, a: &GaloisRingElement) -> GaloisRingElement {
        assert_eq!(**a.params(), *self.source, "embedding applied to foreign element");
        let m = a.precision();
        let n = self.target.p_pow(m);
        let mut out = vec![0u64; self.target.d()];
        for (j, &c) in a.coords().iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (i, &t) in self.images[j].iter().enumerate() {
                out[i] = addmod(out[i], mulmod(c, t % n, n), n);
            }
        }
        GaloisRingElement::raw(self.target.clone(), m, out)
    }

    pub fn apply_field(&self, x: &FieldElement) -> FieldElement {
        FieldElement::from_ring_unchecked(self.apply(x.as_ring()))
    }
}

fn eval_modulus(f: &[u64], x: &FieldElement) -> FieldElement {
    let params = x.params();
    f.iter().rev().fold(FieldElement::zero(params), |acc, &c| &(&acc * x) + &FieldElement::from_int(params, c as i64))
}

fn find_root(source: &Arc<FieldParams>, target: &Arc<FieldParams>) -> FieldElement {
    let q_small = source.q();
    let q_big = target.q();
    let cofactor = (q_big - 1) / (q_small - 1);
    let primes = prime_factors(q_small - 1);
    let one = FieldElement::one(target);
    let h = (1..q_big)
        .map(|k| FieldElement::from_index(target, k).pow(cofactor))
        .find(|h| primes.iter().all(|&l| h.pow((q_small - 1) / l) != one))
        .expect("multiplicative group is cyclic");
    let mut x = one.clone();
    for _ in 0..q_small - 1 {
        if eval_modulus(source.modulus(), &x).is_zero() {
            return x;
        }
        x = &x * &h;
    }
    unreachable!("an irreducible of degree d splits in F_{{p^d}}")
}

/// Embed into the ring over `F_{p^{d'}}`.
pub fn base_change_element(a: &GaloisRingElement, target: &Arc<FieldParams>) -> Result<GaloisRingElement> {
    Ok(Embedding::get(a.params(), target)?.apply(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_is_ring_hom_commuting_with_frobenius() {
        for (p, d, big, m) in [(2u64, 2usize, 4usize, 3u32), (2, 2, 6, 2), (3, 2, 4, 2), (2, 1, 3, 4), (5, 2, 4, 2)] {
            let s = FieldParams::get(p, d).unwrap();
            let t = FieldParams::get(p, big).unwrap();
            let e = Embedding::get(&s, &t).unwrap();
            let n = s.p_pow(m);
            let els: Vec<_> = (0..30u64)
                .map(|k| {
                    let coords = (0..d as u64).map(|j| (k * 11 + j * 3 + k * k * j) % n).collect();
                    GaloisRingElement::from_coords(&s, m, coords).unwrap()
                })
                .collect();
            assert_eq!(e.apply(&els[0].one_like()), GaloisRingElement::one(&t, m).unwrap());
            for a in &els {
                assert_eq!(e.apply(&a.frobenius()), e.apply(a).frobenius());
                for b in &els {
                    assert_eq!(e.apply(&(a * b)), &e.apply(a) * &e.apply(b));
                    assert_eq!(e.apply(&(a + b)), &e.apply(a) + &e.apply(b));
                }
            }
        }
    }

    #[test]
    fn embedding_rejects_non_divisor() {
        let s = FieldParams::get(2, 2).unwrap();
        let t = FieldParams::get(2, 3).unwrap();
        assert!(matches!(Embedding::get(&s, &t), Err(Error::NotASubfield { .. })));
    }
}
