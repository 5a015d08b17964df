//! Seeded generators for test and verification suites.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64`, which is portable
//! across platforms. Generators draw a recipe first (small integers and field
//! indices, independent of the precision) and build it at any precision, so
//! the same recipe at `m` and `2m` gives compatible crystals.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::artinschreier::AsInstance;
use crate::caps::Caps;
use crate::error::Result;
use crate::fcrystal::{standard_e, FCrystal};
use crate::linalg::Matrix;
use crate::strata::{FamilyCrystal, Monomial};
use crate::wittring::{FieldElement, FieldParams, GaloisRingElement};

pub const DEFAULT_SEED: u64 = 1729;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An invertible matrix `L·R` with `L` lower and `R` upper unitriangular,
/// entries given by coordinate vectors of small integers.
#[derive(Clone, Debug, PartialEq)]
pub struct UnimodularRecipe {
    lower: Vec<Vec<u64>>,
    upper: Vec<Vec<u64>>,
    size: usize,
}

impl UnimodularRecipe {
    pub fn draw(rng: &mut impl Rng, size: usize, d: usize, bound: u64) -> Self {
        let entry = |rng: &mut dyn rand::RngCore| (0..d).map(|_| rng.gen_range(0..bound)).collect::<Vec<u64>>();
        let count = size * (size.saturating_sub(1)) / 2;
        let lower = (0..count).map(|_| entry(rng)).collect();
        let upper = (0..count).map(|_| entry(rng)).collect();
        UnimodularRecipe { lower, upper, size }
    }

    pub fn build(&self, base: &Arc<FieldParams>, m: u32) -> Result<Matrix<GaloisRingElement>> {
        let n = self.size;
        let zero = GaloisRingElement::zero(base, m)?;
        let one = zero.one_like();
        let el = |c: &Vec<u64>| GaloisRingElement::from_coords_reduced(base, m, c.clone());
        let (mut lo, mut up) = (Matrix::identity_like(n, &one), Matrix::identity_like(n, &one));
        let mut k = 0;
        for i in 0..n {
            for j in 0..i {
                lo.set(i, j, el(&self.lower[k])?);
                up.set(j, i, el(&self.upper[k])?);
                k += 1;
            }
        }
        Ok(lo.mul(&up))
    }
}

/// `U·diag(p^{a_i})·V` with unimodular `U`, `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct HodgeRecipe {
    pub p: u64,
    pub d: usize,
    pub exponents: Vec<u32>,
    u: UnimodularRecipe,
    v: UnimodularRecipe,
    /// Entries added on top, scaled by `p^{max a + 1}`.
    noise: Vec<Vec<u64>>,
}

impl HodgeRecipe {
    pub fn draw(rng: &mut impl Rng, p: u64, d: usize, rank: usize, max_total: u32) -> Self {
        let mut exponents = vec![0u32; rank];
        let total = rng.gen_range(0..=max_total);
        for _ in 0..total {
            let i = rng.gen_range(0..rank);
            exponents[i] += 1;
        }
        let bound = (p * p).min(16);
        let u = UnimodularRecipe::draw(rng, rank, d, bound);
        let v = UnimodularRecipe::draw(rng, rank, d, bound);
        let noise = (0..rank * rank).map(|_| (0..d).map(|_| rng.gen_range(0..p)).collect()).collect();
        HodgeRecipe { p, d, exponents, u, v, noise }
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    /// A precision at which the Newton polygon always certifies: above
    /// `d·v(det)`, the valuation of the determinant of the linearized iterate.
    pub fn min_precision(&self) -> u32 {
        self.d as u32 * self.exponents.iter().sum::<u32>() + 1
    }

    pub fn build(&self, m: u32) -> Result<FCrystal> {
        let base = FieldParams::get(self.p, self.d)?;
        let r = self.rank();
        let zero = GaloisRingElement::zero(&base, m)?;
        let top = self.exponents.iter().max().copied().unwrap_or(0) + 1;
        let diag = Matrix::from_fn(r, r, |i, j| {
            let mut x = if i == j { zero.p_power_like(self.exponents[i]) } else { zero.clone() };
            if top < m {
                let n = GaloisRingElement::from_coords_reduced(&base, m, self.noise[i * r + j].clone())
                    .expect("valid coordinates");
                x = &x + &(&n * &zero.p_power_like(top));
            }
            x
        });
        let mat = self.u.build(&base, m)?.mul(&diag).mul(&self.v.build(&base, m)?);
        FCrystal::new(&base, 1, m, mat)
    }
}

/// `U⁻¹·(⊕ E(a_i/b_i))·σ(U)`, whose Newton slopes are known by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRecipe {
    pub p: u64,
    pub d: usize,
    pub parts: Vec<(u64, u64)>,
    u: UnimodularRecipe,
}

impl OracleRecipe {
    pub fn draw(rng: &mut impl Rng, p: u64, d: usize, max_rank: usize) -> Self {
        let mut parts = Vec::new();
        let mut rank = 0;
        let target = rng.gen_range(1..=max_rank);
        while rank < target {
            let b = rng.gen_range(1..=(target - rank).min(4)) as u64;
            let a = loop {
                let a = rng.gen_range(0..=2 * b);
                if num_integer::gcd(a, b) == 1 {
                    break a;
                }
            };
            parts.push((a, b));
            rank += b as usize;
        }
        let u = UnimodularRecipe::draw(rng, rank, d, (p * p).min(16));
        OracleRecipe { p, d, parts, u }
    }

    pub fn rank(&self) -> usize {
        self.parts.iter().map(|&(_, b)| b as usize).sum()
    }

    pub fn slopes(&self) -> Vec<crate::Rational> {
        let mut out: Vec<crate::Rational> = self
            .parts
            .iter()
            .flat_map(|&(a, b)| std::iter::repeat(crate::Rational::new(a as i64, b as i64)).take(b as usize))
            .collect();
        out.sort();
        out
    }

    /// As for [`HodgeRecipe::min_precision`].
    pub fn min_precision(&self) -> u32 {
        self.d as u32 * self.parts.iter().map(|&(a, _)| a as u32).sum::<u32>() + 1
    }

    pub fn build(&self, m: u32) -> Result<FCrystal> {
        let base = FieldParams::get(self.p, self.d)?;
        let mut acc: Option<FCrystal> = None;
        for &(a, b) in &self.parts {
            let e = standard_e(a, b, 1, &base, m)?;
            acc = Some(match acc {
                None => e,
                Some(c) => c.direct_sum(&e)?,
            });
        }
        let c = acc.expect("at least one part");
        c.change_basis(&self.u.build(&base, m)?)
    }
}

/// A family `U⁻¹·T(t̲)·σ(U)` with `T` upper triangular and diagonal entries
/// `p^{a_i}·(c_i(t̲) + p^{δ_i})`, so every fiber has integral slopes.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralFamilyRecipe {
    pub p: u64,
    pub rank: usize,
    pub shifts: Vec<u32>,
    pub deltas: Vec<u32>,
    /// Coefficients of `c_i`, as field indices, lowest degree first.
    pub diagonal_polys: Vec<Vec<u64>>,
    /// Strictly upper entries: (constant, linear) integer coefficients.
    pub upper: Vec<(u64, u64)>,
    u: UnimodularRecipe,
}

impl IntegralFamilyRecipe {
    pub fn draw(rng: &mut impl Rng, p: u64, rank: usize) -> Self {
        let shifts = (0..rank).map(|_| rng.gen_range(0..=1)).collect();
        let deltas = (0..rank).map(|_| rng.gen_range(1..=2)).collect();
        let diagonal_polys = (0..rank).map(|_| (0..3).map(|_| rng.gen_range(0..p)).collect()).collect();
        let upper = (0..rank * rank).map(|_| (rng.gen_range(0..p * p), rng.gen_range(0..p))).collect();
        let u = UnimodularRecipe::draw(rng, rank, 1, (p * p).min(16));
        IntegralFamilyRecipe { p, rank, shifts, deltas, diagonal_polys, upper, u }
    }

    pub fn build(&self, m: u32, caps: &Caps) -> Result<FamilyCrystal> {
        let base = FieldParams::get(self.p, 1)?;
        let r = self.rank;
        let zero = GaloisRingElement::zero(&base, m)?;
        // T as polynomials in one variable: coefficient vectors by degree
        let mut t: Vec<Vec<Vec<GaloisRingElement>>> = vec![vec![vec![]; r]; r];
        for i in 0..r {
            let scale = zero.p_power_like(self.shifts[i]);
            let mut poly: Vec<GaloisRingElement> = self.diagonal_polys[i]
                .iter()
                .map(|&c| GaloisRingElement::teichmuller(&FieldElement::from_index(&base, c), m).map(|x| &x * &scale))
                .collect::<Result<_>>()?;
            poly[0] = &poly[0] + &(&scale * &zero.p_power_like(self.deltas[i]));
            t[i][i] = poly;
            for j in i + 1..r {
                let (c0, c1) = self.upper[i * r + j];
                t[i][j] = vec![
                    GaloisRingElement::from_int(&base, m, c0 as i64)?,
                    GaloisRingElement::from_int(&base, m, c1 as i64)?,
                ];
            }
        }
        let u = self.u.build(&base, m)?;
        let uinv = u.inverse()?;
        let mut entries = vec![vec![Vec::new(); r]; r];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let mut coeffs: Vec<GaloisRingElement> = vec![zero.clone(); 3];
                for k in 0..r {
                    for l in 0..r {
                        let c = uinv.get(i, k) * u.get(l, j);
                        for (deg, x) in t[k][l].iter().enumerate() {
                            coeffs[deg] = &coeffs[deg] + &(&c * x);
                        }
                    }
                }
                *entry = coeffs
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(deg, coeff)| Monomial { exponents: vec![deg as u32], coeff })
                    .collect();
            }
        }
        FamilyCrystal::new(&base, vec!["t".into()], 1, m, entries, caps)
    }
}

/// A uniformly random `n × n` instance over `F_{p^d}`.
pub fn random_as_instance(rng: &mut impl Rng, p: u64, d: usize, n: usize) -> Result<AsInstance> {
    let f = FieldParams::get(p, d)?;
    let q = f.q();
    let m = Matrix::from_fn(n, n, |_, _| FieldElement::from_index(&f, rng.gen_range(0..q)));
    AsInstance::new(m)
}

/// `(p, d)` drawn from `{2,3,5} × {1,2}`.
pub fn random_field(rng: &mut impl Rng) -> (u64, usize) {
    ([2u64, 3, 5][rng.gen_range(0..3)], rng.gen_range(1..=2))
}
