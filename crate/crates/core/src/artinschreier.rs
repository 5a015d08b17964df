//! Homogeneous Artin–Schreier systems `x = A·x^{[p]}` over `F_q`, where
//! `x^{[p]}` raises every coordinate to the `p`-th power.
//!
//! The solutions over `F̄_q` form an `F_p`-space whose dimension is the
//! stable rank of `A·A^{[p]}·A^{[p²]}⋯`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::fcrystal::FCrystal;
use crate::linalg::Matrix;
use crate::polygons::p_rank;
use crate::strata::{scan, ClosedPoint, FamilyCrystal, Monomial};
use crate::wittring::{Embedding, FieldElement, FieldParams, GaloisRingElement};

#[derive(Clone, Debug, PartialEq)]
pub struct AsInstance {
    a: Matrix<FieldElement>,
}

impl AsInstance {
    pub fn new(a: Matrix<FieldElement>) -> Result<Self> {
        if !a.is_square() || a.rows() == 0 {
            return Err(Error::InvalidInput("Artin–Schreier matrix must be square and nonempty".into()));
        }
        let params = a.get(0, 0).params().clone();
        if a.entries().any(|x| x.params() != &params) {
            return Err(Error::ParamMismatch("entries over different fields".into()));
        }
        Ok(AsInstance { a })
    }

    pub fn matrix(&self) -> &Matrix<FieldElement> {
        &self.a
    }

    pub fn field(&self) -> &Arc<FieldParams> {
        self.a.get(0, 0).params()
    }

    pub fn size(&self) -> usize {
        self.a.rows()
    }
}

/// Rank over `F_q` of `A·A^{[p]}⋯A^{[p^{nd-1}]}`.
pub fn as_dimension(inst: &AsInstance) -> usize {
    let n = inst.size();
    let factors = n * inst.field().d();
    let mut acc = inst.a.clone();
    for k in 1..factors {
        acc = acc.mul(&inst.a.frobenius_pow(k));
    }
    acc.rank()
}

/// Number of solutions over `F_{q^e}` as a power of `p`: the exponent.
///
/// Enumerates all vectors when `q^{en}` is within the enumeration cap and
/// otherwise counts the kernel of the `F_p`-linear map `x ↦ x − A·x^{[p]}`
/// on `F_{q^e}^n ≅ F_p^{den}`.
pub fn solution_exponent(inst: &AsInstance, e: usize, caps: &Caps) -> Result<usize> {
    let base = inst.field();
    let field = FieldParams::get(base.p(), base.d() * e)?;
    let emb = Embedding::get(base, &field)?;
    let a = inst.a.map(|x| emb.apply_field(x));
    let n = inst.size();
    let size = (field.q() as f64).powi(n as i32);
    if size <= caps.max_enumeration as f64 {
        let q = field.q();
        let total = q.pow(n as u32);
        let mut count = 0u64;
        for code in 0..total {
            let x = vector_from_code(&field, n, code);
            if is_solution(&a, &x) {
                count += 1;
            }
        }
        return exact_log(count, base.p());
    }
    Ok(kernel_dimension(&a, &field))
}

fn vector_from_code(field: &Arc<FieldParams>, n: usize, mut code: u64) -> Vec<FieldElement> {
    let q = field.q();
    (0..n)
        .map(|_| {
            let x = FieldElement::from_index(field, code % q);
            code /= q;
            x
        })
        .collect()
}

fn is_solution(a: &Matrix<FieldElement>, x: &[FieldElement]) -> bool {
    let xp: Vec<FieldElement> = x.iter().map(|c| c.frobenius_pow(1)).collect();
    a.mul_vec(&xp) == x
}

fn exact_log(count: u64, p: u64) -> Result<usize> {
    let mut k = 0;
    let mut c = count;
    while c > 1 && c % p == 0 {
        c /= p;
        k += 1;
    }
    if c != 1 {
        return Err(Error::InvalidInput(format!("solution count {count} is not a power of {p}")));
    }
    Ok(k)
}

/// `dim_{F_p} ker(x ↦ x − A·x^{[p]})` by elimination over `F_p`.
fn kernel_dimension(a: &Matrix<FieldElement>, field: &Arc<FieldParams>) -> usize {
    let n = a.rows();
    let de = field.d();
    let p = field.p();
    let dim = n * de;
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(dim);
    for i in 0..n {
        for j in 0..de {
            let mut coords = vec![0u64; de];
            coords[j] = 1;
            let basis = FieldElement::from_coords(field, coords).expect("valid coordinates");
            let mut x = vec![FieldElement::zero(field); n];
            x[i] = basis;
            let xp: Vec<FieldElement> = x.iter().map(|c| c.frobenius_pow(1)).collect();
            let ax = a.mul_vec(&xp);
            let image: Vec<u64> = x.iter().zip(&ax).flat_map(|(u, v)| (u - v).coords().to_vec()).collect();
            rows.push(image);
        }
    }
    dim - rank_mod_p(rows, p)
}

fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pr) = (rank..rows.len()).find(|&i| rows[i][col] % p != 0) else { continue };
        rows.swap(rank, pr);
        let inv = crate::wittring::modulus::powmod(rows[rank][col], p - 2, p);
        for i in 0..rows.len() {
            if i == rank || rows[i][col] == 0 {
                continue;
            }
            let f = rows[i][col] * inv % p;
            for j in col..cols {
                rows[i][j] = (rows[i][j] + p * p - f * rows[rank][j] % p) % p;
            }
        }
        rank += 1;
    }
    rank
}

/// Dimension of the solution space read off from solution counts over
/// `F_{q^e}`, `e = 1..=e_max`. Unless it equals `n`, the largest exponent
/// seen must already be reached below `e_max`; otherwise the counts are not
/// considered stable.
pub fn brute_force_as_dimension(inst: &AsInstance, e_max: usize, caps: &Caps) -> Result<usize> {
    if e_max == 0 {
        return Err(Error::InvalidInput("e_max must be at least 1".into()));
    }
    let exps = (1..=e_max).map(|e| solution_exponent(inst, e, caps)).collect::<Result<Vec<_>>>()?;
    let best = *exps.iter().max().expect("nonempty");
    let first = exps.iter().position(|&x| x == best).expect("max present") + 1;
    if best < inst.size() && first == e_max {
        return Err(Error::NotStabilized(e_max as u32));
    }
    Ok(best)
}

/// All solutions over `F_{q^e}` by enumeration (small instances only).
pub fn enumerate_solutions(inst: &AsInstance, e: usize, caps: &Caps) -> Result<Vec<Vec<FieldElement>>> {
    let base = inst.field();
    let field = FieldParams::get(base.p(), base.d() * e)?;
    let emb = Embedding::get(base, &field)?;
    let a = inst.a.map(|x| emb.apply_field(x));
    let n = inst.size();
    if (field.q() as f64).powi(n as i32) > caps.max_enumeration as f64 {
        return Err(Error::CapExceeded(format!("{}^{n} vectors", field.q())));
    }
    let total = field.q().pow(n as u32);
    Ok((0..total).map(|c| vector_from_code(&field, n, c)).filter(|x| is_solution(&a, x)).collect())
}

/// The rank-`2n`, twist-1 crystal `g·diag(I, p·I)` with `g` the entrywise
/// Teichmüller lift of `[[A, I], [I, 0]]`. Needs `m > n`.
pub fn corollary3_crystal(inst: &AsInstance, m: u32) -> Result<FCrystal> {
    let n = inst.size();
    let field = inst.field();
    if m as usize <= n {
        return Err(Error::InsufficientPrecision(format!("the construction needs precision above {n}, got {m}")));
    }
    let zero = GaloisRingElement::zero(field, m)?;
    let one = zero.one_like();
    let g = Matrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => GaloisRingElement::teichmuller(inst.a.get(i, j), m).expect("precision checked"),
        (true, false) | (false, true) => {
            if i % n == j % n {
                one.clone()
            } else {
                zero.clone()
            }
        }
        (false, false) => zero.clone(),
    });
    corollary3_from_lift(&g, m)
}

/// `g·diag(I, p·I)` for a given invertible lift `g`.
pub fn corollary3_from_lift(g: &Matrix<GaloisRingElement>, m: u32) -> Result<FCrystal> {
    let n = g.rows() / 2;
    let field = g.get(0, 0).params().clone();
    let zero = GaloisRingElement::zero(&field, m)?;
    let diag = Matrix::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            zero.clone()
        } else if i < n {
            zero.one_like()
        } else {
            zero.p_power_like(1)
        }
    });
    FCrystal::new(&field, 1, m, g.mul(&diag))
}

/// Per-point Artin–Schreier dimensions of a family of matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct AsStratumReport {
    pub points: Vec<ClosedPoint>,
    pub dimensions: Vec<usize>,
    /// `Y_d`: indices of points with solution dimension `d`.
    pub strata: BTreeMap<usize, Vec<usize>>,
    /// p-ranks of the associated crystal family at the same points, when cross-checked.
    pub p_ranks: Option<Vec<Option<u64>>>,
    /// Precision at which the cross-check family was scanned.
    pub cross_check_precision: Option<u32>,
}

impl AsStratumReport {
    pub fn cross_check_passed(&self) -> Option<bool> {
        self.p_ranks.as_ref().map(|pr| pr.iter().zip(&self.dimensions).all(|(r, &d)| *r == Some(d as u64)))
    }
}

/// Artin–Schreier strata of `A(t)` (entries read modulo `p`).
pub fn as_stratify(fam: &FamilyCrystal, max_degree: usize, cross_check: bool, caps: &Caps) -> Result<AsStratumReport> {
    let points = fam.closed_points(max_degree, caps)?;
    let dimensions = points
        .par_iter()
        .map(|pt| {
            let mat = fam.evaluate_matrix(pt)?.residue();
            Ok(as_dimension(&AsInstance::new(mat)?))
        })
        .collect::<Result<Vec<usize>>>()?;
    let mut strata: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &d) in dimensions.iter().enumerate() {
        strata.entry(d).or_default().push(i);
    }
    let mut report = AsStratumReport { points, dimensions, strata, p_ranks: None, cross_check_precision: None };
    if cross_check {
        let (ranks, m) = corollary3_family_p_ranks(fam, max_degree, caps)?;
        report.p_ranks = Some(ranks);
        report.cross_check_precision = Some(m);
    }
    Ok(report)
}

/// The family `[[Ã(t̲), p·I], [I, 0]]` with `Ã` the Teichmüller-coefficient
/// lift of `A(t)`.
pub fn corollary3_family(fam: &FamilyCrystal, m: u32, caps: &Caps) -> Result<FamilyCrystal> {
    let n = fam.rank();
    let base = fam.base();
    let k = fam.vars().len();
    let lift = |c: &GaloisRingElement| GaloisRingElement::teichmuller(&c.residue(), m);
    let constant = |x: GaloisRingElement| vec![Monomial { exponents: vec![0; k], coeff: x }];
    let one = GaloisRingElement::one(base, m)?;
    let pe = one.p_power_like(1);
    let mut entries = vec![vec![Vec::new(); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            entries[i][j] = fam.entries()[i][j]
                .iter()
                .map(|mono| Ok(Monomial { exponents: mono.exponents.clone(), coeff: lift(&mono.coeff)? }))
                .collect::<Result<Vec<_>>>()?;
        }
        entries[i][n + i] = constant(pe.clone());
        entries[n + i][i] = constant(one.clone());
    }
    FamilyCrystal::new(base, fam.vars().to_vec(), 1, m, entries, caps)
}

fn corollary3_family_p_ranks(fam: &FamilyCrystal, max_degree: usize, caps: &Caps) -> Result<(Vec<Option<u64>>, u32)> {
    let n = fam.rank() as u32;
    let limit = fam.base().max_precision();
    let mut m = (n + 2).min(limit);
    loop {
        let report = scan(&corollary3_family(fam, m, caps)?, max_degree, caps)?;
        let ranks: Vec<Option<u64>> =
            report.records.iter().map(|r| r.outcome.as_ref().ok().map(|d| d.p_rank)).collect();
        let insufficient = report.errors().any(|(_, e)| matches!(e, Error::InsufficientPrecision(_)));
        if !insufficient || m >= limit {
            return Ok((ranks, m));
        }
        m = (2 * m).min(limit);
    }
}

/// p-rank of the associated crystal at the least precision above `n` that
/// certifies, doubling up to the word precision.
pub fn corollary3_p_rank(inst: &AsInstance) -> Result<u64> {
    let limit = inst.field().max_precision();
    let mut m = (inst.size() as u32 + 2).min(limit);
    loop {
        match p_rank(&corollary3_crystal(inst, m)?) {
            Err(Error::InsufficientPrecision(_)) if m < limit => m = (2 * m).min(limit),
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygons::{fixed_point_dimension, newton_polygon};

    fn inst(p: u64, d: usize, rows: &[&[u64]]) -> AsInstance {
        let f = FieldParams::get(p, d).unwrap();
        let m = Matrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&i| FieldElement::from_index(&f, i)).collect()).collect(),
        )
        .unwrap();
        AsInstance::new(m).unwrap()
    }

    #[test]
    fn basic_dimensions() {
        let caps = Caps::default();
        let id2 = inst(2, 1, &[&[1, 0], &[0, 1]]);
        assert_eq!(as_dimension(&id2), 2);
        assert_eq!(brute_force_as_dimension(&id2, 3, &caps).unwrap(), 2);
        let zero = inst(3, 1, &[&[0, 0], &[0, 0]]);
        assert_eq!(as_dimension(&zero), 0);
        assert_eq!(brute_force_as_dimension(&zero, 3, &caps).unwrap(), 0);
        for p in [2u64, 3, 5] {
            for alpha in 1..p {
                let one = inst(p, 1, &[&[alpha]]);
                assert_eq!(as_dimension(&one), 1);
                // x^{p-1} = α^{-1} splits over F_{p^e} for some e ≤ p - 1
                assert_eq!(brute_force_as_dimension(&one, 6, &caps).unwrap(), 1);
            }
        }
        // nilpotent: x1 = x2^p, x2 = 0
        let nil = inst(2, 2, &[&[0, 1], &[0, 0]]);
        assert_eq!(as_dimension(&nil), 0);
        assert_eq!(brute_force_as_dimension(&nil, 3, &caps).unwrap(), 0);
    }

    #[test]
    fn enumeration_and_kernel_counts_agree() {
        let tight = Caps::default().with_overrides("enumeration=1").unwrap();
        let caps = Caps::default();
        for (p, d) in [(2u64, 1usize), (2, 2), (3, 1)] {
            let q = p.pow(d as u32);
            for code in 0..q.pow(4).min(40) {
                let digits: Vec<u64> = (0..4).map(|k| code / q.pow(k) % q).collect();
                let a = inst(p, d, &[&digits[0..2], &digits[2..4]]);
                for e in 1..=3 {
                    assert_eq!(solution_exponent(&a, e, &caps).unwrap(), solution_exponent(&a, e, &tight).unwrap());
                }
            }
        }
    }

    #[test]
    fn solutions_are_fp_linear() {
        let caps = Caps::default();
        let a = inst(3, 1, &[&[1, 2], &[0, 1]]);
        let sols = enumerate_solutions(&a, 2, &caps).unwrap();
        let field = sols[0][0].params().clone();
        let emb = Embedding::get(a.field(), &field).unwrap();
        let am = a.matrix().map(|x| emb.apply_field(x));
        for x in &sols {
            for y in &sols {
                let s: Vec<FieldElement> = x.iter().zip(y).map(|(u, v)| u + v).collect();
                assert!(is_solution(&am, &s));
            }
            let two = FieldElement::from_int(&field, 2);
            let sx: Vec<FieldElement> = x.iter().map(|u| &two * u).collect();
            assert!(is_solution(&am, &sx));
        }
    }

    #[test]
    fn corollary3_examples() {
        let a0 = inst(2, 1, &[&[0]]);
        let c = corollary3_crystal(&a0, 3).unwrap();
        assert_eq!(c, FCrystal::from_int_rows(c.base(), 1, 3, &[vec![0, 2], vec![1, 0]]).unwrap());
        assert_eq!(p_rank(&c).unwrap(), 0);
        let a1 = inst(2, 1, &[&[1]]);
        let c1 = corollary3_crystal(&a1, 3).unwrap();
        let np = newton_polygon(&c1).unwrap();
        assert_eq!(np.slopes(), vec![crate::Rational::from_integer(0), crate::Rational::from_integer(1)]);
        assert_eq!(p_rank(&c1).unwrap(), 1);
        assert!(matches!(corollary3_crystal(&a1, 1), Err(Error::InsufficientPrecision(_))));
        // mod p the crystal is [[A, 0], [I, 0]]
        let a = inst(2, 2, &[&[1, 2], &[3, 0]]);
        let c = corollary3_crystal(&a, 4).unwrap();
        let res = c.matrix().residue();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(res.get(i, j), a.matrix().get(i, j));
                assert!(res.get(i, j + 2).is_zero());
            }
        }
        assert_eq!(corollary3_p_rank(&a).unwrap() as usize, as_dimension(&a));
        assert_eq!(fixed_point_dimension(&c), as_dimension(&a));
    }

    #[test]
    fn alternative_lift_keeps_p_rank() {
        let a = inst(3, 1, &[&[1, 2], &[2, 2]]);
        let m = 5;
        let c = corollary3_crystal(&a, m).unwrap();
        let mut g = Matrix::from_fn(4, 4, |i, j| {
            let x = c.matrix().get(i, j).clone();
            if j >= 2 {
                // undo diag(I, pI) on the right-hand columns: they are p·(I or 0)
                if x.is_zero() {
                    x
                } else {
                    x.one_like()
                }
            } else {
                x
            }
        });
        let bumped = g.get(0, 1) + &g.get(0, 1).p_power_like(1);
        g.set(0, 1, bumped);
        let alt = corollary3_from_lift(&g, m).unwrap();
        assert_ne!(alt, c);
        assert_eq!(p_rank(&alt).unwrap(), p_rank(&c).unwrap());
    }

    #[test]
    fn stratify_rank_one_family() {
        let caps = Caps::default();
        for p in [2u64, 3] {
            let base = FieldParams::get(p, 1).unwrap();
            let one = GaloisRingElement::one(&base, 1).unwrap();
            let fam = FamilyCrystal::new(
                &base,
                vec!["t".into()],
                1,
                1,
                vec![vec![vec![Monomial { exponents: vec![1], coeff: one }]]],
                &caps,
            )
            .unwrap();
            let report = as_stratify(&fam, 2, true, &caps).unwrap();
            assert_eq!(report.strata[&0], vec![0]);
            assert_eq!(report.strata[&1].len(), report.points.len() - 1);
            assert_eq!(report.cross_check_passed(), Some(true));
        }
        let id = FamilyCrystal::constant(&FCrystal::identity(&FieldParams::get(2, 1).unwrap(), 1, 1, 2).unwrap());
        let report = as_stratify(&id, 2, true, &caps).unwrap();
        assert_eq!(report.strata.keys().copied().collect::<Vec<_>>(), vec![2]);
        assert_eq!(report.cross_check_passed(), Some(true));
    }
}
