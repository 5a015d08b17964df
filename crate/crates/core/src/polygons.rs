//! Hodge and Newton polygons, break points, p-rank and divisibility.
//!
//! Newton slopes are normalized per application of `F`: a crystal with
//! twist `n` over `F_{p^d}` is linearized by its `e`-th iterate, `e` the least
//! integer with `d | n·e`, and the valuations of the eigenvalues of that
//! linear operator are divided by `e`.

use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::fcrystal::FCrystal;
use crate::linalg::Matrix;
use crate::wittring::Approx;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolygonKind {
    Hodge,
    Newton,
}

impl PolygonKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolygonKind::Hodge => "hodge",
            PolygonKind::Newton => "newton",
        }
    }
}

/// Ascending slopes with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polygon {
    kind: PolygonKind,
    segments: Vec<(Rational, u64)>,
}

/// A vertex of a polygon graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BreakPoint {
    pub x: u64,
    pub y: Rational,
}

impl BreakPoint {
    pub fn is_integral(&self) -> bool {
        self.y.is_integer()
    }
}

impl fmt::Display for BreakPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Polygon {
    /// Sort and group a slope list. Negative slopes are rejected.
    pub fn from_slopes(kind: PolygonKind, slopes: &[Rational]) -> Result<Polygon> {
        if slopes.is_empty() {
            return Err(Error::InvalidInput("polygon needs at least one slope".into()));
        }
        if slopes.iter().any(|s| *s < Rational::from_integer(0)) {
            return Err(Error::InvalidInput("slopes must be nonnegative".into()));
        }
        let mut sorted = slopes.to_vec();
        sorted.sort();
        let mut segments: Vec<(Rational, u64)> = Vec::new();
        for s in sorted {
            match segments.last_mut() {
                Some((last, mult)) if *last == s => *mult += 1,
                _ => segments.push((s, 1)),
            }
        }
        Ok(Polygon { kind, segments })
    }

    pub fn from_integer_slopes(kind: PolygonKind, slopes: &[i64]) -> Result<Polygon> {
        let slopes: Vec<Rational> = slopes.iter().map(|&s| Rational::from_integer(s)).collect();
        Polygon::from_slopes(kind, &slopes)
    }

    /// Segments `(slope, multiplicity)`; slopes strictly increasing.
    pub fn from_segments(kind: PolygonKind, segments: Vec<(Rational, u64)>) -> Result<Polygon> {
        let mut slopes = Vec::new();
        for (s, mult) in segments {
            if mult == 0 {
                return Err(Error::InvalidInput("segment multiplicity must be positive".into()));
            }
            slopes.extend(std::iter::repeat(s).take(mult as usize));
        }
        Polygon::from_slopes(kind, &slopes)
    }

    pub fn kind(&self) -> PolygonKind {
        self.kind
    }

    pub fn with_kind(&self, kind: PolygonKind) -> Polygon {
        Polygon { kind, segments: self.segments.clone() }
    }

    pub fn segments(&self) -> &[(Rational, u64)] {
        &self.segments
    }

    pub fn rank(&self) -> u64 {
        self.segments.iter().map(|s| s.1).sum()
    }

    /// The slope list with multiplicity, ascending.
    pub fn slopes(&self) -> Vec<Rational> {
        self.segments.iter().flat_map(|&(s, m)| std::iter::repeat(s).take(m as usize)).collect()
    }

    pub fn multiplicity(&self, slope: Rational) -> u64 {
        self.segments.iter().find(|s| s.0 == slope).map_or(0, |s| s.1)
    }

    /// Height of the graph at `x ∈ [0, r]`.
    pub fn value_at(&self, x: u64) -> Rational {
        let mut y = Rational::from_integer(0);
        let mut left = x;
        for &(s, m) in &self.segments {
            let step = left.min(m);
            y += s * Rational::from_integer(step as i64);
            left -= step;
            if left == 0 {
                break;
            }
        }
        y
    }

    pub fn total(&self) -> Rational {
        self.value_at(self.rank())
    }

    /// Multiply every slope by `s`.
    pub fn scaled(&self, s: Rational) -> Polygon {
        Polygon::from_slopes(self.kind, &self.slopes().into_iter().map(|x| x * s).collect::<Vec<_>>())
            .expect("scaling keeps slopes nonnegative")
    }
}

impl fmt::Display for Polygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.segments.iter().map(|(s, m)| if *m == 1 { s.to_string() } else { format!("{s}^{m}") }).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// All vertices: `(0,0)`, every slope change, and the endpoint.
pub fn break_points(p: &Polygon) -> Vec<BreakPoint> {
    let mut out = vec![BreakPoint { x: 0, y: Rational::from_integer(0) }];
    let (mut x, mut y) = (0u64, Rational::from_integer(0));
    for &(s, m) in p.segments() {
        x += m;
        y += s * Rational::from_integer(m as i64);
        out.push(BreakPoint { x, y });
    }
    out
}

pub fn has_break_point(p: &Polygon, x: Rational, y: Rational) -> bool {
    x.is_integer()
        && x >= Rational::from_integer(0)
        && break_points(p).iter().any(|b| Rational::from_integer(b.x as i64) == x && b.y == y)
}

/// `P₁(i) ≥ P₂(i)` for every integer `0 ≤ i ≤ r`.
pub fn lies_above(p1: &Polygon, p2: &Polygon) -> Result<bool> {
    if p1.rank() != p2.rank() {
        return Err(Error::RankMismatch(p1.rank() as usize, p2.rank() as usize));
    }
    Ok((0..=p1.rank()).all(|i| p1.value_at(i) >= p2.value_at(i)))
}

/// Elementary divisors of the matrix.
pub fn hodge_polygon(c: &FCrystal) -> Result<Polygon> {
    let ed = c.matrix().elementary_divisors()?;
    let slopes: Vec<i64> = ed.into_iter().map(i64::from).collect();
    Polygon::from_integer_slopes(PolygonKind::Hodge, &slopes)
}

/// Least `e ≥ 1` with `d | n·e`.
pub fn linearization_degree(c: &FCrystal) -> usize {
    let d = c.base().d();
    d / c.twist().gcd(&d)
}

/// Characteristic polynomial of the linearized iterate, coefficients lowest
/// degree first, each with its own absolute precision.
pub fn linearized_charpoly(c: &FCrystal) -> Vec<Approx> {
    let e = linearization_degree(c);
    let m = c.matrix().map(Approx::from_element);
    let mut acc = m.clone();
    for k in 1..e {
        let next: Matrix<Approx> = m.map(|x| x.frobenius_pow(k * c.twist()));
        acc = acc.mul(&next);
    }
    let mut cp = acc.charpoly();
    // det(L) = ±Π_k σ^{kn}(det M), usually known to more digits
    let det = m.determinant();
    let mut norm = det.clone();
    for k in 1..e {
        norm = norm.times(&det.frobenius_pow(k * c.twist()));
    }
    if m.rows() % 2 == 1 {
        norm = norm.negated();
    }
    if norm.precision() > cp[0].precision() {
        cp[0] = norm;
    }
    cp
}

/// Certified Newton polygon.
///
/// Points `(j, v(c_{r-j}))` of the characteristic polynomial of the linearized
/// iterate are hulled from below using determined coefficients only; the
/// result is certified when every hull vertex is determined and every
/// undetermined coefficient is known to lie strictly above the hull.
pub fn newton_polygon(c: &FCrystal) -> Result<Polygon> {
    let e = linearization_degree(c) as i64;
    let cp = linearized_charpoly(c);
    let r = cp.len() - 1;
    // (j, valuation lower bound, determined)
    let pts: Vec<(i64, i64, bool)> = (0..=r)
        .map(|j| {
            let a = &cp[r - j];
            (j as i64, a.valuation() as i64, a.is_determined())
        })
        .collect();
    if !pts[r].2 {
        return Err(Error::InsufficientPrecision(format!(
            "determinant of the linearized iterate is undetermined at precision {}",
            c.precision()
        )));
    }
    let determined: Vec<(i64, i64)> = pts.iter().filter(|p| p.2).map(|p| (p.0, p.1)).collect();
    let hull = lower_hull(&determined);
    for &(j, k, det) in &pts {
        if det {
            continue;
        }
        let h = hull_value(&hull, j);
        if Rational::from_integer(k) <= h {
            return Err(Error::InsufficientPrecision(format!(
                "coefficient {j} is only known to valuation ≥ {k}, not above the hull value {h}"
            )));
        }
    }
    let mut slopes = Vec::with_capacity(r);
    for w in hull.windows(2) {
        let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        let s = Rational::new(dy, dx * e);
        slopes.extend(std::iter::repeat(s).take(dx as usize));
    }
    Polygon::from_slopes(PolygonKind::Newton, &slopes)
}

fn lower_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b unless it lies strictly below the chord a–p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

fn hull_value(hull: &[(i64, i64)], x: i64) -> Rational {
    for w in hull.windows(2) {
        if w[0].0 <= x && x <= w[1].0 {
            return Rational::from_integer(w[0].1) + Rational::new((w[1].1 - w[0].1) * (x - w[0].0), w[1].0 - w[0].0);
        }
    }
    Rational::from_integer(hull[0].1)
}

/// Multiplicity of the Newton slope 0.
pub fn p_rank(c: &FCrystal) -> Result<u64> {
    Ok(newton_polygon(c)?.multiplicity(Rational::from_integer(0)))
}

/// Largest `x` with `(x, 0)` a vertex.
pub fn p_rank_from_break_points(p: &Polygon) -> u64 {
    break_points(p).iter().filter(|b| b.y == Rational::from_integer(0)).map(|b| b.x).max().unwrap_or(0)
}

/// Rank over `F_{p^d}` of `Ā·σⁿ(Ā)⋯σ^{(rd-1)n}(Ā)`, the stable rank of the
/// reduction of `F` modulo `p`.
pub fn fixed_point_dimension(c: &FCrystal) -> usize {
    let a = c.matrix().residue();
    let factors = c.rank() * c.base().d();
    let mut acc = a.clone();
    for k in 1..factors {
        acc = acc.mul(&a.frobenius_pow(k * c.twist()));
    }
    acc.rank()
}

/// Bounded divisibility certificate: every entry of the `s`-th iterate has
/// valuation `≥ ⌊s·λ⌋` for `1 ≤ s ≤ s_max`.
pub fn is_divisible_by(c: &FCrystal, lambda: Rational, s_max: u32) -> Result<bool> {
    if lambda < Rational::from_integer(0) || s_max == 0 {
        return Err(Error::InvalidInput("divisibility needs λ ≥ 0 and s_max ≥ 1".into()));
    }
    if lambda * Rational::from_integer(s_max as i64) >= Rational::from_integer(c.precision() as i64) {
        return Err(Error::InsufficientPrecision(format!(
            "s_max·λ = {} is not below the precision {}",
            lambda * Rational::from_integer(s_max as i64),
            c.precision()
        )));
    }
    let mut acc = c.matrix().clone();
    for s in 1..=s_max as usize {
        if s > 1 {
            acc = acc.mul(&c.matrix().frobenius_pow((s - 1) * c.twist()));
        }
        let need = (lambda * Rational::from_integer(s as i64)).floor().to_integer() as u32;
        if acc.entries().any(|x| x.valuation() < need) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Certification data for a crystal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrystalMeta {
    /// Least truncation precision at which both polygons already certify and
    /// agree with the ones at full precision; `None` if they do not certify
    /// at full precision.
    pub guaranteed_slope_precision: Option<u32>,
}

impl FCrystal {
    pub fn meta(&self) -> CrystalMeta {
        let (Ok(h), Ok(n)) = (hodge_polygon(self), newton_polygon(self)) else {
            return CrystalMeta { guaranteed_slope_precision: None };
        };
        let least = (1..=self.precision()).find(|&k| {
            self.truncate(k)
                .is_ok_and(|t| hodge_polygon(&t).as_ref() == Ok(&h) && newton_polygon(&t).as_ref() == Ok(&n))
        });
        CrystalMeta { guaranteed_slope_precision: least }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fcrystal::standard_e;
    use crate::wittring::{FieldParams, GaloisRingElement};

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    fn newton(slopes: &[Rational]) -> Polygon {
        Polygon::from_slopes(PolygonKind::Newton, slopes).unwrap()
    }

    #[test]
    fn polygon_basics() {
        let p = newton(&[q(2, 1), q(0, 1), q(1, 2), q(1, 2)]);
        assert_eq!(p.segments(), &[(q(0, 1), 1), (q(1, 2), 2), (q(2, 1), 1)]);
        assert_eq!(p.rank(), 4);
        assert_eq!(p.value_at(2), q(1, 2));
        assert_eq!(p.total(), q(3, 1));
        assert_eq!(p.to_string(), "(0, 1/2^2, 2)");
        let bps: Vec<_> = break_points(&p).iter().map(|b| (b.x, b.y)).collect();
        assert_eq!(bps, vec![(0, q(0, 1)), (1, q(0, 1)), (3, q(1, 1)), (4, q(3, 1))]);
        assert!(Polygon::from_slopes(PolygonKind::Newton, &[q(-1, 1)]).is_err());
    }

    #[test]
    fn break_point_queries() {
        let single = newton(&[q(1, 1), q(1, 1)]);
        let split = newton(&[q(0, 1), q(2, 1)]);
        assert_eq!(break_points(&single).len(), 2);
        assert!(has_break_point(&single, q(0, 1), q(0, 1)));
        assert!(has_break_point(&split, q(1, 1), q(0, 1)));
        assert!(!has_break_point(&single, q(1, 1), q(0, 1)));
        assert!(!has_break_point(&split, q(1, 2), q(0, 1)));
        assert!(lies_above(&single, &single).unwrap());
        assert!(lies_above(&single, &split).unwrap());
        assert!(!lies_above(&split, &single).unwrap());
        assert_eq!(lies_above(&single, &newton(&[q(1, 1)])), Err(Error::RankMismatch(2, 1)));
        assert_eq!(p_rank_from_break_points(&split), 1);
        assert_eq!(p_rank_from_break_points(&single), 0);
        assert_eq!(p_rank_from_break_points(&newton(&[q(0, 1), q(0, 1)])), 2);
    }

    #[test]
    fn hodge_examples() {
        let b = FieldParams::get(2, 1).unwrap();
        let diag = FCrystal::from_int_rows(&b, 1, 6, &[vec![4, 0, 0], vec![0, 1, 0], vec![0, 0, 2]]).unwrap();
        assert_eq!(hodge_polygon(&diag).unwrap().slopes(), vec![q(0, 1), q(1, 1), q(2, 1)]);
        let id = FCrystal::identity(&b, 1, 3, 3).unwrap();
        assert_eq!(hodge_polygon(&id).unwrap().slopes(), vec![q(0, 1); 3]);
        let ex = FCrystal::from_int_rows(&b, 1, 5, &[vec![1, 2], vec![2, 0]]).unwrap();
        assert_eq!(hodge_polygon(&ex).unwrap().slopes(), vec![q(0, 1), q(2, 1)]);
    }

    #[test]
    fn newton_of_example_family() {
        for p in [2u64, 3, 5] {
            let b = FieldParams::get(p, 1).unwrap();
            let pp = p as i64;
            let t0 = FCrystal::from_int_rows(&b, 1, 5, &[vec![0, pp], vec![pp, 0]]).unwrap();
            assert_eq!(newton_polygon(&t0).unwrap(), newton(&[q(1, 1), q(1, 1)]));
            let t1 = FCrystal::from_int_rows(&b, 1, 5, &[vec![1, pp], vec![pp, 0]]).unwrap();
            let np = newton_polygon(&t1).unwrap();
            assert_eq!(np, newton(&[q(0, 1), q(2, 1)]));
            assert!(has_break_point(&np, q(1, 1), q(0, 1)));
            assert_eq!(p_rank(&t1).unwrap(), 1);
            assert_eq!(p_rank(&t0).unwrap(), 0);
            assert_eq!(fixed_point_dimension(&t1), 1);
            assert_eq!(fixed_point_dimension(&t0), 0);
        }
    }

    #[test]
    fn newton_of_standard_crystals() {
        for d in [1usize, 2, 3] {
            let base = FieldParams::get(2, d).unwrap();
            for b in 1..=4i64 {
                for a in 0..=6i64 {
                    if num_integer::gcd(a, b) != 1 {
                        continue;
                    }
                    for twist in 1..=2 {
                        let e = standard_e(a as u64, b as u64, twist, &base, (a * b + 2) as u32).unwrap();
                        assert_eq!(
                            newton_polygon(&e).unwrap(),
                            newton(&vec![q(a, b); b as usize]),
                            "E({a}/{b}) d={d} n={twist}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn insufficient_precision_is_reported() {
        // [[1,1],[1,1+p]] over F_4 certifies already at m = 2: det(M)² is known mod 8
        let base = FieldParams::get(2, 2).unwrap();
        let c2 = FCrystal::from_int_rows(&base, 1, 2, &[vec![1, 1], vec![1, 3]]).unwrap();
        assert_eq!(newton_polygon(&c2).unwrap(), newton(&[q(1, 2), q(1, 2)]));
        assert_eq!(c2.meta().guaranteed_slope_precision, Some(2));
        // a rank-3 crystal over F_8 whose middle coefficient is undetermined at m = 3
        let base = FieldParams::get(2, 3).unwrap();
        let rows: [[[u64; 3]; 3]; 3] =
            [[[1, 7, 5], [4, 6, 2], [0, 0, 6]], [[4, 4, 5], [6, 2, 6], [6, 0, 6]], [[6, 6, 6], [0, 3, 4], [6, 4, 6]]];
        let m3 = Matrix::from_fn(3, 3, |i, j| GaloisRingElement::from_coords(&base, 3, rows[i][j].to_vec()).unwrap());
        let c3 = FCrystal::new(&base, 1, 3, m3).unwrap();
        assert!(matches!(newton_polygon(&c3), Err(Error::InsufficientPrecision(_))));
        assert_eq!(c3.meta().guaranteed_slope_precision, None);
        let lifted = c3.lift_canonical(8).unwrap();
        let np = newton_polygon(&lifted).unwrap();
        assert_eq!(np.total(), Rational::from_integer(lifted.det_valuation() as i64));
    }

    #[test]
    fn direct_sum_and_exterior_slopes() {
        let b = FieldParams::get(2, 1).unwrap();
        let e12 = standard_e(1, 2, 1, &b, 6).unwrap();
        let e1 = standard_e(1, 1, 1, &b, 6).unwrap();
        let e0 = standard_e(0, 1, 1, &b, 6).unwrap();
        let s = e12.direct_sum(&e1).unwrap();
        assert_eq!(newton_polygon(&s).unwrap(), newton(&[q(1, 2), q(1, 2), q(1, 1)]));
        let w = e12.direct_sum(&e0).unwrap().exterior_power(2).unwrap();
        assert_eq!(newton_polygon(&w).unwrap(), newton(&[q(1, 1), q(1, 2), q(1, 2)]));
        let sq = e12.tensor_power(2).unwrap();
        assert_eq!(newton_polygon(&sq).unwrap(), newton(&[q(1, 1); 4]));
        let it = e12.iterate(2).unwrap();
        assert_eq!(newton_polygon(&it).unwrap(), newton(&[q(1, 1), q(1, 1)]));
        let big = e12.base_change(2).unwrap();
        assert_eq!(newton_polygon(&big).unwrap(), newton(&[q(1, 2), q(1, 2)]));
    }

    #[test]
    fn divisibility() {
        let b = FieldParams::get(3, 1).unwrap();
        let e12 = standard_e(1, 2, 1, &b, 6).unwrap();
        let e1 = standard_e(1, 1, 1, &b, 6).unwrap();
        assert!(is_divisible_by(&e12, q(0, 1), 5).unwrap());
        assert!(is_divisible_by(&e1, q(1, 1), 3).unwrap());
        assert!(is_divisible_by(&e12, q(1, 2), 4).unwrap());
        assert!(!is_divisible_by(&e12, q(1, 1), 2).unwrap());
        assert!(matches!(is_divisible_by(&e12, q(1, 1), 6), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn twisted_slopes_over_larger_fields() {
        // over F_8 with n = 2: e = 3, slopes stay per application
        let base = FieldParams::get(2, 3).unwrap();
        let u = GaloisRingElement::from_coords(&base, 6, vec![0, 1, 0]).unwrap();
        let p = u.p_power_like(1);
        let m = Matrix::from_rows(vec![vec![u.clone(), p.clone()], vec![p.clone(), u.zero_like()]]).unwrap();
        let c = FCrystal::new(&base, 2, 6, m).unwrap();
        let np = newton_polygon(&c).unwrap();
        assert_eq!(np, newton(&[q(0, 1), q(2, 1)]));
        assert_eq!(hodge_polygon(&c).unwrap(), Polygon::from_integer_slopes(PolygonKind::Hodge, &[0, 2]).unwrap());
    }
}
