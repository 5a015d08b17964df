//! Crystal families over affine space and their Newton-polygon, break-point
//! and p-rank strata, sampled on closed points of bounded degree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::fcrystal::FCrystal;
use crate::linalg::Matrix;
use crate::polygons::{break_points, has_break_point, hodge_polygon, lies_above, newton_polygon, Polygon};
use crate::wittring::{base_change_element, FieldElement, FieldParams, GaloisRingElement};
use crate::Rational;

/// `coeff · Π t̲_i^{e_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coeff: GaloisRingElement,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// A crystal over `F_q[t_1, …, t_k]` whose entries are polynomials in the
/// Teichmüller variables `t̲_i` with `W_m(F_q)` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyCrystal {
    base: Arc<FieldParams>,
    vars: Vec<String>,
    twist: usize,
    precision: u32,
    entries: Vec<Vec<Vec<Monomial>>>,
}

impl FamilyCrystal {
    pub fn new(
        base: &Arc<FieldParams>,
        vars: Vec<String>,
        twist: usize,
        m: u32,
        entries: Vec<Vec<Vec<Monomial>>>,
        caps: &Caps,
    ) -> Result<Self> {
        base.check_precision(m)?;
        if vars.is_empty() {
            return Err(Error::InvalidInput("a family needs at least one variable".into()));
        }
        if vars.len() > caps.max_vars {
            return Err(Error::CapExceeded(format!("{} variables > {}", vars.len(), caps.max_vars)));
        }
        if twist == 0 {
            return Err(Error::InvalidInput("twist must be at least 1".into()));
        }
        let r = entries.len();
        if r == 0 || entries.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidInput("family matrix must be square and nonempty".into()));
        }
        if r > caps.max_rank {
            return Err(Error::CapExceeded(format!("rank {r} > {}", caps.max_rank)));
        }
        for mono in entries.iter().flatten().flatten() {
            if mono.exponents.len() != vars.len() {
                return Err(Error::InvalidInput(format!(
                    "monomial has {} exponents for {} variables",
                    mono.exponents.len(),
                    vars.len()
                )));
            }
            if mono.degree() > caps.max_entry_degree {
                return Err(Error::CapExceeded(format!("entry degree {} > {}", mono.degree(), caps.max_entry_degree)));
            }
            if mono.coeff.params() != base || mono.coeff.precision() != m {
                return Err(Error::ParamMismatch("family coefficient outside W_m(F_q)".into()));
            }
        }
        Ok(FamilyCrystal { base: base.clone(), vars, twist, precision: m, entries })
    }

    /// The family with the constant matrix of `c`, in one variable `t`.
    pub fn constant(c: &FCrystal) -> Self {
        let entries = c
            .matrix()
            .to_rows()
            .into_iter()
            .map(|row| row.into_iter().map(|x| vec![Monomial { exponents: vec![0], coeff: x }]).collect())
            .collect();
        FamilyCrystal {
            base: c.base().clone(),
            vars: vec!["t".into()],
            twist: c.twist(),
            precision: c.precision(),
            entries,
        }
    }

    /// `F(e_1) = t̲·e_1 + p·e_2`, `F(e_2) = p·e_1` over `F_p[t]`.
    pub fn example_family(p: u64, m: u32) -> Result<Self> {
        let base = FieldParams::get(p, 1)?;
        let pe = GaloisRingElement::from_int(&base, m, p as i64)?;
        let one = GaloisRingElement::one(&base, m)?;
        let c = |e: u32, x: &GaloisRingElement| vec![Monomial { exponents: vec![e], coeff: x.clone() }];
        let entries = vec![vec![c(1, &one), c(0, &pe)], vec![c(0, &pe), vec![]]];
        FamilyCrystal::new(&base, vec!["t".into()], 1, m, entries, &Caps::default())
    }

    pub fn base(&self) -> &Arc<FieldParams> {
        &self.base
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn twist(&self) -> usize {
        self.twist
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Vec<Monomial>>] {
        &self.entries
    }

    /// Substitute Teichmüller lifts of the point's coordinates.
    pub fn evaluate_matrix(&self, pt: &ClosedPoint) -> Result<Matrix<GaloisRingElement>> {
        if pt.coords.len() != self.vars.len() {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates for {} variables",
                pt.coords.len(),
                self.vars.len()
            )));
        }
        let target = pt.field();
        if target.d() != self.base.d() * pt.degree {
            return Err(Error::ParamMismatch("point not over an extension of the family's field".into()));
        }
        let m = self.precision;
        let teich = pt.coords.iter().map(|x| GaloisRingElement::teichmuller(x, m)).collect::<Result<Vec<_>>>()?;
        let zero = GaloisRingElement::zero(target, m)?;
        let r = self.rank();
        let mut vals = Vec::with_capacity(r * r);
        for row in &self.entries {
            for poly in row {
                let mut acc = zero.clone();
                for mono in poly {
                    let mut term = base_change_element(&mono.coeff, target)?;
                    for (t, &e) in teich.iter().zip(&mono.exponents) {
                        if e > 0 {
                            term = &term * &t.pow(e as u64);
                        }
                    }
                    acc = &acc + &term;
                }
                vals.push(acc);
            }
        }
        Ok(Matrix::from_fn(r, r, |i, j| vals[i * r + j].clone()))
    }

    /// The crystal `C_s` over `F_{q^e}`.
    pub fn evaluate_at(&self, pt: &ClosedPoint) -> Result<FCrystal> {
        FCrystal::new(pt.field(), self.twist, self.precision, self.evaluate_matrix(pt)?)
    }

    pub fn closed_points(&self, max_degree: usize, caps: &Caps) -> Result<Vec<ClosedPoint>> {
        enumerate_closed_points(&self.base, self.vars.len(), max_degree, caps)
    }
}

/// A closed point of `A^k_{F_q}`: a tuple over `F_{q^e}` standing for its
/// Frobenius orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedPoint {
    pub degree: usize,
    pub coords: Vec<FieldElement>,
    /// Whether `coords` is the lexicographically least tuple of the orbit.
    pub representative: bool,
}

impl ClosedPoint {
    pub fn field(&self) -> &Arc<FieldParams> {
        self.coords[0].params()
    }

    pub fn indices(&self) -> Vec<u64> {
        self.coords.iter().map(FieldElement::index).collect()
    }

    /// Apply the `q`-Frobenius `j` times.
    pub fn conjugate(&self, j: usize) -> ClosedPoint {
        let d = self.field().d() / self.degree;
        let coords: Vec<FieldElement> = self.coords.iter().map(|x| x.frobenius_pow(j * d)).collect();
        let representative = self.representative && j % self.degree == 0;
        ClosedPoint { degree: self.degree, coords, representative }
    }
}

impl fmt::Display for ClosedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices().iter().map(u64::to_string).collect();
        write!(f, "deg {} ({})", self.degree, idx.join(", "))
    }
}

/// One representative per Frobenius orbit of points of `A^k` over `F_{q^e}`
/// with orbit size exactly `e`, for `e = 1..=D`; ordered by degree, then
/// lexicographically by coordinate index.
pub fn enumerate_closed_points(
    base: &Arc<FieldParams>,
    vars: usize,
    max_degree: usize,
    caps: &Caps,
) -> Result<Vec<ClosedPoint>> {
    if max_degree == 0 || vars == 0 {
        return Err(Error::InvalidInput("need degree ≥ 1 and at least one variable".into()));
    }
    let q = base.q() as f64;
    let total: f64 = (1..=max_degree).map(|e| q.powi((e * vars) as i32)).sum();
    if total > caps.max_points as f64 {
        return Err(Error::CapExceeded(format!("{total} points > {}", caps.max_points)));
    }
    let d = base.d();
    let mut out = Vec::new();
    for e in 1..=max_degree {
        let field = FieldParams::get(base.p(), d * e)?;
        let size = field.q();
        let count = size.pow(vars as u32);
        let proper: Vec<usize> = (1..e).filter(|j| e % j == 0).collect();
        for code in 0..count {
            let mut idx = Vec::with_capacity(vars);
            let mut c = code;
            for _ in 0..vars {
                idx.push(c % size);
                c /= size;
            }
            idx.reverse();
            let coords: Vec<FieldElement> = idx.iter().map(|&i| FieldElement::from_index(&field, i)).collect();
            let conj = |j: usize| -> Vec<u64> { coords.iter().map(|x| x.frobenius_pow(j * d).index()).collect() };
            if proper.iter().any(|&j| conj(j) == idx) {
                continue;
            }
            if (1..e).any(|j| conj(j) < idx) {
                continue;
            }
            out.push(ClosedPoint { degree: e, coords, representative: true });
        }
    }
    Ok(out)
}

/// Data computed at a successfully evaluated point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointData {
    pub newton: Polygon,
    /// `None` when the elementary divisors are not determined at this precision.
    pub hodge: Option<Polygon>,
    pub p_rank: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointRecord {
    pub point: ClosedPoint,
    pub outcome: std::result::Result<PointData, Error>,
}

/// A scan of a family. Strata hold indices into `records`.
#[derive(Clone, Debug, PartialEq)]
pub struct StratumReport {
    pub records: Vec<PointRecord>,
    pub newton_strata: BTreeMap<Polygon, Vec<usize>>,
    pub break_point_strata: BTreeMap<(u64, Rational), Vec<usize>>,
    pub p_rank_strata: BTreeMap<u64, Vec<usize>>,
    /// Newton polygons seen at points of each degree.
    pub polygons_by_degree: BTreeMap<usize, BTreeSet<Polygon>>,
}

impl StratumReport {
    pub fn errors(&self) -> impl Iterator<Item = (usize, &Error)> {
        self.records.iter().enumerate().filter_map(|(i, r)| r.outcome.as_ref().err().map(|e| (i, e)))
    }

    pub fn newton_at(&self, i: usize) -> Option<&Polygon> {
        self.records[i].outcome.as_ref().ok().map(|d| &d.newton)
    }
}

fn point_data(fam: &FamilyCrystal, pt: &ClosedPoint) -> Result<PointData> {
    let c = fam.evaluate_at(pt)?;
    let newton = newton_polygon(&c)?;
    let p_rank = newton.multiplicity(Rational::from_integer(0));
    Ok(PointData { newton, hodge: hodge_polygon(&c).ok(), p_rank })
}

/// Evaluate the family at every closed point of degree `≤ D` (in parallel on
/// the current rayon pool; output order is enumeration order).
pub fn scan(fam: &FamilyCrystal, max_degree: usize, caps: &Caps) -> Result<StratumReport> {
    let points = fam.closed_points(max_degree, caps)?;
    let records: Vec<PointRecord> = points
        .into_par_iter()
        .map(|point| {
            let outcome = point_data(fam, &point);
            PointRecord { point, outcome }
        })
        .collect();
    if let Some(first) = records.first() {
        if records.iter().all(|r| r.outcome.is_err()) {
            return Err(first.outcome.clone().expect_err("all points failed"));
        }
    }
    let mut report = StratumReport {
        records,
        newton_strata: BTreeMap::new(),
        break_point_strata: BTreeMap::new(),
        p_rank_strata: BTreeMap::new(),
        polygons_by_degree: BTreeMap::new(),
    };
    for (i, rec) in report.records.iter().enumerate() {
        let Ok(data) = &rec.outcome else { continue };
        report.newton_strata.entry(data.newton.clone()).or_default().push(i);
        report.p_rank_strata.entry(data.p_rank).or_default().push(i);
        for b in break_points(&data.newton) {
            report.break_point_strata.entry((b.x, b.y)).or_default().push(i);
        }
        report.polygons_by_degree.entry(rec.point.degree).or_default().insert(data.newton.clone());
    }
    Ok(report)
}

/// Indices of evaluated points whose Newton polygon lies above `nu`.
pub fn specialization_locus(report: &StratumReport, nu: &Polygon) -> Vec<usize> {
    (0..report.records.len())
        .filter(|&i| report.newton_at(i).is_some_and(|np| lies_above(np, nu).unwrap_or(false)))
        .collect()
}

/// Internal consistency of `S_{≥ν}` on the sample: whenever `NP(s)` lies
/// above an observed polygon `ν'` that lies above `ν`, `s` is in `S_{≥ν}`.
pub fn check_specialization(report: &StratumReport, nu: &Polygon) -> bool {
    let locus: BTreeSet<usize> = specialization_locus(report, nu).into_iter().collect();
    let observed: Vec<&Polygon> = report.newton_strata.keys().collect();
    for i in 0..report.records.len() {
        let Some(np) = report.newton_at(i) else { continue };
        for mid in &observed {
            let above_mid = lies_above(np, mid).unwrap_or(false);
            let mid_above = lies_above(mid, nu).unwrap_or(false);
            if above_mid && mid_above && !locus.contains(&i) {
                return false;
            }
        }
    }
    true
}

/// Outcome of [`verify_step1_identities`].
#[derive(Clone, Debug, PartialEq)]
pub struct Step1Report {
    pub passed: bool,
    pub checked: usize,
    /// Points in `S_{P0}`, as indices into the enumeration.
    pub stratum: Vec<usize>,
    pub failures: Vec<String>,
}

/// Check at every closed point of degree `≤ D` that
/// 1. `(a,b)` is a break point of `NP(C_s)` iff `(1,b)` is one of `NP(∧^a C_s)`;
/// 2. with `D = ∧^a C_s` made integral by an iterate and `ν₁`, `ν₂` the two
///    comparison polygons through `(1,b)` and `(1,b+1)`, the stratum lies in
///    `S_{≥ν₁}` and inside it equals the complement of `S_{≥ν₂}`.
///
/// Points where the family is not a crystal are skipped; other per-point
/// errors are returned.
pub fn verify_step1_identities(
    fam: &FamilyCrystal,
    p0: (Rational, Rational),
    max_degree: usize,
    caps: &Caps,
) -> Result<Step1Report> {
    let points = fam.closed_points(max_degree, caps)?;
    let results: Vec<Result<Option<(bool, Vec<String>)>>> =
        points.par_iter().map(|pt| step1_at_point(fam, pt, p0, caps)).collect();
    let mut report = Step1Report { passed: true, checked: 0, stratum: Vec::new(), failures: Vec::new() };
    for (i, res) in results.into_iter().enumerate() {
        let Some((in_s, fails)) = res? else { continue };
        report.checked += 1;
        if in_s {
            report.stratum.push(i);
        }
        for f in fails {
            report.failures.push(format!("{}: {f}", points[i]));
        }
    }
    report.passed = report.failures.is_empty();
    Ok(report)
}

fn step1_at_point(
    fam: &FamilyCrystal,
    pt: &ClosedPoint,
    (a, b): (Rational, Rational),
    caps: &Caps,
) -> Result<Option<(bool, Vec<String>)>> {
    let c = match fam.evaluate_at(pt) {
        Ok(c) => c,
        Err(Error::NotACrystal(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let np = newton_polygon(&c)?;
    let in_s = has_break_point(&np, a, b);
    let mut fails = Vec::new();
    let zero = Rational::from_integer(0);
    let integral = a.is_integer() && b.is_integer() && a >= zero && b >= zero;
    let r = c.rank() as i64;
    if !integral || a.to_integer() > r || (a == zero && b != zero) {
        if in_s {
            fails.push(format!("({a}, {b}) cannot be a break point but is one of {np}"));
        }
        return Ok(Some((in_s, fails)));
    }
    if a == zero {
        if !in_s {
            fails.push("(0, 0) is not reported as a break point".into());
        }
        return Ok(Some((in_s, fails)));
    }
    let d = c.exterior_power_capped(a.to_integer() as usize, caps)?;
    let np_d = newton_polygon(&d)?;
    let one = Rational::from_integer(1);
    let in_s_d = has_break_point(&np_d, one, b);
    if in_s != in_s_d {
        fails.push(format!("break point ({a}, {b}) of {np} disagrees with (1, {b}) on ∧^{a}: {np_d}"));
    }
    // integralize by an iterate; its slopes are c·(slopes of D)
    let c_int = np_d.slopes().iter().fold(1i64, |acc, s| num_integer::lcm(acc, *s.denom()));
    let (np_int, b_int) = if c_int == 1 {
        (np_d.clone(), b.to_integer())
    } else {
        let it = d.iterate(c_int as usize)?;
        let np_it = newton_polygon(&it)?;
        let scaled = b * Rational::from_integer(c_int);
        if has_break_point(&np_it, one, scaled) != in_s_d {
            fails.push(format!("iterate by {c_int} moves the break point (1, {b})"));
        }
        (np_it, scaled.to_integer())
    };
    let rr = np_int.rank() as i64;
    if rr < 2 {
        return Ok(Some((in_s, fails)));
    }
    let q = np_int.total().to_integer();
    let last1 = q - b_int - (rr - 2) * (b_int + 1);
    if last1 < b_int + 1 {
        // no integral polygon has (1, b) as a vertex with this endpoint
        if in_s {
            fails.push(format!("({a}, {b}) is a break point although the endpoint {q} is too low"));
        }
        return Ok(Some((in_s, fails)));
    }
    let mut nu1 = vec![b_int];
    nu1.extend(std::iter::repeat(b_int + 1).take((rr - 2) as usize));
    nu1.push(last1);
    let nu1 = Polygon::from_integer_slopes(np_int.kind(), &nu1)?;
    let above1 = lies_above(&np_int, &nu1)?;
    if in_s && !above1 {
        fails.push(format!("{np_int} is in the stratum but not above ν₁ = {nu1}"));
    }
    if above1 {
        // ν₂(j) = j(b+1) for j < R, ν₂(R) = q; compared pointwise since the
        // last segment may be shallower than b + 1
        let above2 = (0..rr).all(|j| np_int.value_at(j as u64) >= Rational::from_integer(j * (b_int + 1)));
        if in_s == above2 {
            fails.push(format!("{np_int}: membership {in_s} but lies above ν₂ is {above2} (b = {b_int}, q = {q})"));
        }
    }
    Ok(Some((in_s, fails)))
}

/// Overlay polygons on an integer lattice. Labels default to `ν_1, ν_2, …`.
pub fn polygon_svg(polygons: &[Polygon], labels: &[String]) -> Result<String> {
    if polygons.is_empty() {
        return Err(Error::InvalidInput("nothing to plot".into()));
    }
    const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    let max_x = polygons.iter().map(Polygon::rank).max().unwrap_or(1).max(1) as i64;
    let max_y = polygons.iter().map(|p| p.total().ceil().to_integer()).max().unwrap_or(1).max(1);
    let cell = (360 / max_x.max(max_y)).clamp(12, 80);
    let margin = 40;
    let width = margin * 2 + cell * max_x + 60;
    let height = margin * 2 + cell * max_y;
    let px = |x: Rational| -> String { fmt_px(Rational::from_integer(margin) + x * Rational::from_integer(cell)) };
    let py = |y: Rational| -> String {
        fmt_px(Rational::from_integer(margin + cell * max_y) - y * Rational::from_integer(cell))
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##);
    let _ = writeln!(s, r##"<g stroke="#dddddd" stroke-width="1">"##);
    for x in 0..=max_x {
        let xr = Rational::from_integer(x);
        let (y0, y1) = (py(Rational::from_integer(0)), py(Rational::from_integer(max_y)));
        let _ = writeln!(s, r#"<line x1="{}" y1="{y0}" x2="{}" y2="{y1}"/>"#, px(xr), px(xr));
    }
    for y in 0..=max_y {
        let yr = Rational::from_integer(y);
        let (x0, x1) = (px(Rational::from_integer(0)), px(Rational::from_integer(max_x)));
        let _ = writeln!(s, r#"<line x1="{x0}" y1="{}" x2="{x1}" y2="{}"/>"#, py(yr), py(yr));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g font-family="sans-serif" font-size="11" fill="#555555">"##);
    for x in 0..=max_x {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{x}</text>"#,
            px(Rational::from_integer(x)),
            fmt_px(Rational::from_integer(margin + cell * max_y + 16))
        );
    }
    for y in 0..=max_y {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{y}</text>"#,
            fmt_px(Rational::from_integer(margin - 6)),
            py(Rational::from_integer(y))
        );
    }
    let _ = writeln!(s, "</g>");
    for (k, poly) in polygons.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let verts = break_points(poly);
        let pts: Vec<String> =
            verts.iter().map(|b| format!("{},{}", px(Rational::from_integer(b.x as i64)), py(b.y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        for b in &verts {
            let _ = writeln!(
                s,
                r#"<circle cx="{}" cy="{}" r="4" fill="{color}"/>"#,
                px(Rational::from_integer(b.x as i64)),
                py(b.y)
            );
        }
        let last = verts.last().expect("polygon has an endpoint");
        let label = match labels.get(k) {
            Some(l) => escape_xml(l),
            None => format!(r#"ν<tspan baseline-shift="sub" font-size="9">{}</tspan>"#, k + 1),
        };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" fill="{color}">{label}</text>"#,
            fmt_px(Rational::from_integer(margin + cell * last.x as i64 + 8)),
            fmt_px(
                Rational::from_integer(margin + cell * max_y) - last.y * Rational::from_integer(cell)
                    + Rational::from_integer(14 * k as i64 + 4)
            )
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn fmt_px(v: Rational) -> String {
    if v.is_integer() {
        v.to_integer().to_string()
    } else {
        format!("{:.2}", *v.numer() as f64 / *v.denom() as f64)
    }
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
