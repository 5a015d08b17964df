//! JSON formats.
//!
//! * element: `{"p", "d", "m", "coords": [c_0, …, c_{d-1}]}`; field elements use `m = 1`.
//!   Inside a crystal, family or instance an entry may also be an integer or a
//!   bare coordinate list.
//! * crystal: `{"p", "d", "m", "n", "rank", "matrix": [[entry, …], …]}`
//! * polygon: `{"kind", "segments": [[slope_num, slope_den, mult], …]}`
//! * break points: `[[x, y], …]`
//! * family: `{"p", "d", "m", "n", "rank", "vars": [names], "matrix": [[[monomial, …], …], …]}`
//!   with monomial `{"exponents": [e_1, …], "coeff": entry}`
//! * Artin–Schreier instance: `{"p", "d", "n", "A": [[entry, …], …]}`
//!
//! Output objects keep their fields in the order listed.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::artinschreier::{AsInstance, AsStratumReport};
use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::fcrystal::FCrystal;
use crate::linalg::Matrix;
use crate::polygons::{break_points, BreakPoint, Polygon, PolygonKind};
use crate::strata::{ClosedPoint, FamilyCrystal, Monomial, StratumReport};
use crate::wittring::{FieldElement, FieldParams, GaloisRingElement};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementJson {
    pub p: u64,
    pub d: usize,
    pub m: u32,
    pub coords: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryJson {
    Int(i64),
    Coords(Vec<u64>),
    Full(ElementJson),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalJson {
    pub p: u64,
    pub d: usize,
    pub m: u32,
    pub n: usize,
    pub rank: usize,
    pub matrix: Vec<Vec<EntryJson>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonJson {
    pub kind: String,
    pub segments: Vec<[i64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialJson {
    pub exponents: Vec<u32>,
    pub coeff: EntryJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub p: u64,
    pub d: usize,
    pub m: u32,
    pub n: usize,
    pub rank: usize,
    pub vars: Vec<String>,
    pub matrix: Vec<Vec<Vec<MonomialJson>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsInstanceJson {
    pub p: u64,
    pub d: usize,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<EntryJson>>,
}

pub fn element_to_json(x: &GaloisRingElement) -> ElementJson {
    ElementJson { p: x.p(), d: x.params().d(), m: x.precision(), coords: x.coords().to_vec() }
}

pub fn element_from_json(e: &ElementJson) -> Result<GaloisRingElement> {
    let params = FieldParams::get(e.p, e.d)?;
    GaloisRingElement::from_coords(&params, e.m, e.coords.clone())
}

pub fn field_element_to_json(x: &FieldElement) -> ElementJson {
    element_to_json(x.as_ring())
}

fn entry_to_element(e: &EntryJson, base: &Arc<FieldParams>, m: u32) -> Result<GaloisRingElement> {
    match e {
        EntryJson::Int(v) => GaloisRingElement::from_int(base, m, *v),
        EntryJson::Coords(c) => GaloisRingElement::from_coords(base, m, c.clone()),
        EntryJson::Full(full) => {
            if full.p != base.p() || full.d != base.d() || full.m != m {
                return Err(Error::ParamMismatch(format!(
                    "entry over (p={}, d={}, m={}) in a matrix over (p={}, d={}, m={m})",
                    full.p,
                    full.d,
                    full.m,
                    base.p(),
                    base.d()
                )));
            }
            element_from_json(full)
        }
    }
}

fn check_rank<T>(rows: &[Vec<T>], rank: usize, caps: &Caps) -> Result<()> {
    if rows.len() != rank || rows.iter().any(|r| r.len() != rank) {
        return Err(Error::InvalidInput(format!("matrix is not {rank}x{rank}")));
    }
    if rank == 0 {
        return Err(Error::InvalidInput("rank must be positive".into()));
    }
    if rank > caps.max_rank {
        return Err(Error::CapExceeded(format!("rank {rank} > {}", caps.max_rank)));
    }
    Ok(())
}

pub fn crystal_to_json(c: &FCrystal) -> CrystalJson {
    CrystalJson {
        p: c.p(),
        d: c.base().d(),
        m: c.precision(),
        n: c.twist(),
        rank: c.rank(),
        matrix: c
            .matrix()
            .to_rows()
            .iter()
            .map(|row| row.iter().map(|x| EntryJson::Full(element_to_json(x))).collect())
            .collect(),
    }
}

/// Build the crystal described by `j` at its own precision.
pub fn crystal_from_json(j: &CrystalJson, caps: &Caps) -> Result<FCrystal> {
    crystal_from_json_at(j, j.m, caps)
}

/// Build the crystal described by `j` at precision `m ≥ j.m`, reading its
/// coordinates as integers (so integer matrices keep their meaning).
pub fn crystal_from_json_at(j: &CrystalJson, m: u32, caps: &Caps) -> Result<FCrystal> {
    check_rank(&j.matrix, j.rank, caps)?;
    caps.check_modulus(j.p, m)?;
    let base = FieldParams::get(j.p, j.d)?;
    base.check_precision(m)?;
    base.check_precision(j.m)?;
    if m < j.m {
        return Err(Error::InvalidInput(format!("cannot read precision {} data at lower precision {m}", j.m)));
    }
    let rows = j
        .matrix
        .iter()
        .map(|row| {
            row.iter().map(|e| entry_to_element(e, &base, j.m).map(|x| x.lift_canonical(m))).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    FCrystal::new(&base, j.n, m, Matrix::from_rows(rows)?)
}

pub fn polygon_to_json(p: &Polygon) -> PolygonJson {
    PolygonJson {
        kind: p.kind().as_str().into(),
        segments: p.segments().iter().map(|(s, m)| [*s.numer(), *s.denom(), *m as i64]).collect(),
    }
}

pub fn polygon_from_json(j: &PolygonJson) -> Result<Polygon> {
    let kind = match j.kind.as_str() {
        "hodge" => PolygonKind::Hodge,
        "newton" => PolygonKind::Newton,
        other => return Err(Error::InvalidInput(format!("unknown polygon kind `{other}`"))),
    };
    let segments = j
        .segments
        .iter()
        .map(|&[num, den, mult]| {
            if den <= 0 || mult <= 0 {
                return Err(Error::InvalidInput("segment needs positive denominator and multiplicity".into()));
            }
            Ok((Rational::new(num, den), mult as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Polygon::from_segments(kind, segments)
}

/// Integral coordinates as numbers, others as `"num/den"` strings.
pub fn rational_to_json(r: Rational) -> Value {
    if r.is_integer() {
        json!(r.to_integer())
    } else {
        json!(r.to_string())
    }
}

pub fn break_points_to_json(bps: &[BreakPoint]) -> Value {
    Value::Array(bps.iter().map(|b| json!([b.x, rational_to_json(b.y)])).collect())
}

pub fn family_to_json(f: &FamilyCrystal) -> FamilyJson {
    FamilyJson {
        p: f.base().p(),
        d: f.base().d(),
        m: f.precision(),
        n: f.twist(),
        rank: f.rank(),
        vars: f.vars().to_vec(),
        matrix: f
            .entries()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|poly| {
                        poly.iter()
                            .map(|mono| MonomialJson {
                                exponents: mono.exponents.clone(),
                                coeff: EntryJson::Full(element_to_json(&mono.coeff)),
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect(),
    }
}

pub fn family_from_json(j: &FamilyJson, caps: &Caps) -> Result<FamilyCrystal> {
    family_from_json_at(j, j.m, caps)
}

/// As [`crystal_from_json_at`], for families.
pub fn family_from_json_at(j: &FamilyJson, m: u32, caps: &Caps) -> Result<FamilyCrystal> {
    check_rank(&j.matrix, j.rank, caps)?;
    caps.check_modulus(j.p, m)?;
    let base = FieldParams::get(j.p, j.d)?;
    base.check_precision(m)?;
    base.check_precision(j.m)?;
    if m < j.m {
        return Err(Error::InvalidInput(format!("cannot read precision {} data at lower precision {m}", j.m)));
    }
    let entries = j
        .matrix
        .iter()
        .map(|row| {
            row.iter()
                .map(|poly| {
                    poly.iter()
                        .map(|mono| {
                            Ok(Monomial {
                                exponents: mono.exponents.clone(),
                                coeff: entry_to_element(&mono.coeff, &base, j.m)?.lift_canonical(m),
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    FamilyCrystal::new(&base, j.vars.clone(), j.n, m, entries, caps)
}

pub fn as_instance_from_json(j: &AsInstanceJson, caps: &Caps) -> Result<AsInstance> {
    check_rank(&j.a, j.n, caps)?;
    let base = FieldParams::get(j.p, j.d)?;
    let rows = j
        .a
        .iter()
        .map(|row| row.iter().map(|e| entry_to_element(e, &base, 1).map(|x| x.residue())).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    AsInstance::new(Matrix::from_rows(rows)?)
}

pub fn as_instance_to_json(inst: &AsInstance) -> AsInstanceJson {
    let f = inst.field();
    AsInstanceJson {
        p: f.p(),
        d: f.d(),
        n: inst.size(),
        a: inst
            .matrix()
            .to_rows()
            .iter()
            .map(|row| row.iter().map(|x| EntryJson::Full(field_element_to_json(x))).collect())
            .collect(),
    }
}

fn point_json(pt: &ClosedPoint) -> Value {
    json!({ "degree": pt.degree, "coords": pt.indices() })
}

/// Deterministic JSON for a scan.
pub fn stratum_report_to_json(fam: &FamilyCrystal, max_degree: usize, report: &StratumReport) -> Value {
    let points: Vec<Value> = report
        .records
        .iter()
        .map(|rec| {
            let mut obj = serde_json::Map::new();
            obj.insert("degree".into(), json!(rec.point.degree));
            obj.insert("coords".into(), json!(rec.point.indices()));
            match &rec.outcome {
                Ok(data) => {
                    obj.insert("newton".into(), json!(polygon_to_json(&data.newton)));
                    obj.insert("hodge".into(), data.hodge.as_ref().map_or(Value::Null, |h| json!(polygon_to_json(h))));
                    obj.insert("break_points".into(), break_points_to_json(&break_points(&data.newton)));
                    obj.insert("p_rank".into(), json!(data.p_rank));
                }
                Err(e) => {
                    obj.insert("error".into(), json!(e.to_string()));
                }
            }
            Value::Object(obj)
        })
        .collect();
    let newton: Vec<Value> = report
        .newton_strata
        .iter()
        .map(|(poly, idx)| json!({ "polygon": polygon_to_json(poly), "points": idx }))
        .collect();
    let bps: Vec<Value> = report
        .break_point_strata
        .iter()
        .map(|((x, y), idx)| json!({ "break_point": [x, rational_to_json(*y)], "points": idx }))
        .collect();
    let ranks: Vec<Value> = report.p_rank_strata.iter().map(|(t, idx)| json!({ "p_rank": t, "points": idx })).collect();
    let by_degree: Vec<Value> = report
        .polygons_by_degree
        .iter()
        .map(|(e, polys)| json!({ "degree": e, "polygons": polys.iter().map(polygon_to_json).collect::<Vec<_>>() }))
        .collect();
    let errors: Vec<Value> = report.errors().map(|(i, e)| json!({ "point": i, "error": e.to_string() })).collect();
    ordered(vec![
        ("p", json!(fam.base().p())),
        ("d", json!(fam.base().d())),
        ("m", json!(fam.precision())),
        ("n", json!(fam.twist())),
        ("rank", json!(fam.rank())),
        ("max_degree", json!(max_degree)),
        ("points", Value::Array(points)),
        ("newton_strata", Value::Array(newton)),
        ("break_point_strata", Value::Array(bps)),
        ("p_rank_strata", Value::Array(ranks)),
        ("polygons_by_degree", Value::Array(by_degree)),
        ("errors", Value::Array(errors)),
    ])
}

pub fn as_stratum_report_to_json(report: &AsStratumReport) -> Value {
    let points: Vec<Value> = report
        .points
        .iter()
        .zip(&report.dimensions)
        .enumerate()
        .map(|(i, (pt, d))| {
            let mut v = point_json(pt);
            v["dimension"] = json!(d);
            if let Some(pr) = &report.p_ranks {
                v["corollary3_p_rank"] = pr[i].map_or(Value::Null, |x| json!(x));
            }
            v
        })
        .collect();
    let strata: Vec<Value> = report.strata.iter().map(|(d, idx)| json!({ "dimension": d, "points": idx })).collect();
    ordered(vec![
        ("points", Value::Array(points)),
        ("strata", Value::Array(strata)),
        ("cross_check_precision", report.cross_check_precision.map_or(Value::Null, |m| json!(m))),
        ("cross_check", report.cross_check_passed().map_or(Value::Null, |b| json!(b))),
    ])
}

/// An object with the given key order.
pub fn ordered(fields: Vec<(&str, Value)>) -> Value {
    let mut map = serde_json::Map::new();
    for (k, v) in fields {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fcrystal::standard_e;

    #[test]
    fn element_round_trip() {
        let f = FieldParams::get(3, 2).unwrap();
        let x = GaloisRingElement::from_coords(&f, 2, vec![4, 8]).unwrap();
        let j = element_to_json(&x);
        assert_eq!(serde_json::to_string(&j).unwrap(), r#"{"p":3,"d":2,"m":2,"coords":[4,8]}"#);
        assert_eq!(element_from_json(&j).unwrap(), x);
        let bad = ElementJson { p: 3, d: 2, m: 2, coords: vec![9, 0] };
        assert!(element_from_json(&bad).is_err());
    }

    #[test]
    fn crystal_round_trip_and_shorthand() {
        let caps = Caps::default();
        let f = FieldParams::get(2, 2).unwrap();
        let e = standard_e(1, 2, 1, &f, 4).unwrap();
        let j = crystal_to_json(&e);
        let text = serde_json::to_string(&j).unwrap();
        let back: CrystalJson = serde_json::from_str(&text).unwrap();
        assert_eq!(crystal_from_json(&back, &caps).unwrap(), e);
        let short: CrystalJson =
            serde_json::from_str(r#"{"p":2,"d":2,"m":4,"n":1,"rank":2,"matrix":[[0,2],[[1,0],0]]}"#).unwrap();
        assert_eq!(crystal_from_json(&short, &caps).unwrap(), e);
        assert_eq!(crystal_from_json_at(&short, 8, &caps).unwrap(), e.lift_canonical(8).unwrap());
        let ragged: CrystalJson =
            serde_json::from_str(r#"{"p":2,"d":1,"m":4,"n":1,"rank":2,"matrix":[[1,0],[0]]}"#).unwrap();
        assert!(crystal_from_json(&ragged, &caps).is_err());
        let err = serde_json::from_str::<CrystalJson>("{\"p\":2,\n\"d\":}").unwrap_err();
        assert_eq!(err.line(), 2);
    }

    #[test]
    fn polygon_format() {
        let p = Polygon::from_slopes(PolygonKind::Newton, &[Rational::new(1, 2), Rational::new(1, 2)]).unwrap();
        let j = polygon_to_json(&p);
        assert_eq!(serde_json::to_string(&j).unwrap(), r#"{"kind":"newton","segments":[[1,2,2]]}"#);
        assert_eq!(polygon_from_json(&j).unwrap(), p);
        assert_eq!(break_points_to_json(&break_points(&p)).to_string(), "[[0,0],[2,1]]");
    }

    #[test]
    fn family_and_instance_formats() {
        let caps = Caps::default();
        let fam = FamilyCrystal::example_family(3, 5).unwrap();
        let j = family_to_json(&fam);
        let back: FamilyJson = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(family_from_json(&back, &caps).unwrap(), fam);
        let inst: AsInstanceJson = serde_json::from_str(r#"{"p":2,"d":2,"n":2,"A":[[1,0],[[0,1],1]]}"#).unwrap();
        let a = as_instance_from_json(&inst, &caps).unwrap();
        assert_eq!(a.size(), 2);
        let again = as_instance_from_json(&as_instance_to_json(&a), &caps).unwrap();
        assert_eq!(again, a);
    }
}
