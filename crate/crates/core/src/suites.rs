//! Built-in verification suites.
//!
//! Every suite is deterministic given its seed. Suites that draw crystals use
//! the recipes in [`crate::random`], so a run can be reproduced from the seed
//! alone.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::artinschreier::{as_dimension, brute_force_as_dimension, corollary3_p_rank};
use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::fcrystal::{standard_e, FCrystal};
use crate::polygons::{
    break_points, fixed_point_dimension, has_break_point, hodge_polygon, lies_above, newton_polygon, p_rank,
    p_rank_from_break_points, Polygon, PolygonKind,
};
use crate::random::{random_as_instance, rng, HodgeRecipe, IntegralFamilyRecipe, OracleRecipe};
use crate::strata::{scan, verify_step1_identities, FamilyCrystal};
use crate::wittring::{FieldElement, FieldParams, GaloisRingElement};
use crate::Rational;

pub const SUITE_NAMES: &[&str] = &[
    "ring-axioms",
    "frobenius",
    "teichmuller",
    "example-family",
    "e-lambda",
    "mazur",
    "oracle",
    "iterate-exterior",
    "break-integrality",
    "break-point-reduction",
    "artin-schreier",
    "p-rank",
    "precision",
];

/// Failure messages kept per suite; the count is always exact.
const MAX_DETAILS: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteOutcome {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub failed: usize,
    pub details: Vec<String>,
}

#[derive(Default)]
struct Tally {
    checked: usize,
    failed: usize,
    details: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.fail(what());
        }
    }

    fn fail(&mut self, msg: String) {
        self.failed += 1;
        if self.details.len() < MAX_DETAILS {
            self.details.push(msg);
        }
    }

    fn record<T>(&mut self, label: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checked += 1;
                self.fail(format!("{label}: {e}"));
                None
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checked += other.checked;
        self.failed += other.failed;
        for d in other.details {
            if self.details.len() < MAX_DETAILS {
                self.details.push(d);
            }
        }
    }

    fn finish(self, name: &str) -> SuiteOutcome {
        SuiteOutcome {
            name: name.to_string(),
            passed: self.failed == 0 && self.checked > 0,
            checked: self.checked,
            failed: self.failed,
            details: self.details,
        }
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteOutcome> {
    let tally = match name {
        "ring-axioms" => ring_axioms(seed),
        "frobenius" => frobenius(seed),
        "teichmuller" => teichmuller(seed),
        "example-family" => example_family(),
        "e-lambda" => e_lambda(),
        "mazur" => mazur(seed),
        "oracle" => oracle(seed),
        "iterate-exterior" => iterate_exterior(seed),
        "break-integrality" => break_integrality(seed),
        "break-point-reduction" => break_point_reduction(seed),
        "artin-schreier" => artin_schreier(seed),
        "p-rank" => p_rank_suite(seed),
        "precision" => precision(seed),
        other => return Err(Error::InvalidInput(format!("unknown suite `{other}`"))),
    };
    Ok(tally.finish(name))
}

pub fn run_all(seed: u64) -> Vec<SuiteOutcome> {
    SUITE_NAMES.iter().map(|n| run_suite(n, seed).expect("known suite")).collect()
}

fn q(a: i64, b: i64) -> Rational {
    Rational::new(a, b)
}

fn random_element(rng: &mut ChaCha8Rng, f: &std::sync::Arc<FieldParams>, m: u32) -> GaloisRingElement {
    let n = f.p_pow(m);
    let coords = (0..f.d()).map(|_| rng.gen_range(0..n)).collect();
    GaloisRingElement::from_coords(f, m, coords).expect("coordinates in range")
}

/// A field and precision for the element-level suites.
fn random_ring(rng: &mut ChaCha8Rng) -> (std::sync::Arc<FieldParams>, u32) {
    let p = [2u64, 3, 5][rng.gen_range(0..3)];
    let d = rng.gen_range(1..=3);
    (FieldParams::get(p, d).expect("small field"), rng.gen_range(1..=8))
}

fn ring_axioms(seed: u64) -> Tally {
    let mut rng = rng(seed);
    let mut t = Tally::default();
    for _ in 0..300 {
        let (f, m) = random_ring(&mut rng);
        let (x, y, z) =
            (random_element(&mut rng, &f, m), random_element(&mut rng, &f, m), random_element(&mut rng, &f, m));
        let ctx = || format!("GR({}^{m}, {}) at {x:?}, {y:?}, {z:?}", f.p(), f.d());
        t.check(&(&x * &y) * &z == &x * &(&y * &z), || format!("associativity in {}", ctx()));
        t.check(&x * &y == &y * &x, || format!("commutativity in {}", ctx()));
        t.check(&x * &(&y + &z) == &(&x * &y) + &(&x * &z), || format!("distributivity in {}", ctx()));
        t.check(&(&x + &y) - &y == x, || format!("subtraction in {}", ctx()));
        let vxy = (x.valuation() + y.valuation()).min(m);
        t.check((&x * &y).valuation() == vxy, || format!("valuation of product in {}", ctx()));
        t.check((&x + &y).valuation() >= x.valuation().min(y.valuation()), || format!("valuation of sum in {}", ctx()));
        if x.is_unit() {
            let ok = x.inv().map(|i| (&i * &x) == x.one_like()).unwrap_or(false);
            t.check(ok, || format!("inverse in {}", ctx()));
        } else {
            t.check(x.inv().is_err(), || format!("non-unit inverted in {}", ctx()));
        }
    }
    t
}

fn frobenius(seed: u64) -> Tally {
    let mut rng = rng(seed.wrapping_add(1));
    let mut t = Tally::default();
    for _ in 0..300 {
        let (f, m) = random_ring(&mut rng);
        let (x, y) = (random_element(&mut rng, &f, m), random_element(&mut rng, &f, m));
        let ctx = || format!("GR({}^{m}, {}) at {x:?}, {y:?}", f.p(), f.d());
        t.check((&x + &y).frobenius() == &x.frobenius() + &y.frobenius(), || format!("additivity in {}", ctx()));
        t.check((&x * &y).frobenius() == &x.frobenius() * &y.frobenius(), || format!("multiplicativity in {}", ctx()));
        t.check(x.frobenius_pow(f.d()) == x, || format!("order divides d in {}", ctx()));
        t.check(x.frobenius().residue() == x.residue().pow(f.p()), || format!("reduces to p-th power in {}", ctx()));
        let k = rng.gen_range(-50i64..50);
        let c = GaloisRingElement::from_int(&f, m, k).expect("valid precision");
        t.check(c.frobenius() == c, || format!("moves the integer {k} in {}", ctx()));
        t.check(x.frobenius().valuation() == x.valuation(), || format!("valuation in {}", ctx()));
    }
    t
}

fn teichmuller(seed: u64) -> Tally {
    let mut rng = rng(seed.wrapping_add(2));
    let mut t = Tally::default();
    for _ in 0..200 {
        let (f, m) = random_ring(&mut rng);
        let a = FieldElement::from_index(&f, rng.gen_range(0..f.q()));
        let b = FieldElement::from_index(&f, rng.gen_range(0..f.q()));
        let ctx = || format!("GR({}^{m}, {}) at {a:?}, {b:?}", f.p(), f.d());
        let (Some(ta), Some(tb), Some(tab)) = (
            t.record("teichmuller", GaloisRingElement::teichmuller(&a, m)),
            t.record("teichmuller", GaloisRingElement::teichmuller(&b, m)),
            t.record("teichmuller", GaloisRingElement::teichmuller(&(&a * &b), m)),
        ) else {
            continue;
        };
        t.check(ta.residue() == a, || format!("residue in {}", ctx()));
        t.check(ta.pow(f.q()) == ta, || format!("not fixed by x -> x^q in {}", ctx()));
        t.check(&ta * &tb == tab, || format!("multiplicativity in {}", ctx()));
        t.check(ta.frobenius() == ta.pow(f.p()), || format!("Frobenius is p-th power in {}", ctx()));
    }
    t
}

fn example_family() -> Tally {
    let caps = Caps::default();
    let mut t = Tally::default();
    let nu1 = Polygon::from_integer_slopes(PolygonKind::Newton, &[1, 1]).expect("valid slopes");
    let nu2 = Polygon::from_integer_slopes(PolygonKind::Newton, &[0, 2]).expect("valid slopes");
    for p in [2u64, 3, 5] {
        let Some(fam) = t.record("example family", FamilyCrystal::example_family(p, 5)) else { continue };
        let Some(report) = t.record("scan", scan(&fam, 3, &caps)) else { continue };
        let keys: BTreeSet<&Polygon> = report.newton_strata.keys().collect();
        t.check(keys == BTreeSet::from([&nu1, &nu2]), || format!("p = {p}: strata {keys:?}"));
        t.check(report.errors().count() == 0, || format!("p = {p}: per-point errors"));
        for (i, rec) in report.records.iter().enumerate() {
            let at_zero = rec.point.degree == 1 && rec.point.indices() == [0];
            let expected = if at_zero { &nu1 } else { &nu2 };
            t.check(report.newton_at(i) == Some(expected), || format!("p = {p}: wrong polygon at {}", rec.point));
            let bp = report.newton_at(i).is_some_and(|np| has_break_point(np, q(1, 1), q(0, 1)));
            t.check(bp != at_zero, || format!("p = {p}: break point (1,0) at {}", rec.point));
            let pr = rec.outcome.as_ref().map(|d| d.p_rank).ok();
            t.check(pr == Some(if at_zero { 0 } else { 1 }), || format!("p = {p}: p-rank at {}", rec.point));
        }
    }
    t
}

fn e_lambda() -> Tally {
    let mut t = Tally::default();
    for d in [1usize, 2] {
        let f = FieldParams::get(2, d).expect("small field");
        for b in 1..=4u64 {
            for a in 0..=6u64 {
                if num_integer::gcd(a, b) != 1 {
                    continue;
                }
                let m = (a * b + 2) as u32;
                let Some(e) = t.record("standard_e", standard_e(a, b, 1, &f, m)) else { continue };
                let expected =
                    Polygon::from_segments(PolygonKind::Newton, vec![(q(a as i64, b as i64), b)]).expect("valid");
                let got = newton_polygon(&e);
                t.check(got.as_ref() == Ok(&expected), || format!("E({a}/{b}) over F_{}: {got:?}", f.q()));
            }
        }
    }
    t
}

/// Recipes behind the Mazur suite, in draw order.
pub fn mazur_recipes(seed: u64) -> Vec<HodgeRecipe> {
    let mut rng = rng(seed.wrapping_add(3));
    (0..200)
        .map(|_| {
            let p = [2u64, 3, 5][rng.gen_range(0..3)];
            let d = rng.gen_range(1..=2);
            let rank = rng.gen_range(1..=4);
            HodgeRecipe::draw(&mut rng, p, d, rank, 11 / d as u32)
        })
        .collect()
}

pub fn oracle_recipes(seed: u64) -> Vec<OracleRecipe> {
    let mut rng = rng(seed.wrapping_add(4));
    (0..100)
        .map(|_| {
            let p = [2u64, 3][rng.gen_range(0..2)];
            let d = rng.gen_range(1..=2);
            OracleRecipe::draw(&mut rng, p, d, 4)
        })
        .collect()
}

/// Oracle recipes over fields small enough that the third iterate and the
/// second exterior power still fit in a word.
pub fn iterate_recipes(seed: u64) -> Vec<OracleRecipe> {
    let mut rng = rng(seed.wrapping_add(5));
    (0..100)
        .map(|_| {
            let (p, d) = [(2u64, 1usize), (2, 2), (3, 1)][rng.gen_range(0..3)];
            OracleRecipe::draw(&mut rng, p, d, 4)
        })
        .collect()
}

fn mazur_crystals(seed: u64) -> Vec<Result<FCrystal>> {
    mazur_recipes(seed).par_iter().map(|r| r.build(r.min_precision().max(2))).collect()
}

fn oracle_crystals(seed: u64) -> Vec<Result<FCrystal>> {
    oracle_recipes(seed).par_iter().map(|r| r.build(r.min_precision().max(2))).collect()
}

fn mazur(seed: u64) -> Tally {
    let results: Vec<Tally> = mazur_crystals(seed)
        .into_par_iter()
        .enumerate()
        .map(|(i, c)| {
            let mut t = Tally::default();
            let Some(c) = t.record(&format!("crystal {i}"), c) else { return t };
            let (Some(np), Some(hp)) = (
                t.record(&format!("crystal {i} newton"), newton_polygon(&c)),
                t.record(&format!("crystal {i} hodge"), hodge_polygon(&c)),
            ) else {
                return t;
            };
            t.check(lies_above(&np, &hp) == Ok(true), || format!("crystal {i}: {np} below {hp}"));
            let v = Rational::from_integer(c.det_valuation() as i64);
            t.check(np.total() == hp.total() && hp.total() == v, || format!("crystal {i}: totals {np} / {hp} / {v}"));
            t
        })
        .collect();
    fold(results)
}

fn oracle(seed: u64) -> Tally {
    let recipes = oracle_recipes(seed);
    let results: Vec<Tally> = recipes
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut t = Tally::default();
            let Some(c) = t.record(&format!("crystal {i}"), r.build(r.min_precision().max(2))) else { return t };
            let Some(np) = t.record(&format!("crystal {i} newton"), newton_polygon(&c)) else { return t };
            t.check(np.slopes() == r.slopes(), || format!("crystal {i}: {np} vs parts {:?}", r.parts));
            t
        })
        .collect();
    fold(results)
}

fn iterate_exterior(seed: u64) -> Tally {
    let recipes = iterate_recipes(seed);
    let results: Vec<Tally> = recipes
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut t = Tally::default();
            let total: u32 = r.parts.iter().map(|&(a, _)| a as u32).sum();
            let rank = r.rank() as u32;
            let m = r.d as u32 * total * 3.max(rank.saturating_sub(1)) + 1;
            let Some(c) = t.record(&format!("crystal {i}"), r.build(m.max(2))) else { return t };
            let Some(np) = t.record(&format!("crystal {i} newton"), newton_polygon(&c)) else { return t };
            for s in 1..=3usize {
                let got = c.iterate(s).and_then(|it| newton_polygon(&it));
                let want = np.scaled(Rational::from_integer(s as i64));
                t.check(got.as_ref() == Ok(&want), || format!("crystal {i}: iterate {s} gives {got:?}, want {want}"));
            }
            if rank >= 2 {
                let slopes = np.slopes();
                let mut sums = Vec::new();
                for a in 0..slopes.len() {
                    for b in a + 1..slopes.len() {
                        sums.push(slopes[a] + slopes[b]);
                    }
                }
                sums.sort();
                let got = c.exterior_power(2).and_then(|w| newton_polygon(&w)).map(|p| p.slopes());
                t.check(got.as_ref() == Ok(&sums), || format!("crystal {i}: second exterior power {got:?}"));
            }
            t
        })
        .collect();
    fold(results)
}

fn break_integrality(seed: u64) -> Tally {
    let mut t = Tally::default();
    let mut polygons = Vec::new();
    for c in mazur_crystals(seed).into_iter().chain(oracle_crystals(seed)) {
        if let Some(np) = c.and_then(|c| newton_polygon(&c)).ok() {
            polygons.push(np);
        }
    }
    for r in iterate_recipes(seed) {
        if let Ok(np) = r.build(r.min_precision().max(2)).and_then(|c| newton_polygon(&c)) {
            polygons.push(np);
        }
    }
    let f = FieldParams::get(2, 1).expect("small field");
    for b in 1..=4u64 {
        for a in 0..=6u64 {
            if num_integer::gcd(a, b) == 1 {
                if let Ok(np) = standard_e(a, b, 1, &f, (a * b + 2) as u32).and_then(|c| newton_polygon(&c)) {
                    polygons.push(np);
                }
            }
        }
    }
    for p in [2u64, 3, 5] {
        if let Ok(report) = FamilyCrystal::example_family(p, 5).and_then(|fam| scan(&fam, 2, &Caps::default())) {
            polygons.extend(report.newton_strata.into_keys());
        }
    }
    for np in &polygons {
        for bp in break_points(np) {
            t.check(bp.is_integral(), || format!("{np} has break point {bp}"));
        }
    }
    t
}

/// A break point to test a family against: an interior break point of some
/// fiber when there is one, else an endpoint.
fn pick_break_point(fam: &FamilyCrystal, rng: &mut ChaCha8Rng) -> Result<(Rational, Rational)> {
    let report = scan(fam, 1, &Caps::default())?;
    let mut interior = BTreeSet::new();
    let mut all = BTreeSet::new();
    for np in report.newton_strata.keys() {
        for bp in break_points(np) {
            if bp.x > 0 && bp.x < np.rank() {
                interior.insert((bp.x, bp.y));
            }
            all.insert((bp.x, bp.y));
        }
    }
    let pool: Vec<_> = if interior.is_empty() { all.into_iter().collect() } else { interior.into_iter().collect() };
    if pool.is_empty() {
        return Err(Error::InvalidInput("no fiber is a crystal".into()));
    }
    let (x, y) = pool[rng.gen_range(0..pool.len())];
    Ok((Rational::from_integer(x as i64), y))
}

pub fn reduction_families(seed: u64) -> Vec<IntegralFamilyRecipe> {
    let mut rng = rng(seed.wrapping_add(6));
    (0..25)
        .map(|i| {
            let p = [2u64, 3][rng.gen_range(0..2)];
            IntegralFamilyRecipe::draw(&mut rng, p, 2 + i % 2)
        })
        .collect()
}

fn break_point_reduction(seed: u64) -> Tally {
    let caps = Caps::default();
    let mut t = Tally::default();
    for p in [2u64, 3, 5] {
        let Some(fam) = t.record("example family", FamilyCrystal::example_family(p, 6)) else { continue };
        let Some(r) = t.record("example family", verify_step1_identities(&fam, (q(1, 1), q(0, 1)), 2, &caps)) else {
            continue;
        };
        t.check(r.passed, || format!("example family, p = {p}: {:?}", r.failures));
        t.check(r.stratum.len() + 1 == r.checked, || format!("example family, p = {p}: stratum {:?}", r.stratum));
    }
    let mut rng = rng(seed.wrapping_add(7));
    for (i, recipe) in reduction_families(seed).iter().enumerate() {
        let Some(fam) = t.record(&format!("family {i}"), recipe.build(30, &caps)) else { continue };
        let Some(p0) = t.record(&format!("family {i}"), pick_break_point(&fam, &mut rng)) else { continue };
        let Some(r) = t.record(&format!("family {i}"), verify_step1_identities(&fam, p0, 2, &caps)) else { continue };
        t.check(r.passed && r.checked > 0, || format!("family {i} at ({}, {}): {:?}", p0.0, p0.1, r.failures));
    }
    t
}

fn artin_schreier(seed: u64) -> Tally {
    let caps = Caps::default();
    let mut rng = rng(seed.wrapping_add(8));
    let instances: Vec<_> = (0..100)
        .map(|_| {
            let (p, d) = [(2u64, 1usize), (2, 2), (3, 1)][rng.gen_range(0..3)];
            let n = rng.gen_range(1..=3);
            random_as_instance(&mut rng, p, d, n)
        })
        .collect();
    let results: Vec<Tally> = instances
        .into_par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let mut t = Tally::default();
            let Some(inst) = t.record(&format!("instance {i}"), inst) else { return t };
            let dim = as_dimension(&inst);
            let pr = corollary3_p_rank(&inst);
            t.check(pr == Ok(dim as u64), || format!("instance {i}: dimension {dim}, p-rank {pr:?}"));
            if inst.size() <= 2 {
                let bf = brute_force_as_dimension(&inst, 12, &caps);
                t.check(bf == Ok(dim), || format!("instance {i}: dimension {dim}, brute force {bf:?}"));
            }
            t
        })
        .collect();
    fold(results)
}

fn p_rank_suite(seed: u64) -> Tally {
    let results: Vec<Tally> = mazur_crystals(seed)
        .into_par_iter()
        .chain(oracle_crystals(seed))
        .enumerate()
        .map(|(i, c)| {
            let mut t = Tally::default();
            let Some(c) = t.record(&format!("crystal {i}"), c) else { return t };
            let Some(np) = t.record(&format!("crystal {i} newton"), newton_polygon(&c)) else { return t };
            let pr = p_rank(&c);
            let fixed = fixed_point_dimension(&c) as u64;
            let from_bp = p_rank_from_break_points(&np);
            t.check(pr == Ok(fixed) && fixed == from_bp, || {
                format!("crystal {i}: p-rank {pr:?}, fixed points {fixed}, break points {from_bp}")
            });
            t
        })
        .collect();
    fold(results)
}

fn precision(seed: u64) -> Tally {
    let mut t = Tally::default();
    let doubled = |c: &FCrystal, build: &dyn Fn(u32) -> Result<FCrystal>| -> Result<bool> {
        let big = build(2 * c.precision())?;
        Ok(newton_polygon(c)? == newton_polygon(&big)? && hodge_polygon(c)? == hodge_polygon(&big)?)
    };
    for (i, r) in mazur_recipes(seed).iter().enumerate() {
        let m = r.min_precision().max(2);
        if let Some(c) = t.record(&format!("mazur crystal {i}"), r.build(m)) {
            let ok = doubled(&c, &|m| r.build(m));
            t.check(ok == Ok(true), || format!("mazur crystal {i}: {ok:?}"));
        }
    }
    for (i, r) in oracle_recipes(seed).iter().enumerate() {
        let m = r.min_precision().max(2);
        if let Some(c) = t.record(&format!("oracle crystal {i}"), r.build(m)) {
            let ok = doubled(&c, &|m| r.build(m));
            t.check(ok == Ok(true), || format!("oracle crystal {i}: {ok:?}"));
        }
    }
    let f2 = FieldParams::get(2, 1).expect("small field");
    for b in 1..=4u64 {
        for a in 0..=6u64 {
            if num_integer::gcd(a, b) != 1 {
                continue;
            }
            let build = |m: u32| standard_e(a, b, 1, &f2, m);
            if let Some(c) = t.record(&format!("E({a}/{b})"), build((a * b + 2) as u32)) {
                let ok = doubled(&c, &build);
                t.check(ok == Ok(true), || format!("E({a}/{b}): {ok:?}"));
            }
        }
    }
    let undersized = standard_e(1, 2, 1, &f2, 1).and_then(|e| e.iterate(2)).and_then(|c| newton_polygon(&c));
    t.check(matches!(undersized, Err(Error::InsufficientPrecision(_))), || {
        format!("E(1/2) squared at m = 1: {undersized:?}")
    });
    t
}

fn fold(parts: Vec<Tally>) -> Tally {
    let mut t = Tally::default();
    for p in parts {
        t.merge(p);
    }
    t
}
