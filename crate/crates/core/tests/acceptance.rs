//! Acceptance criteria, one PASS/FAIL line each.
//!
//! All comparisons are exact; the only tolerances are the runtime bounds below.

use std::time::{Duration, Instant};

use crystalline::random::DEFAULT_SEED;
use crystalline::suites::run_suite;

const EXAMPLE_FAMILY_BUDGET: Duration = Duration::from_secs(10);
const AS_BUDGET: Duration = Duration::from_secs(60);

struct Criterion {
    id: u32,
    title: &'static str,
    suite: &'static str,
    budget: Option<Duration>,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "example family strata, p in {2,3,5}, D = 3, m = 5",
        suite: "example-family",
        budget: Some(EXAMPLE_FAMILY_BUDGET),
    },
    Criterion { id: 2, title: "E(a/b) Newton polygons over F_2 and F_4", suite: "e-lambda", budget: None },
    Criterion { id: 3, title: "Newton above Hodge on 200 random crystals", suite: "mazur", budget: None },
    Criterion { id: 4, title: "Newton slopes of 100 disguised sums of E(a/b)", suite: "oracle", budget: None },
    Criterion { id: 5, title: "iterates (s <= 3) and second exterior powers", suite: "iterate-exterior", budget: None },
    Criterion { id: 6, title: "integral Newton break points", suite: "break-integrality", budget: None },
    Criterion {
        id: 7,
        title: "break-point reduction identities on 28 families",
        suite: "break-point-reduction",
        budget: None,
    },
    Criterion {
        id: 8,
        title: "p-rank of the associated crystal = Artin-Schreier dimension",
        suite: "artin-schreier",
        budget: Some(AS_BUDGET),
    },
    Criterion { id: 9, title: "three descriptions of the p-rank agree", suite: "p-rank", budget: None },
    Criterion { id: 10, title: "doubled precision and undersized precision", suite: "precision", budget: None },
];

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for c in CRITERIA {
        let start = Instant::now();
        let outcome = run_suite(c.suite, DEFAULT_SEED).expect("known suite");
        let elapsed = start.elapsed();
        let in_time = c.budget.is_none_or(|b| elapsed < b);
        let pass = outcome.passed && in_time;
        let timing = match c.budget {
            Some(b) => format!(", {:.2}s of {}s", elapsed.as_secs_f64(), b.as_secs()),
            None => format!(", {:.2}s", elapsed.as_secs_f64()),
        };
        println!(
            "criterion {:>2} {}: {} ({} checks, {} failed{timing})",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.title,
            outcome.checked,
            outcome.failed,
        );
        for d in &outcome.details {
            println!("    {d}");
        }
        if !pass {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
