//! The acceptance suite: fixed experiments grouped into numbered criteria.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DVector;
use presym_core::presym::{coisotropic_extend, DEFAULT_TOL};
use serde_json::{json, Value};

use crate::config::parse_config;
use crate::error::HarnessError;
use crate::report::{ChargeRow, Check, CriterionSummary, Report, Results};
use crate::run::{pca_check, run_experiment};
use crate::systems::{dim3_example, dim4_example, random_degenerate_form, random_system};

pub const KG_CONFIG: &str = "\
kind = kg
grid.n = 32
grid.length = 16
mass = 1
dt = 0.05
steps = 100
seed = 7
";

pub const ALGEBRA_CONFIG: &str = "\
kind = algebra
grid.n = 32
grid.length = 16
mass = 1
seed = 7
checks.seeds = 3
checks.directions = 10
";

pub const EM_CONFIG: &str = "\
kind = em
grid.n = 64
grid.length = 32
dt = 0.05
steps = 100
seed = 7
envelope.width = 0.2
checks.directions = 3
checks.battery = 32
";

pub const KG_RUNTIME_LIMIT_S: f64 = 60.0;
const RANDOM_SYSTEMS: u64 = 20;
const RANDOM_FORMS: u64 = 20;
const SYSTEM_SEED: u64 = 1000;
const FORM_SEED: u64 = 2000;

const TITLES: [&str; 8] = [
    "KG Noether suite",
    "KG current-algebra closure",
    "KG defining relation",
    "PCA oracle equivalence",
    "Coisotropic extension",
    "EM structure suite",
    "EM extended rotation charges",
    "Equations-of-motion residuals",
];

/// Which prefixed checks make up each criterion, in order.
const MEMBERS: [&[&str]; 8] = [
    &["kg.noether_translation", "kg.noether_rotation", "kg.noether_boost"],
    &["algebra.closure"],
    &["algebra.defining_relation"],
    &["pca.chain_mismatches", "pca.oracle_distance", "pca.orthonormality", "pca.steps_over_bound", "pca.hand_examples"],
    &["coisotropic.kernel_mismatches", "coisotropic.nondegeneracy", "coisotropic.restriction"],
    &["em.helmholtz", "em.constraint", "em.kernel", "em.kernel_detection"],
    &["em.defining_relation", "em.pullback", "em.closure", "em.gauge_invariance", "em.noether"],
    &["kg.eom", "em.eom"],
];

fn merge(into: &mut Results, prefix: &str, from: Results) {
    into.charges.extend(from.charges.into_iter().map(|c| ChargeRow { gen: format!("{prefix}:{}", c.gen), ..c }));
    into.residuals.extend(from.residuals.into_iter().map(|(k, v)| (format!("{prefix}.{k}"), v)));
    into.checks.extend(from.checks.into_iter().map(|c| Check { name: format!("{prefix}.{}", c.name), ..c }));
}

/// Random systems and the two hand examples against the elimination oracle.
fn pca_battery() -> Result<(Results, Value), HarnessError> {
    let mut systems: Vec<(String, _, Option<Vec<usize>>)> = (0..RANDOM_SYSTEMS)
        .map(|i| (format!("random-{}", SYSTEM_SEED + i), random_system(SYSTEM_SEED + i), None))
        .collect();
    systems.push(("dim3".into(), dim3_example(), Some(vec![3, 2])));
    systems.push(("dim4".into(), dim4_example(), Some(vec![4, 2])));

    let (mut mismatches, mut hand, mut over) = (0usize, 0usize, 0i64);
    let (mut distance, mut ortho) = (0.0f64, 0.0f64);
    let mut rows = Vec::new();
    for (name, sys, expect) in &systems {
        let c = pca_check(sys)?;
        mismatches += usize::from(!c.chain_match);
        if let Some(e) = expect {
            hand += usize::from(&c.dims != e || !c.consistent);
        }
        distance = if distance.is_nan() || c.distance.is_nan() { f64::NAN } else { distance.max(c.distance) };
        ortho = ortho.max(c.orthonormality);
        over = over.max(c.steps as i64 - c.step_bound as i64);
        rows.push(json!({
            "system": name,
            "dim": sys.dim(),
            "dims": c.dims,
            "oracle_dims": c.oracle_dims,
            "consistent": c.consistent,
            "steps": c.steps,
            "distance": c.distance,
        }));
    }
    let mut r = Results::default();
    r.check(Check::at_most("chain_mismatches", mismatches as f64, 0.0));
    r.check(Check::at_most("oracle_distance", distance, 1e-10));
    r.check(Check::at_most("orthonormality", ortho, 1e-12));
    r.check(Check::at_most("steps_over_bound", over as f64, 0.0));
    r.check(Check::at_most("hand_examples", hand as f64, 0.0));
    Ok((r, Value::Array(rows)))
}

/// Random degenerate forms with kernel dimension 1 to 4.
fn coisotropic_battery() -> Results {
    let (mut mismatches, mut ratio, mut restriction) = (0usize, f64::INFINITY, 0.0f64);
    for i in 0..RANDOM_FORMS {
        let k = 1 + (i % 4) as usize;
        let omega = random_degenerate_form(FORM_SEED + i, k);
        let ext = coisotropic_extend(&omega, DEFAULT_TOL);
        mismatches += usize::from(ext.kernel_dim() != k);
        let sv = ext.extended_form.singular_values();
        ratio = ratio.min(sv.min() / sv.max());
        let n = omega.dim();
        let zero = DVector::zeros(ext.kernel_dim());
        let scale = omega.matrix().amax();
        for a in 0..n {
            for b in 0..n {
                let (ea, eb) = (unit(n, a), unit(n, b));
                let lhs = ext.extended_form.eval(&ext.lift(&ea, &zero), &ext.lift(&eb, &zero));
                let d = (lhs - omega.eval(&ea, &eb)).abs();
                restriction = restriction.max(if scale == 0.0 { d } else { d / scale });
            }
        }
    }
    let mut r = Results::default();
    r.check(Check::at_most("kernel_mismatches", mismatches as f64, 0.0));
    r.check(Check::at_least("nondegeneracy", ratio, 1e-10));
    r.check(Check::at_most("restriction", restriction, 1e-12));
    r
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })
}

/// Runs every criterion; the report passes iff all of them do.
///
/// Criterion 1 also carries a wall-clock limit on the KG experiment; the
/// measured time is reported under `timing`.
pub fn selftest() -> Result<Report, HarnessError> {
    let start = Instant::now();
    let kg_cfg = parse_config(KG_CONFIG)?;
    let algebra_cfg = parse_config(ALGEBRA_CONFIG)?;
    let em_cfg = parse_config(EM_CONFIG)?;

    let mut timing = BTreeMap::new();
    let mut results = Results::default();

    let kg = run_experiment(&kg_cfg)?;
    timing.insert("kg_s".to_string(), kg.runtime_s);
    let kg_fast = kg.runtime_s <= KG_RUNTIME_LIMIT_S;
    merge(&mut results, "kg", kg.results);

    let algebra = run_experiment(&algebra_cfg)?;
    timing.insert("algebra_s".to_string(), algebra.runtime_s);
    merge(&mut results, "algebra", algebra.results);

    let t = Instant::now();
    let (pca, pca_rows) = pca_battery()?;
    merge(&mut results, "pca", pca);
    merge(&mut results, "coisotropic", coisotropic_battery());
    timing.insert("linear_s".to_string(), t.elapsed().as_secs_f64());

    let em = run_experiment(&em_cfg)?;
    timing.insert("em_s".to_string(), em.runtime_s);
    merge(&mut results, "em", em.results);

    results.pca = Some(pca_rows);
    results.criteria = TITLES
        .iter()
        .zip(MEMBERS)
        .enumerate()
        .map(|(i, (title, members))| {
            let checks_pass = members.iter().all(|m| {
                results.checks.iter().find(|c| c.name == *m).map(|c| c.pass).expect("criterion member exists")
            });
            CriterionSummary {
                id: i + 1,
                title: title.to_string(),
                checks: members.iter().map(|m| m.to_string()).collect(),
                pass: checks_pass && (i != 0 || kg_fast),
            }
        })
        .collect();
    results.finalize();

    let config = json!({
        "kind": "selftest",
        "kg": kg.config,
        "algebra": algebra.config,
        "em": em.config,
        "pca": {"random_systems": RANDOM_SYSTEMS, "first_seed": SYSTEM_SEED, "hand_examples": ["dim3", "dim4"]},
        "coisotropic": {"random_forms": RANDOM_FORMS, "first_seed": FORM_SEED, "kernel_dims": [1, 2, 3, 4]},
        "kg_runtime_limit_s": KG_RUNTIME_LIMIT_S,
    });
    Ok(Report { config, results, runtime_s: start.elapsed().as_secs_f64(), timing })
}
