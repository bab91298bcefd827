//! Experiment execution for each configuration kind.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use presym_core::em::{
    constraint_residual, em_angular_momentum_scale, em_base_angular_momentum, em_charge_scale,
    em_charge_trajectory_with, em_defining_relation, em_eom_residual, em_extend, em_gauge_transform,
    em_localized_state, em_localized_tangent, em_rotation_charge, em_so3_closure_residual,
    em_split_gauge, EmTangent, KernelBattery, Localization,
};
use presym_core::field::random::{localized, periodic, rng_from_seed, LocalizedSpec};
use presym_core::field::spectral::divergence;
use presym_core::field::{helmholtz_decompose, transverse_part};
use presym_core::kg::{
    charge_scale, kg_charge, kg_charge_trajectory, kg_eom_residual, kg_hamiltonian_vf_of_charge, kg_localized_state,
    kg_symplectic_form, momentum_matrix, relative_drift, trace_pairing, Basis, KgState, PoincareGenerator,
    TangentPair,
};
use presym_core::presym::{pca_run, DEFAULT_TOL};
use presym_core::{DiscreteFunctional, Grid3, KgParams, ScalarField, VectorField3};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{AlgebraConfig, EmConfig, Experiment, ExperimentConfig, GridConfig, KgConfig, PcaConfig};
use crate::error::{Context, HarnessError};
use crate::oracle::oracle_chain;
use crate::report::{ChargeRow, Check, Report, Results};
use crate::systems::{system_for, LinearSystem};

/// Central-difference step for `dJ(Y)`.
pub const DEFINING_RELATION_EPS: f64 = 1e-5;

/// Salts separating the random streams of one experiment.
const DIRECTION_SALT: u64 = 0x6469_7265_6374;
const BATTERY_SALT: u64 = 0x6261_7474_6572;

const AXES: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
const AXIS_LABELS: [&str; 3] = ["R1", "R2", "R3"];

type Tolerances = BTreeMap<String, f64>;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let tol = &cfg.tolerances;
    let mut results = match &cfg.experiment {
        Experiment::Kg(c) => run_kg(c, cfg.seed, tol)?,
        Experiment::Algebra(c) => run_algebra(c, cfg.seed, tol)?,
        Experiment::Em(c) => run_em(c, cfg.seed, tol)?,
        Experiment::Pca(c) => run_pca(c, cfg.seed, tol)?,
    };
    results.finalize();
    Ok(Report {
        config: serde_json::to_value(cfg).expect("config serializes"),
        results,
        runtime_s: start.elapsed().as_secs_f64(),
        timing: BTreeMap::new(),
    })
}

/// Larger of two values, NaN if either is.
fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Smaller of two values, NaN if either is.
fn least(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

/// `|a − b| / max(|a|, |b|)`, 0 when equal.
fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

fn scaled(value: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        value
    } else {
        value / scale
    }
}

fn grid(g: &GridConfig, experiment: &'static str) -> Result<Grid3, HarnessError> {
    Grid3::new(g.n, g.length).at(experiment, "grid")
}

fn zero_mean(f: ScalarField) -> ScalarField {
    let m = f.mean();
    f.map(|v| v - m)
}

fn basis_generators() -> Vec<PoincareGenerator> {
    Basis::ALL.iter().map(|b| PoincareGenerator::basis(*b)).collect()
}

/// Ten charge trajectories, their Noether drifts and the EOM residual.
fn run_kg(c: &KgConfig, seed: u64, tol: &Tolerances) -> Result<Results, HarnessError> {
    const X: &str = "kg";
    let g = grid(&c.grid, X)?;
    let params = KgParams::new(c.mass, g).at(X, "parameters")?;
    let spec = LocalizedSpec::from_width(&g, c.envelope.width, c.envelope.amplitude);
    let state = kg_localized_state(g, &spec, &mut rng_from_seed(seed)).at(X, "state generation")?;
    let traj = kg_charge_trajectory(&basis_generators(), &state, c.dt, c.steps, &params).at(X, "charge trajectory")?;
    let floor = 1e-12 * charge_scale(&state, &params).at(X, "charge scale")?;

    let mut r = Results::default();
    let mut by_class = [0.0f64; 3];
    for b in Basis::ALL {
        let series: Vec<f64> = traj.iter().map(|(_, v)| v[b.index()]).collect();
        for ((t, _), v) in traj.iter().zip(&series) {
            r.charges.push(ChargeRow { gen: b.label().to_string(), t: *t, value: *v });
        }
        let d = relative_drift(series.iter().copied(), floor);
        r.residual(format!("noether_{}", b.label()), d);
        let class = if b.is_translation() {
            0
        } else if b.is_rotation() {
            1
        } else {
            2
        };
        by_class[class] = worst(by_class[class], d);
    }
    let eom = kg_eom_residual(&state, c.eom_dt, &params).at(X, "equations of motion")?;
    r.residual("eom", eom);
    for (name, v) in ["noether_translation", "noether_rotation", "noether_boost"].iter().zip(by_class) {
        r.check(Check::at_most(*name, v, tol[*name]));
    }
    r.check(Check::at_most("eom", eom, tol["eom"]));
    Ok(r)
}

/// Charge-algebra closure on several states, the defining relation on the
/// first one, and the trace pairing of the momentum matrix.
fn run_algebra(c: &AlgebraConfig, seed: u64, tol: &Tolerances) -> Result<Results, HarnessError> {
    const X: &str = "algebra";
    let g = grid(&c.grid, X)?;
    let params = KgParams::new(c.mass, g).at(X, "parameters")?;
    let spec = LocalizedSpec::from_width(&g, c.envelope.width, c.envelope.amplitude);
    let gens = basis_generators();
    let js: Vec<DiscreteFunctional> = gens.iter().map(|x| kg_charge(x, &params)).collect::<presym_core::Result<_>>().at(X, "charges")?;
    let refs: Vec<&DiscreteFunctional> = js.iter().collect();

    let mut r = Results::default();
    let mut closure = 0.0f64;
    let mut first: Option<(KgState, Vec<TangentPair>, Vec<f64>)> = None;
    for i in 0..c.seeds {
        let stage = format!("closure, state {i}");
        let state = kg_localized_state(g, &spec, &mut rng_from_seed(seed.wrapping_add(i as u64))).at(X, &stage)?;
        let scale = charge_scale(&state, &params).at(X, &stage)?;
        let charges = DiscreteFunctional::eval_many(&refs, &state.phi, &state.p0, state.x0).at(X, &stage)?;
        let xs: Vec<TangentPair> =
            gens.iter().map(|x| kg_hamiltonian_vf_of_charge(x, &state, &params)).collect::<presym_core::Result<_>>().at(X, &stage)?;
        let mut res = 0.0f64;
        for a in 0..gens.len() {
            for b in (a + 1)..gens.len() {
                let lhs = kg_symplectic_form(&xs[a], &xs[b]).at(X, &stage)?;
                // J is linear in the generator.
                let rhs: f64 = gens[a].bracket(&gens[b]).coefficients().iter().zip(&charges).map(|(k, j)| k * j).sum();
                res = worst(res, scaled((lhs - rhs).abs(), scale));
            }
        }
        r.residual(format!("closure_state{i}"), res);
        closure = worst(closure, res);
        if i == 0 {
            for (b, v) in Basis::ALL.iter().zip(&charges) {
                r.charges.push(ChargeRow { gen: b.label().to_string(), t: state.x0, value: *v });
            }
            first = Some((state, xs, charges));
        }
    }
    let (state, xs, charges) = first.expect("at least one state");

    let mut rng = rng_from_seed(seed ^ DIRECTION_SALT);
    let mut defrel = 0.0f64;
    for d in 0..c.directions {
        let stage = format!("defining relation, direction {d}");
        let y = TangentPair::new(localized(g, &spec, &mut rng).at(X, &stage)?, localized(g, &spec, &mut rng).at(X, &stage)?)
            .at(X, &stage)?;
        let eps = DEFINING_RELATION_EPS;
        let (plus, minus) = (state.displaced(eps, &y), state.displaced(-eps, &y));
        let jp = DiscreteFunctional::eval_many(&refs, &plus.phi, &plus.p0, state.x0).at(X, &stage)?;
        let jm = DiscreteFunctional::eval_many(&refs, &minus.phi, &minus.p0, state.x0).at(X, &stage)?;
        for (k, b) in Basis::ALL.iter().enumerate() {
            let omega = kg_symplectic_form(&xs[k], &y).at(X, &stage)?;
            let dj = (jp[k] - jm[k]) / (2.0 * eps);
            let e = rel(omega, dj);
            defrel = worst(defrel, e);
            let key = format!("defining_relation_{}", b.label());
            let prev = r.residuals.get(&key).copied().unwrap_or(0.0);
            r.residual(key, worst(prev, e));
        }
    }

    let arr: [f64; 10] = charges.clone().try_into().expect("ten charges");
    let phi_j = momentum_matrix(&arr);
    let jmax = charges.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pairing = gens
        .iter()
        .zip(&charges)
        .map(|(x, j)| (trace_pairing(&phi_j, x) - j).abs())
        .fold(0.0, worst);
    let pairing = scaled(pairing, jmax);

    r.residual("closure", closure);
    r.residual("defining_relation", defrel);
    r.residual("trace_pairing", pairing);
    r.check(Check::at_most("closure", closure, tol["closure"]));
    r.check(Check::at_most("defining_relation", defrel, tol["defining_relation"]));
    r.check(Check::at_most("trace_pairing", pairing, tol["trace_pairing"]));
    Ok(r)
}

fn periodic_vector(g: Grid3, k: f64, rng: &mut ChaCha8Rng) -> presym_core::Result<VectorField3> {
    VectorField3::new(periodic(g, k, rng)?, periodic(g, k, rng)?, periodic(g, k, rng)?)
}

/// Tangent from band-limited periodic fields, no envelope.
fn periodic_tangent(g: Grid3, rng: &mut ChaCha8Rng) -> presym_core::Result<EmTangent> {
    let k = 0.3 * PI / g.spacing();
    Ok(EmTangent {
        xa_t: transverse_part(&periodic_vector(g, k, rng)?)?,
        xchi: zero_mean(periodic(g, k, rng)?),
        xp: transverse_part(&periodic_vector(g, k, rng)?)?,
        xnu: zero_mean(periodic(g, k, rng)?),
    })
}

/// Probe tangents built from random periodic data.
const KERNEL_PROBES: usize = 4;

/// Structure checks, rotation-charge trajectory, and the extended
/// rotation charges at `μ = 0` and at a random fibre point.
fn run_em(c: &EmConfig, seed: u64, tol: &Tolerances) -> Result<Results, HarnessError> {
    const X: &str = "em";
    let g = grid(&c.grid, X)?;
    let spec = LocalizedSpec::from_width(&g, c.envelope.width, c.envelope.amplitude);
    let mut rng = rng_from_seed(seed);
    let s = em_localized_state(g, &spec, &mut rng).at(X, "state generation")?;
    let loc = Localization::default();
    let mut r = Results::default();

    // Helmholtz projectors are idempotent.
    let a = &s.state().a;
    let (t, l) = helmholtz_decompose(a).at(X, "helmholtz")?;
    let (tt, _) = helmholtz_decompose(&t).at(X, "helmholtz")?;
    let (_, ll) = helmholtz_decompose(&l).at(X, "helmholtz")?;
    let helmholtz = scaled((&tt - &t).max_abs().max((&ll - &l).max_abs()), a.max_abs());

    // Kernel of the presymplectic form against a battery of directions:
    // the gauge block is annihilated, any transverse content is detected.
    let mut brng = rng_from_seed(seed ^ BATTERY_SALT);
    let battery: Vec<EmTangent> =
        (0..c.battery).map(|_| periodic_tangent(g, &mut brng)).collect::<presym_core::Result<_>>().at(X, "kernel battery")?;
    let bscale = battery.iter().map(|y| y.norm()).fold(0.0, f64::max);
    let battery = KernelBattery::new(&battery).at(X, "kernel battery")?;
    let (mut kernel, mut detection) = (0.0f64, f64::INFINITY);
    for _ in 0..KERNEL_PROBES {
        let t = periodic_tangent(g, &mut brng).at(X, "kernel probes")?;
        let zero = VectorField3::zeros(g);
        let gauge = EmTangent { xa_t: zero.clone(), xp: zero.clone(), ..t.clone() };
        let only_a = EmTangent { xp: zero.clone(), ..t.clone() };
        let only_p = EmTangent { xa_t: zero, ..t.clone() };
        let ratio = |x: &EmTangent| -> Result<f64, HarnessError> {
            Ok(scaled(battery.probe(x).at(X, "kernel probes")?, bscale * x.norm()))
        };
        kernel = worst(kernel, ratio(&gauge)?);
        for x in [&t, &only_a, &only_p] {
            detection = least(detection, ratio(x)?);
        }
    }

    // Trajectory of the base angular momenta with the constraint tracked.
    let p0 = s.state().p.norm();
    let mut constraint = 0.0f64;
    let traj = em_charge_trajectory_with(&AXES, &s, c.dt, c.steps, &loc, |cur| {
        constraint = worst(constraint, scaled(divergence(&cur.state().p)?.norm(), p0));
        Ok(())
    })
    .at(X, "charge trajectory")?;
    let am_scale = em_angular_momentum_scale(&s).at(X, "charge scale")?;
    let mut noether = 0.0f64;
    for (i, label) in AXIS_LABELS.iter().enumerate() {
        let series: Vec<f64> = traj.iter().map(|(_, v)| v[i]).collect();
        for ((t, _), v) in traj.iter().zip(&series) {
            r.charges.push(ChargeRow { gen: label.to_string(), t: *t, value: *v });
        }
        let d = relative_drift(series.iter().copied(), 1e-12 * am_scale);
        r.residual(format!("noether_{label}"), d);
        noether = worst(noether, d);
    }
    let eom = em_eom_residual(&s, c.eom_dt).at(X, "equations of motion")?;

    // Zero section: pullback and gauge invariance.
    let ext0 = em_extend(&em_split_gauge(&s).at(X, "gauge split")?);
    let ext_scale = em_charge_scale(&ext0).at(X, "charge scale")?;
    let lambda = localized(g, &spec, &mut rng).at(X, "gauge function")?;
    let gauged = em_gauge_transform(&s, &lambda).at(X, "gauge transform")?;
    let (mut pullback, mut gauge_inv) = (0.0f64, 0.0f64);
    for (i, e) in AXES.iter().enumerate() {
        let base = traj[0].1[i];
        let pulled = em_rotation_charge(*e, &ext0, &loc).at(X, "zero-section charge")?;
        pullback = worst(pullback, scaled((base - pulled).abs(), ext_scale));
        let moved = em_base_angular_momentum(*e, &gauged, &loc).at(X, "gauge invariance")?;
        gauge_inv = worst(gauge_inv, rel(moved, base));
    }

    // Off the zero section: closure and defining relation.
    let mut ext = ext0;
    ext.nu = zero_mean(localized(g, &spec, &mut rng).at(X, "fibre point")?);
    let closure = em_so3_closure_residual(&ext).at(X, "so(3) closure")?;
    let mut defrel = 0.0f64;
    for (i, e) in AXES.iter().enumerate() {
        let mut axis_worst = 0.0f64;
        for d in 0..c.directions {
            let stage = format!("defining relation, axis {}, direction {d}", i + 1);
            let y = em_localized_tangent(g, &spec, &mut rng).at(X, &stage)?;
            let (omega, dj) = em_defining_relation(*e, &ext, &y, DEFINING_RELATION_EPS).at(X, &stage)?;
            axis_worst = worst(axis_worst, rel(omega, dj));
        }
        r.residual(format!("defining_relation_{}", AXIS_LABELS[i]), axis_worst);
        defrel = worst(defrel, axis_worst);
    }

    let entries = [
        ("helmholtz", helmholtz),
        ("constraint", constraint),
        ("kernel", kernel),
        ("eom", eom),
        ("defining_relation", defrel),
        ("pullback", pullback),
        ("closure", closure),
        ("gauge_invariance", gauge_inv),
        ("noether", noether),
    ];
    r.residual("initial_constraint", constraint_residual(&s.state().p).at(X, "constraint")?);
    r.residual("kernel_detection", detection);
    for (name, v) in entries {
        r.residual(name, v);
        r.check(Check::at_most(name, v, tol[name]));
    }
    r.check(Check::at_least("kernel_detection", detection, tol["kernel_detection"]));
    Ok(r)
}

/// Constraint chain of one linear system against the elimination oracle.
fn run_pca(c: &PcaConfig, seed: u64, tol: &Tolerances) -> Result<Results, HarnessError> {
    let sys = system_for(&c.system, seed);
    let out = pca_check(&sys)?;
    let mut r = Results::default();
    r.residual("steps", out.steps as f64);
    r.residual("oracle_distance", out.distance);
    r.residual("orthonormality", out.orthonormality);
    r.check(Check::at_most("chain_mismatch", f64::from(u8::from(!out.chain_match)), 0.0));
    r.check(Check::at_most("oracle_distance", out.distance, tol["oracle_distance"]));
    r.check(Check::at_most("orthonormality", out.orthonormality, tol["orthonormality"]));
    r.check(Check::at_most("steps", out.steps as f64, out.step_bound as f64));
    if let Some(expect) = &c.expect {
        r.check(Check::at_most("expected_chain", f64::from(u8::from(&out.dims != expect)), 0.0));
    }
    r.pca = Some(json!({
        "result": out.json,
        "oracle_dims": out.oracle_dims,
    }));
    Ok(r)
}

/// Comparison of one constraint-algorithm run with the oracle.
#[derive(Debug, Clone)]
pub struct PcaComparison {
    pub dims: Vec<usize>,
    pub oracle_dims: Vec<usize>,
    pub consistent: bool,
    /// Same dimensions and consistency flag.
    pub chain_match: bool,
    /// Largest subspace distance along the chain; NaN when the chains differ.
    pub distance: f64,
    pub orthonormality: f64,
    pub steps: usize,
    /// `dim` for consistent systems; one more when emptiness is detected.
    pub step_bound: usize,
    pub json: serde_json::Value,
}

pub fn pca_check(sys: &LinearSystem) -> Result<PcaComparison, HarnessError> {
    let n = sys.dim();
    let res = pca_run(&sys.form(), &sys.hamiltonian(), DEFAULT_TOL, n + 2).at("pca", "constraint algorithm")?;
    let oracle = oracle_chain(&sys.omega, &sys.a, &sys.b);
    let dims = res.dims();
    let oracle_dims = oracle.dims();
    let chain_match = dims == oracle_dims && res.consistent == oracle.consistent;
    let distance = if chain_match {
        res.chain.iter().zip(&oracle.chain).map(|(a, b)| a.distance(b)).fold(0.0, worst)
    } else {
        f64::NAN
    };
    let orthonormality = res.chain.iter().filter(|c| c.dim() > 0).map(|c| c.orthonormality_error()).fold(0.0, worst);
    Ok(PcaComparison {
        json: serde_json::to_value(&res).expect("result serializes"),
        consistent: res.consistent,
        steps: res.steps,
        step_bound: if res.consistent { n } else { n + 1 },
        dims,
        oracle_dims,
        chain_match,
        distance,
        orthonormality,
    })
}
