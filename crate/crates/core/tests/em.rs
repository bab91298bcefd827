use std::f64::consts::PI;

use presym_core::em::*;
use presym_core::field::random::{localized, periodic, rng_from_seed, LocalizedSpec};
use presym_core::field::spectral::{divergence, inner_vec};
use presym_core::field::{curl, gradient, transverse_part};
use presym_core::{Grid3, ScalarField, VectorField3};
use proptest::prelude::*;

fn periodic_vector(g: Grid3, seed: u64) -> VectorField3 {
    let mut rng = rng_from_seed(seed);
    let k = 0.3 * PI / g.spacing();
    VectorField3::new(
        periodic(g, k, &mut rng).unwrap(),
        periodic(g, k, &mut rng).unwrap(),
        periodic(g, k, &mut rng).unwrap(),
    )
    .unwrap()
}

fn zero_mean(f: ScalarField) -> ScalarField {
    let m = f.mean();
    f.map(|v| v - m)
}

fn periodic_scalar(g: Grid3, seed: u64) -> ScalarField {
    zero_mean(periodic(g, 0.3 * PI / g.spacing(), &mut rng_from_seed(seed)).unwrap())
}

fn random_state(g: Grid3, seed: u64) -> ConstrainedEmState {
    let s = EmState::new(0.0, periodic_vector(g, seed), periodic_vector(g, seed + 1)).unwrap();
    em_project_constraint(&s).unwrap()
}

fn random_tangent(g: Grid3, seed: u64) -> EmTangent {
    EmTangent {
        xa_t: transverse_part(&periodic_vector(g, seed)).unwrap(),
        xchi: periodic_scalar(g, seed + 1),
        xp: transverse_part(&periodic_vector(g, seed + 2)).unwrap(),
        xnu: periodic_scalar(g, seed + 3),
    }
}

fn small() -> Grid3 {
    Grid3::new(16, 6.0).unwrap()
}

/// Box and envelope for the rotation charges; fields are resolved and
/// negligible outside the central 60%.
fn rotation_setup(seed: u64) -> (Grid3, LocalizedSpec, ConstrainedEmState) {
    let g = Grid3::new(64, 32.0).unwrap();
    let spec = LocalizedSpec::from_width(&g, 0.2, 1.0);
    let s = em_localized_state(g, &spec, &mut rng_from_seed(seed)).unwrap();
    (g, spec, s)
}

const AXES: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

#[test]
fn projection_examples() {
    let g = small();
    let chi = periodic_scalar(g, 1);
    let s = EmState::new(0.0, VectorField3::zeros(g), gradient(&chi).unwrap()).unwrap();
    assert!(em_project_constraint(&s).unwrap().state().p.max_abs() < 1e-12);

    let p = transverse_part(&periodic_vector(g, 2)).unwrap();
    let s = EmState::new(0.0, VectorField3::zeros(g), p.clone()).unwrap();
    assert!((&em_project_constraint(&s).unwrap().state().p - &p).max_abs() < 1e-13);

    let raw = EmState::new(0.0, periodic_vector(g, 3), periodic_vector(g, 4)).unwrap();
    assert!(ConstrainedEmState::new(raw.clone()).is_err());
    let once = em_project_constraint(&raw).unwrap();
    assert!(divergence(&once.state().p).unwrap().norm() <= 1e-12 * raw.p.norm());
    let twice = em_project_constraint(once.state()).unwrap();
    assert!((&twice.state().p - &once.state().p).max_abs() <= 1e-12 * raw.p.max_abs());
    assert_eq!(once.state().a, raw.a);
}

#[test]
fn gauge_split_examples() {
    let g = small();
    let a_t = transverse_part(&periodic_vector(g, 5)).unwrap();
    let p = transverse_part(&periodic_vector(g, 6)).unwrap();
    let s = ConstrainedEmState::new(EmState::new(0.0, a_t.clone(), p.clone()).unwrap()).unwrap();
    assert!(em_split_gauge(&s).unwrap().chi.max_abs() < 1e-12);

    let lambda = periodic(g, 2.0, &mut rng_from_seed(7)).unwrap().map(|v| v + 0.4);
    let s = ConstrainedEmState::new(EmState::new(0.0, gradient(&lambda).unwrap(), p.clone()).unwrap()).unwrap();
    let split = em_split_gauge(&s).unwrap();
    assert!(split.a_t.max_abs() < 1e-12);
    let centered = zero_mean(lambda.clone());
    assert!((&split.chi - &centered).max_abs() < 1e-12);

    let s = random_state(g, 8);
    let split = em_split_gauge(&s).unwrap();
    assert!(split.chi.mean().abs() < 1e-14);
    assert!(divergence(&split.a_t).unwrap().norm() <= 1e-10 * split.a_t.norm());
    let back = split.recombine().unwrap();
    assert!((&back.state().a - &s.state().a).max_abs() <= 1e-12 * s.state().a.max_abs());
}

#[test]
fn gauge_transform_examples() {
    let g = small();
    let s = random_state(g, 9);
    let zero = ScalarField::zeros(g);
    assert!((&em_gauge_transform(&s, &zero).unwrap().state().a - &s.state().a).max_abs() < 1e-15);

    let lambda = periodic_scalar(g, 10);
    let there = em_gauge_transform(&s, &lambda).unwrap();
    let back = em_gauge_transform(&there, &lambda.scale(-1.0)).unwrap();
    assert!((&back.state().a - &s.state().a).max_abs() <= 1e-13);
    assert_eq!(there.state().p, s.state().p);
    let t0 = em_split_gauge(&s).unwrap().a_t;
    let t1 = em_split_gauge(&there).unwrap().a_t;
    assert!((&t1 - &t0).max_abs() <= 1e-12 * t0.max_abs());
}

#[test]
fn presymplectic_form_examples() {
    let g = small();
    let y = random_tangent(g, 11);
    let gauge = EmTangent::base(VectorField3::zeros(g), periodic_scalar(g, 12), VectorField3::zeros(g));
    assert!(em_presymplectic_form(&gauge, &y).unwrap().abs() < 1e-12);
    assert_eq!(em_presymplectic_form(&y, &y).unwrap(), 0.0);

    // One transverse mode cos(2πx¹/L)·e₂ in a against the same mode in p.
    let mode = VectorField3::new(
        ScalarField::zeros(g),
        ScalarField::from_fn(g, |x| (2.0 * PI * x[0] / 6.0).cos()),
        ScalarField::zeros(g),
    )
    .unwrap();
    let zero = ScalarField::zeros(g);
    let x = EmTangent::base(mode.clone(), zero.clone(), VectorField3::zeros(g));
    let y = EmTangent::base(VectorField3::zeros(g), zero, mode);
    assert!((em_presymplectic_form(&x, &y).unwrap() - 216.0 / 2.0).abs() < 1e-11);
}

#[test]
fn kernel_is_exactly_the_gauge_block() {
    let g = small();
    let battery: Vec<EmTangent> = (0..32).map(|i| random_tangent(g, 1000 + 10 * i)).collect();
    let scale = battery.iter().map(|y| y.norm()).fold(0.0, f64::max);
    for seed in 0..4 {
        let t = random_tangent(g, 50 + 10 * seed);
        let gauge = EmTangent { xa_t: VectorField3::zeros(g), xp: VectorField3::zeros(g), ..t.clone() };
        assert!(em_kernel_probe(&gauge, &battery).unwrap() <= 1e-10 * scale * gauge.norm());
        assert!(em_kernel_probe(&t, &battery).unwrap() > 1e-3 * scale * t.norm());
        let only_a = EmTangent { xp: VectorField3::zeros(g), ..t.clone() };
        assert!(em_kernel_probe(&only_a, &battery).unwrap() > 1e-3 * scale * only_a.norm());
        let only_p = EmTangent { xa_t: VectorField3::zeros(g), ..t };
        assert!(em_kernel_probe(&only_p, &battery).unwrap() > 1e-3 * scale * only_p.norm());
    }
}

#[test]
fn coulomb_connection_is_a_projector_onto_transverse_blocks() {
    let g = small();
    let t = random_tangent(g, 13);
    let h = em_coulomb_horizontal(&t);
    assert_eq!(h.xchi.max_abs(), 0.0);
    assert_eq!(h.xa_t, t.xa_t);
    assert_eq!(h.xp, t.xp);
    assert_eq!(em_coulomb_horizontal(&h), h);
    let gauge = EmTangent::base(VectorField3::zeros(g), t.xchi.clone(), VectorField3::zeros(g));
    assert_eq!(em_coulomb_horizontal(&gauge).norm(), 0.0);

    let xa = periodic_vector(g, 14);
    let horizontal = coulomb_horizontal_a(&xa).unwrap();
    assert!(divergence(&horizontal).unwrap().norm() <= 1e-12 * xa.norm());
    let again = coulomb_horizontal_a(&horizontal).unwrap();
    assert!((&again - &horizontal).max_abs() <= 1e-12 * xa.max_abs());
}

#[test]
fn propagation_examples() {
    let g = small();
    let zero = ConstrainedEmState::new(EmState::zeros(g)).unwrap();
    let out = em_propagate(&zero, 0.4).unwrap();
    assert_eq!(out.state().a.max_abs() + out.state().p.max_abs(), 0.0);

    let s = random_state(g, 15);
    let back = em_propagate(&em_propagate(&s, 0.37).unwrap(), -0.37).unwrap();
    assert!((&back.state().a - &s.state().a).max_abs() <= 1e-12);
    assert!((&back.state().p - &s.state().p).max_abs() <= 1e-12);
    assert_eq!(em_propagate(&s, 0.37).unwrap().state().x0, 0.37);

    // Plane wave along x¹ polarized along x³.
    let w = 2.0 * PI / 6.0;
    let a = VectorField3::new(
        ScalarField::zeros(g),
        ScalarField::zeros(g),
        ScalarField::from_fn(g, |x| (w * x[0]).cos()),
    )
    .unwrap();
    let wave = ConstrainedEmState::new(EmState::new(0.0, a, VectorField3::zeros(g)).unwrap()).unwrap();
    assert!(em_eom_residual(&wave, 1e-4).unwrap() <= 1e-6);
}

#[test]
fn constraint_and_energy_are_preserved() {
    let g = small();
    let s = random_state(g, 16);
    let p0 = s.state().p.norm();
    let e0 = em_energy(&s).unwrap();
    let mut cur = s.clone();
    for _ in 0..20 {
        cur = em_propagate(&cur, 0.1).unwrap();
        assert!(divergence(&cur.state().p).unwrap().norm() <= 1e-12 * p0);
    }
    assert!(rel(em_energy(&cur).unwrap(), e0) <= 1e-12);
    let gauged = em_gauge_transform(&s, &periodic_scalar(g, 17)).unwrap();
    assert!(divergence(&gauged.state().p).unwrap().norm() <= 1e-12 * p0);
    assert!(em_eom_residual(&s, 1e-4).unwrap() <= 1e-6);
}

#[test]
fn extension_and_extended_form() {
    let g = small();
    let split = em_split_gauge(&random_state(g, 18)).unwrap();
    let ext = em_extend(&split);
    assert_eq!(ext.nu.max_abs(), 0.0);
    assert_eq!(ext.restrict(), split);

    let x = EmTangent { xnu: ScalarField::zeros(g), ..random_tangent(g, 19) };
    let y = EmTangent { xnu: ScalarField::zeros(g), ..random_tangent(g, 20) };
    assert_eq!(em_extended_form(&x, &y).unwrap(), em_presymplectic_form(&x, &y).unwrap());

    let eta = periodic_scalar(g, 21);
    let zero_v = VectorField3::zeros(g);
    let zero_s = ScalarField::zeros(g);
    let kappa = EmTangent { xa_t: zero_v.clone(), xchi: zero_s.clone(), xp: zero_v.clone(), xnu: eta.clone() };
    let dphi = EmTangent { xa_t: zero_v.clone(), xchi: eta.clone(), xp: zero_v, xnu: zero_s };
    let grad = gradient(&eta).unwrap();
    let want = inner_vec(&grad, &grad);
    assert!(rel(em_extended_form(&kappa, &dphi).unwrap(), want) <= 1e-12);
    let t = random_tangent(g, 22);
    assert_eq!(em_extended_form(&t, &t).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn extended_form_is_nondegenerate_on_blocks(seed in 0u64..1000) {
        // A nonzero tangent pairs nontrivially with its own symplectic dual.
        let g = Grid3::new(8, 4.0).unwrap();
        let t = random_tangent(g, seed);
        let dual = EmTangent { xa_t: t.xp.scale(-1.0), xchi: t.xnu.clone(), xp: t.xa_t.clone(), xnu: t.xchi.scale(-1.0) };
        let v = em_extended_form(&t, &dual).unwrap();
        prop_assert!(v > 0.0);
    }

    #[test]
    fn extended_form_is_antisymmetric(seed in 0u64..1000) {
        let g = Grid3::new(8, 4.0).unwrap();
        let x = random_tangent(g, seed);
        let y = random_tangent(g, seed + 7);
        let a = em_extended_form(&x, &y).unwrap();
        let b = em_extended_form(&y, &x).unwrap();
        prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn rotation_examples() {
    let (g, spec, s) = rotation_setup(30);
    let loc = Localization::default();
    let zero = em_extend(&em_split_gauge(&ConstrainedEmState::new(EmState::zeros(g)).unwrap()).unwrap());
    assert_eq!(em_rotation_killing([0.0, 0.0, 1.0], &zero, &loc).unwrap().norm(), 0.0);
    assert_eq!(em_rotation_charge([0.0, 0.0, 1.0], &zero, &loc).unwrap(), 0.0);

    let ext = em_extend(&em_split_gauge(&s).unwrap());
    assert_eq!(em_rotation_killing([0.0; 3], &ext, &loc).unwrap().norm(), 0.0);

    // Only μ nonzero: the charge pairs μ with the rotated χ = 0.
    let mut mu_only = zero.clone();
    mu_only.nu = zero_mean(localized(g, &spec, &mut rng_from_seed(31)).unwrap());
    assert!(em_rotation_charge([0.3, -0.4, 1.0], &mu_only, &loc).unwrap().abs() < 1e-14);

    // Azimuthal fields are invariant under rotations about x³.
    let bump = ScalarField::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 5.12).exp());
    let stream = VectorField3::new(ScalarField::zeros(g), ScalarField::zeros(g), bump).unwrap();
    let az = curl(&stream).unwrap();
    let p = curl(&localized_vector(g, &spec, 32)).unwrap();
    let sym = em_extend(&em_split_gauge(&ConstrainedEmState::new(EmState::new(0.0, az, p).unwrap()).unwrap()).unwrap());
    let j3 = em_rotation_charge([0.0, 0.0, 1.0], &sym, &loc).unwrap();
    assert!(j3.abs() <= 1e-9 * em_charge_scale(&sym).unwrap(), "{j3:e}");

    // Linearity in the axis.
    let xi = [0.2, -1.1, 0.7];
    let whole = em_rotation_charge(xi, &ext, &loc).unwrap();
    let parts: f64 = AXES.iter().zip(xi).map(|(&e, c)| c * em_rotation_charge(e, &ext, &loc).unwrap()).sum();
    assert!(rel(whole, parts) <= 1e-12);
}

fn localized_vector(g: Grid3, spec: &LocalizedSpec, seed: u64) -> VectorField3 {
    let mut rng = rng_from_seed(seed);
    VectorField3::new(
        localized(g, spec, &mut rng).unwrap(),
        localized(g, spec, &mut rng).unwrap(),
        localized(g, spec, &mut rng).unwrap(),
    )
    .unwrap()
}

#[test]
fn rotation_killing_commutes_with_quarter_turns() {
    // A quarter turn about x³ maps the grid to itself; rotating the state
    // and then taking the x³ Killing vector equals the rotated Killing vector.
    let (g, _, s) = rotation_setup(33);
    let loc = Localization::default();
    let ext = em_extend(&em_split_gauge(&s).unwrap());
    let n = g.n();
    let turn_scalar = |f: &ScalarField| {
        let mut out = vec![0.0; g.len()];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    // (x¹, x²) ↦ (−x², x¹).
                    out[g.index((n - j) % n, i, k)] = f.values()[g.index(i, j, k)];
                }
            }
        }
        ScalarField::from_values(g, out).unwrap()
    };
    let turn_vector = |v: &VectorField3| {
        VectorField3::new(turn_scalar(v.get(2)).scale(-1.0), turn_scalar(v.get(1)), turn_scalar(v.get(3))).unwrap()
    };
    let turned = ExtendedEmState {
        split: SplitEmState {
            x0: 0.0,
            a_t: turn_vector(&ext.split.a_t),
            chi: turn_scalar(&ext.split.chi),
            p: turn_vector(&ext.split.p),
        },
        nu: turn_scalar(&ext.nu),
    };
    let k = em_rotation_killing([0.0, 0.0, 1.0], &ext, &loc).unwrap();
    let kt = em_rotation_killing([0.0, 0.0, 1.0], &turned, &loc).unwrap();
    let tol = 1e-10 * k.norm();
    assert!((&kt.xa_t - &turn_vector(&k.xa_t)).norm() <= tol);
    assert!((&kt.xp - &turn_vector(&k.xp)).norm() <= tol);
    assert!((&kt.xchi - &turn_scalar(&k.xchi)).norm() <= tol);
    let j = em_rotation_charge([0.0, 0.0, 1.0], &ext, &loc).unwrap();
    let jt = em_rotation_charge([0.0, 0.0, 1.0], &turned, &loc).unwrap();
    assert!(rel(j, jt) <= 1e-12);
}

#[test]
fn rotation_charges_are_momentum_maps() {
    let (g, spec, s) = rotation_setup(34);
    let mut ext = em_extend(&em_split_gauge(&s).unwrap());
    ext.nu = zero_mean(localized(g, &spec, &mut rng_from_seed(35)).unwrap());
    let mut rng = rng_from_seed(36);
    for e in AXES {
        for _ in 0..3 {
            let y = em_localized_tangent(g, &spec, &mut rng).unwrap();
            let (omega, dj) = em_defining_relation(e, &ext, &y, 1e-5).unwrap();
            assert!(rel(omega, dj) <= 1e-6, "{e:?}: {omega:e} vs {dj:e}");
        }
    }
    assert!(em_so3_closure_residual(&ext).unwrap() <= 1e-6);
    let b12 = em_charge_bracket(AXES[0], AXES[1], &ext).unwrap();
    let j3 = em_rotation_charge(AXES[2], &ext, &Localization::default()).unwrap();
    assert!((b12 - j3).abs() <= 1e-6 * em_charge_scale(&ext).unwrap());
}

#[test]
fn zero_section_charge_is_the_base_angular_momentum_and_gauge_invariant() {
    let (g, spec, s) = rotation_setup(37);
    let loc = Localization::default();
    let ext = em_extend(&em_split_gauge(&s).unwrap());
    let scale = em_charge_scale(&ext).unwrap();
    let lambda = localized(g, &spec, &mut rng_from_seed(38)).unwrap();
    let gauged = em_gauge_transform(&s, &lambda).unwrap();
    for e in AXES {
        let base = em_base_angular_momentum(e, &s, &loc).unwrap();
        let pulled = em_rotation_charge(e, &ext, &loc).unwrap();
        assert!((base - pulled).abs() <= 1e-12 * scale);
        let moved = em_base_angular_momentum(e, &gauged, &loc).unwrap();
        assert!(rel(moved, base) <= 1e-10, "{e:?}: {moved:e} vs {base:e}");
    }
}

#[test]
fn noether_drift_of_rotation_charges() {
    let (g, spec, s) = rotation_setup(39);
    let loc = Localization::default();
    let zero = ConstrainedEmState::new(EmState::zeros(g)).unwrap();
    assert_eq!(em_noether_drift(AXES[2], &zero, 0.05, 3, &loc).unwrap(), 0.0);

    let lambda = localized(g, &spec, &mut rng_from_seed(40)).unwrap();
    let gauged = em_gauge_transform(&s, &lambda).unwrap();
    let a = em_charge_trajectory(&AXES, &s, 0.05, 20, &loc).unwrap();
    let b = em_charge_trajectory(&AXES, &gauged, 0.05, 20, &loc).unwrap();
    for ((_, u), (_, v)) in a.iter().zip(&b) {
        for (x, y) in u.iter().zip(v) {
            assert!(rel(*x, *y) <= 1e-10);
        }
    }
    for e in AXES {
        assert!(em_noether_drift(e, &s, 0.05, 20, &loc).unwrap() <= 1e-6);
    }
}

#[test]
fn unlocalized_states_are_rejected() {
    let g = small();
    let s = random_state(g, 41);
    let ext = em_extend(&em_split_gauge(&s).unwrap());
    let loc = Localization::default();
    assert!(matches!(em_rotation_charge(AXES[0], &ext, &loc), Err(presym_core::Error::NotLocalized { .. })));
    assert!(matches!(em_noether_drift(AXES[0], &s, 0.1, 2, &loc), Err(presym_core::Error::NotLocalized { .. })));
}
