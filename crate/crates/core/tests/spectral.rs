use std::f64::consts::PI;
use std::io::Cursor;

use presym_core::field::random::{localized, periodic, rng_from_seed, LocalizedSpec};
use presym_core::field::snapshot::{read_snapshot, write_snapshot, Format, Snapshot};
use presym_core::field::spectral::{divergence, inner_spectral, inner_vec};
use presym_core::field::{
    curl, functional_derivative, functional_eval, gradient, helmholtz_decompose, integrate, inverse_laplacian,
    spectral_derivative, DiscreteFunctional, Op, Slot, Term, Weight,
};
use presym_core::kg::{basis_charge, Basis};
use presym_core::{Error, Grid3, ScalarField, VectorField3};
use proptest::prelude::*;
use rand::Rng;

fn random_vector(g: Grid3, seed: u64) -> VectorField3 {
    let mut rng = rng_from_seed(seed);
    let k = 0.3 * PI / g.spacing();
    VectorField3::new(
        periodic(g, k, &mut rng).unwrap(),
        periodic(g, k, &mut rng).unwrap(),
        periodic(g, k, &mut rng).unwrap(),
    )
    .unwrap()
}

/// Fourth-order centred difference along `axis` with periodic wrap.
fn fd4(f: &ScalarField, axis: usize) -> ScalarField {
    let g = *f.grid();
    let n = g.n();
    let h = g.spacing();
    let at = |i: [usize; 3], s: isize| {
        let mut j = i;
        j[axis - 1] = (i[axis - 1] as isize + s).rem_euclid(n as isize) as usize;
        f.values()[g.index(j[0], j[1], j[2])]
    };
    let mut out = vec![0.0; g.len()];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let i = [a, b, c];
                out[g.index(a, b, c)] = (-at(i, 2) + 8.0 * at(i, 1) - 8.0 * at(i, -1) + at(i, -2)) / (12.0 * h);
            }
        }
    }
    ScalarField::from_values(g, out).unwrap()
}

#[test]
fn derivative_matches_fourth_order_differences() {
    // The difference error must shrink like h⁴ on a fixed smooth field.
    let field = |x: [f64; 3]| (2.0 * PI * x[0] / 8.0).sin() * (2.0 * PI * 2.0 * x[1] / 8.0).cos() + 0.3 * (2.0 * PI * x[2] / 8.0).cos();
    let errs: Vec<f64> = [16usize, 32]
        .iter()
        .map(|&n| {
            let g = Grid3::new(n, 8.0).unwrap();
            let f = ScalarField::from_fn(g, field);
            (1..=3)
                .map(|axis| (&spectral_derivative(&f, axis).unwrap() - &fd4(&f, axis)).max_abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let ratio = errs[0] / errs[1];
    assert!((12.0..20.0).contains(&ratio), "errors {errs:?}");

    let g = Grid3::new(32, 8.0).unwrap();
    let f = periodic(g, 0.08 * PI / g.spacing(), &mut rng_from_seed(4)).unwrap();
    for axis in 1..=3 {
        let d = spectral_derivative(&f, axis).unwrap();
        let err = (&d - &fd4(&f, axis)).max_abs();
        assert!(err < 3e-3 * d.max_abs(), "axis {axis}: {err:e}");
    }
}

#[test]
fn derivative_examples() {
    let g = Grid3::new(16, 6.0).unwrap();
    assert_eq!(spectral_derivative(&ScalarField::constant(g, 3.0), 2).unwrap().max_abs(), 0.0);
    let w = 2.0 * PI / 6.0;
    let f = ScalarField::from_fn(g, |x| (w * x[0]).sin());
    let want = ScalarField::from_fn(g, |x| w * (w * x[0]).cos());
    assert!((&spectral_derivative(&f, 1).unwrap() - &want).max_abs() < 1e-12);
}

#[test]
fn derivative_is_antisymmetric() {
    let g = Grid3::new(16, 5.0).unwrap();
    let mut rng = rng_from_seed(11);
    let k = 0.3 * PI / g.spacing();
    let f = periodic(g, k, &mut rng).unwrap();
    let h = periodic(g, k, &mut rng).unwrap();
    for axis in 1..=3 {
        let lhs = integrate(&spectral_derivative(&f, axis).unwrap().mul(&h));
        let rhs = -integrate(&f.mul(&spectral_derivative(&h, axis).unwrap()));
        assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(rhs.abs()), "{lhs} vs {rhs}");
    }
}

#[test]
fn integrate_examples_and_parseval() {
    let g = Grid3::new(16, 3.0).unwrap();
    assert!((integrate(&ScalarField::constant(g, 1.0)) - 27.0).abs() < 1e-12);
    let s = ScalarField::from_fn(g, |x| (2.0 * PI * x[0] / 3.0).sin());
    assert!(integrate(&s).abs() < 1e-12 * 27.0);

    let mut rng = rng_from_seed(2);
    for _ in 0..5 {
        let k = 0.3 * PI / g.spacing();
        let f = periodic(g, k, &mut rng).unwrap();
        let h = periodic(g, k, &mut rng).unwrap();
        let direct = integrate(&f.mul(&h));
        let oracle = inner_spectral(&f, &h);
        assert!((direct - oracle).abs() <= 1e-10 * direct.abs().max(1e-300), "{direct} vs {oracle}");
    }
}

#[test]
fn helmholtz_examples() {
    let g = Grid3::new(16, 4.0).unwrap();
    let chi = ScalarField::from_fn(g, |x| (2.0 * PI * x[0] / 4.0).sin() * (2.0 * PI * x[2] / 4.0).cos());
    let grad = gradient(&chi).unwrap();
    let (t, l) = helmholtz_decompose(&grad).unwrap();
    assert!(t.max_abs() < 1e-12);
    assert!((&l - &grad).max_abs() < 1e-12);

    // Plane wave along x¹ polarized along x².
    let wave = VectorField3::new(
        ScalarField::zeros(g),
        ScalarField::from_fn(g, |x| (2.0 * PI * x[0] / 4.0).cos()),
        ScalarField::zeros(g),
    )
    .unwrap();
    let (t, l) = helmholtz_decompose(&wave).unwrap();
    assert!((&t - &wave).max_abs() < 1e-12);
    assert!(l.max_abs() < 1e-12);
}

#[test]
fn helmholtz_split_of_random_fields() {
    let g = Grid3::new(16, 4.0).unwrap();
    for seed in 0..4 {
        let v = random_vector(g, seed);
        let (t, l) = helmholtz_decompose(&v).unwrap();
        assert!((&(&t + &l) - &v).max_abs() <= 1e-12 * v.max_abs());
        assert!(divergence(&t).unwrap().norm() <= 1e-12 * v.norm());
        assert!(curl(&l).unwrap().norm() <= 1e-12 * v.norm());
        let (tt, tl) = helmholtz_decompose(&t).unwrap();
        assert!((&tt - &t).max_abs() <= 1e-12 * v.max_abs());
        assert!(tl.max_abs() <= 1e-12 * v.max_abs());
        assert!(inner_vec(&t, &l).abs() <= 1e-12 * v.norm().powi(2));
    }
}

#[test]
fn inverse_laplacian_examples() {
    let g = Grid3::new(16, 5.0).unwrap();
    assert_eq!(inverse_laplacian(&ScalarField::zeros(g)).unwrap().max_abs(), 0.0);
    let w = 2.0 * PI / 5.0;
    let s = ScalarField::from_fn(g, |x| (w * x[0]).sin());
    let want = s.scale(-1.0 / (w * w));
    assert!((&inverse_laplacian(&s).unwrap() - &want).max_abs() < 1e-13);
    let shifted = s.axpy(1.0, &ScalarField::constant(g, 0.1));
    assert!(matches!(inverse_laplacian(&shifted), Err(Error::NonZeroMean { .. })));
}

#[test]
fn functional_examples() {
    let g = Grid3::new(8, 2.0).unwrap();
    let c = 1.5;
    let phi = ScalarField::constant(g, c);
    let zero = ScalarField::zeros(g);
    let mut f = DiscreteFunctional::new();
    f.push(Term::new(Weight::constant(1.0), vec![], Slot::Phi, vec![], Slot::Phi));
    assert!((functional_eval(&f, &phi, &zero, 0.0).unwrap() - c * c * 8.0).abs() < 1e-12);
    assert_eq!(functional_eval(&DiscreteFunctional::new(), &phi, &zero, 0.0).unwrap(), 0.0);

    let mut rng = rng_from_seed(5);
    let k = 0.3 * PI / g.spacing();
    let phi = periodic(g, k, &mut rng).unwrap();
    let p0 = periodic(g, k, &mut rng).unwrap();

    let m = 0.7;
    let mut mass = DiscreteFunctional::new();
    mass.push(Term::new(Weight::constant(0.5), vec![Op::Scale(m * m)], Slot::Phi, vec![], Slot::Phi));
    let (d_phi, d_p0) = functional_derivative(&mass, &phi, &p0, 0.0).unwrap();
    assert!((&d_phi - &phi.scale(m * m)).max_abs() < 1e-12);
    assert_eq!(d_p0.max_abs(), 0.0);

    let mut mom = DiscreteFunctional::new();
    mom.push(Term::new(Weight::constant(1.0), vec![], Slot::P0, vec![Op::D(1)], Slot::Phi));
    let d = mom.derivative(&phi, &p0, 0.0).unwrap();
    assert!((&d.d_phi + &spectral_derivative(&p0, 1).unwrap()).max_abs() < 1e-12);
    assert!((&d.d_p0 - &spectral_derivative(&phi, 1).unwrap()).max_abs() < 1e-12);

    let other = Grid3::new(4, 2.0).unwrap();
    assert!(matches!(functional_eval(&mom, &phi, &ScalarField::zeros(other), 0.0), Err(Error::GridMismatch)));
}

const OPS: [Op; 5] = [Op::D(1), Op::D(2), Op::D(3), Op::Laplacian, Op::Scale(0.8)];

fn random_functional(seed: u64) -> DiscreteFunctional {
    let mut rng = rng_from_seed(seed);
    let mut f = DiscreteFunctional::new();
    let slot = |r: &mut rand_chacha::ChaCha8Rng| if r.random_bool(0.5) { Slot::Phi } else { Slot::P0 };
    for _ in 0..4 {
        let mut w = Weight::constant(rng.random_range(-1.0..1.0));
        w.coeffs[1 << rng.random_range(0..4usize)] = rng.random_range(-1.0..1.0);
        let ops = |r: &mut rand_chacha::ChaCha8Rng| (0..r.random_range(0..3usize)).map(|_| OPS[r.random_range(0..5usize)]).collect::<Vec<_>>();
        let lo = ops(&mut rng);
        let l = slot(&mut rng);
        let ro = ops(&mut rng);
        let r = slot(&mut rng);
        f.push(Term::new(w, lo, l, ro, r));
    }
    f
}

/// Term-by-term quadrature with operators applied by explicit derivatives.
fn quadrature_oracle(f: &DiscreteFunctional, phi: &ScalarField, p0: &ScalarField, x0: f64) -> f64 {
    let apply = |mut v: ScalarField, ops: &[Op]| {
        for op in ops {
            v = match *op {
                Op::D(k) => spectral_derivative(&v, k).unwrap(),
                Op::Laplacian => (1..=3)
                    .map(|k| spectral_derivative(&spectral_derivative(&v, k).unwrap(), k).unwrap())
                    .fold(ScalarField::zeros(*v.grid()), |acc, d| &acc + &d),
                Op::Scale(c) => v.scale(c),
            };
        }
        v
    };
    let pick = |s: Slot| if s == Slot::Phi { phi.clone() } else { p0.clone() };
    f.terms
        .iter()
        .map(|t| {
            let w = ScalarField::from_fn(*phi.grid(), |x| t.weight.eval(x0, x));
            integrate(&apply(pick(t.left), &t.left_ops).mul(&w).mul(&apply(pick(t.right), &t.right_ops)))
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn functional_eval_matches_term_quadrature(seed in 0u64..1000) {
        let g = Grid3::new(8, 4.0).unwrap();
        let spec = LocalizedSpec::from_width(&g, 0.4, 1.0);
        let mut rng = rng_from_seed(seed);
        let phi = localized(g, &spec, &mut rng).unwrap();
        let p0 = localized(g, &spec, &mut rng).unwrap();
        let f = random_functional(seed);
        let got = functional_eval(&f, &phi, &p0, 0.3).unwrap();
        let want = quadrature_oracle(&f, &phi, &p0, 0.3);
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "{} vs {}", got, want);
    }

    #[test]
    fn functional_derivative_matches_central_differences(seed in 0u64..1000) {
        let g = Grid3::new(8, 4.0).unwrap();
        let spec = LocalizedSpec::from_width(&g, 0.4, 1.0);
        let mut rng = rng_from_seed(seed);
        let phi = localized(g, &spec, &mut rng).unwrap();
        let p0 = localized(g, &spec, &mut rng).unwrap();
        let eta = localized(g, &spec, &mut rng).unwrap();
        let zeta = localized(g, &spec, &mut rng).unwrap();
        let f = random_functional(seed ^ 0x5a5a);
        check_directional(&f, &phi, &p0, &eta, &zeta)?;
    }

    #[test]
    fn charge_derivatives_match_central_differences(seed in 0u64..1000, which in 0usize..10) {
        let g = Grid3::new(16, 8.0).unwrap();
        let spec = LocalizedSpec::from_width(&g, 0.3, 1.0);
        let mut rng = rng_from_seed(seed);
        let phi = localized(g, &spec, &mut rng).unwrap();
        let p0 = localized(g, &spec, &mut rng).unwrap();
        let eta = localized(g, &spec, &mut rng).unwrap();
        let zeta = localized(g, &spec, &mut rng).unwrap();
        check_directional(&basis_charge(Basis::ALL[which], 1.3), &phi, &p0, &eta, &zeta)?;
    }
}

fn check_directional(
    f: &DiscreteFunctional,
    phi: &ScalarField,
    p0: &ScalarField,
    eta: &ScalarField,
    zeta: &ScalarField,
) -> Result<(), TestCaseError> {
    let eps = 1e-5;
    let x0 = 0.4;
    let d = f.derivative(phi, p0, x0).unwrap();
    let at = |s: f64| functional_eval(f, &phi.axpy(s, eta), &p0.axpy(s, zeta), x0).unwrap();
    let fd = (at(eps) - at(-eps)) / (2.0 * eps);
    let exact = integrate(&d.d_phi.mul(eta)) + integrate(&d.d_p0.mul(zeta));
    let scale = exact.abs().max(fd.abs());
    prop_assert!((fd - exact).abs() <= 1e-6 * scale.max(1e-8), "{} vs {}", fd, exact);
    Ok(())
}

#[test]
fn snapshot_roundtrip() {
    let g = Grid3::new(8, 3.0).unwrap();
    let f = periodic(g, 2.0, &mut rng_from_seed(9)).unwrap();
    let snap = Snapshot { name: "phi".into(), x0: 0.25, field: f };
    for format in [Format::Csv, Format::Binary] {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &snap, format).unwrap();
        let back = read_snapshot(&mut Cursor::new(buf)).unwrap();
        assert_eq!(back, snap);
    }
    let mut bad = Cursor::new(b"not-a-snapshot\n".to_vec());
    assert!(matches!(read_snapshot(&mut bad), Err(Error::Snapshot(_))));
}

#[test]
fn seeded_fields_are_reproducible() {
    let g = Grid3::new(16, 8.0).unwrap();
    let spec = LocalizedSpec::from_width(&g, 0.25, 1.0);
    let a = localized(g, &spec, &mut rng_from_seed(3)).unwrap();
    let b = localized(g, &spec, &mut rng_from_seed(3)).unwrap();
    assert_eq!(a, b);
    assert!((a.max_abs() - 1.0).abs() < 1e-15);
}
