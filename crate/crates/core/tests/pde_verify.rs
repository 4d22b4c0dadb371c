use std::sync::Arc;

use meridian_core::pde::*;
use meridian_core::rq::{AxialPair, Elementary};
use meridian_core::sov::{meridional_product, cylindrical_potential, Branch, CylindricalSoVParams, Mode};
use meridian_core::special::{bessel, BesselKind};
use meridian_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts() -> FdOptions {
    FdOptions::default()
}

fn space_grid() -> Grid {
    Grid::lattice(&[(-1.0, 1.0, 4), (0.3, 1.5, 3), (0.4, 2.0, 4)])
}

/// Meridional solution of the axial (and Weinstein) equation for `alpha`.
fn meridional_solution(alpha: f64) -> ScalarFn {
    Arc::new(move |x: &[f64]| {
        meridional_product(alpha, Branch::Hyperbolic, 0.8, (1.0, 0.3), (0.7, 0.2), x[0], x[1].hypot(x[2])).unwrap()
    })
}

/// `u = (h_x0, -h_x1, -h_x2)` from a potential, by central differences fine
/// enough not to matter at the verification tolerance.
fn u_of(h: ScalarFn) -> Candidate {
    Candidate::triple(move |x: &[f64]| {
        let mut u = [0.0; 3];
        for (i, ui) in u.iter_mut().enumerate() {
            let e = 1e-4 * x[i].abs().max(0.1);
            let mut p = [x[0], x[1], x[2]];
            let mut m = p;
            let mut p2 = p;
            let mut m2 = p;
            p[i] += e;
            m[i] -= e;
            p2[i] += 2.0 * e;
            m2[i] -= 2.0 * e;
            let d = (8.0 * (h(&p) - h(&m)) - (h(&p2) - h(&m2))) / (12.0 * e);
            *ui = if i == 0 { d } else { -d };
        }
        u
    })
}

#[test]
fn weinstein_examples() {
    let grid = space_grid();
    for alpha in [-0.7, 0.0, 1.0, 2.0] {
        let h = Candidate::scalar(move |x: &[f64]| x[2].powf(alpha + 1.0));
        assert!(residual(&SystemId::Weinstein { alpha }, &h, &grid, &opts()).unwrap().max_abs <= 1e-10);
    }
    let h = Candidate::scalar(|x: &[f64]| x[2] * x[2]);
    let (field, _) = residual_field(&SystemId::Weinstein { alpha: 2.0 }, &h, &grid, &opts()).unwrap();
    for (p, v) in grid.points.iter().zip(field) {
        assert!((v.unwrap().abs() - 2.0 * p[2]).abs() < 1e-9);
    }
}

#[test]
fn continuity_reduces_to_laplace_and_weinstein() {
    let grid = space_grid();
    let h: ScalarFn = Arc::new(|x: &[f64]| x[0].exp() * x[1].sin() + x[2].powi(3) * x[0]);
    let cand = Candidate::Scalar(h.clone());
    let flat = residual_field(&SystemId::Continuity(Coefficient::constant(1.0)), &cand, &grid, &opts()).unwrap().0;
    let lap: Vec<f64> = grid.points.iter().map(|x| 6.0 * x[2] * x[0]).collect();
    for (a, b) in flat.iter().zip(&lap) {
        assert!((a.unwrap().abs() - b.abs()).abs() < 1e-8);
    }
    // With phi = x2^-alpha, the continuity residual is x2^(-alpha-1) times the Weinstein one.
    let alpha = 1.7;
    let both = [
        SystemId::Continuity(Coefficient::planar_power(alpha)),
        SystemId::Continuity(Coefficient::new(move |x: &[f64]| x[2].powf(-alpha))),
    ];
    let w = residual_field(&SystemId::Weinstein { alpha }, &cand, &grid, &opts()).unwrap().0;
    for sys in both {
        let c = residual_field(&sys, &cand, &grid, &opts()).unwrap().0;
        for ((p, cv), wv) in grid.points.iter().zip(&c).zip(&w) {
            let scaled = wv.unwrap() * p[2].powf(-alpha - 1.0);
            assert!((cv.unwrap() - scaled.abs()).abs() <= 1e-8 * scaled.abs().max(1.0));
        }
    }
}

#[test]
fn maxwell_and_modified_riesz_residuals_coincide() {
    let h: ScalarFn = Arc::new(|x: &[f64]| (x[0] * x[1]).sin() + x[2] * x[2] * x[0]);
    let u = u_of(h);
    let Candidate::Triple(uf) = u.clone() else { unreachable!() };
    let e = Candidate::triple(move |x: &[f64]| {
        let v = uf(x);
        [v[0], -v[1], -v[2]]
    });
    let phi = Coefficient::new(|x: &[f64]| 1.0 + 0.3 * x[0] * x[0] + x[2]);
    let grid = space_grid();
    let a = residual_field(&SystemId::GeneralModification(phi.clone()), &u, &grid, &opts()).unwrap().0;
    let b = residual_field(&SystemId::StaticMaxwell(phi), &e, &grid, &opts()).unwrap().0;
    assert_eq!(a, b);
    assert!(a.iter().any(|v| v.unwrap() > 1e-3));
}

#[test]
fn riesz_system_for_harmonic_gradient() {
    // h = x0^2 - (x1^2 + x2^2)/2 + x0 x1 x2
    let u = Candidate::triple(|x: &[f64]| [2.0 * x[0] + x[1] * x[2], x[1] - x[0] * x[2], x[2] - x[0] * x[1]]);
    let r = residual(&SystemId::SystemR, &u, &space_grid(), &opts()).unwrap();
    assert!(r.max_abs <= 1e-8, "{r:?}");
}

#[test]
fn layered_systems_from_potentials() {
    let grid = space_grid();
    // From h = x2^2 + x0, a solution of the Weinstein equation with alpha = 1.
    let u = Candidate::triple(|x: &[f64]| [1.0, 0.0, -2.0 * x[2]]);
    assert!(residual(&SystemId::SystemH, &u, &grid, &opts()).unwrap().max_abs <= 1e-8);
    for alpha in [-0.5, 1.0, 2.3] {
        let g = meridional_solution(alpha);
        let u = u_of(g.clone());
        for sys in [SystemId::HyperbolicMod { alpha }, SystemId::AxialMod { alpha }] {
            let r = residual(&sys, &u, &grid, &opts()).unwrap();
            assert!(r.max_abs <= 1e-6, "{} alpha {alpha}: {r:?}", sys.tag());
        }
        if alpha == 1.0 {
            assert!(residual(&SystemId::SystemA3, &u, &grid, &opts()).unwrap().max_abs <= 1e-6);
            assert!(residual(&SystemId::SystemH, &u, &grid, &opts()).unwrap().max_abs <= 1e-6);
        }
        let (a1, a2) = (0.4 * alpha, 0.6 * alpha);
        let r = residual(&SystemId::BihyperbolicMod { alpha1: a1, alpha2: a2 }, &u, &grid, &opts()).unwrap();
        assert!(r.max_abs <= 1e-6);
        let r = residual(&SystemId::Bihyperbolic { alpha1: a1, alpha2: a2 }, &Candidate::Scalar(g), &grid, &opts()).unwrap();
        assert!(r.max_abs <= 1e-6);
    }
}

#[test]
fn cylindrical_potential_with_azimuthal_mode_solves_axial_system() {
    let p = CylindricalSoVParams {
        alpha: 1.4,
        freq: 0.9,
        branch: Branch::Trigonometric,
        b1: 0.5,
        b2: 1.0,
        modes: vec![Mode::new(2, 1.0, -0.5, 0.6, 0.1)],
    };
    let h: ScalarFn = Arc::new(move |x: &[f64]| cylindrical_potential(&p, x[0], x[2].atan2(x[1]), x[1].hypot(x[2])).unwrap());
    let r = residual(&SystemId::AxialMod { alpha: 1.4 }, &u_of(h.clone()), &space_grid(), &opts()).unwrap();
    assert!(r.max_abs <= 1e-6);
    let c = criterion_meridional(&h, &space_grid()).unwrap();
    assert!(c.azimuthal.max_abs > 1e-2 && c.condition.max_abs > 1e-2);
}

#[test]
fn anisotropic_equation_and_system() {
    let (a00, a11, a22) = (0.7, 0.7, -1.3);
    let h: ScalarFn = Arc::new(move |x: &[f64]| x[0] * x[0] - x[1] * x[1] + x[2].powf(a22 + 1.0));
    let sys = SystemId::AnisotropicWeinstein { alpha00: a00, alpha11: a11, alpha22: a22 };
    assert!(residual(&sys, &Candidate::Scalar(h.clone()), &space_grid(), &opts()).unwrap().max_abs <= 1e-9);
    let sys = SystemId::AnisotropicSystem { alpha00: a00, alpha11: a11, alpha22: a22 };
    assert!(residual(&sys, &u_of(h), &space_grid(), &opts()).unwrap().max_abs <= 1e-7);
    // Equal exponents give x2^(-alpha-1) times the Weinstein residual.
    let alpha = 0.9;
    let g = Candidate::Scalar(meridional_solution(alpha));
    let iso = SystemId::AnisotropicWeinstein { alpha00: alpha, alpha11: alpha, alpha22: alpha };
    assert!(residual(&iso, &g, &space_grid(), &opts()).unwrap().max_abs <= 1e-6);
}

#[test]
fn plane_and_meridian_systems() {
    let plane = Grid::lattice(&[(-1.0, 1.0, 5), (0.3, 2.0, 5)]);
    for alpha in [-1.0, 0.5, 3.0] {
        let c = 1.0 / (alpha - 1.0);
        let g = Candidate::scalar(move |x: &[f64]| x[0] * x[0] + c * x[1] * x[1]);
        assert!(residual(&SystemId::CartEpd { alpha }, &g, &plane, &opts()).unwrap().max_abs <= 1e-9);
        let u = Candidate::pair(move |x: &[f64]| [2.0 * x[0], -2.0 * c * x[1]]);
        assert!(residual(&SystemId::VekuaCart { alpha }, &u, &plane, &opts()).unwrap().max_abs <= 1e-9);

        let c = 1.0 / (2.0 - alpha);
        let g = Candidate::scalar(move |x: &[f64]| x[0] * x[0] - c * x[1] * x[1]);
        assert!(residual(&SystemId::CylEpd { alpha }, &g, &plane, &opts()).unwrap().max_abs <= 1e-8);
        let u = Candidate::pair(move |x: &[f64]| [2.0 * x[0], 2.0 * c * x[1]]);
        assert!(residual(&SystemId::VekuaMerid { alpha }, &u, &plane, &opts()).unwrap().max_abs <= 1e-9);
        let e = Candidate::pair(move |x: &[f64]| [2.0 * x[0], -2.0 * c * x[1]]);
        assert!(residual(&SystemId::MaxwellMerid { alpha }, &e, &plane, &opts()).unwrap().max_abs <= 1e-9);
        // A field that is not a gradient fails the curl equation.
        let bad = Candidate::pair(|x: &[f64]| [x[1], 0.0]);
        assert!(residual(&SystemId::MaxwellMerid { alpha }, &bad, &plane, &opts()).unwrap().max_abs >= 1.0 - 1e-9);
    }
    for f in [Elementary::Exp, Elementary::Sin, Elementary::Ln, Elementary::Inverse] {
        let u = Candidate::pair(move |x: &[f64]| {
            let v = f.eval(AxialPair::new(x[0], x[1]));
            [v.u0, v.urho]
        });
        assert!(residual(&SystemId::CrMerid, &u, &plane, &opts()).unwrap().max_abs <= 1e-8, "{f:?}");
        let conj = Candidate::pair(move |x: &[f64]| {
            let v = f.eval(AxialPair::new(x[0], x[1]));
            [v.u0, -v.urho]
        });
        assert!(residual(&SystemId::CrMerid, &conj, &plane, &opts()).unwrap().max_abs > 1e-3);
    }
}

#[test]
fn meridional_criterion() {
    let grid = space_grid();
    let g: ScalarFn = Arc::new(|x: &[f64]| (x[0] + x[1].hypot(x[2])).sin());
    let c = criterion_meridional(&g, &grid).unwrap();
    assert!(c.condition.max_abs <= 1e-9 && c.azimuthal.max_abs <= 1e-9);
    let h: ScalarFn = Arc::new(|x: &[f64]| x[1]);
    let c = criterion_meridional(&h, &grid).unwrap();
    let want = grid.points.iter().map(|p| p[2].abs()).fold(0.0, f64::max);
    assert!((c.condition.max_abs - want).abs() < 1e-9);
    assert!((c.azimuthal.max_abs - want).abs() < 1e-9);
}

fn meridional_potentials() -> Vec<ScalarFn> {
    let rho = |x: &[f64]| x[1].hypot(x[2]);
    vec![
        Arc::new(move |x: &[f64]| x[0].exp() * rho(x).cos()),
        Arc::new(move |x: &[f64]| rho(x).powi(2)),
        Arc::new(move |x: &[f64]| x[0] * rho(x).powi(3)),
        Arc::new(move |x: &[f64]| (1.0 + rho(x).powi(2)).ln()),
        Arc::new(move |x: &[f64]| 1.0 / (x[0] * x[0] + rho(x).powi(2) + 0.5)),
        Arc::new(move |x: &[f64]| (x[0] * rho(x)).sin()),
        Arc::new(move |x: &[f64]| rho(x).sqrt() * (2.0 * x[0]).cosh()),
        meridional_solution(0.5),
        meridional_solution(2.0),
        meridional_solution(-0.8),
    ]
}

#[test]
fn weinstein_and_axial_agree_on_meridional_potentials() {
    let grid = space_grid();
    for (k, h) in meridional_potentials().into_iter().enumerate() {
        for alpha in [-0.8, 0.5, 2.0] {
            let r = criterion_weinstein_axial(&h, alpha, &grid).unwrap();
            assert!(r.difference.max_abs <= 1e-8, "potential {k}: {r:?}");
            assert!(r.condition.max_abs <= 1e-9);
        }
    }
}

#[test]
fn bihyperbolic_criterion() {
    let grid = space_grid();
    for h in meridional_potentials() {
        let r = criterion_bihyperbolic(&h, 0.7, -0.4, &grid).unwrap();
        assert!(r.difference.max_abs <= 1e-8);
    }
    let lin: ScalarFn = Arc::new(|x: &[f64]| x[0]);
    let r = criterion_bihyperbolic(&lin, 1.0, 1.0, &grid).unwrap();
    assert!(r.first.max_abs <= 1e-10 && r.second.max_abs <= 1e-10 && r.condition.max_abs <= 1e-10, "{r:?}");
    let prod: ScalarFn = Arc::new(|x: &[f64]| x[1] * x[2]);
    let r = criterion_bihyperbolic(&prod, 1.0, 1.0, &grid).unwrap();
    let want = grid.points.iter().map(|p| (p[2] * p[2] - p[1] * p[1]).abs()).fold(0.0, f64::max);
    assert!((r.condition.max_abs - want).abs() < 1e-9);
    assert!(r.difference.max_abs > 0.1);
}

/// Classical RK4 for s'' = (a/x) s' - l^2 s from x = 1 with a fixed number of
/// steps, so the result is smooth in the endpoint.
fn rk4_solution(a: f64, l: f64, s0: f64, ds0: f64) -> impl Fn(f64) -> f64 + Sync {
    move |x: f64| {
        let n = 4000;
        let h = (x - 1.0) / n as f64;
        let f = |t: f64, y: [f64; 2]| [y[1], a / t * y[1] - l * l * y[0]];
        let mut y = [s0, ds0];
        let mut t = 1.0;
        for _ in 0..n {
            let k1 = f(t, y);
            let k2 = f(t + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
            let k3 = f(t + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
            let k4 = f(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            for k in 0..2 {
                y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
            }
            t += h;
        }
        y[0]
    }
}

#[test]
fn emden_fowler_transform() {
    let xs: Vec<f64> = (1..=20).map(|i| 0.2 * i as f64).collect();
    let r = emden_fowler_check(0.0, 3, &|x: f64| (3.0 * x).sin(), &xs).unwrap();
    assert!(r.original.max_abs <= 1e-8 && r.transformed.max_abs <= 1e-8);
    let r = emden_fowler_check(1.0, 0, &|x: f64| 2.0 - 0.5 * x * x, &xs).unwrap();
    assert!(r.original.max_abs <= 1e-9 && r.transformed.max_abs <= 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let a = rng.gen_range(-0.8..2.0);
        let l = rng.gen_range(1..4);
        let s = rk4_solution(a, f64::from(l), 1.0, 0.3);
        let xs: Vec<f64> = (0..10).map(|i| 0.6 + 0.15 * i as f64).collect();
        let r = emden_fowler_check(a, l, &s, &xs).unwrap();
        assert!(r.original.max_abs <= 1e-6 && r.transformed.max_abs <= 1e-6, "{a} {l}: {r:?}");
    }
    assert!(matches!(emden_fowler_check(-1.0, 1, &|x: f64| x, &xs), Err(Error::Domain(_))));
    assert!(matches!(emden_fowler_check(0.0, 1, &|x: f64| x, &[0.0]), Err(Error::Domain(_))));
}

#[test]
fn epd_dependent_variable_change() {
    let grid = Grid::lattice(&[(-1.0, 1.0, 4), (0.3, 2.0, 5)]);
    // alpha = lambda = 0, plus branch: g = w and both equations are the axisymmetric Laplacian.
    let w: ScalarFn = Arc::new(|x: &[f64]| x[0].exp() * bessel(BesselKind::J, 0.0, x[1]).unwrap());
    let r = epd_transform_check(0.0, 0, Sign::Plus, &w, &grid).unwrap();
    assert_eq!(r.exponent, 0.0);
    assert!(r.source.max_abs <= 1e-8 && r.target.max_abs <= 1e-8, "{r:?}");
    // Steep negative-order solutions are kept away from the axis.
    let grid = Grid::lattice(&[(-1.0, 1.0, 4), (0.8, 2.5, 5)]);
    for (alpha, lambda) in [(1.0, 0), (0.5, 1), (-1.2, 2), (2.0, 3)] {
        for sign in [Sign::Plus, Sign::Minus] {
            let d = f64::sqrt(alpha * alpha + 4.0 * f64::from(lambda * lambda));
            let a_w = if sign == Sign::Plus { -d } else { d };
            let w: ScalarFn = Arc::new(move |x: &[f64]| {
                meridional_product(a_w, Branch::Trigonometric, 1.2, (0.4, 1.0), (1.0, 0.5), x[0], x[1]).unwrap()
            });
            let size = grid.points.iter().map(|x| w(x).abs()).fold(1.0, f64::max);
            let r = epd_transform_check(alpha, lambda, sign, &w, &grid).unwrap();
            let ok = r.target.max_abs <= 1e-7 * size && r.source.max_abs <= 1e-7 * size;
            assert!(ok, "{alpha} {lambda} {sign:?}: {r:?}");
        }
    }
}

#[test]
fn errors_are_reported() {
    let h = Candidate::scalar(|x: &[f64]| x[0]);
    let bad_dim = Grid::from_points(vec![vec![0.0, 1.0]]);
    assert!(matches!(residual(&SystemId::Weinstein { alpha: 1.0 }, &h, &bad_dim, &opts()), Err(Error::Domain(_))));
    let below = Grid::from_points(vec![vec![0.0, 1.0, -0.5]]);
    assert!(matches!(residual(&SystemId::Weinstein { alpha: 1.0 }, &h, &below, &opts()), Err(Error::Domain(_))));
    let p = Candidate::pair(|_| [0.0, 0.0]);
    assert_eq!(
        residual(&SystemId::Weinstein { alpha: 1.0 }, &p, &space_grid(), &opts()).unwrap_err(),
        Error::ArityMismatch { expected: 1, got: 2 }
    );
}

#[test]
fn reports_are_deterministic_under_parallelism() {
    let h = Candidate::scalar(|x: &[f64]| (x[0] * 3.0).sin() * x[2].powf(1.3) + x[1]);
    let grid = Grid::lattice(&[(-1.0, 1.0, 10), (-1.0, 1.0, 10), (0.2, 2.0, 10)]);
    let a = residual(&SystemId::Weinstein { alpha: 0.4 }, &h, &grid, &opts()).unwrap();
    for _ in 0..3 {
        assert_eq!(residual(&SystemId::Weinstein { alpha: 0.4 }, &h, &grid, &opts()).unwrap(), a);
    }
    assert!(a.max_abs >= a.mean_abs && a.mean_abs >= 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn report_bounds(values in prop::collection::vec(-1e3f64..1e3, 1..50)) {
        let pts: Vec<Vec<f64>> = (0..values.len()).map(|i| vec![i as f64]).collect();
        let opt: Vec<Option<f64>> = values.iter().map(|v| Some(*v)).collect();
        let r = ResidualReport::from_values(&pts, &opt, 0.0);
        prop_assert!(r.max_abs >= r.mean_abs && r.mean_abs >= 0.0);
        let i = r.worst_point[0] as usize;
        prop_assert_eq!(values[i].abs(), r.max_abs);
        prop_assert!(values[..i].iter().all(|v| v.abs() < r.max_abs));
    }

    #[test]
    fn power_solutions_of_weinstein(alpha in -2.0f64..3.0, x0 in -2.0f64..2.0, x1 in -2.0f64..2.0, x2 in 0.3f64..2.0) {
        let h = Candidate::scalar(move |x: &[f64]| x[2].powf(alpha + 1.0) + x[0] - x[1]);
        let grid = Grid::from_points(vec![vec![x0, x1, x2]]);
        let r = residual(&SystemId::Weinstein { alpha }, &h, &grid, &FdOptions::default()).unwrap();
        prop_assert!(r.max_abs <= 1e-9);
    }
}
