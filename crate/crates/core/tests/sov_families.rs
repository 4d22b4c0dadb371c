use std::f64::consts::PI;
use std::sync::Arc;

use meridian_core::pde::{residual, Candidate, FdOptions, Grid, SystemId};
use meridian_core::rq::{MeridianPoint, PolylinePath};
use meridian_core::sov::*;
use meridian_core::special::{bessel, BesselKind};
use meridian_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mp(x0: f64, rho: f64) -> MeridianPoint {
    MeridianPoint::new(x0, rho).unwrap()
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, lo: [f64; 3], hi: [f64; 3]) -> Grid {
    Grid::from_points(
        (0..n)
            .map(|_| (0..3).map(|i| rng.gen_range(lo[i]..hi[i])).collect())
            .collect(),
    )
}

fn non_integer(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    loop {
        let b: f64 = rng.gen_range(lo..hi);
        if (b - b.round()).abs() > 0.05 {
            return b;
        }
    }
}

fn random_mode(rng: &mut ChaCha8Rng) -> Mode {
    Mode::new(
        rng.gen_range(0..3),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

#[test]
fn half_integer_cartesian_mode_is_classical_harmonic() {
    let p = CartesianSoVParams { alpha: 0.0, beta: 1.0, b1: 1.0, b2: 1.0, modes: vec![Mode::new(0, 1.0, 0.0, 1.0, 0.0)] };
    for &(x0, x1, x2) in &[(0.3, 1.0, 0.5), (-1.0, 2.0, 2.5), (0.0, 0.0, 1.0)] {
        let h = cartesian_potential(&p, [x0, x1, x2]).unwrap();
        let want = (2.0 / PI).sqrt() * f64::exp(x0) * x2.sin();
        assert!((h - want).abs() <= 1e-12 * want.abs().max(1.0));
    }
    let cand = Candidate::scalar(move |x: &[f64]| cartesian_potential(&p, [x[0], x[1], x[2]]).unwrap());
    let grid = Grid::lattice(&[(-1.0, 1.0, 4), (-1.0, 1.0, 3), (0.2, 3.0, 5)]);
    let r = residual(&SystemId::Weinstein { alpha: 0.0 }, &cand, &grid, &FdOptions::default()).unwrap();
    assert!(r.max_abs <= 1e-6, "{r:?}");
}

#[test]
fn cartesian_family_solves_weinstein() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let alpha = rng.gen_range(-1.5..3.0);
        let beta = non_integer(&mut rng, 0.3, 2.7);
        let mut modes = Vec::new();
        while modes.len() < 2 {
            let m = random_mode(&mut rng);
            if (m.lambda as f64 - beta).abs() > 0.05 {
                modes.push(m);
            }
        }
        let p = CartesianSoVParams { alpha, beta, b1: rng.gen_range(-1.0..1.0), b2: rng.gen_range(-1.0..1.0), modes };
        let q = p.clone();
        let cand = Candidate::scalar(move |x: &[f64]| cartesian_potential(&q, [x[0], x[1], x[2]]).unwrap());
        let grid = random_points(&mut rng, 100, [-1.0, -PI, 0.3], [1.0, PI, 2.5]);
        let r = residual(&SystemId::Weinstein { alpha }, &cand, &grid, &FdOptions::default()).unwrap();
        assert!(r.max_abs <= 1e-6, "{p:?}: {r:?}");
    }
}

#[test]
fn cartesian_gradient_matches_differences() {
    let p = CartesianSoVParams { alpha: 0.7, beta: 1.3, b1: 0.4, b2: -0.2, modes: vec![Mode::new(1, 1.0, 0.5, 0.8, -0.3), Mode::new(2, -0.4, 1.0, 0.5, 0.2)] };
    let x = [0.2, 0.9, 1.1];
    let (_, g) = cartesian_eval(&p, x).unwrap();
    for (i, gi) in g.iter().enumerate() {
        let f = |t: f64| {
            let mut y = x;
            y[i] = t;
            cartesian_potential(&p, y).unwrap()
        };
        let d = (f(x[i] + 1e-5) - f(x[i] - 1e-5)) / 2e-5;
        assert!((d - gi).abs() <= 1e-7 * gi.abs().max(1.0));
    }
}

#[test]
fn cartesian_family_rejects_bad_input() {
    let p = CartesianSoVParams { alpha: 0.0, beta: 1.5, b1: 1.0, b2: 0.0, modes: vec![Mode::new(0, 1.0, 0.0, 1.0, 0.0)] };
    assert!(matches!(cartesian_potential(&p, [0.0, 0.0, -1.0]), Err(Error::Domain(_))));
    let empty = CartesianSoVParams { modes: vec![], ..p };
    assert!(matches!(empty.validate(), Err(Error::InvalidParams(_))));
}

#[test]
fn planar_euler_branch_solves_weinstein() {
    for alpha in [-1.0, -0.5, 0.0, 1.0, 2.5] {
        let cand = Candidate::scalar(move |x: &[f64]| euler_planar(alpha, 1.3, -0.7, x[2]).unwrap());
        let grid = Grid::lattice(&[(-1.0, 1.0, 3), (0.0, 1.0, 2), (0.3, 2.0, 6)]);
        let r = residual(&SystemId::Weinstein { alpha }, &cand, &grid, &FdOptions::default()).unwrap();
        assert!(r.max_abs <= 1e-9, "alpha {alpha}: {r:?}");
    }
}

fn cylindrical_space(p: CylindricalSoVParams) -> Candidate {
    Candidate::scalar(move |x: &[f64]| cylindrical_potential(&p, x[0], x[2].atan2(x[1]), x[1].hypot(x[2])).unwrap())
}

#[test]
fn cylindrical_family_order_one() {
    let p = CylindricalSoVParams {
        alpha: 2.0,
        freq: 1.0,
        branch: Branch::Hyperbolic,
        b1: 1.0,
        b2: 0.0,
        modes: vec![Mode::new(0, 1.0, 0.0, 1.0, 0.0)],
    };
    for &(x0, rho) in &[(0.0, 0.5), (0.4, 1.7), (-1.0, 3.0)] {
        let h = cylindrical_potential(&p, x0, 1.0, rho).unwrap();
        let want = f64::cosh(x0) * rho * bessel(BesselKind::J, 1.0, rho).unwrap();
        assert!((h - want).abs() <= 1e-14 * want.abs().max(1.0));
    }
}

#[test]
fn cylindrical_family_solves_axial_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for draw in 0..20 {
        let alpha = rng.gen_range(-1.5..3.0);
        let branch = if draw % 2 == 0 { Branch::Hyperbolic } else { Branch::Trigonometric };
        let p = CylindricalSoVParams {
            alpha,
            freq: rng.gen_range(0.3..2.0),
            branch,
            b1: rng.gen_range(-1.0..1.0),
            b2: rng.gen_range(-1.0..1.0),
            modes: vec![random_mode(&mut rng), random_mode(&mut rng)],
        };
        let grid = random_points(&mut rng, 100, [-1.0, -2.0, -2.0], [1.0, 2.0, 2.0]);
        let grid = Grid::from_points(grid.points.into_iter().filter(|x| x[1].hypot(x[2]) > 0.3).collect());
        let r = residual(&SystemId::AxialEq { alpha }, &cylindrical_space(p.clone()), &grid, &FdOptions::default()).unwrap();
        assert!(r.max_abs <= 1e-6, "{p:?}: {r:?}");
    }
}

#[test]
fn zero_lambda_modes_match_meridional_subclasses() {
    for branch in [Branch::Hyperbolic, Branch::Trigonometric] {
        for alpha in [0.0, 0.6, 2.0, 3.3] {
            let p = CylindricalSoVParams { alpha, freq: 1.4, branch, b1: 0.3, b2: 0.8, modes: vec![Mode::new(0, 1.0, 0.0, 0.7, -0.4)] };
            for &(x0, rho) in &[(0.1, 0.4), (-0.8, 1.5), (1.2, 2.9)] {
                let a = cylindrical_potential(&p, x0, 0.3, rho).unwrap();
                let b = meridional_product(alpha, branch, 1.4, (0.3, 0.8), (0.7, -0.4), x0, rho).unwrap();
                assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0), "{branch:?} alpha {alpha}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn meridional_subclasses_solve_epd() {
    for branch in [Branch::Hyperbolic, Branch::Trigonometric] {
        for alpha in [-1.3, -0.5, 0.0, 1.0, 2.5] {
            let cand = Candidate::scalar(move |x: &[f64]| {
                meridional_product(alpha, branch, 1.1, (1.0, 0.5), (0.6, 0.3), x[0], x[1]).unwrap()
            });
            let grid = Grid::lattice(&[(-1.0, 1.0, 5), (0.3, 2.5, 8)]);
            let r = residual(&SystemId::CylEpd { alpha }, &cand, &grid, &FdOptions::default()).unwrap();
            assert!(r.max_abs <= 1e-6, "{branch:?} alpha {alpha}: {r:?}");
        }
    }
}

#[test]
fn unit_epd_parameter_gives_harmonic_functions() {
    // alpha = 1: rho^(1/2) J_(1/2)(b rho) cosh(b x0) = sqrt(2/(pi b)) sin(b rho) cosh(b x0).
    let b = 0.9;
    let cand = Candidate::scalar(move |x: &[f64]| meridional_product(1.0, Branch::Hyperbolic, b, (1.0, 0.0), (1.0, 0.0), x[0], x[1]).unwrap());
    let grid = Grid::lattice(&[(-1.0, 1.0, 5), (0.3, 2.5, 5)]);
    for p in &grid.points {
        let want = (2.0 / (PI * b)).sqrt() * (b * p[1]).sin() * (b * p[0]).cosh();
        let got = meridional_product(1.0, Branch::Hyperbolic, b, (1.0, 0.0), (1.0, 0.0), p[0], p[1]).unwrap();
        assert!((got - want).abs() <= 1e-13);
    }
    let r = residual(&SystemId::CylEpd { alpha: 1.0 }, &cand, &grid, &FdOptions::default()).unwrap();
    assert!(r.max_abs <= 1e-6);
}

#[test]
fn cylindrical_euler_branch_and_transverse_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let alpha = rng.gen_range(-1.5..3.0);
        let m = random_mode(&mut rng);
        let h = Candidate::scalar(move |x: &[f64]| {
            transverse_potential(alpha, &m, x[2].atan2(x[1]), x[1].hypot(x[2])).unwrap().h
        });
        let e = Candidate::pair(move |x: &[f64]| {
            let v = transverse_potential(alpha, &m, x[1].atan2(x[0]), x[0].hypot(x[1])).unwrap();
            [v.e1, v.e2]
        });
        let space = random_points(&mut rng, 100, [-1.0, -2.0, -2.0], [1.0, 2.0, 2.0]);
        let space = Grid::from_points(space.points.into_iter().filter(|x| x[1].hypot(x[2]) > 0.3).collect());
        let plane = Grid::from_points(space.points.iter().map(|x| vec![x[1], x[2]]).collect());
        let r = residual(&SystemId::AxialEq { alpha }, &h, &space, &FdOptions::default()).unwrap();
        assert!(r.max_abs <= 1e-6, "{m:?} alpha {alpha}: {r:?}");
        let r = residual(&SystemId::MaxwellTransverse { alpha }, &e, &plane, &FdOptions::default()).unwrap();
        assert!(r.max_abs <= 1e-6, "{m:?} alpha {alpha}: {r:?}");
    }
}

#[test]
fn transverse_field_is_gradient() {
    let m = Mode::new(2, 0.7, -0.4, 1.1, 0.3);
    let alpha = 0.8;
    let h = |x1: f64, x2: f64| transverse_potential(alpha, &m, x2.atan2(x1), x1.hypot(x2)).unwrap().h;
    for &(x1, x2) in &[(0.5, 0.6), (-1.0, 0.3), (0.2, -1.4)] {
        let v = transverse_potential(alpha, &m, f64::atan2(x2, x1), f64::hypot(x1, x2)).unwrap();
        let e1 = (h(x1 + 1e-6, x2) - h(x1 - 1e-6, x2)) / 2e-6;
        let e2 = (h(x1, x2 + 1e-6) - h(x1, x2 - 1e-6)) / 2e-6;
        assert!((v.e1 - e1).abs() < 1e-7 && (v.e2 - e2).abs() < 1e-7);
    }
    let flat = transverse_potential(alpha, &Mode::new(0, 1.0, 0.0, 1.0, 0.5), 0.9, 1.3).unwrap();
    let (pp, pm) = euler_exponents(alpha, 0);
    let du = pp * 1.3f64.powf(pp - 1.0) + 0.5 * pm * 1.3f64.powf(pm - 1.0);
    assert!((flat.e1 - du * 0.9f64.cos()).abs() < 1e-14);
    assert!((flat.e2 - du * 0.9f64.sin()).abs() < 1e-14);
}

#[test]
fn stream_function_examples() {
    let base = mp(0.0, 1.0);
    let s = stokes_stream(|p: MeridianPoint| p.x0(), 1.0, base);
    for &(x0, rho) in &[(1.0, 2.0), (-0.5, 0.3), (2.0, 1.0)] {
        assert!((s(mp(x0, rho)) - (rho - 1.0)).abs() < 1e-10);
    }
    let s = stokes_stream(|p: MeridianPoint| p.x0() * p.x0() - p.rho() * p.rho(), 1.0, base);
    for &(x0, rho) in &[(1.0, 2.0), (-0.5, 0.3), (2.0, 1.0)] {
        assert!((s(mp(x0, rho)) - 2.0 * x0 * rho).abs() < 1e-9);
    }
}

#[test]
fn stream_function_is_path_independent_and_solves_adjoint_equation() {
    let alpha = 3.0;
    // x0^2 - rho^2/(2 - alpha) solves the EPD equation.
    let g = move |p: MeridianPoint| p.x0() * p.x0() + p.rho() * p.rho();
    let a = mp(-0.5, 0.4);
    let b = mp(1.2, 2.1);
    let direct = stokes_stream_along(&g, alpha, &PolylinePath::segment(a, b).unwrap()).unwrap();
    let detour = stokes_stream_along(&g, alpha, &PolylinePath::new(vec![a, mp(0.0, 3.0), mp(2.0, 0.5), b]).unwrap()).unwrap();
    assert!((direct - detour).abs() <= 1e-8 * direct.abs().max(1.0));

    let base = mp(0.0, 1.0);
    let s = Arc::new(stokes_stream(g, alpha, base));
    let s2 = s.clone();
    let pair = Candidate::pair(move |x: &[f64]| [x[0] * x[0] + x[1] * x[1], s2(mp(x[0], x[1]))]);
    let grid = Grid::lattice(&[(-1.0, 1.0, 4), (0.4, 2.0, 4)]);
    let r = residual(&SystemId::StokesBeltrami { alpha }, &pair, &grid, &FdOptions::default()).unwrap();
    assert!(r.max_abs <= 1e-6, "{r:?}");
    let hat = Candidate::scalar(move |x: &[f64]| s(mp(x[0], x[1])));
    let r = residual(&SystemId::CylEpd { alpha: 2.0 - alpha }, &hat, &grid, &FdOptions::default()).unwrap();
    assert!(r.max_abs <= 1e-6, "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euler_cylindrical_solves_its_ode(alpha in -3.0f64..3.0, lambda in 0i32..4, rho in 0.2f64..4.0) {
        let y = |r: f64| euler_cylindrical(alpha, lambda, 0.8, -0.3, r).unwrap();
        let h = 1e-3 * rho;
        let d1 = (y(rho + h) - y(rho - h)) / (2.0 * h);
        let d2 = (y(rho + h) - 2.0 * y(rho) + y(rho - h)) / (h * h);
        let l2 = f64::from(lambda).powi(2);
        let r = rho * rho * d2 - (alpha - 1.0) * rho * d1 - l2 * y(rho);
        let scale = rho * rho * d2.abs() + (alpha - 1.0).abs() * rho * d1.abs() + l2 * y(rho).abs();
        prop_assert!(r.abs() <= 1e-4 * scale.max(1e-3));
    }

    #[test]
    fn euler_planar_is_power_law(alpha in -3.0f64..3.0, x2 in 0.1f64..5.0) {
        let v = euler_planar(alpha, 2.0, 1.0, x2).unwrap();
        prop_assert!((v - (2.0 * x2.powf(alpha + 1.0) + 1.0)).abs() <= 1e-15 * v.abs().max(1.0));
    }
}
