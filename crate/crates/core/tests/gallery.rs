use std::collections::BTreeMap;
use std::f64::consts::PI;

use meridian_core::efg::{efg_assemble, singular_residuals, trace_singular_set, SingularBranch, Window};
use meridian_core::fd;
use meridian_core::gallery::*;
use meridian_core::pde::{residual, Candidate, FdOptions, Grid, SystemId};
use meridian_core::rq::MeridianPoint;
use meridian_core::special::{bessel, bessel_derivative, BesselKind};
use meridian_core::Error;
use proptest::prelude::*;

fn mp(x0: f64, rho: f64) -> MeridianPoint {
    MeridianPoint::new(x0, rho).unwrap()
}

fn all() -> Vec<GalleryParams> {
    vec![
        GalleryParams::BesselJ0 { beta: 1.3 },
        GalleryParams::BesselI0 { mu: 2.0 },
        GalleryParams::Mobius { a: 0.5, c: 1.5, d: 0.8 },
        GalleryParams::Cubic { a3: 0.7, a1: -0.4 },
        GalleryParams::Power { am1: 1.0, am2: -1.0 },
        GalleryParams::ExpPair { b1: 1.0, b2: 2.0 },
    ]
}

#[test]
fn reference_field_values() {
    let m = make_field(&GalleryParams::Mobius { a: 0.0, c: 1.0, d: 0.0 }).unwrap();
    assert_eq!((m.e0_at(1.0, 1.0), m.erho_at(1.0, 1.0)), (-0.5, -0.5));
    let c = make_field(&GalleryParams::Cubic { a3: 1.0, a1: 0.0 }).unwrap();
    assert_eq!((c.e0_at(1.0, 1.0), c.erho_at(1.0, 1.0)), (-2.0, -2.0));
    // div E = Erho / rho at alpha = 1: 1/2 - 1/2.
    let p = make_field(&GalleryParams::Power { am1: 1.0, am2: -1.0 }).unwrap();
    assert_eq!(p.erho_at(1.0, 1.0), 0.0);
}

#[test]
fn fields_solve_meridional_maxwell_system() {
    let grid = Grid::lattice(&[(-1.5, 1.5, 7), (0.3, 2.5, 6)]);
    for p in all() {
        let f = make_field(&p).unwrap();
        let r = residual(&SystemId::MaxwellMerid { alpha: p.alpha() }, &f.candidate(), &grid, &FdOptions::default())
            .unwrap();
        assert!(r.max_abs <= 1e-6, "{p:?}: {r:?}");
    }
}

#[test]
fn potentials_generate_fields_and_solve_epd() {
    let grid = Grid::lattice(&[(-1.5, 1.5, 7), (0.3, 2.5, 6)]);
    for p in all() {
        let f = make_field(&p).unwrap();
        let g = potential(&p).unwrap();
        for x in &grid.points {
            let (x0, rho) = (x[0], x[1]);
            let gx = fd::first(|t| g(t, rho), x0, 1e-3);
            let gr = fd::first(|t| g(x0, t), rho, 1e-3 * rho);
            assert!((gx - f.e0_at(x0, rho)).abs() <= 1e-8 * (1.0 + gx.abs()), "{p:?} at {x:?}");
            assert!((gr - f.erho_at(x0, rho)).abs() <= 1e-8 * (1.0 + gr.abs()), "{p:?} at {x:?}");
        }
        let gg = g.clone();
        let cand = Candidate::scalar(move |x: &[f64]| gg(x[0], x[1]));
        let r = residual(&SystemId::CylEpd { alpha: p.alpha() }, &cand, &grid, &FdOptions::default()).unwrap();
        assert!(r.max_abs <= 1e-6, "{p:?}: {r:?}");
    }
}

#[test]
fn bessel_fields_match_special_function_derivatives() {
    let beta = 1.3;
    let f = make_field(&GalleryParams::BesselJ0 { beta }).unwrap();
    for (x0, rho) in [(0.2, 0.5), (-1.0, 2.0), (0.7, 3.5)] {
        let e = (beta * x0).exp();
        let z = beta * rho;
        let jp = bessel_derivative(BesselKind::J, 0.0, z).unwrap();
        assert!((f.e0_at(x0, rho) - beta * e * bessel(BesselKind::J, 0.0, z).unwrap()).abs() < 1e-14);
        assert!((f.erho_at(x0, rho) - beta * e * jp).abs() < 1e-14);
        let j1p = bessel_derivative(BesselKind::J, 1.0, z).unwrap();
        let jet = f.jet(x0, rho).unwrap();
        assert!((jet.d_x0 - beta * beta * e * jp).abs() < 1e-13);
        assert!((jet.d_rho + beta * beta * e * j1p).abs() < 1e-13);
    }
    let mu = 2.0;
    let f = make_field(&GalleryParams::BesselI0 { mu }).unwrap();
    for (x0, rho) in [(0.2, 0.5), (-1.0, 2.0), (0.7, 1.5)] {
        let z = mu * rho;
        let ip = bessel_derivative(BesselKind::I, 0.0, z).unwrap();
        let i1p = bessel_derivative(BesselKind::I, 1.0, z).unwrap();
        assert!((f.erho_at(x0, rho) - mu * (mu * x0).cos() * ip).abs() < 1e-12);
        let jet = f.jet(x0, rho).unwrap();
        assert!((jet.d_rho - mu * mu * (mu * x0).cos() * i1p).abs() < 1e-12);
    }
}

#[test]
fn exp_divergence_matches_factored_form() {
    let (b1, b2) = (0.7, 1.9);
    let f = make_field(&GalleryParams::ExpPair { b1, b2 }).unwrap();
    for (x0, rho) in [(0.3, 0.4), (-0.5, 2.2), (1.0, 5.0)] {
        let div = f.erho_at(x0, rho) / rho;
        let factored = ((b2 - b1) * x0).exp() * (b1 * rho).sin() - (b2 * rho).sin();
        let cleared = div * rho * (b2 * x0).exp();
        assert!((cleared - factored).abs() < 1e-12);
        let t = efg_assemble(&f, 0.4, &mp(x0, rho)).unwrap();
        assert!((t.invariants.i1 - div).abs() < 1e-12);
    }
    // rho = pi m / b1 with b2 = 2 b1.
    let g = make_field(&GalleryParams::ExpPair { b1: 1.5, b2: 3.0 }).unwrap();
    for m in 1..4 {
        assert!(g.erho_at(0.4, PI * m as f64 / 1.5).abs() < 1e-10);
    }
}

#[test]
fn traced_contours_lie_on_predicted_surfaces() {
    let cases = [
        (GalleryParams::Cubic { a3: 1.0, a1: 1.0 }, Window { x0: (-2.0, 2.0), rho: (0.05, 3.0) }),
        (GalleryParams::Cubic { a3: 1.0, a1: -1.0 }, Window { x0: (-2.0, 2.0), rho: (0.05, 3.0) }),
        (GalleryParams::Cubic { a3: -2.0, a1: 0.0 }, Window { x0: (-2.0, 2.0), rho: (0.05, 3.0) }),
        (GalleryParams::Power { am1: 1.0, am2: -1.0 }, Window { x0: (-1.0, 3.0), rho: (0.05, 2.0) }),
        (GalleryParams::Power { am1: -2.0, am2: -1.5 }, Window { x0: (-2.0, 2.0), rho: (0.05, 2.0) }),
        (GalleryParams::ExpPair { b1: 1.0, b2: 2.0 }, Window { x0: (-3.0, 3.0), rho: (0.05, 7.0) }),
        (GalleryParams::ExpPair { b1: 0.8, b2: 1.3 }, Window { x0: (-2.0, 2.0), rho: (0.05, 8.0) }),
        (GalleryParams::BesselJ0 { beta: 1.3 }, Window { x0: (-1.0, 1.0), rho: (0.05, 9.0) }),
    ];
    for (p, w) in cases {
        let f = make_field(&p).unwrap();
        let surfaces = predicted_singular_surface(&p).unwrap();
        let f1_surface = surfaces.iter().find(|s| s.branch == SingularBranch::F1).unwrap();
        let lines = trace_singular_set(&f, p.alpha(), w, 160).unwrap();
        let verts: Vec<[f64; 2]> =
            lines.iter().filter(|l| l.branch == SingularBranch::F1).flat_map(|l| l.vertices.clone()).collect();
        assert!(!verts.is_empty(), "{p:?}");
        for v in verts {
            assert!(f1_surface.residual(v[0], v[1]).abs() <= 1e-6, "{p:?} {v:?}: {}", f1_surface.residual(v[0], v[1]));
        }
    }
}

#[test]
fn bessel_j0_lines_are_first_order_zeros() {
    let beta = 1.3;
    let f = make_field(&GalleryParams::BesselJ0 { beta }).unwrap();
    let w = Window { x0: (-1.0, 1.0), rho: (0.05, 9.0) };
    let lines = trace_singular_set(&f, 0.0, w, 160).unwrap();
    // Zeros of J1: 3.8317, 7.0156, 10.1735.
    let j1_zeros = [3.831_705_970_207_512, 7.015_586_669_815_619, 10.173_468_135_062_722];
    for l in lines.iter().filter(|l| l.branch == SingularBranch::F1) {
        for v in &l.vertices {
            assert!(j1_zeros.iter().any(|z| (v[1] - z / beta).abs() < 1e-9), "{v:?}");
        }
    }
}

#[test]
fn closed_form_second_branch_agrees_at_unit_frequency() {
    // With beta = mu = 1 the argument and rho derivatives coincide.
    let p = GalleryParams::BesselJ0 { beta: 1.0 };
    let f = make_field(&p).unwrap();
    let s = predicted_singular_surface(&p).unwrap();
    let f2 = s.iter().find(|s| s.branch == SingularBranch::F2).unwrap();
    for (x0, rho) in [(0.0, 0.7), (0.5, 2.0), (-0.3, 4.4)] {
        let (_, got) = singular_residuals(&f, &mp(x0, rho), 0.0).unwrap();
        assert!((got - (2.0 * x0).exp() * f2.residual(x0, rho)).abs() < 1e-12);
    }
    let p = GalleryParams::BesselI0 { mu: 1.0 };
    let f = make_field(&p).unwrap();
    let s = predicted_singular_surface(&p).unwrap();
    let f2 = s.iter().find(|s| s.branch == SingularBranch::F2).unwrap();
    for (x0, rho) in [(0.0, 0.7), (0.5, 2.0), (-0.3, 1.4)] {
        let (_, got) = singular_residuals(&f, &mp(x0, rho), 0.0).unwrap();
        assert!((got - f2.residual(x0, rho)).abs() < 1e-12);
    }
}

#[test]
fn quadric_predicates() {
    assert_eq!(cubic_quadric(1.0, 3.0), Some(Quadric::OneSheetedHyperboloid));
    assert_eq!(cubic_quadric(-1.0, 3.0), Some(Quadric::TwoSheetedHyperboloid));
    assert_eq!(cubic_quadric(1.0, 0.0), Some(Quadric::Cone));
    let cone = predicted_singular_surface(&GalleryParams::Cubic { a3: 1.0, a1: 0.0 }).unwrap();
    let s = 3f64.sqrt();
    assert!(cone[0].contains([1.0, s * 0.6, s * 0.8], 1e-12));
    assert!(!cone[0].contains([1.0, 1.0, 0.0], 1e-6));
    let sphere = predicted_singular_surface(&GalleryParams::Power { am1: 1.0, am2: -1.0 }).unwrap();
    assert!(sphere[0].contains([1.0, 0.0, 1.0], 1e-12));
    assert!(sphere[0].contains([2.0, 0.0, 0.0], 1e-12));
}

#[test]
fn mobius_root_formulas() {
    let p = GalleryParams::Mobius { a: 0.0, c: 1.0, d: 0.0 };
    let f = make_field(&p).unwrap();
    let t = efg_assemble(&f, 0.0, &mp(1.0, 1.0)).unwrap();
    let exact = mobius_roots(&p, 1.0, 1.0, MobiusRootFormula::Exact).unwrap();
    assert_eq!(exact, [-0.5, 0.5, -0.5]);
    assert!(!compare_roots(exact, t.roots_numeric, 1e-9).mismatch);
    let printed = mobius_roots(&p, 1.0, 1.0, MobiusRootFormula::Misprinted).unwrap();
    assert!((printed[1] - f64::sqrt(0.5)).abs() < 1e-15 && (printed[2] + f64::sqrt(0.5)).abs() < 1e-15);
    assert!(compare_roots(printed, t.roots_numeric, 1e-9).mismatch);
    assert!(matches!(mobius_roots(&GalleryParams::Cubic { a3: 1.0, a1: 0.0 }, 1.0, 1.0, MobiusRootFormula::Exact), Err(Error::InvalidParams(_))));
    assert!(matches!(predicted_singular_surface(&p), Err(Error::NoClosedForm(_))));
}

#[test]
fn params_from_pairs() {
    let kv: BTreeMap<String, f64> = [("am1".to_string(), 1.0), ("am2".to_string(), -1.0)].into();
    assert_eq!(GalleryParams::from_pairs("power", &kv).unwrap(), GalleryParams::Power { am1: 1.0, am2: -1.0 });
    let kv: BTreeMap<String, f64> = [("c".to_string(), 0.0)].into();
    assert!(matches!(GalleryParams::from_pairs("mobius", &kv), Err(Error::InvalidParams(_))));
    for name in EXAMPLES {
        let p = GalleryParams::from_pairs(name, &BTreeMap::new()).unwrap();
        assert_eq!(p.name(), name);
    }
}

proptest! {
    #[test]
    fn mobius_exact_roots_match_eigenvalues(
        a in -2.0f64..2.0, c in 0.3f64..2.0, d in -2.0f64..2.0,
        x0 in -3.0f64..3.0, rho in 0.1f64..3.0, th in 0.0f64..6.3,
    ) {
        let p = GalleryParams::Mobius { a, c, d };
        let f = make_field(&p).unwrap();
        let t = efg_assemble(&f, th, &mp(x0, rho)).unwrap();
        let s = t.matrix.iter().flatten().fold(1.0f64, |s, v| s.max(v.abs()));
        let cmp = compare_roots(mobius_roots(&p, x0, rho, MobiusRootFormula::Exact).unwrap(), t.roots_numeric, 1e-9 * s);
        prop_assert!(!cmp.mismatch, "{:?}", cmp);
    }
}
