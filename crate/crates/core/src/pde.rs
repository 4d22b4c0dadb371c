//! Finite-difference residuals of the potential equations and first-order
//! systems for layered media.
//!
//! Every residual is reported in the normalization the equation is usually
//! written in (for example the Weinstein equation multiplied through by x2),
//! with derivatives from central differences plus one Richardson level.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd::{self, Stencil};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type PairFn = Arc<dyn Fn(&[f64]) -> [f64; 2] + Send + Sync>;
pub type TripleFn = Arc<dyn Fn(&[f64]) -> [f64; 3] + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> [f64; 3] + Send + Sync>;

/// Coordinates a system is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Chart {
    /// (x0, x1, x2)
    Space,
    /// (x0, x2), fields independent of x1
    Plane,
    /// (x0, rho)
    Meridian,
    /// (x1, x2), fields independent of x0
    Transverse,
}

impl Chart {
    pub fn dim(self) -> usize {
        match self {
            Chart::Space => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Arity {
    Scalar,
    Pair,
    Triple,
}

impl Arity {
    pub fn len(self) -> usize {
        match self {
            Arity::Scalar => 1,
            Arity::Pair => 2,
            Arity::Triple => 3,
        }
    }
}

/// Positive medium coefficient phi(x0, x1, x2), with an optional gradient.
/// Without one, the gradient is taken by finite differences.
#[derive(Clone)]
pub struct Coefficient {
    value: ScalarFn,
    gradient: Option<GradientFn>,
}

impl Coefficient {
    pub fn new(value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient { value: Arc::new(value), gradient: None }
    }

    pub fn with_gradient(mut self, gradient: impl Fn(&[f64]) -> [f64; 3] + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn constant(c: f64) -> Self {
        Coefficient::new(move |_| c).with_gradient(|_| [0.0; 3])
    }

    /// x2^(-alpha) with its exact gradient.
    pub fn planar_power(alpha: f64) -> Self {
        Coefficient::new(move |x| x[2].powf(-alpha))
            .with_gradient(move |x| [0.0, 0.0, -alpha * x[2].powf(-alpha - 1.0)])
    }

    /// rho^(-alpha) with its exact gradient.
    pub fn axial_power(alpha: f64) -> Self {
        Coefficient::new(move |x| x[1].hypot(x[2]).powf(-alpha)).with_gradient(move |x| {
            let rho2 = x[1] * x[1] + x[2] * x[2];
            let g = -alpha * rho2.powf(-alpha / 2.0 - 1.0);
            [0.0, g * x[1], g * x[2]]
        })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> [f64; 3] {
        match &self.gradient {
            Some(g) => g(x),
            None => {
                let mut out = [0.0; 3];
                for (i, o) in out.iter_mut().enumerate() {
                    let f = |t: f64| {
                        let mut y = [x[0], x[1], x[2]];
                        y[i] = t;
                        (self.value)(&y)
                    };
                    *o = fd::first(f, x[i], fd::FIRST_STEP * fd::scale(x[i], false));
                }
                out
            }
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coefficient").field("analytic_gradient", &self.gradient.is_some()).finish()
    }
}

/// The equations and systems that can be checked.
#[derive(Debug, Clone)]
pub enum SystemId {
    /// phi Lap h + grad phi . grad h = 0 for the potential h.
    Continuity(Coefficient),
    /// Generalized modification of the Riesz system for u = (u0, u1, u2).
    GeneralModification(Coefficient),
    /// div(phi E) = 0, curl E = 0 for E = (E0, E1, E2).
    StaticMaxwell(Coefficient),
    SystemR,
    SystemH,
    SystemA3,
    Weinstein { alpha: f64 },
    HyperbolicMod { alpha: f64 },
    CartEpd { alpha: f64 },
    VekuaCart { alpha: f64 },
    AxialEq { alpha: f64 },
    AxialMod { alpha: f64 },
    CylEpd { alpha: f64 },
    Bihyperbolic { alpha1: f64, alpha2: f64 },
    /// Checked with denominators cleared (multiplied by x1 x2).
    BihyperbolicMod { alpha1: f64, alpha2: f64 },
    VekuaMerid { alpha: f64 },
    MaxwellMerid { alpha: f64 },
    CrMerid,
    /// Pair (g, g_hat).
    StokesBeltrami { alpha: f64 },
    /// Two-dimensional Maxwell system for transverse fields (E1, E2).
    MaxwellTransverse { alpha: f64 },
    AnisotropicWeinstein { alpha00: f64, alpha11: f64, alpha22: f64 },
    AnisotropicSystem { alpha00: f64, alpha11: f64, alpha22: f64 },
}

impl SystemId {
    pub fn tag(&self) -> &'static str {
        use SystemId::*;
        match self {
            Continuity(_) => "continuity",
            GeneralModification(_) => "general-modification",
            StaticMaxwell(_) => "static-maxwell",
            SystemR => "system-r",
            SystemH => "system-h",
            SystemA3 => "system-a3",
            Weinstein { .. } => "weinstein",
            HyperbolicMod { .. } => "hyperbolic-mod",
            CartEpd { .. } => "cart-epd",
            VekuaCart { .. } => "vekua-cart",
            AxialEq { .. } => "axial-eq",
            AxialMod { .. } => "axial-mod",
            CylEpd { .. } => "cyl-epd",
            Bihyperbolic { .. } => "bihyperbolic",
            BihyperbolicMod { .. } => "bihyperbolic-mod",
            VekuaMerid { .. } => "vekua-merid",
            MaxwellMerid { .. } => "maxwell-merid",
            CrMerid => "cr-merid",
            StokesBeltrami { .. } => "stokes-beltrami",
            MaxwellTransverse { .. } => "maxwell-transverse",
            AnisotropicWeinstein { .. } => "anisotropic-weinstein",
            AnisotropicSystem { .. } => "anisotropic-system",
        }
    }

    pub fn arity(&self) -> Arity {
        use SystemId::*;
        match self {
            Continuity(_) | Weinstein { .. } | CartEpd { .. } | AxialEq { .. } | CylEpd { .. } | Bihyperbolic { .. }
            | AnisotropicWeinstein { .. } => Arity::Scalar,
            VekuaCart { .. } | VekuaMerid { .. } | MaxwellMerid { .. } | CrMerid | StokesBeltrami { .. }
            | MaxwellTransverse { .. } => Arity::Pair,
            GeneralModification(_) | StaticMaxwell(_) | SystemR | SystemH | SystemA3 | HyperbolicMod { .. }
            | AxialMod { .. } | BihyperbolicMod { .. } | AnisotropicSystem { .. } => Arity::Triple,
        }
    }

    pub fn chart(&self) -> Chart {
        use SystemId::*;
        match self {
            CartEpd { .. } | VekuaCart { .. } => Chart::Plane,
            CylEpd { .. } | VekuaMerid { .. } | MaxwellMerid { .. } | CrMerid | StokesBeltrami { .. } => Chart::Meridian,
            MaxwellTransverse { .. } => Chart::Transverse,
            _ => Chart::Space,
        }
    }

    /// Distance from `x` to the singular boundary along each axis, or `None`
    /// when the axis has no boundary.
    fn boundary(&self, x: &[f64]) -> Vec<Option<f64>> {
        use SystemId::*;
        match self {
            Weinstein { .. } | HyperbolicMod { .. } | SystemH | AnisotropicWeinstein { .. } | AnisotropicSystem { .. } => {
                vec![None, None, Some(x[2])]
            }
            AxialEq { .. } | AxialMod { .. } | SystemA3 => {
                let rho = x[1].hypot(x[2]);
                vec![None, Some(rho), Some(rho)]
            }
            Bihyperbolic { .. } | BihyperbolicMod { .. } => vec![None, Some(x[1]), Some(x[2])],
            CartEpd { .. } | VekuaCart { .. } | CylEpd { .. } | VekuaMerid { .. } | MaxwellMerid { .. } | CrMerid
            | StokesBeltrami { .. } => vec![None, Some(x[1])],
            MaxwellTransverse { .. } => {
                let rho = x[0].hypot(x[1]);
                vec![Some(rho), Some(rho)]
            }
            Continuity(_) | GeneralModification(_) | StaticMaxwell(_) | SystemR => vec![None; x.len()],
        }
    }

    /// Residual of every equation at `x`, given the local derivatives.
    fn equations(&self, x: &[f64], j: &Jet) -> Vec<f64> {
        use SystemId::*;
        let v = &j.v;
        let d = |i: usize, k: usize| j.d[i][k];
        let lap = |k: usize| j.dd.iter().take(x.len()).map(|r| r[k]).sum::<f64>();
        let curl_u = || [d(1, 0) + d(0, 1), d(2, 0) + d(0, 2), d(2, 1) - d(1, 2)];
        let div_u = || d(0, 0) - d(1, 1) - d(2, 2);
        let with_curl = |first: f64| {
            let c = curl_u();
            vec![first, c[0], c[1], c[2]]
        };
        match self {
            Continuity(phi) => {
                let g = phi.gradient(x);
                vec![phi.value(x) * lap(0) + g[0] * d(0, 0) + g[1] * d(1, 0) + g[2] * d(2, 0)]
            }
            GeneralModification(phi) => {
                let g = phi.gradient(x);
                with_curl(phi.value(x) * div_u() + g[0] * v[0] - g[1] * v[1] - g[2] * v[2])
            }
            StaticMaxwell(phi) => {
                let g = phi.gradient(x);
                let div = d(0, 0) + d(1, 1) + d(2, 2);
                vec![
                    phi.value(x) * div + g[0] * v[0] + g[1] * v[1] + g[2] * v[2],
                    d(1, 2) - d(2, 1),
                    d(2, 0) - d(0, 2),
                    d(0, 1) - d(1, 0),
                ]
            }
            SystemR => with_curl(div_u()),
            SystemH => with_curl(x[2] * div_u() + v[2]),
            SystemA3 => with_curl((x[1] * x[1] + x[2] * x[2]) * div_u() + x[1] * v[1] + x[2] * v[2]),
            HyperbolicMod { alpha } => with_curl(x[2] * div_u() + alpha * v[2]),
            AxialMod { alpha } => {
                with_curl((x[1] * x[1] + x[2] * x[2]) * div_u() + alpha * (x[1] * v[1] + x[2] * v[2]))
            }
            BihyperbolicMod { alpha1, alpha2 } => {
                with_curl(x[1] * x[2] * div_u() + alpha1 * x[2] * v[1] + alpha2 * x[1] * v[2])
            }
            AnisotropicSystem { alpha00, alpha11, alpha22 } => {
                let p = |a: f64| x[2].powf(-a);
                with_curl(
                    p(*alpha00) * d(0, 0) - p(*alpha11) * d(1, 1) - p(*alpha22) * d(2, 2)
                        + alpha22 * x[2].powf(-alpha22 - 1.0) * v[2],
                )
            }
            Weinstein { alpha } => vec![x[2] * lap(0) - alpha * d(2, 0)],
            AxialEq { alpha } => {
                vec![(x[1] * x[1] + x[2] * x[2]) * lap(0) - alpha * (x[1] * d(1, 0) + x[2] * d(2, 0))]
            }
            Bihyperbolic { alpha1, alpha2 } => {
                vec![lap(0) - alpha1 * d(1, 0) / x[1] - alpha2 * d(2, 0) / x[2]]
            }
            AnisotropicWeinstein { alpha00, alpha11, alpha22 } => {
                let p = |a: f64| x[2].powf(-a);
                vec![
                    p(*alpha00) * j.dd[0][0] + p(*alpha11) * j.dd[1][0] + p(*alpha22) * j.dd[2][0]
                        - alpha22 * x[2].powf(-alpha22 - 1.0) * d(2, 0),
                ]
            }
            CartEpd { alpha } => vec![x[1] * lap(0) - alpha * d(1, 0)],
            VekuaCart { alpha } => vec![x[1] * (d(0, 0) - d(1, 1)) + alpha * v[1], d(1, 0) + d(0, 1)],
            CylEpd { alpha } => vec![x[1] * lap(0) - (alpha - 1.0) * d(1, 0)],
            VekuaMerid { alpha } => vec![x[1] * (d(0, 0) - d(1, 1)) + (alpha - 1.0) * v[1], d(1, 0) + d(0, 1)],
            MaxwellMerid { alpha } => vec![x[1] * (d(0, 0) + d(1, 1)) - (alpha - 1.0) * v[1], d(1, 0) - d(0, 1)],
            CrMerid => vec![d(0, 0) - d(1, 1), d(1, 0) + d(0, 1)],
            StokesBeltrami { alpha } => {
                let w = x[1].powf(1.0 - alpha);
                vec![w * d(0, 0) - d(1, 1), w * d(1, 0) + d(0, 1)]
            }
            MaxwellTransverse { alpha } => vec![
                (x[0] * x[0] + x[1] * x[1]) * (d(0, 0) + d(1, 1)) - alpha * (x[0] * v[0] + x[1] * v[1]),
                d(1, 0) - d(0, 1),
            ],
        }
    }
}

/// A candidate solution: a potential or a field in the system's chart.
#[derive(Clone)]
pub enum Candidate {
    Scalar(ScalarFn),
    Pair(PairFn),
    Triple(TripleFn),
}

impl Candidate {
    pub fn scalar(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Candidate::Scalar(Arc::new(f))
    }

    pub fn pair(f: impl Fn(&[f64]) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Candidate::Pair(Arc::new(f))
    }

    pub fn triple(f: impl Fn(&[f64]) -> [f64; 3] + Send + Sync + 'static) -> Self {
        Candidate::Triple(Arc::new(f))
    }

    pub fn arity(&self) -> Arity {
        match self {
            Candidate::Scalar(_) => Arity::Scalar,
            Candidate::Pair(_) => Arity::Pair,
            Candidate::Triple(_) => Arity::Triple,
        }
    }

    fn padded(&self, x: &[f64]) -> [f64; 3] {
        match self {
            Candidate::Scalar(f) => [f(x), 0.0, 0.0],
            Candidate::Pair(f) => {
                let [a, b] = f(x);
                [a, b, 0.0]
            }
            Candidate::Triple(f) => f(x),
        }
    }
}

impl fmt::Debug for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Candidate::{:?}", self.arity())
    }
}

/// Evaluation points in a chart's coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub points: Vec<Vec<f64>>,
}

impl Grid {
    pub fn from_points(points: Vec<Vec<f64>>) -> Self {
        Grid { points }
    }

    /// Tensor-product lattice; each axis is (min, max, n) with n >= 1.
    pub fn lattice(axes: &[(f64, f64, usize)]) -> Self {
        let mut points = vec![Vec::new()];
        for &(lo, hi, n) in axes {
            let values: Vec<f64> = (0..n)
                .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
                .collect();
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        Grid { points }
    }

    /// Meridian lattice lifted to space at azimuth `theta`.
    pub fn meridian_lifted(x0: (f64, f64, usize), rho: (f64, f64, usize), theta: f64) -> Self {
        let m = Grid::lattice(&[x0, rho]);
        Grid {
            points: m
                .points
                .into_iter()
                .map(|p| vec![p[0], p[1] * theta.cos(), p[1] * theta.sin()])
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Finite-difference settings. With a fixed `step`, points closer than two
/// steps to a singular boundary are skipped; otherwise steps shrink with the
/// distance to the boundary and nothing is skipped.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FdOptions {
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub worst_point: Vec<f64>,
    pub n_points: usize,
    /// Largest first-derivative step used.
    pub fd_step: f64,
    pub skipped: usize,
}

impl ResidualReport {
    /// Reduction in point order; the first point attaining the maximum wins.
    pub fn from_values(points: &[Vec<f64>], values: &[Option<f64>], fd_step: f64) -> Self {
        let mut max_abs = 0.0;
        let mut sum = 0.0;
        let mut n = 0usize;
        let mut worst = None;
        for (i, v) in values.iter().enumerate() {
            if let Some(v) = *v {
                let a = v.abs();
                sum += a;
                n += 1;
                if worst.is_none() || a > max_abs {
                    max_abs = a;
                    worst = Some(i);
                }
            }
        }
        ResidualReport {
            max_abs,
            mean_abs: if n > 0 { sum / n as f64 } else { 0.0 },
            worst_point: worst.map(|i| points[i].clone()).unwrap_or_default(),
            n_points: n,
            fd_step,
            skipped: values.len() - n,
        }
    }
}

/// Value, first derivatives and unmixed second derivatives of up to three
/// components; `d[i][k]` is d(component k)/dx_i.
#[derive(Debug, Clone, Copy)]
struct Jet {
    v: [f64; 3],
    d: [[f64; 3]; 3],
    dd: [[f64; 3]; 3],
}

fn jet(f: &(dyn Fn(&[f64]) -> [f64; 3] + Sync), x: &[f64], h1: Vec<f64>, h2: Vec<f64>) -> Result<Jet> {
    let s = Stencil::with_steps(f, x, h1, h2);
    let mut j = Jet { v: s.value(), d: [[0.0; 3]; 3], dd: [[0.0; 3]; 3] };
    for i in 0..x.len() {
        j.d[i] = s.d1(i);
        j.dd[i] = s.d2(i, i);
    }
    let all = j.v.iter().chain(j.d.iter().flatten()).chain(j.dd.iter().flatten());
    if all.clone().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSample(x.to_vec()));
    }
    Ok(j)
}

/// Steps at `x` for the given boundary distances, or `None` if the point
/// must be skipped.
fn steps(x: &[f64], boundary: &[Option<f64>], opts: &FdOptions) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    for (i, b) in boundary.iter().enumerate() {
        if let Some(dist) = b {
            if !(*dist > 0.0) {
                return Err(Error::Domain(format!("point {x:?} is outside the domain along axis {i}")));
            }
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite coordinate in {x:?}")));
    }
    if let Some(h) = opts.step {
        if boundary.iter().flatten().any(|&dist| dist < 2.0 * h) {
            return Ok(None);
        }
        return Ok(Some((vec![h; x.len()], vec![h; x.len()])));
    }
    let scale: Vec<f64> = x
        .iter()
        .zip(boundary)
        .map(|(&v, b)| match b {
            Some(dist) => v.abs().max(1.0).min(*dist),
            None => fd::scale(v, false),
        })
        .collect();
    Ok(Some((
        scale.iter().map(|s| fd::FIRST_STEP * s).collect(),
        scale.iter().map(|s| fd::SECOND_STEP * s).collect(),
    )))
}

fn check(system: &SystemId, candidate: &Candidate, grid: &Grid) -> Result<()> {
    let want = system.arity();
    if candidate.arity() != want {
        return Err(Error::ArityMismatch { expected: want.len(), got: candidate.arity().len() });
    }
    let dim = system.chart().dim();
    if let Some(p) = grid.points.iter().find(|p| p.len() != dim) {
        return Err(Error::Domain(format!(
            "{} expects {dim} coordinates per point, got {p:?}",
            system.tag()
        )));
    }
    Ok(())
}

/// Pointwise residual (max over the system's equations) with the largest
/// first step used; `None` marks skipped points.
pub fn residual_field(
    system: &SystemId,
    candidate: &Candidate,
    grid: &Grid,
    opts: &FdOptions,
) -> Result<(Vec<Option<f64>>, f64)> {
    check(system, candidate, grid)?;
    let f = |x: &[f64]| candidate.padded(x);
    let per_point: Vec<Result<Option<(f64, f64)>>> = grid
        .points
        .par_iter()
        .map(|x| {
            let Some((h1, h2)) = steps(x, &system.boundary(x), opts)? else {
                return Ok(None);
            };
            let hmax = h1.iter().cloned().fold(0.0, f64::max);
            let j = jet(&f, x, h1, h2)?;
            let r = system.equations(x, &j).iter().fold(0.0f64, |m, e| m.max(e.abs()));
            Ok(Some((r, hmax)))
        })
        .collect();
    let mut values = Vec::with_capacity(per_point.len());
    let mut step = 0.0f64;
    for r in per_point {
        let r = r?;
        step = step.max(r.map_or(0.0, |v| v.1));
        values.push(r.map(|v| v.0));
    }
    Ok((values, step))
}

/// Residual report of `candidate` against `system` over `grid`.
pub fn residual(system: &SystemId, candidate: &Candidate, grid: &Grid, opts: &FdOptions) -> Result<ResidualReport> {
    let (values, step) = residual_field(system, candidate, grid, opts)?;
    Ok(ResidualReport::from_values(&grid.points, &values, step))
}

/// Evaluate a scalar potential's jet at each space point; shared by the
/// joint-class criteria so both sides use the same derivative estimates.
fn space_jets(h: &ScalarFn, grid: &Grid, boundary: impl Fn(&[f64]) -> Vec<Option<f64>> + Sync) -> Result<Vec<(Jet, f64)>> {
    if let Some(p) = grid.points.iter().find(|p| p.len() != 3) {
        return Err(Error::Domain(format!("expected (x0, x1, x2), got {p:?}")));
    }
    let f = |x: &[f64]| [h(x), 0.0, 0.0];
    grid.points
        .par_iter()
        .map(|x| {
            let (h1, h2) = steps(x, &boundary(x), &FdOptions::default())?.expect("automatic steps never skip");
            let hmax = h1.iter().cloned().fold(0.0, f64::max);
            Ok((jet(&f, x, h1, h2)?, hmax))
        })
        .collect()
}

fn report_of(grid: &Grid, values: Vec<f64>, jets: &[(Jet, f64)]) -> ResidualReport {
    let step = jets.iter().map(|j| j.1).fold(0.0, f64::max);
    let values: Vec<Option<f64>> = values.into_iter().map(Some).collect();
    ResidualReport::from_values(&grid.points, &values, step)
}

/// Meridional condition x2 h_x1 = x1 h_x2 and azimuthal derivative h_theta.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeridionalCriterion {
    pub condition: ResidualReport,
    pub azimuthal: ResidualReport,
}

pub fn criterion_meridional(h: &ScalarFn, grid: &Grid) -> Result<MeridionalCriterion> {
    let axial = |x: &[f64]| {
        let rho = x[1].hypot(x[2]);
        vec![None, Some(rho), Some(rho)]
    };
    let jets = space_jets(h, grid, axial)?;
    let condition = grid
        .points
        .iter()
        .zip(&jets)
        .map(|(x, (j, _))| x[2] * j.d[1][0] - x[1] * j.d[2][0])
        .collect();
    let azimuthal: Vec<f64> = grid
        .points
        .par_iter()
        .map(|x| {
            let rho = x[1].hypot(x[2]);
            let theta = x[2].atan2(x[1]);
            let rotated = |t: f64| h(&[x[0], rho * t.cos(), rho * t.sin()]);
            fd::first(rotated, theta, fd::FIRST_STEP)
        })
        .collect();
    Ok(MeridionalCriterion {
        condition: report_of(grid, condition, &jets),
        azimuthal: report_of(grid, azimuthal, &jets),
    })
}

/// Weinstein and axially symmetric residuals of one potential, each divided
/// by its leading coefficient (x2 and rho^2), and their pointwise difference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointClassReport {
    pub condition: ResidualReport,
    pub first: ResidualReport,
    pub second: ResidualReport,
    pub difference: ResidualReport,
}

/// Compares the Weinstein(alpha) and axial(alpha) equations on a potential.
/// For meridional potentials the two normalized residuals coincide.
pub fn criterion_weinstein_axial(h: &ScalarFn, alpha: f64, grid: &Grid) -> Result<JointClassReport> {
    let bounds = |x: &[f64]| {
        let rho = x[1].hypot(x[2]);
        vec![None, Some(rho), Some(x[2].min(rho))]
    };
    let jets = space_jets(h, grid, bounds)?;
    let mut cond = Vec::new();
    let mut w = Vec::new();
    let mut a = Vec::new();
    for (x, (j, _)) in grid.points.iter().zip(&jets) {
        let lap = j.dd[0][0] + j.dd[1][0] + j.dd[2][0];
        let rho2 = x[1] * x[1] + x[2] * x[2];
        cond.push(x[2] * j.d[1][0] - x[1] * j.d[2][0]);
        w.push(lap - alpha * j.d[2][0] / x[2]);
        a.push(lap - alpha * (x[1] * j.d[1][0] + x[2] * j.d[2][0]) / rho2);
    }
    let diff = w.iter().zip(&a).map(|(p, q)| p - q).collect();
    Ok(JointClassReport {
        condition: report_of(grid, cond, &jets),
        first: report_of(grid, w, &jets),
        second: report_of(grid, a, &jets),
        difference: report_of(grid, diff, &jets),
    })
}

/// Compares the bi-hyperbolic (alpha1, alpha2) equation with the Weinstein
/// equation for alpha1 + alpha2 (divided by x2). They coincide wherever
/// x2 h_x1 = x1 h_x2.
pub fn criterion_bihyperbolic(h: &ScalarFn, alpha1: f64, alpha2: f64, grid: &Grid) -> Result<JointClassReport> {
    let bounds = |x: &[f64]| vec![None, Some(x[1]), Some(x[2])];
    let jets = space_jets(h, grid, bounds)?;
    let mut cond = Vec::new();
    let mut b = Vec::new();
    let mut w = Vec::new();
    for (x, (j, _)) in grid.points.iter().zip(&jets) {
        let lap = j.dd[0][0] + j.dd[1][0] + j.dd[2][0];
        cond.push(x[2] * j.d[1][0] - x[1] * j.d[2][0]);
        b.push(lap - alpha1 * j.d[1][0] / x[1] - alpha2 * j.d[2][0] / x[2]);
        w.push(lap - (alpha1 + alpha2) * j.d[2][0] / x[2]);
    }
    let diff = b.iter().zip(&w).map(|(p, q)| p - q).collect();
    Ok(JointClassReport {
        condition: report_of(grid, cond, &jets),
        first: report_of(grid, b, &jets),
        second: report_of(grid, w, &jets),
        difference: report_of(grid, diff, &jets),
    })
}

/// Residuals of the modified Emden-Fowler equation
/// `s'' - (alpha1/x1) s' + lambda^2 s = 0` and of its form after
/// `x1 = y^(1/(alpha1+1))`: `S'' + lambda^2/(alpha1+1)^2 y^(-2 alpha1/(alpha1+1)) S = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmdenFowlerReport {
    pub original: ResidualReport,
    pub transformed: ResidualReport,
}

pub fn emden_fowler_check<S>(alpha1: f64, lambda: i32, s: &S, x1: &[f64]) -> Result<EmdenFowlerReport>
where
    S: Fn(f64) -> f64 + Sync,
{
    if alpha1 == -1.0 {
        return Err(Error::Domain("alpha1 = -1 has no Emden-Fowler substitution".into()));
    }
    if let Some(x) = x1.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!("x1 = {x} must be positive")));
    }
    let l2 = f64::from(lambda).powi(2);
    let k = alpha1 + 1.0;
    let rows: Vec<(f64, f64, f64, f64)> = x1
        .par_iter()
        .map(|&x| {
            let h1 = fd::FIRST_STEP * x.min(1.0);
            let h2 = fd::SECOND_STEP * x.min(1.0);
            let orig = fd::second(s, x, h2) - alpha1 / x * fd::first(s, x, h1) + l2 * s(x);
            let y = x.powf(k);
            let big_s = |t: f64| s(t.powf(1.0 / k));
            let tr = fd::second(big_s, y, fd::SECOND_STEP * y.min(1.0)) + l2 / (k * k) * y.powf(-2.0 * alpha1 / k) * big_s(y);
            (orig, tr, h1, y)
        })
        .collect();
    let xs: Vec<Vec<f64>> = x1.iter().map(|&x| vec![x]).collect();
    let ys: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.3]).collect();
    let step = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let orig: Vec<Option<f64>> = rows.iter().map(|r| Some(r.0)).collect();
    let tr: Vec<Option<f64>> = rows.iter().map(|r| Some(r.1)).collect();
    for (r, x) in rows.iter().zip(x1) {
        if !r.0.is_finite() || !r.1.is_finite() {
            return Err(Error::NonFiniteSample(vec![*x]));
        }
    }
    Ok(EmdenFowlerReport {
        original: ResidualReport::from_values(&xs, &orig, step),
        transformed: ResidualReport::from_values(&ys, &tr, step),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Residuals of `g = rho^p w` in `g00 + g_rhorho - (alpha-1) g_rho / rho - lambda^2 g / rho^2 = 0`
/// and of `w` in `rho (w00 + w_rhorho) + (1 +- d) w_rho = 0`, where
/// `d = sqrt(alpha^2 + 4 lambda^2)` and `p = (alpha +- d)/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpdTransformReport {
    pub exponent: f64,
    pub source: ResidualReport,
    pub target: ResidualReport,
}

pub fn epd_transform_check(alpha: f64, lambda: i32, sign: Sign, w: &ScalarFn, grid: &Grid) -> Result<EpdTransformReport> {
    let l2 = f64::from(lambda).powi(2);
    let d = (alpha * alpha + 4.0 * l2).sqrt();
    let p = (alpha + sign.value() * d) / 2.0;
    let w_fn = w.clone();
    let g = Candidate::scalar(move |x: &[f64]| x[1].powf(p) * w_fn(x));
    let target = residual(&SystemId::CylEpd { alpha: -sign.value() * d }, &Candidate::Scalar(w.clone()), grid, &FdOptions::default())?;
    // The source equation is not a system of its own; reuse the meridian jets.
    check(&SystemId::CylEpd { alpha }, &g, grid)?;
    let f = |x: &[f64]| g.padded(x);
    let rows: Vec<Result<(f64, f64)>> = grid
        .points
        .par_iter()
        .map(|x| {
            let (h1, h2) = steps(x, &[None, Some(x[1])], &FdOptions::default())?.expect("automatic steps never skip");
            let hmax = h1.iter().cloned().fold(0.0, f64::max);
            let j = jet(&f, x, h1, h2)?;
            let rho = x[1];
            let r = j.dd[0][0] + j.dd[1][0] - (alpha - 1.0) * j.d[1][0] / rho - l2 * j.v[0] / (rho * rho);
            Ok((r, hmax))
        })
        .collect();
    let mut values = Vec::new();
    let mut step = 0.0f64;
    for r in rows {
        let (v, h) = r?;
        values.push(Some(v));
        step = step.max(h);
    }
    Ok(EpdTransformReport {
        exponent: p,
        source: ResidualReport::from_values(&grid.points, &values, step),
        target,
    })
}
