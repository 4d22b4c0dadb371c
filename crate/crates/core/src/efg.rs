//! Meridional electrostatic fields, their EFG tensor (Jacobian of the field)
//! in the simplified meridional form, closed-form spectra and singular sets.
//!
//! A meridional field is given by `E0(x0, rho)` and `Erho(x0, rho)` and lifts to
//! `(E0, (x1/rho) Erho, (x2/rho) Erho)`. The tensor depends only on `Erho`, its
//! two partials and `alpha`; the top-left entry uses the meridional Maxwell
//! identity `dE0/dx0 = -dErho/drho + (alpha - 1) Erho / rho`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::pde::Candidate;
use crate::rq::MeridianPoint;

/// Scalar function of `(x0, rho)` on the meridian half-plane.
pub type MeridianFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A meridional field `(E0, Erho)` for a given `alpha`, with optional
/// analytic partials of `Erho`.
#[derive(Clone)]
pub struct MeridionalFieldSpec {
    pub alpha: f64,
    pub e0: MeridianFn,
    pub erho: MeridianFn,
    pub derho_dx0: Option<MeridianFn>,
    pub derho_drho: Option<MeridianFn>,
}

impl fmt::Debug for MeridionalFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeridionalFieldSpec")
            .field("alpha", &self.alpha)
            .field("analytic_partials", &(self.derho_dx0.is_some(), self.derho_drho.is_some()))
            .finish()
    }
}

/// `Erho` and its partials at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialJet {
    pub erho: f64,
    pub d_x0: f64,
    pub d_rho: f64,
}

impl MeridionalFieldSpec {
    pub fn new(alpha: f64, e0: MeridianFn, erho: MeridianFn) -> Self {
        MeridionalFieldSpec { alpha, e0, erho, derho_dx0: None, derho_drho: None }
    }

    pub fn with_partials(mut self, d_x0: MeridianFn, d_rho: MeridianFn) -> Self {
        self.derho_dx0 = Some(d_x0);
        self.derho_drho = Some(d_rho);
        self
    }

    /// Same field data, different `alpha`.
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn e0_at(&self, x0: f64, rho: f64) -> f64 {
        (self.e0)(x0, rho)
    }

    pub fn erho_at(&self, x0: f64, rho: f64) -> f64 {
        (self.erho)(x0, rho)
    }

    /// Partials of `Erho` by finite differences.
    pub fn fd_partials(&self, x0: f64, rho: f64) -> Result<(f64, f64)> {
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("rho = {rho} must be positive")));
        }
        let h0 = fd::FIRST_STEP * fd::scale(x0, false);
        let hr = fd::FIRST_STEP * fd::scale(rho, true);
        let d0 = fd::first(|t| (self.erho)(t, rho), x0, h0);
        let dr = fd::first(|t| (self.erho)(x0, t), rho, hr);
        if d0.is_finite() && dr.is_finite() {
            Ok((d0, dr))
        } else {
            Err(Error::PartialUnavailable(format!("non-finite difference quotient at ({x0}, {rho})")))
        }
    }

    /// `Erho` with its partials, analytic where provided.
    pub fn jet(&self, x0: f64, rho: f64) -> Result<RadialJet> {
        if !(rho > 0.0) || !x0.is_finite() || !rho.is_finite() {
            return Err(Error::Domain(format!("({x0}, {rho}) is outside the open half-plane")));
        }
        let erho = (self.erho)(x0, rho);
        if !erho.is_finite() {
            return Err(Error::Pole(format!("Erho({x0}, {rho}) = {erho}")));
        }
        let (d_x0, d_rho) = match (&self.derho_dx0, &self.derho_drho) {
            (Some(a), Some(b)) => (a(x0, rho), b(x0, rho)),
            (Some(a), None) => (a(x0, rho), self.fd_partials(x0, rho)?.1),
            (None, Some(b)) => (self.fd_partials(x0, rho)?.0, b(x0, rho)),
            (None, None) => self.fd_partials(x0, rho)?,
        };
        if !d_x0.is_finite() || !d_rho.is_finite() {
            return Err(Error::PartialUnavailable(format!("non-finite partial at ({x0}, {rho})")));
        }
        Ok(RadialJet { erho, d_x0, d_rho })
    }

    /// `(E0, Erho)` as a pair candidate on the meridian chart.
    pub fn candidate(&self) -> Candidate {
        let (e0, er) = (self.e0.clone(), self.erho.clone());
        Candidate::pair(move |x: &[f64]| [e0(x[0], x[1]), er(x[0], x[1])])
    }

    /// Largest discrepancy between the analytic partials and finite differences
    /// over the given `(x0, rho)` points; zero when no partials are provided.
    pub fn partials_discrepancy(&self, points: &[(f64, f64)]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &(x0, rho) in points {
            let (f0, fr) = self.fd_partials(x0, rho)?;
            if let Some(a) = &self.derho_dx0 {
                worst = worst.max((a(x0, rho) - f0).abs());
            }
            if let Some(b) = &self.derho_drho {
                worst = worst.max((b(x0, rho) - fr).abs());
            }
        }
        Ok(worst)
    }
}

fn check_point(p: &MeridianPoint) -> Result<()> {
    if p.rho() > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("rho = {} must be positive", p.rho())))
    }
}

/// `(E0, (x1/rho) Erho, (x2/rho) Erho)` with `x1 = rho cos(theta)`, `x2 = rho sin(theta)`.
pub fn lift_field(f: &MeridionalFieldSpec, theta: f64, p: &MeridianPoint) -> Result<[f64; 3]> {
    check_point(p)?;
    let (s, c) = theta.sin_cos();
    let e0 = f.e0_at(p.x0(), p.rho());
    let er = f.erho_at(p.x0(), p.rho());
    if !e0.is_finite() || !er.is_finite() {
        return Err(Error::Pole(format!("field is not finite at ({}, {})", p.x0(), p.rho())));
    }
    Ok([e0, c * er, s * er])
}

/// Principal invariants: trace, sum of principal 2x2 minors, determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

impl Invariants {
    pub fn of_matrix(m: &[[f64; 3]; 3]) -> Self {
        let i1 = m[0][0] + m[1][1] + m[2][2];
        let i2 = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
            - m[1][2] * m[2][1];
        let i3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        Invariants { i1, i2, i3 }
    }

    /// Vieta: elementary symmetric polynomials of the roots.
    pub fn from_roots(l: &[f64; 3]) -> Self {
        Invariants {
            i1: l[0] + l[1] + l[2],
            i2: l[0] * l[1] + l[0] * l[2] + l[1] * l[2],
            i3: l[0] * l[1] * l[2],
        }
    }
}

/// EFG tensor at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfgTensor {
    pub matrix: [[f64; 3]; 3],
    pub invariants: Invariants,
    /// `(lambda0, lambda1, lambda2)` from the closed-form factorization.
    pub roots_closed: [f64; 3],
    /// Eigenvalues of `matrix`, ascending.
    pub roots_numeric: [f64; 3],
}

/// The simplified meridional EFG matrix built from `Erho` and its partials.
pub fn efg_matrix(alpha: f64, jet: &RadialJet, theta: f64, rho: f64) -> [[f64; 3]; 3] {
    let (s, c) = theta.sin_cos();
    let l0 = jet.erho / rho;
    let (a, b) = (jet.d_rho, jet.d_x0);
    let off = (a - l0) * c * s;
    [
        [-a + (alpha - 1.0) * l0, b * c, b * s],
        [b * c, a * c * c + l0 * s * s, off],
        [b * s, off, a * s * s + l0 * c * c],
    ]
}

/// Closed-form roots `(lambda0, lambda1, lambda2)`:
/// `lambda0 = Erho/rho`, and `lambda1,2` solve
/// `l^2 - (alpha-1) lambda0 l + (alpha-1) lambda0 dErho/drho - |grad Erho|^2 = 0`.
pub fn closed_roots(alpha: f64, jet: &RadialJet, rho: f64) -> [f64; 3] {
    let l0 = jet.erho / rho;
    let half = 0.5 * (alpha - 1.0) * l0;
    // Discriminant written as a sum of squares.
    let disc = (half - jet.d_rho).hypot(jet.d_x0);
    let product = (alpha - 1.0) * l0 * jet.d_rho - jet.d_x0 * jet.d_x0 - jet.d_rho * jet.d_rho;
    let big = if half >= 0.0 { half + disc } else { half - disc };
    let small = if big != 0.0 { product / big } else { 0.0 };
    let (l1, l2) = if big >= small { (big, small) } else { (small, big) };
    [l0, l1, l2]
}

/// Ascending eigenvalues of a symmetric 3x3 matrix.
pub fn symmetric_eigenvalues(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let a = Matrix3::from_fn(|i, j| m[i][j]);
    let e = SymmetricEigen::new(a).eigenvalues;
    let mut v = [e[0], e[1], e[2]];
    v.sort_by(f64::total_cmp);
    v
}

/// Assembles the tensor of `f` at `p` lifted to azimuth `theta`.
pub fn efg_assemble(f: &MeridionalFieldSpec, theta: f64, p: &MeridianPoint) -> Result<EfgTensor> {
    check_point(p)?;
    let jet = f.jet(p.x0(), p.rho())?;
    let matrix = efg_matrix(f.alpha, &jet, theta, p.rho());
    Ok(EfgTensor {
        matrix,
        invariants: Invariants::of_matrix(&matrix),
        roots_closed: closed_roots(f.alpha, &jet, p.rho()),
        roots_numeric: symmetric_eigenvalues(&matrix),
    })
}

/// Closed-form roots for the field data of `f` at an explicit `alpha`.
pub fn char_roots(f: &MeridionalFieldSpec, p: &MeridianPoint, alpha: f64) -> Result<[f64; 3]> {
    check_point(p)?;
    let jet = f.jet(p.x0(), p.rho())?;
    Ok(closed_roots(alpha, &jet, p.rho()))
}

/// `(f1, f2)` with `f1 = Erho` and
/// `f2 = (dErho/dx0)^2 + (dErho/drho)^2 - (alpha-1) (Erho/rho) dErho/drho`;
/// the determinant vanishes exactly where one of them does.
pub fn singular_residuals(f: &MeridionalFieldSpec, p: &MeridianPoint, alpha: f64) -> Result<(f64, f64)> {
    check_point(p)?;
    let jet = f.jet(p.x0(), p.rho())?;
    Ok((jet.erho, quadratic_factor(alpha, &jet, p.rho())))
}

fn quadratic_factor(alpha: f64, jet: &RadialJet, rho: f64) -> f64 {
    jet.d_x0 * jet.d_x0 + jet.d_rho * jet.d_rho - (alpha - 1.0) * jet.erho / rho * jet.d_rho
}

/// Field `E0 = g_x0`, `Erho = g_rho` of a meridional potential, by finite differences.
pub fn field_from_potential(g: MeridianFn, alpha: f64) -> MeridionalFieldSpec {
    let gx = g.clone();
    let e0: MeridianFn = Arc::new(move |x0, rho| {
        fd::first(|t| gx(t, rho), x0, fd::FIRST_STEP * fd::scale(x0, false))
    });
    let gr = g.clone();
    let erho: MeridianFn = Arc::new(move |x0, rho| {
        fd::first(|t| gr(x0, t), rho, fd::FIRST_STEP * fd::scale(rho, true))
    });
    let g0 = g.clone();
    let d_x0: MeridianFn = Arc::new(move |x0, rho| {
        let f: &(dyn Fn(&[f64]) -> [f64; 1] + Sync) = &|y: &[f64]| [g0(y[0], y[1])];
        fd::Stencil::new(f, &[x0, rho], &[false, true]).d2(0, 1)[0]
    });
    let g1 = g;
    let d_rho: MeridianFn = Arc::new(move |x0, rho| {
        fd::second(|t| g1(x0, t), rho, fd::SECOND_STEP * fd::scale(rho, true))
    });
    MeridionalFieldSpec::new(alpha, e0, erho).with_partials(d_x0, d_rho)
}

/// Rectangular window of the meridian half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: (f64, f64),
    pub rho: (f64, f64),
}

/// Which factor of the determinant a contour belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SingularBranch {
    /// `Erho = 0`.
    F1,
    /// Zero of the quadratic factor.
    F2,
}

/// Zero contour of one branch as `(x0, rho)` vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourPolyline {
    pub branch: SingularBranch,
    pub vertices: Vec<[f64; 2]>,
    pub closed: bool,
}

/// Bisection steps per crossing edge.
pub const BISECTION_STEPS: usize = 40;
/// Vertices whose residual exceeds this after refinement are discarded.
pub const VERTEX_TOL: f64 = 1e-8;
pub const MIN_RESOLUTION: usize = 8;

/// Zero contours of `f1` and of `f2` over `window`, sampled on
/// `resolution x resolution` cells and refined by bisection on cell edges.
pub fn trace_singular_set(
    f: &MeridionalFieldSpec,
    alpha: f64,
    window: Window,
    resolution: usize,
) -> Result<Vec<ContourPolyline>> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::ResolutionTooLow(resolution));
    }
    let finite = [window.x0.0, window.x0.1, window.rho.0, window.rho.1].iter().all(|v| v.is_finite());
    if !finite || window.x0.0 >= window.x0.1 || window.rho.0 >= window.rho.1 {
        return Err(Error::Domain(format!("degenerate window {window:?}")));
    }
    if !(window.rho.0 > 0.0) {
        return Err(Error::Domain(format!("window reaches rho = {} <= 0", window.rho.0)));
    }
    let f1 = |x0: f64, rho: f64| {
        let v = f.erho_at(x0, rho);
        if v.is_finite() { v } else { f64::NAN }
    };
    let f2 = |x0: f64, rho: f64| match f.jet(x0, rho) {
        Ok(j) => quadratic_factor(alpha, &j, rho),
        Err(_) => f64::NAN,
    };
    let mut out = trace_zero_set(&f1, window, resolution, SingularBranch::F1);
    out.extend(trace_zero_set(&f2, window, resolution, SingularBranch::F2));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum EdgeId {
    /// Between nodes `(i, j)` and `(i + 1, j)`.
    Along(usize, usize),
    /// Between nodes `(i, j)` and `(i, j + 1)`.
    Across(usize, usize),
}

fn trace_zero_set<F>(f: &F, w: Window, n: usize, branch: SingularBranch) -> Vec<ContourPolyline>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let x0_at = |i: usize| w.x0.0 + (w.x0.1 - w.x0.0) * i as f64 / n as f64;
    let rho_at = |j: usize| w.rho.0 + (w.rho.1 - w.rho.0) * j as f64 / n as f64;
    // values[j][i] at (x0_i, rho_j), rows in parallel.
    let values: Vec<Vec<f64>> =
        (0..=n).into_par_iter().map(|j| (0..=n).map(|i| f(x0_at(i), rho_at(j))).collect()).collect();
    let node = |i: usize, j: usize| ([x0_at(i), rho_at(j)], values[j][i]);
    let crosses = |a: f64, b: f64| a.is_finite() && b.is_finite() && ((a > 0.0) != (b > 0.0));

    let mut edges = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            if i < n && crosses(values[j][i], values[j][i + 1]) {
                edges.push(EdgeId::Along(i, j));
            }
            if j < n && crosses(values[j][i], values[j + 1][i]) {
                edges.push(EdgeId::Across(i, j));
            }
        }
    }
    let refined: BTreeMap<EdgeId, Option<[f64; 2]>> = edges
        .par_iter()
        .map(|&e| {
            let (a, b) = match e {
                EdgeId::Along(i, j) => (node(i, j), node(i + 1, j)),
                EdgeId::Across(i, j) => (node(i, j), node(i, j + 1)),
            };
            (e, refine_crossing(f, a, b))
        })
        .collect();

    let segments: Vec<(EdgeId, EdgeId)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut row = Vec::new();
            for i in 0..n {
                cell_segments(f, &values, i, j, [x0_at(i), x0_at(i + 1)], [rho_at(j), rho_at(j + 1)], &mut row);
            }
            row
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .filter(|(a, b)| matches!(refined.get(a), Some(Some(_))) && matches!(refined.get(b), Some(Some(_))))
        .collect();

    stitch(&segments)
        .into_iter()
        .map(|(chain, closed)| ContourPolyline {
            branch,
            vertices: chain.iter().map(|e| refined[e].expect("filtered above")).collect(),
            closed,
        })
        .collect()
}

/// Bisection along a sign-changing edge; `None` if the refined residual stays
/// above [`VERTEX_TOL`] (a pole or jump rather than a zero).
fn refine_crossing<F>(f: &F, a: ([f64; 2], f64), b: ([f64; 2], f64)) -> Option<[f64; 2]>
where
    F: Fn(f64, f64) -> f64,
{
    let at = |t: f64| [a.0[0] + t * (b.0[0] - a.0[0]), a.0[1] + t * (b.0[1] - a.0[1])];
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut flo, mut fhi) = (a.1, b.1);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let p = at(mid);
        let fm = f(p[0], p[1]);
        if !fm.is_finite() {
            return None;
        }
        if fm == 0.0 {
            return Some(p);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let mut best = if flo.abs() <= fhi.abs() { (lo, flo.abs()) } else { (hi, fhi.abs()) };
    let t = lo - flo * (hi - lo) / (fhi - flo);
    if t > lo && t < hi {
        let p = at(t);
        let v = f(p[0], p[1]).abs();
        if v < best.1 {
            best = (t, v);
        }
    }
    (best.1 <= VERTEX_TOL).then(|| at(best.0))
}

/// Marching-squares segments of cell `(i, j)`; saddles are resolved by the
/// value at the cell centre.
fn cell_segments<F>(
    f: &F,
    values: &[Vec<f64>],
    i: usize,
    j: usize,
    xs: [f64; 2],
    rs: [f64; 2],
    out: &mut Vec<(EdgeId, EdgeId)>,
) where
    F: Fn(f64, f64) -> f64,
{
    let v = [values[j][i], values[j][i + 1], values[j + 1][i + 1], values[j + 1][i]];
    if v.iter().any(|x| !x.is_finite()) {
        return;
    }
    let pos = v.map(|x| x > 0.0);
    let bottom = EdgeId::Along(i, j);
    let right = EdgeId::Across(i + 1, j);
    let top = EdgeId::Along(i, j + 1);
    let left = EdgeId::Across(i, j);
    // Edge k joins corner k and corner k+1.
    let sides = [bottom, right, top, left];
    let cut: Vec<EdgeId> = (0..4).filter(|&k| pos[k] != pos[(k + 1) % 4]).map(|k| sides[k]).collect();
    match cut.len() {
        2 => out.push((cut[0], cut[1])),
        4 => {
            let centre = f(0.5 * (xs[0] + xs[1]), 0.5 * (rs[0] + rs[1]));
            if !centre.is_finite() {
                return;
            }
            if (centre > 0.0) == pos[0] {
                // Corners 0 and 2 connect through the centre; isolate 1 and 3.
                out.push((bottom, right));
                out.push((top, left));
            } else {
                out.push((left, bottom));
                out.push((right, top));
            }
        }
        _ => {}
    }
}

/// Joins segments sharing an edge into chains, in segment order.
fn stitch(segments: &[(EdgeId, EdgeId)]) -> Vec<(Vec<EdgeId>, bool)> {
    let mut at: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        at.entry(*a).or_default().push(k);
        at.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();
    let next = |edge: EdgeId, used: &[bool]| at[&edge].iter().copied().find(|&s| !used[s]);
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let mut forward = vec![a, b];
        let mut tail = b;
        while let Some(s) = next(tail, &used) {
            used[s] = true;
            let (p, q) = segments[s];
            tail = if p == tail { q } else { p };
            forward.push(tail);
        }
        let closed = forward.len() > 2 && forward.first() == forward.last();
        if !closed {
            let mut head = a;
            let mut backward = Vec::new();
            while let Some(s) = next(head, &used) {
                used[s] = true;
                let (p, q) = segments[s];
                head = if p == head { q } else { p };
                backward.push(head);
            }
            backward.reverse();
            backward.extend(forward);
            forward = backward;
        }
        chains.push((forward, closed));
    }
    chains
}
