//! Reduced quaternions `x = x0 + i x1 + j x2` and radially holomorphic calculus.
//!
//! Off the axis every point is `x0 + I rho` with `I = i cos(theta) + j sin(theta)`,
//! `I^2 = -1`. Radially holomorphic functions are complex functions of
//! `x0 + i rho` evaluated in that plane ([`AxialPair`]) and lifted back along
//! `theta`.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReducedQuaternion {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
}

/// Cylindrical and polar coordinates of a reduced quaternion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub rho: f64,
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl ReducedQuaternion {
    pub const fn new(x0: f64, x1: f64, x2: f64) -> Self {
        ReducedQuaternion { x0, x1, x2 }
    }

    /// Point at `(x0, rho)` of the meridian half-plane with azimuth `theta`.
    pub fn from_cylindrical(x0: f64, rho: f64, theta: f64) -> Self {
        ReducedQuaternion::new(x0, rho * theta.cos(), rho * theta.sin())
    }

    pub fn rho(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn r(&self) -> f64 {
        self.x0.hypot(self.rho())
    }

    pub fn norm_sq(&self) -> f64 {
        self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2
    }

    pub fn conj(&self) -> Self {
        ReducedQuaternion::new(self.x0, -self.x1, -self.x2)
    }

    pub fn theta(&self) -> Result<f64> {
        if self.rho() == 0.0 {
            return Err(Error::DegenerateAxis);
        }
        Ok(self.x2.atan2(self.x1))
    }

    /// Polar angle `arg x` in `[0, pi]`.
    pub fn phi(&self) -> Result<f64> {
        if self.r() == 0.0 {
            return Err(Error::ZeroPoint);
        }
        Ok(self.rho().atan2(self.x0))
    }

    /// Value in the I-plane, `x0 + I rho`.
    pub fn axial(&self) -> AxialPair {
        AxialPair::new(self.x0, self.rho())
    }

    /// Unit direction `(cos theta, sin theta)` of the imaginary part.
    fn direction(&self) -> Result<(f64, f64)> {
        let rho = self.rho();
        if rho == 0.0 {
            return Err(Error::DegenerateAxis);
        }
        Ok((self.x1 / rho, self.x2 / rho))
    }

    pub fn meridian(&self) -> Result<MeridianPoint> {
        let theta = self.theta()?;
        Ok(MeridianPoint::new(self.x0, self.rho())?.with_theta(theta))
    }
}

pub fn decompose(x: &ReducedQuaternion) -> Result<Decomposition> {
    let rho = x.rho();
    if rho == 0.0 {
        return Err(Error::DegenerateAxis);
    }
    Ok(Decomposition { rho, r: x.r(), theta: x.theta()?, phi: x.phi()? })
}

/// Value `u0 + I urho` in the plane spanned by 1 and I.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxialPair {
    pub u0: f64,
    pub urho: f64,
}

impl AxialPair {
    pub const ZERO: AxialPair = AxialPair { u0: 0.0, urho: 0.0 };
    pub const ONE: AxialPair = AxialPair { u0: 1.0, urho: 0.0 };
    pub const I: AxialPair = AxialPair { u0: 0.0, urho: 1.0 };

    pub const fn new(u0: f64, urho: f64) -> Self {
        AxialPair { u0, urho }
    }

    pub fn norm(&self) -> f64 {
        self.u0.hypot(self.urho)
    }

    pub fn arg(&self) -> f64 {
        self.urho.atan2(self.u0)
    }

    pub fn conj(&self) -> Self {
        AxialPair::new(self.u0, -self.urho)
    }

    pub fn scale(&self, s: f64) -> Self {
        AxialPair::new(self.u0 * s, self.urho * s)
    }

    pub fn inv(&self) -> Self {
        let d = self.u0 * self.u0 + self.urho * self.urho;
        AxialPair::new(self.u0 / d, -self.urho / d)
    }

    pub fn exp(&self) -> Self {
        let m = self.u0.exp();
        AxialPair::new(m * self.urho.cos(), m * self.urho.sin())
    }

    /// Principal logarithm `ln|z| + I arg z`.
    pub fn ln(&self) -> Self {
        AxialPair::new(self.norm().ln(), self.arg())
    }

    pub fn cos(&self) -> Self {
        AxialPair::new(self.u0.cos() * self.urho.cosh(), -self.u0.sin() * self.urho.sinh())
    }

    pub fn sin(&self) -> Self {
        AxialPair::new(self.u0.sin() * self.urho.cosh(), self.u0.cos() * self.urho.sinh())
    }

    /// `|z|^n (cos n arg z + I sin n arg z)`.
    pub fn powi(&self, n: i32) -> Self {
        let m = self.norm().powi(n);
        let a = n as f64 * self.arg();
        AxialPair::new(m * a.cos(), m * a.sin())
    }

    /// Lift to R^3 along azimuth `theta`: `(u0, urho cos theta, urho sin theta)`.
    pub fn lift(&self, theta: f64) -> ReducedQuaternion {
        ReducedQuaternion::from_cylindrical(self.u0, self.urho, theta)
    }

    /// Lift along the direction of `x` (which must be off the axis).
    fn lift_like(&self, x: &ReducedQuaternion) -> Result<ReducedQuaternion> {
        let (c, s) = x.direction()?;
        Ok(ReducedQuaternion::new(self.u0, self.urho * c, self.urho * s))
    }
}

impl Add for AxialPair {
    type Output = AxialPair;
    fn add(self, o: AxialPair) -> AxialPair {
        AxialPair::new(self.u0 + o.u0, self.urho + o.urho)
    }
}

impl AddAssign for AxialPair {
    fn add_assign(&mut self, o: AxialPair) {
        self.u0 += o.u0;
        self.urho += o.urho;
    }
}

impl Sub for AxialPair {
    type Output = AxialPair;
    fn sub(self, o: AxialPair) -> AxialPair {
        AxialPair::new(self.u0 - o.u0, self.urho - o.urho)
    }
}

impl Neg for AxialPair {
    type Output = AxialPair;
    fn neg(self) -> AxialPair {
        AxialPair::new(-self.u0, -self.urho)
    }
}

impl Mul for AxialPair {
    type Output = AxialPair;
    fn mul(self, o: AxialPair) -> AxialPair {
        AxialPair::new(self.u0 * o.u0 - self.urho * o.urho, self.u0 * o.urho + self.urho * o.u0)
    }
}

impl Mul<f64> for AxialPair {
    type Output = AxialPair;
    fn mul(self, s: f64) -> AxialPair {
        self.scale(s)
    }
}

impl Div for AxialPair {
    type Output = AxialPair;
    fn div(self, o: AxialPair) -> AxialPair {
        self * o.inv()
    }
}

/// A point `(x0, rho)` of the open meridian half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeridianPoint {
    x0: f64,
    rho: f64,
    theta: Option<f64>,
}

impl MeridianPoint {
    pub fn new(x0: f64, rho: f64) -> Result<Self> {
        if !x0.is_finite() || !rho.is_finite() {
            return Err(Error::Domain(format!("non-finite meridian point ({x0}, {rho})")));
        }
        if rho == 0.0 {
            return Err(Error::DegenerateAxis);
        }
        if rho < 0.0 {
            return Err(Error::Domain(format!("rho = {rho} < 0")));
        }
        Ok(MeridianPoint { x0, rho, theta: None })
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn axial(&self) -> AxialPair {
        AxialPair::new(self.x0, self.rho)
    }

    pub fn norm(&self) -> f64 {
        self.x0.hypot(self.rho)
    }

    /// Lift to R^3; a missing azimuth is taken as 0.
    pub fn lift(&self) -> ReducedQuaternion {
        ReducedQuaternion::from_cylindrical(self.x0, self.rho, self.theta.unwrap_or(0.0))
    }

    fn shifted(&self, dx0: f64, drho: f64) -> MeridianPoint {
        MeridianPoint { x0: self.x0 + dx0, rho: self.rho + drho, theta: self.theta }
    }
}

/// Polyline in the meridian half-plane at a fixed azimuth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolylinePath {
    vertices: Vec<MeridianPoint>,
}

impl PolylinePath {
    pub fn new(vertices: Vec<MeridianPoint>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::EmptyPath);
        }
        for w in vertices.windows(2) {
            if w[0].x0 == w[1].x0 && w[0].rho == w[1].rho {
                return Err(Error::Domain("consecutive path vertices coincide".into()));
            }
            if w[0].theta != w[1].theta {
                return Err(Error::Domain("path vertices carry different azimuths".into()));
            }
        }
        Ok(PolylinePath { vertices })
    }

    pub fn segment(a: MeridianPoint, b: MeridianPoint) -> Result<Self> {
        PolylinePath::new(vec![a, b])
    }

    pub fn vertices(&self) -> &[MeridianPoint] {
        &self.vertices
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Elementary {
    Exp,
    Cos,
    Sin,
    Ln,
    Inverse,
    Conj,
}

impl Elementary {
    /// Evaluate in the I-plane.
    pub fn eval(self, z: AxialPair) -> AxialPair {
        match self {
            Elementary::Exp => z.exp(),
            Elementary::Cos => z.cos(),
            Elementary::Sin => z.sin(),
            Elementary::Ln => z.ln(),
            Elementary::Inverse => z.inv(),
            Elementary::Conj => z.conj(),
        }
    }
}

/// `x^n = r^n (cos n phi + I sin n phi)`.
pub fn rq_pow(x: &ReducedQuaternion, n: i32) -> Result<ReducedQuaternion> {
    if x.rho() == 0.0 {
        return Err(Error::DegenerateAxis);
    }
    x.axial().powi(n).lift_like(x)
}

pub fn rq_elementary(f: Elementary, x: &ReducedQuaternion) -> Result<ReducedQuaternion> {
    match f {
        Elementary::Conj => Ok(x.conj()),
        Elementary::Inverse => {
            let n2 = x.norm_sq();
            if n2 == 0.0 {
                return Err(Error::ZeroPoint);
            }
            Ok(ReducedQuaternion::new(x.x0 / n2, -x.x1 / n2, -x.x2 / n2))
        }
        _ => {
            if x.r() == 0.0 {
                return Err(Error::ZeroPoint);
            }
            if x.rho() == 0.0 {
                return Err(Error::DegenerateAxis);
            }
            f.eval(x.axial()).lift_like(x)
        }
    }
}

/// Default finite-difference step `cbrt(eps) * max(1, |p|)`.
pub fn default_step(p: &MeridianPoint) -> f64 {
    f64::EPSILON.cbrt() * p.norm().max(1.0)
}

fn partials<F>(f: &F, p: &MeridianPoint, h: f64) -> Result<(AxialPair, AxialPair)>
where
    F: Fn(MeridianPoint) -> AxialPair + ?Sized,
{
    if !(h > 0.0) {
        return Err(Error::StencilOutOfDomain(format!("step h = {h} must be positive")));
    }
    if p.rho <= h {
        return Err(Error::StencilOutOfDomain(format!("rho = {} <= h = {h}", p.rho)));
    }
    let central = |dx0: f64, drho: f64, h: f64| {
        (f(p.shifted(dx0, drho)) - f(p.shifted(-dx0, -drho))).scale(0.5 / h)
    };
    let rich = |a: AxialPair, b: AxialPair| (a.scale(4.0) - b).scale(1.0 / 3.0);
    let d0 = rich(central(0.5 * h, 0.0, 0.5 * h), central(h, 0.0, h));
    let dr = rich(central(0.0, 0.5 * h, 0.5 * h), central(0.0, h, h));
    Ok((d0, dr))
}

/// `(1/2)(d/dx0 - I d/drho) F`; equals `F'` for radially holomorphic `F`.
pub fn radial_derivative<F>(f: &F, p: &MeridianPoint, h: f64) -> Result<AxialPair>
where
    F: Fn(MeridianPoint) -> AxialPair + ?Sized,
{
    let (d0, dr) = partials(f, p, h)?;
    Ok((d0 - AxialPair::I * dr).scale(0.5))
}

/// `|(1/2)(d/dx0 + I d/drho) F|`; zero for radially holomorphic `F`.
pub fn cr_residual<F>(f: &F, p: &MeridianPoint, h: f64) -> Result<f64>
where
    F: Fn(MeridianPoint) -> AxialPair + ?Sized,
{
    let (d0, dr) = partials(f, p, h)?;
    Ok((d0 + AxialPair::I * dr).scale(0.5).norm())
}

fn segment_integral<F>(f: &F, a: &MeridianPoint, b: &MeridianPoint, nodes: &[f64], weights: &[f64]) -> AxialPair
where
    F: Fn(MeridianPoint) -> AxialPair + ?Sized,
{
    let dx = AxialPair::new(0.5 * (b.x0 - a.x0), 0.5 * (b.rho - a.rho));
    let mut acc = AxialPair::ZERO;
    for (t, w) in nodes.iter().zip(weights) {
        let s = 0.5 * (1.0 + t);
        let q = MeridianPoint { x0: a.x0 + s * (b.x0 - a.x0), rho: a.rho + s * (b.rho - a.rho), theta: a.theta };
        acc += f(q).scale(*w);
    }
    acc * dx
}

/// Maximum bisection depth for a segment whose refinement pass disagrees.
const MAX_DEPTH: usize = 24;
const SEGMENT_TOL: f64 = 1e-14;

fn segment_adaptive<F>(
    f: &F,
    a: &MeridianPoint,
    b: &MeridianPoint,
    coarse: AxialPair,
    rule: (&[f64], &[f64]),
    depth: usize,
) -> (AxialPair, f64)
where
    F: Fn(MeridianPoint) -> AxialPair + ?Sized,
{
    let m = MeridianPoint { x0: 0.5 * (a.x0 + b.x0), rho: 0.5 * (a.rho + b.rho), theta: a.theta };
    let left = segment_integral(f, a, &m, rule.0, rule.1);
    let right = segment_integral(f, &m, b, rule.0, rule.1);
    let fine = left + right;
    let err = (fine - coarse).norm();
    if depth >= MAX_DEPTH || err <= SEGMENT_TOL * fine.norm().max(1.0) {
        return (fine, err);
    }
    let (l, el) = segment_adaptive(f, a, &m, left, rule, depth + 1);
    let (r, er) = segment_adaptive(f, &m, b, right, rule, depth + 1);
    (l + r, el + er)
}

/// Line integral with its refinement-difference error estimate.
///
/// Each segment gets one refinement pass (the segment against its two
/// halves); halves whose results still disagree are bisected further.
pub fn line_integral_with_error<F>(f: &F, path: &PolylinePath, n_nodes: usize) -> Result<(AxialPair, f64)>
where
    F: Fn(MeridianPoint) -> AxialPair + ?Sized,
{
    if n_nodes < 2 {
        return Err(Error::Domain(format!("n_nodes = {n_nodes} < 2")));
    }
    let (x, w) = gauss_legendre(n_nodes);
    let mut total = AxialPair::ZERO;
    let mut err = 0.0;
    for seg in path.vertices.windows(2) {
        let (a, b) = (&seg[0], &seg[1]);
        let coarse = segment_integral(f, a, b, &x, &w);
        let (v, e) = segment_adaptive(f, a, b, coarse, (&x, &w), 0);
        total += v;
        err += e;
    }
    Ok((total, err))
}

/// `int F dx` along the path with `dx = dx0 + I drho`, Gauss-Legendre with
/// `n_nodes` per half-segment after one refinement pass.
pub fn line_integral<F>(f: &F, path: &PolylinePath, n_nodes: usize) -> Result<AxialPair>
where
    F: Fn(MeridianPoint) -> AxialPair + ?Sized,
{
    line_integral_with_error(f, path, n_nodes).map(|v| v.0)
}

/// Gauss-Legendre order used by [`primitive`].
pub const LINE_NODES: usize = 16;

/// `G(p) = base_value + int_{base}^{p} F dx` along the straight segment.
pub fn primitive<F>(f: F, base: MeridianPoint, base_value: AxialPair) -> impl Fn(MeridianPoint) -> AxialPair
where
    F: Fn(MeridianPoint) -> AxialPair,
{
    move |p: MeridianPoint| {
        if p.x0 == base.x0 && p.rho == base.rho {
            return base_value;
        }
        let end = MeridianPoint { theta: base.theta, ..p };
        let path = PolylinePath { vertices: vec![base, end] };
        base_value + line_integral(&f, &path, LINE_NODES).expect("straight segment with n >= 2")
    }
}
