//! Separated solutions of the Weinstein equation in Cartesian and
//! cylindrical coordinates, the Euler (power) branches, transverse fields
//! and the Stokes stream function of a meridional potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::rq::{line_integral, AxialPair, MeridianPoint, PolylinePath, LINE_NODES};
use crate::special::{bessel_with_derivative, BesselKind};

/// One separated mode: angular/transverse factor `C1 cos(l t) + C2 sin(l t)`
/// and radial/transverse combination `A1 Z1 + A2 Z2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub lambda: i32,
    pub c1: f64,
    pub c2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Mode {
    pub fn new(lambda: i32, c1: f64, c2: f64, a1: f64, a2: f64) -> Self {
        Mode { lambda, c1, c2, a1, a2 }
    }

    /// `(s(t), s'(t))`.
    fn trig(&self, t: f64) -> (f64, f64) {
        let l = self.lambda as f64;
        let (s, c) = (l * t).sin_cos();
        (self.c1 * c + self.c2 * s, l * (-self.c1 * s + self.c2 * c))
    }

    fn finite(&self) -> bool {
        [self.c1, self.c2, self.a1, self.a2].iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SovWarning {
    /// The Cartesian family is defined for non-integer frequency.
    IntegerFrequency(f64),
    /// `alpha = -1` makes the planar Euler branch constant.
    DegenerateExponent(f64),
}

/// Value and gradient `[d/dx0, d/dx1, d/dx2]`.
pub type ValueGrad3 = (f64, [f64; 3]);

/// Parameters of the Cartesian family
/// `h = sum (C1 cos l x1 + C2 sin l x1)(B1 cosh b x0 + B2 sinh b x0) Y(x2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartesianSoVParams {
    pub alpha: f64,
    pub beta: f64,
    pub b1: f64,
    pub b2: f64,
    pub modes: Vec<Mode>,
}

impl CartesianSoVParams {
    pub fn validate(&self) -> Result<Vec<SovWarning>> {
        if self.modes.is_empty() {
            return Err(Error::InvalidParams("at least one mode is required".into()));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.b1.is_finite() && self.b2.is_finite())
            || !self.modes.iter().all(Mode::finite)
        {
            return Err(Error::InvalidParams("coefficients must be finite".into()));
        }
        for m in &self.modes {
            let l = m.lambda as f64;
            if l * l == self.beta * self.beta {
                return Err(Error::DegenerateMode(format!(
                    "lambda^2 = beta^2 = {}; use euler_planar for this mode",
                    l * l
                )));
            }
        }
        let mut warnings = Vec::new();
        if self.beta.fract() == 0.0 {
            warnings.push(SovWarning::IntegerFrequency(self.beta));
        }
        Ok(warnings)
    }
}

/// `x^a (A1 Z1(k x) + A2 Z2(k x))` and its derivative in x.
fn weighted_bessel(x: f64, a: f64, nu: f64, k: f64, kinds: (BesselKind, BesselKind), a1: f64, a2: f64) -> Result<(f64, f64)> {
    let mut z = 0.0;
    let mut zp = 0.0;
    if a1 != 0.0 {
        let (v, d) = bessel_with_derivative(kinds.0, nu, k * x)?;
        z += a1 * v;
        zp += a1 * d;
    }
    if a2 != 0.0 {
        let (v, d) = bessel_with_derivative(kinds.1, nu, k * x)?;
        z += a2 * v;
        zp += a2 * d;
    }
    let p = x.powf(a);
    Ok((p * z, a * p / x * z + p * k * zp))
}

fn hyperbolic(b1: f64, b2: f64, beta: f64, x0: f64) -> (f64, f64) {
    let (c, s) = ((beta * x0).cosh(), (beta * x0).sinh());
    (b1 * c + b2 * s, beta * (b1 * s + b2 * c))
}

fn trigonometric(b1: f64, b2: f64, mu: f64, x0: f64) -> (f64, f64) {
    let (s, c) = (mu * x0).sin_cos();
    (b1 * c + b2 * s, mu * (-b1 * s + b2 * c))
}

/// Cartesian separated potential with its gradient.
///
/// Modes with `lambda^2 < beta^2` use `J, Y` of order `(alpha+1)/2` at
/// `x2 sqrt(beta^2 - lambda^2)`; modes with `lambda^2 > beta^2` use `I, K`
/// at `x2 sqrt(lambda^2 - beta^2)`.
pub fn cartesian_eval(p: &CartesianSoVParams, x: [f64; 3]) -> Result<ValueGrad3> {
    p.validate()?;
    let [x0, x1, x2] = x;
    if !(x2 > 0.0) {
        return Err(Error::Domain(format!("x2 = {x2} must be positive")));
    }
    let nu = 0.5 * (p.alpha + 1.0);
    let (xi, dxi) = hyperbolic(p.b1, p.b2, p.beta, x0);
    let mut h = 0.0;
    let mut g = [0.0; 3];
    for m in &p.modes {
        let l = m.lambda as f64;
        let d = p.beta * p.beta - l * l;
        let kinds = if d > 0.0 { (BesselKind::J, BesselKind::Y) } else { (BesselKind::I, BesselKind::K) };
        let (u, du) = weighted_bessel(x2, nu, nu, d.abs().sqrt(), kinds, m.a1, m.a2)?;
        let (s, ds) = m.trig(x1);
        h += s * xi * u;
        g[0] += s * dxi * u;
        g[1] += ds * xi * u;
        g[2] += s * xi * du;
    }
    Ok((h, g))
}

pub fn cartesian_potential(p: &CartesianSoVParams, x: [f64; 3]) -> Result<f64> {
    cartesian_eval(p, x).map(|v| v.0)
}

/// `A1 x2^(alpha+1) + A2`.
pub fn euler_planar(alpha: f64, a1: f64, a2: f64, x2: f64) -> Result<f64> {
    if !(x2 > 0.0) {
        return Err(Error::Domain(format!("x2 = {x2} must be positive")));
    }
    Ok(a1 * x2.powf(alpha + 1.0) + a2)
}

pub fn euler_planar_warnings(alpha: f64) -> Vec<SovWarning> {
    if alpha == -1.0 {
        vec![SovWarning::DegenerateExponent(alpha)]
    } else {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `cosh/sinh` in x0 with `J, Y` in rho.
    Hyperbolic,
    /// `cos/sin` in x0 with `I, K` in rho.
    Trigonometric,
}

/// Parameters of the cylindrical family
/// `h = sum (C1 cos l theta + C2 sin l theta) Xi(x0) rho^(alpha/2) Z_nu(freq rho)`,
/// `nu = sqrt(alpha^2 + 4 l^2)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylindricalSoVParams {
    pub alpha: f64,
    pub freq: f64,
    pub branch: Branch,
    pub b1: f64,
    pub b2: f64,
    pub modes: Vec<Mode>,
}

impl CylindricalSoVParams {
    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidParams("at least one mode is required".into()));
        }
        if !(self.alpha.is_finite() && self.freq.is_finite() && self.b1.is_finite() && self.b2.is_finite())
            || !self.modes.iter().all(Mode::finite)
        {
            return Err(Error::InvalidParams("coefficients must be finite".into()));
        }
        if self.freq == 0.0 {
            return Err(Error::ZeroFrequency("use euler_cylindrical for the zero-frequency branch".into()));
        }
        if self.freq < 0.0 {
            return Err(Error::InvalidParams(format!("frequency {} must be positive", self.freq)));
        }
        Ok(())
    }
}

/// Cylindrical separated potential: `(h, [dh/dx0, dh/drho, dh/dtheta])`.
pub fn cylindrical_eval(p: &CylindricalSoVParams, x0: f64, theta: f64, rho: f64) -> Result<ValueGrad3> {
    p.validate()?;
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho = {rho} must be positive")));
    }
    let (xi, dxi, kinds) = match p.branch {
        Branch::Hyperbolic => {
            let (a, b) = hyperbolic(p.b1, p.b2, p.freq, x0);
            (a, b, (BesselKind::J, BesselKind::Y))
        }
        Branch::Trigonometric => {
            let (a, b) = trigonometric(p.b1, p.b2, p.freq, x0);
            (a, b, (BesselKind::I, BesselKind::K))
        }
    };
    let mut h = 0.0;
    let mut g = [0.0; 3];
    for m in &p.modes {
        let l = m.lambda as f64;
        let nu = 0.5 * (p.alpha * p.alpha + 4.0 * l * l).sqrt();
        let (u, du) = weighted_bessel(rho, 0.5 * p.alpha, nu, p.freq, kinds, m.a1, m.a2)?;
        let (s, ds) = m.trig(theta);
        h += s * xi * u;
        g[0] += s * dxi * u;
        g[1] += s * xi * du;
        g[2] += ds * xi * u;
    }
    Ok((h, g))
}

pub fn cylindrical_potential(p: &CylindricalSoVParams, x0: f64, theta: f64, rho: f64) -> Result<f64> {
    cylindrical_eval(p, x0, theta, rho).map(|v| v.0)
}

/// Meridional product `Xi(x0) rho^(alpha/2) (A1 Z1 + A2 Z2)` with Bessel functions of
/// order exactly `alpha/2` (negative for alpha < 0).
#[allow(clippy::too_many_arguments)]
pub fn meridional_product(
    alpha: f64,
    branch: Branch,
    freq: f64,
    b: (f64, f64),
    a: (f64, f64),
    x0: f64,
    rho: f64,
) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho = {rho} must be positive")));
    }
    if freq == 0.0 {
        return Err(Error::ZeroFrequency("meridional product needs a nonzero frequency".into()));
    }
    let (xi, kinds) = match branch {
        Branch::Hyperbolic => (hyperbolic(b.0, b.1, freq, x0).0, (BesselKind::J, BesselKind::Y)),
        Branch::Trigonometric => (trigonometric(b.0, b.1, freq, x0).0, (BesselKind::I, BesselKind::K)),
    };
    let nu = 0.5 * alpha;
    Ok(xi * weighted_bessel(rho, nu, nu, freq, kinds, a.0, a.1)?.0)
}

/// Exponents `(alpha +- sqrt(alpha^2 + 4 lambda^2)) / 2` of the cylindrical Euler branch.
pub fn euler_exponents(alpha: f64, lambda: i32) -> (f64, f64) {
    let l = lambda as f64;
    let d = (alpha * alpha + 4.0 * l * l).sqrt();
    (0.5 * (alpha + d), 0.5 * (alpha - d))
}

/// `(Y, Y')` for `Y = A1 rho^p+ + A2 rho^p-`.
fn euler_cyl_with_derivative(alpha: f64, lambda: i32, a1: f64, a2: f64, rho: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho = {rho} must be positive")));
    }
    let (pp, pm) = euler_exponents(alpha, lambda);
    let (u, v) = (rho.powf(pp), rho.powf(pm));
    Ok((a1 * u + a2 * v, (a1 * pp * u + a2 * pm * v) / rho))
}

/// `A1 rho^p+ + A2 rho^p-`. With `alpha = lambda = 0` both exponents vanish and
/// the second solution `ln rho` is not represented.
pub fn euler_cylindrical(alpha: f64, lambda: i32, a1: f64, a2: f64, rho: f64) -> Result<f64> {
    euler_cyl_with_derivative(alpha, lambda, a1, a2, rho).map(|v| v.0)
}

/// Transverse potential `h = Y(rho) s(theta)` with `E = grad h` in the (x1, x2) plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseValue {
    pub h: f64,
    pub e1: f64,
    pub e2: f64,
}

pub fn transverse_potential(alpha: f64, mode: &Mode, theta: f64, rho: f64) -> Result<TransverseValue> {
    let (u, du) = euler_cyl_with_derivative(alpha, mode.lambda, mode.a1, mode.a2, rho)?;
    let (s, ds) = mode.trig(theta);
    let (sn, cs) = theta.sin_cos();
    Ok(TransverseValue {
        h: u * s,
        e1: du * s * cs - u * ds * sn / rho,
        e2: du * s * sn + u * ds * cs / rho,
    })
}

/// Gradient `(g_x0, g_rho)` of a meridional function by finite differences.
pub fn meridional_gradient<G>(g: &G, p: &MeridianPoint) -> (f64, f64)
where
    G: Fn(MeridianPoint) -> f64 + ?Sized,
{
    let x0 = p.x0();
    let rho = p.rho();
    let h0 = fd::FIRST_STEP * fd::scale(x0, false);
    let hr = fd::FIRST_STEP * fd::scale(rho, true);
    let at = |a: f64, b: f64| g(MeridianPoint::new(a, b).expect("stencil stays in the half-plane"));
    let gx = fd::first(|t| at(t, rho), x0, h0);
    let gr = fd::first(|t| at(x0, t), rho, hr);
    (gx, gr)
}

/// Stream function along a given path: `int (g_hat_x0 dx0 + g_hat_rho drho)` with
/// `g_hat_rho = rho^(1-alpha) g_x0`, `g_hat_x0 = -rho^(1-alpha) g_rho`.
pub fn stokes_stream_along<G>(g: &G, alpha: f64, path: &PolylinePath) -> Result<f64>
where
    G: Fn(MeridianPoint) -> f64 + ?Sized,
{
    // Real part of F dx with F = (g_hat_x0, -g_hat_rho) is the 1-form above.
    let form = |p: MeridianPoint| {
        let (gx, gr) = meridional_gradient(g, &p);
        let w = p.rho().powf(1.0 - alpha);
        AxialPair::new(-w * gr, -w * gx)
    };
    Ok(line_integral(&form, path, LINE_NODES)?.u0)
}

/// Stokes stream function `g_hat` with `g_hat(base) = 0`, integrated along
/// straight segments from `base`.
pub fn stokes_stream<G>(g: G, alpha: f64, base: MeridianPoint) -> impl Fn(MeridianPoint) -> f64
where
    G: Fn(MeridianPoint) -> f64,
{
    move |p: MeridianPoint| {
        if p.x0() == base.x0() && p.rho() == base.rho() {
            return 0.0;
        }
        let path = PolylinePath::segment(base, p).expect("distinct endpoints");
        stokes_stream_along(&g, alpha, &path).expect("segment in the half-plane")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn planar_euler_examples() {
        assert_relative_eq!(euler_planar(1.0, 1.0, 0.0, 2.0).unwrap(), 4.0);
        assert_eq!(euler_planar(-1.0, 2.0, 3.0, 0.7).unwrap(), 5.0);
        assert_eq!(euler_planar_warnings(-1.0), vec![SovWarning::DegenerateExponent(-1.0)]);
        assert!(matches!(euler_planar(1.0, 1.0, 0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn cylindrical_euler_exponents() {
        assert_eq!(euler_exponents(0.0, 1), (1.0, -1.0));
        assert_eq!(euler_exponents(2.0, 0), (2.0, 0.0));
        assert_relative_eq!(euler_cylindrical(0.0, 1, 2.0, 3.0, 2.0).unwrap(), 4.0 + 1.5);
    }

    #[test]
    fn degenerate_mode_is_rejected() {
        let p = CartesianSoVParams { alpha: 0.0, beta: 2.0, b1: 1.0, b2: 0.0, modes: vec![Mode::new(2, 1.0, 0.0, 1.0, 0.0)] };
        assert!(matches!(cartesian_potential(&p, [0.0, 0.0, 1.0]), Err(Error::DegenerateMode(_))));
    }

    #[test]
    fn integer_frequency_warns() {
        let p = CartesianSoVParams { alpha: 0.0, beta: 1.0, b1: 1.0, b2: 0.0, modes: vec![Mode::new(0, 1.0, 0.0, 1.0, 0.0)] };
        assert_eq!(p.validate().unwrap(), vec![SovWarning::IntegerFrequency(1.0)]);
    }

    #[test]
    fn zero_frequency_is_rejected() {
        let p = CylindricalSoVParams {
            alpha: 1.0,
            freq: 0.0,
            branch: Branch::Hyperbolic,
            b1: 1.0,
            b2: 0.0,
            modes: vec![Mode::new(0, 1.0, 0.0, 1.0, 0.0)],
        };
        assert!(matches!(cylindrical_potential(&p, 0.0, 0.0, 1.0), Err(Error::ZeroFrequency(_))));
    }

    #[test]
    fn transverse_linear_example() {
        let m = Mode::new(1, 1.0, 0.0, 1.0, 0.0);
        for &(t, r) in &[(0.3, 0.5), (2.0, 1.7)] {
            let v = transverse_potential(0.0, &m, t, r).unwrap();
            assert_relative_eq!(v.h, r * f64::cos(t), max_relative = 1e-14);
            assert_relative_eq!(v.e1, 1.0, max_relative = 1e-14);
            assert!(v.e2.abs() < 1e-14);
        }
    }
}
