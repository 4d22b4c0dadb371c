//! Laplace-Fueter and Fourier-Fueter transforms of real originals, the gamma
//! function of a reduced-quaternion argument, and the zero-divergence integrals.
//!
//! Transform values are radially holomorphic `F = u0 + I urho`; the associated
//! field is the conjugate, `E0 = u0`, `Erho = -urho`. Semi-infinite integrals
//! are truncated where an analytic tail bound, built from the original's
//! declared decay, falls below `abs_tol / 10`, and the rest is integrated by
//! adaptive Gauss-Kronrod.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, AdaptiveSettings};
use crate::rq::{AxialPair, ReducedQuaternion};

/// Bound on `|eta|` along one tail, in the distance `t >= 0` from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    /// `|eta| <= c (1 + t)^degree exp(-rate t)`.
    Exponential { c: f64, degree: u32, rate: f64 },
    /// `|eta| <= c exp(-e^t)`.
    DoubleExponential { c: f64 },
}

impl Tail {
    pub const fn exponential(rate: f64) -> Self {
        Tail::Exponential { c: 1.0, degree: 0, rate }
    }

    /// Upper bound of `int_T^inf |eta(t)| e^(g t) dt`, or `None` if it diverges.
    fn bound(&self, g: f64, t: f64) -> Option<f64> {
        match *self {
            Tail::Exponential { c, degree, rate } => {
                let s = rate - g;
                if !(s > 0.0) {
                    return None;
                }
                if degree == 0 {
                    return Some(c * (-s * t).exp() / s);
                }
                let k = f64::from(degree);
                // Beyond s (1 + t) >= 2k the integrand decays at least like exp(-s t / 2).
                if s * (1.0 + t) < 2.0 * k {
                    return Some(f64::INFINITY);
                }
                Some(2.0 * c * (1.0 + t).powf(k) * (-s * t).exp() / s)
            }
            Tail::DoubleExponential { c } => {
                let u = t.exp();
                if u < 1.0f64.max(2.0 * (g - 1.0)) {
                    return Some(f64::INFINITY);
                }
                Some(2.0 * c * u.powf(g - 1.0) * (-u).exp())
            }
        }
    }

    fn converges(&self, g: f64) -> bool {
        self.bound(g, 0.0).is_some()
    }

    /// Smallest power-of-two-refined `T` with tail bound below `tol`.
    fn truncation(&self, g: f64, tol: f64) -> Result<f64> {
        let ok = |t: f64| self.bound(g, t).is_some_and(|b| b < tol);
        let mut hi = 1.0;
        while !ok(hi) {
            hi *= 2.0;
            if hi > MAX_TRUNCATION {
                return Err(Error::QuadratureFailure(format!("tail bound not below {tol:e} by tau = {MAX_TRUNCATION}")));
            }
        }
        let mut lo = 0.0;
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

const MAX_TRUNCATION: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    /// `[0, inf)`.
    OneSided,
    /// `(-inf, inf)`.
    TwoSided,
}

/// Real original `eta(tau)` with declared decay on each side of its support.
#[derive(Clone)]
pub struct Original {
    pub eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub support: Support,
    /// Decay as `tau -> +inf`.
    pub right: Tail,
    /// Decay as `tau -> -inf`; only used for two-sided originals.
    pub left: Tail,
}

impl fmt::Debug for Original {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Original")
            .field("support", &self.support)
            .field("right", &self.right)
            .field("left", &self.left)
            .finish()
    }
}

impl Original {
    pub fn one_sided(eval: impl Fn(f64) -> f64 + Send + Sync + 'static, right: Tail) -> Self {
        Original { eval: Arc::new(eval), support: Support::OneSided, right, left: Tail::exponential(0.0) }
    }

    pub fn two_sided(eval: impl Fn(f64) -> f64 + Send + Sync + 'static, right: Tail, left: Tail) -> Self {
        Original { eval: Arc::new(eval), support: Support::TwoSided, right, left }
    }

    /// `eta = 1` on `[0, inf)`.
    pub fn one() -> Self {
        Original::one_sided(|_| 1.0, Tail::exponential(0.0))
    }

    /// `eta = tau` on `[0, inf)`.
    pub fn tau() -> Self {
        Original::one_sided(|t| t, Tail::Exponential { c: 1.0, degree: 1, rate: 0.0 })
    }

    /// `eta = exp(-a tau)` on `[0, inf)`.
    pub fn exp_decay(a: f64) -> Self {
        Original::one_sided(move |t| (-a * t).exp(), Tail::exponential(a))
    }

    /// `eta = exp(-e^tau)` on the whole line.
    pub fn double_exp() -> Self {
        Original::two_sided(|t| (-t.exp()).exp(), Tail::DoubleExponential { c: 1.0 }, Tail::exponential(0.0))
    }

    pub fn eval(&self, tau: f64) -> f64 {
        (self.eval)(tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Budget of integrand evaluations per integral.
    pub max_nodes: usize,
    /// Fixed truncation point; `None` picks it from the tail bound.
    pub truncation_tau: Option<f64>,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings { abs_tol: 1e-12, rel_tol: 1e-12, max_nodes: 600_000, truncation_tau: None }
    }
}

impl QuadratureSettings {
    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        if let Some(t) = self.truncation_tau {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!("truncation_tau = {t} must be positive")));
            }
        }
        Ok(())
    }

    fn adaptive(&self) -> AdaptiveSettings {
        AdaptiveSettings { abs_tol: self.abs_tol, rel_tol: self.rel_tol, max_panels: (self.max_nodes / 15).max(1) }
    }

    fn cut(&self, tail: &Tail, g: f64) -> Result<(f64, f64)> {
        let tol = self.abs_tol / 10.0;
        match self.truncation_tau {
            Some(t) => Ok((t, tail.bound(g, t).unwrap_or(f64::INFINITY))),
            None => {
                let t = tail.truncation(g, tol)?;
                Ok((t, tail.bound(g, t).unwrap_or(f64::INFINITY)))
            }
        }
    }
}

/// Transform value with an error estimate (quadrature plus tail bound).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformValue {
    pub value: AxialPair,
    pub error: f64,
}

/// Integrates a vector integrand over the support with tail truncation.
/// `g_right`/`g_left` are the kernel growth rates along each tail.
fn integrate_support<const N: usize>(
    o: &Original,
    f: impl Fn(f64) -> [f64; N],
    g_right: f64,
    g_left: f64,
    q: &QuadratureSettings,
) -> Result<([f64; N], f64)> {
    let (tr, br) = q.cut(&o.right, g_right)?;
    let s = q.adaptive();
    let right = integrate::<N, _>(&f, 0.0, tr, &s)?;
    let mut value = right.value;
    let mut err = right.error.iter().cloned().fold(0.0, f64::max) + br;
    if o.support == Support::TwoSided {
        let (tl, bl) = q.cut(&o.left, g_left)?;
        let left = integrate::<N, _>(&f, -tl, 0.0, &s)?;
        for k in 0..N {
            value[k] += left.value[k];
        }
        err += left.error.iter().cloned().fold(0.0, f64::max) + bl;
    }
    Ok((value, err))
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 {
        Ok(())
    } else {
        Err(Error::DegenerateAxis)
    }
}

fn lf_domain(o: &Original, z: AxialPair) -> Result<()> {
    if !o.right.converges(-z.u0) {
        return Err(Error::ConvergenceDomain(format!(
            "right tail {:?} with x0 = {} does not decay",
            o.right, z.u0
        )));
    }
    if o.support == Support::TwoSided && !o.left.converges(z.u0) {
        return Err(Error::ConvergenceDomain(format!("left tail {:?} with x0 = {} does not decay", o.left, z.u0)));
    }
    Ok(())
}

/// `int eta(tau) e^(-z tau) dtau` for a plane number `z = u0 + I urho` of either
/// sign of `urho`.
pub fn laplace_fueter_plane(o: &Original, z: AxialPair, q: &QuadratureSettings) -> Result<TransformValue> {
    q.validate()?;
    lf_domain(o, z)?;
    let (x0, rho) = (z.u0, z.urho);
    let f = |t: f64| {
        let w = o.eval(t) * (-x0 * t).exp();
        let (s, c) = (rho * t).sin_cos();
        [w * c, -w * s]
    };
    let (v, error) = integrate_support(o, f, -x0, x0, q)?;
    Ok(TransformValue { value: AxialPair::new(v[0], v[1]), error })
}

/// One- or two-sided Laplace-Fueter transform at `x`, per the original's support.
pub fn laplace_fueter(o: &Original, x: &ReducedQuaternion, q: &QuadratureSettings) -> Result<TransformValue> {
    check_rho(x.rho())?;
    laplace_fueter_plane(o, x.axial(), q)
}

/// `sum_k gamma_k LF{eta_k; x}` with plane coefficients, integrated jointly.
pub fn laplace_fueter_superposition(
    terms: &[(AxialPair, &Original)],
    x: &ReducedQuaternion,
    q: &QuadratureSettings,
) -> Result<TransformValue> {
    check_rho(x.rho())?;
    q.validate()?;
    let z = x.axial();
    let mut value = AxialPair::ZERO;
    let mut error = 0.0;
    for (gamma, o) in terms {
        lf_domain(o, z)?;
        let t = laplace_fueter_plane(o, z, q)?;
        value += *gamma * t.value;
        error += gamma.norm() * t.error;
    }
    Ok(TransformValue { value, error })
}

/// `Gamma(-x) = int_{-inf}^{inf} exp(-e^tau) e^(-x tau) dtau`, convergent for `x0 < 0`.
pub fn gamma_rq(x: &ReducedQuaternion, q: &QuadratureSettings) -> Result<TransformValue> {
    check_rho(x.rho())?;
    if !(x.x0 < 0.0) {
        return Err(Error::ConvergenceDomain(format!(
            "Gamma(-x) needs x0 < 0 (the tau -> -inf tail grows like e^(-x0 tau)); got x0 = {}",
            x.x0
        )));
    }
    laplace_fueter(&Original::double_exp(), x, q)
}

/// The conjugate pair `(u0, -urho)` of [`gamma_rq`].
pub fn gamma_rq_conjugate(x: &ReducedQuaternion, q: &QuadratureSettings) -> Result<TransformValue> {
    let t = gamma_rq(x, q)?;
    Ok(TransformValue { value: t.value.conj(), error: t.error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FourierKind {
    Cosine,
    Sine,
    Exponential,
}

/// The three Fourier-Fueter transforms from one set of quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierTriple {
    pub cosine: AxialPair,
    pub sine: AxialPair,
    pub exponential: AxialPair,
    pub error: f64,
}

impl FourierTriple {
    pub fn get(&self, kind: FourierKind) -> AxialPair {
        match kind {
            FourierKind::Cosine => self.cosine,
            FourierKind::Sine => self.sine,
            FourierKind::Exponential => self.exponential,
        }
    }
}

/// `cos(x tau)`, `sin(x tau)` and `e^(-I x tau)` transforms over `[0, inf)`.
///
/// With `C = int eta cosh(rho t) cos(x0 t)`, `S = int eta sinh(rho t) sin(x0 t)`,
/// `A = int eta cosh(rho t) sin(x0 t)`, `B = int eta sinh(rho t) cos(x0 t)`:
/// cosine `= C - I S`, sine `= A + I B`, exponential `= cosine - I sine`.
pub fn fourier_fueter_all(o: &Original, x: &ReducedQuaternion, q: &QuadratureSettings) -> Result<FourierTriple> {
    let rho = x.rho();
    check_rho(rho)?;
    q.validate()?;
    if o.support != Support::OneSided {
        return Err(Error::Domain("Fourier-Fueter transforms take one-sided originals".into()));
    }
    if !o.right.converges(rho) {
        return Err(Error::ConvergenceDomain(format!(
            "kernels grow like e^(rho tau) with rho = {rho}; right tail {:?} is not faster",
            o.right
        )));
    }
    let x0 = x.x0;
    let f = |t: f64| {
        let e = o.eval(t);
        let (ch, sh) = ((rho * t).cosh(), (rho * t).sinh());
        let (s, c) = (x0 * t).sin_cos();
        [e * ch * c, e * sh * s, e * ch * s, e * sh * c]
    };
    let (v, error) = integrate_support(o, f, rho, 0.0, q)?;
    let [c, s, a, b] = v;
    let cosine = AxialPair::new(c, -s);
    let sine = AxialPair::new(a, b);
    Ok(FourierTriple { cosine, sine, exponential: cosine - AxialPair::I * sine, error })
}

pub fn fourier_fueter(
    kind: FourierKind,
    o: &Original,
    x: &ReducedQuaternion,
    q: &QuadratureSettings,
) -> Result<TransformValue> {
    let t = fourier_fueter_all(o, x, q)?;
    Ok(TransformValue { value: t.get(kind), error: t.error })
}

/// Field whose divergence integral is evaluated.
#[derive(Debug, Clone)]
pub enum DivergenceSource {
    LaplaceOneSided(Original),
    Gamma,
    FourierCosine(Original),
    FourierSine(Original),
    FourierExponential(Original),
    /// `exp(-b1 x) - exp(-b2 x)`, in the cleared form
    /// `exp((b2 - b1) x0) sin(b1 rho) - sin(b2 rho)`.
    GalleryExp { b1: f64, b2: f64 },
}

/// The zero-divergence integral of each transform family at `(x0, rho)`:
/// `int eta e^(-x0 t) sin(rho t)` (Laplace, gamma), `int eta sinh(rho t) sin(x0 t)`
/// (cosine), `int eta sinh(rho t) cos(x0 t)` (sine), `int eta e^(rho t) sin(x0 t)`
/// (exponential).
pub fn zero_divergence_residual(src: &DivergenceSource, x0: f64, rho: f64, q: &QuadratureSettings) -> Result<f64> {
    check_rho(rho)?;
    let x = ReducedQuaternion::new(x0, rho, 0.0);
    Ok(match src {
        DivergenceSource::LaplaceOneSided(o) => -laplace_fueter(o, &x, q)?.value.urho,
        DivergenceSource::Gamma => -gamma_rq(&x, q)?.value.urho,
        DivergenceSource::FourierCosine(o) => -fourier_fueter_all(o, &x, q)?.cosine.urho,
        DivergenceSource::FourierSine(o) => fourier_fueter_all(o, &x, q)?.sine.urho,
        DivergenceSource::FourierExponential(o) => -fourier_fueter_all(o, &x, q)?.exponential.urho,
        DivergenceSource::GalleryExp { b1, b2 } => {
            if !(*b1 > 0.0 && *b2 > 0.0) {
                return Err(Error::InvalidParams("exp pair needs b1, b2 > 0".into()));
            }
            ((b2 - b1) * x0).exp() * (b1 * rho).sin() - (b2 * rho).sin()
        }
    })
}

/// Bisection steps when polishing a bracketed root.
const ROOT_STEPS: usize = 60;

/// Roots in `rho` of the zero-divergence integral at fixed `x0`, bracketed on
/// `n_scan` equal subintervals of `rho_range` and refined by bisection.
pub fn zero_divergence_roots(
    src: &DivergenceSource,
    x0: f64,
    rho_range: (f64, f64),
    n_scan: usize,
    q: &QuadratureSettings,
) -> Result<Vec<f64>> {
    let (lo, hi) = rho_range;
    if !(lo > 0.0 && hi > lo) || n_scan < 1 {
        return Err(Error::Domain(format!("bad scan range {rho_range:?} with {n_scan} steps")));
    }
    let at = |r: f64| zero_divergence_residual(src, x0, r, q);
    let mut roots = Vec::new();
    let mut a = lo;
    let mut fa = at(a)?;
    for k in 1..=n_scan {
        let b = lo + (hi - lo) * k as f64 / n_scan as f64;
        let fb = at(b)?;
        if fa == 0.0 {
            roots.push(a);
        } else if (fa > 0.0) != (fb > 0.0) && fb != 0.0 {
            let (mut l, mut r, mut fl) = (a, b, fa);
            for _ in 0..ROOT_STEPS {
                let m = 0.5 * (l + r);
                let fm = at(m)?;
                if fm == 0.0 {
                    l = m;
                    r = m;
                    break;
                }
                if (fm > 0.0) == (fl > 0.0) {
                    l = m;
                    fl = fm;
                } else {
                    r = m;
                }
            }
            roots.push(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        roots.push(a);
    }
    Ok(roots)
}
