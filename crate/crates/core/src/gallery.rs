//! Six worked meridional fields with analytic partials, their potentials and
//! the implicit equations of their predicted singular surfaces.
//!
//! `bessel_j0` and `bessel_i0` are homogeneous-medium fields (`alpha = 0`)
//! from the potentials `exp(beta x0) J0(beta rho)` and `cos(mu x0) I0(mu rho)`.
//! The other four are conjugates of radially holomorphic functions
//! (`alpha = 1`): a Mobius map, `a3 x^3 + a1 x`, `am1 x^-1 + am2 x^-2` and
//! `exp(-b1 x) - exp(-b2 x)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::efg::{MeridianFn, MeridionalFieldSpec, SingularBranch};
use crate::error::{Error, Result};
use crate::rq::AxialPair;
use crate::special::{bessel, BesselKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "example", rename_all = "snake_case")]
pub enum GalleryParams {
    BesselJ0 { beta: f64 },
    BesselI0 { mu: f64 },
    /// `(a x + b)(c x + d)^-1` with `b = (a d - 1) / c`.
    Mobius { a: f64, c: f64, d: f64 },
    Cubic { a3: f64, a1: f64 },
    Power { am1: f64, am2: f64 },
    ExpPair { b1: f64, b2: f64 },
}

pub const EXAMPLES: [&str; 6] = ["bessel_j0", "bessel_i0", "mobius", "cubic", "power", "exp_pair"];

impl GalleryParams {
    pub fn name(&self) -> &'static str {
        match self {
            GalleryParams::BesselJ0 { .. } => "bessel_j0",
            GalleryParams::BesselI0 { .. } => "bessel_i0",
            GalleryParams::Mobius { .. } => "mobius",
            GalleryParams::Cubic { .. } => "cubic",
            GalleryParams::Power { .. } => "power",
            GalleryParams::ExpPair { .. } => "exp_pair",
        }
    }

    /// Medium exponent the field belongs to.
    pub fn alpha(&self) -> f64 {
        match self {
            GalleryParams::BesselJ0 { .. } | GalleryParams::BesselI0 { .. } => 0.0,
            _ => 1.0,
        }
    }

    /// Builds parameters from `key = value` pairs; missing keys take the
    /// defaults `beta = mu = 1`, `a = 0, c = 1, d = 0`, `a3 = 1, a1 = 0`,
    /// `am1 = 1, am2 = -1`, `b1 = 1, b2 = 2`.
    pub fn from_pairs(example: &str, kv: &BTreeMap<String, f64>) -> Result<Self> {
        let known: &[&str] = match example {
            "bessel_j0" => &["beta"],
            "bessel_i0" => &["mu"],
            "mobius" => &["a", "c", "d"],
            "cubic" => &["a3", "a1"],
            "power" => &["am1", "am2"],
            "exp_pair" | "exp" => &["b1", "b2"],
            _ => return Err(Error::InvalidParams(format!("unknown example '{example}'"))),
        };
        if let Some(k) = kv.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::InvalidParams(format!("unknown parameter '{k}' for {example}")));
        }
        let get = |k: &str, default: f64| kv.get(k).copied().unwrap_or(default);
        let p = match example {
            "bessel_j0" => GalleryParams::BesselJ0 { beta: get("beta", 1.0) },
            "bessel_i0" => GalleryParams::BesselI0 { mu: get("mu", 1.0) },
            "mobius" => GalleryParams::Mobius { a: get("a", 0.0), c: get("c", 1.0), d: get("d", 0.0) },
            "cubic" => GalleryParams::Cubic { a3: get("a3", 1.0), a1: get("a1", 0.0) },
            "power" => GalleryParams::Power { am1: get("am1", 1.0), am2: get("am2", -1.0) },
            _ => GalleryParams::ExpPair { b1: get("b1", 1.0), b2: get("b2", 2.0) },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let vals: Vec<f64> = match *self {
            GalleryParams::BesselJ0 { beta } => vec![beta],
            GalleryParams::BesselI0 { mu } => vec![mu],
            GalleryParams::Mobius { a, c, d } => vec![a, c, d],
            GalleryParams::Cubic { a3, a1 } => vec![a3, a1],
            GalleryParams::Power { am1, am2 } => vec![am1, am2],
            GalleryParams::ExpPair { b1, b2 } => vec![b1, b2],
        };
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite parameter in {self:?}")));
        }
        match *self {
            GalleryParams::BesselJ0 { beta: s } | GalleryParams::BesselI0 { mu: s } if s == 0.0 => {
                Err(Error::InvalidParams("frequency must be nonzero".into()))
            }
            GalleryParams::Mobius { c, .. } if c == 0.0 => Err(Error::InvalidParams("mobius needs c != 0".into())),
            GalleryParams::ExpPair { b1, b2 } if !(b1 > 0.0 && b2 > 0.0) => {
                Err(Error::InvalidParams("exp_pair needs b1, b2 > 0".into()))
            }
            _ => Ok(()),
        }
    }

    /// The implied Mobius coefficient `b = (a d - 1) / c`.
    pub fn mobius_b(&self) -> Option<f64> {
        match *self {
            GalleryParams::Mobius { a, c, d } => Some((a * d - 1.0) / c),
            _ => None,
        }
    }
}

/// `J0(z)` and `J0'(z) = -J1(z)` for real `z` of either sign.
fn j0_pair(z: f64) -> (f64, f64) {
    let a = z.abs();
    let j0 = bessel(BesselKind::J, 0.0, a).expect("J0 at finite argument");
    let j1 = bessel(BesselKind::J, 1.0, a).expect("J1 at finite argument");
    (j0, -j1 * z.signum())
}

/// `J0''(z) = -J0(z) + J1(z)/z`, with the limit `-1/2` at 0.
fn j0_second(z: f64) -> f64 {
    if z == 0.0 {
        return -0.5;
    }
    let (j0, jp) = j0_pair(z);
    -j0 - jp / z
}

/// `I0(z)` and `I0'(z) = I1(z)` for real `z` of either sign.
fn i0_pair(z: f64) -> (f64, f64) {
    let a = z.abs();
    let i0 = bessel(BesselKind::I, 0.0, a).expect("I0 at finite argument");
    let i1 = bessel(BesselKind::I, 1.0, a).expect("I1 at finite argument");
    (i0, i1 * z.signum())
}

/// `I0''(z) = I0(z) - I1(z)/z`, with the limit `1/2` at 0.
fn i0_second(z: f64) -> f64 {
    if z == 0.0 {
        return 0.5;
    }
    let (i0, ip) = i0_pair(z);
    i0 - ip / z
}

fn arc(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> MeridianFn {
    Arc::new(f)
}

/// The field with analytic partials of `Erho`.
pub fn make_field(p: &GalleryParams) -> Result<MeridionalFieldSpec> {
    p.validate()?;
    let alpha = p.alpha();
    let (e0, er, d0, dr): (MeridianFn, MeridianFn, MeridianFn, MeridianFn) = match *p {
        GalleryParams::BesselJ0 { beta: b } => (
            arc(move |x0, rho| b * (b * x0).exp() * j0_pair(b * rho).0),
            arc(move |x0, rho| b * (b * x0).exp() * j0_pair(b * rho).1),
            arc(move |x0, rho| b * b * (b * x0).exp() * j0_pair(b * rho).1),
            arc(move |x0, rho| b * b * (b * x0).exp() * j0_second(b * rho)),
        ),
        GalleryParams::BesselI0 { mu: m } => (
            arc(move |x0, rho| -m * (m * x0).sin() * i0_pair(m * rho).0),
            arc(move |x0, rho| m * (m * x0).cos() * i0_pair(m * rho).1),
            arc(move |x0, rho| -m * m * (m * x0).sin() * i0_pair(m * rho).1),
            arc(move |x0, rho| m * m * (m * x0).cos() * i0_second(m * rho)),
        ),
        GalleryParams::Mobius { a, c, d } => {
            let k = 1.0 / (c * c);
            let s = d / c;
            (
                arc(move |x0, rho| {
                    let u = x0 + s;
                    -k * u / (u * u + rho * rho) + a / c
                }),
                arc(move |x0, rho| {
                    let u = x0 + s;
                    -k * rho / (u * u + rho * rho)
                }),
                arc(move |x0, rho| {
                    let u = x0 + s;
                    let q = u * u + rho * rho;
                    2.0 * k * u * rho / (q * q)
                }),
                arc(move |x0, rho| {
                    let u = x0 + s;
                    let q = u * u + rho * rho;
                    -k * (u * u - rho * rho) / (q * q)
                }),
            )
        }
        GalleryParams::Cubic { a3, a1 } => (
            arc(move |x0, rho| a3 * (x0 * x0 - 3.0 * rho * rho) * x0 + a1 * x0),
            arc(move |x0, rho| a3 * (rho * rho - 3.0 * x0 * x0) * rho - a1 * rho),
            arc(move |x0, rho| -6.0 * a3 * x0 * rho),
            arc(move |x0, rho| 3.0 * a3 * (rho * rho - x0 * x0) - a1),
        ),
        GalleryParams::Power { am1, am2 } => (
            arc(move |x0, rho| {
                let q = x0 * x0 + rho * rho;
                am1 * x0 / q + am2 * (x0 * x0 - rho * rho) / (q * q)
            }),
            arc(move |x0, rho| {
                let q = x0 * x0 + rho * rho;
                am1 * rho / q + 2.0 * am2 * x0 * rho / (q * q)
            }),
            arc(move |x0, rho| {
                let q = x0 * x0 + rho * rho;
                -2.0 * am1 * x0 * rho / (q * q) + 2.0 * am2 * rho * (rho * rho - 3.0 * x0 * x0) / (q * q * q)
            }),
            arc(move |x0, rho| {
                let q = x0 * x0 + rho * rho;
                am1 * (x0 * x0 - rho * rho) / (q * q) + 2.0 * am2 * x0 * (x0 * x0 - 3.0 * rho * rho) / (q * q * q)
            }),
        ),
        GalleryParams::ExpPair { b1, b2 } => (
            arc(move |x0, rho| (-b1 * x0).exp() * (b1 * rho).cos() - (-b2 * x0).exp() * (b2 * rho).cos()),
            arc(move |x0, rho| (-b1 * x0).exp() * (b1 * rho).sin() - (-b2 * x0).exp() * (b2 * rho).sin()),
            arc(move |x0, rho| {
                -b1 * (-b1 * x0).exp() * (b1 * rho).sin() + b2 * (-b2 * x0).exp() * (b2 * rho).sin()
            }),
            arc(move |x0, rho| {
                b1 * (-b1 * x0).exp() * (b1 * rho).cos() - b2 * (-b2 * x0).exp() * (b2 * rho).cos()
            }),
        ),
    };
    Ok(MeridionalFieldSpec::new(alpha, e0, er).with_partials(d0, dr))
}

/// Scalar potential `g` with `E0 = g_x0`, `Erho = g_rho`. For the `alpha = 1`
/// fields this is the real part of the primitive of the holomorphic function.
pub fn potential(p: &GalleryParams) -> Result<MeridianFn> {
    p.validate()?;
    let z = |x0: f64, rho: f64| AxialPair::new(x0, rho);
    Ok(match *p {
        GalleryParams::BesselJ0 { beta: b } => arc(move |x0, rho| (b * x0).exp() * j0_pair(b * rho).0),
        GalleryParams::BesselI0 { mu: m } => arc(move |x0, rho| (m * x0).cos() * i0_pair(m * rho).0),
        GalleryParams::Mobius { a, c, d } => arc(move |x0, rho| {
            let s = AxialPair::new(d / c, 0.0);
            (-(z(x0, rho) + s).ln().scale(1.0 / (c * c)) + z(x0, rho).scale(a / c)).u0
        }),
        GalleryParams::Cubic { a3, a1 } => arc(move |x0, rho| {
            let x = z(x0, rho);
            (x.powi(4).scale(a3 / 4.0) + x.powi(2).scale(a1 / 2.0)).u0
        }),
        GalleryParams::Power { am1, am2 } => arc(move |x0, rho| {
            let x = z(x0, rho);
            (x.ln().scale(am1) - x.inv().scale(am2)).u0
        }),
        GalleryParams::ExpPair { b1, b2 } => arc(move |x0, rho| {
            let x = z(x0, rho);
            ((-x.scale(b1)).exp().scale(-1.0 / b1) + (-x.scale(b2)).exp().scale(1.0 / b2)).u0
        }),
    })
}

/// One implicit equation `eval(x0, rho) = 0` of a predicted singular surface
/// (a surface of revolution about the x0 axis).
#[derive(Clone)]
pub struct ImplicitSurface {
    pub branch: SingularBranch,
    pub equation: &'static str,
    pub eval: MeridianFn,
}

impl std::fmt::Debug for ImplicitSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImplicitSurface").field("branch", &self.branch).field("equation", &self.equation).finish()
    }
}

impl ImplicitSurface {
    pub fn residual(&self, x0: f64, rho: f64) -> f64 {
        (self.eval)(x0, rho)
    }

    /// Predicate on R^3.
    pub fn contains(&self, x: [f64; 3], tol: f64) -> bool {
        self.residual(x[0], x[1].hypot(x[2])).abs() <= tol
    }
}

/// Kind of quadric traced by the cubic example's `Erho = 0` branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadric {
    OneSheetedHyperboloid,
    TwoSheetedHyperboloid,
    Cone,
}

pub fn cubic_quadric(a3: f64, a1: f64) -> Option<Quadric> {
    if a3 == 0.0 {
        None
    } else if a1 == 0.0 {
        Some(Quadric::Cone)
    } else if (a1 > 0.0) == (a3 > 0.0) {
        Some(Quadric::OneSheetedHyperboloid)
    } else {
        Some(Quadric::TwoSheetedHyperboloid)
    }
}

/// Closed-form singular-surface equations. The Mobius field has an empty
/// singular set and yields `NoClosedForm`.
pub fn predicted_singular_surface(p: &GalleryParams) -> Result<Vec<ImplicitSurface>> {
    p.validate()?;
    let f1 = |equation: &'static str, eval: MeridianFn| ImplicitSurface { branch: SingularBranch::F1, equation, eval };
    let f2 = |equation: &'static str, eval: MeridianFn| ImplicitSurface { branch: SingularBranch::F2, equation, eval };
    Ok(match *p {
        GalleryParams::BesselJ0 { beta: b } => vec![
            f1("J0'(beta rho) = 0", arc(move |_, rho| j0_pair(b * rho).1)),
            // Derivatives taken in the Bessel argument, as in the closed form.
            f2(
                "beta^2 J0'^2 + J0''^2 + J0' J0'' / rho = 0",
                arc(move |_, rho| {
                    let (_, jp) = j0_pair(b * rho);
                    let jpp = j0_second(b * rho);
                    b * b * jp * jp + jpp * jpp + jp * jpp / rho
                }),
            ),
        ],
        GalleryParams::BesselI0 { mu: m } => vec![
            f1("cos(mu x0) I0'(mu rho) = 0", arc(move |x0, rho| (m * x0).cos() * i0_pair(m * rho).1)),
            f2(
                "mu^2 sin^2 I0'^2 + cos^2 I0''^2 + cos^2 I0' I0'' / rho = 0",
                arc(move |x0, rho| {
                    let (s, c) = (m * x0).sin_cos();
                    let (_, ip) = i0_pair(m * rho);
                    let ipp = i0_second(m * rho);
                    m * m * s * s * ip * ip + c * c * ipp * ipp + c * c * ip * ipp / rho
                }),
            ),
        ],
        GalleryParams::Mobius { .. } => {
            return Err(Error::NoClosedForm("mobius: the singular set is empty".into()));
        }
        GalleryParams::Cubic { a3, a1 } => {
            vec![f1("3 a3 x0^2 - a3 rho^2 + a1 = 0", arc(move |x0, rho| 3.0 * a3 * x0 * x0 - a3 * rho * rho + a1))]
        }
        GalleryParams::Power { am1, am2 } => {
            vec![f1("am1 (x0^2 + rho^2) + 2 am2 x0 = 0", arc(move |x0, rho| am1 * (x0 * x0 + rho * rho) + 2.0 * am2 * x0))]
        }
        GalleryParams::ExpPair { b1, b2 } => vec![f1(
            "exp((b2 - b1) x0) sin(b1 rho) - sin(b2 rho) = 0",
            arc(move |x0, rho| ((b2 - b1) * x0).exp() * (b1 * rho).sin() - (b2 * rho).sin()),
        )],
    })
}

/// Which formula to use for the Mobius roots `lambda1,2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MobiusRootFormula {
    /// `+-|F'| = +-1 / (c^2 ((x0 + d/c)^2 + rho^2))`.
    Exact,
    /// `+-sqrt((x0 + d/c)^4 + rho^4) / (c^2 ((x0 + d/c)^2 + rho^2))`, a misprint
    /// kept for comparison; it is not an eigenvalue of the tensor.
    Misprinted,
}

/// `(lambda0, lambda1, lambda2)` of the Mobius field in closed form.
pub fn mobius_roots(p: &GalleryParams, x0: f64, rho: f64, formula: MobiusRootFormula) -> Result<[f64; 3]> {
    let GalleryParams::Mobius { c, d, .. } = *p else {
        return Err(Error::InvalidParams(format!("{} is not the mobius example", p.name())));
    };
    p.validate()?;
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho = {rho} must be positive")));
    }
    let u = x0 + d / c;
    let q = c * c * (u * u + rho * rho);
    let num = match formula {
        MobiusRootFormula::Exact => 1.0,
        MobiusRootFormula::Misprinted => (u.powi(4) + rho.powi(4)).sqrt(),
    };
    Ok([-1.0 / q, num / q, -num / q])
}

/// Outcome of comparing a closed-form root triple with eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootComparison {
    pub closed: [f64; 3],
    pub numeric: [f64; 3],
    pub max_difference: f64,
    /// True when the sorted triples differ by more than the tolerance.
    pub mismatch: bool,
}

pub fn compare_roots(closed: [f64; 3], numeric: [f64; 3], tol: f64) -> RootComparison {
    let mut a = closed;
    let mut b = numeric;
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let max_difference = (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max);
    RootComparison { closed: a, numeric: b, max_difference, mismatch: !(max_difference <= tol) }
}
