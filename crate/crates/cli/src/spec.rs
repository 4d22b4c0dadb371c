//! Parsing of command-line specifications into core objects: systems,
//! candidates, originals, grids, windows and points.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use meridian_core::efg::{MeridianFn, MeridionalFieldSpec, Window};
use meridian_core::fueter::{self, FourierKind, Original, QuadratureSettings};
use meridian_core::gallery::{self, GalleryParams};
use meridian_core::pde::{Arity, Candidate, Chart, Coefficient, Grid, GradientFn, ScalarFn, SystemId};
use meridian_core::rq::ReducedQuaternion;
use meridian_core::sov::{self, Branch, CartesianSoVParams, CylindricalSoVParams, Mode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::expr::Expr;

type Res<T> = std::result::Result<T, CliError>;

/// Splits `k=v,k=v` into a map of reals.
pub fn parse_kv(s: &str) -> Res<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("expected key=value, got '{item}'")))?;
        out.insert(k.trim().to_string(), parse_f64(v)?);
    }
    Ok(out)
}

pub fn parse_f64(s: &str) -> Res<f64> {
    let s = s.trim();
    s.parse::<f64>().map_err(|_| CliError::usage(format!("'{s}' is not a number")))
}

/// `x0,x1,x2`.
pub fn parse_point(s: &str) -> Res<[f64; 3]> {
    let v: Vec<f64> = s.split(',').map(parse_f64).collect::<Res<_>>()?;
    v.try_into().map_err(|_| CliError::usage(format!("point '{s}' needs three coordinates")))
}

/// `lo:hi` or `lo:hi:n`.
fn parse_range(s: &str) -> Res<(f64, f64, Option<usize>)> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b] => Ok((parse_f64(a)?, parse_f64(b)?, None)),
        [a, b, n] => {
            let n = n.trim().parse::<usize>().map_err(|_| CliError::usage(format!("bad count in '{s}'")))?;
            Ok((parse_f64(a)?, parse_f64(b)?, Some(n)))
        }
        _ => Err(CliError::usage(format!("expected lo:hi[:n], got '{s}'"))),
    }
}

fn named_items(s: &str) -> Res<Vec<(String, String)>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|item| {
            item.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::usage(format!("expected name=value, got '{item}'")))
        })
        .collect()
}

/// `x0=a:b,rho=c:d`.
pub fn parse_window(s: &str) -> Res<Window> {
    let mut x0 = None;
    let mut rho = None;
    for (k, v) in named_items(s)? {
        let (a, b, _) = parse_range(&v)?;
        match k.as_str() {
            "x0" => x0 = Some((a, b)),
            "rho" => rho = Some((a, b)),
            _ => return Err(CliError::usage(format!("unknown window axis '{k}'"))),
        }
    }
    match (x0, rho) {
        (Some(x0), Some(rho)) => Ok(Window { x0, rho }),
        _ => Err(CliError::usage("window needs x0=a:b and rho=c:d")),
    }
}

/// Coordinate names of a grid, in column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Axes(pub Vec<String>);

impl Axes {
    fn names(&self) -> Vec<&str> {
        self.0.iter().map(String::as_str).collect()
    }

    /// Maps one row of grid coordinates to a point in the system's chart.
    pub fn to_chart(&self, chart: Chart, row: &[f64]) -> Res<Vec<f64>> {
        let names = self.names();
        match (chart, names.as_slice()) {
            (Chart::Space, ["x0", "x1", "x2"])
            | (Chart::Meridian, ["x0", "rho"])
            | (Chart::Plane, ["x0", "x2"])
            | (Chart::Transverse, ["x1", "x2"]) => Ok(row.to_vec()),
            (Chart::Space, ["x0", "rho", "theta"]) => {
                let (s, c) = row[2].sin_cos();
                Ok(vec![row[0], row[1] * c, row[1] * s])
            }
            _ => Err(CliError::usage(format!("grid axes {names:?} do not fit the {chart:?} chart"))),
        }
    }
}

/// Grid specification: a lattice, a seeded random sample, or a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Lattice(Vec<(String, f64, f64, usize)>),
    Random { n: usize },
    Csv(String),
}

impl GridSpec {
    pub fn parse(s: &str) -> Res<Self> {
        if s.ends_with(".csv") {
            return Ok(GridSpec::Csv(s.to_string()));
        }
        if let Some(n) = s.strip_prefix("random:") {
            let n = n.trim().parse().map_err(|_| CliError::usage(format!("bad sample count in '{s}'")))?;
            return Ok(GridSpec::Random { n });
        }
        let mut axes = Vec::new();
        for (k, v) in named_items(s)? {
            let (a, b, n) = parse_range(&v)?;
            let n = n.ok_or_else(|| CliError::usage(format!("axis {k} needs a count lo:hi:n")))?;
            if n < 2 || !(a.is_finite() && b.is_finite()) || a >= b {
                return Err(CliError::usage(format!("axis {k} needs finite lo < hi and n >= 2")));
            }
            axes.push((k, a, b, n));
        }
        if axes.is_empty() {
            return Err(CliError::usage("empty grid"));
        }
        Ok(GridSpec::Lattice(axes))
    }

    /// Default lattice for a chart, away from the singular boundaries.
    pub fn default_for(system: &SystemId) -> Self {
        let ax = |v: &[(&str, f64, f64, usize)]| {
            GridSpec::Lattice(v.iter().map(|&(k, a, b, n)| (k.to_string(), a, b, n)).collect())
        };
        match system.chart() {
            Chart::Meridian => ax(&[("x0", -1.0, 1.0, 9), ("rho", 0.25, 2.0, 8)]),
            Chart::Plane => ax(&[("x0", -1.0, 1.0, 9), ("x2", 0.25, 2.0, 8)]),
            Chart::Transverse => ax(&[("x1", 0.5, 2.0, 8), ("x2", 0.5, 2.0, 8)]),
            Chart::Space => {
                let theta = match system {
                    SystemId::Bihyperbolic { .. } | SystemId::BihyperbolicMod { .. } => (0.2, 1.4),
                    _ => (0.3, 2.8),
                };
                ax(&[("x0", -1.0, 1.0, 5), ("rho", 0.5, 2.0, 4), ("theta", theta.0, theta.1, 4)])
            }
        }
    }

    /// Grid coordinates (`axes`, rows) before mapping to a chart.
    pub fn rows(&self, system: &SystemId, seed: u64) -> Res<(Axes, Vec<Vec<f64>>)> {
        match self {
            GridSpec::Lattice(axes) => {
                let names = Axes(axes.iter().map(|a| a.0.clone()).collect());
                let spec: Vec<(f64, f64, usize)> = axes.iter().map(|a| (a.1, a.2, a.3)).collect();
                Ok((names, Grid::lattice(&spec).points))
            }
            GridSpec::Random { n } => {
                let GridSpec::Lattice(axes) = GridSpec::default_for(system) else { unreachable!() };
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rows = (0..*n)
                    .map(|_| axes.iter().map(|a| rng.gen_range(a.1..=a.2)).collect())
                    .collect();
                Ok((Axes(axes.into_iter().map(|a| a.0).collect()), rows))
            }
            GridSpec::Csv(path) => read_grid_csv(Path::new(path)),
        }
    }

    /// The grid in the system's chart together with its raw rows.
    pub fn build(&self, system: &SystemId, seed: u64) -> Res<(Axes, Vec<Vec<f64>>, Grid)> {
        let (axes, rows) = self.rows(system, seed)?;
        let points = rows.iter().map(|r| axes.to_chart(system.chart(), r)).collect::<Res<_>>()?;
        Ok((axes, rows, Grid::from_points(points)))
    }
}

const COORD_NAMES: [&str; 5] = ["x0", "x1", "x2", "rho", "theta"];

/// Leading coordinate columns of a CSV grid; other columns are ignored.
fn read_grid_csv(path: &Path) -> Res<(Axes, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::io(e.to_string()))?.clone();
    let names: Vec<String> =
        headers.iter().take_while(|h| COORD_NAMES.contains(h)).map(str::to_string).collect();
    if names.is_empty() {
        return Err(CliError::usage(format!("{} has no coordinate columns", path.display())));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::io(e.to_string()))?;
        rows.push(rec.iter().take(names.len()).map(parse_f64).collect::<Res<Vec<f64>>>()?);
    }
    Ok((Axes(names), rows))
}

/// Splits `head:rest`.
fn split_spec(s: &str) -> (&str, &str) {
    match s.split_once(':') {
        Some((h, r)) => (h.trim(), r.trim()),
        None => (s.trim(), ""),
    }
}

/// `name,k=v,...` into the name and the pairs.
fn name_and_kv(rest: &str) -> Res<(String, BTreeMap<String, f64>)> {
    match rest.split_once(',') {
        Some((n, kv)) if !n.contains('=') => Ok((n.trim().to_string(), parse_kv(kv)?)),
        None if !rest.contains('=') => Ok((rest.trim().to_string(), BTreeMap::new())),
        _ => Ok((String::new(), parse_kv(rest)?)),
    }
}

fn take(kv: &mut BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    kv.remove(key).unwrap_or(default)
}

fn reject_rest(kv: &BTreeMap<String, f64>, what: &str) -> Res<()> {
    match kv.keys().next() {
        Some(k) => Err(CliError::usage(format!("unknown parameter '{k}' for {what}"))),
        None => Ok(()),
    }
}

fn int_param(v: f64, name: &str) -> Res<i32> {
    if v.fract() != 0.0 || v.abs() > 1e6 {
        return Err(CliError::usage(format!("{name} = {v} must be an integer")));
    }
    Ok(v as i32)
}

/// `--system TAG` with `--alpha` and extra `--params` (alpha1, alpha2, ...).
pub fn parse_system(tag: &str, alpha: f64, params: &BTreeMap<String, f64>) -> Res<SystemId> {
    let p = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    let a = alpha;
    Ok(match tag {
        "continuity" => SystemId::Continuity(Coefficient::planar_power(a)),
        "general-modification" => SystemId::GeneralModification(Coefficient::planar_power(a)),
        "static-maxwell" => SystemId::StaticMaxwell(Coefficient::planar_power(a)),
        "system-r" => SystemId::SystemR,
        "system-h" => SystemId::SystemH,
        "system-a3" => SystemId::SystemA3,
        "weinstein" => SystemId::Weinstein { alpha: a },
        "hyperbolic-mod" => SystemId::HyperbolicMod { alpha: a },
        "cart-epd" => SystemId::CartEpd { alpha: a },
        "vekua-cart" => SystemId::VekuaCart { alpha: a },
        "axial-eq" => SystemId::AxialEq { alpha: a },
        "axial-mod" => SystemId::AxialMod { alpha: a },
        "cyl-epd" => SystemId::CylEpd { alpha: a },
        "bihyperbolic" => SystemId::Bihyperbolic { alpha1: p("alpha1", a), alpha2: p("alpha2", a) },
        "bihyperbolic-mod" => SystemId::BihyperbolicMod { alpha1: p("alpha1", a), alpha2: p("alpha2", a) },
        "vekua-merid" => SystemId::VekuaMerid { alpha: a },
        "maxwell-merid" => SystemId::MaxwellMerid { alpha: a },
        "cr-merid" => SystemId::CrMerid,
        "stokes-beltrami" => SystemId::StokesBeltrami { alpha: a },
        "maxwell-transverse" => SystemId::MaxwellTransverse { alpha: a },
        "anisotropic-weinstein" => SystemId::AnisotropicWeinstein {
            alpha00: p("alpha00", 0.0),
            alpha11: p("alpha11", 0.0),
            alpha22: p("alpha22", a),
        },
        "anisotropic-system" => SystemId::AnisotropicSystem {
            alpha00: p("alpha00", 0.0),
            alpha11: p("alpha11", 0.0),
            alpha22: p("alpha22", a),
        },
        _ => return Err(CliError::usage(format!("unknown system '{tag}'"))),
    })
}

/// Systems written for `u = (E0, -E1, -E2)` rather than the field `E`.
fn conjugate_form(system: &SystemId) -> bool {
    use SystemId::*;
    matches!(
        system,
        GeneralModification(_)
            | SystemR
            | SystemH
            | SystemA3
            | HyperbolicMod { .. }
            | AxialMod { .. }
            | BihyperbolicMod { .. }
            | AnisotropicSystem { .. }
            | VekuaCart { .. }
            | VekuaMerid { .. }
            | CrMerid
    )
}

/// `exp-decay:a=2`, `one`, `tau`, `double-exp`.
pub fn parse_original(s: &str) -> Res<Original> {
    let (head, rest) = split_spec(s);
    let mut kv = parse_kv(rest)?;
    let o = match head {
        "one" => Original::one(),
        "tau" => Original::tau(),
        "exp-decay" => {
            let a = take(&mut kv, "a", 1.0);
            if !(a.is_finite() && a >= 0.0) {
                return Err(CliError::usage(format!("exp-decay rate a = {a} must be >= 0")));
            }
            Original::exp_decay(a)
        }
        "double-exp" => Original::double_exp(),
        _ => return Err(CliError::usage(format!("unknown original '{head}'"))),
    };
    reject_rest(&kv, head)?;
    Ok(o)
}

/// Transform families usable as fields and by the `transform` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Laplace,
    Gamma,
    GammaConjugate,
    Fourier(FourierKind),
}

impl TransformKind {
    pub fn parse(s: &str) -> Res<Self> {
        Ok(match s {
            "lf" => TransformKind::Laplace,
            "gamma" => TransformKind::Gamma,
            "gamma-conj" => TransformKind::GammaConjugate,
            "ffc" => TransformKind::Fourier(FourierKind::Cosine),
            "ffs" => TransformKind::Fourier(FourierKind::Sine),
            "ffe" => TransformKind::Fourier(FourierKind::Exponential),
            _ => return Err(CliError::usage(format!("unknown transform kind '{s}'"))),
        })
    }

    pub fn eval(
        self,
        o: &Original,
        x: &ReducedQuaternion,
        q: &QuadratureSettings,
    ) -> meridian_core::Result<fueter::TransformValue> {
        match self {
            TransformKind::Laplace => fueter::laplace_fueter(o, x, q),
            TransformKind::Gamma => fueter::gamma_rq(x, q),
            TransformKind::GammaConjugate => fueter::gamma_rq_conjugate(x, q),
            TransformKind::Fourier(k) => fueter::fourier_fueter(k, o, x, q),
        }
    }
}

/// A parsed candidate before it is fitted to a system's chart.
#[derive(Clone)]
pub enum Source {
    /// Meridional field `(E0, Erho)` with an optional potential.
    Meridional { field: MeridionalFieldSpec, potential: Option<MeridianFn> },
    /// Potential on R^3 with an optional analytic gradient.
    Space { h: ScalarFn, grad: Option<GradientFn>, alpha: f64, natural: &'static str },
    /// One expression per component, in the chart's coordinate names.
    Literal(Vec<String>),
}

impl Source {
    pub fn alpha(&self) -> Option<f64> {
        match self {
            Source::Meridional { field, .. } => Some(field.alpha),
            Source::Space { alpha, .. } => Some(*alpha),
            Source::Literal(_) => None,
        }
    }

    /// System whose solutions the source is built to be.
    pub fn natural_system(&self) -> Option<&'static str> {
        match self {
            Source::Meridional { potential: Some(_), .. } => Some("cyl-epd"),
            Source::Meridional { .. } => Some("maxwell-merid"),
            Source::Space { natural, .. } => Some(natural),
            Source::Literal(_) => None,
        }
    }
}

fn gallery_source(name: &str, kv: &BTreeMap<String, f64>) -> Res<Source> {
    let p = GalleryParams::from_pairs(name, kv)?;
    Ok(Source::Meridional { field: gallery::make_field(&p)?, potential: Some(gallery::potential(&p)?) })
}

/// Gallery example from `--example` and `--params`.
pub fn gallery_params(example: &str, params: Option<&str>) -> Res<GalleryParams> {
    let kv = params.map(parse_kv).transpose()?.unwrap_or_default();
    Ok(GalleryParams::from_pairs(example, &kv)?)
}

fn transform_source(rest: &str) -> Res<Source> {
    let mut items = rest.split(',').map(str::trim);
    let kind = TransformKind::parse(items.next().unwrap_or(""))?;
    let mut name = "one".to_string();
    let mut params = Vec::new();
    for item in items.filter(|t| !t.is_empty()) {
        match item.strip_prefix("original=") {
            Some(n) => name = n.to_string(),
            None => params.push(item),
        }
    }
    let orig = if params.is_empty() { name } else { format!("{name}:{}", params.join(",")) };
    let o = parse_original(&orig)?;
    let q = QuadratureSettings::default();
    let eval = move |x0: f64, rho: f64| -> (f64, f64) {
        let x = ReducedQuaternion::new(x0, rho, 0.0);
        match kind.eval(&o, &x, &q) {
            Ok(v) => (v.value.u0, -v.value.urho),
            Err(_) => (f64::NAN, f64::NAN),
        }
    };
    let eval = Arc::new(eval);
    let e = eval.clone();
    let e0: MeridianFn = Arc::new(move |x0, rho| e(x0, rho).0);
    let erho: MeridianFn = Arc::new(move |x0, rho| eval(x0, rho).1);
    Ok(Source::Meridional { field: MeridionalFieldSpec::new(1.0, e0, erho), potential: None })
}

/// `gallery:NAME,k=v`, `transform:KIND,original=NAME,k=v`, `euler-planar:...`,
/// `euler-cyl:...`, `cart-sov:...`, `cyl-sov:...`, `literal:EXPR[;EXPR...]`.
pub fn parse_candidate(s: &str) -> Res<Source> {
    let (head, rest) = split_spec(s);
    match head {
        "gallery" => {
            let (name, kv) = name_and_kv(rest)?;
            gallery_source(&name, &kv)
        }
        "transform" => transform_source(rest),
        "literal" => {
            let body = rest.trim().trim_matches('"');
            if body.is_empty() {
                return Err(CliError::usage("empty literal"));
            }
            Ok(Source::Literal(body.split(';').map(|t| t.trim().to_string()).collect()))
        }
        "euler-planar" => {
            let mut kv = parse_kv(rest)?;
            let alpha = take(&mut kv, "alpha", 0.0);
            let (a1, a2) = (take(&mut kv, "a1", 1.0), take(&mut kv, "a2", 0.0));
            reject_rest(&kv, head)?;
            let h: ScalarFn = Arc::new(move |x: &[f64]| sov::euler_planar(alpha, a1, a2, x[2]).unwrap_or(f64::NAN));
            let grad: GradientFn = Arc::new(move |x: &[f64]| [0.0, 0.0, a1 * (alpha + 1.0) * x[2].powf(alpha)]);
            Ok(Source::Space { h, grad: Some(grad), alpha, natural: "weinstein" })
        }
        "euler-cyl" => {
            let mut kv = parse_kv(rest)?;
            let alpha = take(&mut kv, "alpha", 0.0);
            let mode = Mode::new(
                int_param(take(&mut kv, "lambda", 1.0), "lambda")?,
                take(&mut kv, "c1", 1.0),
                take(&mut kv, "c2", 0.0),
                take(&mut kv, "a1", 1.0),
                take(&mut kv, "a2", 0.0),
            );
            reject_rest(&kv, head)?;
            let at = move |x: &[f64]| {
                let rho = x[1].hypot(x[2]);
                sov::transverse_potential(alpha, &mode, x[2].atan2(x[1]), rho)
            };
            let at2 = at;
            let h: ScalarFn = Arc::new(move |x: &[f64]| at(x).map_or(f64::NAN, |v| v.h));
            let grad: GradientFn =
                Arc::new(move |x: &[f64]| at2(x).map_or([f64::NAN; 3], |v| [0.0, v.e1, v.e2]));
            Ok(Source::Space { h, grad: Some(grad), alpha, natural: "axial-eq" })
        }
        "cart-sov" => {
            let mut kv = parse_kv(rest)?;
            let p = CartesianSoVParams {
                alpha: take(&mut kv, "alpha", 0.0),
                beta: take(&mut kv, "beta", 1.5),
                b1: take(&mut kv, "b1", 1.0),
                b2: take(&mut kv, "b2", 0.0),
                modes: vec![Mode::new(
                    int_param(take(&mut kv, "lambda", 1.0), "lambda")?,
                    take(&mut kv, "c1", 1.0),
                    take(&mut kv, "c2", 0.0),
                    take(&mut kv, "a1", 1.0),
                    take(&mut kv, "a2", 0.0),
                )],
            };
            reject_rest(&kv, head)?;
            p.validate()?;
            let alpha = p.alpha;
            let p2 = p.clone();
            let h: ScalarFn =
                Arc::new(move |x: &[f64]| sov::cartesian_potential(&p, [x[0], x[1], x[2]]).unwrap_or(f64::NAN));
            let grad: GradientFn = Arc::new(move |x: &[f64]| {
                sov::cartesian_eval(&p2, [x[0], x[1], x[2]]).map_or([f64::NAN; 3], |v| v.1)
            });
            Ok(Source::Space { h, grad: Some(grad), alpha, natural: "weinstein" })
        }
        "cyl-sov" => {
            let (branch_name, mut kv) = name_and_kv(rest)?;
            let branch = match branch_name.as_str() {
                "" | "hyperbolic" | "hyp" => Branch::Hyperbolic,
                "trigonometric" | "trig" => Branch::Trigonometric,
                other => return Err(CliError::usage(format!("unknown branch '{other}'"))),
            };
            let p = CylindricalSoVParams {
                alpha: take(&mut kv, "alpha", 0.0),
                freq: take(&mut kv, "freq", 1.0),
                branch,
                b1: take(&mut kv, "b1", 1.0),
                b2: take(&mut kv, "b2", 0.0),
                modes: vec![Mode::new(
                    int_param(take(&mut kv, "lambda", 1.0), "lambda")?,
                    take(&mut kv, "c1", 1.0),
                    take(&mut kv, "c2", 0.0),
                    take(&mut kv, "a1", 1.0),
                    take(&mut kv, "a2", 0.0),
                )],
            };
            reject_rest(&kv, head)?;
            p.validate()?;
            let alpha = p.alpha;
            let p2 = p.clone();
            let h: ScalarFn = Arc::new(move |x: &[f64]| {
                sov::cylindrical_potential(&p, x[0], x[2].atan2(x[1]), x[1].hypot(x[2])).unwrap_or(f64::NAN)
            });
            let grad: GradientFn = Arc::new(move |x: &[f64]| {
                let (rho, theta) = (x[1].hypot(x[2]), x[2].atan2(x[1]));
                let Ok((_, g)) = sov::cylindrical_eval(&p2, x[0], theta, rho) else {
                    return [f64::NAN; 3];
                };
                let (s, c) = theta.sin_cos();
                [g[0], g[1] * c - g[2] * s / rho, g[1] * s + g[2] * c / rho]
            });
            Ok(Source::Space { h, grad: Some(grad), alpha, natural: "axial-eq" })
        }
        _ => Err(CliError::usage(format!("unknown candidate kind '{head}'"))),
    }
}

fn chart_vars(chart: Chart) -> &'static [&'static str] {
    match chart {
        Chart::Space => &["x0", "x1", "x2", "rho", "theta"],
        Chart::Meridian => &["x0", "rho"],
        Chart::Plane => &["x0", "x2"],
        Chart::Transverse => &["x1", "x2", "rho", "theta"],
    }
}

fn literal_values(chart: Chart, x: &[f64]) -> Vec<f64> {
    match chart {
        Chart::Space => vec![x[0], x[1], x[2], x[1].hypot(x[2]), x[2].atan2(x[1])],
        Chart::Transverse => vec![x[0], x[1], x[0].hypot(x[1]), x[1].atan2(x[0])],
        _ => x.to_vec(),
    }
}

/// Fits a source to a system: chooses potential or field and the sign form.
pub fn fit_candidate(src: &Source, system: &SystemId) -> Res<Candidate> {
    let chart = system.chart();
    let arity = system.arity();
    let flip = if conjugate_form(system) { -1.0 } else { 1.0 };
    let mismatch = |got: usize| CliError::from(meridian_core::Error::ArityMismatch { expected: arity.len(), got });
    match src {
        Source::Literal(exprs) => {
            if exprs.len() != arity.len() {
                return Err(mismatch(exprs.len()));
            }
            let vars = chart_vars(chart);
            let compiled: Vec<Expr> = exprs
                .iter()
                .map(|e| Expr::parse(e, vars).map_err(|err| CliError::usage(format!("literal '{e}': {err}"))))
                .collect::<Res<_>>()?;
            let c = Arc::new(compiled);
            let at = move |x: &[f64], k: usize| c[k].eval(&literal_values(chart, x));
            Ok(match arity {
                Arity::Scalar => Candidate::scalar(move |x| at(x, 0)),
                Arity::Pair => Candidate::pair(move |x| [at(x, 0), at(x, 1)]),
                Arity::Triple => Candidate::triple(move |x| [at(x, 0), at(x, 1), at(x, 2)]),
            })
        }
        Source::Meridional { field, potential } => {
            let f = field.clone();
            match (chart, arity) {
                (Chart::Meridian | Chart::Plane, Arity::Pair) => {
                    Ok(Candidate::pair(move |x| [f.e0_at(x[0], x[1]), flip * f.erho_at(x[0], x[1])]))
                }
                (Chart::Meridian | Chart::Plane, Arity::Scalar) => {
                    let g = potential.clone().ok_or_else(|| mismatch(2))?;
                    Ok(Candidate::scalar(move |x| g(x[0], x[1])))
                }
                (Chart::Space, Arity::Scalar) => {
                    let g = potential.clone().ok_or_else(|| mismatch(2))?;
                    Ok(Candidate::scalar(move |x| g(x[0], x[1].hypot(x[2]))))
                }
                (Chart::Space, Arity::Triple) => Ok(Candidate::triple(move |x| {
                    let rho = x[1].hypot(x[2]);
                    let er = flip * f.erho_at(x[0], rho) / rho;
                    [f.e0_at(x[0], rho), er * x[1], er * x[2]]
                })),
                _ => Err(CliError::usage(format!(
                    "a meridional field cannot be checked against {} ({:?} chart)",
                    system.tag(),
                    chart
                ))),
            }
        }
        Source::Space { h, grad, .. } => {
            let h = h.clone();
            let need_grad = || grad.clone().ok_or_else(|| mismatch(1));
            match (chart, arity) {
                (Chart::Space, Arity::Scalar) => Ok(Candidate::scalar(move |x| h(x))),
                (Chart::Space, Arity::Triple) => {
                    let g = need_grad()?;
                    Ok(Candidate::triple(move |x| {
                        let v = g(x);
                        [v[0], flip * v[1], flip * v[2]]
                    }))
                }
                (Chart::Meridian, Arity::Scalar) => Ok(Candidate::scalar(move |x| h(&[x[0], x[1], 0.0]))),
                (Chart::Meridian, Arity::Pair) => {
                    let g = need_grad()?;
                    Ok(Candidate::pair(move |x| {
                        let v = g(&[x[0], x[1], 0.0]);
                        [v[0], flip * v[1]]
                    }))
                }
                (Chart::Plane, Arity::Scalar) => Ok(Candidate::scalar(move |x| h(&[x[0], 0.0, x[1]]))),
                (Chart::Plane, Arity::Pair) => {
                    let g = need_grad()?;
                    Ok(Candidate::pair(move |x| {
                        let v = g(&[x[0], 0.0, x[1]]);
                        [v[0], flip * v[2]]
                    }))
                }
                (Chart::Transverse, Arity::Pair) => {
                    let g = need_grad()?;
                    Ok(Candidate::pair(move |x| {
                        let v = g(&[0.0, x[0], x[1]]);
                        [v[1], v[2]]
                    }))
                }
                _ => Err(mismatch(1)),
            }
        }
    }
}

/// Scalar value written next to a candidate on a grid: the potential when
/// there is one, otherwise the field magnitude.
pub fn display_value(src: &Source, chart: Chart) -> Box<dyn Fn(&[f64]) -> f64 + Send + Sync> {
    match src.clone() {
        Source::Meridional { potential: Some(g), .. } => match chart {
            Chart::Space => Box::new(move |x| g(x[0], x[1].hypot(x[2]))),
            _ => Box::new(move |x| g(x[0], x[1])),
        },
        Source::Meridional { field, .. } => match chart {
            Chart::Space => Box::new(move |x| {
                let rho = x[1].hypot(x[2]);
                field.e0_at(x[0], rho).hypot(field.erho_at(x[0], rho))
            }),
            _ => Box::new(move |x| field.e0_at(x[0], x[1]).hypot(field.erho_at(x[0], x[1]))),
        },
        Source::Space { h, .. } => match chart {
            Chart::Space => Box::new(move |x| h(x)),
            Chart::Meridian => Box::new(move |x| h(&[x[0], x[1], 0.0])),
            Chart::Plane => Box::new(move |x| h(&[x[0], 0.0, x[1]])),
            Chart::Transverse => Box::new(move |x| h(&[0.0, x[0], x[1]])),
        },
        Source::Literal(exprs) => {
            let vars = chart_vars(chart);
            match Expr::parse(&exprs[0], vars) {
                Ok(e) => Box::new(move |x| e.eval(&literal_values(chart, x))),
                Err(_) => Box::new(|_| f64::NAN),
            }
        }
    }
}
