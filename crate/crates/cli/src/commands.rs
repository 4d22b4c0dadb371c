//! The six subcommands. Each returns an [`Output`]; nothing here touches
//! stdout or the file system directly.

use std::collections::BTreeMap;

use meridian_core::efg::{self, MeridionalFieldSpec, SingularBranch, Window};
use meridian_core::fueter::{self, DivergenceSource, QuadratureSettings};
use meridian_core::gallery::{self, GalleryParams, MobiusRootFormula};
use meridian_core::pde::{self, FdOptions};
use meridian_core::rq::{MeridianPoint, ReducedQuaternion};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{csv_table, num, vtk_structured_grid, Output, PointData};
use crate::spec::{self, GridSpec, Source, TransformKind};
use crate::{Format, Opts};

type Res<T> = std::result::Result<T, CliError>;

/// Residual tolerance for `verify` and `sov`, matching the FD accuracy.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Relative tolerance between closed-form roots and eigenvalues.
pub const DEFAULT_ROOT_TOL: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_RES: usize = 200;

fn need<'a>(v: &'a Option<String>, flag: &str) -> Res<&'a str> {
    v.as_deref().ok_or_else(|| CliError::usage(format!("missing --{flag}")))
}

fn kv(o: &Opts) -> Res<BTreeMap<String, f64>> {
    o.params.as_deref().map(spec::parse_kv).transpose().map(Option::unwrap_or_default)
}

fn format_or(o: &Opts, default: Format, allowed: &[Format]) -> Res<Format> {
    let f = o.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::usage(format!("--format {f:?} is not available for this command").to_lowercase()))
    }
}

/// Source and system for `verify`/`sov`: the system defaults to the one the
/// candidate is built for, alpha to the candidate's own.
fn system_and_candidate(o: &Opts) -> Res<(Source, pde::SystemId, f64)> {
    let src = spec::parse_candidate(need(&o.candidate, "candidate")?)?;
    let tag = match (&o.system, src.natural_system()) {
        (Some(s), _) => s.clone(),
        (None, Some(s)) => s.to_string(),
        (None, None) => return Err(CliError::usage("missing --system")),
    };
    let alpha = o.alpha.or(src.alpha()).unwrap_or(0.0);
    let system = spec::parse_system(&tag, alpha, &kv(o)?)?;
    Ok((src, system, alpha))
}

fn grid_spec(o: &Opts, system: &pde::SystemId) -> Res<GridSpec> {
    match &o.grid {
        Some(g) => GridSpec::parse(g),
        None => Ok(GridSpec::default_for(system)),
    }
}

fn pass_tol(v: f64, tol: f64) -> bool {
    v <= tol
}

pub fn verify(o: &Opts) -> Res<Output> {
    let (src, system, alpha) = system_and_candidate(o)?;
    let candidate = spec::fit_candidate(&src, &system)?;
    let (_, _, grid) = grid_spec(o, &system)?.build(&system, o.seed.unwrap_or(DEFAULT_SEED))?;
    let report = pde::residual(&system, &candidate, &grid, &FdOptions::default())?;
    let tol = o.tol.unwrap_or(DEFAULT_TOL);
    let pass = pass_tol(report.max_abs, tol);
    let summary = json!({
        "command": "verify",
        "system": system.tag(),
        "alpha": alpha,
        "candidate": o.candidate,
        "tolerance": tol,
        "pass": pass,
        "report": report,
    });
    Ok(Output::summary(summary, pass))
}

fn gallery_field(o: &Opts) -> Res<(GalleryParams, MeridionalFieldSpec)> {
    let p = spec::gallery_params(need(&o.example, "example")?, o.params.as_deref())?;
    let mut f = gallery::make_field(&p)?;
    if let Some(a) = o.alpha {
        f = f.with_alpha(a);
    }
    Ok((p, f))
}

pub fn efg(o: &Opts) -> Res<Output> {
    let (p, f) = gallery_field(o)?;
    let [x0, x1, x2] = spec::parse_point(need(&o.point, "point")?)?;
    let x = ReducedQuaternion::new(x0, x1, x2);
    let m = x.meridian()?;
    let t = efg::efg_assemble(&f, x.theta()?, &m)?;
    let scale = t.roots_numeric.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let tol = o.tol.unwrap_or(DEFAULT_ROOT_TOL) * scale;
    let cmp = gallery::compare_roots(t.roots_closed, t.roots_numeric, tol);
    let mut summary = json!({
        "command": "efg",
        "example": p.name(),
        "params": p,
        "point": [x0, x1, x2],
        "alpha": f.alpha,
        "matrix": t.matrix,
        "invariants": t.invariants,
        "roots_closed": t.roots_closed,
        "roots_numeric": t.roots_numeric,
        "max_difference": cmp.max_difference,
        "tolerance": tol,
        "pass": !cmp.mismatch,
    });
    if let GalleryParams::Mobius { .. } = p {
        let printed = gallery::mobius_roots(&p, m.x0(), m.rho(), MobiusRootFormula::Misprinted)?;
        let c = gallery::compare_roots(printed, t.roots_numeric, tol);
        summary["printed_formula"] = json!({
            "roots": printed,
            "max_difference": c.max_difference,
            "flagged": c.mismatch,
        });
    }
    Ok(Output::summary(summary, !cmp.mismatch))
}

fn branch_name(b: SingularBranch) -> &'static str {
    match b {
        SingularBranch::F1 => "f1",
        SingularBranch::F2 => "f2",
    }
}

pub fn singular(o: &Opts) -> Res<Output> {
    let (p, f) = gallery_field(o)?;
    let window = match &o.window {
        Some(w) => spec::parse_window(w)?,
        None => Window { x0: (-3.0, 3.0), rho: (0.05, 3.0) },
    };
    let res = o.res.unwrap_or(DEFAULT_RES);
    let polys = efg::trace_singular_set(&f, f.alpha, window, res)?;
    let tol = o.tol.unwrap_or(DEFAULT_TOL);
    let predicted = gallery::predicted_singular_surface(&p).ok();

    let mut rows = Vec::new();
    let mut max_residual = 0.0f64;
    let mut max_predicted: BTreeMap<&str, f64> = BTreeMap::new();
    for (k, poly) in polys.iter().enumerate() {
        for v in &poly.vertices {
            let (f1, f2) = efg::singular_residuals(&f, &MeridianPoint::new(v[0], v[1])?, f.alpha)?;
            let value = match poly.branch {
                SingularBranch::F1 => f1,
                SingularBranch::F2 => f2,
            };
            max_residual = max_residual.max(value.abs());
            if let Some(surfaces) = &predicted {
                let on: Vec<_> = surfaces.iter().filter(|s| s.branch == poly.branch).collect();
                if !on.is_empty() {
                    let r = on.iter().map(|s| s.residual(v[0], v[1]).abs()).fold(f64::INFINITY, f64::min);
                    let e = max_predicted.entry(branch_name(poly.branch)).or_insert(0.0);
                    *e = e.max(r);
                }
            }
            rows.push((k, poly.branch, poly.closed, v[0], v[1], value));
        }
    }
    let pass = pass_tol(max_residual, tol);
    let summary = json!({
        "command": "singular",
        "example": p.name(),
        "params": p,
        "alpha": f.alpha,
        "window": { "x0": window.x0, "rho": window.rho },
        "resolution": res,
        "polylines": polys.len(),
        "vertices": rows.len(),
        "max_vertex_residual": max_residual,
        "predicted_surfaces": predicted.as_ref().map(|s| s.iter().map(|s| json!({
            "branch": branch_name(s.branch),
            "equation": s.equation,
        })).collect::<Vec<_>>()),
        "max_predicted_residual": max_predicted,
        "tolerance": tol,
        "pass": pass,
    });
    match format_or(o, Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Csv => {
            let body = csv_table(
                &["polyline", "branch", "closed", "x0", "rho", "value"],
                rows.iter().map(|&(k, b, c, x0, rho, v)| {
                    vec![
                        Some(k.to_string()),
                        Some(branch_name(b).to_string()),
                        Some(c.to_string()),
                        Some(num(x0)),
                        Some(num(rho)),
                        Some(num(v)),
                    ]
                }),
            )?;
            Ok(Output::document(summary, body, pass))
        }
        _ => {
            let mut doc = summary.clone();
            doc["contours"] = serde_json::to_value(&polys).expect("contours serialize");
            Ok(Output::summary(doc, pass))
        }
    }
}

pub fn sov(o: &Opts) -> Res<Output> {
    let (src, system, alpha) = system_and_candidate(o)?;
    let candidate = spec::fit_candidate(&src, &system)?;
    let (axes, rows, grid) = grid_spec(o, &system)?.build(&system, o.seed.unwrap_or(DEFAULT_SEED))?;
    let (residuals, step) = pde::residual_field(&system, &candidate, &grid, &FdOptions::default())?;
    let value = spec::display_value(&src, system.chart());
    let values: Vec<f64> = grid.points.par_iter().map(|x| value(x)).collect();
    let report = pde::ResidualReport::from_values(&grid.points, &residuals, step);
    let tol = o.tol.unwrap_or(DEFAULT_TOL);
    let pass = pass_tol(report.max_abs, tol);
    let summary = json!({
        "command": "sov",
        "system": system.tag(),
        "alpha": alpha,
        "candidate": o.candidate,
        "tolerance": tol,
        "pass": pass,
        "report": report,
    });
    match format_or(o, Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Csv => {
            let mut header: Vec<&str> = axes.0.iter().map(String::as_str).collect();
            header.extend(["value", "residual"]);
            let body = csv_table(
                &header,
                rows.iter().zip(&values).zip(&residuals).map(|((r, v), res)| {
                    let mut cells: Vec<Option<String>> = r.iter().map(|c| Some(num(*c))).collect();
                    cells.push(Some(num(*v)));
                    cells.push(res.map(num));
                    cells
                }),
            )?;
            Ok(Output::document(summary, body, pass))
        }
        _ => {
            let mut doc = summary;
            doc["axes"] = json!(axes.0);
            doc["rows"] = Value::Array(
                rows.iter()
                    .zip(&values)
                    .zip(&residuals)
                    .map(|((r, v), res)| json!({ "coords": r, "value": v, "residual": res }))
                    .collect(),
            );
            Ok(Output::summary(doc, pass))
        }
    }
}

fn quadrature(o: &Opts) -> QuadratureSettings {
    let mut q = QuadratureSettings::default();
    if let Some(t) = o.tol {
        q.abs_tol = t;
        q.rel_tol = t;
    }
    q
}

fn divergence_source(kind: &str, o: &Opts) -> Res<DivergenceSource> {
    let original = || spec::parse_original(o.original.as_deref().unwrap_or("one"));
    Ok(match kind {
        "lf" => DivergenceSource::LaplaceOneSided(original()?),
        "gamma" => DivergenceSource::Gamma,
        "ffc" => DivergenceSource::FourierCosine(original()?),
        "ffs" => DivergenceSource::FourierSine(original()?),
        "ffe" => DivergenceSource::FourierExponential(original()?),
        "exp" => {
            let kv = kv(o)?;
            DivergenceSource::GalleryExp {
                b1: kv.get("b1").copied().unwrap_or(1.0),
                b2: kv.get("b2").copied().unwrap_or(2.0),
            }
        }
        _ => return Err(CliError::usage(format!("unknown divergence source '{kind}'"))),
    })
}

pub fn transform(o: &Opts) -> Res<Output> {
    let kind = need(&o.kind, "kind")?;
    let [x0, x1, x2] = spec::parse_point(need(&o.point, "point")?)?;
    let x = ReducedQuaternion::new(x0, x1, x2);
    let q = quadrature(o);
    if let Some(src_name) = kind.strip_prefix("div-") {
        let src = divergence_source(src_name, o)?;
        let value = fueter::zero_divergence_residual(&src, x0, x.rho(), &q)?;
        let mut summary = json!({
            "command": "transform",
            "kind": kind,
            "original": o.original,
            "point": [x0, x1, x2],
            "residual": value,
        });
        if let Some(w) = &o.window {
            let w = spec::parse_window(w)?;
            let roots = fueter::zero_divergence_roots(&src, x0, w.rho, o.res.unwrap_or(DEFAULT_RES), &q)?;
            summary["roots_rho"] = json!(roots);
        }
        return Ok(Output::summary(summary, true));
    }
    let tk = TransformKind::parse(kind)?;
    let original = spec::parse_original(o.original.as_deref().unwrap_or("one"))?;
    let t = tk.eval(&original, &x, &q)?;
    let summary = json!({
        "command": "transform",
        "kind": kind,
        "original": o.original,
        "point": [x0, x1, x2],
        "value": { "u0": t.value.u0, "urho": t.value.urho },
        "field": { "e0": t.value.u0, "erho": -t.value.urho },
        "error_estimate": t.error,
    });
    Ok(Output::summary(summary, true))
}

/// `x0=a:b:n,rho=c:d:n[,theta=N]` with `N` azimuthal rings over a full turn.
fn export_grid(s: &str) -> Res<((f64, f64, usize), (f64, f64, usize), usize)> {
    let mut x0 = None;
    let mut rho = None;
    let mut rings = 1;
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| CliError::usage(format!("bad grid item '{item}'")))?;
        if k == "theta" {
            rings = v.parse().ok().filter(|&n| n >= 1).ok_or_else(|| CliError::usage("theta=N needs N >= 1"))?;
            continue;
        }
        let GridSpec::Lattice(ax) = GridSpec::parse(item)? else {
            return Err(CliError::usage(format!("bad grid item '{item}'")));
        };
        let (_, a, b, n) = ax[0].clone();
        match k {
            "x0" => x0 = Some((a, b, n)),
            "rho" => rho = Some((a, b, n)),
            _ => return Err(CliError::usage(format!("unknown export axis '{k}'"))),
        }
    }
    let (Some(x0), Some(rho)) = (x0, rho) else {
        return Err(CliError::usage("export grid needs x0=a:b:n and rho=c:d:n"));
    };
    if !(rho.0 > 0.0) {
        return Err(CliError::usage("export grid needs rho > 0"));
    }
    Ok((x0, rho, rings))
}

fn lin(a: f64, b: f64, n: usize, i: usize) -> f64 {
    a + (b - a) * i as f64 / (n - 1) as f64
}

pub fn export(o: &Opts) -> Res<Output> {
    let (label, src) = match (&o.example, &o.candidate) {
        (Some(_), _) => {
            let (p, f) = gallery_field(o)?;
            let g = gallery::potential(&p)?;
            (p.name().to_string(), Source::Meridional { field: f, potential: Some(g) })
        }
        (None, Some(c)) => (c.clone(), spec::parse_candidate(c)?),
        (None, None) => return Err(CliError::usage("export needs --example or --candidate")),
    };
    let Source::Meridional { field, potential } = src else {
        return Err(CliError::usage("export takes a meridional field (gallery or transform candidate)"));
    };
    let alpha = field.alpha;
    let (gx, gr, rings) = export_grid(o.grid.as_deref().unwrap_or("x0=-2:2:41,rho=0.05:2:21"))?;
    let meridian: Vec<(f64, f64)> =
        (0..gr.2).flat_map(|j| (0..gx.2).map(move |i| (lin(gx.0, gx.1, gx.2, i), lin(gr.0, gr.1, gr.2, j)))).collect();
    struct Sample {
        e0: f64,
        erho: f64,
        g: f64,
        f1: f64,
        f2: f64,
    }
    let samples: Vec<Sample> = meridian
        .par_iter()
        .map(|&(x0, rho)| {
            let (f1, f2) = MeridianPoint::new(x0, rho)
                .and_then(|p| efg::singular_residuals(&field, &p, alpha))
                .unwrap_or((f64::NAN, f64::NAN));
            Sample {
                e0: field.e0_at(x0, rho),
                erho: field.erho_at(x0, rho),
                g: potential.as_ref().map_or(f64::NAN, |g| g(x0, rho)),
                f1,
                f2,
            }
        })
        .collect();
    let mut points = Vec::new();
    let mut vectors = Vec::new();
    let mut cols: [Vec<f64>; 3] = Default::default();
    let mut rows = Vec::new();
    for k in 0..rings {
        let theta = std::f64::consts::TAU * k as f64 / rings as f64;
        let (s, c) = theta.sin_cos();
        for (&(x0, rho), smp) in meridian.iter().zip(&samples) {
            points.push([x0, rho * c, rho * s]);
            vectors.push([smp.e0, smp.erho * c, smp.erho * s]);
            cols[0].push(smp.g);
            cols[1].push(smp.f1);
            cols[2].push(smp.f2);
            let value = if potential.is_some() { smp.g } else { smp.e0.hypot(smp.erho) };
            rows.push(vec![Some(num(x0)), Some(num(rho)), Some(num(theta)), Some(num(value))]);
        }
    }
    let summary = json!({
        "command": "export",
        "field": label,
        "alpha": alpha,
        "dimensions": [gx.2, gr.2, rings],
        "points": points.len(),
    });
    let body = match format_or(o, Format::Vtk, &[Format::Vtk, Format::Csv])? {
        Format::Vtk => {
            let [g, f1, f2] = cols;
            let mut data = Vec::new();
            if potential.is_some() {
                data.push(PointData::Scalars("potential", g));
            }
            data.push(PointData::Scalars("f1", f1));
            data.push(PointData::Scalars("f2", f2));
            data.push(PointData::Vectors("field", vectors));
            vtk_structured_grid(&format!("meridian export {label}"), [gx.2, gr.2, rings], &points, &data)
        }
        _ => csv_table(&["x0", "rho", "theta", "value"], rows)?,
    };
    Ok(Output::document(summary, body, true))
}
