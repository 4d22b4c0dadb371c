//! Gauss-Legendre rules and an adaptive Gauss-Kronrod (7/15) integrator
//! for vector-valued integrands.
//!
//! Integrating several components together keeps them on one node set,
//! so identities between transforms hold to rounding rather than to the
//! quadrature tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel: (integral, error estimate per component).
fn gk15<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> ([f64; N], [f64; N]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kr = [0.0; N];
    let mut ga = [0.0; N];
    for k in 0..N {
        kr[k] = WGK[7] * fc[k];
        ga[k] = WG[3] * fc[k];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for k in 0..N {
            let s = f1[k] + f2[k];
            kr[k] += WGK[j] * s;
            if j % 2 == 1 {
                ga[k] += WG[j / 2] * s;
            }
        }
    }
    let mut err = [0.0; N];
    for k in 0..N {
        kr[k] *= h;
        err[k] = ((kr[k] - ga[k] * h).abs()).max(50.0 * f64::EPSILON * kr[k].abs());
    }
    (kr, err)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for AdaptiveSettings {
    fn default() -> Self {
        AdaptiveSettings { abs_tol: 1e-13, rel_tol: 1e-12, max_panels: 20_000 }
    }
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    err: [f64; N],
    worst: f64,
    order: usize,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.worst
            .total_cmp(&other.worst)
            .then_with(|| other.order.cmp(&self.order))
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub panels: usize,
}

/// Adaptive Gauss-Kronrod integration of a vector integrand over [a, b].
///
/// The panel with the largest error is bisected until, for every component,
/// the summed error is below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<const N: usize, F>(f: F, a: f64, b: f64, s: &AdaptiveSettings) -> Result<Integral<N>>
where
    F: Fn(f64) -> [f64; N],
{
    if a == b {
        return Ok(Integral { value: [0.0; N], error: [0.0; N], panels: 0 });
    }
    let make = |a: f64, b: f64, order: usize| -> Result<Panel<N>> {
        let (value, err) = gk15(&f, a, b);
        if value.iter().any(|v| !v.is_finite()) {
            return Err(Error::QuadratureFailure(format!("non-finite integrand on [{a}, {b}]")));
        }
        let worst = err.iter().cloned().fold(0.0, f64::max);
        Ok(Panel { a, b, value, err, worst, order })
    };
    let first = make(a, b, 0)?;
    let mut counter = 1usize;
    let mut total = first.value;
    let mut total_err = first.err;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        let done = (0..N).all(|k| total_err[k] <= s.abs_tol.max(s.rel_tol * total[k].abs()));
        if done {
            // Final sum in creation order so the value does not depend on heap layout.
            let mut panels: Vec<&Panel<N>> = heap.iter().collect();
            panels.sort_by_key(|p| p.order);
            let mut value = [0.0; N];
            let mut error = [0.0; N];
            for p in &panels {
                for k in 0..N {
                    value[k] += p.value[k];
                    error[k] += p.err[k];
                }
            }
            return Ok(Integral { value, error, panels: heap.len() });
        }
        if heap.len() >= s.max_panels {
            return Err(Error::QuadratureFailure(format!(
                "panel budget {} exhausted, error estimate {:e}",
                s.max_panels,
                total_err.iter().cloned().fold(0.0, f64::max)
            )));
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailure("panel width below resolution".into()));
        }
        let left = make(worst.a, mid, counter)?;
        let right = make(mid, worst.b, counter + 1)?;
        counter += 2;
        for k in 0..N {
            total[k] += left.value[k] + right.value[k] - worst.value[k];
            total_err[k] += left.err[k] + right.err[k] - worst.err[k];
        }
        heap.push(left);
        heap.push(right);
    }
}
