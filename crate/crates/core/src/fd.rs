//! Central finite differences with two Richardson levels (steps h, h/2, h/4).

/// Relative step for first derivatives.
pub const FIRST_STEP: f64 = 2e-3;
/// Relative step for second derivatives; larger because rounding grows as 1/h^2.
pub const SECOND_STEP: f64 = 3e-2;

/// Step scale for a coordinate. Coordinates bounded below by a singular
/// boundary at 0 (rho, x2, ...) use a step relative to their distance from it.
pub fn scale(x: f64, bounded: bool) -> f64 {
    if bounded {
        x.abs()
    } else {
        x.abs().max(1.0)
    }
}

/// d/dx of a scalar function.
pub fn first<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| [(f(x + h) - f(x - h)) / (2.0 * h)];
    extrapolate(d, h)[0]
}

/// d2/dx2 of a scalar function.
pub fn second<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let f0 = f(x);
    let d = |h: f64| [(f(x + h) - 2.0 * f0 + f(x - h)) / (h * h)];
    extrapolate(d, h)[0]
}

/// Removes the h^2 and h^4 error terms of an even-order difference quotient.
fn extrapolate<const M: usize>(d: impl Fn(f64) -> [f64; M], h: f64) -> [f64; M] {
    let (a, b, c) = (d(h), d(0.5 * h), d(0.25 * h));
    let mut out = [0.0; M];
    for k in 0..M {
        let r1 = (4.0 * b[k] - a[k]) / 3.0;
        let r2 = (4.0 * c[k] - b[k]) / 3.0;
        out[k] = (16.0 * r2 - r1) / 15.0;
    }
    out
}

/// Derivatives of a vector-valued function of several variables.
pub struct Stencil<'a, const M: usize> {
    f: &'a (dyn Fn(&[f64]) -> [f64; M] + Sync),
    x: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
}

impl<'a, const M: usize> Stencil<'a, M> {
    /// `bounded[i]` marks coordinates whose step is relative to |x_i|.
    pub fn new(f: &'a (dyn Fn(&[f64]) -> [f64; M] + Sync), x: &[f64], bounded: &[bool]) -> Self {
        let h1 = x.iter().zip(bounded).map(|(&v, &b)| FIRST_STEP * scale(v, b)).collect();
        let h2 = x.iter().zip(bounded).map(|(&v, &b)| SECOND_STEP * scale(v, b)).collect();
        Stencil { f, x: x.to_vec(), h1, h2 }
    }

    pub fn with_steps(f: &'a (dyn Fn(&[f64]) -> [f64; M] + Sync), x: &[f64], h1: Vec<f64>, h2: Vec<f64>) -> Self {
        Stencil { f, x: x.to_vec(), h1, h2 }
    }

    pub fn first_steps(&self) -> &[f64] {
        &self.h1
    }

    pub fn second_steps(&self) -> &[f64] {
        &self.h2
    }

    pub fn value(&self) -> [f64; M] {
        (self.f)(&self.x)
    }

    fn at(&self, shifts: &[(usize, f64)]) -> [f64; M] {
        let mut y = self.x.clone();
        for &(i, d) in shifts {
            y[i] += d;
        }
        (self.f)(&y)
    }

    /// d/dx_i.
    pub fn d1(&self, i: usize) -> [f64; M] {
        let d = |h: f64| {
            let p = self.at(&[(i, h)]);
            let m = self.at(&[(i, -h)]);
            let mut out = [0.0; M];
            for k in 0..M {
                out[k] = (p[k] - m[k]) / (2.0 * h);
            }
            out
        };
        extrapolate(d, self.h1[i])
    }

    /// d2/dx_i dx_j.
    pub fn d2(&self, i: usize, j: usize) -> [f64; M] {
        if i == j {
            let f0 = self.value();
            let d = |h: f64| {
                let p = self.at(&[(i, h)]);
                let m = self.at(&[(i, -h)]);
                let mut out = [0.0; M];
                for k in 0..M {
                    out[k] = (p[k] - 2.0 * f0[k] + m[k]) / (h * h);
                }
                out
            };
            extrapolate(d, self.h2[i])
        } else {
            let (hi, hj) = (self.h2[i], self.h2[j]);
            let d = |t: f64| {
                let (hi, hj) = (t * hi, t * hj);
                let pp = self.at(&[(i, hi), (j, hj)]);
                let pm = self.at(&[(i, hi), (j, -hj)]);
                let mp = self.at(&[(i, -hi), (j, hj)]);
                let mm = self.at(&[(i, -hi), (j, -hj)]);
                let mut out = [0.0; M];
                for k in 0..M {
                    out[k] = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * hi * hj);
                }
                out
            };
            extrapolate(d, 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_derivatives_of_exp() {
        let d = first(f64::exp, 0.7, FIRST_STEP);
        assert!((d - 0.7f64.exp()).abs() < 1e-12);
        let d2 = second(f64::exp, 0.7, SECOND_STEP);
        assert!((d2 - 0.7f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn stencil_mixed_partial() {
        let f = |x: &[f64]| [x[0].sin() * x[1].exp(), x[0] * x[1] * x[1]];
        let s = Stencil::new(&f, &[0.4, 0.3], &[false, true]);
        let fxy = s.d2(0, 1);
        assert!((fxy[0] - 0.4f64.cos() * 0.3f64.exp()).abs() < 1e-9);
        assert!((fxy[1] - 0.6).abs() < 1e-9);
        let fyy = s.d2(1, 1);
        assert!((fyy[1] - 0.8).abs() < 1e-9);
        let fx = s.d1(0);
        assert!((fx[1] - 0.09).abs() < 1e-12);
    }
}
