//! Deterministic integration over the plane of a function with isolated
//! power singularities.
//!
//! The plane is split by a smooth partition of unity.  Near each singular
//! point the integral is done in log-polar coordinates x = z + e^{t + i theta},
//! where the local factor becomes exp((a + a') t + i (a - a') theta) and the
//! area element e^{2t} turns the singularity into exponential decay in t.
//! The remainder vanishes near every singular point and is integrated in
//! polar coordinates about the centroid, switching to R = e^t outside.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gauss::adaptive;
use crate::df_core::log_power;
use crate::special_functions::ExponentPair;

const ANGULAR_NODES: usize = 128;
const MAX_PANELS: usize = 400;
const MAX_LOG_RANGE: f64 = 600.0;

pub struct PlaneProblem<'a> {
    pub points: Vec<Complex64>,
    pub pairs: Vec<ExponentPair>,
    /// Re(a + a') + 2 for each point.
    pub margins: Vec<f64>,
    /// Decay rate of |f| |x|^2 at infinity.
    pub inf_margin: f64,
    /// log of the regular part of the integrand.
    pub rest: &'a (dyn Fn(Complex64) -> Complex64 + Sync),
}

#[derive(Debug, Clone, Copy)]
pub struct PlaneResult {
    pub value: Complex64,
    pub error: f64,
    pub converged: bool,
}

/// C-infinity step: 1 on [0, 1/2], 0 on [1, inf).
fn cutoff(u: f64) -> f64 {
    if u <= 0.5 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let v = 2.0 * (1.0 - u);
    let a = (-1.0 / v).exp();
    let b = (-1.0 / (1.0 - v)).exp();
    a / (a + b)
}

impl PlaneProblem<'_> {
    fn log_eval(&self, x: Complex64) -> Complex64 {
        let mut acc = (self.rest)(x);
        for (z, p) in self.points.iter().zip(&self.pairs) {
            acc += log_power(x - z, *p);
        }
        acc
    }

    /// log f at z_j + e^{t + i theta}, with the j-th factor taken exactly.
    fn log_eval_near(&self, j: usize, t: f64, theta: f64) -> Complex64 {
        let w = Complex64::from_polar(t.exp(), theta);
        let x = self.points[j] + w;
        let mut acc = (self.rest)(x);
        for (k, (z, p)) in self.points.iter().zip(&self.pairs).enumerate() {
            if k == j {
                acc += p.total() * t + Complex64::new(0.0, theta) * (p.a - p.a_bar);
            } else {
                acc += log_power(x - z, *p);
            }
        }
        acc
    }

    fn disk_radius(&self) -> f64 {
        let n = self.points.len();
        let mut d = f64::INFINITY;
        for i in 0..n {
            for k in i + 1..n {
                d = d.min((self.points[i] - self.points[k]).norm());
            }
        }
        if d.is_finite() {
            0.5 * d
        } else {
            0.5
        }
    }

    fn partition_weight(&self, x: Complex64, rho: f64) -> f64 {
        let s: f64 = self.points.iter().map(|z| cutoff((x - z).norm() / rho)).sum();
        1.0 - s
    }

    pub fn integrate(&self, tol: f64) -> PlaneResult {
        let rho = self.disk_radius();
        let pieces = self.points.len() + 2;
        let piece_tol = tol / pieces as f64;
        let mut value = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        let mut converged = true;

        // Angular trapezoid on (-pi, pi]; the local factor's branch cut sits
        // on theta = pi, which the grid samples only at its endpoint.
        let h = 2.0 * PI / ANGULAR_NODES as f64;
        let thetas: Vec<f64> = (0..ANGULAR_NODES).map(|k| -PI + (k as f64 + 0.5) * h).collect();

        for j in 0..self.points.len() {
            let m = self.margins[j];
            let t_hi = rho.ln();
            let span = ((1.0 / piece_tol).ln().max(0.0) + 25.0) / m;
            let t_lo = t_hi - span.min(MAX_LOG_RANGE);
            let ring = |t: f64| -> Complex64 {
                let phi = cutoff(t.exp() / rho);
                if phi == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let s = thetas
                    .iter()
                    .fold(Complex64::new(0.0, 0.0), |acc, &th| acc + (self.log_eval_near(j, t, th) + 2.0 * t).exp());
                s * (h * phi)
            };
            let r = adaptive(ring, t_lo, t_hi, piece_tol, MAX_PANELS);
            value += r.value;
            error += r.error;
            converged &= r.converged;
        }

        let n = self.points.len().max(1) as f64;
        let centre = self.points.iter().fold(Complex64::new(0.0, 0.0), |s, z| s + z) / n;
        let r0 = self.points.iter().map(|z| (z - centre).norm()).fold(0.0, f64::max) + rho;
        let inner_tol = piece_tol;
        let ang_tol = inner_tol * 1e-2;

        let annulus = |r: f64| -> Complex64 {
            if r == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let ang = adaptive(
                |th| {
                    let x = centre + Complex64::from_polar(r, th);
                    let w = self.partition_weight(x, rho);
                    if w <= 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        self.log_eval(x).exp() * w
                    }
                },
                -PI,
                PI,
                ang_tol / (2.0 * PI * r0),
                MAX_PANELS,
            );
            ang.value * r
        };
        let r = adaptive(annulus, 0.0, r0, inner_tol, MAX_PANELS);
        value += r.value;
        error += r.error;
        converged &= r.converged;

        let t0 = r0.ln();
        let span = ((1.0 / piece_tol).ln().max(0.0) + 25.0) / self.inf_margin;
        let t1 = t0 + span.min(MAX_LOG_RANGE);
        let outer = |t: f64| -> Complex64 {
            let r = t.exp();
            let ang = adaptive(
                |th| (self.log_eval(centre + Complex64::from_polar(r, th)) + 2.0 * t).exp(),
                -PI,
                PI,
                ang_tol * 1e-2,
                MAX_PANELS,
            );
            ang.value
        };
        let r = adaptive(outer, t0, t1, piece_tol, MAX_PANELS);
        value += r.value;
        error += r.error;
        converged &= r.converged;

        PlaneResult { value, error, converged }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_functions::l_real;

    #[test]
    fn gaussian_has_area_pi() {
        let rest = |x: Complex64| Complex64::new(-x.norm_sqr(), 0.0);
        let prob = PlaneProblem {
            points: vec![Complex64::new(0.0, 0.0)],
            pairs: vec![ExponentPair::diagonal_real(0.0)],
            margins: vec![2.0],
            inf_margin: 2.0,
            rest: &rest,
        };
        let r = prob.integrate(1e-10);
        assert!((r.value - Complex64::new(PI, 0.0)).norm() < 1e-8, "{:?}", r);
    }

    #[test]
    fn shifted_gaussian_with_two_regular_points() {
        let c = Complex64::new(0.3, -0.2);
        let rest = move |x: Complex64| Complex64::new(-(x - c).norm_sqr(), 0.0);
        let prob = PlaneProblem {
            points: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            pairs: vec![ExponentPair::diagonal_real(0.0); 2],
            margins: vec![2.0; 2],
            inf_margin: 2.0,
            rest: &rest,
        };
        let r = prob.integrate(1e-10);
        assert!((r.value - Complex64::new(PI, 0.0)).norm() < 1e-8, "{:?}", r);
    }

    #[test]
    fn complex_beta_integral() {
        // int |x|^{2a} |1-x|^{2b} d^2x = pi l(1+a) l(1+b) l(-1-a-b)
        let (a, b) = (-0.6, -0.7);
        let rest = |_: Complex64| Complex64::new(0.0, 0.0);
        let prob = PlaneProblem {
            points: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            pairs: vec![ExponentPair::diagonal_real(a), ExponentPair::diagonal_real(b)],
            margins: vec![2.0 + 2.0 * a, 2.0 + 2.0 * b],
            inf_margin: -2.0 * (a + b) - 2.0,
            rest: &rest,
        };
        let r = prob.integrate(1e-9);
        let exact = PI * l_real(1.0 + a) * l_real(1.0 + b) * l_real(-1.0 - a - b);
        assert!(((r.value.re - exact) / exact).abs() < 1e-7, "{} vs {exact}", r.value);
        assert!(r.value.im.abs() < 1e-9);
    }
}
