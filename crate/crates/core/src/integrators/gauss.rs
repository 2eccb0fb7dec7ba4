//! Gauss-Legendre rules and a globally adaptive bisection driver.

use std::sync::OnceLock;

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// n-point rule on [-1, 1]; nodes by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += f(mid + half * x) * *w;
        }
        s * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The 15-point rule shared by the adaptive driver.
pub fn default_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(15))
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    left: Complex64,
    right: Complex64,
    error: f64,
}

/// Globally adaptive integration of a complex-valued function on [a, b].
/// Each panel is scored by comparing the rule on the panel against the rule
/// on its two halves; the worst panel is bisected until the summed score is
/// below `tol` or `max_panels` is reached.
pub fn adaptive<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, tol: f64, max_panels: usize) -> QuadResult {
    let rule = default_rule();
    let make = |a: f64, b: f64, whole: Complex64, f: &mut F| -> Panel {
        let m = 0.5 * (a + b);
        let left = rule.integrate(a, m, &mut *f);
        let right = rule.integrate(m, b, &mut *f);
        Panel { a, b, left, right, error: (left + right - whole).norm() }
    };
    let whole = rule.integrate(a, b, &mut f);
    let mut panels = vec![make(a, b, whole, &mut f)];
    loop {
        let total: f64 = panels.iter().map(|p| p.error).sum();
        if total <= tol || panels.len() >= max_panels {
            let value = panels.iter().fold(Complex64::new(0.0, 0.0), |s, p| s + p.left + p.right);
            return QuadResult { value, error: total, intervals: panels.len(), converged: total <= tol };
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        panels.push(make(p.a, m, p.left, &mut f));
        panels.push(make(m, p.b, p.right, &mut f));
    }
}

/// Real-valued convenience wrapper around [`adaptive`].
pub fn adaptive_real<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_panels: usize) -> (f64, f64) {
    let r = adaptive(|x| Complex64::new(f(x), 0.0), a, b, tol, max_panels);
    (r.value.re, r.error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(7);
        let w: f64 = rule.weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
        let v = rule.integrate(0.0, 2.0, |x| Complex64::new(x.powi(13), 0.0));
        assert!((v.re - 2f64.powi(14) / 14.0).abs() < 1e-9);
    }

    #[test]
    fn adaptive_handles_endpoint_peak() {
        let (v, _) = adaptive_real(|x| 1.0 / (1e-4 + x * x), 0.0, 1.0, 1e-12, 400);
        let exact = (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() < 1e-9, "{v} {exact}");
    }

    #[test]
    fn adaptive_complex_oscillation() {
        let r = adaptive(|x| Complex64::new(0.0, 5.0 * x).exp(), 0.0, 3.0, 1e-13, 200);
        let exact = (Complex64::new(0.0, 15.0).exp() - 1.0) / Complex64::new(0.0, 5.0);
        assert!((r.value - exact).norm() < 1e-12);
        assert!(r.converged);
    }
}
