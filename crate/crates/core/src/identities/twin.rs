//! The complex twin lemma: a p-variable Selberg-type integral against a
//! q-variable one with reflected exponents, p + q + 1 = M insertions.

use num_complex::Complex64;

use super::IdentityError;
use crate::df_core::{complex_power, DFIntegralSpec, Insertion, Normalization};
use crate::integrators::{evaluate_df, Budget, Estimate, Method, Policy};
use crate::special_functions::{gamma_complex, ExponentPair};

#[derive(Debug, Clone, PartialEq)]
pub struct TwinLemmaInstance {
    pub p: usize,
    pub q: usize,
    pub u: Vec<Complex64>,
    pub lambdas: Vec<ExponentPair>,
}

#[derive(Debug, Clone)]
pub struct TwinRhs {
    pub sign: Complex64,
    pub gamma_factor: Complex64,
    pub u_factor: Complex64,
    pub residual: DFIntegralSpec,
}

impl TwinRhs {
    pub fn prefactor(&self) -> Complex64 {
        self.sign * self.gamma_factor * self.u_factor
    }
}

#[derive(Debug, Clone)]
pub struct TwinReport {
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub sigma: f64,
    pub agree: bool,
}

impl TwinLemmaInstance {
    pub fn new(p: usize, q: usize, u: Vec<Complex64>, lambdas: Vec<ExponentPair>) -> Result<Self, IdentityError> {
        let m = p + q + 1;
        if u.len() != m || lambdas.len() != m {
            return Err(IdentityError::Invalid(format!("need {m} points and exponents")));
        }
        for i in 0..m {
            for j in i + 1..m {
                if (u[i] - u[j]).norm() == 0.0 {
                    return Err(IdentityError::Invalid("points must be distinct".into()));
                }
            }
        }
        Ok(Self { p, q, u, lambdas })
    }

    pub fn m(&self) -> usize {
        self.p + self.q + 1
    }

    /// -2 < Re(l_j + l'_j) < 0 and -2p-2 < sum Re(l_j + l'_j) < -2p.
    pub fn in_window(&self) -> bool {
        let p = self.p as f64;
        let local = self.lambdas.iter().all(|l| {
            let t = l.total().re;
            -2.0 < t && t < 0.0
        });
        let sum: f64 = self.lambdas.iter().map(|l| l.total().re).sum();
        local && -2.0 * p - 2.0 < sum && sum < -2.0 * p
    }

    fn spec(&self, n: usize, pairs: impl Iterator<Item = ExponentPair>) -> DFIntegralSpec {
        let insertions = self.u.iter().zip(pairs).map(|(&z, p)| Insertion { location: z, pairs: vec![p] }).collect();
        DFIntegralSpec::new(vec![n], insertions, vec![vec![2.0]], Normalization::Nu).expect("well-formed twin spec")
    }

    /// The p-variable side.
    pub fn lhs_spec(&self) -> DFIntegralSpec {
        self.spec(self.p, self.lambdas.iter().copied())
    }
}

fn gc(p: ExponentPair) -> Result<Complex64, IdentityError> {
    gamma_complex(p)?.finite().ok_or(IdentityError::Pole(format!("Gamma_C({}|{})", p.a, p.a_bar)))
}

pub fn twin_lemma_rhs(inst: &TwinLemmaInstance) -> Result<TwinRhs, IdentityError> {
    if !inst.in_window() {
        return Err(IdentityError::OutsideWindow);
    }
    let one = Complex64::new(1.0, 0.0);
    let spin_sum: i64 = inst.lambdas.iter().enumerate().map(|(j, l)| j as i64 * l.spin()).sum();
    let sign = if spin_sum.rem_euclid(2) == 0 { one } else { -one };
    let mut gamma_factor = one;
    for l in &inst.lambdas {
        gamma_factor *= gc(l.shift(one))?;
    }
    let p1 = Complex64::new(inst.p as f64 + 1.0, 0.0);
    let sa: Complex64 = inst.lambdas.iter().map(|l| l.a).sum();
    let sb: Complex64 = inst.lambdas.iter().map(|l| l.a_bar).sum();
    gamma_factor /= gc(ExponentPair::new(p1 + sa, p1 + sb)?)?;
    let mut u_factor = one;
    for i in 0..inst.m() {
        for j in i + 1..inst.m() {
            let (li, lj) = (inst.lambdas[i], inst.lambdas[j]);
            let e = ExponentPair::new(one + li.a + lj.a, one + li.a_bar + lj.a_bar)?;
            u_factor *= complex_power(inst.u[j] - inst.u[i], e).expect("distinct points");
        }
    }
    let residual = inst.spec(inst.q, inst.lambdas.iter().map(|l| l.shift(one).neg()));
    Ok(TwinRhs { sign, gamma_factor, u_factor, residual })
}

fn sigma_of(e: &Estimate, tol: f64) -> f64 {
    match e.method {
        Method::Quadrature if e.n_samples == 0 && e.abs_error == 0.0 && e.seed == 0 => 0.0,
        Method::Quadrature => e.abs_error.max(tol),
        Method::MonteCarlo => e.stderr,
    }
}

/// Evaluates both sides numerically; they agree when within three combined
/// standard errors.
pub fn twin_lemma_check(inst: &TwinLemmaInstance, budget: &Budget) -> Result<TwinReport, IdentityError> {
    let rhs_parts = twin_lemma_rhs(inst)?;
    let lhs = evaluate_df(&inst.lhs_spec(), Policy::Auto, budget)?;
    let rhs_budget = Budget { seed: budget.seed.wrapping_add(1), ..budget.clone() };
    let residual = evaluate_df(&rhs_parts.residual, Policy::Auto, &rhs_budget)?;
    let k = rhs_parts.prefactor();
    let rhs = residual.scaled(k);
    let s_l = if inst.p == 0 { 0.0 } else { sigma_of(&lhs, budget.tol) };
    let s_r = if inst.q == 0 { 0.0 } else { sigma_of(&residual, budget.tol) * k.norm() };
    let sigma = (s_l * s_l + s_r * s_r).sqrt();
    let diff = (lhs.value - rhs.value).norm();
    let agree = if sigma > 0.0 { diff <= 3.0 * sigma } else { diff <= 1e-12 * lhs.value.norm().max(1.0) };
    Ok(TwinReport { lhs, rhs, sigma, agree })
}

/// Instances for every (p, q) with p + q <= 3, placed inside the window.
pub fn curated_suite() -> Vec<TwinLemmaInstance> {
    let points = [
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.3, 0.8),
        Complex64::new(-0.7, -0.5),
    ];
    let wiggles: [&[f64]; 4] = [&[0.0], &[0.1, -0.1], &[0.1, -0.05, -0.05], &[0.1, -0.1, 0.05, -0.05]];
    let spins = [1i64, -1, 0, 0];
    let mut out = Vec::new();
    for total in 0..=3usize {
        for p in (0..=total).rev() {
            let q = total - p;
            let m = p + q + 1;
            let c = -((2 * p + 1) as f64) / m as f64;
            let mut lambdas = Vec::with_capacity(m);
            for j in 0..m {
                let t = c + wiggles[m - 1][j];
                let n = if m >= 2 { spins[j] as f64 } else { 0.0 };
                lambdas.push(ExponentPair::real(0.5 * (t + n), 0.5 * (t - n)).expect("integer spin"));
            }
            out.push(TwinLemmaInstance::new(p, q, points[..m].to_vec(), lambdas).expect("valid instance"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::SamplerConfig;

    #[test]
    fn beta_case_rhs() {
        let d = ExponentPair::diagonal_real(-0.6);
        let inst = TwinLemmaInstance::new(1, 0, vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], vec![d, d]).unwrap();
        let rhs = twin_lemma_rhs(&inst).unwrap();
        assert_eq!(rhs.sign, Complex64::new(1.0, 0.0));
        let g = |x: f64| gc(ExponentPair::diagonal_real(x)).unwrap();
        assert!((rhs.gamma_factor - g(0.4) * g(0.4) / g(0.8)).norm() < 1e-14);
        assert!((rhs.u_factor - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(rhs.residual.n_variables(), 0);
    }

    #[test]
    fn diagonal_pairs_have_positive_sign() {
        for inst in curated_suite() {
            let mut diag = inst.clone();
            diag.lambdas = inst.lambdas.iter().map(|l| ExponentPair::diagonal(l.total() / 2.0)).collect();
            if let Ok(rhs) = twin_lemma_rhs(&diag) {
                assert_eq!(rhs.sign, Complex64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn curated_suite_is_inside_the_window() {
        let suite = curated_suite();
        assert_eq!(suite.len(), 10);
        for inst in &suite {
            assert!(inst.in_window(), "{inst:?}");
        }
    }

    #[test]
    fn one_variable_instances_agree() {
        let budget = Budget { tol: 1e-9, sampler: SamplerConfig::with_samples(1 << 18), seed: 17 };
        let d = ExponentPair::diagonal_real(-0.6);
        let spin = ExponentPair::real(0.1, -0.9).unwrap();
        let beta = ExponentPair::diagonal_real(-0.7);
        let pts = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        for inst in [
            TwinLemmaInstance::new(1, 0, pts.clone(), vec![d, d]).unwrap(),
            TwinLemmaInstance::new(1, 0, pts.clone(), vec![spin, beta]).unwrap(),
            TwinLemmaInstance::new(1, 0, pts.clone(), vec![beta, spin]).unwrap(),
            TwinLemmaInstance::new(0, 1, pts, vec![ExponentPair::diagonal_real(-0.3), ExponentPair::real(0.3, -0.7).unwrap()]).unwrap(),
        ] {
            let rep = twin_lemma_check(&inst, &budget).unwrap();
            assert!(rep.agree, "{:?} vs {:?} sigma {}", rep.lhs.value, rep.rhs.value, rep.sigma);
        }
    }

    #[test]
    fn window_violation_is_refused() {
        let d = ExponentPair::diagonal_real(-0.2);
        let inst = TwinLemmaInstance::new(1, 0, vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], vec![d, d]).unwrap();
        assert!(matches!(twin_lemma_rhs(&inst), Err(IdentityError::OutsideWindow)));
    }
}
