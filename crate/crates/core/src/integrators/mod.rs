//! Numerical evaluation of Coulomb-gas integrals.

pub mod gauss;
pub mod monte_carlo;
pub mod quadrature;

use num_complex::Complex64;
use thiserror::Error;

use crate::df_core::{check_convergence, ConvergenceReport, DFIntegralSpec, Integrand};
use crate::json::Json;
use monte_carlo::{run_streams, Component, Mixture};
use quadrature::PlaneProblem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("integral outside its convergence window")]
    NotConvergent(Box<ConvergenceReport>),
    #[error("sampler configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Dimension(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    /// Standard error across streams; zero for quadrature.
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub method: Method,
    /// Quadrature error estimate (absolute); zero for Monte Carlo.
    pub abs_error: f64,
    /// Monte Carlo draws that landed on a singular point and were redrawn.
    pub rejected: u64,
}

impl Estimate {
    pub fn exact(value: Complex64) -> Self {
        Self { value, stderr: 0.0, n_samples: 0, seed: 0, method: Method::Quadrature, abs_error: 0.0, rejected: 0 }
    }

    /// One-sigma absolute uncertainty, whichever method produced it.
    pub fn uncertainty(&self) -> f64 {
        match self.method {
            Method::Quadrature => self.abs_error,
            Method::MonteCarlo => self.stderr,
        }
    }

    pub fn scaled(&self, k: Complex64) -> Self {
        Self {
            value: self.value * k,
            stderr: self.stderr * k.norm(),
            abs_error: self.abs_error * k.norm(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Json {
        Json::object()
            .with("value_re", self.value.re)
            .with("value_im", self.value.im)
            .with("stderr", self.stderr)
            .with("n_samples", self.n_samples)
            .with("seed", self.seed)
            .with("method", self.method.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Total weight of the bumps, shared equally among insertions.
    pub bump_weight: f64,
    pub tail_weight: f64,
    pub bump_scale: f64,
    /// Tail exponent; `None` derives it from the infinity margin.
    pub tail_beta: Option<f64>,
    pub streams: usize,
    pub samples_per_stream: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            bump_weight: 0.7,
            tail_weight: 0.3,
            bump_scale: 0.5,
            tail_beta: None,
            streams: 64,
            samples_per_stream: 1 << 14,
        }
    }
}

impl SamplerConfig {
    pub fn with_samples(total: usize) -> Self {
        let d = Self::default();
        Self { samples_per_stream: total.div_ceil(d.streams).max(1), ..d }
    }

    fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.bump_weight > 0.0 && self.tail_weight > 0.0) {
            return Err(IntegrationError::Config("mixture weights must be positive".into()));
        }
        if ((self.bump_weight + self.tail_weight) - 1.0).abs() > 1e-12 {
            return Err(IntegrationError::Config("mixture weights must sum to 1".into()));
        }
        if !(self.bump_scale > 0.0) {
            return Err(IntegrationError::Config("bump scale must be positive".into()));
        }
        if self.streams == 0 || self.samples_per_stream == 0 {
            return Err(IntegrationError::Config("streams and samples must be positive".into()));
        }
        Ok(())
    }
}

fn require_convergent(spec: &DFIntegralSpec) -> Result<ConvergenceReport, IntegrationError> {
    let report = check_convergence(spec);
    if report.overall {
        Ok(report)
    } else {
        Err(IntegrationError::NotConvergent(Box::new(report)))
    }
}

/// Deterministic integration of a one-variable spec to absolute accuracy `tol`.
pub fn quadrature_df_1var(spec: &DFIntegralSpec, tol: f64) -> Result<Estimate, IntegrationError> {
    if spec.n_variables() != 1 {
        return Err(IntegrationError::Dimension(format!(
            "quadrature needs exactly one variable, got {}",
            spec.n_variables()
        )));
    }
    let report = require_convergent(spec)?;
    let g = spec.screening.iter().position(|&s| s == 1).expect("one active group");
    let factor = spec.measure_factor();
    let rest = |_: Complex64| Complex64::new(0.0, 0.0);
    let prob = PlaneProblem {
        points: spec.insertions.iter().map(|i| i.location).collect(),
        pairs: spec.insertions.iter().map(|i| i.pairs[g]).collect(),
        margins: report.insertion_margins[g].clone(),
        inf_margin: report.infinity_margins[g],
        rest: &rest,
    };
    let scale = spec.multiplier * factor;
    let res = prob.integrate(tol / scale.norm().max(f64::MIN_POSITIVE));
    Ok(Estimate {
        value: res.value * scale,
        stderr: 0.0,
        n_samples: 0,
        seed: 0,
        method: Method::Quadrature,
        abs_error: res.error * scale.norm(),
        rejected: 0,
    })
}

/// Per-variable proposals built from the integral's insertions and margins.
pub fn build_proposals(
    spec: &DFIntegralSpec,
    sampler: &SamplerConfig,
    report: &ConvergenceReport,
) -> Result<Vec<Mixture>, IntegrationError> {
    sampler.validate()?;
    let n_ins = spec.insertions.len();
    let centre = if n_ins == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        spec.insertions.iter().fold(Complex64::new(0.0, 0.0), |s, i| s + i.location) / n_ins as f64
    };
    let mut per_group = Vec::with_capacity(spec.rank);
    for g in 0..spec.rank {
        if spec.screening[g] == 0 {
            per_group.push(None);
            continue;
        }
        // A cluster of k variables escaping together tolerates a combined
        // tail slack of its margin, so each variable gets half its share.
        let inf = report.shared_infinity_margins[g];
        let beta = match sampler.tail_beta {
            Some(b) => b,
            None => (1.0 + 0.5 * inf).min(3.0),
        };
        if !(beta > 1.0) || beta >= 1.0 + inf {
            return Err(IntegrationError::Config(format!(
                "tail exponent {beta} must lie in (1, {}) for finite variance",
                1.0 + inf
            )));
        }
        let mut components = Vec::with_capacity(n_ins + 1);
        for (j, ins) in spec.insertions.iter().enumerate() {
            let shape = report.shared_insertion_margins[g][j].min(2.0);
            components.push(Component::Bump {
                centre: ins.location,
                scale: sampler.bump_scale,
                shape,
                weight: sampler.bump_weight / n_ins.max(1) as f64,
            });
        }
        let tail_weight = if n_ins == 0 { 1.0 } else { sampler.tail_weight };
        components.push(Component::Tail { centre, beta, weight: tail_weight });
        per_group.push(Some(Mixture { components }));
    }
    Ok(spec.groups().into_iter().map(|g| per_group[g].clone().expect("active group")).collect())
}

/// Importance-sampled estimate; bit-identical for fixed (spec, sampler, seed)
/// whatever the thread count.
pub fn mc_integrate(spec: &DFIntegralSpec, sampler: &SamplerConfig, seed: u64) -> Result<Estimate, IntegrationError> {
    let report = require_convergent(spec)?;
    let proposals = build_proposals(spec, sampler, &report)?;
    let integrand = Integrand::new(spec);
    let res = run_streams(&proposals, |xs| integrand.log_eval(xs), seed, sampler.streams, sampler.samples_per_stream);
    let scale = integrand.multiplier() * spec.measure_factor();
    Ok(Estimate {
        value: res.value * scale,
        stderr: res.stderr * scale.norm(),
        n_samples: res.n_samples,
        seed,
        method: Method::MonteCarlo,
        abs_error: 0.0,
        rejected: res.rejected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Auto,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Budget {
    pub tol: f64,
    pub sampler: SamplerConfig,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { tol: 1e-8, sampler: SamplerConfig::default(), seed: 0 }
    }
}

pub fn evaluate_df(spec: &DFIntegralSpec, policy: Policy, budget: &Budget) -> Result<Estimate, IntegrationError> {
    let n = spec.n_variables();
    if n == 0 {
        return Ok(Estimate::exact(spec.multiplier * spec.measure_factor()));
    }
    match policy {
        Policy::Quadrature => quadrature_df_1var(spec, budget.tol),
        Policy::MonteCarlo => mc_integrate(spec, &budget.sampler, budget.seed),
        Policy::Auto if n == 1 => quadrature_df_1var(spec, budget.tol),
        Policy::Auto => mc_integrate(spec, &budget.sampler, budget.seed),
    }
}
