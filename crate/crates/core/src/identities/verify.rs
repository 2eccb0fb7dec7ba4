//! Cross-checks of the squared structure constant: the Coulomb-gas integral
//! evaluated numerically against a closed form.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::closed_form::{closed_formula_squared, closed_formula_squared_recurrence, distance_to_upsilon_zero, upsilon_arguments};
use super::recurrence::Sector;
use super::IdentityError;
use crate::df_core::build_df_3pt;
use crate::integrators::{evaluate_df, Budget, Estimate, Method, Policy};
use crate::json::Json;
use crate::lie_data::{CartanVector, ChargeConfig, HOrdering, RootSystem};
use crate::special_functions::Tagged;

/// Parameters closer than this to a zero of Upsilon are moved.
pub const SINGULAR_DISTANCE: f64 = 1e-6;
/// Size of the move.
pub const PERTURBATION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// Product of the two sector Fateev-Litvinov constants.
    FateevLitvinov(HOrdering),
    /// Product of the two sector totals of the recurrence.
    Recurrence,
}

impl ClosedForm {
    pub fn name(self) -> &'static str {
        match self {
            ClosedForm::FateevLitvinov(_) => "fateev_litvinov",
            ClosedForm::Recurrence => "recurrence",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub prefactor: f64,
    pub closed: ClosedForm,
    pub policy: Policy,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { prefactor: 1.0, closed: ClosedForm::FateevLitvinov(HOrdering::default()), policy: Policy::Auto }
    }
}

/// prod_i (-1)^{s_i (A_i2 - A'_i2)}: the integrand is assembled with
/// (x - 1)^{A|A'} while the structure constant uses (1 - x)^{A|A'}.
pub fn orientation_sign(rs: &RootSystem, cfg: &ChargeConfig) -> f64 {
    let mut odd = 0i64;
    for i in 0..rs.rank {
        let spin = (cfg.gamma * rs.inner(&rs.simple_root(i), &cfg.ms[1])).round() as i64;
        odd += spin * cfg.screening[i] as i64;
    }
    if odd.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The three-point Coulomb-gas integral with insertions at 0 and 1 and
/// plain Lebesgue measure.
pub fn df_integral_3pt(rs: &RootSystem, cfg: &ChargeConfig, policy: Policy, budget: &Budget) -> Result<Estimate, IdentityError> {
    let spec = build_df_3pt(rs, cfg)?;
    let spec = spec.with_multiplier(Complex64::new(orientation_sign(rs, cfg), 0.0));
    Ok(evaluate_df(&spec, policy, budget)?)
}

/// e^{i pi <alpha_2, m_1> - i pi <alpha_3, m_3>}.
pub fn structure_phase(rs: &RootSystem, cfg: &ChargeConfig) -> Complex64 {
    let t = rs.inner(&cfg.alphas[1], &cfg.ms[0]) - rs.inner(&cfg.alphas[2], &cfg.ms[2]);
    Complex64::from_polar(1.0, PI * t)
}

/// Vol p^{r/2} prod (-mu_i)^{s_i}/s_i! times the phase, applied to `est`.
pub fn structure_constant_via_df(
    rs: &RootSystem,
    cfg: &ChargeConfig,
    est: &Estimate,
    prefactor_opaque: f64,
) -> Result<Estimate, IdentityError> {
    let mut k = rs.torus_volume(cfg.gamma)? * prefactor_opaque.powf(rs.rank as f64 / 2.0);
    for (mu, &s) in cfg.mu.iter().zip(&cfg.screening) {
        let fact: f64 = (1..=s).map(f64::from).product();
        k *= (-mu).powi(s as i32) / fact;
    }
    Ok(est.scaled(structure_phase(rs, cfg) * k))
}

/// Smallest distance from an Upsilon argument of either sector's closed
/// form to a zero of Upsilon.
pub fn closest_upsilon_zero(rs: &RootSystem, cfg: &ChargeConfig, ordering: HOrdering) -> Result<f64, IdentityError> {
    let kappa = cfg.kappa(rs).ok_or_else(|| IdentityError::Invalid("alpha_1 must be kappa omega_r".into()))?;
    let mut best = f64::INFINITY;
    for sector in [Sector::Plus, Sector::Minus] {
        let s = sector.sign();
        let a2 = &cfg.alphas[1] + &cfg.ms[1].scale(s);
        let a3 = &cfg.alphas[2] + &cfg.ms[2].scale(s);
        let args = upsilon_arguments(rs, cfg.gamma, kappa, &a2, &a3, ordering, 1.0)?;
        for z in args.numerator.iter().chain(&args.denominator) {
            best = best.min(distance_to_upsilon_zero(*z, cfg.gamma));
        }
    }
    Ok(best)
}

fn closed_side(rs: &RootSystem, cfg: &ChargeConfig, opts: &VerifyOptions) -> Result<Tagged, IdentityError> {
    match opts.closed {
        ClosedForm::FateevLitvinov(ordering) => closed_formula_squared(rs, cfg, opts.prefactor, ordering),
        ClosedForm::Recurrence => match closed_formula_squared_recurrence(rs, cfg, opts.prefactor) {
            Ok(v) => Ok(Tagged::Finite(v)),
            Err(IdentityError::Pole(_)) => Ok(Tagged::Pole),
            Err(e) => Err(e),
        },
    }
}

fn needs_move(rs: &RootSystem, cfg: &ChargeConfig, opts: &VerifyOptions) -> Result<bool, IdentityError> {
    let near = match opts.closed {
        ClosedForm::FateevLitvinov(ordering) => closest_upsilon_zero(rs, cfg, ordering)? < SINGULAR_DISTANCE,
        ClosedForm::Recurrence => false,
    };
    Ok(near || !matches!(closed_side(rs, cfg, opts)?, Tagged::Finite(_)))
}

/// The same charges with kappa and alpha_2 moved by PERTURBATION along a
/// fixed irrational direction; screening and magnetic charges are kept.
pub fn perturbed(rs: &RootSystem, cfg: &ChargeConfig) -> Result<ChargeConfig, IdentityError> {
    let kappa = cfg.kappa(rs).ok_or_else(|| IdentityError::Invalid("alpha_1 must be kappa omega_r".into()))?;
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let dir: Vec<f64> = (0..rs.rank).map(|i| ((i as f64 + 1.0) * golden).fract() - 0.5).collect();
    let a2 = &cfg.alphas[1] + &CartanVector::new(dir).scale(PERTURBATION);
    Ok(ChargeConfig::semidegenerate(
        rs,
        cfg.gamma,
        kappa + PERTURBATION * 2f64.sqrt().fract(),
        a2,
        cfg.ms[1].clone(),
        &cfg.screening,
        cfg.mu.clone(),
    )?)
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// Structure constant from the numerical integral.
    pub df_side: Estimate,
    /// Squared structure constant from the closed form; infinite when the
    /// closed form has a pole.
    pub closed_side: Complex64,
    /// |C|^2 / closed side.
    pub ratio: Complex64,
    pub sigma: f64,
    pub pass: bool,
    pub params: Json,
    /// Parameters actually used, after any move away from a singularity.
    pub config: ChargeConfig,
    pub perturbed: bool,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn to_json(&self) -> Json {
        Json::object()
            .with("df_side", self.df_side.to_json())
            .with("closed_side", Json::object().with("re", self.closed_side.re).with("im", self.closed_side.im))
            .with("ratio_re", self.ratio.re)
            .with("ratio_im", self.ratio.im)
            .with("sigma", self.sigma)
            .with("pass", self.pass)
            .with("params", self.params.clone())
            .with("perturbed", self.perturbed)
            .with("notes", self.notes.iter().map(|n| Json::from(n.as_str())).collect::<Vec<_>>())
    }
}

pub fn charge_config_json(rs: &RootSystem, cfg: &ChargeConfig) -> Json {
    let vecs = |v: &[CartanVector]| v.iter().map(|x| Json::from(x.coords.clone())).collect::<Vec<_>>();
    let mut out = Json::object().with("rank", rs.rank).with("gamma", cfg.gamma);
    if let Some(kappa) = cfg.kappa(rs) {
        out = out.with("kappa", kappa);
    }
    out.with("alphas", vecs(&cfg.alphas))
        .with("ms", vecs(&cfg.ms))
        .with("mu", cfg.mu.clone())
        .with("screening", cfg.screening.iter().map(|&s| s as u64).collect::<Vec<_>>())
}

/// Compares |C|^2 from the integral with the closed form at 3 sigma.
pub fn verify_identity(
    rs: &RootSystem,
    cfg: &ChargeConfig,
    budget: &Budget,
    opts: &VerifyOptions,
) -> Result<VerifyReport, IdentityError> {
    if !cfg.is_semidegenerate(rs) {
        return Err(IdentityError::Invalid("charges must have alpha_1 = kappa omega_r and m_1 = 0".into()));
    }
    let mut notes = Vec::new();
    let mut point = cfg.clone();
    let mut moved = false;
    if needs_move(rs, cfg, opts)? {
        point = perturbed(rs, cfg)?;
        moved = true;
        notes.push(format!("closed side singular or within {SINGULAR_DISTANCE:e} of a singularity; parameters moved by {PERTURBATION:e}"));
    }
    let closed = closed_side(rs, &point, opts)?;

    if rs.in_dual_lattice(point.gamma, &point.alphas[2]) {
        let t = rs.inner(&point.alphas[2], &point.ms[2]);
        if (t - t.round()).abs() > 1e-9 {
            return Err(IdentityError::Invalid(format!("<alpha_3, m_3> = {t} is not an integer")));
        }
        notes.push("squared phase checked equal to 1".into());
    }

    let integral = df_integral_3pt(rs, &point, opts.policy, budget)?;
    let c = structure_constant_via_df(rs, &point, &integral, opts.prefactor)?;
    let c2 = c.value.norm_sqr();
    let rel = if c.value.norm() > 0.0 {
        let u = c.uncertainty() / c.value.norm();
        match c.method {
            Method::Quadrature => u.max(budget.tol),
            Method::MonteCarlo => u,
        }
    } else {
        0.0
    };

    let (closed_value, ratio, sigma, pass) = match closed {
        Tagged::Finite(v) if v.norm() == 0.0 && c2 == 0.0 => {
            notes.push("both sides vanish".into());
            (v, Complex64::new(1.0, 0.0), 0.0, true)
        }
        Tagged::Finite(v) if v.norm() == 0.0 => (v, Complex64::new(f64::INFINITY, 0.0), f64::INFINITY, false),
        Tagged::Finite(v) => {
            let ratio = Complex64::new(c2, 0.0) / v;
            let sigma = 2.0 * rel * ratio.norm();
            let pass = (ratio - 1.0).norm() <= 3.0 * sigma.max(f64::EPSILON);
            (v, ratio, sigma, pass)
        }
        Tagged::Zero => {
            notes.push("closed side vanishes".into());
            (Complex64::new(0.0, 0.0), Complex64::new(f64::INFINITY, 0.0), f64::INFINITY, false)
        }
        Tagged::Pole => {
            notes.push("closed side infinite: an Upsilon factor of its denominator vanishes".into());
            (Complex64::new(f64::INFINITY, 0.0), Complex64::new(0.0, 0.0), 0.0, false)
        }
    };

    let params = charge_config_json(rs, &point)
        .with("prefactor", opts.prefactor)
        .with("closed_form", opts.closed.name())
        .with(
            "h_ordering",
            match opts.closed {
                ClosedForm::FateevLitvinov(o) => o.name(),
                ClosedForm::Recurrence => "n/a",
            },
        );
    Ok(VerifyReport {
        df_side: c,
        closed_side: closed_value,
        ratio,
        sigma,
        pass,
        params,
        config: point,
        perturbed: moved,
        notes,
    })
}
