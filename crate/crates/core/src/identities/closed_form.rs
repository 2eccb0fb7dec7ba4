//! Upsilon-function closed forms: the imaginary Fateev-Litvinov constant,
//! the sector totals of the recurrence written through Upsilon, and the
//! squared structure constant they assemble into.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use super::recurrence::{iterate_recurrence, Sector};
use super::IdentityError;
use crate::lie_data::{CartanVector, ChargeConfig, HOrdering, RootSystem};
use crate::special_functions::{l_func, ln_upsilon, Tagged, UpsilonParams};

/// Accuracy requested from each Upsilon evaluation.
pub const UPSILON_TOL: f64 = 1e-12;

/// Product kept as a logarithm, with zeros counted separately so that a
/// zero in a denominator shows up as a pole rather than a division by zero.
#[derive(Debug, Clone, Copy)]
struct Tally {
    log: Complex64,
    zeros: i32,
}

impl Tally {
    fn new(value: f64) -> Self {
        Self { log: Complex64::new(value, 0.0).ln(), zeros: 0 }
    }

    fn mul(&mut self, t: Option<Complex64>) {
        match t {
            Some(lv) => self.log += lv,
            None => self.zeros += 1,
        }
    }

    fn div(&mut self, t: Option<Complex64>) {
        match t {
            Some(lv) => self.log -= lv,
            None => self.zeros -= 1,
        }
    }

    fn finish(self) -> Tagged {
        match self.zeros {
            0 => Tagged::Finite(self.log.exp()),
            z if z > 0 => Tagged::Zero,
            _ => Tagged::Pole,
        }
    }
}

/// The Upsilon arguments of the constant, split into numerator and
/// denominator, in the order the product is written.
#[derive(Debug, Clone, PartialEq)]
pub struct UpsilonArguments {
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
    /// Exponent of l(gamma^2/2) (gamma/sqrt 2)^{2 - gamma^2}.
    pub exponent: f64,
}

/// Arguments of the Fateev-Litvinov type product with prefactor exponent
/// `scale` <2Q - kappa omega_r - a2 - a3, rho>.
pub fn upsilon_arguments(
    rs: &RootSystem,
    gamma: f64,
    kappa: f64,
    a2: &CartanVector,
    a3: &CartanVector,
    ordering: HOrdering,
    scale: f64,
) -> Result<UpsilonArguments, IdentityError> {
    if !rs.is_type_a() {
        return Err(IdentityError::Unsupported("the closed form is written for type A".into()));
    }
    rs.check_dim(a2)?;
    rs.check_dim(a3)?;
    let r = rs.rank;
    let q = rs.background_charge(gamma)?;
    let alpha1 = rs.fund_weights[r - 1].scale(kappa);
    let defect = &(&(&q.scale(2.0) - &alpha1) - a2) - a3;
    let exponent = scale * rs.inner(&defect, &rs.weyl_vector);
    let mut numerator = vec![gamma; r];
    numerator.push(kappa);
    let q2 = &q - a2;
    let q3 = &q - a3;
    for e in &rs.positive_roots {
        numerator.push(rs.inner(&q2, e));
        numerator.push(rs.inner(&q3, e));
    }
    let h = rs.rep_weights_with(ordering);
    let n = (r + 1) as f64;
    let mut denominator = Vec::with_capacity(h.len() * h.len());
    for hi in &h {
        for hj in &h {
            denominator.push(kappa / n - rs.inner(&q2, hi) - rs.inner(&q3, hj));
        }
    }
    Ok(UpsilonArguments { numerator, denominator, exponent })
}

/// log of the product and the net number of vanishing factors (negative
/// when the denominator vanishes more often).
pub fn evaluate_log(args: &UpsilonArguments, gamma: f64) -> Result<(Complex64, i32), IdentityError> {
    let params = UpsilonParams::new(gamma);
    let rho = gamma * gamma / 2.0;
    let base = l_func(Complex64::new(rho, 0.0))
        .finite()
        .ok_or_else(|| IdentityError::Pole("l(gamma^2/2)".into()))?
        .re
        * (gamma / SQRT_2).powf(2.0 - gamma * gamma);
    let mut t = Tally::new(1.0);
    t.log = Complex64::new(args.exponent * base.ln(), 0.0);
    for &z in &args.numerator {
        t.mul(ln_upsilon(Complex64::new(z, 0.0), params, UPSILON_TOL)?);
    }
    for &z in &args.denominator {
        t.div(ln_upsilon(Complex64::new(z, 0.0), params, UPSILON_TOL)?);
    }
    Ok((t.log, t.zeros))
}

fn evaluate(args: &UpsilonArguments, gamma: f64) -> Result<Tagged, IdentityError> {
    let (log, zeros) = evaluate_log(args, gamma)?;
    Ok(Tally { log, zeros }.finish())
}

/// The imaginary Fateev-Litvinov constant C^FL(kappa omega_r, a2, a3) with
/// prefactor exponent (sqrt 2/gamma) <2Q - kappa omega_r - a2 - a3, rho>.
/// A vanishing Upsilon in the denominator gives `Tagged::Pole`.
pub fn fl_constant(
    rs: &RootSystem,
    gamma: f64,
    kappa: f64,
    alpha2: &CartanVector,
    alpha3: &CartanVector,
    ordering: HOrdering,
) -> Result<Tagged, IdentityError> {
    let args = upsilon_arguments(rs, gamma, kappa, alpha2, alpha3, ordering, SQRT_2 / gamma)?;
    evaluate(&args, gamma)
}

fn sector_charges(cfg: &ChargeConfig, sector: Sector) -> (CartanVector, CartanVector) {
    let s = sector.sign();
    (&cfg.alphas[1] + &cfg.ms[1].scale(s), &cfg.alphas[2] + &cfg.ms[2].scale(s))
}

fn kappa_of(rs: &RootSystem, cfg: &ChargeConfig) -> Result<f64, IdentityError> {
    if !cfg.is_semidegenerate(rs) {
        return Err(IdentityError::Invalid("charges must have alpha_1 = kappa omega_r and m_1 = 0".into()));
    }
    Ok(cfg.kappa(rs).expect("semidegenerate"))
}

/// The sector total R^{pm,tot} in its Upsilon form, with exponent
/// (2/gamma) <2Q - kappa omega_r - (a2 pm m2) - (a3 pm m3), rho>.
pub fn r_total_upsilon(
    rs: &RootSystem,
    cfg: &ChargeConfig,
    ordering: HOrdering,
    sector: Sector,
) -> Result<Tagged, IdentityError> {
    let kappa = kappa_of(rs, cfg)?;
    let (a2, a3) = sector_charges(cfg, sector);
    let args = upsilon_arguments(rs, cfg.gamma, kappa, &a2, &a3, ordering, 2.0 / cfg.gamma)?;
    evaluate(&args, cfg.gamma)
}

/// Vol^2 p^r prod (pi mu_i)^{2 s_i}.
pub fn closed_prefactor(rs: &RootSystem, cfg: &ChargeConfig, prefactor_opaque: f64) -> Result<f64, IdentityError> {
    let vol = rs.torus_volume(cfg.gamma)?;
    let mut k = vol * vol * prefactor_opaque.powi(rs.rank as i32);
    for (mu, &s) in cfg.mu.iter().zip(&cfg.screening) {
        k *= (PI * mu).powi(2 * s as i32);
    }
    Ok(k)
}

/// Both sectors must screen with the same numbers, which m_2 + m_3 = 0
/// guarantees.
pub fn check_sector_screening(rs: &RootSystem, cfg: &ChargeConfig) -> Result<(), IdentityError> {
    for sector in [Sector::Plus, Sector::Minus] {
        let (a2, a3) = sector_charges(cfg, sector);
        let s = rs.solve_screening(cfg.gamma, &[cfg.alphas[0].clone(), a2, a3])?;
        if s != cfg.screening {
            return Err(IdentityError::Invalid(format!(
                "{sector:?} sector screens with {s:?}, expected {:?}",
                cfg.screening
            )));
        }
    }
    Ok(())
}

/// Squared structure constant from the product of the two sector
/// Fateev-Litvinov constants.
pub fn closed_formula_squared(
    rs: &RootSystem,
    cfg: &ChargeConfig,
    prefactor_opaque: f64,
    ordering: HOrdering,
) -> Result<Tagged, IdentityError> {
    let kappa = kappa_of(rs, cfg)?;
    check_sector_screening(rs, cfg)?;
    let k = closed_prefactor(rs, cfg, prefactor_opaque)?;
    let mut t = Tally::new(k);
    for sector in [Sector::Plus, Sector::Minus] {
        let (a2, a3) = sector_charges(cfg, sector);
        match fl_constant(rs, cfg.gamma, kappa, &a2, &a3, ordering)? {
            Tagged::Finite(v) => t.log += v.ln(),
            Tagged::Zero => t.zeros += 1,
            Tagged::Pole => t.zeros -= 1,
        }
    }
    Ok(t.finish())
}

/// Squared structure constant with the two sector totals taken from the
/// recurrence itself instead of their Upsilon form.
pub fn closed_formula_squared_recurrence(
    rs: &RootSystem,
    cfg: &ChargeConfig,
    prefactor_opaque: f64,
) -> Result<Complex64, IdentityError> {
    kappa_of(rs, cfg)?;
    check_sector_screening(rs, cfg)?;
    let k = closed_prefactor(rs, cfg, prefactor_opaque)?;
    let out = iterate_recurrence(rs, cfg)?;
    Ok(k * out.plus * out.minus)
}

/// Distance from z to the nearest zero of Upsilon.
pub fn distance_to_upsilon_zero(z: f64, gamma: f64) -> f64 {
    let q = gamma + 2.0 / gamma;
    let dual = 2.0 / gamma;
    let lattice = |x: f64| -> f64 {
        // distance from x >= -inf to {gamma n + dual m : n, m >= 0}
        if x <= 0.0 {
            return -x;
        }
        let mut best = x;
        let m_max = (x / dual).floor() as i64 + 1;
        for m in 0..=m_max {
            let rest = x - dual * m as f64;
            let n = (rest / gamma).round().max(0.0);
            best = best.min((rest - gamma * n).abs());
        }
        best
    };
    lattice(-z).min(lattice(z - q))
}
