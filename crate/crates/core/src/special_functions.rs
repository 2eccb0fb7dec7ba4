//! Gamma machinery over the complex numbers, the ratio l(x) = Gamma(x)/Gamma(1-x),
//! the complex-field Gamma function and the Upsilon function.

use std::f64::consts::{PI, SQRT_2};
use std::ops::Add;

use num_complex::Complex64;
use thiserror::Error;

use crate::integrators::gauss::adaptive;

/// Distance to an integer below which an argument is treated as sitting on a
/// pole or zero of Gamma.
pub const POLE_TOL: f64 = 1e-12;
/// Integer-difference tolerance for exponent pairs.
pub const PAIR_TOL: f64 = 1e-9;
/// Default absolute accuracy for log Upsilon.
pub const UPSILON_TOL: f64 = 1e-11;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("exponent pair ({a}|{a_bar}) does not have an integer difference")]
    InvalidPair { a: Complex64, a_bar: Complex64 },
    #[error("Re z = {0} is outside the strip 0 < Re z < q")]
    OutsideStrip(f64),
    #[error("pole in factor {index} of the l-product")]
    Pole { index: usize },
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

/// A meromorphic value: finite, or one of the two tagged singular outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tagged {
    Finite(Complex64),
    Pole,
    Zero,
}

impl Tagged {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Tagged::Finite(z) => Some(z),
            Tagged::Zero => Some(Complex64::new(0.0, 0.0)),
            Tagged::Pole => None,
        }
    }

    pub fn is_pole(self) -> bool {
        matches!(self, Tagged::Pole)
    }

    pub fn is_zero(self) -> bool {
        match self {
            Tagged::Zero => true,
            Tagged::Finite(z) => z == Complex64::new(0.0, 0.0),
            Tagged::Pole => false,
        }
    }
}

/// The exponent (a|a') of z^a zbar^a'.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    pub a: Complex64,
    pub a_bar: Complex64,
}

impl ExponentPair {
    pub fn new(a: Complex64, a_bar: Complex64) -> Result<Self, SpecialError> {
        let d = a - a_bar;
        if d.im.abs() > PAIR_TOL || (d.re - d.re.round()).abs() > PAIR_TOL {
            return Err(SpecialError::InvalidPair { a, a_bar });
        }
        Ok(Self { a, a_bar })
    }

    pub fn real(a: f64, a_bar: f64) -> Result<Self, SpecialError> {
        Self::new(Complex64::new(a, 0.0), Complex64::new(a_bar, 0.0))
    }

    pub fn diagonal(a: Complex64) -> Self {
        Self { a, a_bar: a }
    }

    pub fn diagonal_real(a: f64) -> Self {
        Self::diagonal(Complex64::new(a, 0.0))
    }

    /// The integer a - a'.
    pub fn spin(&self) -> i64 {
        (self.a - self.a_bar).re.round() as i64
    }

    /// a + a', the exponent of |z|.
    pub fn total(&self) -> Complex64 {
        self.a + self.a_bar
    }

    pub fn swapped(&self) -> Self {
        Self { a: self.a_bar, a_bar: self.a }
    }

    pub fn shift(&self, c: Complex64) -> Self {
        Self { a: self.a + c, a_bar: self.a_bar + c }
    }

    pub fn neg(&self) -> Self {
        Self { a: -self.a, a_bar: -self.a_bar }
    }
}

impl Add for ExponentPair {
    type Output = ExponentPair;
    fn add(self, rhs: ExponentPair) -> ExponentPair {
        ExponentPair { a: self.a + rhs.a, a_bar: self.a_bar + rhs.a_bar }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn nearest_integer(z: Complex64) -> Option<i64> {
    let n = z.re.round();
    (z.im.abs() <= POLE_TOL && (z.re - n).abs() <= POLE_TOL * n.abs().max(1.0)).then_some(n as i64)
}

/// sin(pi z) with the argument reduced to the nearest integer, so zeros are
/// resolved to full relative precision.
pub fn sin_pi(z: Complex64) -> Complex64 {
    let n = z.re.round();
    let s = (PI * (z - n)).sin();
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

fn lanczos_ln_gamma(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = c(LANCZOS[0]);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        x += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// log Gamma(z) on some branch; only exp of the result is meaningful for
/// Re z < 1/2.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        lanczos_ln_gamma(z)
    } else {
        c(PI.ln()) - sin_pi(z).ln() - lanczos_ln_gamma(1.0 - z)
    }
}

/// Gamma(z); returns infinity at the poles.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        lanczos_ln_gamma(z).exp()
    } else {
        let s = sin_pi(z);
        if s == c(0.0) {
            return c(f64::INFINITY);
        }
        PI / (s * lanczos_ln_gamma(1.0 - z).exp())
    }
}

/// 1/Gamma(z), entire, with exact zeros at the nonpositive integers.
pub fn rgamma(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        (-lanczos_ln_gamma(z)).exp()
    } else {
        if let Some(n) = nearest_integer(z) {
            if n <= 0 {
                return c(0.0);
            }
        }
        sin_pi(z) * lanczos_ln_gamma(1.0 - z).exp() / PI
    }
}

/// l(x) = Gamma(x)/Gamma(1-x).
pub fn l_func(x: Complex64) -> Tagged {
    if let Some(n) = nearest_integer(x) {
        return if n <= 0 { Tagged::Pole } else { Tagged::Finite(c(0.0)) };
    }
    if x.re >= 0.5 {
        let g = lanczos_ln_gamma(x).exp();
        Tagged::Finite(g * g * sin_pi(x) / PI)
    } else {
        let g = lanczos_ln_gamma(1.0 - x).exp();
        Tagged::Finite(PI / (sin_pi(x) * g * g))
    }
}

/// l(x) for callers that have already excluded the poles.
pub fn l_real(x: f64) -> f64 {
    match l_func(c(x)) {
        Tagged::Finite(v) => v.re,
        _ => f64::INFINITY,
    }
}

fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => c(1.0),
        1 => Complex64::new(0.0, 1.0),
        2 => c(-1.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Gamma of the complex field, i^{a-a'} Gamma(a)/Gamma(1-a').  On the line
/// a - a' = n fixed, a pole of Gamma(a) at a = -k is cancelled by a zero of
/// 1/Gamma(1-a') when 1 + k + n <= 0, leaving a finite limit.
pub fn gamma_complex(p: ExponentPair) -> Result<Tagged, SpecialError> {
    let p = ExponentPair::new(p.a, p.a_bar)?;
    let n = p.spin();
    let phase = i_pow(n);
    if let Some(k) = nearest_integer(p.a).filter(|&k| k <= 0) {
        let k = -k;
        let m = -1 - k - n;
        if m < 0 {
            return Ok(Tagged::Pole);
        }
        // Gamma(-k+e) ~ (-1)^k/(k! e) and 1/Gamma(-m-e) ~ -(-1)^m m! e.
        let ratio = factorial_ratio(m as u64, k as u64);
        let sign = if (k + m) % 2 == 0 { -1.0 } else { 1.0 };
        return Ok(Tagged::Finite(phase * sign * ratio));
    }
    Ok(Tagged::Finite(phase * gamma(p.a) * rgamma(1.0 - p.a_bar)))
}

fn factorial_ratio(m: u64, k: u64) -> f64 {
    let lm: f64 = (1..=m).map(|i| (i as f64).ln()).sum();
    let lk: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    (lm - lk).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpsilonParams {
    pub gamma: f64,
    pub q: f64,
}

impl UpsilonParams {
    pub fn new(gamma: f64) -> Self {
        assert!(gamma > 0.0 && gamma.is_finite(), "gamma must be positive");
        Self { gamma, q: gamma + 2.0 / gamma }
    }
}

/// Integrand of log Upsilon in t, already divided by t.
fn upsilon_integrand(t: f64, cc: Complex64, gamma: f64) -> Complex64 {
    let a = gamma / (2.0 * SQRT_2);
    let b = 1.0 / (SQRT_2 * gamma);
    let k = cc / (2.0 * SQRT_2);
    let half_c2 = 0.5 * cc * cc;
    if t < 1e-2 {
        // (c^2/2)(e^{-t} - R(t)/R(0)) / t with log R expanded through t^4.
        let (t2, t4) = (t * t, t * t * t * t);
        let k2 = k * k;
        let lr = t2 * (2.0 * k2 - a * a - b * b) / 6.0 - t4 * (2.0 * k2 * k2 - a.powi(4) - b.powi(4)) / 180.0;
        let expm1_lr = lr + lr * lr / 2.0 + lr * lr * lr / 6.0;
        return half_c2 * ((-t).exp_m1() - expm1_lr) / t;
    }
    let ratio = if t < 1.0 {
        let s = (k * t).sinh();
        s * s / ((a * t).sinh() * (b * t).sinh())
    } else {
        let ab = (a + b) * t;
        let num = 0.5 * ((2.0 * k * t - ab).exp() + (-2.0 * k * t - ab).exp()) - (-ab).exp();
        let den = 0.5 * (-(-2.0 * a * t).exp_m1()) * (-(-2.0 * b * t).exp_m1());
        num / den
    };
    (half_c2 * (-t).exp() - ratio) / t
}

/// log Upsilon(z) by direct quadrature, valid on 0 < Re z < q.
pub fn log_upsilon_strip(z: Complex64, params: UpsilonParams, tol: f64) -> Result<Complex64, SpecialError> {
    if !(z.re > 0.0 && z.re < params.q) {
        return Err(SpecialError::OutsideStrip(z.re));
    }
    let gamma = params.gamma;
    let cc = params.q / 2.0 - z;
    if cc == c(0.0) {
        return Ok(c(0.0));
    }
    let decay = (params.q / 2.0 - cc.re.abs()) / SQRT_2;
    let f = |t: f64| upsilon_integrand(t, cc, gamma);

    // Tail beyond T is bounded by about 2 e^{-decay T}/(decay T) plus the
    // e^{-t} piece; pick T with a tenth of the budget left for it.
    let rate = decay.min(1.0);
    let scale = (1.0 + cc.norm_sqr()).max(2.0 / rate);
    let mut t_max = 40.0f64;
    while scale * (-rate * t_max).exp() / t_max > tol / 10.0 {
        t_max *= 1.25;
    }

    let budget = 0.9 * tol;
    let mut edges = vec![0.0, 1.0];
    while *edges.last().unwrap() < t_max {
        let next = (edges.last().unwrap() * 2.0).min(t_max);
        edges.push(next);
    }
    let share = budget / (edges.len() - 1) as f64;
    let mut total = c(0.0);
    for w in edges.windows(2) {
        let r = adaptive(f, w[0], w[1], share, 2000);
        if !r.converged {
            return Err(SpecialError::Internal(format!(
                "log Upsilon quadrature did not converge on [{}, {}] at z = {z}",
                w[0], w[1]
            )));
        }
        total += r.value;
    }
    Ok(total)
}

pub fn upsilon_strip(z: Complex64, params: UpsilonParams, tol: f64) -> Result<Complex64, SpecialError> {
    log_upsilon_strip(z, params, tol).map(|v| v.exp())
}

/// Whether z lies in (-gamma N - (2/gamma) N) or (q + gamma N + (2/gamma) N).
pub fn is_upsilon_zero(z: Complex64, params: UpsilonParams) -> bool {
    if z.im.abs() > 1e-10 {
        return false;
    }
    let on_lattice = |x: f64| -> bool {
        // x = gamma n + (2/gamma) m with n, m >= 0.
        if x < -1e-10 {
            return false;
        }
        let dual = 2.0 / params.gamma;
        let m_max = (x / dual).floor() as i64 + 1;
        (0..=m_max).any(|m| {
            let rest = x - dual * m as f64;
            let n = (rest / params.gamma).round();
            n >= 0.0 && (rest - params.gamma * n).abs() <= 1e-10
        })
    };
    on_lattice(-z.re) || on_lattice(z.re - params.q)
}

/// Which step sizes the continuation may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftPolicy {
    /// The step that brings Re z closest to q/2, gamma first on ties.
    Auto,
    GammaOnly,
    DualOnly,
}

/// log l(x) on some branch, `None` at a zero or pole.
pub fn ln_l(x: Complex64) -> Option<Complex64> {
    if nearest_integer(x).is_some() {
        return None;
    }
    let s = (sin_pi(x) / PI).ln();
    Some(if x.re >= 0.5 {
        2.0 * lanczos_ln_gamma(x) + s
    } else {
        -2.0 * lanczos_ln_gamma(1.0 - x) - s
    })
}

/// log of l(chi z/2) (chi/sqrt 2)^{1 - chi z}, the ratio
/// Upsilon(z+chi)/Upsilon(z).
fn ln_shift_factor(z: Complex64, chi: f64) -> Option<Complex64> {
    Some(ln_l(chi * z / 2.0)? + (1.0 - chi * z) * (chi / SQRT_2).ln())
}

pub fn upsilon(z: Complex64, params: UpsilonParams, tol: f64) -> Result<Tagged, SpecialError> {
    upsilon_with_policy(z, params, tol, ShiftPolicy::Auto)
}

/// Upsilon on the whole plane: delegates to the strip integral after moving
/// Re z into (0, q) with the shift equations.
pub fn upsilon_with_policy(
    z: Complex64,
    params: UpsilonParams,
    tol: f64,
    policy: ShiftPolicy,
) -> Result<Tagged, SpecialError> {
    Ok(match ln_upsilon_with_policy(z, params, tol, policy)? {
        Some(lu) => Tagged::Finite(lu.exp()),
        None => Tagged::Zero,
    })
}

/// log Upsilon(z) on the whole plane, `None` at a zero.  The imaginary part
/// is only defined modulo 2 pi.
pub fn ln_upsilon(z: Complex64, params: UpsilonParams, tol: f64) -> Result<Option<Complex64>, SpecialError> {
    ln_upsilon_with_policy(z, params, tol, ShiftPolicy::Auto)
}

pub fn ln_upsilon_with_policy(
    z: Complex64,
    params: UpsilonParams,
    tol: f64,
    policy: ShiftPolicy,
) -> Result<Option<Complex64>, SpecialError> {
    if is_upsilon_zero(z, params) {
        return Ok(None);
    }
    let steps = match policy {
        ShiftPolicy::Auto => vec![params.gamma, 2.0 / params.gamma],
        ShiftPolicy::GammaOnly => vec![params.gamma],
        ShiftPolicy::DualOnly => vec![2.0 / params.gamma],
    };
    let centre = params.q / 2.0;
    let mut w = z;
    // Upsilon(z) = factor * Upsilon(w), tracked in log form to avoid overflow.
    let mut log_factor = c(0.0);
    let mut guard = 0;
    while !(w.re > 0.0 && w.re < params.q) {
        guard += 1;
        if guard > 100_000 {
            return Err(SpecialError::Internal(format!("shift continuation did not reach the strip from {z}")));
        }
        let up = w.re <= 0.0;
        let chi = *steps
            .iter()
            .min_by(|x, y| {
                let dx = if up { w.re + **x } else { w.re - **x };
                let dy = if up { w.re + **y } else { w.re - **y };
                (dx - centre).abs().total_cmp(&(dy - centre).abs())
            })
            .unwrap();
        let (base, next) = if up { (w, w + chi) } else { (w - chi, w - chi) };
        let Some(lf) = ln_shift_factor(base, chi) else {
            return Err(SpecialError::Internal(format!(
                "shift factor singular at {base} (chi = {chi}) while continuing from {z}"
            )));
        };
        // Upsilon(base + chi) = f Upsilon(base).
        if up {
            log_factor -= lf;
        } else {
            log_factor += lf;
        }
        w = next;
    }
    let lu = log_upsilon_strip(w, params, tol)?;
    Ok(Some(lu + log_factor))
}

/// prod_{j<M} l(z + j gamma^2/2), returned in its Upsilon form after checking
/// it against the direct product.
pub fn l_product(z: Complex64, m: usize, params: UpsilonParams, tol: f64) -> Result<Complex64, SpecialError> {
    let g2 = params.gamma * params.gamma / 2.0;
    let mut direct = c(1.0);
    for j in 0..m {
        match l_func(z + j as f64 * g2) {
            Tagged::Finite(v) => direct *= v,
            _ => return Err(SpecialError::Pole { index: j }),
        }
    }
    if m == 0 {
        return Ok(c(1.0));
    }
    let mf = m as f64;
    let expo = mf * (2.0 * z - 1.0) + g2 * mf * (mf - 1.0);
    let pref = (expo * (params.gamma / SQRT_2).ln()).exp();
    let top = upsilon(2.0 * z / params.gamma + mf * params.gamma, params, tol)?;
    let bottom = upsilon(2.0 * z / params.gamma, params, tol)?;
    match (top, bottom) {
        (Tagged::Finite(t), Tagged::Finite(b)) => {
            let value = pref * t / b;
            let scale = direct.norm().max(value.norm()).max(f64::MIN_POSITIVE);
            if (value - direct).norm() > (1e4 * tol).max(1e-9) * scale {
                return Err(SpecialError::Internal(format!(
                    "l-product mismatch at z = {z}, M = {m}: direct {direct}, Upsilon form {value}"
                )));
            }
            Ok(value)
        }
        // A zero of the denominator without a pole in the product means the
        // numerator vanishes too; the direct product is the limit.
        _ => Ok(direct),
    }
}
