//! The one-variable Fourier transform of z^{l|l'}, by direct 2-D quadrature.
//!
//! The integrand is only conditionally convergent.  The angular integral is
//! done by the trapezoid rule (exact up to rounding for this entire periodic
//! integrand once the node count exceeds the oscillation frequency), the
//! radial integral near zero in r = e^t, and the oscillatory radial tail as
//! a sequence of half-period panels summed with Wynn's epsilon algorithm.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::df_core::complex_power;
use crate::integrators::gauss::{adaptive, GaussLegendre};
use crate::special_functions::{gamma_complex, ExponentPair, SpecialError};

#[derive(Debug, Clone, Copy)]
pub struct FourierCheck {
    pub lambda: ExponentPair,
    pub a: Complex64,
    /// (1/pi) int z^{l|l'} e^{a zbar - abar z} d^2z by quadrature.
    pub numeric: Complex64,
    /// Gamma_C(1+l|1+l') a^{-1-l'|-1-l}.
    pub closed: Complex64,
    pub rel_error: f64,
}

fn angular(n: i64, s: Complex64, a: Complex64, r: f64) -> Complex64 {
    let nodes = (4.0 * a.norm() * r).ceil() as usize + n.unsigned_abs() as usize + 64;
    let h = 2.0 * PI / nodes as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let th = -PI + (k as f64 + 0.5) * h;
        let z = Complex64::from_polar(r, th);
        let e = a * z.conj() - a.conj() * z;
        acc += (Complex64::new(0.0, n as f64 * th) + e).exp();
    }
    acc * h * Complex64::new(r, 0.0).powc(s)
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
pub fn wynn_epsilon(partial: &[Complex64]) -> Complex64 {
    let n = partial.len();
    let mut prev = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<Complex64> = partial.to_vec();
    let mut best = *partial.last().expect("empty sequence");
    let mut column = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d.norm() == 0.0 {
                return cur[i + 1];
            }
            next.push(prev[i + 1] + d.inv());
        }
        column += 1;
        if column % 2 == 0 {
            best = *next.last().unwrap();
        }
        prev = cur;
        cur = next;
    }
    best
}

pub fn fourier_numeric(lambda: ExponentPair, a: Complex64) -> Complex64 {
    let n = lambda.spin();
    let s = lambda.total();
    let k = a.norm();
    let half = PI / (2.0 * k);
    let r1 = half;
    // Inner part in t = ln r; the angular integral is O(1) as r -> 0.
    let margin = s.re + 2.0;
    let t_hi = r1.ln();
    let t_lo = t_hi - (60.0 / margin).min(700.0);
    let inner = adaptive(
        |t| {
            let r = t.exp();
            angular(n, s, a, r) * r * r
        },
        t_lo,
        t_hi,
        1e-13,
        400,
    )
    .value;
    let rule = GaussLegendre::new(24);
    let mut partial = Vec::new();
    let mut acc = inner;
    for p in 0..48 {
        let lo = r1 + p as f64 * half;
        acc += rule.integrate(lo, lo + half, |r| angular(n, s, a, r) * r);
        partial.push(acc);
    }
    wynn_epsilon(&partial) / PI
}

pub fn fourier_closed(lambda: ExponentPair, a: Complex64) -> Result<Complex64, SpecialError> {
    let g = gamma_complex(ExponentPair::new(lambda.a + 1.0, lambda.a_bar + 1.0)?)?
        .finite()
        .ok_or(SpecialError::Internal("Gamma_C pole".into()))?;
    let pw = complex_power(a, ExponentPair::new(-1.0 - lambda.a_bar, -1.0 - lambda.a)?)
        .ok_or(SpecialError::Internal("a = 0".into()))?;
    Ok(g * pw)
}

/// (-i)^{l-l'}: the factor by which the quadrature differs from
/// [`fourier_closed`] when the spin is nonzero.
pub fn phase_correction(lambda: ExponentPair) -> Complex64 {
    match lambda.spin().rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

pub fn fourier_check(lambda: ExponentPair, a: Complex64) -> Result<FourierCheck, SpecialError> {
    let numeric = fourier_numeric(lambda, a);
    let closed = fourier_closed(lambda, a)?;
    let rel_error = (numeric - closed).norm() / closed.norm();
    Ok(FourierCheck { lambda, a, numeric, closed, rel_error })
}

/// Five parameter points covering diagonal, complex and spin exponents.
pub fn standard_points() -> Vec<(ExponentPair, Complex64)> {
    let p = |a: Complex64, ab: Complex64| ExponentPair::new(a, ab).expect("integer spin");
    let c = Complex64::new;
    vec![
        (p(c(-0.5, 0.0), c(-0.5, 0.0)), c(1.0, 0.0)),
        (p(c(-0.3, 0.2), c(-0.3, 0.2)), c(0.7, 0.4)),
        (p(c(0.2, 0.0), c(-0.8, 0.0)), c(1.2, -0.5)),
        (p(c(-1.2, 0.0), c(-0.2, 0.0)), c(0.5, 0.9)),
        (p(c(0.6, 0.0), c(-1.4, 0.0)), c(-0.8, 0.3)),
    ]
}
