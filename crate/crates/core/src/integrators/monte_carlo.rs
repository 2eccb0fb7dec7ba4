//! Importance-sampled Monte Carlo with independent, reproducible streams.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Points closer than this to a proposal centre are redrawn.
pub const SINGULAR_HIT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    /// Radial log-logistic profile: the radius r has CDF u^d / (1 + u^d)
    /// with u = r / scale, so the planar density behaves like r^{d-2} at
    /// the centre and r^{-d-2} far away.
    Bump { centre: Complex64, scale: f64, shape: f64, weight: f64 },
    /// Planar density (beta - 1)/pi (1 + |x - c|^2)^{-beta}.
    Tail { centre: Complex64, beta: f64, weight: f64 },
}

impl Component {
    fn weight(&self) -> f64 {
        match self {
            Component::Bump { weight, .. } | Component::Tail { weight, .. } => *weight,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        let v = open_unit(rng);
        let phi = 2.0 * PI * rng.gen::<f64>();
        match *self {
            Component::Bump { centre, scale, shape, .. } => {
                let u = (v / (1.0 - v)).powf(1.0 / shape);
                centre + Complex64::from_polar(scale * u, phi)
            }
            Component::Tail { centre, beta, .. } => {
                let r2 = (1.0 - v).powf(-1.0 / (beta - 1.0)) - 1.0;
                centre + Complex64::from_polar(r2.max(0.0).sqrt(), phi)
            }
        }
    }

    fn density(&self, x: Complex64) -> f64 {
        match *self {
            Component::Bump { centre, scale, shape, .. } => {
                let u = (x - centre).norm() / scale;
                let ud = u.powf(shape);
                shape * u.powf(shape - 2.0) / (2.0 * PI * scale * scale * (1.0 + ud) * (1.0 + ud))
            }
            Component::Tail { centre, beta, .. } => {
                (beta - 1.0) / PI * (1.0 + (x - centre).norm_sqr()).powf(-beta)
            }
        }
    }
}

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.gen();
        if v > 0.0 {
            return v;
        }
    }
}

/// Mixture proposal for one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub components: Vec<Component>,
}

impl Mixture {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        let total: f64 = self.components.iter().map(Component::weight).sum();
        let mut pick = rng.gen::<f64>() * total;
        for c in &self.components {
            pick -= c.weight();
            if pick < 0.0 {
                return c.sample(rng);
            }
        }
        self.components.last().expect("empty mixture").sample(rng)
    }

    pub fn density(&self, x: Complex64) -> f64 {
        let total: f64 = self.components.iter().map(Component::weight).sum();
        self.components.iter().map(|c| c.weight() * c.density(x)).sum::<f64>() / total
    }

    fn too_close(&self, x: Complex64) -> bool {
        self.components.iter().any(|c| match c {
            Component::Bump { centre, .. } => (x - centre).norm() < SINGULAR_HIT_TOL,
            Component::Tail { .. } => false,
        })
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StreamResult {
    pub mean: Complex64,
    pub rejected: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct McResult {
    pub value: Complex64,
    pub stderr: f64,
    pub n_samples: u64,
    pub rejected: u64,
}

/// Substream `index` of `seed`: ChaCha8 keyed by the seed, with the stream
/// index selecting the 64-bit ChaCha stream.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mean of target/proposal over `streams` independent streams.  `log_target`
/// returns the complex log of the integrand, `None` where it vanishes, or
/// `Err(())` at a singular point (which is redrawn).  Streams run in
/// parallel; their means are combined in stream order.
pub fn run_streams<F>(
    proposals: &[Mixture],
    log_target: F,
    seed: u64,
    streams: usize,
    samples_per_stream: usize,
) -> McResult
where
    F: Fn(&[Complex64]) -> Result<Option<Complex64>, ()> + Sync,
{
    let per_stream: Vec<StreamResult> = (0..streams as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = stream_rng(seed, index);
            let mut xs = vec![Complex64::new(0.0, 0.0); proposals.len()];
            let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
            let mut rejected = 0u64;
            let mut done = 0usize;
            while done < samples_per_stream {
                let mut log_p = 0.0;
                let mut hit = false;
                for (x, prop) in xs.iter_mut().zip(proposals) {
                    *x = prop.sample(&mut rng);
                    if prop.too_close(*x) {
                        hit = true;
                        break;
                    }
                    log_p += prop.density(*x).ln();
                }
                if hit {
                    rejected += 1;
                    continue;
                }
                match log_target(&xs) {
                    Err(()) => {
                        rejected += 1;
                        continue;
                    }
                    Ok(None) => {}
                    Ok(Some(lf)) => {
                        let w = (lf - log_p).exp();
                        re.add(w.re);
                        im.add(w.im);
                    }
                }
                done += 1;
            }
            let n = samples_per_stream as f64;
            StreamResult { mean: Complex64::new(re.value() / n, im.value() / n), rejected }
        })
        .collect();

    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    for s in &per_stream {
        re.add(s.mean.re);
        im.add(s.mean.im);
    }
    let k = streams as f64;
    let value = Complex64::new(re.value() / k, im.value() / k);
    let stderr = if streams > 1 {
        let mut ss = CompensatedSum::default();
        for s in &per_stream {
            ss.add((s.mean - value).norm_sqr());
        }
        (ss.value() / (k * (k - 1.0))).sqrt()
    } else {
        0.0
    };
    McResult {
        value,
        stderr,
        n_samples: (streams * samples_per_stream) as u64,
        rejected: per_stream.iter().map(|s| s.rejected).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixture() -> Mixture {
        Mixture {
            components: vec![
                Component::Bump { centre: Complex64::new(0.0, 0.0), scale: 0.5, shape: 0.8, weight: 0.35 },
                Component::Bump { centre: Complex64::new(1.0, 0.0), scale: 0.5, shape: 1.5, weight: 0.35 },
                Component::Tail { centre: Complex64::new(0.5, 0.0), beta: 1.7, weight: 0.3 },
            ],
        }
    }

    #[test]
    fn densities_are_normalised() {
        use crate::integrators::quadrature::PlaneProblem;
        use crate::special_functions::ExponentPair;
        let m = mixture();
        let rest = |x: Complex64| Complex64::new(m.density(x).ln(), 0.0);
        let prob = PlaneProblem {
            points: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            pairs: vec![ExponentPair::diagonal_real(0.0); 2],
            margins: vec![0.8, 1.5],
            inf_margin: 0.8,
            rest: &rest,
        };
        let r = prob.integrate(1e-8);
        assert!((r.value.re - 1.0).abs() < 1e-6, "{:?}", r);
    }

    #[test]
    fn target_equal_to_density_gives_one() {
        let m = mixture();
        let props = vec![m.clone(), m.clone()];
        let res = run_streams(
            &props,
            |xs| Ok(Some(Complex64::new(xs.iter().map(|x| m.density(*x).ln()).sum(), 0.0))),
            7,
            8,
            1000,
        );
        assert!((res.value - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(res.stderr < 1e-12);
        assert_eq!(res.rejected, 0);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = stream_rng(3, 0);
        let mut b = stream_rng(3, 0);
        let mut c = stream_rng(3, 1);
        let (x, y, z): (u64, u64, u64) = (a.gen(), b.gen(), c.gen());
        assert_eq!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
