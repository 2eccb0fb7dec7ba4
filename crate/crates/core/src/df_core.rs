//! Coulomb-gas integrands over C^N: bi-exponent powers, pair interactions,
//! the three-point magnetic primitive and convergence diagnostics.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::json::Json;
use crate::lie_data::{CartanVector, ChargeConfig, LieError, RootSystem};
use crate::special_functions::{ExponentPair, SpecialError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DfError {
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("malformed integral description: {0}")]
    Malformed(String),
}

/// z^a zbar^a' = |z|^{a+a'} e^{i(a-a') arg z}.  `None` signals a singular
/// point (z = 0 with Re(a+a') <= 0).
pub fn complex_power(z: Complex64, p: ExponentPair) -> Option<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        if p.a == Complex64::new(0.0, 0.0) && p.a_bar == Complex64::new(0.0, 0.0) {
            return Some(Complex64::new(1.0, 0.0));
        }
        return (p.total().re > 0.0).then(|| Complex64::new(0.0, 0.0));
    }
    Some(log_power(z, p).exp())
}

/// log of z^{a|a'} on the branch arg z in (-pi, pi].
#[inline]
pub fn log_power(z: Complex64, p: ExponentPair) -> Complex64 {
    let lnr = z.norm().ln();
    let arg = if z.im == 0.0 && z.re < 0.0 { PI } else { z.im.atan2(z.re) };
    p.total() * lnr + Complex64::new(0.0, arg) * (p.a - p.a_bar)
}

/// prod_{i<j} (z_i - z_j)^{a|a'}.
pub fn vandermonde_power(points: &[Complex64], p: ExponentPair) -> Option<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            acc *= complex_power(points[i] - points[j], p)?;
        }
    }
    Some(acc)
}

fn arg_lower(w: Complex64) -> f64 {
    if w.im == 0.0 && w.re < 0.0 {
        -PI
    } else {
        w.im.atan2(w.re)
    }
}

/// -m_1 arg((z2-x)/(z1-x)) + m_3 arg((z3-x)/(z2-x)) for real z1 < z2 < z3.
/// Points on the cut take the limit from the lower half-plane, which gives
/// pi m_1 at z_2 and -pi m_3 at z_3 when the cut is traversed left to right.
pub fn magnetic_primitive_3pt(
    x: Complex64,
    z1: f64,
    z2: f64,
    z3: f64,
    m1: &CartanVector,
    m3: &CartanVector,
) -> CartanVector {
    assert!(z1 < z2 && z2 < z3, "insertion points must be increasing");
    let c = |z: f64| Complex64::new(z, 0.0);
    let a1 = arg_lower((c(z2) - x) / (c(z1) - x));
    let a3 = arg_lower((c(z3) - x) / (c(z2) - x));
    &m1.scale(-a1) + &m3.scale(a3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Plain Lebesgue measure prod d^2x.
    Raw,
    /// prod_i (pi^{s_i} s_i!)^{-1} d^2x per group.
    Nu,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::Nu => "nu",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Insertion {
    pub location: Complex64,
    /// One exponent pair per group.
    pub pairs: Vec<ExponentPair>,
}

/// A Coulomb-gas integral
///   int prod_{i,a} prod_j (x_a^{(i)} - z_j)^{A_ij|A'_ij}
///       prod_{(i,a)<(k,b)} |x_a^{(i)} - x_b^{(k)}|^{c_ik} dx
/// with variables ordered group by group.
#[derive(Debug, Clone, PartialEq)]
pub struct DFIntegralSpec {
    pub rank: usize,
    pub screening: Vec<usize>,
    pub insertions: Vec<Insertion>,
    pub cross_exponents: Vec<Vec<f64>>,
    pub normalization: Normalization,
    /// Constant factor applied to the integrand; not part of the JSON form.
    pub multiplier: Complex64,
}

impl DFIntegralSpec {
    pub fn new(
        screening: Vec<usize>,
        insertions: Vec<Insertion>,
        cross_exponents: Vec<Vec<f64>>,
        normalization: Normalization,
    ) -> Result<Self, DfError> {
        let spec = Self {
            rank: screening.len(),
            screening,
            insertions,
            cross_exponents,
            normalization,
            multiplier: Complex64::new(1.0, 0.0),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), DfError> {
        let r = self.rank;
        if self.screening.len() != r {
            return Err(DfError::Malformed("screening length differs from rank".into()));
        }
        if self.cross_exponents.len() != r || self.cross_exponents.iter().any(|row| row.len() != r) {
            return Err(DfError::Malformed("cross_exponents must be rank x rank".into()));
        }
        for i in 0..r {
            for k in 0..r {
                if (self.cross_exponents[i][k] - self.cross_exponents[k][i]).abs() > 1e-12 {
                    return Err(DfError::Malformed("cross_exponents must be symmetric".into()));
                }
            }
        }
        for ins in &self.insertions {
            if ins.pairs.len() != r {
                return Err(DfError::Malformed("each insertion needs one pair per group".into()));
            }
            for p in &ins.pairs {
                ExponentPair::new(p.a, p.a_bar)?;
            }
        }
        Ok(())
    }

    pub fn n_variables(&self) -> usize {
        self.screening.iter().sum()
    }

    pub fn same_group_exponent(&self, i: usize) -> f64 {
        self.cross_exponents[i][i]
    }

    /// Group index of each variable.
    pub fn groups(&self) -> Vec<usize> {
        self.screening.iter().enumerate().flat_map(|(i, &s)| std::iter::repeat_n(i, s)).collect()
    }

    /// prod_i pi^{s_i} s_i!, the ratio of the raw measure to the nu measure.
    pub fn nu_to_raw(&self) -> f64 {
        self.screening
            .iter()
            .map(|&s| PI.powi(s as i32) * (1..=s).map(|k| k as f64).product::<f64>())
            .product()
    }

    /// Factor converting an integral against plain Lebesgue measure into
    /// the value described by this spec.
    pub fn measure_factor(&self) -> f64 {
        match self.normalization {
            Normalization::Raw => 1.0,
            Normalization::Nu => 1.0 / self.nu_to_raw(),
        }
    }

    pub fn with_multiplier(mut self, k: Complex64) -> Self {
        self.multiplier = k;
        self
    }

    pub fn to_json(&self) -> Json {
        let insertions: Vec<Json> = self
            .insertions
            .iter()
            .map(|ins| {
                let pairs: Vec<Json> = ins
                    .pairs
                    .iter()
                    .map(|p| {
                        Json::object()
                            .with("a_re", p.a.re)
                            .with("a_im", p.a.im)
                            .with("abar_re", p.a_bar.re)
                            .with("abar_im", p.a_bar.im)
                    })
                    .collect();
                Json::object().with("re", ins.location.re).with("im", ins.location.im).with("pairs", pairs)
            })
            .collect();
        let cross: Vec<Json> = self.cross_exponents.iter().map(|row| Json::from(row.clone())).collect();
        Json::object()
            .with("rank", self.rank)
            .with("screening", self.screening.clone())
            .with("insertions", insertions)
            .with("cross_exponents", cross)
            .with("normalization", self.normalization.name())
    }

    pub fn from_json(text: &str) -> Result<Self, DfError> {
        let wire: WireSpec = serde_json::from_str(text).map_err(|e| DfError::Malformed(e.to_string()))?;
        let normalization = match wire.normalization.as_str() {
            "raw" => Normalization::Raw,
            "nu" => Normalization::Nu,
            other => return Err(DfError::Malformed(format!("unknown normalization {other:?}"))),
        };
        let mut insertions = Vec::new();
        for ins in wire.insertions {
            let mut pairs = Vec::new();
            for p in ins.pairs {
                pairs.push(ExponentPair::new(
                    Complex64::new(p.a_re, p.a_im),
                    Complex64::new(p.abar_re, p.abar_im),
                )?);
            }
            insertions.push(Insertion { location: Complex64::new(ins.re, ins.im), pairs });
        }
        let spec = Self::new(wire.screening, insertions, wire.cross_exponents, normalization)?;
        if spec.rank != wire.rank {
            return Err(DfError::Malformed("rank differs from screening length".into()));
        }
        Ok(spec)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WirePair {
    a_re: f64,
    a_im: f64,
    abar_re: f64,
    abar_im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireInsertion {
    re: f64,
    im: f64,
    pairs: Vec<WirePair>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireSpec {
    rank: usize,
    screening: Vec<usize>,
    insertions: Vec<WireInsertion>,
    cross_exponents: Vec<Vec<f64>>,
    normalization: String,
}

/// Pointwise evaluator for a spec, re-entrant and cheap to share.
#[derive(Debug, Clone)]
pub struct Integrand {
    groups: Vec<usize>,
    locations: Vec<Complex64>,
    /// pairs[v][j]: exponent of variable v at insertion j.
    pairs: Vec<Vec<ExponentPair>>,
    /// Upper-triangular pair exponents between variables.
    pair_exp: Vec<Vec<f64>>,
    multiplier: Complex64,
}

impl Integrand {
    pub fn new(spec: &DFIntegralSpec) -> Self {
        let groups = spec.groups();
        let locations = spec.insertions.iter().map(|i| i.location).collect();
        let pairs = groups
            .iter()
            .map(|&g| spec.insertions.iter().map(|ins| ins.pairs[g]).collect())
            .collect();
        let pair_exp = groups
            .iter()
            .map(|&g| groups.iter().map(|&h| spec.cross_exponents[g][h]).collect())
            .collect();
        Self { groups, locations, pairs, pair_exp, multiplier: spec.multiplier }
    }

    pub fn dim(&self) -> usize {
        self.groups.len()
    }

    /// Complex log of the integrand without the multiplier.  `Err(())`
    /// flags a singular point, `Ok(None)` an exact zero.
    pub fn log_eval(&self, xs: &[Complex64]) -> Result<Option<Complex64>, ()> {
        debug_assert_eq!(xs.len(), self.dim());
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zero = false;
        for (v, &x) in xs.iter().enumerate() {
            for (j, &z) in self.locations.iter().enumerate() {
                let d = x - z;
                let p = self.pairs[v][j];
                if d == Complex64::new(0.0, 0.0) {
                    match complex_power(d, p) {
                        None => return Err(()),
                        Some(w) if w == Complex64::new(0.0, 0.0) => zero = true,
                        Some(_) => {}
                    }
                } else {
                    acc += log_power(d, p);
                }
            }
            for (w, &y) in xs.iter().enumerate().skip(v + 1) {
                let c = self.pair_exp[v][w];
                if c == 0.0 {
                    continue;
                }
                let dist = (x - y).norm();
                if dist == 0.0 {
                    if c < 0.0 {
                        return Err(());
                    }
                    zero = true;
                } else {
                    acc += c * dist.ln();
                }
            }
        }
        Ok(if zero { None } else { Some(acc) })
    }

    /// The integrand value; `None` at singular points.
    pub fn eval(&self, xs: &[Complex64]) -> Option<Complex64> {
        match self.log_eval(xs) {
            Err(()) => None,
            Ok(None) => Some(Complex64::new(0.0, 0.0)),
            Ok(Some(l)) => Some(self.multiplier * l.exp()),
        }
    }

    pub fn multiplier(&self) -> Complex64 {
        self.multiplier
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cluster {
    /// The variables collapse onto insertion j.
    Insertion(usize),
    /// The variables collapse onto each other away from the insertions.
    Collision,
    /// The variables escape to infinity together.
    Infinity,
}

/// A joint limit of several variables; `counts[i]` variables come from group i.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMargin {
    pub counts: Vec<usize>,
    pub cluster: Cluster,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// insertion_margins[i][j] = Re(A_ij + A'_ij) + 2 for groups with s_i > 0.
    pub insertion_margins: Vec<Vec<f64>>,
    /// ((i, k), margin) for every interacting pair of groups that can collide.
    pub collision_margins: Vec<((usize, usize), f64)>,
    /// Per group: -(total exponent of one variable at infinity) - 2.
    pub infinity_margins: Vec<f64>,
    /// Limits involving two or more variables at once.
    pub clusters: Vec<ClusterMargin>,
    /// Per (group, insertion): the least margin per variable over every
    /// cluster at that insertion containing a variable of the group.
    pub shared_insertion_margins: Vec<Vec<f64>>,
    /// Per group: the same at infinity.
    pub shared_infinity_margins: Vec<f64>,
    pub overall: bool,
}

impl ConvergenceReport {
    pub fn min_insertion_margin(&self) -> f64 {
        self.insertion_margins.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_infinity_margin(&self) -> f64 {
        self.infinity_margins.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_cluster_margin(&self) -> f64 {
        self.clusters.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Json {
        let ins: Vec<Json> = self.insertion_margins.iter().map(|row| Json::from(row.clone())).collect();
        let col: Vec<Json> = self
            .collision_margins
            .iter()
            .map(|((i, k), m)| Json::object().with("groups", vec![*i, *k]).with("margin", *m))
            .collect();
        let worst = self.clusters.iter().min_by(|a, b| a.margin.total_cmp(&b.margin));
        let mut out = Json::object()
            .with("insertion_margins", ins)
            .with("collision_margins", col)
            .with("infinity_margins", self.infinity_margins.clone());
        if let Some(c) = worst {
            let kind = match c.cluster {
                Cluster::Insertion(j) => format!("insertion {j}"),
                Cluster::Collision => "collision".into(),
                Cluster::Infinity => "infinity".into(),
            };
            out = out.with(
                "worst_cluster",
                Json::object().with("counts", c.counts.clone()).with("limit", kind).with("margin", c.margin),
            );
        }
        out.with("overall", self.overall)
    }
}

/// Above this many group-count vectors the cluster scan is skipped.
const MAX_CLUSTER_SCAN: usize = 200_000;

/// Power counting for absolute convergence and a finite-variance sampling
/// weight.
///
/// Insertion margins are local integrability at each insertion.  A pair of
/// variables with an attractive exponent c < 0 gets the margin 2 + 2c, which
/// keeps |integrand|^2 locally integrable there.  The infinity margin looks
/// at one variable escaping with the others fixed.  Clusters repeat the same
/// counting for several variables moving together; by symmetry only the
/// number taken from each group matters.
pub fn check_convergence(spec: &DFIntegralSpec) -> ConvergenceReport {
    let r = spec.rank;
    let s = &spec.screening;
    let c = &spec.cross_exponents;
    let n_ins = spec.insertions.len();
    let active: Vec<bool> = s.iter().map(|&n| n > 0).collect();
    // t[i][j]: exponent of one group-i variable at insertion j.
    let t: Vec<Vec<f64>> = (0..r).map(|i| spec.insertions.iter().map(|ins| ins.pairs[i].total().re).collect()).collect();
    let mut insertion_margins = Vec::new();
    let mut infinity_margins = Vec::new();
    for i in 0..r {
        if !active[i] {
            insertion_margins.push(Vec::new());
            infinity_margins.push(f64::INFINITY);
            continue;
        }
        insertion_margins.push(t[i].iter().map(|x| x + 2.0).collect());
        let mut total: f64 = t[i].iter().sum();
        for k in 0..r {
            let others = s[k] as f64 - if k == i { 1.0 } else { 0.0 };
            total += others * c[i][k];
        }
        infinity_margins.push(-total - 2.0);
    }
    let mut collision_margins = Vec::new();
    for i in 0..r {
        for k in i..r {
            let possible = if i == k { s[i] >= 2 } else { active[i] && active[k] };
            if possible && c[i][k] < 0.0 {
                collision_margins.push(((i, k), 2.0 + 2.0 * c[i][k]));
            }
        }
    }

    let mut shared_insertion_margins = insertion_margins.clone();
    let mut shared_infinity_margins = infinity_margins.clone();
    let mut clusters = Vec::new();
    let n_vectors = s.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n + 1));
    if n_vectors.is_some_and(|v| v <= MAX_CLUSTER_SCAN) {
        let mut counts = vec![0usize; r];
        'scan: loop {
            let mut i = 0;
            loop {
                if i == r {
                    break 'scan;
                }
                if counts[i] < s[i] {
                    counts[i] += 1;
                    break;
                }
                counts[i] = 0;
                i += 1;
            }
            let size: usize = counts.iter().sum();
            if size < 2 {
                continue;
            }
            let nf = |i: usize| counts[i] as f64;
            let mut pair_sum = 0.0;
            let mut to_rest = 0.0;
            for i in 0..r {
                for k in 0..r {
                    if i < k {
                        pair_sum += nf(i) * nf(k) * c[i][k];
                    }
                    let rest = s[k] as f64 - nf(k);
                    to_rest += nf(i) * rest * c[i][k];
                }
                pair_sum += 0.5 * nf(i) * (nf(i) - 1.0) * c[i][i];
            }
            let m = size as f64;
            let record = |cluster: Cluster, margin: f64, clusters: &mut Vec<ClusterMargin>| {
                clusters.push(ClusterMargin { counts: counts.clone(), cluster, margin });
            };
            for j in 0..n_ins {
                let e: f64 = (0..r).map(|i| nf(i) * t[i][j]).sum::<f64>() + pair_sum;
                let margin = e + 2.0 * m;
                record(Cluster::Insertion(j), margin, &mut clusters);
                for i in (0..r).filter(|&i| counts[i] > 0) {
                    let x = &mut shared_insertion_margins[i][j];
                    *x = x.min(margin / m);
                }
            }
            if pair_sum < 0.0 {
                record(Cluster::Collision, 2.0 * (pair_sum + m - 1.0), &mut clusters);
            }
            let e: f64 = (0..r).map(|i| nf(i) * t[i].iter().sum::<f64>()).sum::<f64>() + pair_sum + to_rest;
            let margin = -e - 2.0 * m;
            record(Cluster::Infinity, margin, &mut clusters);
            for i in (0..r).filter(|&i| counts[i] > 0) {
                shared_infinity_margins[i] = shared_infinity_margins[i].min(margin / m);
            }
        }
    }

    let overall = insertion_margins.iter().flatten().all(|&m| m > 0.0)
        && collision_margins.iter().all(|(_, m)| *m > 0.0)
        && infinity_margins.iter().all(|&m| m > 0.0)
        && clusters.iter().all(|c| c.margin > 0.0);
    ConvergenceReport {
        insertion_margins,
        collision_margins,
        infinity_margins,
        clusters,
        shared_insertion_margins,
        shared_infinity_margins,
        overall,
    }
}

fn gram_cross(rs: &RootSystem, gamma: f64) -> Vec<Vec<f64>> {
    (0..rs.rank).map(|i| (0..rs.rank).map(|k| gamma * gamma * rs.gram[(i, k)]).collect()).collect()
}

/// The three-point integral with alpha_1 at 0, alpha_2 at 1 and alpha_3 at
/// infinity, in raw Lebesgue measure.  Factors are written as (x - z)^{A|A'};
/// the (1 - x) convention differs by prod_i (-1)^{s_i (A_i2 - A'_i2)}.
pub fn build_df_3pt(rs: &RootSystem, cfg: &ChargeConfig) -> Result<DFIntegralSpec, DfError> {
    let screening = rs.solve_screening(cfg.gamma, &cfg.alphas)?;
    let g = cfg.gamma;
    let pair = |j: usize, i: usize| -> Result<ExponentPair, DfError> {
        let e = rs.simple_root(i);
        let a = g / 2.0 * rs.inner(&e, &(&cfg.alphas[j] + &cfg.ms[j]));
        let ab = g / 2.0 * rs.inner(&e, &(&cfg.alphas[j] - &cfg.ms[j]));
        Ok(ExponentPair::real(a, ab)?)
    };
    let mut insertions = Vec::new();
    for (j, z) in [(0usize, 0.0), (1, 1.0)] {
        let pairs = (0..rs.rank).map(|i| pair(j, i)).collect::<Result<Vec<_>, _>>()?;
        insertions.push(Insertion { location: Complex64::new(z, 0.0), pairs });
    }
    DFIntegralSpec::new(
        screening.iter().map(|&s| s as usize).collect(),
        insertions,
        gram_cross(rs, g),
        Normalization::Raw,
    )
}

/// Electric n-point integral with diagonal pairs gamma <e_i, alpha_j>/2 at
/// each location.
pub fn build_df_general_n(
    rs: &RootSystem,
    gamma: f64,
    alphas: &[CartanVector],
    locations: &[Complex64],
) -> Result<DFIntegralSpec, DfError> {
    if alphas.len() != locations.len() {
        return Err(DfError::Malformed("one location per charge".into()));
    }
    let screening = rs.solve_screening(gamma, alphas)?;
    let insertions = alphas
        .iter()
        .zip(locations)
        .map(|(a, &z)| Insertion {
            location: z,
            pairs: (0..rs.rank).map(|i| ExponentPair::diagonal_real(gamma / 2.0 * rs.inner(&rs.simple_root(i), a))).collect(),
        })
        .collect();
    DFIntegralSpec::new(
        screening.iter().map(|&s| s as usize).collect(),
        insertions,
        gram_cross(rs, gamma),
        Normalization::Raw,
    )
}

/// Like [`build_df_general_n`] but refusing nonzero magnetic charges.
pub fn build_df_general_n_magnetic(
    rs: &RootSystem,
    gamma: f64,
    alphas: &[CartanVector],
    ms: &[CartanVector],
    locations: &[Complex64],
) -> Result<DFIntegralSpec, DfError> {
    if ms.iter().any(|m| m.coords.iter().any(|c| *c != 0.0)) {
        return Err(DfError::Unsupported("magnetic charges need the three-point primitive".into()));
    }
    build_df_general_n(rs, gamma, alphas, locations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_power_examples() {
        let p = ExponentPair::real(1.0, 0.0).unwrap();
        assert!((complex_power(c(-1.0, 0.0), p).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        let zero = ExponentPair::real(0.0, 0.0).unwrap();
        assert_eq!(complex_power(c(0.3, -2.0), zero).unwrap(), c(1.0, 0.0));
        assert_eq!(complex_power(c(0.0, 0.0), zero).unwrap(), c(1.0, 0.0));
        let p = ExponentPair::real(1.5, 0.5).unwrap();
        assert!((complex_power(c(2.0, 0.0), p).unwrap() - c(4.0, 0.0)).norm() < 1e-14);
        assert_eq!(complex_power(c(0.0, 0.0), ExponentPair::real(-0.3, -0.3).unwrap()), None);
        assert_eq!(complex_power(c(0.0, 0.0), ExponentPair::real(0.3, 0.3).unwrap()), Some(c(0.0, 0.0)));
    }

    #[test]
    fn vandermonde_examples() {
        let p = ExponentPair::real(1.0, 1.0).unwrap();
        assert_eq!(vandermonde_power(&[c(0.5, 0.5)], p).unwrap(), c(1.0, 0.0));
        assert!((vandermonde_power(&[c(0.0, 0.0), c(1.0, 0.0)], p).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let three = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        assert!((vandermonde_power(&three, p).unwrap() - c(4.0, 0.0)).norm() < 1e-13);
        assert_eq!(vandermonde_power(&[c(1.0, 0.0), c(1.0, 0.0)], ExponentPair::real(-0.5, -0.5).unwrap()), None);
    }

    #[test]
    fn magnetic_primitive_boundary_values() {
        let m1 = CartanVector::new(vec![1.0, -2.0]);
        let m3 = CartanVector::new(vec![0.5, 3.0]);
        let (z1, z2, z3) = (-1.0, 0.5, 2.0);
        let beyond = magnetic_primitive_3pt(c(z3 + 1.0, 0.0), z1, z2, z3, &m1, &m3);
        assert!(beyond.coords.iter().all(|x| x.abs() < 1e-15));
        let at2 = magnetic_primitive_3pt(c(z2 - 1e-9, 0.0), z1, z2, z3, &m1, &m3);
        let at3 = magnetic_primitive_3pt(c(z3 - 1e-9, 0.0), z1, z2, z3, &m1, &m3);
        for i in 0..2 {
            assert!((at2.coords[i] - PI * m1.coords[i]).abs() < 1e-6);
            assert!((at3.coords[i] + PI * m3.coords[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn magnetic_primitive_jumps() {
        let m1 = CartanVector::new(vec![1.0]);
        let m2 = CartanVector::new(vec![0.25]);
        let m3 = &(-&m1) - &m2;
        let (z1, z2, z3) = (0.0, 1.0, 3.0);
        let eps = 1e-12;
        let jump = |x: f64| {
            let below = magnetic_primitive_3pt(c(x, -eps), z1, z2, z3, &m1, &m3).coords[0];
            let above = magnetic_primitive_3pt(c(x, eps), z1, z2, z3, &m1, &m3).coords[0];
            below - above
        };
        assert!((jump(0.4) - 2.0 * PI * m1.coords[0]).abs() < 1e-9);
        assert!((jump(2.2) - 2.0 * PI * (m1.coords[0] + m2.coords[0])).abs() < 1e-9);
        assert!(jump(-0.5).abs() < 1e-9);
    }

    fn rank_one_config(gamma: f64, alpha2: f64, m2: f64) -> (RootSystem, ChargeConfig) {
        let rs = RootSystem::type_a(1).unwrap();
        let cfg = ChargeConfig::semidegenerate(
            &rs,
            gamma,
            0.3,
            CartanVector::new(vec![alpha2]),
            CartanVector::new(vec![m2]),
            &[1],
            vec![1.0],
        )
        .unwrap();
        (rs, cfg)
    }

    #[test]
    fn build_3pt_pairs() {
        let (rs, cfg) = rank_one_config(0.6, 0.1, 0.0);
        let spec = build_df_3pt(&rs, &cfg).unwrap();
        assert!(spec.insertions.iter().all(|i| i.pairs.iter().all(|p| p.a == p.a_bar)));
        // alpha_1 = kappa omega_1 with <e_1, alpha_1> = kappa.
        let rs = RootSystem::type_a(1).unwrap();
        let zero = CartanVector::zero(1);
        let alpha1 = rs.fund_weights[0].scale(0.5);
        let q = rs.background_charge(0.6).unwrap();
        let alpha3 = &(&q.scale(2.0) - &alpha1) - &rs.simple_root(0).scale(0.6);
        let cfg = ChargeConfig::new(&rs, 0.6, vec![1.0], [alpha1, zero.clone(), alpha3], [zero.clone(), zero.clone(), zero]).unwrap();
        let spec = build_df_3pt(&rs, &cfg).unwrap();
        assert!((spec.insertions[0].pairs[0].a.re - 0.15).abs() < 1e-14);
        assert_eq!(spec.same_group_exponent(0), 2.0 * 0.36);
        assert_eq!(spec.normalization, Normalization::Raw);
    }

    #[test]
    fn lattice_magnetic_charges_give_integer_spins() {
        let rs = RootSystem::type_a(3).unwrap();
        let gamma = 0.65;
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 7) as f64 - 3.0
        };
        for _ in 0..50 {
            let coeffs: Vec<f64> = (0..3).map(|_| next()).collect();
            let m2 = rs
                .fund_coweights
                .iter()
                .zip(&coeffs)
                .fold(CartanVector::zero(3), |acc, (w, k)| &acc + &w.scale(k / gamma));
            let cfg = ChargeConfig::semidegenerate(&rs, gamma, 0.4, CartanVector::new(vec![0.1, -0.2, 0.05]), m2, &[1, 1, 2], vec![1.0; 3]).unwrap();
            let spec = build_df_3pt(&rs, &cfg).unwrap();
            for (i, p) in spec.insertions[1].pairs.iter().enumerate() {
                assert!(((p.a - p.a_bar).re - coeffs[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn general_n_examples() {
        let rs = RootSystem::type_a(1).unwrap();
        let gamma = 0.7;
        let q = rs.background_charge(gamma).unwrap();
        let a = CartanVector::new(vec![0.2]);
        let spec = build_df_general_n(&rs, gamma, &[a.clone(), &q.scale(2.0) - &a], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(spec.n_variables(), 0);

        let rs = RootSystem::type_a(2).unwrap();
        let q = rs.background_charge(gamma).unwrap();
        let a1 = CartanVector::new(vec![0.1, 0.3]);
        let a2 = CartanVector::new(vec![-0.2, 0.1]);
        let a3 = CartanVector::new(vec![0.05, 0.05]);
        let a4 = &(&(&(&q.scale(2.0) - &a1) - &a2) - &a3) - &CartanVector::new(vec![gamma, 2.0 * gamma]);
        let locs = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 2.0), c(-1.0, -1.0)];
        let spec = build_df_general_n(&rs, gamma, &[a1, a2, a3, a4], &locs).unwrap();
        assert_eq!(spec.screening, vec![1, 2]);
        for i in 0..2 {
            for k in 0..2 {
                assert_eq!(spec.cross_exponents[i][k], spec.cross_exponents[k][i]);
            }
        }
        let zero = CartanVector::zero(2);
        let m = CartanVector::new(vec![1.0, 0.0]);
        assert!(build_df_general_n_magnetic(&rs, gamma, &[zero.clone(), zero.clone()], &[m, zero], &locs[..2]).is_err());
    }

    #[test]
    fn general_n_approaches_three_point_as_third_point_recedes() {
        let (rs, cfg) = rank_one_config(0.7, 0.2, 0.0);
        let spec3 = build_df_3pt(&rs, &cfg).unwrap();
        let big = 1e3;
        let specn = build_df_general_n(&rs, cfg.gamma, &cfg.alphas, &[c(0.0, 0.0), c(1.0, 0.0), c(big, 0.0)]).unwrap();
        let a3 = specn.insertions[2].pairs[0].total().re;
        let (f3, fnn) = (Integrand::new(&spec3), Integrand::new(&specn));
        for x in [c(0.3, 0.2), c(-1.5, 0.7), c(2.0, -3.0)] {
            let stripped = fnn.eval(&[x]).unwrap() / big.powf(a3);
            let reference = f3.eval(&[x]).unwrap();
            assert!(((stripped - reference) / reference).norm() < 1e-2);
        }
    }

    #[test]
    fn convergence_examples() {
        let gamma: f64 = 0.8;
        let rs = RootSystem::type_a(2).unwrap();
        let cfg = ChargeConfig::semidegenerate(&rs, gamma, 0.3, CartanVector::new(vec![0.1, 0.1]), CartanVector::zero(2), &[1, 1], vec![1.0; 2]).unwrap();
        let spec = build_df_3pt(&rs, &cfg).unwrap();
        let report = check_convergence(&spec);
        assert_eq!(report.collision_margins.len(), 1);
        assert!((report.collision_margins[0].1 - (2.0 - 2.0 * gamma * gamma)).abs() < 1e-12);

        let boundary = DFIntegralSpec::new(
            vec![1],
            vec![Insertion { location: c(0.0, 0.0), pairs: vec![ExponentPair::real(-1.0, -1.0).unwrap()] }],
            vec![vec![0.0]],
            Normalization::Raw,
        )
        .unwrap();
        let report = check_convergence(&boundary);
        assert_eq!(report.insertion_margins[0][0], 0.0);
        assert!(!report.overall);

        let twin = DFIntegralSpec::new(
            vec![1],
            vec![
                Insertion { location: c(0.0, 0.0), pairs: vec![ExponentPair::real(-0.6, -0.6).unwrap()] },
                Insertion { location: c(1.0, 0.0), pairs: vec![ExponentPair::real(-0.6, -0.6).unwrap()] },
            ],
            vec![vec![2.0]],
            Normalization::Nu,
        )
        .unwrap();
        assert!(check_convergence(&twin).overall);
    }

    #[test]
    fn joint_escape_is_caught() {
        // Each variable alone decays fast enough at infinity, the pair does not.
        let d = |x: f64| ExponentPair::diagonal_real(x);
        let spec = DFIntegralSpec::new(
            vec![1, 1],
            vec![
                Insertion { location: c(0.0, 0.0), pairs: vec![d(0.0), d(-0.4)] },
                Insertion { location: c(1.0, 0.0), pairs: vec![d(-0.84), d(-0.4)] },
            ],
            vec![vec![1.28, -0.64], vec![-0.64, 1.28]],
            Normalization::Raw,
        )
        .unwrap();
        let report = check_convergence(&spec);
        assert!(report.infinity_margins.iter().all(|&m| m > 0.0));
        assert!(report.insertion_margins.iter().flatten().all(|&m| m > 0.0));
        let joint = report.clusters.iter().find(|c| c.cluster == Cluster::Infinity).unwrap();
        assert!((joint.margin + 0.08).abs() < 1e-12, "{joint:?}");
        assert!(!report.overall);
        // Each variable carries its share of the joint margin.
        assert!((report.shared_infinity_margins[0] + 0.04).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let (rs, cfg) = rank_one_config(0.7, 0.2, 1.0 / 0.7);
        let spec = build_df_3pt(&rs, &cfg).unwrap();
        let text = spec.to_json().render();
        let back = DFIntegralSpec::from_json(&text).unwrap();
        assert_eq!(back, spec);
        assert!(DFIntegralSpec::from_json(r#"{"rank":1}"#).is_err());
    }

    proptest! {
        #[test]
        fn power_is_additive_in_the_pair(
            zr in -3.0f64..3.0, zi in -3.0f64..3.0,
            a in -1.5f64..1.5, n in -3i64..=3, b in -1.5f64..1.5, m in -3i64..=3,
        ) {
            let z = c(zr, zi);
            prop_assume!(z.norm() > 1e-3);
            let p = ExponentPair::real(a, a - n as f64).unwrap();
            let q = ExponentPair::real(b, b - m as f64).unwrap();
            let lhs = complex_power(z, p).unwrap() * complex_power(z, q).unwrap();
            let rhs = complex_power(z, p + q).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1e-300));
        }

        #[test]
        fn conjugation_and_swap(
            zr in -3.0f64..3.0, zi in -3.0f64..3.0, a in -1.5f64..1.5, n in -3i64..=3,
        ) {
            let z = c(zr, zi);
            prop_assume!(z.norm() > 1e-3 && zi != 0.0);
            let p = ExponentPair::real(a, a - n as f64).unwrap();
            let w = complex_power(z, p).unwrap();
            let conj = complex_power(z.conj(), p).unwrap();
            let swap = complex_power(z.conj(), p.swapped()).unwrap();
            prop_assert!((conj - w.conj()).norm() <= 1e-12 * w.norm().max(1e-300));
            prop_assert!((swap - w).norm() <= 1e-12 * w.norm().max(1e-300));
        }

        #[test]
        fn electric_integrand_is_nonnegative(
            pts in proptest::collection::vec((-4.0f64..4.0, -4.0f64..4.0), 3),
        ) {
            let rs = RootSystem::type_a(2).unwrap();
            let cfg = ChargeConfig::semidegenerate(&rs, 0.7, 0.4, CartanVector::new(vec![0.1, -0.1]), CartanVector::zero(2), &[1, 2], vec![1.0; 2]).unwrap();
            let f = Integrand::new(&build_df_3pt(&rs, &cfg).unwrap());
            let xs: Vec<Complex64> = pts.iter().map(|&(x, y)| c(x, y)).collect();
            let v = f.eval(&xs).unwrap();
            prop_assert!(v.re >= 0.0 && v.im.abs() <= 1e-12 * v.re.max(1e-300));
        }
    }
}
