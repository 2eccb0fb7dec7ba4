//! Root-system arithmetic for simply-laced algebras, with type A as the
//! supported case for everything downstream.
//!
//! Vectors live in the simple-root basis and every pairing goes through the
//! Gram matrix.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use thiserror::Error;

/// Absolute tolerance for deciding that a screening coordinate is an integer.
pub const SCREENING_TOL: f64 = 1e-9;
const LATTICE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("rank must be at least 1")]
    InvalidRank,
    #[error("vector of length {got} does not match rank {rank}")]
    Dimension { rank: usize, got: usize },
    #[error("gamma must be positive, got {0}")]
    Parameter(f64),
    #[error("unsupported Cartan matrix: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Neutrality(#[from] NeutralityViolation),
    #[error("magnetic charges sum to a nonzero vector")]
    MagneticSum,
    #[error("magnetic charge {0} is not in the lattice")]
    NotInLattice(usize),
}

/// The charges do not admit nonnegative integer screening numbers, so the
/// correlation vanishes.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("neutrality violated: screening coordinates {coords:?}, residual {residual}")]
pub struct NeutralityViolation {
    /// Simple-root coordinates of (2Q - sum alpha) / gamma.
    pub coords: Vec<f64>,
    /// Largest distance of a coordinate to the nearest integer, or the most
    /// negative coordinate when the integrality test passes but the sign fails.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartanVector {
    pub coords: Vec<f64>,
}

impl CartanVector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn zero(rank: usize) -> Self {
        Self { coords: vec![0.0; rank] }
    }

    /// The simple root e_i (0-based index).
    pub fn simple_root(rank: usize, i: usize) -> Self {
        let mut v = Self::zero(rank);
        v.coords[i] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { coords: self.coords.iter().map(|x| c * x).collect() }
    }
}

impl Add for &CartanVector {
    type Output = CartanVector;
    fn add(self, rhs: &CartanVector) -> CartanVector {
        assert_eq!(self.len(), rhs.len());
        CartanVector { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CartanVector {
    type Output = CartanVector;
    fn sub(self, rhs: &CartanVector) -> CartanVector {
        assert_eq!(self.len(), rhs.len());
        CartanVector { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &CartanVector {
    type Output = CartanVector;
    fn neg(self) -> CartanVector {
        self.scale(-1.0)
    }
}

impl Mul<&CartanVector> for f64 {
    type Output = CartanVector;
    fn mul(self, rhs: &CartanVector) -> CartanVector {
        rhs.scale(self)
    }
}

/// Ordering of the weights h_1..h_{r+1} of the first fundamental
/// representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HOrdering {
    /// h_1 = omega_1, h_{k+1} = h_k + e_k.
    #[default]
    Ascending,
    /// h_1 = omega_1, h_{k+1} = h_k - e_k.
    Descending,
}

impl HOrdering {
    pub fn name(self) -> &'static str {
        match self {
            HOrdering::Ascending => "ascending",
            HOrdering::Descending => "descending",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ascending" => Some(HOrdering::Ascending),
            "descending" => Some(HOrdering::Descending),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RootSystem {
    pub rank: usize,
    pub cartan: Vec<Vec<i64>>,
    pub gram: DMatrix<f64>,
    pub fund_weights: Vec<CartanVector>,
    pub fund_coweights: Vec<CartanVector>,
    pub weyl_vector: CartanVector,
    pub dual_weyl: CartanVector,
    pub dual_coxeter: u32,
    pub positive_roots: Vec<CartanVector>,
    pub rep_weights: Vec<CartanVector>,
    type_a: bool,
}

fn type_a_cartan(rank: usize) -> Vec<Vec<i64>> {
    (0..rank)
        .map(|i| {
            (0..rank)
                .map(|j| match i.abs_diff(j) {
                    0 => 2,
                    1 => -1,
                    _ => 0,
                })
                .collect()
        })
        .collect()
}

impl RootSystem {
    pub fn type_a(rank: usize) -> Result<Self, LieError> {
        if rank == 0 {
            return Err(LieError::InvalidRank);
        }
        Self::from_cartan(type_a_cartan(rank))
    }

    /// Builds a simply-laced root system from its Cartan matrix.  Inputs that
    /// are not of type A are accepted here but refused by the identities.
    pub fn from_cartan(cartan: Vec<Vec<i64>>) -> Result<Self, LieError> {
        let rank = cartan.len();
        if rank == 0 {
            return Err(LieError::InvalidRank);
        }
        for (i, row) in cartan.iter().enumerate() {
            if row.len() != rank {
                return Err(LieError::Dimension { rank, got: row.len() });
            }
            if row[i] != 2 {
                return Err(LieError::Unsupported(format!("diagonal entry {i} is {}", row[i])));
            }
            for (j, &a) in row.iter().enumerate() {
                if a != cartan[j][i] {
                    return Err(LieError::Unsupported("only simply-laced (symmetric) Cartan matrices".into()));
                }
                if i != j && a > 0 {
                    return Err(LieError::Unsupported(format!("positive off-diagonal entry ({i},{j})")));
                }
            }
        }
        // <e_i,e_i> = 2 for simply-laced, so K = A.
        let gram = DMatrix::from_fn(rank, rank, |i, j| cartan[i][j] as f64);
        let gram_inv = gram
            .clone()
            .try_inverse()
            .ok_or_else(|| LieError::Unsupported("singular Cartan matrix".into()))?;
        if !gram.clone().cholesky().is_some() {
            return Err(LieError::Unsupported("Cartan matrix is not of finite type".into()));
        }

        // omega_i = sum_j (A^{-1})_{ij} e_j and omega_i^vee = sum_j (K^{-1})_{ij} e_j;
        // they coincide here because K = A.
        let row = |m: &DMatrix<f64>, i: usize| CartanVector::new((0..rank).map(|j| m[(i, j)]).collect());
        let fund_weights: Vec<_> = (0..rank).map(|i| row(&gram_inv, i)).collect();
        let fund_coweights = fund_weights.clone();
        let sum = |vs: &[CartanVector]| vs.iter().fold(CartanVector::zero(rank), |acc, v| &acc + v);
        let weyl_vector = sum(&fund_weights);
        let dual_weyl = sum(&fund_coweights);

        let positive_roots = enumerate_positive_roots(&cartan);
        let dual_coxeter = (2 * positive_roots.len() / rank) as u32;
        let type_a = cartan == type_a_cartan(rank);

        let mut rs = Self {
            rank,
            cartan,
            gram,
            fund_weights,
            fund_coweights,
            weyl_vector,
            dual_weyl,
            dual_coxeter,
            positive_roots,
            rep_weights: Vec::new(),
            type_a,
        };
        if type_a {
            rs.rep_weights = rs.rep_weights_with(HOrdering::default());
        }
        Ok(rs)
    }

    pub fn is_type_a(&self) -> bool {
        self.type_a
    }

    pub fn dim(&self) -> usize {
        self.rank + 2 * self.positive_roots.len()
    }

    /// h_1..h_{r+1}; empty outside type A.
    pub fn rep_weights_with(&self, ordering: HOrdering) -> Vec<CartanVector> {
        if !self.type_a {
            return Vec::new();
        }
        let sign = match ordering {
            HOrdering::Ascending => 1.0,
            HOrdering::Descending => -1.0,
        };
        let mut out = vec![self.fund_weights[0].clone()];
        for k in 0..self.rank {
            let step = CartanVector::simple_root(self.rank, k).scale(sign);
            let next = &out[k] + &step;
            out.push(next);
        }
        out
    }

    pub fn check_dim(&self, v: &CartanVector) -> Result<(), LieError> {
        if v.len() == self.rank {
            Ok(())
        } else {
            Err(LieError::Dimension { rank: self.rank, got: v.len() })
        }
    }

    pub fn try_inner(&self, v: &CartanVector, w: &CartanVector) -> Result<f64, LieError> {
        self.check_dim(v)?;
        self.check_dim(w)?;
        Ok(self.inner(v, w))
    }

    /// v^T K w.  Panics on a length mismatch; use [`Self::try_inner`] for
    /// untrusted input.
    pub fn inner(&self, v: &CartanVector, w: &CartanVector) -> f64 {
        assert!(v.len() == self.rank && w.len() == self.rank, "dimension mismatch");
        let mut s = 0.0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                s += v.coords[i] * self.gram[(i, j)] * w.coords[j];
            }
        }
        s
    }

    pub fn norm2(&self, v: &CartanVector) -> f64 {
        self.inner(v, v)
    }

    pub fn simple_root(&self, i: usize) -> CartanVector {
        CartanVector::simple_root(self.rank, i)
    }

    /// The coroot e_i^vee = 2 e_i / <e_i,e_i>.
    pub fn simple_coroot(&self, i: usize) -> CartanVector {
        self.simple_root(i).scale(2.0 / self.gram[(i, i)])
    }

    pub fn background_charge(&self, gamma: f64) -> Result<CartanVector, LieError> {
        check_gamma(gamma)?;
        Ok(&self.weyl_vector.scale(gamma) - &self.dual_weyl.scale(2.0 / gamma))
    }

    pub fn torus_volume(&self, gamma: f64) -> Result<f64, LieError> {
        check_gamma(gamma)?;
        let det = self.cartan_det();
        let lengths: f64 = (0..self.rank).map(|i| self.gram[(i, i)] / 2.0).product();
        Ok((2.0 * std::f64::consts::PI / gamma).powi(self.rank as i32) / (det * lengths).sqrt())
    }

    pub fn cartan_det(&self) -> f64 {
        DMatrix::from_fn(self.rank, self.rank, |i, j| self.cartan[i][j] as f64).determinant()
    }

    pub fn solve_screening(&self, gamma: f64, alphas: &[CartanVector]) -> Result<Vec<u32>, LieError> {
        check_gamma(gamma)?;
        let q = self.background_charge(gamma)?;
        let mut rhs = q.scale(2.0);
        for a in alphas {
            self.check_dim(a)?;
            rhs = &rhs - a;
        }
        let coords: Vec<f64> = rhs.coords.iter().map(|c| c / gamma).collect();
        let frac = coords.iter().map(|c| (c - c.round()).abs()).fold(0.0, f64::max);
        if frac > SCREENING_TOL {
            return Err(NeutralityViolation { coords, residual: frac }.into());
        }
        let most_negative = coords.iter().map(|c| c.round()).fold(0.0, f64::min);
        if most_negative < 0.0 {
            return Err(NeutralityViolation { coords, residual: most_negative }.into());
        }
        Ok(coords.iter().map(|c| c.round() as u32).collect())
    }

    pub fn conformal_weight(&self, gamma: f64, alpha: &CartanVector, m: &CartanVector) -> Result<f64, LieError> {
        let q = self.background_charge(gamma)?;
        self.check_dim(alpha)?;
        self.check_dim(m)?;
        let half = alpha.scale(0.5);
        Ok(self.inner(&half, &(&half - &q)) + self.norm2(m) / 4.0)
    }

    /// Margins <alpha - Q, e_i>; the check passes when all are positive.
    pub fn seiberg_check(&self, gamma: f64, alpha: &CartanVector) -> Result<(bool, Vec<f64>), LieError> {
        let q = self.background_charge(gamma)?;
        self.check_dim(alpha)?;
        let d = alpha - &q;
        let margins: Vec<f64> = (0..self.rank).map(|i| self.inner(&d, &self.simple_root(i))).collect();
        Ok((margins.iter().all(|&m| m > 0.0), margins))
    }

    /// m lies in gamma^{-1} times the coweight lattice.
    pub fn in_magnetic_lattice(&self, gamma: f64, m: &CartanVector) -> bool {
        (0..self.rank).all(|i| is_integer(gamma * self.inner(m, &self.simple_root(i)), LATTICE_TOL))
    }

    /// v pairs integrally with the generators omega_i^vee / gamma of the
    /// magnetic lattice.
    pub fn in_dual_lattice(&self, gamma: f64, v: &CartanVector) -> bool {
        self.fund_coweights
            .iter()
            .all(|w| is_integer(self.inner(v, w) / gamma, LATTICE_TOL))
    }
}

fn check_gamma(gamma: f64) -> Result<(), LieError> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(LieError::Parameter(gamma))
    }
}

fn is_integer(x: f64, tol: f64) -> bool {
    (x - x.round()).abs() <= tol
}

/// Positive roots of a simply-laced system, grown by height from the simple
/// roots: beta + e_i is a root exactly when <beta, e_i> = -1.
fn enumerate_positive_roots(cartan: &[Vec<i64>]) -> Vec<CartanVector> {
    let rank = cartan.len();
    let pair = |c: &[i64], i: usize| -> i64 { (0..rank).map(|j| c[j] * cartan[j][i]).sum() };
    let mut layer: Vec<Vec<i64>> = (0..rank)
        .map(|i| {
            let mut c = vec![0; rank];
            c[i] = 1;
            c
        })
        .collect();
    let mut all = layer.clone();
    while !layer.is_empty() {
        let mut next: Vec<Vec<i64>> = Vec::new();
        for beta in &layer {
            for i in 0..rank {
                if pair(beta, i) == -1 {
                    let mut c = beta.clone();
                    c[i] += 1;
                    if !next.contains(&c) {
                        next.push(c);
                    }
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all.into_iter()
        .map(|c| CartanVector::new(c.into_iter().map(|x| x as f64).collect()))
        .collect()
}

/// Electric and magnetic charges of a three-point function together with the
/// derived screening numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeConfig {
    pub gamma: f64,
    pub mu: Vec<f64>,
    pub alphas: [CartanVector; 3],
    pub ms: [CartanVector; 3],
    pub screening: Vec<u32>,
    pub background_q: CartanVector,
}

impl ChargeConfig {
    pub fn new(
        rs: &RootSystem,
        gamma: f64,
        mu: Vec<f64>,
        alphas: [CartanVector; 3],
        ms: [CartanVector; 3],
    ) -> Result<Self, LieError> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(LieError::Parameter(gamma));
        }
        if mu.len() != rs.rank {
            return Err(LieError::Dimension { rank: rs.rank, got: mu.len() });
        }
        for v in alphas.iter().chain(ms.iter()) {
            rs.check_dim(v)?;
        }
        let msum = &(&ms[0] + &ms[1]) + &ms[2];
        if msum.coords.iter().any(|c| c.abs() > LATTICE_TOL) {
            return Err(LieError::MagneticSum);
        }
        if let Some(j) = (0..3).find(|&j| !rs.in_magnetic_lattice(gamma, &ms[j])) {
            return Err(LieError::NotInLattice(j));
        }
        let screening = rs.solve_screening(gamma, &alphas)?;
        let background_q = rs.background_charge(gamma)?;
        Ok(Self { gamma, mu, alphas, ms, screening, background_q })
    }

    /// Semidegenerate charges alpha_1 = kappa omega_r, m_1 = 0, m_3 = -m_2,
    /// with alpha_3 fixed by the requested screening numbers.
    pub fn semidegenerate(
        rs: &RootSystem,
        gamma: f64,
        kappa: f64,
        alpha2: CartanVector,
        m2: CartanVector,
        screening: &[u32],
        mu: Vec<f64>,
    ) -> Result<Self, LieError> {
        rs.check_dim(&alpha2)?;
        rs.check_dim(&m2)?;
        if screening.len() != rs.rank {
            return Err(LieError::Dimension { rank: rs.rank, got: screening.len() });
        }
        let q = rs.background_charge(gamma)?;
        let alpha1 = rs.fund_weights[rs.rank - 1].scale(kappa);
        let screened = CartanVector::new(screening.iter().map(|&s| gamma * s as f64).collect());
        let alpha3 = &(&(&q.scale(2.0) - &alpha1) - &alpha2) - &screened;
        let m3 = -&m2;
        Self::new(rs, gamma, mu, [alpha1, alpha2, alpha3], [CartanVector::zero(rs.rank), m2, m3])
    }

    pub fn rank(&self) -> usize {
        self.mu.len()
    }

    pub fn n_screening(&self) -> usize {
        self.screening.iter().map(|&s| s as usize).sum()
    }

    /// kappa when alpha_1 = kappa omega_r, read off from <alpha_1, e_r>.
    pub fn kappa(&self, rs: &RootSystem) -> Option<f64> {
        let r = rs.rank;
        let kappa = rs.inner(&self.alphas[0], &rs.simple_root(r - 1));
        let expected = rs.fund_weights[r - 1].scale(kappa);
        let diff = &self.alphas[0] - &expected;
        diff.coords.iter().all(|c| c.abs() < 1e-9).then_some(kappa)
    }

    pub fn is_semidegenerate(&self, rs: &RootSystem) -> bool {
        self.kappa(rs).is_some() && self.ms[0].coords.iter().all(|c| c.abs() < 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cartan_matrices() {
        assert_eq!(RootSystem::type_a(2).unwrap().cartan, vec![vec![2, -1], vec![-1, 2]]);
        assert_eq!(RootSystem::type_a(1).unwrap().cartan, vec![vec![2]]);
        assert!(matches!(RootSystem::type_a(0), Err(LieError::InvalidRank)));
    }

    #[test]
    fn weyl_vector_norm_rank_one() {
        let rs = RootSystem::type_a(1).unwrap();
        assert!(close(rs.norm2(&rs.weyl_vector), 0.5, 1e-15));
    }

    #[test]
    fn inner_products_a2() {
        let rs = RootSystem::type_a(2).unwrap();
        let (e1, e2) = (rs.simple_root(0), rs.simple_root(1));
        assert_eq!(rs.inner(&e1, &e1), 2.0);
        assert_eq!(rs.inner(&e1, &e2), -1.0);
        assert_eq!(rs.inner(&e1, &CartanVector::zero(2)), 0.0);
        assert!(rs.try_inner(&e1, &CartanVector::zero(3)).is_err());
    }

    #[test]
    fn background_charge_examples() {
        let rs = RootSystem::type_a(1).unwrap();
        let q = rs.background_charge(0.8).unwrap();
        assert!(close(q.coords[0], -0.85, 1e-15));
        let q = rs.background_charge(2f64.sqrt()).unwrap();
        assert!(q.coords[0].abs() < 1e-15);
        assert!(rs.background_charge(0.0).is_err());
        for r in 1..=5 {
            let rs = RootSystem::type_a(r).unwrap();
            let gamma = 0.63;
            let q = rs.background_charge(gamma).unwrap();
            for i in 0..r {
                assert!(close(rs.inner(&q, &rs.simple_root(i)), gamma - 2.0 / gamma, 1e-13));
            }
        }
    }

    #[test]
    fn torus_volume_examples() {
        use std::f64::consts::PI;
        let rs1 = RootSystem::type_a(1).unwrap();
        assert!(close(rs1.torus_volume(1.0).unwrap(), 2.0 * PI / 2f64.sqrt(), 1e-13));
        let rs2 = RootSystem::type_a(2).unwrap();
        assert!(close(rs2.torus_volume(1.0).unwrap(), 4.0 * PI * PI / 3f64.sqrt(), 1e-12));
        let v1 = rs2.torus_volume(1.0).unwrap();
        assert!(close(rs2.torus_volume(0.4).unwrap(), v1 / 0.16, 1e-10));
    }

    #[test]
    fn screening_examples() {
        let rs = RootSystem::type_a(1).unwrap();
        let gamma = 0.7;
        let q = rs.background_charge(gamma).unwrap();
        let target = &q.scale(2.0) - &rs.simple_root(0).scale(gamma);
        let a = target.scale(1.0 / 3.0);
        assert_eq!(rs.solve_screening(gamma, &[a.clone(), a.clone(), a]).unwrap(), vec![1]);

        let rs = RootSystem::type_a(3).unwrap();
        let q = rs.background_charge(gamma).unwrap();
        let zero = CartanVector::zero(3);
        assert_eq!(rs.solve_screening(gamma, &[q.clone(), q.clone(), zero.clone()]).unwrap(), vec![0, 0, 0]);
        let shifted = &q - &rs.simple_root(0).scale(0.5 * gamma);
        match rs.solve_screening(gamma, &[q.clone(), shifted, zero]) {
            Err(LieError::Neutrality(v)) => assert!(close(v.residual, 0.5, 1e-12)),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn conformal_weight_examples() {
        let rs = RootSystem::type_a(2).unwrap();
        let gamma = 0.55;
        let zero = CartanVector::zero(2);
        assert_eq!(rs.conformal_weight(gamma, &zero, &zero).unwrap(), 0.0);
        let a = rs.simple_root(1).scale(gamma);
        assert!(close(rs.conformal_weight(gamma, &a, &zero).unwrap(), 1.0, 1e-13));
        let q = rs.background_charge(gamma).unwrap();
        assert!(close(rs.conformal_weight(gamma, &q, &zero).unwrap(), -rs.norm2(&q) / 4.0, 1e-13));
    }

    #[test]
    fn seiberg_examples() {
        let rs = RootSystem::type_a(3).unwrap();
        let gamma = 0.8;
        let q = rs.background_charge(gamma).unwrap();
        assert!(rs.seiberg_check(gamma, &(&q + &rs.weyl_vector)).unwrap().0);
        assert!(!rs.seiberg_check(gamma, &q).unwrap().0);
        let (ok, margins) = rs.seiberg_check(gamma, &(&q - &rs.simple_root(0))).unwrap();
        assert!(!ok);
        assert!(close(margins[0], -2.0, 1e-13));
    }

    #[test]
    fn positive_roots_of_d4_and_e6() {
        let d4 = vec![vec![2, -1, 0, 0], vec![-1, 2, -1, -1], vec![0, -1, 2, 0], vec![0, -1, 0, 2]];
        let rs = RootSystem::from_cartan(d4).unwrap();
        assert_eq!(rs.positive_roots.len(), 12);
        assert_eq!(rs.dual_coxeter, 6);
        assert!(!rs.is_type_a());
        assert!(rs.rep_weights.is_empty());
        let mut e6 = type_a_cartan(5);
        for row in e6.iter_mut() {
            row.push(0);
        }
        e6.push(vec![0, 0, -1, 0, 0, 2]);
        e6[2][5] = -1;
        let rs = RootSystem::from_cartan(e6).unwrap();
        assert_eq!(rs.positive_roots.len(), 36);
        assert_eq!(rs.dual_coxeter, 12);
        let b2 = vec![vec![2, -2], vec![-1, 2]];
        assert!(matches!(RootSystem::from_cartan(b2), Err(LieError::Unsupported(_))));
    }

    #[test]
    fn rep_weight_orderings() {
        let rs = RootSystem::type_a(3).unwrap();
        for ord in [HOrdering::Ascending, HOrdering::Descending] {
            let h = rs.rep_weights_with(ord);
            assert_eq!(h.len(), 4);
            for k in 0..3 {
                let step = &h[k + 1] - &h[k];
                let nonzero: Vec<_> = step.coords.iter().filter(|c| c.abs() > 0.5).collect();
                assert_eq!(nonzero.len(), 1);
            }
        }
        // The descending set is a weight system: it sums to zero.
        let h = rs.rep_weights_with(HOrdering::Descending);
        let total = h.iter().fold(CartanVector::zero(3), |a, v| &a + v);
        assert!(total.coords.iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn q_dual_lattice_gate() {
        let rs = RootSystem::type_a(2).unwrap();
        assert!(rs.in_dual_lattice(1.0, &rs.simple_root(0)));
        let q = rs.background_charge(2f64.sqrt()).unwrap();
        assert!(rs.in_dual_lattice(2f64.sqrt(), &q));
        let q = rs.background_charge(0.7).unwrap();
        assert!(!rs.in_dual_lattice(0.7, &q));
    }

    proptest! {
        #[test]
        fn screening_round_trip(
            r in 1usize..=4,
            gamma in 0.2f64..0.99,
            s in proptest::collection::vec(0u32..4, 4),
            a1 in proptest::collection::vec(-2.0f64..2.0, 4),
            a2 in proptest::collection::vec(-2.0f64..2.0, 4),
        ) {
            let rs = RootSystem::type_a(r).unwrap();
            let q = rs.background_charge(gamma).unwrap();
            let s = &s[..r];
            let alpha1 = CartanVector::new(a1[..r].to_vec());
            let alpha2 = CartanVector::new(a2[..r].to_vec());
            let screened = CartanVector::new(s.iter().map(|&x| gamma * x as f64).collect());
            let alpha3 = &(&(&q.scale(2.0) - &alpha1) - &alpha2) - &screened;
            prop_assert_eq!(rs.solve_screening(gamma, &[alpha1, alpha2, alpha3]).unwrap(), s.to_vec());
        }
    }
}
