//! k-nomial exponential families in moment coordinates.
//!
//! A family over an alphabet of `k` symbols is parametrized by the `d = k-1`
//! cell probabilities `z_1..z_d` of symbols `1..k-1`; symbol `0` carries the
//! remainder `1 - sum(z)`. The parameter domain keeps every cell probability
//! at least `eps_bd` away from zero so that all relative entropies stay
//! finite and the Fisher information stays bounded. Natural (log-odds)
//! parameters are available through an explicit conversion; moment
//! coordinates are the canonical ones because they keep domains, lattices,
//! and maximum-likelihood estimates affine.

use crate::error::{Error, Result};
use crate::numerics::NeumaierSum;
use crate::typespace::TypeIndex;

/// Slack used when testing domain membership, so that points produced by
/// clamping or lattice construction are not rejected over float dust.
const DOMAIN_TOL: f64 = 1e-9;

/// A point in moment coordinates (`d` cell probabilities).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    pub coords: Vec<f64>,
}

impl ParamPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    /// One-dimensional point, the common case for binary families.
    pub fn scalar(z: f64) -> Self {
        Self { coords: vec![z] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for ParamPoint {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

/// Symmetric positive-definite Fisher information matrix, row-major `d x d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl FisherMatrix {
    pub fn from_rows(dim: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// `v^T J v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.dim);
        let mut s = NeumaierSum::new();
        for i in 0..self.dim {
            for j in 0..self.dim {
                s.add(self.get(i, j) * v[i] * v[j]);
            }
        }
        s.total()
    }

    /// Largest absolute entry, used in coding-error bounds.
    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    /// Sum of `|J_ij|` over the lower triangle including the diagonal.
    pub fn lower_triangle_abs_sum(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                s += self.get(i, j).abs();
            }
        }
        s
    }

    /// Determinant (supported for d <= 2, which covers k <= 3).
    pub fn det(&self) -> Result<f64> {
        match self.dim {
            1 => Ok(self.get(0, 0)),
            2 => Ok(self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0)),
            d => Err(Error::Unsupported(format!(
                "determinant not implemented for dimension {d}"
            ))),
        }
    }

    /// Principal square root (d <= 2).
    pub fn sqrt(&self) -> Result<FisherMatrix> {
        match self.dim {
            1 => Ok(FisherMatrix::from_rows(1, vec![self.get(0, 0).sqrt()])),
            2 => {
                // closed form for symmetric positive definite 2x2
                let (a, b, c) = (self.get(0, 0), self.get(0, 1), self.get(1, 1));
                let det = (a * c - b * b).sqrt();
                let trace_term = (a + c + 2.0 * det).sqrt();
                Ok(FisherMatrix::from_rows(
                    2,
                    vec![
                        (a + det) / trace_term,
                        b / trace_term,
                        b / trace_term,
                        (c + det) / trace_term,
                    ],
                ))
            }
            d => Err(Error::Unsupported(format!(
                "matrix square root not implemented for dimension {d}"
            ))),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }
}

/// A k-nomial family with domain margin `eps_bd`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Family {
    k: usize,
    eps_bd: f64,
}

impl Family {
    /// Build a family on `k` symbols with domain margin `eps_bd`.
    ///
    /// Requires `k >= 2`, `eps_bd > 0`, and `k * eps_bd < 1` so the domain is
    /// a box-with-simplex-cap of positive volume.
    pub fn new(k: usize, eps_bd: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidConfig(format!("alphabet size {k} < 2")));
        }
        if !(eps_bd > 0.0) || k as f64 * eps_bd >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "domain margin {eps_bd} must satisfy 0 < {k} * eps_bd < 1"
            )));
        }
        Ok(Self { k, eps_bd })
    }

    /// Binary family with the default margin 0.02.
    pub fn bernoulli() -> Self {
        Self { k: 2, eps_bd: 0.02 }
    }

    /// Three-symbol family with the default margin 0.02; exercises d > 1.
    pub fn trinomial() -> Self {
        Self { k: 3, eps_bd: 0.02 }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Parameter dimension `d = k - 1`.
    pub fn dim(&self) -> usize {
        self.k - 1
    }

    pub fn eps_bd(&self) -> f64 {
        self.eps_bd
    }

    /// Remainder probability of symbol 0.
    fn remainder(&self, z: &[f64]) -> f64 {
        let mut s = NeumaierSum::new();
        s.add(1.0);
        for &zi in z {
            s.add(-zi);
        }
        s.total()
    }

    /// Whether the point lies in the domain (up to float slack).
    pub fn contains(&self, z: &ParamPoint) -> bool {
        if z.dim() != self.dim() {
            return false;
        }
        let zs = z.as_slice();
        zs.iter().all(|&zi| zi >= self.eps_bd - DOMAIN_TOL)
            && self.remainder(zs) >= self.eps_bd - DOMAIN_TOL
    }

    fn check_domain(&self, z: &ParamPoint) -> Result<()> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has dimension {}, family has {}",
                z.dim(),
                self.dim()
            )));
        }
        if !self.contains(z) {
            return Err(Error::OutsideDomain(format!(
                "{:?} with margin {}",
                z.coords, self.eps_bd
            )));
        }
        Ok(())
    }

    /// Probability mass function as a length-k vector `(p_0, .., p_{k-1})`.
    pub fn pmf(&self, z: &ParamPoint) -> Result<Vec<f64>> {
        self.check_domain(z)?;
        let mut p = Vec::with_capacity(self.k);
        p.push(self.remainder(z.as_slice()));
        p.extend_from_slice(z.as_slice());
        Ok(p)
    }

    /// Log-probabilities, used by everything that works in log domain.
    pub fn log_pmf(&self, z: &ParamPoint) -> Result<Vec<f64>> {
        Ok(self.pmf(z)?.into_iter().map(f64::ln).collect())
    }

    /// Single-letter relative entropy `D(P_z || P_z2)` in nats.
    ///
    /// The n-sample value is `n` times this by additivity over independent
    /// coordinates.
    pub fn kl(&self, z: &ParamPoint, z2: &ParamPoint) -> Result<f64> {
        let p = self.pmf(z)?;
        let q = self.pmf(z2)?;
        let mut s = NeumaierSum::new();
        for (pi, qi) in p.iter().zip(&q) {
            s.add(pi * (pi.ln() - qi.ln()));
        }
        Ok(s.total().max(0.0))
    }

    /// Fisher information matrix in moment coordinates:
    /// `J_ij = delta_ij / z_i + 1 / p_0`.
    ///
    /// Finite whenever every cell probability is strictly positive; the
    /// genuine singularity sits on the probability-simplex boundary.
    pub fn fisher(&self, z: &ParamPoint) -> Result<FisherMatrix> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has dimension {}, family has {}",
                z.dim(),
                self.dim()
            )));
        }
        let zs = z.as_slice();
        let p0 = self.remainder(zs);
        if p0 <= 0.0 || zs.iter().any(|&zi| zi <= 0.0) {
            return Err(Error::BoundarySingularity(format!("{:?}", z.coords)));
        }
        self.check_domain(z)?;
        let d = self.dim();
        let mut entries = vec![1.0 / p0; d * d];
        for i in 0..d {
            entries[i * d + i] += 1.0 / zs[i];
        }
        Ok(FisherMatrix::from_rows(d, entries))
    }

    /// Clamp raw moment coordinates into the domain.
    ///
    /// Coordinates are first clamped into `[eps_bd, 1 - eps_bd]`; if the
    /// simplex margin is then violated (possible only for k >= 3), the excess
    /// above the floor is rescaled so the remainder lands exactly on the
    /// margin. The rescaling preserves the coordinatewise floor.
    pub fn clamp(&self, raw: &[f64]) -> ParamPoint {
        assert_eq!(raw.len(), self.dim());
        let e = self.eps_bd;
        let mut z: Vec<f64> = raw.iter().map(|&x| x.clamp(e, 1.0 - e)).collect();
        let s: f64 = z.iter().sum();
        if 1.0 - s < e {
            let d = self.dim() as f64;
            let lambda = (1.0 - self.k as f64 * e) / (s - d * e);
            for zi in &mut z {
                *zi = e + (*zi - e) * lambda;
            }
        }
        ParamPoint::new(z)
    }

    /// Clamped maximum-likelihood estimate from an n-type.
    pub fn mle(&self, ty: &TypeIndex) -> ParamPoint {
        assert_eq!(ty.counts.len(), self.k, "type arity must match alphabet");
        let n = ty.n() as f64;
        let raw: Vec<f64> = ty.counts[1..].iter().map(|&c| c as f64 / n).collect();
        self.clamp(&raw)
    }

    /// Residual of the quadratic (Fisher-metric) approximation of relative
    /// entropy: `kl(z, z2) - (z - z2)^T J_z (z - z2) / 2`. Third-order small
    /// in the parameter gap.
    pub fn euclid_kl_residual(&self, z: &ParamPoint, z2: &ParamPoint) -> Result<f64> {
        let kl = self.kl(z, z2)?;
        let j = self.fisher(z)?;
        let diff: Vec<f64> = z
            .as_slice()
            .iter()
            .zip(z2.as_slice())
            .map(|(a, b)| a - b)
            .collect();
        Ok(kl - 0.5 * j.quadratic_form(&diff))
    }

    /// Natural (log-odds) parameters `theta_i = ln(z_i / p_0)`.
    pub fn natural_from_moment(&self, z: &ParamPoint) -> Result<Vec<f64>> {
        self.check_domain(z)?;
        let p0 = self.remainder(z.as_slice());
        Ok(z.as_slice().iter().map(|&zi| (zi / p0).ln()).collect())
    }

    /// Inverse of [`Self::natural_from_moment`].
    pub fn moment_from_natural(&self, theta: &[f64]) -> Result<ParamPoint> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "natural parameter has dimension {}, family has {}",
                theta.len(),
                self.dim()
            )));
        }
        // softmax against the reference symbol 0
        let m = theta.iter().copied().fold(0.0f64, f64::max);
        let denom: f64 = (-m).exp() + theta.iter().map(|&t| (t - m).exp()).sum::<f64>();
        let z: Vec<f64> = theta.iter().map(|&t| (t - m).exp() / denom).collect();
        Ok(ParamPoint::new(z))
    }
}
