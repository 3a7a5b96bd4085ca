//! The Power Spherical distribution on S^{d-1}.
//!
//! Density p(x) = N^{-1} (1 + mu^T x)^kappa with
//! N = 2^{alpha+beta} pi^beta Gamma(alpha) / Gamma(alpha+beta),
//! alpha = (d-1)/2 + kappa, beta = (d-1)/2.
//!
//! Sampling is rejection-free: draw the dot product t through the Beta
//! marginal, a tangent direction v uniformly on the subsphere, assemble
//! y = [t; v sqrt(1-t^2)], and map e_1 onto mu with a Householder
//! reflection. The log density only ever evaluates `kappa * log1p(mu^T x)`,
//! which is what keeps the high-kappa / high-d regime finite.

use crate::error::{Error, Result};
use crate::marginal::MarginalT;
use crate::specfun;
use crate::vmf::VonMisesFisher;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Tolerance on | ||x|| - 1 | for validated unit vectors.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Guard for dense covariance materialization.
const DENSE_COVARIANCE_MAX_DIM: usize = 10_000;

/// A unit vector in R^d, d >= 2.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Validates finiteness, d >= 2, and unit norm within 1e-12.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain(format!(
                "direction needs dimension >= 2, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("direction has non-finite entries".into()));
        }
        let norm = norm2(&values).sqrt();
        let excess = (norm - 1.0).abs();
        if excess > UNIT_NORM_TOL {
            return Err(Error::NotUnitNorm {
                excess,
                tol: UNIT_NORM_TOL,
            });
        }
        Ok(Self(values))
    }

    /// Normalizes an arbitrary non-zero vector onto the sphere.
    pub fn normalized(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain(format!(
                "direction needs dimension >= 2, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("direction has non-finite entries".into()));
        }
        let norm = norm2(&values).sqrt();
        if norm == 0.0 {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        for v in &mut values {
            *v /= norm;
        }
        Ok(Self(values))
    }

    /// The canonical axis e_1 in dimension `dim`.
    pub fn canonical(dim: usize) -> Self {
        assert!(dim >= 2);
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        Self(v)
    }

    /// Caller guarantees unit norm (sampler output is unit up to rounding
    /// that accumulates past the strict 1e-12 constructor tolerance in very
    /// high dimension).
    pub(crate) fn from_unit_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Direction {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn norm2(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum()
}

/// One draw from the distribution, with the dot product it was built from.
#[derive(Clone, Debug)]
pub struct SphericalSample {
    pub x: Direction,
    /// mu^T x as constructed (equals the recomputed dot up to ~1e-10).
    pub t: f64,
    /// d(mu^T x)/dkappa = 2 dz/dkappa, when gradients were requested.
    pub dot_grad_kappa: Option<f64>,
}

/// var(X) = coeff_mu * mu mu^T + coeff_id * I_d, stored matrix-free.
#[derive(Clone, Debug)]
pub struct CovarianceStructure {
    coeff_mu: f64,
    coeff_id: f64,
    mu: Direction,
}

impl CovarianceStructure {
    pub fn coeff_mu(&self) -> f64 {
        self.coeff_mu
    }

    pub fn coeff_id(&self) -> f64 {
        self.coeff_id
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    /// var(X) v without materializing the d x d matrix.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.mu.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.mu.dim(),
                got: v.len(),
            });
        }
        let proj = self.coeff_mu * self.mu.dot(v);
        Ok(self
            .mu
            .as_slice()
            .iter()
            .zip(v)
            .map(|(m, vi)| proj * m + self.coeff_id * vi)
            .collect())
    }

    /// Trace of var(X).
    pub fn trace(&self) -> f64 {
        self.coeff_mu + self.coeff_id * self.mu.dim() as f64
    }

    /// Dense d x d matrix; refused above d = 10^4.
    pub fn dense(&self) -> Result<Vec<Vec<f64>>> {
        let d = self.mu.dim();
        if d > DENSE_COVARIANCE_MAX_DIM {
            return Err(Error::Domain(format!(
                "dense covariance refused for d = {d} (> {DENSE_COVARIANCE_MAX_DIM}); use apply()"
            )));
        }
        let mu = self.mu.as_slice();
        Ok((0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let diag = if i == j { self.coeff_id } else { 0.0 };
                        self.coeff_mu * mu[i] * mu[j] + diag
                    })
                    .collect()
            })
            .collect())
    }
}

/// Reflect `y` by the Householder map sending e_1 to `mu`.
///
/// Uses u = e_1 - mu unnormalized: x = y - 2 u (u.y) / ||u||^2. When
/// ||e_1 - mu|| < 1e-12 the map is the identity.
pub fn householder_reflect(y: &[f64], mu: &Direction) -> Vec<f64> {
    let d = mu.dim();
    assert_eq!(y.len(), d, "householder_reflect dimension mismatch");
    let mu_s = mu.as_slice();
    // ||e_1 - mu||^2 = 2 (1 - mu_1) for unit mu.
    let norm2_u = 2.0 * (1.0 - mu_s[0]);
    if norm2_u < 1e-24 {
        return y.to_vec();
    }
    let u_dot_y = y[0] - mu.dot(y);
    let scale = 2.0 * u_dot_y / norm2_u;
    let mut out = Vec::with_capacity(d);
    out.push(y[0] - scale * (1.0 - mu_s[0]));
    for i in 1..d {
        out.push(y[i] + scale * mu_s[i]);
    }
    out
}

/// Isotropic unit vector in `dim` coordinates (Gaussian draw, normalized).
/// `dim = 1` returns +1 or -1 with equal probability.
pub fn sample_uniform_subsphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    assert!(dim >= 1, "subsphere needs at least one coordinate");
    if dim == 1 {
        return vec![if rng.random::<bool>() { 1.0 } else { -1.0 }];
    }
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = norm2(&v).sqrt();
        if norm > 0.0 && norm.is_finite() {
            for x in &mut v {
                *x /= norm;
            }
            return v;
        }
        // All-zero Gaussian draw has measure zero; resample.
    }
}

/// Power Spherical distribution with mean direction `mu` and concentration
/// `kappa >= 0`.
#[derive(Clone, Debug)]
pub struct PowerSpherical {
    mu: Direction,
    kappa: f64,
    marginal: MarginalT,
    log_norm: f64,
}

impl PowerSpherical {
    pub fn new(mu: Direction, kappa: f64) -> Result<Self> {
        let marginal = MarginalT::new(mu.dim(), kappa)?;
        let (alpha, beta) = (marginal.alpha(), marginal.beta());
        let log_norm = (alpha + beta) * std::f64::consts::LN_2
            + beta * std::f64::consts::PI.ln()
            + specfun::log_gamma(alpha)?
            - specfun::log_gamma(alpha + beta)?;
        Ok(Self {
            mu,
            kappa,
            marginal,
            log_norm,
        })
    }

    pub fn mu(&self) -> &Direction {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    /// The marginal law of t = mu^T x.
    pub fn marginal(&self) -> &MarginalT {
        &self.marginal
    }

    /// log N_X = (alpha+beta) log 2 + beta log pi + log Gamma(alpha)
    /// - log Gamma(alpha+beta). At kappa = 0 this is the log surface area.
    pub fn log_normalizer(&self) -> f64 {
        self.log_norm
    }

    /// Log density at a unit vector: kappa log1p(mu^T x) - log N_X, with the
    /// dot product clamped to [-1, 1] before use. Returns -inf at
    /// mu^T x = -1 for kappa > 0.
    pub fn log_prob(&self, x: &Direction) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        Ok(self.log_prob_dot(self.mu.dot(x.as_slice())))
    }

    /// Log density as a function of the dot product alone.
    pub fn log_prob_dot(&self, dot: f64) -> f64 {
        if self.kappa == 0.0 {
            return -self.log_norm;
        }
        let t = dot.clamp(-1.0, 1.0);
        self.kappa * t.ln_1p() - self.log_norm
    }

    /// One draw; `want_gradient` attaches d(mu^T x)/dkappa = 2 dz/dkappa.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, want_gradient: bool) -> SphericalSample {
        let d = self.dim();
        let ts = self.marginal.sample(rng, want_gradient);
        // sqrt(1 - t^2) = 2 sqrt(z (1-z)): no cancellation at t -> +-1.
        let radial = 2.0 * (ts.z * ts.one_minus_z).sqrt();
        let tangent = sample_uniform_subsphere(d - 1, rng);
        let mut y = Vec::with_capacity(d);
        y.push(ts.t);
        for v in &tangent {
            y.push(v * radial);
        }
        let x = householder_reflect(&y, &self.mu);
        SphericalSample {
            x: Direction::from_unit_unchecked(x),
            t: ts.t,
            dot_grad_kappa: ts.dz_dkappa.map(|g| 2.0 * g),
        }
    }

    pub fn sample_batch<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
        want_gradient: bool,
    ) -> Vec<SphericalSample> {
        (0..n).map(|_| self.sample(rng, want_gradient)).collect()
    }

    /// E[X] = mu (alpha - beta)/(alpha + beta) = mu kappa/(d - 1 + kappa).
    pub fn mean(&self) -> Vec<f64> {
        let c = self.mean_coefficient();
        self.mu.as_slice().iter().map(|m| c * m).collect()
    }

    /// The scalar (alpha - beta)/(alpha + beta).
    pub fn mean_coefficient(&self) -> f64 {
        self.kappa / (self.marginal.alpha() + self.marginal.beta())
    }

    /// d/dkappa of the mean coefficient: 2 beta / (alpha + beta)^2.
    pub fn mean_coefficient_grad(&self) -> f64 {
        let s = self.marginal.alpha() + self.marginal.beta();
        2.0 * self.marginal.beta() / (s * s)
    }

    /// The mode, mu, defined only for kappa > 0.
    pub fn mode(&self) -> Result<Direction> {
        if self.kappa > 0.0 {
            Ok(self.mu.clone())
        } else {
            Err(Error::UndefinedMode)
        }
    }

    /// var(X) = 2 alpha / ((alpha+beta)^2 (alpha+beta+1))
    ///          * ((beta - alpha) mu mu^T + (alpha+beta) I_d).
    pub fn covariance(&self) -> CovarianceStructure {
        let a = self.marginal.alpha();
        let b = self.marginal.beta();
        let s = a + b;
        CovarianceStructure {
            coeff_mu: 2.0 * a * (b - a) / (s * s * (s + 1.0)),
            coeff_id: 2.0 * a / (s * (s + 1.0)),
            mu: self.mu.clone(),
        }
    }

    /// H(X) = log N_X - kappa (log 2 + psi(alpha) - psi(alpha+beta)).
    pub fn entropy(&self) -> f64 {
        let a = self.marginal.alpha();
        let s = a + self.marginal.beta();
        let psi_a = specfun::digamma(a).expect("alpha > 0");
        let psi_s = specfun::digamma(s).expect("alpha + beta > 0");
        self.log_norm - self.kappa * (std::f64::consts::LN_2 + psi_a - psi_s)
    }

    /// KL(P || U(S^{d-1})) = -H(P) + log A_{d-1}; zero iff kappa = 0.
    pub fn kl_from_uniform(&self) -> f64 {
        -self.entropy() + specfun::log_surface_area(self.dim())
    }

    /// KL(P || vMF(mu_q, kappa_q)) =
    /// -H(P) + log C_X(kappa_q, d) - kappa_q mu_q^T mu_p (alpha-beta)/(alpha+beta),
    /// with log C_X the vMF log partition value.
    pub fn kl_to_vmf(&self, q: &VonMisesFisher) -> Result<f64> {
        if q.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: q.dim(),
            });
        }
        let cross = q.kappa() * q.mu().dot(self.mu.as_slice()) * self.mean_coefficient();
        Ok(-self.entropy() + q.log_normalizer() - cross)
    }
}
