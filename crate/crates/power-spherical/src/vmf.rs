//! von Mises-Fisher reference implementation.
//!
//! Density proportional to exp(kappa mu^T x), normalized by the log
//! partition value log C_X = (d/2) log(2 pi) + log I_{d/2-1}(kappa) minus
//! (d/2 - 1) log kappa. The dependence on the modified Bessel function is
//! exactly what makes this family awkward at scale: where the Bessel branch
//! loses precision or overflows, those values are surfaced as-is so the
//! stability sweep can record them.
//!
//! Sampling uses the classic Ulrich (1984) / Wood (1994) envelope: a
//! Beta((d-1)/2, (d-1)/2) proposal pushed through the rational map
//! w = (1 - (1+b)z) / (1 - (1-b)z), accepted in log space, then assembled
//! into a point on the sphere with the same tangent-normal construction the
//! Power Spherical sampler uses. The number of rejected proposals is
//! reported with each draw.

use crate::error::{Error, Result};
use crate::power_spherical::{householder_reflect, sample_uniform_subsphere, Direction};
use crate::specfun;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Proposals allowed before the sampler gives up and reports instability.
pub const REJECTION_CAP: usize = 1_000_000;

/// One accepted draw together with the envelope work it took.
#[derive(Clone, Debug)]
pub struct RejectionSampleReport {
    pub x: Direction,
    /// Accepted dot product mu^T x.
    pub t: f64,
    /// Envelope proposals rejected before acceptance.
    pub rejections: u64,
    /// d(mu^T x)/dkappa differentiated through the accepted-sample pathway
    /// only (at the accepted Beta draw); no rejection correction term.
    pub dt_dkappa: f64,
}

/// von Mises-Fisher distribution with mean direction `mu` and concentration
/// `kappa >= 0`.
#[derive(Clone, Debug)]
pub struct VonMisesFisher {
    mu: Direction,
    kappa: f64,
    log_norm: f64,
    proposal: Gamma<f64>,
}

impl VonMisesFisher {
    pub fn new(mu: Direction, kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::Domain(format!(
                "concentration must be finite and >= 0, got {kappa}"
            )));
        }
        let dim = mu.dim();
        let log_norm = log_normalizer(dim, kappa);
        let shape = (dim as f64 - 1.0) / 2.0;
        let proposal =
            Gamma::new(shape, 1.0).map_err(|e| Error::Domain(format!("proposal Gamma: {e}")))?;
        Ok(Self {
            mu,
            kappa,
            log_norm,
            proposal,
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

    /// log C_X, the log partition value: q(x) = exp(kappa mu^T x) / C_X.
    ///
    /// May be non-finite where the Bessel evaluation overflows at extreme
    /// (d, kappa); such values are returned unmasked by design.
    pub fn log_normalizer(&self) -> f64 {
        self.log_norm
    }

    /// kappa mu^T x - log C_X; propagates a non-finite normalizer.
    pub fn log_prob(&self, x: &Direction) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        let dot = self.mu.dot(x.as_slice()).clamp(-1.0, 1.0);
        Ok(self.kappa * dot - self.log_norm)
    }

    /// Marginal density of t = mu^T x:
    /// C_T(kappa, d) e^{kappa t} (1 - t^2)^{(d-3)/2}, assembled in log space
    /// and exponentiated.
    pub fn marginal_pdf(&self, t: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&t) || t.is_nan() {
            return Err(Error::Domain(format!("t must lie in [-1, 1], got {t}")));
        }
        let d = self.dim() as f64;
        let shape_exp = (d - 3.0) / 2.0;
        let log_ct = if self.kappa == 0.0 {
            // kappa -> 0 limit: the (1-t^2)^((d-3)/2) density normalizer,
            // log C_T = -[(d-2) log 2 + log B((d-1)/2, (d-1)/2)].
            let half = (d - 1.0) / 2.0;
            -((d - 2.0) * std::f64::consts::LN_2 + specfun::log_beta(half, half)?)
        } else {
            (d / 2.0 - 1.0) * (self.kappa / 2.0).ln()
                - specfun::log_gamma((d - 1.0) / 2.0)?
                - 0.5 * std::f64::consts::PI.ln()
                - specfun::log_bessel_i(d / 2.0 - 1.0, self.kappa)?
        };
        let mut lp = log_ct + self.kappa * t;
        if shape_exp != 0.0 {
            lp += shape_exp * ((-t).ln_1p() + t.ln_1p());
        }
        Ok(lp.exp())
    }

    /// One draw by envelope rejection on the marginal, with rejection count.
    ///
    /// Errors with [`Error::RejectionCap`] after 10^6 proposals; the sweep
    /// records that as an instability rather than spinning forever.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RejectionSampleReport> {
        let d = self.dim();
        let m1 = d as f64 - 1.0;
        // Envelope constants per the cited construction.
        let root = (4.0 * self.kappa * self.kappa + m1 * m1).sqrt();
        let b = (-2.0 * self.kappa + root) / m1;
        let x0 = (1.0 - b) / (1.0 + b);
        let c = self.kappa * x0 + m1 * (-x0 * x0).ln_1p();
        for attempt in 0..REJECTION_CAP {
            let g1 = self.proposal.sample(rng);
            let g2 = self.proposal.sample(rng);
            let sum = g1 + g2;
            let z = g1 / sum;
            let omz = g2 / sum;
            let denom = 1.0 - (1.0 - b) * z;
            let w = (1.0 - (1.0 + b) * z) / denom;
            let u: f64 = rng.random();
            if self.kappa * w + m1 * (-x0 * w).ln_1p() - c >= u.ln() {
                // sqrt(1 - w^2) = 2 sqrt(b z (1-z)) / denom, cancellation-free.
                let radial = 2.0 * (b * z * omz).sqrt() / denom;
                let tangent = sample_uniform_subsphere(d - 1, rng);
                let mut y = Vec::with_capacity(d);
                y.push(w);
                for v in &tangent {
                    y.push(v * radial);
                }
                let x = householder_reflect(&y, &self.mu);
                // Accepted-sample pathway: dw/db at fixed z, times db/dkappa.
                let dw_db = -2.0 * z * omz / (denom * denom);
                let db_dkappa = (-2.0 + 4.0 * self.kappa / root) / m1;
                return Ok(RejectionSampleReport {
                    x: Direction::from_unit_unchecked(x),
                    t: w,
                    rejections: attempt as u64,
                    dt_dkappa: dw_db * db_dkappa,
                });
            }
        }
        Err(Error::RejectionCap { cap: REJECTION_CAP })
    }
}

/// log C_X(kappa, d) = (d/2) log(2 pi) + log I_{d/2-1}(kappa)
/// - (d/2 - 1) log kappa, with the kappa -> 0 limit log A_{d-1}.
pub fn log_normalizer(dim: usize, kappa: f64) -> f64 {
    let d = dim as f64;
    if kappa == 0.0 {
        return specfun::log_surface_area(dim);
    }
    let order = d / 2.0 - 1.0;
    let log_bessel = specfun::log_bessel_i(order, kappa).unwrap_or(f64::NAN);
    (d / 2.0) * (2.0 * std::f64::consts::PI).ln() + log_bessel - order * kappa.ln()
}
