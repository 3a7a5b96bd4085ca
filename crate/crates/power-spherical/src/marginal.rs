//! The scalar law of the dot product t = mu^T x under the Power Spherical
//! distribution.
//!
//! With alpha = (d-1)/2 + kappa and beta = (d-1)/2, the dot product is
//! T = 2Z - 1 for Z ~ Beta(alpha, beta). Everything here is expressed through
//! that transform: the density and normalizer in log space, the CDF as a
//! regularized incomplete Beta, the inverse CDF through the Beta quantile,
//! entropy through the Beta entropy, and implicit reparameterization
//! gradients dz/dkappa obtained by differentiating the CDF identity
//! F(z; alpha) = u in the shape parameter.

use crate::error::{Error, Result};
use crate::specfun;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// One draw of the dot-product marginal.
///
/// `z` and `one_minus_z` are computed from the same pair of Gamma variates,
/// so each is accurate near its own zero; `sqrt(1 - t^2)` downstream must be
/// formed as `2 sqrt(z * one_minus_z)`, never from `t`.
#[derive(Clone, Copy, Debug)]
pub struct TSample {
    /// The dot product, t = 2z - 1 in [-1, 1].
    pub t: f64,
    /// Beta(alpha, beta) variate in [0, 1].
    pub z: f64,
    /// 1 - z, kept separately for precision near z = 1.
    pub one_minus_z: f64,
    /// Implicit gradient dz/dkappa, when requested.
    pub dz_dkappa: Option<f64>,
}

/// Marginal distribution of t = mu^T x on [-1, 1].
#[derive(Clone, Debug)]
pub struct MarginalT {
    dim: usize,
    kappa: f64,
    alpha: f64,
    beta: f64,
    log_beta_fn: f64,
    log_norm: f64,
    gamma_alpha: Gamma<f64>,
    gamma_beta: Gamma<f64>,
}

/// Step scale for the central difference of I_z(alpha, beta) in alpha.
const GRAD_STEP_SCALE: f64 = 1e-4;

impl MarginalT {
    /// Marginal law for ambient dimension `dim >= 2` (the sphere S^{dim-1})
    /// and concentration `kappa >= 0`.
    pub fn new(dim: usize, kappa: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!(
                "ambient dimension must be >= 2, got {dim}"
            )));
        }
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::Domain(format!(
                "concentration must be finite and >= 0, got {kappa}"
            )));
        }
        let beta = (dim as f64 - 1.0) / 2.0;
        let alpha = beta + kappa;
        let log_beta_fn = specfun::log_beta(alpha, beta)?;
        let log_norm = (alpha + beta - 1.0) * std::f64::consts::LN_2 + log_beta_fn;
        let gamma_alpha = Gamma::new(alpha, 1.0)
            .map_err(|e| Error::Domain(format!("Gamma(alpha) sampler: {e}")))?;
        let gamma_beta = Gamma::new(beta, 1.0)
            .map_err(|e| Error::Domain(format!("Gamma(beta) sampler: {e}")))?;
        Ok(Self {
            dim,
            kappa,
            alpha,
            beta,
            log_beta_fn,
            log_norm,
            gamma_alpha,
            gamma_beta,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Beta shape alpha = (d-1)/2 + kappa.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Beta shape beta = (d-1)/2.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// log N_T = (alpha + beta - 1) log 2 + log B(alpha, beta), the
    /// normalizer of (1+t)^kappa (1-t^2)^((d-3)/2) on [-1, 1].
    pub fn log_normalizer(&self) -> f64 {
        self.log_norm
    }

    /// Log density of t.
    ///
    /// Interior values are finite; endpoints may be -inf (positive exponents)
    /// or +inf (the integrable endpoint singularities at d = 2).
    pub fn log_pdf(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        // kappa log(1+t) + (d-3)/2 log(1-t^2) = (alpha-1) log(1+t) + (beta-1) log(1-t)
        let mut lp = -self.log_norm;
        let ea = self.alpha - 1.0;
        let eb = self.beta - 1.0;
        if ea != 0.0 {
            lp += ea * t.ln_1p();
        }
        if eb != 0.0 {
            lp += eb * (-t).ln_1p();
        }
        Ok(lp)
    }

    /// CDF F(t) = I_{(t+1)/2}(alpha, beta).
    pub fn cdf(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        specfun::reg_inc_beta((t + 1.0) / 2.0, self.alpha, self.beta)
    }

    /// Inverse CDF F^{-1}(y) = 2 I^{-1}_y(alpha, beta) - 1.
    pub fn icdf(&self, y: f64) -> Result<f64> {
        let z = specfun::inv_reg_inc_beta(y, self.alpha, self.beta)?;
        Ok(2.0 * z - 1.0)
    }

    /// Differential entropy H(T) = H(Beta(alpha, beta)) + log 2.
    pub fn entropy(&self) -> f64 {
        let a = self.alpha;
        let b = self.beta;
        let psi_a = specfun::digamma(a).expect("alpha > 0");
        let psi_b = specfun::digamma(b).expect("beta > 0");
        let psi_ab = specfun::digamma(a + b).expect("alpha + beta > 0");
        self.log_beta_fn + (a + b - 2.0) * psi_ab - (a - 1.0) * psi_a - (b - 1.0) * psi_b
            + std::f64::consts::LN_2
    }

    /// Draw one t, via z = g1/(g1+g2) for g1 ~ Gamma(alpha), g2 ~ Gamma(beta).
    ///
    /// When `want_gradient` is set, the implicit reparameterization gradient
    /// dz/dkappa = -(dF/dalpha)(z) / pdf(z) is attached, with dF/dalpha taken
    /// by a central difference in the shape parameter.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, want_gradient: bool) -> TSample {
        let g1 = self.gamma_alpha.sample(rng);
        let g2 = self.gamma_beta.sample(rng);
        let sum = g1 + g2;
        let z = g1 / sum;
        let one_minus_z = g2 / sum;
        let t = 2.0 * z - 1.0;
        let dz_dkappa = if want_gradient {
            Some(self.dz_dkappa_at(z, one_minus_z))
        } else {
            None
        };
        TSample {
            t,
            z,
            one_minus_z,
            dz_dkappa,
        }
    }

    /// Implicit gradient dz/dkappa at a realized z (dalpha/dkappa = 1).
    ///
    /// Differentiating F(z; alpha, beta) = u at fixed u gives
    /// dz/dalpha = -(dF/dalpha) / pdf(z). For z > 1/2 the central difference
    /// runs on the complementary tail I_{1-z}(beta, alpha), where the
    /// incomplete Beta retains relative accuracy.
    pub fn dz_dkappa_at(&self, z: f64, one_minus_z: f64) -> f64 {
        let a = self.alpha;
        let b = self.beta;
        let h = GRAD_STEP_SCALE * a.max(1.0);
        let df_dalpha = if z <= 0.5 {
            let up = specfun::reg_inc_beta(z, a + h, b);
            let dn = specfun::reg_inc_beta(z, a - h, b);
            match (up, dn) {
                (Ok(u), Ok(d)) => (u - d) / (2.0 * h),
                _ => f64::NAN,
            }
        } else {
            // I_z(a, b) = 1 - I_{1-z}(b, a)
            let up = specfun::reg_inc_beta(one_minus_z, b, a + h);
            let dn = specfun::reg_inc_beta(one_minus_z, b, a - h);
            match (up, dn) {
                (Ok(u), Ok(d)) => -(u - d) / (2.0 * h),
                _ => f64::NAN,
            }
        };
        let log_pdf = (a - 1.0) * z.ln() + (b - 1.0) * one_minus_z.ln() - self.log_beta_fn;
        -df_dalpha / log_pdf.exp()
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&t) || t.is_nan() {
        return Err(Error::Domain(format!("t must lie in [-1, 1], got {t}")));
    }
    Ok(())
}
