//! Quadrature oracles for the closed forms that are not already pinned by a
//! hand-checkable constant: normalizers, density values, and the CDF as an
//! integral of the density.

mod common;

use common::{adaptive_simpson, marginal_mass};
use power_spherical::MarginalT;

#[test]
fn marginal_normalizer_matches_quadrature() {
    // N_T = integral of (1+t)^kappa (1-t^2)^((d-3)/2) over [-1, 1].
    let m = MarginalT::new(5, 10.0).unwrap();
    let unnorm = |t: f64| 10.0 * t.ln_1p() + 1.0 * ((-t).ln_1p() + t.ln_1p());
    let n_quad = adaptive_simpson(&|t| unnorm(t).exp(), -1.0, 1.0, 1e-12);
    assert!(
        (m.log_normalizer() - n_quad.ln()).abs() <= 1e-8,
        "log N_T {} vs quadrature {}",
        m.log_normalizer(),
        n_quad.ln()
    );
}

#[test]
fn marginal_pdf_value_is_quadrature_normalized() {
    // d=7, kappa=5 at t=0.9: the density value equals the unnormalized
    // integrand divided by its own integral.
    let m = MarginalT::new(7, 5.0).unwrap();
    let unnorm = |t: f64| (5.0 * t.ln_1p() + 2.0 * ((-t).ln_1p() + t.ln_1p())).exp();
    let n_quad = adaptive_simpson(&unnorm, -1.0, 1.0, 1e-13);
    let expected = unnorm(0.9) / n_quad;
    let got = m.log_pdf(0.9).unwrap().exp();
    assert!(
        ((got - expected) / expected).abs() <= 1e-8,
        "pdf(0.9) = {got} vs quadrature {expected}"
    );
}

#[test]
fn cdf_is_the_integral_of_the_pdf() {
    // F(t) from the regularized incomplete Beta vs direct quadrature of the
    // density from -1 to t, within 1e-7.
    for &(d, kappa, t) in &[
        (4usize, 3.0f64, 0.0f64),
        (3, 0.0, 0.5),
        (5, 10.0, 0.7),
        (64, 100.0, 0.85),
    ] {
        let m = MarginalT::new(d, kappa).unwrap();
        let pdf = |x: f64| m.log_pdf(x).unwrap().exp();
        let quad = adaptive_simpson(&pdf, -1.0, t, 1e-11);
        let closed = m.cdf(t).unwrap();
        assert!(
            (closed - quad).abs() <= 1e-7,
            "d={d} kappa={kappa} t={t}: cdf {closed} vs quadrature {quad}"
        );
    }
}

#[test]
fn vmf_sampler_matches_quadrature_cdf() {
    // Envelope-rejection output vs the numerically integrated marginal CDF,
    // KS at the 1% level (the (64,100) cell runs in the acceptance suite).
    use common::{ks_critical_1pct, ks_statistic, GridCdf};
    use power_spherical::{harness, VonMisesFisher};
    let n = 100_000usize;
    let crit = ks_critical_1pct(n);
    for &(d, kappa) in &[(3usize, 1.0f64), (3, 50.0)] {
        let mu = harness::cell_direction(31, d, kappa);
        let vmf = VonMisesFisher::new(mu, kappa).unwrap();
        let mut rng = harness::derive_rng(31, &[d as u64, kappa.to_bits(), 0x0C]);
        let mut ts: Vec<f64> = (0..n).map(|_| vmf.sample(&mut rng).unwrap().t).collect();
        let eps = 1e-5;
        let cdf = GridCdf::build(
            |theta: f64| vmf.marginal_pdf(theta.sin()).unwrap() * theta.cos(),
            -std::f64::consts::FRAC_PI_2 + eps,
            std::f64::consts::FRAC_PI_2 - eps,
            1 << 16,
        );
        let stat = ks_statistic(&mut ts, |t| cdf.eval(t.clamp(-1.0, 1.0).asin()));
        assert!(stat <= crit, "d={d} kappa={kappa}: D={stat} crit={crit}");
    }
}

#[test]
fn marginal_mass_is_one_beyond_the_acceptance_grid() {
    // A couple of parameter sets outside the pinned acceptance set.
    for &(d, kappa) in &[(7usize, 5.0f64), (10, 50.0), (2, 0.5)] {
        let m = MarginalT::new(d, kappa).unwrap();
        let mass = marginal_mass(&m, 1e-11);
        assert!(
            (mass - 1.0).abs() <= 1e-8,
            "d={d} kappa={kappa}: mass {mass}"
        );
    }
}
