//! Shared oracles for the integration tests: adaptive quadrature and
//! Kolmogorov-Smirnov machinery, independent of the library's own
//! evaluation paths (the library uses continued fractions and Gauss-Legendre
//! internally; the oracles here are adaptive Simpson).

#![allow(dead_code)]

use power_spherical::MarginalT;

/// Adaptive Simpson with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        lo: f64,
        hi: f64,
        fl: f64,
        fm: f64,
        fh: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let mid = 0.5 * (lo + hi);
        let lm = 0.5 * (lo + mid);
        let rm = 0.5 * (mid + hi);
        let flm = f(lm);
        let frm = f(rm);
        let left = (mid - lo) / 6.0 * (fl + 4.0 * flm + fm);
        let right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fh);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, lo, mid, fl, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, mid, hi, fm, frm, fh, right, 0.5 * tol, depth - 1)
        }
    }
    let mid = 0.5 * (lo + hi);
    let (fl, fm, fh) = (f(lo), f(mid), f(hi));
    let whole = (hi - lo) / 6.0 * (fl + 4.0 * fm + fh);
    rec(f, lo, hi, fl, fm, fh, whole, tol, 48)
}

/// Integral of exp(log_pdf(t)) over [-1, 1] for the dot-product marginal.
///
/// For d >= 3 the density is finite on the closed interval and plain
/// adaptive Simpson in t applies. d = 2 has integrable endpoint
/// singularities; each half is transformed with t = +-(1 - u^2) (an open,
/// endpoint-avoiding rule in t) and the last sliver below u0, where f64 can
/// no longer represent 1 -+ t, is added analytically from the local power
/// law (1 -+ t)^(exponent).
pub fn marginal_mass(m: &MarginalT, tol: f64) -> f64 {
    if m.dim() >= 3 {
        let f = |t: f64| m.log_pdf(t).unwrap().exp();
        return adaptive_simpson(&f, -1.0, 1.0, tol);
    }
    let alpha = m.alpha();
    let beta = m.beta();
    let u0 = 1e-6;
    // Upper half: t = 1 - u^2, dt = 2 u du, u in [u0, 1].
    let upper = {
        let f = |u: f64| 2.0 * u * m.log_pdf(1.0 - u * u).unwrap().exp();
        let body = adaptive_simpson(&f, u0, 1.0, tol);
        // Local law pdf ~ (1-t)^(beta-1): integral over [0, u0] in u is
        // pdf(t0) u0^2 / beta.
        let tail = m.log_pdf(1.0 - u0 * u0).unwrap().exp() * u0 * u0 / beta;
        body + tail
    };
    // Lower half: t = -1 + u^2, exponent is alpha - 1.
    let lower = {
        let f = |u: f64| 2.0 * u * m.log_pdf(-1.0 + u * u).unwrap().exp();
        let body = adaptive_simpson(&f, u0, 1.0, tol);
        let tail = m.log_pdf(-1.0 + u0 * u0).unwrap().exp() * u0 * u0 / alpha;
        body + tail
    };
    // The halves cover t in [0,1] and [-1,0] respectively.
    upper + lower
}

/// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let hi = (i as f64 + 1.0) / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi.abs()).max(lo.abs());
    }
    d
}

/// Asymptotic KS critical value at the 1% level: 1.6276 / sqrt(n).
pub fn ks_critical_1pct(n: usize) -> f64 {
    // c(alpha) = sqrt(-ln(alpha/2) / 2), alpha = 0.01.
    let c = (-(0.005f64).ln() / 2.0).sqrt();
    c / (n as f64).sqrt()
}

/// Tabulated CDF of a positive integrand over [lo, hi], trapezoid rule on a
/// uniform grid, normalized to end at 1. Query by linear interpolation.
pub struct GridCdf {
    lo: f64,
    step: f64,
    cum: Vec<f64>,
}

impl GridCdf {
    pub fn build<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> Self {
        let step = (hi - lo) / (points - 1) as f64;
        let values: Vec<f64> = (0..points).map(|i| f(lo + i as f64 * step)).collect();
        assert!(
            values.iter().all(|v| v.is_finite()),
            "GridCdf integrand must be finite on the grid (clip singular endpoints)"
        );
        let mut cum = Vec::with_capacity(points);
        let mut acc = 0.0;
        cum.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * step;
            cum.push(acc);
        }
        let total = *cum.last().unwrap();
        assert!(
            total.is_finite() && total > 0.0,
            "GridCdf mass must be positive"
        );
        for c in &mut cum {
            *c /= total;
        }
        Self { lo, step, cum }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pos = (x - self.lo) / self.step;
        if pos <= 0.0 {
            return 0.0;
        }
        let idx = pos.floor() as usize;
        if idx + 1 >= self.cum.len() {
            return 1.0;
        }
        let frac = pos - idx as f64;
        self.cum[idx] + frac * (self.cum[idx + 1] - self.cum[idx])
    }
}
