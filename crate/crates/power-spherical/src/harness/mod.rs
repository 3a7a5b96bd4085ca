//! Experiment harness: the numerical-stability sweep, the sampling-time
//! benchmark, the Monte-Carlo verification suite, and the small data
//! commands behind the `psphere` binary.
//!
//! Everything is deterministic given `--seed`: each cell or verification row
//! owns an RNG stream derived from (master seed, cell coordinates, role
//! tag), so running cells in parallel cannot change any result. Timing
//! values are the one exception — wall-clock numbers vary, the row structure
//! does not.
//!
//! Stability protocol: per (d, kappa) cell and per distribution, draw 10
//! samples and the per-sample gradient d(mu^T x)/dkappa; the cell is
//! unstable for that distribution iff any sample coordinate or gradient is
//! non-finite. The mean direction of each cell is a seeded random unit
//! vector, so the Householder path is exercised rather than the identity
//! shortcut at mu = e_1.

pub mod grid;

use crate::error::{Error, Result};
use crate::marginal::MarginalT;
use crate::power_spherical::{sample_uniform_subsphere, Direction, PowerSpherical};
use crate::specfun;
use crate::vmf::VonMisesFisher;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::{BufRead, Write};
use std::time::Instant;

const TAG_MU: u64 = 0x4d55;
const TAG_PS: u64 = 0x5053;
const TAG_VMF: u64 = 0x564d46;
const TAG_VERIFY: u64 = 0x5652;
const TAG_GRAD: u64 = 0x4752;
const TAG_SAMPLE: u64 = 0x534d;
const TAG_TIMING: u64 = 0x544d;
const TAG_KL: u64 = 0x4b4c;

/// Absolute slack added to every 3-standard-error comparison so that
/// zero-variance cells (kappa = 0, where the integrand is constant) cannot
/// fail on accumulated rounding alone.
const SE_ABS_FLOOR: f64 = 1e-9;

/// Deterministic tolerance for the CDF/inverse-CDF roundtrip rows.
const CDF_ROUNDTRIP_TOL: f64 = 1e-9;
/// Deterministic relative tolerance for implicit-vs-oracle gradient rows.
const GRADIENT_REL_TOL: f64 = 1e-3;

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent ChaCha stream for (master seed, tags); used for every cell so
/// parallel scheduling never changes results.
pub fn derive_rng(master: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut state = master;
    for &t in tags {
        let mixed = splitmix_next(&mut state);
        state ^= t.rotate_left(17) ^ mixed;
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix_next(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// The seeded mean direction shared by every command for a (d, kappa) cell.
pub fn cell_direction(master: u64, d: usize, kappa: f64) -> Direction {
    let mut rng = derive_rng(master, &[d as u64, kappa.to_bits(), TAG_MU]);
    Direction::normalized(sample_uniform_subsphere(d, &mut rng)).expect("unit vector")
}

/// Output encoding for every command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

// ---------------------------------------------------------------------------
// Stability sweep
// ---------------------------------------------------------------------------

/// What went wrong in an unstable cell, attributed to the first failing
/// distribution (Power Spherical checked first).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    None,
    SampleNonfinite,
    GradientNonfinite,
    NormalizerNonfinite,
    RejectionCap,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::None => "none",
            FailureKind::SampleNonfinite => "sample_nonfinite",
            FailureKind::GradientNonfinite => "gradient_nonfinite",
            FailureKind::NormalizerNonfinite => "normalizer_nonfinite",
            FailureKind::RejectionCap => "rejection_cap",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityCell {
    pub d: usize,
    pub kappa: f64,
    pub ps_stable: bool,
    pub vmf_stable: bool,
    pub failure_kind: FailureKind,
}

#[derive(Clone, Debug)]
pub struct StabilityConfig {
    pub d_grid: Vec<usize>,
    pub kappa_grid: Vec<f64>,
    pub samples_per_cell: usize,
    pub seed: u64,
}

impl StabilityConfig {
    /// The full grid: d, kappa in {a 10^b : a in 1..9, b in 0..5}.
    /// Dimension entries below 2 (the d = 1 decade head) do not describe a
    /// sphere and are skipped by the sweep.
    pub fn defaults(seed: u64) -> Self {
        Self {
            d_grid: grid::parse_dimension_grid(grid::STABILITY_GRID).expect("builtin grid"),
            kappa_grid: grid::parse_grid_spec(grid::STABILITY_GRID).expect("builtin grid"),
            samples_per_cell: 10,
            seed,
        }
    }
}

/// Run the stability protocol over the configured grid.
pub fn stability_sweep(cfg: &StabilityConfig) -> Vec<StabilityCell> {
    let cells: Vec<(usize, f64)> = cfg
        .d_grid
        .iter()
        .filter(|&&d| d >= 2)
        .flat_map(|&d| cfg.kappa_grid.iter().map(move |&k| (d, k)))
        .collect();
    cells
        .par_iter()
        .map(|&(d, kappa)| evaluate_stability_cell(cfg.seed, d, kappa, cfg.samples_per_cell))
        .collect()
}

fn evaluate_stability_cell(seed: u64, d: usize, kappa: f64, samples: usize) -> StabilityCell {
    let mu = cell_direction(seed, d, kappa);

    let ps = PowerSpherical::new(mu.clone(), kappa).expect("valid cell parameters");
    let mut ps_failure = FailureKind::None;
    let mut rng = derive_rng(seed, &[d as u64, kappa.to_bits(), TAG_PS]);
    for _ in 0..samples {
        let s = ps.sample(&mut rng, true);
        if s.x.as_slice().iter().any(|v| !v.is_finite()) {
            ps_failure = FailureKind::SampleNonfinite;
            break;
        }
        if !s.dot_grad_kappa.unwrap_or(f64::NAN).is_finite() {
            ps_failure = if ps.log_normalizer().is_finite() {
                FailureKind::GradientNonfinite
            } else {
                FailureKind::NormalizerNonfinite
            };
            break;
        }
    }

    let vmf = VonMisesFisher::new(mu, kappa).expect("valid cell parameters");
    let mut vmf_failure = FailureKind::None;
    let mut rng = derive_rng(seed, &[d as u64, kappa.to_bits(), TAG_VMF]);
    for _ in 0..samples {
        match vmf.sample(&mut rng) {
            Err(_) => {
                vmf_failure = FailureKind::RejectionCap;
                break;
            }
            Ok(rep) => {
                if rep.x.as_slice().iter().any(|v| !v.is_finite()) {
                    vmf_failure = FailureKind::SampleNonfinite;
                    break;
                }
                if !rep.dt_dkappa.is_finite() {
                    vmf_failure = if vmf.log_normalizer().is_finite() {
                        FailureKind::GradientNonfinite
                    } else {
                        FailureKind::NormalizerNonfinite
                    };
                    break;
                }
            }
        }
    }

    let failure_kind = if ps_failure != FailureKind::None {
        ps_failure
    } else {
        vmf_failure
    };
    StabilityCell {
        d,
        kappa,
        ps_stable: ps_failure == FailureKind::None,
        vmf_stable: vmf_failure == FailureKind::None,
        failure_kind,
    }
}

// ---------------------------------------------------------------------------
// Timing benchmark
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    PowerSpherical,
    Vmf,
}

impl DistKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistKind::PowerSpherical => "power_spherical",
            DistKind::Vmf => "vmf",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TimingRow {
    pub dist: DistKind,
    pub kappa: f64,
    /// Mean over trials of (batch sampling time in ms, averaged over reps).
    pub mean_ms: f64,
    /// Sample standard deviation over trials.
    pub std_ms: f64,
    pub trials: usize,
    pub reps: usize,
    /// Mean envelope rejections per accepted sample (0 for Power Spherical,
    /// which performs no rejection iterations by construction).
    pub mean_rejections: f64,
}

#[derive(Clone, Debug)]
pub struct TimingConfig {
    pub d: usize,
    pub batch: usize,
    pub kappa_grid: Vec<f64>,
    pub trials: usize,
    pub reps: usize,
    pub seed: u64,
}

impl TimingConfig {
    /// d = 64, batches of 100, kappa in {a 10^b : a in 1..5, b in 0..4},
    /// 7 trials of 100 repetitions each.
    pub fn defaults(seed: u64) -> Self {
        Self {
            d: 64,
            batch: 100,
            kappa_grid: grid::parse_grid_spec(grid::TIMING_KAPPA_GRID).expect("builtin grid"),
            trials: 7,
            reps: 100,
            seed,
        }
    }
}

/// Wall-clock batch-sampling benchmark; one warm-up repetition per
/// configuration is excluded from the measurements.
pub fn bench_timing(cfg: &TimingConfig) -> Result<Vec<TimingRow>> {
    if cfg.batch == 0 {
        return Err(Error::Usage("batch size must be >= 1".into()));
    }
    if cfg.trials == 0 || cfg.reps == 0 {
        return Err(Error::Usage("trials and reps must be >= 1".into()));
    }
    if cfg.d < 2 {
        return Err(Error::Usage(format!(
            "dimension must be >= 2, got {}",
            cfg.d
        )));
    }
    let mut rows = Vec::with_capacity(2 * cfg.kappa_grid.len());
    for &kappa in &cfg.kappa_grid {
        let mu = cell_direction(cfg.seed, cfg.d, kappa);
        let ps = PowerSpherical::new(mu.clone(), kappa)?;
        let mut rng = derive_rng(cfg.seed, &[cfg.d as u64, kappa.to_bits(), TAG_TIMING, 0]);
        let mut sink = 0.0f64;
        for s in ps.sample_batch(cfg.batch, &mut rng, false) {
            sink += s.t; // warm-up
        }
        let mut trial_means = Vec::with_capacity(cfg.trials);
        for _ in 0..cfg.trials {
            let start = Instant::now();
            for _ in 0..cfg.reps {
                for s in ps.sample_batch(cfg.batch, &mut rng, false) {
                    sink += s.t;
                }
            }
            trial_means.push(start.elapsed().as_secs_f64() * 1e3 / cfg.reps as f64);
        }
        rows.push(TimingRow {
            dist: DistKind::PowerSpherical,
            kappa,
            mean_ms: mean(&trial_means),
            std_ms: sample_std(&trial_means),
            trials: cfg.trials,
            reps: cfg.reps,
            mean_rejections: 0.0,
        });
        std::hint::black_box(sink);
    }
    for &kappa in &cfg.kappa_grid {
        let mu = cell_direction(cfg.seed, cfg.d, kappa);
        let vmf = VonMisesFisher::new(mu, kappa)?;
        let mut rng = derive_rng(cfg.seed, &[cfg.d as u64, kappa.to_bits(), TAG_TIMING, 1]);
        let mut sink = 0.0f64;
        for _ in 0..cfg.batch {
            sink += vmf.sample(&mut rng)?.t; // warm-up
        }
        let mut trial_means = Vec::with_capacity(cfg.trials);
        let mut rejections = 0u64;
        let mut accepted = 0u64;
        for _ in 0..cfg.trials {
            let start = Instant::now();
            for _ in 0..cfg.reps {
                for _ in 0..cfg.batch {
                    let rep = vmf.sample(&mut rng)?;
                    sink += rep.t;
                    rejections += rep.rejections;
                    accepted += 1;
                }
            }
            trial_means.push(start.elapsed().as_secs_f64() * 1e3 / cfg.reps as f64);
        }
        rows.push(TimingRow {
            dist: DistKind::Vmf,
            kappa,
            mean_ms: mean(&trial_means),
            std_ms: sample_std(&trial_means),
            trials: cfg.trials,
            reps: cfg.reps,
            mean_rejections: rejections as f64 / accepted as f64,
        });
        std::hint::black_box(sink);
    }
    Ok(rows)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Monte-Carlo verification suite
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyQuantity {
    Mean,
    Covariance,
    Entropy,
    KlUniform,
    KlVmf,
    CdfRoundtrip,
    Gradient,
}

impl VerifyQuantity {
    pub fn as_str(self) -> &'static str {
        match self {
            VerifyQuantity::Mean => "mean",
            VerifyQuantity::Covariance => "covariance",
            VerifyQuantity::Entropy => "entropy",
            VerifyQuantity::KlUniform => "kl_uniform",
            VerifyQuantity::KlVmf => "kl_vmf",
            VerifyQuantity::CdfRoundtrip => "cdf_roundtrip",
            VerifyQuantity::Gradient => "gradient",
        }
    }
}

/// One closed-form-vs-Monte-Carlo comparison.
///
/// Stochastic rows pass iff |closed_form - mc_estimate| <= 3 mc_se (plus a
/// 1e-9 absolute floor for zero-variance cells). Deterministic rows
/// (cdf_roundtrip, and the implicit-gradient-vs-oracle flavor of gradient)
/// carry mc_se = 0 and pass against their stated fixed tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationRow {
    pub quantity: VerifyQuantity,
    pub d: usize,
    pub kappa: f64,
    /// For kl_vmf rows: the vMF concentration, with a negative sign encoding
    /// mu_q = -mu_p (vMF(-mu, k) has the same density as vMF(mu, -k)).
    pub kappa_q: Option<f64>,
    pub closed_form: f64,
    pub mc_estimate: f64,
    pub mc_se: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct KlVmfCase {
    pub d: usize,
    pub kappa_p: f64,
    /// Signed: negative means mu_q anti-aligned with mu_p.
    pub kappa_q: f64,
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Cells receiving mean/covariance/entropy/kl_uniform/cdf_roundtrip rows.
    pub moment_cells: Vec<(usize, f64)>,
    pub kl_vmf_cases: Vec<KlVmfCase>,
    /// Cells receiving the two gradient rows.
    pub gradient_cells: Vec<(usize, f64)>,
    pub n_samples: usize,
    /// Sample count for the averaged-gradient row.
    pub gradient_samples: usize,
    pub seed: u64,
}

impl VerifyConfig {
    pub fn defaults(seed: u64) -> Self {
        Self {
            moment_cells: vec![(2, 1.0), (3, 0.0), (3, 2.0), (5, 7.0), (64, 100.0)],
            kl_vmf_cases: vec![
                KlVmfCase {
                    d: 3,
                    kappa_p: 2.0,
                    kappa_q: 1.0,
                },
                KlVmfCase {
                    d: 3,
                    kappa_p: 2.0,
                    kappa_q: 5.0,
                },
                KlVmfCase {
                    d: 3,
                    kappa_p: 2.0,
                    kappa_q: -1.0,
                },
                KlVmfCase {
                    d: 3,
                    kappa_p: 2.0,
                    kappa_q: -5.0,
                },
            ],
            gradient_cells: vec![(3, 1.0), (5, 10.0), (64, 100.0)],
            n_samples: 1_000_000,
            gradient_samples: 100_000,
            seed,
        }
    }
}

enum VerifyJob {
    Moments(usize, f64),
    KlVmf(KlVmfCase),
    Gradient(usize, f64),
}

/// Run every configured verification row. Row order is deterministic.
pub fn mc_verify(cfg: &VerifyConfig) -> Result<Vec<VerificationRow>> {
    let mut jobs: Vec<VerifyJob> = Vec::new();
    for &(d, k) in &cfg.moment_cells {
        jobs.push(VerifyJob::Moments(d, k));
    }
    for case in &cfg.kl_vmf_cases {
        jobs.push(VerifyJob::KlVmf(case.clone()));
    }
    for &(d, k) in &cfg.gradient_cells {
        jobs.push(VerifyJob::Gradient(d, k));
    }
    let results: Vec<Result<Vec<VerificationRow>>> = jobs
        .par_iter()
        .map(|job| match job {
            VerifyJob::Moments(d, k) => verify_moment_cell(cfg, *d, *k),
            VerifyJob::KlVmf(case) => verify_kl_vmf_case(cfg, case),
            VerifyJob::Gradient(d, k) => verify_gradient_cell(cfg, *d, *k),
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

fn three_se_pass(closed: f64, mc: f64, se: f64) -> bool {
    (closed - mc).abs() <= 3.0 * se + SE_ABS_FLOOR
}

fn verify_moment_cell(cfg: &VerifyConfig, d: usize, kappa: f64) -> Result<Vec<VerificationRow>> {
    let n = cfg.n_samples;
    let nf = n as f64;
    let mu = cell_direction(cfg.seed, d, kappa);
    let ps = PowerSpherical::new(mu.clone(), kappa)?;
    let mut rng = derive_rng(cfg.seed, &[d as u64, kappa.to_bits(), TAG_VERIFY]);

    let entrywise = d <= 5;
    let mut sum_x = vec![0.0f64; d];
    let (mut sum_t, mut sum_t2) = (0.0f64, 0.0f64);
    let (mut sum_lp, mut sum_lp2) = (0.0f64, 0.0f64);
    let mut sum_xx = if entrywise {
        vec![0.0f64; d * d]
    } else {
        Vec::new()
    };
    let mut sum_xx2 = sum_xx.clone();
    for _ in 0..n {
        let s = ps.sample(&mut rng, false);
        let xs = s.x.as_slice();
        for (acc, v) in sum_x.iter_mut().zip(xs) {
            *acc += v;
        }
        sum_t += s.t;
        sum_t2 += s.t * s.t;
        let lp = ps.log_prob(&s.x)?;
        sum_lp += lp;
        sum_lp2 += lp * lp;
        if entrywise {
            for i in 0..d {
                for j in 0..d {
                    let p = xs[i] * xs[j];
                    sum_xx[i * d + j] += p;
                    sum_xx2[i * d + j] += p * p;
                }
            }
        }
    }

    let mut rows = Vec::with_capacity(5);

    // Mean, compared along mu (the only non-trivial direction by symmetry).
    let mean_t = sum_t / nf;
    let var_t = (sum_t2 / nf - mean_t * mean_t).max(0.0);
    let se_t = (var_t / nf).sqrt();
    let closed_mean = ps.mean_coefficient();
    rows.push(VerificationRow {
        quantity: VerifyQuantity::Mean,
        d,
        kappa,
        kappa_q: None,
        closed_form: closed_mean,
        mc_estimate: mean_t,
        mc_se: se_t,
        pass: three_se_pass(closed_mean, mean_t, se_t),
    });

    // Covariance, via second moments E[x_i x_j] (entrywise for d <= 5) or
    // the trace (d > 5). The row reports the worst entry.
    let cov = ps.covariance();
    let mean_vec = ps.mean();
    let cov_row = if entrywise {
        // Worst entry (largest |closed - mc| relative to its allowance) is
        // the one reported; pass requires every entry within 3 SE.
        let mut worst = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
        let mut all_pass = true;
        for i in 0..d {
            for j in i..d {
                let closed = cov.coeff_mu() * mu.as_slice()[i] * mu.as_slice()[j]
                    + if i == j { cov.coeff_id() } else { 0.0 }
                    + mean_vec[i] * mean_vec[j];
                let mc = sum_xx[i * d + j] / nf;
                let var = (sum_xx2[i * d + j] / nf - mc * mc).max(0.0);
                let se = (var / nf).sqrt();
                all_pass &= three_se_pass(closed, mc, se);
                let badness = (closed - mc).abs() / (3.0 * se + SE_ABS_FLOOR);
                if badness > worst.0 {
                    worst = (badness, closed, mc, se);
                }
            }
        }
        VerificationRow {
            quantity: VerifyQuantity::Covariance,
            d,
            kappa,
            kappa_q: None,
            closed_form: worst.1,
            mc_estimate: worst.2,
            mc_se: worst.3,
            pass: all_pass,
        }
    } else {
        // Trace: unit vectors give tr(var) = 1 - ||mean||^2; the sampling
        // error lives in ||m-bar||^2, whose delta-method SE along mu is
        // 2 ||m-bar|| se_t.
        let m_bar: Vec<f64> = sum_x.iter().map(|s| s / nf).collect();
        let m_norm2: f64 = m_bar.iter().map(|v| v * v).sum();
        let mc_trace = 1.0 - m_norm2;
        let closed_trace = cov.trace();
        let se_trace = 2.0 * m_norm2.sqrt() * se_t;
        VerificationRow {
            quantity: VerifyQuantity::Covariance,
            d,
            kappa,
            kappa_q: None,
            closed_form: closed_trace,
            mc_estimate: mc_trace,
            mc_se: se_trace,
            pass: three_se_pass(closed_trace, mc_trace, se_trace),
        }
    };
    rows.push(cov_row);

    // Entropy: H = -E[log p].
    let mean_lp = sum_lp / nf;
    let var_lp = (sum_lp2 / nf - mean_lp * mean_lp).max(0.0);
    let se_lp = (var_lp / nf).sqrt();
    let closed_entropy = ps.entropy();
    rows.push(VerificationRow {
        quantity: VerifyQuantity::Entropy,
        d,
        kappa,
        kappa_q: None,
        closed_form: closed_entropy,
        mc_estimate: -mean_lp,
        mc_se: se_lp,
        pass: three_se_pass(closed_entropy, -mean_lp, se_lp),
    });

    // KL from uniform: E[log p - log u] = E[log p] + log A_{d-1}.
    let closed_kl = ps.kl_from_uniform();
    let mc_kl = mean_lp + specfun::log_surface_area(d);
    rows.push(VerificationRow {
        quantity: VerifyQuantity::KlUniform,
        d,
        kappa,
        kappa_q: None,
        closed_form: closed_kl,
        mc_estimate: mc_kl,
        mc_se: se_lp,
        pass: three_se_pass(closed_kl, mc_kl, se_lp),
    });

    // Deterministic CDF/inverse-CDF roundtrip over 1000 quantiles.
    let marginal = ps.marginal();
    let mut max_err = 0.0f64;
    for j in 0..1000 {
        let y = (j as f64 + 0.5) / 1000.0;
        let t = marginal.icdf(y)?;
        max_err = max_err.max((marginal.cdf(t)? - y).abs());
    }
    rows.push(VerificationRow {
        quantity: VerifyQuantity::CdfRoundtrip,
        d,
        kappa,
        kappa_q: None,
        closed_form: 0.0,
        mc_estimate: max_err,
        mc_se: 0.0,
        pass: max_err <= CDF_ROUNDTRIP_TOL,
    });

    Ok(rows)
}

fn verify_kl_vmf_case(cfg: &VerifyConfig, case: &KlVmfCase) -> Result<Vec<VerificationRow>> {
    let n = cfg.n_samples;
    let nf = n as f64;
    let mu_p = cell_direction(cfg.seed, case.d, case.kappa_p);
    let mu_q = if case.kappa_q >= 0.0 {
        mu_p.clone()
    } else {
        Direction::normalized(mu_p.as_slice().iter().map(|v| -v).collect())?
    };
    let ps = PowerSpherical::new(mu_p, case.kappa_p)?;
    let q = VonMisesFisher::new(mu_q, case.kappa_q.abs())?;
    let closed = ps.kl_to_vmf(&q)?;
    let mut rng = derive_rng(
        cfg.seed,
        &[
            case.d as u64,
            case.kappa_p.to_bits(),
            case.kappa_q.to_bits(),
            TAG_KL,
        ],
    );
    let (mut sum, mut sum2) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let s = ps.sample(&mut rng, false);
        let diff = ps.log_prob(&s.x)? - q.log_prob(&s.x)?;
        sum += diff;
        sum2 += diff * diff;
    }
    let mc = sum / nf;
    let var = (sum2 / nf - mc * mc).max(0.0);
    let se = (var / nf).sqrt();
    Ok(vec![VerificationRow {
        quantity: VerifyQuantity::KlVmf,
        d: case.d,
        kappa: case.kappa_p,
        kappa_q: Some(case.kappa_q),
        closed_form: closed,
        mc_estimate: mc,
        mc_se: se,
        pass: three_se_pass(closed, mc, se),
    }])
}

fn verify_gradient_cell(cfg: &VerifyConfig, d: usize, kappa: f64) -> Result<Vec<VerificationRow>> {
    let marginal = MarginalT::new(d, kappa)?;
    let (a, b) = (marginal.alpha(), marginal.beta());

    // Deterministic row: implicit dz/dkappa against a finite difference of
    // the inverse CDF in alpha at matched uniforms.
    let h = 5e-4 * a.max(1.0);
    let mut max_rel = 0.0f64;
    for j in 0..32 {
        let u = (j as f64 + 0.5) / 32.0;
        let z = specfun::inv_reg_inc_beta(u, a, b)?;
        let implicit = marginal.dz_dkappa_at(z, 1.0 - z);
        let zp = specfun::inv_reg_inc_beta(u, a + h, b)?;
        let zm = specfun::inv_reg_inc_beta(u, a - h, b)?;
        let oracle = (zp - zm) / (2.0 * h);
        max_rel = max_rel.max((implicit - oracle).abs() / oracle.abs());
    }
    let mut rows = vec![VerificationRow {
        quantity: VerifyQuantity::Gradient,
        d,
        kappa,
        kappa_q: None,
        closed_form: 0.0,
        mc_estimate: max_rel,
        mc_se: 0.0,
        pass: max_rel <= GRADIENT_REL_TOL,
    }];

    // Stochastic row: averaged sample gradient of mu^T x against the
    // derivative of the Table-style mean coefficient, 2 beta/(alpha+beta)^2.
    let mu = cell_direction(cfg.seed, d, kappa);
    let ps = PowerSpherical::new(mu, kappa)?;
    let mut rng = derive_rng(cfg.seed, &[d as u64, kappa.to_bits(), TAG_GRAD]);
    let n = cfg.gradient_samples;
    let nf = n as f64;
    let (mut sum, mut sum2) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let g = ps
            .sample(&mut rng, true)
            .dot_grad_kappa
            .expect("gradient requested");
        sum += g;
        sum2 += g * g;
    }
    let mc = sum / nf;
    let var = (sum2 / nf - mc * mc).max(0.0);
    let se = (var / nf).sqrt();
    let closed = ps.mean_coefficient_grad();
    rows.push(VerificationRow {
        quantity: VerifyQuantity::Gradient,
        d,
        kappa,
        kappa_q: None,
        closed_form: closed,
        mc_estimate: mc,
        mc_se: se,
        pass: three_se_pass(closed, mc, se),
    });
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Data commands: sample / logprob / kl
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct SampleRow {
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SampleConfig {
    pub d: usize,
    pub kappa: f64,
    pub n: usize,
    pub seed: u64,
}

/// Draw `n` unit vectors; the mean direction is the seeded cell direction
/// shared with `logprob`, so piped workflows see a consistent distribution.
pub fn sample_rows(cfg: &SampleConfig) -> Result<Vec<SampleRow>> {
    if cfg.d < 2 {
        return Err(Error::Usage(format!(
            "dimension must be >= 2, got {}",
            cfg.d
        )));
    }
    if cfg.n == 0 {
        return Err(Error::Usage("sample count must be >= 1".into()));
    }
    if !cfg.kappa.is_finite() || cfg.kappa < 0.0 {
        return Err(Error::Usage(format!(
            "kappa must be finite and >= 0, got {}",
            cfg.kappa
        )));
    }
    let mu = cell_direction(cfg.seed, cfg.d, cfg.kappa);
    let ps = PowerSpherical::new(mu, cfg.kappa)?;
    let mut rng = derive_rng(cfg.seed, &[cfg.d as u64, cfg.kappa.to_bits(), TAG_SAMPLE]);
    Ok((0..cfg.n)
        .map(|_| {
            let s = ps.sample(&mut rng, false);
            SampleRow {
                t: s.t,
                x: s.x.into_vec(),
            }
        })
        .collect())
}

/// Tolerance on input rows for `logprob`.
pub const INPUT_UNIT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct LogProbRow {
    pub row: usize,
    pub log_prob_power_spherical: Option<f64>,
    pub log_prob_vmf: Option<f64>,
    pub error: Option<String>,
}

/// Evaluate log densities for a stream of comma-separated coordinate rows.
///
/// Rows that fail to parse, have the wrong arity, or miss unit norm by more
/// than 1e-6 produce an error record instead of aborting the stream. The
/// bool in the return value reports whether any row errored.
pub fn logprob_rows<R: BufRead>(
    d: usize,
    kappa: f64,
    include_vmf: bool,
    skip_header: bool,
    input: R,
    seed: u64,
) -> Result<(Vec<LogProbRow>, bool)> {
    if d < 2 {
        return Err(Error::Usage(format!("dimension must be >= 2, got {d}")));
    }
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::Usage(format!(
            "kappa must be finite and >= 0, got {kappa}"
        )));
    }
    let mu = cell_direction(seed, d, kappa);
    let ps = PowerSpherical::new(mu.clone(), kappa)?;
    let vmf = if include_vmf {
        Some(VonMisesFisher::new(mu, kappa)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut any_error = false;
    let mut index = 0usize;
    for (line_no, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (skip_header && line_no == 0) {
            continue;
        }
        let row = match parse_unit_row(trimmed, d, index) {
            Ok(x) => {
                let lp = ps.log_prob(&x)?;
                let lq = match &vmf {
                    Some(q) => Some(q.log_prob(&x)?),
                    None => None,
                };
                LogProbRow {
                    row: index,
                    log_prob_power_spherical: Some(lp),
                    log_prob_vmf: lq,
                    error: None,
                }
            }
            Err(e) => {
                any_error = true;
                LogProbRow {
                    row: index,
                    log_prob_power_spherical: None,
                    log_prob_vmf: None,
                    error: Some(e.to_string()),
                }
            }
        };
        rows.push(row);
        index += 1;
    }
    Ok((rows, any_error))
}

fn parse_unit_row(line: &str, d: usize, row: usize) -> Result<Direction> {
    let values: std::result::Result<Vec<f64>, _> =
        line.split(',').map(|f| f.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| Error::MalformedRow {
        row,
        message: format!("unparseable value: {e}"),
    })?;
    if values.len() != d {
        return Err(Error::MalformedRow {
            row,
            message: format!("expected {d} coordinates, got {}", values.len()),
        });
    }
    let norm: f64 = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > INPUT_UNIT_TOL {
        return Err(Error::MalformedRow {
            row,
            message: format!("norm {norm} is not within {INPUT_UNIT_TOL:.0e} of 1"),
        });
    }
    Direction::normalized(values)
}

#[derive(Clone, Debug, Serialize)]
pub struct KlRow {
    pub quantity: VerifyQuantity,
    pub d: usize,
    pub kappa: f64,
    pub kappa_q: Option<f64>,
    pub mu_dot: Option<f64>,
    pub value: f64,
}

/// Closed-form KL values: always KL(P || uniform); additionally
/// KL(P || vMF(kappa_q)) when `kappa_q` is given, with mu_q placed at the
/// requested cosine `mu_dot` from mu_p.
pub fn kl_rows(
    d: usize,
    kappa: f64,
    kappa_q: Option<f64>,
    mu_dot: f64,
    seed: u64,
) -> Result<Vec<KlRow>> {
    if d < 2 {
        return Err(Error::Usage(format!("dimension must be >= 2, got {d}")));
    }
    if !(-1.0..=1.0).contains(&mu_dot) {
        return Err(Error::Usage(format!(
            "mu-dot must lie in [-1, 1], got {mu_dot}"
        )));
    }
    let mu_p = cell_direction(seed, d, kappa);
    let ps = PowerSpherical::new(mu_p.clone(), kappa)?;
    let mut rows = vec![KlRow {
        quantity: VerifyQuantity::KlUniform,
        d,
        kappa,
        kappa_q: None,
        mu_dot: None,
        value: ps.kl_from_uniform(),
    }];
    if let Some(kq) = kappa_q {
        if !kq.is_finite() || kq < 0.0 {
            return Err(Error::Usage(format!(
                "kappa-q must be finite and >= 0, got {kq}"
            )));
        }
        let mut rng = derive_rng(seed, &[d as u64, kappa.to_bits(), TAG_KL]);
        let mu_q = direction_at_cosine(&mu_p, mu_dot, &mut rng)?;
        let q = VonMisesFisher::new(mu_q, kq)?;
        rows.push(KlRow {
            quantity: VerifyQuantity::KlVmf,
            d,
            kappa,
            kappa_q: Some(kq),
            mu_dot: Some(mu_dot),
            value: ps.kl_to_vmf(&q)?,
        });
    }
    Ok(rows)
}

/// A unit vector whose dot product with `mu` equals `cosine`, using a seeded
/// tangent direction for the orthogonal part.
fn direction_at_cosine<R: Rng + ?Sized>(
    mu: &Direction,
    cosine: f64,
    rng: &mut R,
) -> Result<Direction> {
    if cosine >= 1.0 {
        return Ok(mu.clone());
    }
    if cosine <= -1.0 {
        return Direction::normalized(mu.as_slice().iter().map(|v| -v).collect());
    }
    let d = mu.dim();
    // Draw until the tangent component is non-degenerate.
    loop {
        let v = sample_uniform_subsphere(d, rng);
        let proj = mu.dot(&v);
        let tangent: Vec<f64> = v
            .iter()
            .zip(mu.as_slice())
            .map(|(vi, mi)| vi - proj * mi)
            .collect();
        let norm: f64 = tangent.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            let sine = (1.0 - cosine * cosine).sqrt();
            let values: Vec<f64> = mu
                .as_slice()
                .iter()
                .zip(&tangent)
                .map(|(mi, ti)| cosine * mi + sine * ti / norm)
                .collect();
            return Direction::normalized(values);
        }
    }
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

pub const STABILITY_HEADER: &str = "d,kappa,ps_stable,vmf_stable,failure_kind";
pub const TIMING_HEADER: &str = "dist,kappa,mean_ms,std_ms,trials,reps,mean_rejections";
pub const VERIFY_HEADER: &str = "quantity,d,kappa,kappa_q,closed_form,mc_estimate,mc_se,pass";
pub const KL_HEADER: &str = "quantity,d,kappa,kappa_q,mu_dot,value";
pub const LOGPROB_HEADER: &str = "row,log_prob_power_spherical,log_prob_vmf,error";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_stability<W: Write>(
    w: &mut W,
    rows: &[StabilityCell],
    format: OutputFormat,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(w, "{STABILITY_HEADER}")?;
            for r in rows {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    r.d,
                    r.kappa,
                    r.ps_stable,
                    r.vmf_stable,
                    r.failure_kind.as_str()
                )?;
            }
        }
        OutputFormat::Jsonl => write_jsonl(w, rows)?,
    }
    Ok(())
}

pub fn write_timing<W: Write>(w: &mut W, rows: &[TimingRow], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(w, "{TIMING_HEADER}")?;
            for r in rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    r.dist.as_str(),
                    r.kappa,
                    r.mean_ms,
                    r.std_ms,
                    r.trials,
                    r.reps,
                    r.mean_rejections
                )?;
            }
        }
        OutputFormat::Jsonl => write_jsonl(w, rows)?,
    }
    Ok(())
}

pub fn write_verify<W: Write>(
    w: &mut W,
    rows: &[VerificationRow],
    format: OutputFormat,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(w, "{VERIFY_HEADER}")?;
            for r in rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    r.quantity.as_str(),
                    r.d,
                    r.kappa,
                    opt(r.kappa_q),
                    r.closed_form,
                    r.mc_estimate,
                    r.mc_se,
                    r.pass
                )?;
            }
        }
        OutputFormat::Jsonl => write_jsonl(w, rows)?,
    }
    Ok(())
}

pub fn write_samples<W: Write>(
    w: &mut W,
    d: usize,
    rows: &[SampleRow],
    format: OutputFormat,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let coords: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
            writeln!(w, "t,{}", coords.join(","))?;
            for r in rows {
                let xs: Vec<String> = r.x.iter().map(|v| v.to_string()).collect();
                writeln!(w, "{},{}", r.t, xs.join(","))?;
            }
        }
        OutputFormat::Jsonl => write_jsonl(w, rows)?,
    }
    Ok(())
}

pub fn write_logprob<W: Write>(w: &mut W, rows: &[LogProbRow], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(w, "{LOGPROB_HEADER}")?;
            for r in rows {
                writeln!(
                    w,
                    "{},{},{},{}",
                    r.row,
                    opt(r.log_prob_power_spherical),
                    opt(r.log_prob_vmf),
                    r.error.as_deref().unwrap_or_default().replace(',', ";")
                )?;
            }
        }
        OutputFormat::Jsonl => write_jsonl(w, rows)?,
    }
    Ok(())
}

pub fn write_kl<W: Write>(w: &mut W, rows: &[KlRow], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(w, "{KL_HEADER}")?;
            for r in rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    r.quantity.as_str(),
                    r.d,
                    r.kappa,
                    opt(r.kappa_q),
                    opt(r.mu_dot),
                    r.value
                )?;
            }
        }
        OutputFormat::Jsonl => write_jsonl(w, rows)?,
    }
    Ok(())
}

fn write_jsonl<W: Write, T: Serialize>(w: &mut W, rows: &[T]) -> Result<()> {
    for r in rows {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::Domain(format!("serialization failed: {e}")))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}
