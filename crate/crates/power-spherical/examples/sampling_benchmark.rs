//! A reduced sampling-time comparison: batch sampling across concentrations
//! for both distributions. Power Spherical time is flat in kappa; vMF pays
//! for its rejection loop. The full-scale grid runs via the CLI:
//!
//! ```bash
//! cargo run --release --bin psphere -- bench-timing --out timing.csv
//! ```
//!
//! ```bash
//! cargo run --release --example sampling_benchmark
//! ```

use power_spherical::harness::{bench_timing, DistKind, TimingConfig};

fn main() {
    let cfg = TimingConfig {
        d: 64,
        batch: 100,
        kappa_grid: vec![1.0, 10.0, 100.0, 1_000.0, 10_000.0],
        trials: 5,
        reps: 40,
        seed: 99,
    };
    let rows = bench_timing(&cfg).unwrap();
    println!(
        "{:>16} {:>10} {:>12} {:>10} {:>16}",
        "dist", "kappa", "mean ms", "std ms", "mean rejections"
    );
    for r in &rows {
        println!(
            "{:>16} {:>10} {:>12.4} {:>10.4} {:>16.4}",
            r.dist.as_str(),
            r.kappa,
            r.mean_ms,
            r.std_ms,
            r.mean_rejections
        );
    }
    let ps: Vec<f64> = rows
        .iter()
        .filter(|r| r.dist == DistKind::PowerSpherical)
        .map(|r| r.mean_ms)
        .collect();
    let ratio =
        ps.iter().cloned().fold(0.0, f64::max) / ps.iter().cloned().fold(f64::MAX, f64::min);
    println!("\nPower Spherical max/min time ratio across kappa: {ratio:.3}");
}
