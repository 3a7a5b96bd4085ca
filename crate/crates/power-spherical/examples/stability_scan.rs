//! A reduced version of the numerical-stability experiment: 10 samples and
//! gradients per (d, kappa) cell for both distributions, non-finite values
//! flagged. The full default grid runs via the CLI:
//!
//! ```bash
//! cargo run --release --bin psphere -- stability-sweep --out stability.csv
//! ```
//!
//! ```bash
//! cargo run --release --example stability_scan
//! ```

use power_spherical::harness::{stability_sweep, StabilityConfig};

fn main() {
    let cfg = StabilityConfig {
        d_grid: vec![2, 10, 100, 10_000, 900_000],
        kappa_grid: vec![1.0, 100.0, 10_000.0, 900_000.0],
        samples_per_cell: 10,
        seed: 2020,
    };
    let rows = stability_sweep(&cfg);
    println!(
        "{:>8} {:>10} {:>12} {:>12} {:>20}",
        "d", "kappa", "ps_stable", "vmf_stable", "failure"
    );
    for r in &rows {
        println!(
            "{:>8} {:>10} {:>12} {:>12} {:>20}",
            r.d,
            r.kappa,
            r.ps_stable,
            r.vmf_stable,
            r.failure_kind.as_str()
        );
    }
    let unstable = rows.iter().filter(|r| !r.ps_stable).count();
    println!(
        "\nPower Spherical unstable cells: {unstable} / {}",
        rows.len()
    );
}
