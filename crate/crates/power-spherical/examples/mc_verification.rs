//! Cross-validate the closed forms (moments, entropy, KL divergences,
//! quantiles, gradients) against seeded Monte-Carlo estimates. The full
//! 10^6-sample suite runs via the CLI:
//!
//! ```bash
//! cargo run --release --bin psphere -- mc-verify
//! ```
//!
//! ```bash
//! cargo run --release --example mc_verification
//! ```

use power_spherical::harness::{mc_verify, VerifyConfig};

fn main() {
    let mut cfg = VerifyConfig::defaults(315);
    cfg.n_samples = 100_000; // lighter than the acceptance-scale run
    cfg.gradient_samples = 50_000;
    let rows = mc_verify(&cfg).unwrap();
    println!(
        "{:>14} {:>4} {:>7} {:>8} {:>14} {:>14} {:>11} {:>6}",
        "quantity", "d", "kappa", "kappa_q", "closed", "mc", "3*se", "pass"
    );
    for r in &rows {
        println!(
            "{:>14} {:>4} {:>7} {:>8} {:>14.6} {:>14.6} {:>11.2e} {:>6}",
            r.quantity.as_str(),
            r.d,
            r.kappa,
            r.kappa_q.map(|k| k.to_string()).unwrap_or_default(),
            r.closed_form,
            r.mc_estimate,
            3.0 * r.mc_se,
            r.pass
        );
    }
    let failures = rows.iter().filter(|r| !r.pass).count();
    println!("\n{} rows, {failures} failures", rows.len());
}
