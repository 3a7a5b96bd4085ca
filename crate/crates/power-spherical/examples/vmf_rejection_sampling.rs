//! The von Mises-Fisher baseline: log densities through the log-Bessel
//! normalizer and Ulrich/Wood envelope rejection sampling, with the
//! rejection work made visible.
//!
//! ```bash
//! cargo run --release --example vmf_rejection_sampling
//! ```

use power_spherical::{Direction, VonMisesFisher};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let d = 64;
    println!("vMF rejection behaviour at d = {d} (10000 draws per kappa):");
    println!(
        "{:>10} {:>14} {:>16} {:>14}",
        "kappa", "mean t", "mean rejections", "log C_X"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for kappa in [0.0, 1.0, 10.0, 100.0, 1_000.0, 10_000.0] {
        let vmf = VonMisesFisher::new(Direction::canonical(d), kappa).unwrap();
        let n = 10_000;
        let mut sum_t = 0.0;
        let mut rejections = 0u64;
        for _ in 0..n {
            let rep = vmf.sample(&mut rng).unwrap();
            sum_t += rep.t;
            rejections += rep.rejections;
        }
        println!(
            "{kappa:>10} {:>14.6} {:>16.4} {:>14.4}",
            sum_t / n as f64,
            rejections as f64 / n as f64,
            vmf.log_normalizer()
        );
    }

    // d = 3 has a closed-form normalizer to sanity-check against.
    let vmf = VonMisesFisher::new(Direction::canonical(3), 1.0).unwrap();
    let closed = (4.0 * std::f64::consts::PI * 1.0f64.sinh()).ln();
    println!(
        "\nd = 3, kappa = 1: log C_X = {:.9} vs closed form {closed:.9}",
        vmf.log_normalizer()
    );
}
