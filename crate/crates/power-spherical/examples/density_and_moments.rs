//! Log densities, mode, covariance structure, and entropy — including the
//! matrix-free covariance apply, which works unchanged at d = 100000.
//!
//! ```bash
//! cargo run --release --example density_and_moments
//! ```

use power_spherical::{Direction, PowerSpherical};

fn main() {
    let mu = Direction::canonical(3);
    let ps = PowerSpherical::new(mu.clone(), 2.0).unwrap();

    println!("d = 3, kappa = 2");
    println!(
        "log N_X          = {:.6}  (= log(16 pi / 3))",
        ps.log_normalizer()
    );
    println!("log p(mu)        = {:.6}", ps.log_prob(&mu).unwrap());
    let side = Direction::new(vec![0.0, 1.0, 0.0]).unwrap();
    println!("log p(tangent)   = {:.6}", ps.log_prob(&side).unwrap());
    println!("mode             = {:?}", ps.mode().unwrap().as_slice());
    println!("entropy          = {:.6}", ps.entropy());

    let cov = ps.covariance();
    println!(
        "covariance: {:.4} * mu mu^T + {:.4} * I  (trace {:.4})",
        cov.coeff_mu(),
        cov.coeff_id(),
        cov.trace()
    );
    println!("dense form       = {:?}", cov.dense().unwrap());

    // High dimension: never materialize d x d, apply directly.
    let d = 100_000;
    let big = PowerSpherical::new(Direction::canonical(d), 500.0).unwrap();
    let cov = big.covariance();
    let mut v = vec![0.0; d];
    v[0] = 1.0;
    v[d - 1] = -1.0;
    let w = cov.apply(&v).unwrap();
    println!(
        "d = {d}: var(X) v computed matrix-free, w[0] = {:.3e}, w[d-1] = {:.3e}",
        w[0],
        w[d - 1]
    );
    println!("dense at d = {d} is refused: {}", cov.dense().unwrap_err());
}
