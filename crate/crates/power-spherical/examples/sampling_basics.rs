//! Draw from a Power Spherical distribution and check the empirical mean
//! against the closed form E[X] = mu * kappa / (d - 1 + kappa).
//!
//! ```bash
//! cargo run --release --example sampling_basics
//! ```

use power_spherical::{Direction, PowerSpherical};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mu = Direction::normalized(vec![1.0, -2.0, 0.5]).unwrap();
    let ps = PowerSpherical::new(mu.clone(), 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    let n = 200_000;
    let mut acc = vec![0.0f64; ps.dim()];
    for _ in 0..n {
        let s = ps.sample(&mut rng, false);
        for (a, v) in acc.iter_mut().zip(s.x.as_slice()) {
            *a += v;
        }
    }
    let empirical: Vec<f64> = acc.iter().map(|a| a / n as f64).collect();
    let closed = ps.mean();

    println!("mu                = {:?}", mu.as_slice());
    println!("mean coefficient  = {:.6}", ps.mean_coefficient());
    println!("closed-form mean  = {closed:.6?}");
    println!("empirical mean    = {empirical:.6?}  (n = {n})");

    // Every sample is exactly unit norm and carries its dot product.
    let s = ps.sample(&mut rng, false);
    let norm: f64 = s.x.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    println!("one draw: t = {:.6}, ||x|| - 1 = {:.2e}", s.t, norm - 1.0);
}
