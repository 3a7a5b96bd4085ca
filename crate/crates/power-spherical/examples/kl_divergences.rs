//! Closed-form KL divergences: from the uniform distribution on the sphere
//! (useful as a variational prior) and from a von Mises-Fisher target.
//!
//! ```bash
//! cargo run --release --example kl_divergences
//! ```

use power_spherical::{Direction, PowerSpherical, VonMisesFisher};

fn main() {
    println!("KL(P || uniform) as concentration grows (d = 10):");
    for kappa in [0.0, 0.5, 2.0, 10.0, 100.0, 1000.0] {
        let ps = PowerSpherical::new(Direction::canonical(10), kappa).unwrap();
        println!("  kappa = {kappa:>7}: {:.6}", ps.kl_from_uniform());
    }

    println!("\nKL(P || vMF(mu_q, kappa_q)) at d = 3, kappa_p = 2:");
    let mu = Direction::canonical(3);
    let anti = Direction::new(vec![-1.0, 0.0, 0.0]).unwrap();
    let ps = PowerSpherical::new(mu.clone(), 2.0).unwrap();
    for kappa_q in [0.5, 1.0, 2.0, 5.0] {
        let aligned = ps
            .kl_to_vmf(&VonMisesFisher::new(mu.clone(), kappa_q).unwrap())
            .unwrap();
        let flipped = ps
            .kl_to_vmf(&VonMisesFisher::new(anti.clone(), kappa_q).unwrap())
            .unwrap();
        println!("  kappa_q = {kappa_q:>4}: aligned {aligned:>9.6}, anti-aligned {flipped:>9.6}");
    }

    // Picking the closest vMF: scan kappa_q for the minimum.
    let best = (1..=600)
        .map(|i| i as f64 * 0.01)
        .map(|kq| {
            let kl = ps
                .kl_to_vmf(&VonMisesFisher::new(mu.clone(), kq).unwrap())
                .unwrap();
            (kq, kl)
        })
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    println!(
        "\nclosest vMF to PowerSpherical(kappa=2, d=3): kappa_q ~ {:.2} (KL {:.6})",
        best.0, best.1
    );
}
