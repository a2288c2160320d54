//! Locate and certify every n-ejection-collision orbit at one Jacobi
//! constant: bracket the zeros of M(n, θ₀), refine them by bisection and
//! re-propagate at tight tolerance to confirm the collision.
//!
//! Run with: cargo run --release --example find_orbits

use ecorbits::dynamics::Params;
use ecorbits::ecfinder::{find_ec_orbits, FinderConfig};
use ecorbits::integrator::IntegratorConfig;

fn main() -> ecorbits::Result<()> {
    let (mu, n, c) = (0.1, 2, 3.9);
    let params = Params::from_c(mu, n, c)?;
    let roots = find_ec_orbits(&params, &FinderConfig::default(), &IntegratorConfig::default())?;

    println!("mu = {mu}, C = {c}, n = {n}  (eps = {:.4})", params.eps());
    println!("{:<7} {:>12} {:>12} {:>12} {:>10}", "family", "theta0", "tau*", "dist", "certified");
    for o in &roots.orbits {
        println!(
            "{:<7} {:>12.8} {:>12.8} {:>12.3e} {:>10}",
            o.family.to_string(),
            o.theta0,
            o.tau_star,
            o.collision_residual,
            o.certified
        );
    }
    for t in &roots.tangencies {
        println!("tangency (grazing zero) near theta0 = {t:.6}");
    }
    if !roots.all_certified() {
        eprintln!("warning: not every orbit certified as a collision");
        std::process::exit(1);
    }
    Ok(())
}
