//! Follow one family of n-ejection-collision orbits while the Jacobi
//! constant decreases, with secant prediction of the ejection angle and
//! adaptive step halving when the root is lost.
//!
//! Run with: cargo run --release --example continue_family

use ecorbits::continuation::{continue_family_rtbp, BranchEnd, ContinuationConfig};
use ecorbits::ecfinder::{Family, FinderConfig};
use ecorbits::integrator::IntegratorConfig;
use ecorbits::output::write_branch_csv;

fn main() -> ecorbits::Result<()> {
    let (mu, n) = (0.1, 2);
    let (c_start, c_end) = (5.0, 4.2);
    let ccfg = ContinuationConfig { step: 2e-2, ..Default::default() };

    let branch = continue_family_rtbp(
        mu,
        n,
        Family::Gamma,
        c_start,
        c_end,
        &ccfg,
        &FinderConfig::default(),
        &IntegratorConfig::default(),
    )?;

    println!("family gamma, mu = {mu}, n = {n}, C from {c_start} to {c_end}:");
    for s in branch.samples.iter().step_by(5) {
        println!("  C = {:.4}  theta0 = {:.8}  tau* = {:.6}", s.energy, s.theta0, s.tau_star);
    }
    match &branch.end {
        BranchEnd::ReachedEnd => println!("reached C = {c_end} in {} steps", branch.samples.len()),
        BranchEnd::Terminated { energy, reason } => {
            println!("branch terminated at C = {energy}: {reason}")
        }
    }

    let path = std::path::Path::new("out/branch_gamma.csv");
    write_branch_csv(ecorbits::output::create(path)?, &branch)?;
    println!("wrote {}", path.display());
    Ok(())
}
