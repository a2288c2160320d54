//! Sweep the Jacobi constant downward, watch the number of
//! n-ejection-collision orbits change, and refine each change point by
//! bisection: the first increase past four roots is the bifurcation value
//! Ĉ(μ, n).
//!
//! Run with: cargo run --release --example bifurcation_search

use ecorbits::continuation::{detect_bifurcations_rtbp, SweepConfig};
use ecorbits::ecfinder::FinderConfig;
use ecorbits::integrator::IntegratorConfig;

fn main() -> ecorbits::Result<()> {
    let (mu, n) = (0.1, 2);
    let (c_hi, c_lo) = (3.78, 3.68);
    let sweep = SweepConfig { step: 1e-2, bisect_tol: 1e-6, ..Default::default() };
    let fcfg = FinderConfig { grid: 256, ..Default::default() };
    let icfg = IntegratorConfig { abs_tol: 1e-11, rel_tol: 1e-11, ..Default::default() };

    println!("mu = {mu}, n = {n}: sweeping C from {c_hi} down to {c_lo} ...");
    let events = detect_bifurcations_rtbp(mu, n, c_hi, Some(c_lo), &sweep, &fcfg, &icfg)?;

    for b in &events {
        println!(
            "C = {:.8}  {:?}  root count {} -> {}  new angles {:?}",
            b.energy, b.kind, b.count_above, b.count_below, b.new_angles
        );
        if let Some(f) = b.from_family {
            println!("  branching off family {f}");
        }
    }
    if let Some(first) = events.iter().find(|b| b.count_below > b.count_above) {
        println!("first bifurcation value C^ = {:.8}", first.energy);
    }
    Ok(())
}
