//! The Hill problem: find n-ejection-collision orbits at a fixed energy K,
//! locate the first bifurcation value K̂(n), and detect the energies where
//! primary branches cross the symmetry angles and become periodic.
//!
//! Run with: cargo run --release --example hill_orbits

use ecorbits::continuation::{ContinuationConfig, SweepConfig};
use ecorbits::ecfinder::FinderConfig;
use ecorbits::hill::{detect_periodic_ec, hill_find_ec, hill_k_hat, k_lagrange};
use ecorbits::integrator::IntegratorConfig;

fn main() -> ecorbits::Result<()> {
    let n = 5;
    let fcfg = FinderConfig { grid: 256, ..Default::default() };
    let icfg = IntegratorConfig { abs_tol: 1e-11, rel_tol: 1e-11, ..Default::default() };

    println!("Hill problem, K at the collinear points: {:.6}", k_lagrange());

    let k = 5.1;
    let roots = hill_find_ec(n, k, &fcfg, &icfg)?;
    println!("n = {n}, K = {k}: {} orbits", roots.orbits.len());
    for o in &roots.orbits {
        println!("  {}  theta0 = {:.8}  certified = {}", o.family, o.theta0, o.certified);
    }

    let sweep = SweepConfig { step: 1e-2, bisect_tol: 1e-5, ..Default::default() };
    let b = hill_k_hat(n, 5.15, 4.9, &sweep, &fcfg, &icfg)?;
    println!("first bifurcation K^({n}) = {:.8} ({:?})", b.energy, b.kind);

    // home-angle crossings of the n = 9 branches: where symmetry pairs of
    // EC orbits glue into (or each become) periodic orbits
    let ccfg = ContinuationConfig { step: 2e-2, ..Default::default() };
    let events = detect_periodic_ec(9, 8.0, 4.35, &ccfg, &fcfg, &icfg)?;
    for e in &events {
        println!(
            "n = 9, K = {:.8}: branch {} crossed angle {:.4} -> {:?} for pair ({}, {})",
            e.k, e.branch, e.angle, e.kind, e.pair.0, e.pair.1
        );
    }
    Ok(())
}
