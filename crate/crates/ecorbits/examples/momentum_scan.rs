//! Tabulate the angular momentum M(n, θ₀) at the n-th radial minimum over
//! a grid of ejection angles and report its sign changes — the zeros are
//! the n-ejection-collision orbits.
//!
//! Run with: cargo run --release --example momentum_scan

use ecorbits::dynamics::Params;
use ecorbits::ecfinder::scan_rtbp;
use ecorbits::integrator::IntegratorConfig;
use ecorbits::output::write_scan_csv;

fn main() -> ecorbits::Result<()> {
    let (mu, n, c) = (0.1, 2, 5.0);
    let params = Params::from_c(mu, n, c)?;
    let cfg = IntegratorConfig::default();

    let rows = scan_rtbp(&params, 512, &cfg)?;

    let mut changes = 0;
    let mut prev: Option<f64> = None;
    for r in &rows {
        if let (Some(p), Some(m)) = (prev, r.m) {
            if p * m < 0.0 {
                changes += 1;
                println!("sign change near theta0 = {:.4}", r.theta0);
            }
        }
        prev = r.m.or(prev);
    }
    println!("mu = {mu}, C = {c}, n = {n}: {changes} sign changes over {} samples", rows.len());

    let path = std::path::Path::new("out/momentum_scan.csv");
    write_scan_csv(ecorbits::output::create(path)?, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}
