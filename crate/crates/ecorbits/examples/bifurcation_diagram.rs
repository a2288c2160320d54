//! Build a bifurcation diagram: the full set of n-ejection-collision
//! ejection angles at each value of the Jacobi constant across a range.
//!
//! Run with: cargo run --release --example bifurcation_diagram

use ecorbits::continuation::diagram;
use ecorbits::dynamics::NormalizedRtbp;
use ecorbits::ecfinder::FinderConfig;
use ecorbits::integrator::IntegratorConfig;
use ecorbits::output::write_diagram_csv;

fn main() -> ecorbits::Result<()> {
    let (mu, n) = (0.1, 2);
    let (c_lo, c_hi, count) = (3.66, 3.80, 15);
    let energies: Vec<f64> =
        (0..count).map(|i| c_lo + (c_hi - c_lo) * i as f64 / (count - 1) as f64).collect();
    let fcfg = FinderConfig { grid: 256, ..Default::default() };
    let icfg = IntegratorConfig { abs_tol: 1e-11, rel_tol: 1e-11, ..Default::default() };

    let points = diagram(|c| NormalizedRtbp::new(mu, c), n, &energies, &fcfg, &icfg)?;

    for p in &points {
        let angles: Vec<String> =
            p.roots.orbits.iter().map(|o| format!("{:.4}", o.theta0)).collect();
        println!("C = {:.4}: {} roots  [{}]", p.energy, p.roots.orbits.len(), angles.join(", "));
    }

    let path = std::path::Path::new("out/diagram.csv");
    write_diagram_csv(ecorbits::output::create(path)?, &points)?;
    println!("wrote {}", path.display());
    Ok(())
}
