//! Cross-validate the closed-form momentum series against direct
//! integration: the order-10 truncation should leave an order-11 remainder,
//! so halving ε must shrink the difference by about 2^11.
//!
//! Run with: cargo run --release --example series_validation

use ecorbits::analytic::{momentum_series, predicted_roots, tau_star_series, SeriesRoots};
use ecorbits::dynamics::{NormalizedRtbp, Params};
use ecorbits::ecfinder::momentum_at;
use ecorbits::integrator::IntegratorConfig;

fn main() -> ecorbits::Result<()> {
    let (mu, n) = (0.1, 2);
    let cfg = IntegratorConfig::default();
    let angles = [0.3, 1.1, 2.0, 2.8];

    let max_diff = |eps: f64| -> ecorbits::Result<f64> {
        let params = Params::from_k(mu, n, 1.0 / (eps * eps))?;
        let sys = NormalizedRtbp::from_params(&params)?;
        let mut worst = 0.0f64;
        for &t in &angles {
            let m_num = momentum_at(&sys, n, t, &cfg)?.m;
            let m_ser = momentum_series(n, t, mu, eps, 10)?;
            worst = worst.max((m_num - m_ser).abs());
        }
        Ok(worst)
    };

    let (d2, d1) = (max_diff(0.2)?, max_diff(0.1)?);
    println!("max |M_num - M_series| at eps = 0.2: {d2:.3e}");
    println!("max |M_num - M_series| at eps = 0.1: {d1:.3e}");
    println!("shrink factor {:.0} (order-11 remainder predicts ~{:.0})", d2 / d1, 2f64.powi(11));

    let eps = 0.15;
    println!("\ntau* series at eps = {eps}: {:.10}", tau_star_series(n, 0.3, mu, eps, 10)?);
    match predicted_roots(n, mu, eps, 10)? {
        SeriesRoots::Degenerate => println!("momentum series vanishes identically"),
        SeriesRoots::Roots(r) => {
            println!("predicted ejection angles of the n-EC orbits:");
            for t in r {
                println!("  theta0 = {t:.8}");
            }
        }
    }
    Ok(())
}
