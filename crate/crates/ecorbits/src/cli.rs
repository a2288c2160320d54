//! Thin command-line front end over the library. Every subcommand writes
//! deterministic CSV/JSON data files plus a `.manifest.json` provenance
//! record, and prints a one-line summary to stdout.

use crate::analytic::{momentum_series, predicted_roots, tau_star_series, SeriesRoots, MAX_ORDER};
use crate::continuation::{
    c_hat_curve, continue_family_rtbp, detect_bifurcations_rtbp, diagram, ContinuationConfig,
    SweepConfig,
};
use crate::dynamics::{cl1, NormalizedRtbp, Params};
use crate::ecfinder::{find_ec_orbits, momentum_at, scan_rtbp, uniform_grid, Family, FinderConfig};
use crate::error::{Error, Result};
use crate::hill::{detect_periodic_ec, hill_detect_bifurcations, hill_find_ec, hill_k_hat};
use crate::integrator::IntegratorConfig;
use crate::output::{
    create, fmt_float, write_bifurcations_json, write_branch_csv, write_chat_csv,
    write_diagram_csv, write_json, write_roots_csv, write_scan_csv, RunManifest,
};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Ejection-collision orbits of the planar circular restricted three-body
/// problem and the Hill problem.
#[derive(Parser, Debug)]
#[command(name = "ecorbits", version, about)]
pub struct Cli {
    /// Output directory for data files.
    #[arg(long, global = true, env = "ECORBITS_OUT", default_value = "out")]
    pub out_dir: PathBuf,
    /// Number of worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Tols {
    /// Integrator absolute/relative tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Initial θ₀-grid resolution of the root search.
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
}

impl Tols {
    fn icfg(&self) -> IntegratorConfig {
        IntegratorConfig { abs_tol: self.tol, rel_tol: self.tol, ..Default::default() }
    }

    fn fcfg(&self) -> FinderConfig {
        FinderConfig { grid: self.grid, ..Default::default() }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate the momentum functional M(n, θ₀) over a θ₀ grid.
    Scan {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        n: u32,
        /// Jacobi constant.
        #[arg(long)]
        c: f64,
        #[command(flatten)]
        tols: Tols,
    },
    /// Find and certify all n-EC orbits at one Jacobi constant.
    Find {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        c: f64,
        #[command(flatten)]
        tols: Tols,
    },
    /// Continue one primary family in the Jacobi constant.
    Continue {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        n: u32,
        /// Family to follow: alpha, beta, gamma or delta.
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        c_max: f64,
        /// Lower end of the range; defaults to C_{L1}(μ).
        #[arg(long)]
        c_min: Option<f64>,
        /// Continuation step in C.
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[command(flatten)]
        tols: Tols,
    },
    /// Sweep C downward and locate all root-count changes (bifurcations).
    Bifurcate {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        c_max: f64,
        /// Lower end of the sweep; defaults to C_{L1}(μ).
        #[arg(long)]
        c_min: Option<f64>,
        /// Sweep step in C.
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        /// Bisection width at which an event energy is accepted.
        #[arg(long, default_value_t = 1e-8)]
        bisect_tol: f64,
        #[command(flatten)]
        tols: Tols,
    },
    /// Full root sets over a range of C (a bifurcation diagram).
    Diagram {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        c_max: f64,
        /// Lower end of the range; defaults to C_{L1}(μ).
        #[arg(long)]
        c_min: Option<f64>,
        /// Number of energy samples.
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[command(flatten)]
        tols: Tols,
    },
    /// The Hill problem (μ → 1 limit): same operations in the energy K.
    Hill {
        #[command(subcommand)]
        cmd: HillCommand,
    },
    /// Closed-form series: M and τ* values, predicted roots and a
    /// cross-check against direct integration.
    Analytic {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        n: u32,
        /// Small parameter ε = 1/√K.
        #[arg(long)]
        eps: f64,
        /// Series truncation order (0, 3, 6, 8, 9 or 10).
        #[arg(long, default_value_t = MAX_ORDER)]
        order: u32,
        #[command(flatten)]
        tols: Tols,
    },
    /// First-bifurcation curve Ĉ(μ, n) over a range of n.
    Chat {
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 2)]
        n_min: u32,
        #[arg(long, default_value_t = 10)]
        n_max: u32,
        /// Bisection width of each event.
        #[arg(long, default_value_t = 1e-4)]
        bisect_tol: f64,
        #[command(flatten)]
        tols: Tols,
    },
}

#[derive(Subcommand, Debug)]
pub enum HillCommand {
    /// Tabulate M(n, θ₀) for the Hill problem at energy K.
    Scan {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: f64,
        #[command(flatten)]
        tols: Tols,
    },
    /// Find and certify all Hill n-EC orbits at energy K.
    Find {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: f64,
        #[command(flatten)]
        tols: Tols,
    },
    /// Locate all Hill root-count changes over [k_min, k_max].
    Bifurcate {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k_max: f64,
        #[arg(long)]
        k_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[arg(long, default_value_t = 1e-8)]
        bisect_tol: f64,
        #[command(flatten)]
        tols: Tols,
    },
    /// First bifurcation value K̂(n).
    Khat {
        #[arg(long)]
        n: u32,
        /// Upper end of the sweep; defaults to 1.3·(2n)^{2/3}.
        #[arg(long)]
        k_max: Option<f64>,
        /// Lower end of the sweep; defaults to 0.85·(2n)^{2/3}.
        #[arg(long)]
        k_min: Option<f64>,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[arg(long, default_value_t = 1e-6)]
        bisect_tol: f64,
        #[command(flatten)]
        tols: Tols,
    },
    /// Energies where primary branches cross home angles and their
    /// symmetry pairs turn into periodic EC orbits.
    Periodic {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k_max: f64,
        #[arg(long)]
        k_min: f64,
        /// Continuation step in K.
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[command(flatten)]
        tols: Tols,
    },
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    match s.to_ascii_lowercase().as_str() {
        "alpha" => Ok(Family::Alpha),
        "beta" => Ok(Family::Beta),
        "gamma" => Ok(Family::Gamma),
        "delta" => Ok(Family::Delta),
        other => Err(format!("unknown family '{other}' (alpha, beta, gamma, delta)")),
    }
}

fn manifest(cmd: &str, out: &Path, t0: Instant) -> Result<()> {
    let m = RunManifest::new(
        cmd,
        std::env::args().collect(),
        vec![out.display().to_string()],
        t0.elapsed().as_secs_f64(),
    );
    m.write_beside(out)
}

/// Run the parsed command. Returns `true` when every reported orbit is
/// certified (vacuously true for commands without certification).
pub fn run(cli: &Cli) -> Result<bool> {
    if let Some(j) = cli.jobs {
        // a second build_global in the same process is a no-op; ignore it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let t0 = Instant::now();
    let dir = &cli.out_dir;
    match &cli.cmd {
        Command::Scan { mu, n, c, tols } => {
            let params = Params::from_c(*mu, *n, *c)?;
            let rows = scan_rtbp(&params, tols.grid, &tols.icfg())?;
            let out = dir.join("scan.csv");
            write_scan_csv(create(&out)?, &rows)?;
            manifest("scan", &out, t0)?;
            let ok = rows.iter().filter(|r| r.status == "ok").count();
            println!("scan: {} of {} samples ok -> {}", ok, rows.len(), out.display());
            Ok(true)
        }
        Command::Find { mu, n, c, tols } => {
            let params = Params::from_c(*mu, *n, *c)?;
            let roots = find_ec_orbits(&params, &tols.fcfg(), &tols.icfg())?;
            let csv = dir.join("roots.csv");
            write_roots_csv(create(&csv)?, &roots)?;
            manifest("find", &csv, t0)?;
            let json = dir.join("roots.json");
            write_json(create(&json)?, &roots)?;
            manifest("find", &json, t0)?;
            for o in &roots.orbits {
                println!(
                    "{}  theta0 = {}  tau* = {}  certified = {}",
                    o.family,
                    fmt_float(o.theta0),
                    fmt_float(o.tau_star),
                    o.certified
                );
            }
            println!(
                "find: {} orbits ({} certified) -> {}, {}",
                roots.orbits.len(),
                roots.orbits.iter().filter(|o| o.certified).count(),
                csv.display(),
                json.display()
            );
            Ok(roots.all_certified())
        }
        Command::Continue { mu, n, family, c_max, c_min, step, tols } => {
            let c_lo = match c_min {
                Some(c) => *c,
                None => cl1(*mu)?,
            };
            let ccfg = ContinuationConfig { step: *step, ..Default::default() };
            let branch = continue_family_rtbp(
                *mu, *n, *family, *c_max, c_lo, &ccfg, &tols.fcfg(), &tols.icfg(),
            )?;
            let out = dir.join(format!("branch_{family}.csv"));
            write_branch_csv(create(&out)?, &branch)?;
            manifest("continue", &out, t0)?;
            println!(
                "continue: family {} over C in [{}, {}], {} samples, end {:?} -> {}",
                family,
                fmt_float(c_lo),
                fmt_float(*c_max),
                branch.samples.len(),
                branch.end,
                out.display()
            );
            Ok(true)
        }
        Command::Bifurcate { mu, n, c_max, c_min, step, bisect_tol, tols } => {
            let sweep = SweepConfig { step: *step, bisect_tol: *bisect_tol, ..Default::default() };
            let events =
                detect_bifurcations_rtbp(*mu, *n, *c_max, *c_min, &sweep, &tols.fcfg(), &tols.icfg())?;
            let out = dir.join("bifurcations.json");
            write_bifurcations_json(create(&out)?, &events)?;
            manifest("bifurcate", &out, t0)?;
            for b in &events {
                println!(
                    "C = {}  {:?}  roots {} -> {}",
                    fmt_float(b.energy),
                    b.kind,
                    b.count_above,
                    b.count_below
                );
            }
            println!("bifurcate: {} events -> {}", events.len(), out.display());
            Ok(true)
        }
        Command::Diagram { mu, n, c_max, c_min, points, tols } => {
            let c_lo = match c_min {
                Some(c) => *c,
                None => cl1(*mu)?,
            };
            if *points < 2 || c_lo >= *c_max {
                return Err(Error::Domain("diagram needs points >= 2 and c_min < c_max".into()));
            }
            let energies: Vec<f64> = (0..*points)
                .map(|i| c_lo + (*c_max - c_lo) * i as f64 / (*points - 1) as f64)
                .collect();
            let pts = diagram(
                |c| NormalizedRtbp::new(*mu, c),
                *n,
                &energies,
                &tols.fcfg(),
                &tols.icfg(),
            )?;
            let out = dir.join("diagram.csv");
            write_diagram_csv(create(&out)?, &pts)?;
            manifest("diagram", &out, t0)?;
            println!("diagram: {} energies -> {}", pts.len(), out.display());
            Ok(true)
        }
        Command::Hill { cmd } => run_hill(cmd, dir, t0),
        Command::Analytic { mu, n, eps, order, tols } => {
            run_analytic(*mu, *n, *eps, *order, tols, dir, t0)
        }
        Command::Chat { mu, n_min, n_max, bisect_tol, tols } => {
            if n_min > n_max {
                return Err(Error::Domain("n_min must not exceed n_max".into()));
            }
            let ns: Vec<u32> = (*n_min..=*n_max).collect();
            let sweep = SweepConfig { bisect_tol: *bisect_tol, ..Default::default() };
            let pts = c_hat_curve(*mu, &ns, &sweep, &tols.fcfg(), &tols.icfg())?;
            let out = dir.join("chat.csv");
            write_chat_csv(create(&out)?, &pts)?;
            manifest("chat", &out, t0)?;
            for p in &pts {
                println!(
                    "n = {:2}  C^ = {}  K^ = {}  L^ = {}",
                    p.n,
                    fmt_float(p.c_hat),
                    fmt_float(p.k_hat),
                    fmt_float(p.l_hat)
                );
            }
            println!("chat: {} points -> {}", pts.len(), out.display());
            Ok(true)
        }
    }
}

fn run_hill(cmd: &HillCommand, dir: &Path, t0: Instant) -> Result<bool> {
    match cmd {
        HillCommand::Scan { n, k, tols } => {
            let sys = crate::hill::ScaledHill::new(*k)?;
            let rows = crate::ecfinder::scan(&sys, *n, &uniform_grid(tols.grid), &tols.icfg());
            let out = dir.join("hill_scan.csv");
            write_scan_csv(create(&out)?, &rows)?;
            manifest("hill scan", &out, t0)?;
            let ok = rows.iter().filter(|r| r.status == "ok").count();
            println!("hill scan: {} of {} samples ok -> {}", ok, rows.len(), out.display());
            Ok(true)
        }
        HillCommand::Find { n, k, tols } => {
            let roots = hill_find_ec(*n, *k, &tols.fcfg(), &tols.icfg())?;
            let out = dir.join("hill_roots.csv");
            write_roots_csv(create(&out)?, &roots)?;
            manifest("hill find", &out, t0)?;
            for o in &roots.orbits {
                println!(
                    "{}  theta0 = {}  certified = {}",
                    o.family,
                    fmt_float(o.theta0),
                    o.certified
                );
            }
            println!("hill find: {} orbits -> {}", roots.orbits.len(), out.display());
            Ok(roots.all_certified())
        }
        HillCommand::Bifurcate { n, k_max, k_min, step, bisect_tol, tols } => {
            let sweep = SweepConfig { step: *step, bisect_tol: *bisect_tol, ..Default::default() };
            let events =
                hill_detect_bifurcations(*n, *k_max, *k_min, &sweep, &tols.fcfg(), &tols.icfg())?;
            let out = dir.join("hill_bifurcations.json");
            write_bifurcations_json(create(&out)?, &events)?;
            manifest("hill bifurcate", &out, t0)?;
            for b in &events {
                println!(
                    "K = {}  {:?}  roots {} -> {}",
                    fmt_float(b.energy),
                    b.kind,
                    b.count_above,
                    b.count_below
                );
            }
            println!("hill bifurcate: {} events -> {}", events.len(), out.display());
            Ok(true)
        }
        HillCommand::Khat { n, k_max, k_min, step, bisect_tol, tols } => {
            let guess = (2.0 * *n as f64).powf(2.0 / 3.0);
            let hi = k_max.unwrap_or(1.3 * guess);
            let lo = k_min.unwrap_or(0.85 * guess);
            let sweep = SweepConfig { step: *step, bisect_tol: *bisect_tol, ..Default::default() };
            let b = hill_k_hat(*n, hi, lo, &sweep, &tols.fcfg(), &tols.icfg())?;
            let out = dir.join("hill_khat.json");
            write_json(create(&out)?, &b)?;
            manifest("hill khat", &out, t0)?;
            println!(
                "hill khat: n = {}  K^ = {}  ({:?}) -> {}",
                n,
                fmt_float(b.energy),
                b.kind,
                out.display()
            );
            Ok(true)
        }
        HillCommand::Periodic { n, k_max, k_min, step, tols } => {
            let ccfg = ContinuationConfig { step: *step, ..Default::default() };
            let events =
                detect_periodic_ec(*n, *k_max, *k_min, &ccfg, &tols.fcfg(), &tols.icfg())?;
            let out = dir.join("hill_periodic.json");
            write_json(create(&out)?, &events)?;
            manifest("hill periodic", &out, t0)?;
            for e in &events {
                println!(
                    "K = {}  branch {} crossed angle {}  {:?}  pair ({}, {})",
                    fmt_float(e.k),
                    e.branch,
                    fmt_float(e.angle),
                    e.kind,
                    e.pair.0,
                    e.pair.1
                );
            }
            println!("hill periodic: {} events -> {}", events.len(), out.display());
            Ok(true)
        }
    }
}

fn run_analytic(
    mu: f64,
    n: u32,
    eps: f64,
    order: u32,
    tols: &Tols,
    dir: &Path,
    t0: Instant,
) -> Result<bool> {
    if eps <= 0.0 {
        return Err(Error::Domain("eps must be positive".into()));
    }
    let k = 1.0 / (eps * eps);
    let params = Params::from_k(mu, n, k)?;
    let sys = NormalizedRtbp::from_params(&params)?;
    let icfg = tols.icfg();
    let out = dir.join("analytic.csv");
    let mut w = create(&out)?;
    use std::io::Write as _;
    writeln!(w, "theta0,m_series,m_integrated,tau_star_series,tau_star_integrated")?;
    let grid = uniform_grid(tols.grid.min(512));
    let mut worst = 0.0f64;
    for &t in &grid {
        let ms = momentum_series(n, t, mu, eps, order)?;
        let ts = tau_star_series(n, t, mu, eps, order)?;
        let sample = momentum_at(&sys, n, t, &icfg)?;
        worst = worst.max((ms - sample.m).abs());
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_float(t),
            fmt_float(ms),
            fmt_float(sample.m),
            fmt_float(ts),
            fmt_float(sample.tau_star)
        )?;
    }
    drop(w);
    manifest("analytic", &out, t0)?;
    match predicted_roots(n, mu, eps, order)? {
        SeriesRoots::Degenerate => println!("analytic: momentum series vanishes identically"),
        SeriesRoots::Roots(r) => {
            let list: Vec<String> = r.iter().map(|&x| fmt_float(x)).collect();
            println!("analytic: predicted roots [{}]", list.join(", "));
        }
    }
    println!(
        "analytic: max |M_series - M_integrated| = {} over {} angles -> {}",
        fmt_float(worst),
        grid.len(),
        out.display()
    );
    Ok(true)
}

/// Entry point used by the binary: parse, run, map errors and
/// certification failures to a nonzero exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("error: at least one orbit failed certification");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses() {
        let cli = Cli::parse_from([
            "ecorbits", "find", "--mu", "0.1", "--n", "2", "--c", "3.8", "--grid", "128",
        ]);
        match cli.cmd {
            Command::Find { mu, n, c, ref tols } => {
                assert_eq!((mu, n, c, tols.grid), (0.1, 2, 3.8, 128));
            }
            _ => panic!("wrong subcommand"),
        }
        assert_eq!(cli.out_dir, PathBuf::from("out"));
    }

    #[test]
    fn family_parsing() {
        assert_eq!(parse_family("gamma").unwrap(), Family::Gamma);
        assert_eq!(parse_family("BETA").unwrap(), Family::Beta);
        assert!(parse_family("epsilon").is_err());
    }

    #[test]
    fn hill_subcommand_parses() {
        let cli = Cli::parse_from([
            "ecorbits", "hill", "khat", "--n", "5", "--bisect-tol", "1e-4",
        ]);
        match cli.cmd {
            Command::Hill { cmd: HillCommand::Khat { n, bisect_tol, .. } } => {
                assert_eq!(n, 5);
                assert_eq!(bisect_tol, 1e-4);
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn find_writes_outputs_and_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let cli = Cli::parse_from([
            "ecorbits",
            "--out-dir",
            tmp.path().to_str().unwrap(),
            "find",
            "--mu",
            "0.1",
            "--n",
            "1",
            "--c",
            "5.0",
            "--grid",
            "128",
        ]);
        assert!(run(&cli).unwrap());
        let csv = std::fs::read_to_string(tmp.path().join("roots.csv")).unwrap();
        assert!(csv.starts_with("family,theta0,"));
        assert_eq!(csv.lines().count(), 5, "{csv}");
        assert!(tmp.path().join("roots.json").exists());
        let man: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(tmp.path().join("roots.csv.manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(man["command"], "find");
    }
}
