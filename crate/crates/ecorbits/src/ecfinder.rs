//! Location and certification of n-EC orbits as zeros of the angular
//! momentum M(n, θ₀) at the n-th radial minimum.
//!
//! The momentum is π-periodic in θ₀, so everything works on the circle
//! [0, π). A dense scan brackets sign changes; brackets are bisected to
//! machine-level θ₀ accuracy and each zero is certified as a genuine
//! collision by checking that the radial minimum actually reaches the
//! primary. Near pitchfork bifurcations two extra zeros hide inside a single
//! grid cell without changing the endpoint signs, so same-sign dips of |M|
//! are additionally probed with a golden-section search.

use crate::dynamics::{EjectionSystem, NormalizedRtbp, Params};
use crate::error::{Error, Result};
use crate::integrator::{angular_momentum, propagate_to_nth_min, IntegratorConfig};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// One evaluation of the momentum functional.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentumSample {
    /// Ejection angle.
    pub theta0: f64,
    /// Angular momentum M(n, θ₀) at the n-th radial minimum.
    pub m: f64,
    /// Time τ* of the n-th radial minimum.
    pub tau_star: f64,
    /// Squared distance ρ = U² + V² at the minimum.
    pub r_min: f64,
    /// Largest first-integral residual seen along the trajectory.
    pub energy_residual: f64,
}

/// A scan row: either a sample or the failure that replaced it.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub theta0: f64,
    pub m: Option<f64>,
    pub tau_star: Option<f64>,
    pub r_min: Option<f64>,
    /// "ok" or a human-readable failure description.
    pub status: String,
}

/// Family label of an n-EC orbit. The four primary families continue the
/// large-energy zeros near θ₀ = 0 (γ), π/4 (δ), π/2 (α) and 3π/4 (β);
/// additional zeros born at bifurcations are labeled `Extra`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    Alpha,
    Beta,
    Gamma,
    Delta,
    Extra,
}

impl Family {
    /// Label of the primary family whose large-energy angle is mπ/4.
    pub fn from_seed_index(m: usize) -> Family {
        [Family::Gamma, Family::Delta, Family::Alpha, Family::Beta][m % 4]
    }

    /// Large-energy (home) ejection angle of a primary family.
    pub fn home_angle(&self) -> Option<f64> {
        match self {
            Family::Gamma => Some(0.0),
            Family::Delta => Some(PI / 4.0),
            Family::Alpha => Some(PI / 2.0),
            Family::Beta => Some(3.0 * PI / 4.0),
            Family::Extra => None,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::Alpha => "alpha",
            Family::Beta => "beta",
            Family::Gamma => "gamma",
            Family::Delta => "delta",
            Family::Extra => "extra",
        };
        f.write_str(s)
    }
}

/// A located and certified n-EC orbit.
#[derive(Debug, Clone, Serialize)]
pub struct EcOrbit {
    /// Ejection angle of the orbit, in [0, π).
    pub theta0: f64,
    pub family: Family,
    /// Collision time τ* (n-th radial minimum).
    pub tau_star: f64,
    /// |M(θ₀)| left after refinement.
    pub momentum_residual: f64,
    /// Distance √ρ to the primary at the minimum; a certified collision
    /// has this below the certification threshold.
    pub collision_residual: f64,
    /// Largest first-integral residual along the certification trajectory.
    pub energy_residual: f64,
    /// Whether the zero certified as a genuine collision.
    pub certified: bool,
}

/// Outcome of a root search over [0, π).
#[derive(Debug, Clone, Serialize)]
pub struct EcRoots {
    /// True when M vanishes identically (two-body limit μ = 0): every angle
    /// gives an EC orbit and isolated roots are meaningless.
    pub degenerate: bool,
    /// Certified (and possibly uncertified) zeros, sorted by θ₀.
    pub orbits: Vec<EcOrbit>,
    /// Angles where |M| dips below the tangency floor without changing
    /// sign: grazing zeros at the edge of a tangency bifurcation.
    pub tangencies: Vec<f64>,
}

impl EcRoots {
    pub fn all_certified(&self) -> bool {
        !self.degenerate && self.orbits.iter().all(|o| o.certified)
    }
}

/// Tunables for the root search.
#[derive(Debug, Clone, Copy)]
pub struct FinderConfig {
    /// Initial number of grid cells over [0, π).
    pub grid: usize,
    /// Grid size is doubled (up to this cap) when roots crowd closer than
    /// four cells.
    pub max_grid: usize,
    /// Bisection stops when the bracket is narrower than this.
    pub theta_tol: f64,
    /// A zero certifies as a collision when √ρ(τ*) is below this.
    pub certify_threshold: f64,
    /// Integrator tolerance used for the certification run.
    pub certify_tol: f64,
    /// |M| dips below this without a sign change are reported as tangencies.
    pub tangency_floor: f64,
    /// The scan is declared degenerate when max |M| stays below this.
    pub degenerate_floor: f64,
}

impl Default for FinderConfig {
    fn default() -> Self {
        FinderConfig {
            grid: 1024,
            max_grid: 8192,
            theta_tol: 1e-12,
            certify_threshold: 1e-6,
            certify_tol: 1e-13,
            tangency_floor: 1e-8,
            degenerate_floor: 1e-9,
        }
    }
}

// ---------------------------------------------------------------------------
// Momentum evaluation
// ---------------------------------------------------------------------------

/// Evaluate the momentum functional for one ejection angle.
pub fn momentum_at<S: EjectionSystem>(
    sys: &S,
    n: u32,
    theta0: f64,
    cfg: &IntegratorConfig,
) -> Result<MomentumSample> {
    let y0 = sys.ejection_state(theta0);
    let ev = propagate_to_nth_min(sys, &y0, n, None, cfg)
        .map_err(|e| e.at_sample(theta0, f64::NAN))?;
    Ok(MomentumSample {
        theta0,
        m: angular_momentum(&ev.state),
        tau_star: ev.tau,
        r_min: ev.state[0] * ev.state[0] + ev.state[1] * ev.state[1],
        energy_residual: ev.max_residual,
    })
}

/// Scan M(n, θ₀) over an angle grid in parallel, preserving grid order.
/// Failures at individual angles become rows with an error status instead
/// of aborting the whole scan.
pub fn scan<S: EjectionSystem>(
    sys: &S,
    n: u32,
    thetas: &[f64],
    cfg: &IntegratorConfig,
) -> Vec<ScanRow> {
    thetas
        .par_iter()
        .map(|&t| match momentum_at(sys, n, t, cfg) {
            Ok(s) => ScanRow {
                theta0: t,
                m: Some(s.m),
                tau_star: Some(s.tau_star),
                r_min: Some(s.r_min),
                status: "ok".into(),
            },
            Err(e) => ScanRow {
                theta0: t,
                m: None,
                tau_star: None,
                r_min: None,
                status: e.to_string(),
            },
        })
        .collect()
}

/// Uniform scan grid over [0, π) with `count` points.
pub fn uniform_grid(count: usize) -> Vec<f64> {
    (0..count).map(|i| PI * i as f64 / count as f64).collect()
}

// ---------------------------------------------------------------------------
// Root search
// ---------------------------------------------------------------------------

/// Bisect a sign change of M over [lo, hi] down to `theta_tol`.
/// `m_lo` must have the opposite sign of the value at `hi`.
pub fn refine_root<S: EjectionSystem>(
    sys: &S,
    n: u32,
    mut lo: f64,
    mut hi: f64,
    mut m_lo: f64,
    theta_tol: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    if m_lo == 0.0 {
        return Ok(lo);
    }
    while hi - lo > theta_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at floating-point resolution
        }
        let m_mid = momentum_at(sys, n, mid, cfg)?.m;
        if m_mid == 0.0 {
            return Ok(mid);
        }
        if m_lo * m_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            m_lo = m_mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section minimization of f over [a, b]; returns (argmin, min).
fn golden_min(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    if f1 <= f2 {
        Ok((x1, f1))
    } else {
        Ok((x2, f2))
    }
}

struct Dip {
    theta: f64,
    value: f64, // signed M at the dip bottom
}

/// Probe a same-sign interval whose interior |M| dips toward zero: minimize
/// sign·M; a negative minimum reveals a hidden root pair, a small positive
/// one a tangency.
fn probe_dip<S: EjectionSystem>(
    sys: &S,
    n: u32,
    a: f64,
    b: f64,
    sign: f64,
    cfg: &IntegratorConfig,
    theta_tol: f64,
) -> Result<Dip> {
    let f = |t: f64| momentum_at(sys, n, t, cfg).map(|s| sign * s.m);
    let (t, v) = golden_min(f, a, b, (theta_tol * 1e3).max(1e-10))?;
    Ok(Dip { theta: t, value: sign * v })
}

/// Find all zeros of M(n, θ₀) over [0, π) for a system behind the shared
/// ejection interface.
pub fn find_roots<S: EjectionSystem>(
    sys: &S,
    n: u32,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<EcRoots> {
    let mut grid_n = fcfg.grid;
    loop {
        let outcome = find_roots_on_grid(sys, n, grid_n, fcfg, icfg, true, false)?;
        match outcome {
            GridOutcome::Crowded if grid_n < fcfg.max_grid => {
                grid_n *= 2;
            }
            GridOutcome::Crowded => {
                return Err(Error::Sweep(format!(
                    "roots remain closer than 4 cells at the {grid_n}-point grid cap"
                )))
            }
            GridOutcome::Done(r) => return Ok(r),
        }
    }
}

enum GridOutcome {
    Done(EcRoots),
    Crowded,
}

/// Bracketed roots on a grid, before refinement.
struct BracketSet {
    degenerate: bool,
    /// (lo, hi, M(lo)) triples; lo == hi marks an exact grid-point zero.
    brackets: Vec<(f64, f64, f64)>,
    tangencies: Vec<f64>,
}

/// Scan the grid and bracket every zero of M, including pairs hidden inside
/// a single cell (probed via the interior dips of |M|).
/// True when an error means "no n-th minimum exists at this sample" (escape
/// through an open Hill region or an exhausted time/step budget) rather
/// than a numerical failure. Such samples are tolerated as gaps in a scan.
fn sample_lost(e: &Error) -> bool {
    match e {
        Error::AtSample { source, .. } => sample_lost(source),
        Error::Escape { .. }
        | Error::MissingEvent { .. }
        | Error::MaxStepsExceeded { .. }
        | Error::StepSizeUnderflow { .. } => true,
        _ => false,
    }
}

fn bracket_roots<S: EjectionSystem>(
    sys: &S,
    n: u32,
    grid_n: usize,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<BracketSet> {
    let thetas = uniform_grid(grid_n);
    let samples: Vec<Result<MomentumSample>> = thetas
        .par_iter()
        .map(|&t| momentum_at(sys, n, t, icfg))
        .collect();
    // None marks angles whose ejection orbit never reaches the n-th minimum
    // (escapes); roots are only sought inside contiguous valid stretches.
    let mut vals: Vec<Option<f64>> = Vec::with_capacity(grid_n);
    for s in samples {
        match s {
            Ok(s) => vals.push(Some(s.m)),
            Err(e) if sample_lost(&e) => vals.push(None),
            Err(e) => return Err(Error::Sweep(format!("momentum scan failed: {e}"))),
        }
    }
    if vals.iter().all(|v| v.is_none()) {
        return Err(Error::Sweep(
            "no ejection angle reaches the requested radial minimum".into(),
        ));
    }
    let scale = vals.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
    if scale < fcfg.degenerate_floor {
        return Ok(BracketSet { degenerate: true, brackets: Vec::new(), tangencies: Vec::new() });
    }

    let cell = PI / grid_n as f64;
    // cyclic sign-change brackets (theta and wrapped successor)
    let mut brackets: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..grid_n {
        let (Some(ma), Some(mb)) = (vals[i], vals[(i + 1) % grid_n]) else {
            continue;
        };
        let a = thetas[i];
        if ma == 0.0 {
            brackets.push((a, a, 0.0));
        } else if ma * mb < 0.0 {
            brackets.push((a, a + cell, ma));
        }
    }

    // hidden root pairs: probe the interior dips of |M| on same-sign
    // stretches. An interior |M| minimum that is small against the sweep
    // scale is probed over both adjacent cells; a sample right next to a
    // sign change is probed over its other (clean) cell, because a root
    // pair there hides behind the neighboring crossing and never shows up
    // as a discrete |M| minimum.
    let mut tangencies: Vec<f64> = Vec::new();
    // (a, b, signed reference value, may record a tangency)
    let mut probes: Vec<(f64, f64, f64, bool)> = Vec::new();
    for i in 0..grid_n {
        let Some(here) = vals[i] else { continue };
        if here == 0.0 {
            continue;
        }
        let prev = vals[(i + grid_n - 1) % grid_n];
        let next = vals[(i + 1) % grid_n];
        let t = thetas[i];
        let left_change = prev.is_some_and(|p| p == 0.0 || p * here < 0.0);
        let right_change = next.is_some_and(|q| q == 0.0 || q * here < 0.0);
        match (left_change, right_change) {
            (true, true) => {}
            (true, false) if next.is_some() => probes.push((t, t + cell, here, false)),
            (false, true) if prev.is_some() => probes.push((t - cell, t, here, false)),
            (false, false) => {
                if let (Some(p), Some(q)) = (prev, next) {
                    if here.abs() <= p.abs() && here.abs() <= q.abs() && here.abs() < 0.05 * scale
                    {
                        probes.push((t - cell, t + cell, here, true));
                    }
                }
            }
            _ => {}
        }
    }
    let dips: Vec<Result<Dip>> = probes
        .par_iter()
        .map(|&(a, b, here, _)| probe_dip(sys, n, a, b, here.signum(), icfg, fcfg.theta_tol))
        .collect();
    for ((a, b, here, may_tangency), d) in probes.iter().zip(dips) {
        let d = match d {
            Ok(d) => d,
            Err(e) if sample_lost(&e) => continue, // probe touched an escaping angle
            Err(e) => return Err(e),
        };
        if d.value * here < 0.0 {
            // the dip crosses zero: two roots hide inside (a, b)
            brackets.push((*a, d.theta, *here));
            brackets.push((d.theta, *b, d.value));
        } else if *may_tangency && d.value.abs() < fcfg.tangency_floor {
            tangencies.push(wrap_theta(d.theta));
        }
    }
    Ok(BracketSet { degenerate: false, brackets, tangencies })
}

/// Count the zeros of M over [0, π) without certifying them. Used by
/// bifurcation sweeps, where only the count matters; root crowding is
/// tolerated because the crowded roots are still counted individually.
pub fn count_roots<S: EjectionSystem>(
    sys: &S,
    n: u32,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<usize> {
    match find_roots_on_grid(sys, n, fcfg.grid, fcfg, icfg, false, true)? {
        GridOutcome::Done(r) if r.degenerate => {
            Err(Error::Sweep("cannot count roots of an identically zero momentum".into()))
        }
        GridOutcome::Done(r) => Ok(r.orbits.len()),
        GridOutcome::Crowded => unreachable!("crowding tolerated in counting mode"),
    }
}

fn find_roots_on_grid<S: EjectionSystem>(
    sys: &S,
    n: u32,
    grid_n: usize,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
    certify: bool,
    allow_crowded: bool,
) -> Result<GridOutcome> {
    let set = bracket_roots(sys, n, grid_n, fcfg, icfg)?;
    if set.degenerate {
        return Ok(GridOutcome::Done(EcRoots {
            degenerate: true,
            orbits: Vec::new(),
            tangencies: Vec::new(),
        }));
    }
    let cell = PI / grid_n as f64;
    let brackets = set.brackets;
    let mut tangencies = set.tangencies;

    // refine all brackets in parallel
    let refined: Vec<Result<f64>> = brackets
        .par_iter()
        .map(|&(lo, hi, m_lo)| {
            if lo == hi {
                Ok(lo)
            } else {
                refine_root(sys, n, lo, hi, m_lo, fcfg.theta_tol, icfg)
            }
        })
        .collect();
    let mut roots: Vec<f64> = Vec::with_capacity(refined.len());
    for r in &refined {
        match r {
            Ok(r) => roots.push(wrap_theta(*r)),
            // a bracket can straddle the boundary of the valid ejection-angle
            // region (beyond it trajectories escape before the n-th minimum);
            // bisection then lands on an unevaluable angle — drop the bracket
            Err(e) if sample_lost(e) => continue,
            Err(e) => return Err(Error::Sweep(format!("root refinement failed: {e}"))),
        }
    }

    // flank probing: near a pitchfork three roots share one cell but leave
    // only a single endpoint sign change, so bisection lands on one of them
    // and its two neighbors stay invisible to the scan. Probe both flanks
    // of every refined root for additional crossings.
    let gap = 1e-8;
    let flanks: Vec<(f64, f64)> = brackets
        .iter()
        .zip(refined.iter())
        .filter(|((lo, hi, _), r)| lo != hi && r.is_ok())
        .flat_map(|(&(lo, hi, _), r)| {
            let r = *r.as_ref().unwrap();
            [(lo, r - gap), (r + gap, hi)]
        })
        .filter(|(a, b)| b > a)
        .collect();
    let probed: Vec<Result<Vec<f64>>> = flanks
        .par_iter()
        .map(|&(a, b)| -> Result<Vec<f64>> {
            let (ma, mb) = match (momentum_at(sys, n, a, icfg), momentum_at(sys, n, b, icfg)) {
                (Ok(sa), Ok(sb)) => (sa.m, sb.m),
                (Err(e), _) | (_, Err(e)) if sample_lost(&e) => return Ok(Vec::new()),
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            if ma == 0.0 || mb == 0.0 {
                return Ok(Vec::new()); // endpoint zero: already captured
            }
            if ma * mb < 0.0 {
                return match refine_root(sys, n, a, b, ma, fcfg.theta_tol, icfg) {
                    Ok(r) => Ok(vec![r]),
                    Err(e) if sample_lost(&e) => Ok(Vec::new()),
                    Err(e) => Err(e),
                };
            }
            let sign = ma.signum();
            let d = match probe_dip(sys, n, a, b, sign, icfg, fcfg.theta_tol) {
                Ok(d) => d,
                Err(e) if sample_lost(&e) => return Ok(Vec::new()),
                Err(e) => return Err(e),
            };
            if d.value * ma < 0.0 {
                let mut out = Vec::with_capacity(2);
                for (lo, hi, m_lo) in [(a, d.theta, ma), (d.theta, b, d.value)] {
                    match refine_root(sys, n, lo, hi, m_lo, fcfg.theta_tol, icfg) {
                        Ok(r) => out.push(r),
                        Err(e) if sample_lost(&e) => {}
                        Err(e) => return Err(e),
                    }
                }
                Ok(out)
            } else {
                Ok(Vec::new())
            }
        })
        .collect();
    for p in probed {
        for r in p? {
            roots.push(wrap_theta(r));
        }
    }

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 10.0 * fcfg.theta_tol);
    // cyclic crowding check: refuse this grid if two roots share < 4 cells
    if !allow_crowded && grid_n < fcfg.max_grid && roots.len() >= 2 {
        for i in 0..roots.len() {
            let next = roots[(i + 1) % roots.len()];
            let gap = if i + 1 == roots.len() {
                next + PI - roots[i]
            } else {
                next - roots[i]
            };
            if gap < 4.0 * cell {
                return Ok(GridOutcome::Crowded);
            }
        }
    }

    // certify with a tighter integration (counting mode reuses the scan
    // tolerance: only the number of roots matters there)
    let strict = if certify {
        IntegratorConfig { abs_tol: fcfg.certify_tol, rel_tol: fcfg.certify_tol, ..*icfg }
    } else {
        *icfg
    };
    let certified: Vec<Result<MomentumSample>> = roots
        .par_iter()
        .map(|&t| momentum_at(sys, n, t, &strict))
        .collect();
    let labels = label_roots(&roots);
    let mut orbits = Vec::with_capacity(roots.len());
    for ((root, fam), samp) in roots.iter().zip(labels).zip(certified) {
        let s = match samp {
            Ok(s) => s,
            // tighter certification tolerance nudged a boundary root into the
            // escaping regime: not a valid EC orbit, drop it
            Err(e) if sample_lost(&e) => continue,
            Err(e) => return Err(e),
        };
        let coll = s.r_min.max(0.0).sqrt();
        orbits.push(EcOrbit {
            theta0: *root,
            family: fam,
            tau_star: s.tau_star,
            momentum_residual: s.m.abs(),
            collision_residual: coll,
            energy_residual: s.energy_residual,
            certified: coll <= fcfg.certify_threshold,
        });
    }
    tangencies.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(GridOutcome::Done(EcRoots { degenerate: false, orbits, tangencies }))
}

fn wrap_theta(t: f64) -> f64 {
    let mut x = t % PI;
    if x < 0.0 {
        x += PI;
    }
    x
}

/// Assign family labels: with exactly four roots each goes to the nearest
/// home angle mπ/4 (γ, δ, α, β in that order) when that assignment is a
/// bijection; otherwise, and for any extra roots, `Extra` is used.
pub fn label_roots(roots: &[f64]) -> Vec<Family> {
    if roots.len() == 4 {
        let mut seeds = [false; 4];
        let mut labels = Vec::with_capacity(4);
        for &r in roots {
            // cyclic distance to m*pi/4 over the period pi
            let m = ((r / (PI / 4.0)).round() as i64).rem_euclid(4) as usize;
            labels.push(m);
        }
        let bijective = labels.iter().all(|&m| {
            let fresh = !seeds[m];
            seeds[m] = true;
            fresh
        });
        if bijective {
            return labels.into_iter().map(Family::from_seed_index).collect();
        }
        // fall back to rank order starting at the root closest to 0
        return (0..4).map(Family::from_seed_index).collect();
    }
    vec![Family::Extra; roots.len()]
}

// ---------------------------------------------------------------------------
// RTBP front end
// ---------------------------------------------------------------------------

/// Scan the momentum functional of the normalized RTBP on a uniform grid.
pub fn scan_rtbp(params: &Params, grid_n: usize, cfg: &IntegratorConfig) -> Result<Vec<ScanRow>> {
    let sys = NormalizedRtbp::from_params(params)?;
    Ok(scan(&sys, params.n(), &uniform_grid(grid_n), cfg))
}

/// Find all n-EC orbits of the normalized RTBP at the given parameters.
pub fn find_ec_orbits(
    params: &Params,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<EcRoots> {
    let sys = NormalizedRtbp::from_params(params)?;
    find_roots(&sys, params.n(), fcfg, icfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::momentum_series;

    fn icfg() -> IntegratorConfig {
        IntegratorConfig { abs_tol: 1e-11, rel_tol: 1e-11, ..Default::default() }
    }

    fn fcfg() -> FinderConfig {
        FinderConfig { grid: 256, ..Default::default() }
    }

    #[test]
    fn momentum_matches_series_at_small_eps() {
        let p = Params::from_k(0.1, 2, 1.0 / (0.15f64 * 0.15)).unwrap();
        let sys = NormalizedRtbp::from_params(&p).unwrap();
        let s = momentum_at(&sys, 2, 0.4, &icfg()).unwrap();
        let pred = momentum_series(2, 0.4, 0.1, p.eps(), 10).unwrap();
        assert!((s.m - pred).abs() < 5e-7, "{} vs {pred}", s.m);
        assert!((s.tau_star - 2.0 * PI).abs() < 0.01);
    }

    #[test]
    fn four_primary_roots_at_large_energy() {
        // mu = 0.1, n = 2, C large: exactly the four primary families near
        // m*pi/4 in gamma, delta, alpha, beta order
        let p = Params::from_c(0.1, 2, 5.0).unwrap();
        let roots = find_ec_orbits(&p, &fcfg(), &icfg()).unwrap();
        assert!(!roots.degenerate);
        assert_eq!(roots.orbits.len(), 4, "{roots:?}");
        let fams: Vec<Family> = roots.orbits.iter().map(|o| o.family).collect();
        assert_eq!(fams, vec![Family::Gamma, Family::Delta, Family::Alpha, Family::Beta]);
        for o in &roots.orbits {
            assert!(o.certified, "{o:?}");
            assert!(o.collision_residual < 1e-7);
            assert!(o.momentum_residual < 1e-9);
        }
    }

    #[test]
    fn roots_match_series_prediction_at_small_eps() {
        // at eps = 0.15 the refined roots must agree with the zeros of the
        // order-10 momentum series to O(eps^{8})-level accuracy
        let eps = 0.15f64;
        let p = Params::from_k(0.1, 2, 1.0 / (eps * eps)).unwrap();
        let roots = find_ec_orbits(&p, &fcfg(), &icfg()).unwrap();
        assert_eq!(roots.orbits.len(), 4, "{roots:?}");
        let pred = match crate::analytic::predicted_roots(2, 0.1, eps, 10).unwrap() {
            crate::analytic::SeriesRoots::Roots(r) => r,
            _ => panic!("series unexpectedly degenerate"),
        };
        assert_eq!(pred.len(), 4);
        for (o, p) in roots.orbits.iter().zip(&pred) {
            assert!((o.theta0 - p).abs() < 2e-3, "{} vs {p}", o.theta0);
        }
    }

    #[test]
    fn degenerate_at_mu_zero() {
        let p = Params::from_c(0.0, 2, 4.0).unwrap();
        let roots = find_ec_orbits(&p, &fcfg(), &icfg()).unwrap();
        assert!(roots.degenerate);
        assert!(roots.orbits.is_empty());
    }

    #[test]
    fn labels_fall_back_for_other_counts() {
        assert_eq!(label_roots(&[0.1, 0.2]), vec![Family::Extra, Family::Extra]);
        let l = label_roots(&[0.01, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0]);
        assert_eq!(l[0], Family::Gamma);
        assert_eq!(l[3], Family::Beta);
    }

    #[test]
    fn scan_rows_are_ordered_and_ok() {
        let p = Params::from_c(0.1, 1, 5.0).unwrap();
        let rows = scan_rtbp(&p, 16, &icfg()).unwrap();
        assert_eq!(rows.len(), 16);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.theta0, PI * i as f64 / 16.0);
            assert_eq!(r.status, "ok");
            assert!(r.r_min.unwrap() >= 0.0);
        }
    }
}
