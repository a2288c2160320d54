//! Continuation of n-EC families in the energy parameter, bifurcation
//! detection and refinement.
//!
//! Everything here is generic over a *system constructor* `Fn(energy) ->
//! system`, so the same machinery serves the RTBP (energy = Jacobi constant
//! C) and the Hill problem (energy = the scaled constant K).

use crate::dynamics::{cl1, NormalizedRtbp, Params};
use crate::ecfinder::{
    count_roots, find_ec_orbits, find_roots, momentum_at, refine_root, EcRoots, Family,
    FinderConfig,
};
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::{EjectionSystem};
use serde::Serialize;
use std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Family continuation
// ---------------------------------------------------------------------------

/// One continued point of a family branch.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchSample {
    pub energy: f64,
    pub theta0: f64,
    pub tau_star: f64,
    /// √ρ at the n-th radial minimum.
    pub collision_residual: f64,
}

/// How a continuation run ended.
#[derive(Debug, Clone, Serialize)]
pub enum BranchEnd {
    /// The requested end energy was reached.
    ReachedEnd,
    /// The branch could not be followed past this energy (typically a
    /// collapse or a fold), even with the energy step at its minimum.
    Terminated { energy: f64, reason: String },
}

/// A continued family branch; samples are ordered from the start energy
/// toward the end energy.
#[derive(Debug, Clone, Serialize)]
pub struct Branch {
    pub family: Family,
    pub samples: Vec<BranchSample>,
    pub end: BranchEnd,
}

/// Continuation tunables.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationConfig {
    /// Initial energy step magnitude.
    pub step: f64,
    /// Smallest step before the branch is declared terminated.
    pub min_step: f64,
    /// Initial half-width of the θ₀ bracket around the secant prediction.
    pub window: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig { step: 1e-2, min_step: 1e-6, window: 1e-3 }
    }
}

fn sample_at<S: EjectionSystem>(
    sys: &S,
    n: u32,
    energy: f64,
    theta0: f64,
    icfg: &IntegratorConfig,
) -> Result<BranchSample> {
    let s = momentum_at(sys, n, theta0, icfg)?;
    Ok(BranchSample {
        energy,
        theta0,
        tau_star: s.tau_star,
        collision_residual: s.r_min.max(0.0).sqrt(),
    })
}

/// Try to bracket and refine the branch root near `pred` at one energy.
pub(crate) fn locate_near<S: EjectionSystem>(
    sys: &S,
    n: u32,
    pred: f64,
    window: f64,
    theta_tol: f64,
    icfg: &IntegratorConfig,
) -> Result<Option<f64>> {
    let mut w = window;
    // expand the window a few times before giving up; cap well below the
    // π/4 family spacing so the search cannot jump to a neighboring branch
    while w <= PI / 16.0 {
        let (a, b) = (pred - w, pred + w);
        let ma = momentum_at(sys, n, a, icfg)?.m;
        let mb = momentum_at(sys, n, b, icfg)?.m;
        if ma == 0.0 {
            return Ok(Some(a));
        }
        if ma * mb < 0.0 {
            return Ok(Some(refine_root(sys, n, a, b, ma, theta_tol, icfg)?));
        }
        w *= 2.0;
    }
    Ok(None)
}

/// Continue a single family branch from (`start_energy`, `start_theta`)
/// toward `end_energy` with secant prediction and bracketed bisection.
/// The energy step halves when the root is lost and the branch terminates
/// once the step cannot shrink further.
pub fn continue_branch<S, F>(
    make_sys: F,
    n: u32,
    family: Family,
    start_energy: f64,
    start_theta: f64,
    end_energy: f64,
    ccfg: &ContinuationConfig,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<Branch>
where
    S: EjectionSystem,
    F: Fn(f64) -> Result<S>,
{
    if start_energy == end_energy {
        return Err(Error::Domain("continuation range is empty".into()));
    }
    let dir = (end_energy - start_energy).signum();
    let sys0 = make_sys(start_energy)?;
    let mut samples = vec![sample_at(&sys0, n, start_energy, start_theta, icfg)?];
    let mut step = ccfg.step.min((end_energy - start_energy).abs());
    let mut end = BranchEnd::ReachedEnd;

    'outer: while (samples.last().unwrap().energy - end_energy) * dir < 0.0 {
        let last = *samples.last().unwrap();
        loop {
            let mut e = last.energy + dir * step;
            if (e - end_energy) * dir > 0.0 {
                e = end_energy;
            }
            // secant prediction from the last two points
            let pred = if samples.len() >= 2 {
                let prev = samples[samples.len() - 2];
                let slope = (last.theta0 - prev.theta0) / (last.energy - prev.energy);
                last.theta0 + slope * (e - last.energy)
            } else {
                last.theta0
            };
            let sys = make_sys(e)?;
            match locate_near(&sys, n, pred, ccfg.window, fcfg.theta_tol, icfg)? {
                Some(theta) => {
                    let s = sample_at(&sys, n, e, theta, icfg)?;
                    if s.collision_residual > fcfg.certify_threshold {
                        end = BranchEnd::Terminated {
                            energy: e,
                            reason: format!(
                                "momentum zero stopped certifying as a collision \
                                 (residual {:.3e})",
                                s.collision_residual
                            ),
                        };
                        break 'outer;
                    }
                    samples.push(s);
                    // relax the step back toward the nominal size
                    step = (step * 2.0).min(ccfg.step);
                    break;
                }
                None => {
                    step *= 0.5;
                    if step < ccfg.min_step {
                        end = BranchEnd::Terminated {
                            energy: last.energy,
                            reason: "root lost; energy step at minimum".into(),
                        };
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(Branch { family, samples, end })
}

/// Continue one primary RTBP family in the Jacobi constant, starting from
/// the root set at `c_start`.
pub fn continue_family_rtbp(
    mu: f64,
    n: u32,
    family: Family,
    c_start: f64,
    c_end: f64,
    ccfg: &ContinuationConfig,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<Branch> {
    let params = Params::from_c(mu, n, c_start)?;
    let roots = find_ec_orbits(&params, fcfg, icfg)?;
    let start = roots
        .orbits
        .iter()
        .find(|o| o.family == family)
        .ok_or_else(|| {
            Error::Sweep(format!("family {family} not found at C = {c_start} ({roots:?})"))
        })?;
    continue_branch(
        |c| NormalizedRtbp::new(mu, c),
        n,
        family,
        c_start,
        start.theta0,
        c_end,
        ccfg,
        fcfg,
        icfg,
    )
}

// ---------------------------------------------------------------------------
// Bifurcation diagrams
// ---------------------------------------------------------------------------

/// Root set at one energy of a diagram sweep.
#[derive(Debug, Clone, Serialize)]
pub struct DiagramPoint {
    pub energy: f64,
    pub roots: EcRoots,
}

/// Full root sets over a list of energies (a bifurcation diagram in the
/// (energy, θ₀) plane).
pub fn diagram<S, F>(
    make_sys: F,
    n: u32,
    energies: &[f64],
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<Vec<DiagramPoint>>
where
    S: EjectionSystem,
    F: Fn(f64) -> Result<S>,
{
    energies
        .iter()
        .map(|&e| {
            let sys = make_sys(e)?;
            Ok(DiagramPoint { energy: e, roots: find_roots(&sys, n, fcfg, icfg)? })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Bifurcation detection
// ---------------------------------------------------------------------------

/// Kind of a root-count change along a descending energy sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BifurcationKind {
    /// Two new roots split off an existing branch (count +2, new roots
    /// clustered at a surviving root).
    Pitchfork,
    /// New roots born away from every existing branch (tangency of M).
    TangencyBirth,
    /// Roots disappear (count decrease).
    Collapse,
}

/// A refined root-count change.
#[derive(Debug, Clone, Serialize)]
pub struct Bifurcation {
    /// Energy of the event, refined to `bisect_tol`.
    pub energy: f64,
    pub kind: BifurcationKind,
    /// Root count just above (higher energy) and just below the event.
    pub count_above: usize,
    pub count_below: usize,
    /// Roots present on the richer side that have no counterpart on the
    /// poorer side (the born or dying roots).
    pub new_angles: Vec<f64>,
    /// For a pitchfork: the family of the branch the new roots split from,
    /// when the richer side still identifies the four primary families.
    pub from_family: Option<Family>,
}

/// Sweep tunables for bifurcation detection.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    /// Energy step of the outer descending sweep.
    pub step: f64,
    /// Bisection width at which an event energy is accepted.
    pub bisect_tol: f64,
    /// New roots closer than this to a surviving root classify the event
    /// as a pitchfork off that root's branch.
    pub cluster_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { step: 1e-2, bisect_tol: 1e-8, cluster_tol: 1e-3 }
    }
}

/// Scan energies from `e_hi` down to `e_lo`, bisect every root-count change
/// to `bisect_tol` and classify it. Events are returned in descending
/// energy order.
pub fn detect_bifurcations<S, F>(
    make_sys: F,
    n: u32,
    e_hi: f64,
    e_lo: f64,
    sweep: &SweepConfig,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<Vec<Bifurcation>>
where
    S: EjectionSystem,
    F: Fn(f64) -> Result<S>,
{
    if e_hi <= e_lo {
        return Err(Error::Domain("bifurcation sweep needs e_hi > e_lo".into()));
    }
    let count = |e: f64| -> Result<usize> {
        let sys = make_sys(e)?;
        count_roots(&sys, n, fcfg, icfg)
    };
    let mut events = Vec::new();
    let mut e = e_hi;
    let mut c_here = count(e)?;
    while e > e_lo {
        let e_next = (e - sweep.step).max(e_lo);
        let c_next = count(e_next)?;
        if c_next == c_here {
            e = e_next;
            continue;
        }
        // bisect the highest event inside (e_next, e)
        let (mut hi, mut lo) = (e, e_next);
        while hi - lo > sweep.bisect_tol {
            let mid = 0.5 * (hi + lo);
            if count(mid)? == c_here {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let e_event = 0.5 * (hi + lo);
        // root sets just above and just below the event, for classification
        let margin = 10.0 * sweep.bisect_tol;
        let above = find_roots(&make_sys(e_event + margin)?, n, fcfg, icfg)?;
        let below = find_roots(&make_sys(e_event - margin)?, n, fcfg, icfg)?;
        let c_above = above.orbits.len();
        let c_below = below.orbits.len();
        let (rich, poor, kind_increase) = if c_below >= c_above {
            (&below, &above, true)
        } else {
            (&above, &below, false)
        };
        // roots on the richer side without a close counterpart on the poorer
        let mut new_angles: Vec<f64> = rich
            .orbits
            .iter()
            .map(|o| o.theta0)
            .filter(|&t| {
                !poor
                    .orbits
                    .iter()
                    .any(|o| circular_dist(o.theta0, t) < 0.5 * sweep.cluster_tol)
            })
            .collect();
        new_angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let host = rich.orbits.iter().find(|o| {
            poor.orbits.iter().any(|p| circular_dist(p.theta0, o.theta0) < 0.5 * sweep.cluster_tol)
                && new_angles.iter().any(|&t| circular_dist(t, o.theta0) < sweep.cluster_tol)
        });
        let kind = if !kind_increase {
            BifurcationKind::Collapse
        } else if host.is_some() {
            BifurcationKind::Pitchfork
        } else {
            BifurcationKind::TangencyBirth
        };
        events.push(Bifurcation {
            energy: e_event,
            kind,
            count_above: c_above,
            count_below: c_below,
            new_angles,
            from_family: if kind == BifurcationKind::Pitchfork {
                host.map(|o| o.family).filter(|f| *f != Family::Extra)
            } else {
                None
            },
        });
        // resume the sweep just below the refined event
        e = e_event - margin;
        c_here = c_below;
    }
    Ok(events)
}

/// Circular distance of two angles on the θ₀-circle of circumference π.
fn circular_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// The largest energy at which the root count increases beyond the four
/// primary roots: the first bifurcation energy of the n-EC problem.
pub fn first_bifurcation<S, F>(
    make_sys: F,
    n: u32,
    e_hi: f64,
    e_lo: f64,
    sweep: &SweepConfig,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<Bifurcation>
where
    S: EjectionSystem,
    F: Fn(f64) -> Result<S>,
{
    let events = detect_bifurcations(make_sys, n, e_hi, e_lo, sweep, fcfg, icfg)?;
    events
        .into_iter()
        .find(|b| b.count_below > b.count_above)
        .ok_or_else(|| {
            Error::Sweep(format!("no root-count increase found in [{e_lo}, {e_hi}]"))
        })
}

// ---------------------------------------------------------------------------
// RTBP front ends
// ---------------------------------------------------------------------------

/// Bifurcation sweep of the RTBP in the Jacobi constant. `c_lo = None`
/// stops at the collinear-point value C_{L1}(μ), below which the Hill
/// region opens and the ejection orbits can leave the primary's neighborhood.
pub fn detect_bifurcations_rtbp(
    mu: f64,
    n: u32,
    c_hi: f64,
    c_lo: Option<f64>,
    sweep: &SweepConfig,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<Vec<Bifurcation>> {
    let c_lo = match c_lo {
        Some(c) => c,
        None => cl1(mu)?,
    };
    detect_bifurcations(|c| NormalizedRtbp::new(mu, c), n, c_hi, c_lo, sweep, fcfg, icfg)
}

/// The first bifurcation value Ĉ(μ, n): the largest C at which the n-EC
/// root count grows past four.
pub fn c_hat(
    mu: f64,
    n: u32,
    c_hi: f64,
    c_lo: Option<f64>,
    sweep: &SweepConfig,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<Bifurcation> {
    let c_lo = match c_lo {
        Some(c) => c,
        None => cl1(mu)?,
    };
    first_bifurcation(|c| NormalizedRtbp::new(mu, c), n, c_hi, c_lo, sweep, fcfg, icfg)
}

/// One point of the Ĉ(μ, n) curve with its scaled forms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CHatPoint {
    pub n: u32,
    pub c_hat: f64,
    /// K̂ = (Ĉ − 3μ)/(1−μ)^{2/3}.
    pub k_hat: f64,
    /// L̂ = K̂/n^{2/3}.
    pub l_hat: f64,
}

/// Ĉ(μ, n) over a list of n values; each sweep runs over
/// [c_hi(n), max(C_{L1}, c_margin below the scaling guess)].
pub fn c_hat_curve(
    mu: f64,
    ns: &[u32],
    sweep: &SweepConfig,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<Vec<CHatPoint>> {
    let cl = cl1(mu)?;
    ns.iter()
        .map(|&n| {
            // scaling guess K ~ (2n)^{2/3} brackets the first bifurcation
            let k_guess = (2.0 * n as f64).powf(2.0 / 3.0);
            let om23 = (1.0 - mu).powf(2.0 / 3.0);
            let c_hi = 3.0 * mu + 1.3 * k_guess * om23;
            let c_lo = (3.0 * mu + 0.85 * k_guess * om23).max(cl);
            let b = c_hat(mu, n, c_hi, Some(c_lo), sweep, fcfg, icfg)?;
            let k_hat = (b.energy - 3.0 * mu) / om23;
            Ok(CHatPoint { n, c_hat: b.energy, k_hat, l_hat: k_hat / (n as f64).powf(2.0 / 3.0) })
        })
        .collect()
}
