//! The Hill problem behind the same ejection interface: the μ → 1 limit of
//! the RTBP after centering on the small primary and rescaling.
//!
//! Energy is measured by the Hill Jacobi-like constant K = 2Ψ − v² with
//! Ψ = (3/2)x² + 1/r. Levi-Civita regularization and the √K rescaling give
//! a polynomial system identical to the μ = 1 member of the truncated-series
//! family, with ε = 1/√K; n-EC orbits are zeros of the same momentum
//! functional, so the finder, continuation and bifurcation machinery are
//! reused unchanged.

use crate::continuation::{
    continue_branch, first_bifurcation, locate_near, Bifurcation, Branch, ContinuationConfig,
    SweepConfig,
};
use crate::dynamics::{truncated_series_rhs, State, System};
use crate::ecfinder::{find_roots, EcRoots, Family, FinderConfig};
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::EjectionSystem;
use serde::Serialize;
use std::f64::consts::PI;

/// K value of the two Hill equilibrium points: K_L = 3^{4/3}. Ejection
/// orbits are confined near the primary for K > K_L.
pub fn k_lagrange() -> f64 {
    3.0f64.powf(4.0 / 3.0)
}

// ---------------------------------------------------------------------------
// Synodic and Levi-Civita charts (reference forms)
// ---------------------------------------------------------------------------

/// Hill effective potential Ψ = (3/2)x² + 1/r.
pub fn psi(x: f64, y: f64) -> Result<f64> {
    let r = (x * x + y * y).sqrt();
    if r == 0.0 {
        return Err(Error::Domain("collision-singular position (r = 0)".into()));
    }
    Ok(1.5 * x * x + 1.0 / r)
}

/// Hill first integral K = 2Ψ − ẋ² − ẏ².
pub fn jacobi_hill(state: &[f64; 4]) -> Result<f64> {
    Ok(2.0 * psi(state[0], state[1])? - state[2] * state[2] - state[3] * state[3])
}

/// Synodic Hill field (x, y, ẋ, ẏ): ẍ = 2ẏ + 3x − x/r³, ÿ = −2ẋ − y/r³.
pub fn hill_rhs(state: &[f64; 4]) -> Result<[f64; 4]> {
    let [x, y, vx, vy] = *state;
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return Err(Error::Domain("collision-singular position (r = 0)".into()));
    }
    let r3 = r2 * r2.sqrt();
    Ok([vx, vy, 2.0 * vy + 3.0 * x - x / r3, -2.0 * vx - y / r3])
}

/// Levi-Civita Hill field at energy K:
/// u'' =  8ρv' − 4Ku + 12[2(u⁴ − 2u²v² − v⁴) + ρ²]u,
/// v'' = −8ρu' − 4Kv + 12[2(v⁴ − 2u²v² − u⁴) + ρ²]v, ρ = u² + v².
/// Regular everywhere; ejection states sit on the circle u'² + v'² = 8.
pub fn hill_lc_rhs(state: &State, k: f64) -> State {
    let [u, v, up, vp] = *state;
    let rho = u * u + v * v;
    let u2 = u * u;
    let v2 = v * v;
    [
        up,
        vp,
        8.0 * rho * vp - 4.0 * k * u
            + 12.0 * (2.0 * (u2 * u2 - 2.0 * u2 * v2 - v2 * v2) + rho * rho) * u,
        -8.0 * rho * up - 4.0 * k * v
            + 12.0 * (2.0 * (v2 * v2 - 2.0 * u2 * v2 - u2 * u2) + rho * rho) * v,
    ]
}

/// (u² + v²)·Ψ in LC variables, regular at the collision:
/// (3/2)ρ(u² − v²)² + 1.
fn lc_rho_psi(u: f64, v: f64) -> f64 {
    let rho = u * u + v * v;
    let d = u * u - v * v;
    1.5 * rho * d * d + 1.0
}

/// Regularized Hill energy residual u'² + v'² − 8[ρΨ − Kρ/2]; zero along
/// LC Hill trajectories at energy K and finite at the collision.
pub fn jacobi_residual_hill_lc(state: &State, k: f64) -> f64 {
    let [u, v, up, vp] = *state;
    let rho = u * u + v * v;
    up * up + vp * vp - 8.0 * (lc_rho_psi(u, v) - 0.5 * k * rho)
}

// ---------------------------------------------------------------------------
// Scaled system behind the shared interface
// ---------------------------------------------------------------------------

/// The √K-rescaled Levi-Civita Hill system: the μ = 1 member of the
/// truncated-series family with ε = 1/√K. Ejection states are
/// (0, 0, cos θ₀, sin θ₀) and radial minima sit near multiples of π.
#[derive(Debug, Clone, Copy)]
pub struct ScaledHill {
    k: f64,
    eps: f64,
}

impl ScaledHill {
    pub fn new(k: f64) -> Result<Self> {
        if k > 0.0 && k.is_finite() {
            Ok(ScaledHill { k, eps: 1.0 / k.sqrt() })
        } else {
            Err(Error::Domain(format!("Hill energy K = {k} must be positive")))
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

impl System for ScaledHill {
    fn rhs(&self, y: &State) -> State {
        truncated_series_rhs(y, 1.0, self.eps)
    }

    /// U̇² + V̇² − [ρΨ − Kρ/2](√(2/K)·U, √(2/K)·V); exactly zero at ejection.
    fn conserved_residual(&self, y: &State) -> f64 {
        let a = (2.0 / self.k).sqrt();
        let (u, v) = (a * y[0], a * y[1]);
        let rho = u * u + v * v;
        y[2] * y[2] + y[3] * y[3] - (lc_rho_psi(u, v) - 0.5 * self.k * rho)
    }
}

impl EjectionSystem for ScaledHill {
    fn ejection_state(&self, theta0: f64) -> State {
        [0.0, 0.0, theta0.cos(), theta0.sin()]
    }
}

// ---------------------------------------------------------------------------
// n-EC orbits, bifurcations, periodic EC orbits
// ---------------------------------------------------------------------------

/// Find all n-EC orbits of the Hill problem at energy K.
pub fn hill_find_ec(
    n: u32,
    k: f64,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<EcRoots> {
    let sys = ScaledHill::new(k)?;
    find_roots(&sys, n, fcfg, icfg)
}

/// The first bifurcation value K̂(n): the largest K in [k_lo, k_hi] where
/// the n-EC root count grows past four.
pub fn hill_k_hat(
    n: u32,
    k_hi: f64,
    k_lo: f64,
    sweep: &SweepConfig,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<Bifurcation> {
    first_bifurcation(ScaledHill::new, n, k_hi, k_lo, sweep, fcfg, icfg)
}

/// All root-count changes of the Hill n-EC problem over [k_lo, k_hi].
pub fn hill_detect_bifurcations(
    n: u32,
    k_hi: f64,
    k_lo: f64,
    sweep: &SweepConfig,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<Vec<Bifurcation>> {
    crate::continuation::detect_bifurcations(ScaledHill::new, n, k_hi, k_lo, sweep, fcfg, icfg)
}

/// Continue one primary Hill family in K from its root at `k_hi`.
pub fn hill_continue_family(
    n: u32,
    family: Family,
    k_hi: f64,
    k_lo: f64,
    ccfg: &ContinuationConfig,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<Branch> {
    let roots = hill_find_ec(n, k_hi, fcfg, icfg)?;
    let start = roots
        .orbits
        .iter()
        .find(|o| o.family == family)
        .ok_or_else(|| Error::Sweep(format!("family {family} not found at K = {k_hi}")))?;
    continue_branch(ScaledHill::new, n, family, k_hi, start.theta0, k_lo, ccfg, fcfg, icfg)
}

/// The symmetry pair a primary family belongs to: {γ, α} share the axial
/// home angles {0, π/2} and {δ, β} the diagonal ones {π/4, 3π/4}.
pub fn family_pair(f: Family) -> Option<(Family, Family)> {
    match f {
        Family::Gamma | Family::Alpha => Some((Family::Gamma, Family::Alpha)),
        Family::Delta | Family::Beta => Some((Family::Delta, Family::Beta)),
        Family::Extra => None,
    }
}

fn pair_angles(f: Family) -> Option<[f64; 2]> {
    match f {
        Family::Gamma | Family::Alpha => Some([0.0, PI / 2.0]),
        Family::Delta | Family::Beta => Some([PI / 4.0, 3.0 * PI / 4.0]),
        Family::Extra => None,
    }
}

/// How the symmetry pair of a branch turns periodic at an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PeriodicKind {
    /// The branch crossed one of its own pair's home angles: both family
    /// members are individually periodic EC orbits there.
    EachPeriodic,
    /// The branch crossed the other pair's home angles: the two family
    /// members glue into a single periodic EC orbit.
    Composed,
}

/// A detected energy at which primary n-EC orbits become periodic.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicEcEvent {
    pub k: f64,
    /// The branch whose ejection angle crossed a home angle.
    pub branch: Family,
    /// The crossed angle (one of 0, π/4, π/2, 3π/4).
    pub angle: f64,
    pub kind: PeriodicKind,
    /// The symmetry pair that turns periodic.
    pub pair: (Family, Family),
}

/// Signed circular difference θ − a mapped into [−π/2, π/2).
fn signed_diff(theta: f64, a: f64) -> f64 {
    (theta - a + PI / 2.0).rem_euclid(PI) - PI / 2.0
}

/// Detect the energies in [k_lo, k_hi] at which a primary branch crosses
/// one of the four home angles, turning its symmetry pair into periodic EC
/// orbits. Branches are continued downward from the four-root regime at
/// `k_hi` and each crossing is refined by bisection in K.
pub fn detect_periodic_ec(
    n: u32,
    k_hi: f64,
    k_lo: f64,
    ccfg: &ContinuationConfig,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<Vec<PeriodicEcEvent>> {
    let roots = hill_find_ec(n, k_hi, fcfg, icfg)?;
    if roots.orbits.len() != 4 {
        return Err(Error::Sweep(format!(
            "periodic-EC detection needs the four-root regime at K = {k_hi}, found {}",
            roots.orbits.len()
        )));
    }
    let specials = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
    let mut events = Vec::new();
    for orbit in &roots.orbits {
        let branch = continue_branch(
            ScaledHill::new,
            n,
            orbit.family,
            k_hi,
            orbit.theta0,
            k_lo,
            ccfg,
            fcfg,
            icfg,
        )?;
        for &a in &specials {
            for w in branch.samples.windows(2) {
                let d0 = signed_diff(w[0].theta0, a);
                let d1 = signed_diff(w[1].theta0, a);
                // genuine transversal crossing away from the wrap seam
                if d0 == 0.0 || d0 * d1 >= 0.0 || d0.abs() > 0.3 || d1.abs() > 0.3 {
                    continue;
                }
                let k = refine_angle_crossing(n, a, w[0], w[1], fcfg, icfg)?;
                let kind = if pair_angles(orbit.family).unwrap().contains(&a) {
                    PeriodicKind::EachPeriodic
                } else {
                    PeriodicKind::Composed
                };
                events.push(PeriodicEcEvent {
                    k,
                    branch: orbit.family,
                    angle: a,
                    kind,
                    pair: family_pair(orbit.family).unwrap(),
                });
            }
        }
    }
    events.sort_by(|a, b| b.k.partial_cmp(&a.k).unwrap());
    Ok(events)
}

/// Bisect in K the crossing of a branch's ejection angle through `a`,
/// between two continued samples that straddle it.
fn refine_angle_crossing(
    n: u32,
    a: f64,
    s0: crate::continuation::BranchSample,
    s1: crate::continuation::BranchSample,
    fcfg: &FinderConfig,
    icfg: &IntegratorConfig,
) -> Result<f64> {
    let (mut k0, mut t0, mut d0) = (s0.energy, s0.theta0, signed_diff(s0.theta0, a));
    let (mut k1, mut t1) = (s1.energy, s1.theta0);
    for _ in 0..60 {
        if (k1 - k0).abs() < 1e-10 {
            break;
        }
        let km = 0.5 * (k0 + k1);
        let pred = t0 + (t1 - t0) * (km - k0) / (k1 - k0);
        let sys = ScaledHill::new(km)?;
        let theta = locate_near(&sys, n, pred, 1e-3, fcfg.theta_tol, icfg)?
            .ok_or_else(|| Error::Sweep(format!("branch lost at K = {km} while refining")))?;
        let dm = signed_diff(theta, a);
        if dm == 0.0 {
            return Ok(km);
        }
        if d0 * dm < 0.0 {
            k1 = km;
            t1 = theta;
        } else {
            k0 = km;
            t0 = theta;
            d0 = dm;
        }
    }
    Ok(0.5 * (k0 + k1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{propagate, propagate_to_nth_min};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lagrange_points_are_equilibria() {
        // synodic: (3^{-1/3}, 0) at rest
        let x = 3.0f64.powf(-1.0 / 3.0);
        let d = hill_rhs(&[x, 0.0, 0.0, 0.0]).unwrap();
        assert!(d[2].abs() < 1e-15 && d[3].abs() < 1e-15);
        assert!(close(jacobi_hill(&[x, 0.0, 0.0, 0.0]).unwrap(), k_lagrange(), 1e-14));
        // LC chart at K = K_L: (3^{-1/6}, 0) and (0, 3^{-1/6}) at rest
        let u = 3.0f64.powf(-1.0 / 6.0);
        for st in [[u, 0.0, 0.0, 0.0], [0.0, u, 0.0, 0.0]] {
            let d = hill_lc_rhs(&st, k_lagrange());
            assert!(d[2].abs() < 1e-14 && d[3].abs() < 1e-14, "{d:?}");
        }
    }

    #[test]
    fn lc_field_is_gradient_of_regular_potential() {
        // positional part of hill_lc_rhs = 4 * d/d(u,v) [rho*Psi - K rho/2]
        let (k, st) = (4.6, [0.4, -0.25, 0.1, 0.3]);
        let d = hill_lc_rhs(&st, k);
        let rho = st[0] * st[0] + st[1] * st[1];
        let h = 1e-6;
        let f = |u: f64, v: f64| lc_rho_psi(u, v) - 0.5 * k * (u * u + v * v);
        let gu = (f(st[0] + h, st[1]) - f(st[0] - h, st[1])) / (2.0 * h) * 4.0;
        let gv = (f(st[0], st[1] + h) - f(st[0], st[1] - h)) / (2.0 * h) * 4.0;
        assert!(close(d[2] - 8.0 * rho * st[3], gu, 1e-8));
        assert!(close(d[3] + 8.0 * rho * st[2], gv, 1e-8));
    }

    #[test]
    fn scaled_system_matches_lc_by_chain_rule() {
        // u = sqrt(2/K) U, tau = 2 sqrt(K) s  =>  u' = 2 sqrt(2) U',
        // d2u/ds2 = sqrt(2/K)*4K*Udd
        let k = 5.2;
        let sys = ScaledHill::new(k).unwrap();
        let y = [0.3, -0.2, 0.4, 0.1];
        let a = (2.0 / k).sqrt();
        let s8 = 8.0f64.sqrt();
        let lc = [a * y[0], a * y[1], s8 * y[2], s8 * y[3]];
        let ds = sys.rhs(&y);
        let dl = hill_lc_rhs(&lc, k);
        assert!(close(dl[2], ds[2] * a * 4.0 * k, 1e-12), "{} vs {}", dl[2], ds[2] * a * 4.0 * k);
        assert!(close(dl[3], ds[3] * a * 4.0 * k, 1e-12));
    }

    #[test]
    fn ejection_residual_and_collision_circle() {
        let sys = ScaledHill::new(4.9).unwrap();
        let y0 = sys.ejection_state(0.7);
        assert!(sys.conserved_residual(&y0).abs() < 1e-15);
        // LC ejection velocity circle u'^2 + v'^2 = 8
        let s8 = 8.0f64.sqrt();
        let lc = [0.0, 0.0, s8 * 0.7f64.cos(), s8 * 0.7f64.sin()];
        assert!(jacobi_residual_hill_lc(&lc, 4.9).abs() < 1e-14);
        // residual stays flat along an integrated trajectory
        let cfg = IntegratorConfig::default();
        let tr = propagate(&sys, &y0, 0.0, 2.0 * PI, &cfg).unwrap();
        assert!(tr.max_residual < 1e-11, "{:.3e}", tr.max_residual);
    }

    #[test]
    fn four_roots_at_large_k() {
        let cfg = IntegratorConfig { abs_tol: 1e-11, rel_tol: 1e-11, ..Default::default() };
        let fcfg = FinderConfig { grid: 256, ..Default::default() };
        let roots = hill_find_ec(2, 9.0, &fcfg, &cfg).unwrap();
        assert_eq!(roots.orbits.len(), 4, "{roots:?}");
        assert!(roots.all_certified());
        // minima arrive near multiples of pi in the scaled time
        let sys = ScaledHill::new(9.0).unwrap();
        let ev = propagate_to_nth_min(&sys, &sys.ejection_state(0.3), 2, None, &cfg).unwrap();
        assert!((ev.tau - 2.0 * PI).abs() < 0.2, "{}", ev.tau);
    }

    #[test]
    fn signed_diff_wraps() {
        assert!(close(signed_diff(0.1, 0.0), 0.1, 1e-15));
        assert!(close(signed_diff(PI - 0.1, 0.0), -0.1, 1e-15));
        assert!(close(signed_diff(0.2, 3.0 * PI / 4.0), 0.2 - 3.0 * PI / 4.0 + PI, 1e-15));
    }
}
