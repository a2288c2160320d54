//! Adaptive Runge-Kutta-Fehlberg 7(8) integration with detection of radial
//! minima of the regularized trajectory.
//!
//! The classic 13-stage Fehlberg pair is used with local extrapolation (the
//! 8th-order solution is propagated) and a PI step-size controller. Radial
//! events are located on the event function g = U·U̇ + V·V̇ = ½dρ/dτ:
//! a sign change − → + marks a radial minimum, + → − a maximum. Events are
//! refined inside an accepted step by safeguarded Newton on a single
//! sub-step, which keeps the refinement at the same local order as the
//! integration itself.

use crate::dynamics::{State, System};
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Fehlberg 7(8) tableau
// ---------------------------------------------------------------------------

const STAGES: usize = 13;

// Stage abscissae; the field is autonomous so these only enter the
// row-sum consistency checks in the tests.
#[allow(dead_code)]
#[rustfmt::skip]
const C: [f64; STAGES] = [
    0.0, 2.0 / 27.0, 1.0 / 9.0, 1.0 / 6.0, 5.0 / 12.0, 0.5, 5.0 / 6.0,
    1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0, 1.0, 0.0, 1.0,
];

#[rustfmt::skip]
const A: [[f64; STAGES - 1]; STAGES] = [
    [0.0; 12],
    [2.0/27.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0/36.0, 1.0/12.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0/24.0, 0.0, 1.0/8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.0/12.0, 0.0, -25.0/16.0, 25.0/16.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0/20.0, 0.0, 0.0, 1.0/4.0, 1.0/5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-25.0/108.0, 0.0, 0.0, 125.0/108.0, -65.0/27.0, 125.0/54.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [31.0/300.0, 0.0, 0.0, 0.0, 61.0/225.0, -2.0/9.0, 13.0/900.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.0, 0.0, 0.0, -53.0/6.0, 704.0/45.0, -107.0/9.0, 67.0/90.0, 3.0, 0.0, 0.0, 0.0, 0.0],
    [-91.0/108.0, 0.0, 0.0, 23.0/108.0, -976.0/135.0, 311.0/54.0, -19.0/60.0, 17.0/6.0, -1.0/12.0, 0.0, 0.0, 0.0],
    [2383.0/4100.0, 0.0, 0.0, -341.0/164.0, 4496.0/1025.0, -301.0/82.0, 2133.0/4100.0, 45.0/82.0, 45.0/164.0, 18.0/41.0, 0.0, 0.0],
    [3.0/205.0, 0.0, 0.0, 0.0, 0.0, -6.0/41.0, -3.0/205.0, -3.0/41.0, 3.0/41.0, 6.0/41.0, 0.0, 0.0],
    [-1777.0/4100.0, 0.0, 0.0, -341.0/164.0, 4496.0/1025.0, -289.0/82.0, 2193.0/4100.0, 51.0/82.0, 33.0/164.0, 12.0/41.0, 0.0, 1.0],
];

#[rustfmt::skip]
const B8: [f64; STAGES] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 34.0/105.0, 9.0/35.0, 9.0/35.0,
    9.0/280.0, 9.0/280.0, 0.0, 41.0/840.0, 41.0/840.0,
];

/// Error-estimate weight: err = h·(41/840)(k₁ + k₁₁ − k₁₂ − k₁₃).
const E_WEIGHT: f64 = 41.0 / 840.0;

// ---------------------------------------------------------------------------
// Configuration and summaries
// ---------------------------------------------------------------------------

/// Tolerances and step bounds for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    /// Absolute tolerance per component.
    pub abs_tol: f64,
    /// Relative tolerance per component.
    pub rel_tol: f64,
    /// Initial step size (magnitude).
    pub h_init: f64,
    /// Smallest allowed step magnitude before declaring underflow.
    pub h_min: f64,
    /// Largest allowed step magnitude. Kept well below the π radial
    /// half-period of the leading oscillator so no sign change of the event
    /// function can hide inside one step.
    pub h_max: f64,
    /// Maximum number of accepted steps per propagation.
    pub max_steps: usize,
    /// Squared-distance bound ρ = U² + V² beyond which an event propagation
    /// is declared escaped. Bounded ejection orbits stay at ρ = O(1) in the
    /// scaled variables, so escapes (open Hill region) trip this quickly
    /// instead of exhausting the step budget.
    pub escape_rho: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            h_init: 1e-3,
            h_min: 1e-14,
            h_max: 0.1,
            max_steps: 1_000_000,
            escape_rho: 25.0,
        }
    }
}

/// Endpoint of a plain propagation.
#[derive(Debug, Clone, Copy)]
pub struct Trajectory {
    pub tau: f64,
    pub state: State,
    pub steps: usize,
    /// Largest |conserved_residual| seen at accepted steps.
    pub max_residual: f64,
}

/// Result of integrating an ejection trajectory to its n-th radial minimum.
#[derive(Debug, Clone)]
pub struct MinEvent {
    /// Event time τ* of the n-th radial minimum.
    pub tau: f64,
    /// State at τ*.
    pub state: State,
    /// Largest |conserved_residual| seen along the way.
    pub max_residual: f64,
    /// Times and states of all radial minima up to and including the n-th.
    pub minima: Vec<(f64, State)>,
    pub steps: usize,
}

/// Angular momentum U·V̇ − V·U̇ of a regularized state.
pub fn angular_momentum(y: &State) -> f64 {
    y[0] * y[3] - y[1] * y[2]
}

// ---------------------------------------------------------------------------
// Single step
// ---------------------------------------------------------------------------

/// One RKF78 step of size h: returns the 8th-order solution and the
/// embedded error estimate.
fn rk78_step<S: System + ?Sized>(sys: &S, y: &State, h: f64) -> (State, [f64; 4]) {
    let mut k = [[0.0f64; 4]; STAGES];
    k[0] = sys.rhs(y);
    for i in 1..STAGES {
        let mut yi = *y;
        for j in 0..i {
            let a = A[i][j];
            if a != 0.0 {
                for m in 0..4 {
                    yi[m] += h * a * k[j][m];
                }
            }
        }
        k[i] = sys.rhs(&yi);
    }
    let mut y8 = *y;
    for (i, &b) in B8.iter().enumerate() {
        if b != 0.0 {
            for m in 0..4 {
                y8[m] += h * b * k[i][m];
            }
        }
    }
    let mut err = [0.0f64; 4];
    for m in 0..4 {
        err[m] = h * E_WEIGHT * (k[0][m] + k[10][m] - k[11][m] - k[12][m]);
    }
    (y8, err)
}

/// RMS error norm against mixed tolerances; ≤ 1 means the step is accepted.
fn error_norm(y: &State, y8: &State, err: &[f64; 4], cfg: &IntegratorConfig) -> f64 {
    let mut sum = 0.0;
    for m in 0..4 {
        let sc = cfg.abs_tol + cfg.rel_tol * y[m].abs().max(y8[m].abs());
        let r = err[m] / sc;
        sum += r * r;
    }
    (sum / 4.0).sqrt()
}

/// Adaptive stepper shared by all drivers. Calls `on_accept(tau_prev, y_prev,
/// h, tau_new, y_new)` after every accepted step; the closure returns `true`
/// to keep going. Integration stops at `tau_end` (approached exactly) or when
/// the closure stops it.
fn drive<S, F>(
    sys: &S,
    y0: &State,
    tau0: f64,
    tau_end: f64,
    cfg: &IntegratorConfig,
    mut on_accept: F,
) -> Result<Trajectory>
where
    S: System + ?Sized,
    F: FnMut(f64, &State, f64, f64, &State) -> bool,
{
    if tau_end == tau0 {
        return Ok(Trajectory { tau: tau0, state: *y0, steps: 0, max_residual: 0.0 });
    }
    let dir = (tau_end - tau0).signum();
    let mut tau = tau0;
    let mut y = *y0;
    let mut h = cfg.h_init.abs().min(cfg.h_max) * dir;
    let mut err_prev: f64 = 1.0;
    let mut steps = 0usize;
    let mut max_residual = sys.conserved_residual(&y).abs();

    loop {
        if (tau - tau_end) * dir >= 0.0 {
            break;
        }
        if steps >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded { tau, max_steps: cfg.max_steps });
        }
        // clamp the final step onto the endpoint
        let mut clamped = false;
        if (tau + h - tau_end) * dir > 0.0 {
            h = tau_end - tau;
            clamped = true;
        }
        let (y8, err) = rk78_step(sys, &y, h);
        let en = error_norm(&y, &y8, &err, cfg);
        if en <= 1.0 {
            let tau_new = if clamped { tau_end } else { tau + h };
            steps += 1;
            let res = sys.conserved_residual(&y8).abs();
            if res > max_residual {
                max_residual = res;
            }
            let keep_going = on_accept(tau, &y, h, tau_new, &y8);
            tau = tau_new;
            y = y8;
            // PI controller (Gustafsson): order-8 error exponents
            let e = en.max(1e-30);
            let fac = (0.9 * e.powf(-0.7 / 8.0) * err_prev.powf(0.4 / 8.0)).clamp(0.2, 5.0);
            err_prev = e;
            h = (h.abs() * fac).min(cfg.h_max) * dir;
            if !keep_going {
                break;
            }
        } else {
            let fac = (0.9 * en.powf(-1.0 / 8.0)).clamp(0.1, 1.0);
            h = h.abs() * fac * dir;
        }
        if h.abs() < cfg.h_min {
            return Err(Error::StepSizeUnderflow { tau, h: h.abs(), h_min: cfg.h_min });
        }
    }
    Ok(Trajectory { tau, state: y, steps, max_residual })
}

/// Integrate from (τ₀, y₀) to τ_end. The direction of time follows the sign
/// of τ_end − τ₀.
pub fn propagate<S: System + ?Sized>(
    sys: &S,
    y0: &State,
    tau0: f64,
    tau_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    drive(sys, y0, tau0, tau_end, cfg, |_, _, _, _, _| true)
}

/// Sample a trajectory at `samples` equally spaced times in [τ₀, τ_end]
/// (endpoints included). Used for orbit dumps.
pub fn sample_path<S: System + ?Sized>(
    sys: &S,
    y0: &State,
    tau0: f64,
    tau_end: f64,
    samples: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, State)>> {
    if samples < 2 {
        return Err(Error::Domain("sample_path needs at least 2 samples".into()));
    }
    let mut out = Vec::with_capacity(samples);
    out.push((tau0, *y0));
    let mut y = *y0;
    let mut tau = tau0;
    for i in 1..samples {
        let t = tau0 + (tau_end - tau0) * (i as f64) / ((samples - 1) as f64);
        let tr = propagate(sys, &y, tau, t, cfg)?;
        y = tr.state;
        tau = tr.tau;
        out.push((tau, y));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Radial-minimum events
// ---------------------------------------------------------------------------

fn g_of(y: &State) -> f64 {
    y[0] * y[2] + y[1] * y[3]
}

/// dg/dτ = U̇² + V̇² + U·Ü + V·V̈, exact from the vector field.
fn gdot_of<S: System + ?Sized>(sys: &S, y: &State) -> f64 {
    let d = sys.rhs(y);
    y[2] * y[2] + y[3] * y[3] + y[0] * d[2] + y[1] * d[3]
}

/// Refine a sign change of g inside the accepted step [τ_a, τ_a + h] by
/// safeguarded Newton on sub-steps taken from (τ_a, y_a). Returns (τ*, y*).
fn refine_event<S: System + ?Sized>(
    sys: &S,
    tau_a: f64,
    y_a: &State,
    h: f64,
    g_a: f64,
    g_b: f64,
) -> Result<(f64, State)> {
    debug_assert!(g_a <= 0.0 && g_b > 0.0 || g_a >= 0.0 && g_b < 0.0);
    let sign = if g_b > 0.0 { 1.0 } else { -1.0 };
    // bracket in local step fractions of h
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut g_lo, _g_hi) = (g_a, g_b);
    let mut x = if g_b != g_a { g_a / (g_a - g_b) } else { 0.5 };
    let mut best = (tau_a + h, *y_a);
    for _ in 0..80 {
        x = x.clamp(lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo));
        let (y, _) = rk78_step(sys, y_a, x * h);
        let g = g_of(&y);
        best = (tau_a + x * h, y);
        let norm2 = y.iter().map(|a| a * a).sum::<f64>();
        if g.abs() <= 1e-13 * (1.0 + norm2) {
            return Ok(best);
        }
        if g * sign > 0.0 {
            hi = x;
        } else {
            lo = x;
            g_lo = g;
        }
        if hi - lo < 1e-16 {
            break;
        }
        // Newton in the step fraction, with bisection fallback
        let gd = gdot_of(sys, &y) * h;
        let newton = if gd != 0.0 { x - g / gd } else { f64::NAN };
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else if g_lo != 0.0 {
            0.5 * (lo + hi)
        } else {
            0.5 * (lo + hi)
        };
    }
    // accept if within the (weaker) hard invariant, otherwise fail loudly
    let norm2 = best.1.iter().map(|a| a * a).sum::<f64>();
    let g = g_of(&best.1);
    if g.abs() <= 1e-12 * (1.0 + norm2) {
        Ok(best)
    } else {
        Err(Error::DegenerateEvent {
            tau: best.0,
            detail: format!("event refinement stalled with |g| = {:.3e}", g.abs()),
        })
    }
}

/// Integrate an ejection state forward until the n-th radial minimum of
/// ρ = U² + V², detected as the n-th − → + sign change of g = ½dρ/dτ.
/// The ejection point itself (g = 0 at τ = 0) is not counted. Fails with
/// [`Error::MissingEvent`] if the minima do not show up before `max_tau`
/// (default (2n + 4)π).
pub fn propagate_to_nth_min<S: System + ?Sized>(
    sys: &S,
    y0: &State,
    n: u32,
    max_tau: Option<f64>,
    cfg: &IntegratorConfig,
) -> Result<MinEvent> {
    if n == 0 {
        return Err(Error::Domain("event index n must be at least 1".into()));
    }
    let horizon = max_tau.unwrap_or((2.0 * n as f64 + 4.0) * std::f64::consts::PI);
    let mut minima: Vec<(f64, State)> = Vec::with_capacity(n as usize);
    let mut prev_g = g_of(y0); // zero at an exact ejection state
    let mut failure: Option<Error> = None;
    let tr = drive(sys, y0, 0.0, horizon, cfg, |tau_a, y_a, h, tau_b, y_b| {
        let rho = y_b[0] * y_b[0] + y_b[1] * y_b[1];
        if rho > cfg.escape_rho {
            failure = Some(Error::Escape { tau: tau_b, rho });
            return false;
        }
        let g_b = g_of(y_b);
        if prev_g < 0.0 && g_b >= 0.0 {
            match refine_event(sys, tau_a, y_a, h, prev_g, g_b.max(f64::MIN_POSITIVE)) {
                Ok((t, y)) => minima.push((t, y)),
                Err(e) => {
                    failure = Some(e);
                    return false;
                }
            }
        }
        if g_b != 0.0 {
            prev_g = g_b;
        }
        minima.len() < n as usize
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if minima.len() < n as usize {
        return Err(Error::MissingEvent { tau: tr.tau, found: minima.len(), wanted: n as usize });
    }
    let (tau, state) = *minima.last().unwrap();
    Ok(MinEvent { tau, state, max_residual: tr.max_residual, minima, steps: tr.steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{EjectionSystem, RotatingKepler};
    use std::f64::consts::PI;

    /// Unit harmonic oscillator: the ε → 0 limit of all regularized systems.
    struct Oscillator;
    impl System for Oscillator {
        fn rhs(&self, y: &State) -> State {
            [y[2], y[3], -y[0], -y[1]]
        }
        fn conserved_residual(&self, y: &State) -> f64 {
            y[2] * y[2] + y[3] * y[3] + y[0] * y[0] + y[1] * y[1] - 1.0
        }
    }

    #[test]
    fn tableau_row_sums() {
        for i in 0..STAGES {
            let sum: f64 = A[i].iter().sum();
            let scale: f64 = A[i].iter().map(|a| a.abs()).sum::<f64>().max(1.0);
            assert!((sum - C[i]).abs() < 1e-15 * scale, "row {i}: {sum} vs {}", C[i]);
        }
        let bsum: f64 = B8.iter().sum();
        assert!((bsum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oscillator_full_period() {
        let y0 = [0.0, 0.0, 0.6, 0.8];
        let cfg = IntegratorConfig::default();
        let tr = propagate(&Oscillator, &y0, 0.0, 2.0 * PI, &cfg).unwrap();
        for m in 0..4 {
            assert!((tr.state[m] - y0[m]).abs() < 1e-11, "{:?}", tr.state);
        }
        assert!(tr.max_residual < 1e-11);
    }

    #[test]
    fn oscillator_quarter_period_values() {
        // exact solution u = 0.6 sin t, v = 0.8 sin t
        let y0 = [0.0, 0.0, 0.6, 0.8];
        let cfg = IntegratorConfig::default();
        let tr = propagate(&Oscillator, &y0, 0.0, PI / 2.0, &cfg).unwrap();
        assert!((tr.state[0] - 0.6).abs() < 1e-12);
        assert!((tr.state[1] - 0.8).abs() < 1e-12);
        assert!(tr.state[2].abs() < 1e-12);
        assert!(tr.state[3].abs() < 1e-12);
    }

    #[test]
    fn backward_propagation_round_trip() {
        let sys = RotatingKepler { n: 2, xi: 0.4 };
        let y0 = sys.ejection_state(0.7);
        let cfg = IntegratorConfig::default();
        let fwd = propagate(&sys, &y0, 0.0, 3.0, &cfg).unwrap();
        let back = propagate(&sys, &fwd.state, 3.0, 0.0, &cfg).unwrap();
        for m in 0..4 {
            assert!((back.state[m] - y0[m]).abs() < 1e-10, "{:?}", back.state);
        }
    }

    #[test]
    fn kepler_first_integral_preserved() {
        let sys = RotatingKepler { n: 3, xi: 0.5 };
        let y0 = sys.ejection_state(1.1);
        let cfg = IntegratorConfig::default();
        let tr = propagate(&sys, &y0, 0.0, 8.0 * PI, &cfg).unwrap();
        assert!(tr.max_residual < 1e-10, "residual {:.3e}", tr.max_residual);
    }

    #[test]
    fn oscillator_minima_at_multiples_of_pi() {
        // rho = sin^2 tau: minima exactly at tau = k*pi, state = ejection IC
        let y0 = [0.0, 0.0, 0.6, 0.8];
        let cfg = IntegratorConfig::default();
        let ev = propagate_to_nth_min(&Oscillator, &y0, 3, None, &cfg).unwrap();
        assert!((ev.tau - 3.0 * PI).abs() < 1e-10, "tau* = {}", ev.tau);
        assert_eq!(ev.minima.len(), 3);
        for (k, (t, y)) in ev.minima.iter().enumerate() {
            assert!((t - (k as f64 + 1.0) * PI).abs() < 1e-10);
            assert!(y[0].abs() < 1e-10 && y[1].abs() < 1e-10);
            let norm2: f64 = y.iter().map(|a| a * a).sum();
            assert!(g_of(y).abs() <= 1e-12 * (1.0 + norm2));
        }
        // angular momentum vanishes identically for this collision orbit
        assert!(angular_momentum(&ev.state).abs() < 1e-10);
    }

    #[test]
    fn kepler_minima_match_closed_form_times() {
        // For the n-scaled mu = 0 system rho = sin^2(n*that) exactly, so the
        // radial minima sit at that = k*pi/n and the n-th one at that = pi.
        let sys = RotatingKepler { n: 2, xi: 0.3 };
        let y0 = sys.ejection_state(0.4);
        let cfg = IntegratorConfig::default();
        let ev = propagate_to_nth_min(&sys, &y0, 2, None, &cfg).unwrap();
        assert!((ev.tau - PI).abs() < 1e-9, "tau* = {}", ev.tau);
        assert!((ev.minima[0].0 - PI / 2.0).abs() < 1e-9);
        // collision again: rho -> 0 and momentum -> 0 at the minimum
        assert!(ev.state[0] * ev.state[0] + ev.state[1] * ev.state[1] < 1e-18);
        assert!(angular_momentum(&ev.state).abs() < 1e-9);
    }

    #[test]
    fn missing_event_on_circular_motion() {
        // circular orbit: rho constant, g identically zero -> no minima
        let y0 = [1.0, 0.0, 0.0, 1.0];
        let cfg = IntegratorConfig::default();
        let err = propagate_to_nth_min(&Oscillator, &y0, 1, Some(10.0), &cfg).unwrap_err();
        match err {
            Error::MissingEvent { found, wanted, .. } => {
                assert_eq!((found, wanted), (0, 1));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn max_steps_is_enforced(){
        let cfg = IntegratorConfig { max_steps: 10, ..Default::default() };
        let err = propagate(&Oscillator, &[0.0, 0.0, 1.0, 0.0], 0.0, 100.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::MaxStepsExceeded { .. }));
    }

    #[test]
    fn sample_path_endpoints() {
        let y0 = [0.0, 0.0, 1.0, 0.0];
        let cfg = IntegratorConfig::default();
        let path = sample_path(&Oscillator, &y0, 0.0, PI, 5, &cfg).unwrap();
        assert_eq!(path.len(), 5);
        assert_eq!(path[0].0, 0.0);
        assert!((path[4].0 - PI).abs() < 1e-15);
        assert!((path[2].1[0] - 1.0).abs() < 1e-12); // u = sin(pi/2)
    }
}
