//! Closed-form material: the solution series of the normalized ejection
//! problem in powers of ε = 1/√K, the induced series for the event time τ*
//! and the angular momentum M(n, θ₀), the exact solution of the μ = 0
//! (rotating Kepler) system, and its fundamental matrix.
//!
//! Derivatives (U̇, V̇ from the solution series; ∂flow/∂IC for the
//! fundamental matrix) are obtained by forward-mode dual numbers rather than
//! hand differentiation, so every derivative is exactly consistent with the
//! value it belongs to.

use crate::dynamics::State;
use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

// ---------------------------------------------------------------------------
// Forward-mode dual numbers with N derivative directions
// ---------------------------------------------------------------------------

/// Scalar with an N-dimensional gradient, for forward-mode differentiation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Dual<const N: usize> {
    pub re: f64,
    pub du: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn cst(x: f64) -> Self {
        Dual { re: x, du: [0.0; N] }
    }
    /// Independent variable along direction `i`.
    pub fn var(x: f64, i: usize) -> Self {
        let mut du = [0.0; N];
        du[i] = 1.0;
        Dual { re: x, du }
    }
    pub fn sin(self) -> Self {
        let (s, c) = self.re.sin_cos();
        Dual { re: s, du: self.du.map(|d| c * d) }
    }
    pub fn cos(self) -> Self {
        let (s, c) = self.re.sin_cos();
        Dual { re: c, du: self.du.map(|d| -s * d) }
    }
    pub fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        Dual { re: r, du: self.du.map(|d| d / (2.0 * r)) }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut du = self.du;
        for i in 0..N {
            du[i] += o.du[i];
        }
        Dual { re: self.re + o.re, du }
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut du = self.du;
        for i in 0..N {
            du[i] -= o.du[i];
        }
        Dual { re: self.re - o.re, du }
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut du = [0.0; N];
        for i in 0..N {
            du[i] = self.du[i] * o.re + self.re * o.du[i];
        }
        Dual { re: self.re * o.re, du }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.re;
        let mut du = [0.0; N];
        for i in 0..N {
            du[i] = (self.du[i] - self.re * inv * o.du[i]) * inv;
        }
        Dual { re: self.re * inv, du }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { re: -self.re, du: self.du.map(|d| -d) }
    }
}

impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Dual { re: self.re * k, du: self.du.map(|d| d * k) }
    }
}

impl<const N: usize> Mul<Dual<N>> for f64 {
    type Output = Dual<N>;
    fn mul(self, d: Dual<N>) -> Dual<N> {
        d * self
    }
}

impl<const N: usize> Add<f64> for Dual<N> {
    type Output = Self;
    fn add(self, k: f64) -> Self {
        Dual { re: self.re + k, du: self.du }
    }
}

impl<const N: usize> Sub<f64> for Dual<N> {
    type Output = Self;
    fn sub(self, k: f64) -> Self {
        Dual { re: self.re - k, du: self.du }
    }
}

// ---------------------------------------------------------------------------
// Solution series in eps = 1/sqrt(K)
// ---------------------------------------------------------------------------

/// Orders at which the solution series has nonzero terms.
pub const SERIES_ORDERS: [u32; 6] = [0, 3, 6, 8, 9, 10];

/// Highest implemented series order.
pub const MAX_ORDER: u32 = 10;

/// Term (U_j, V_j) of the solution series, with τ carried as a dual number
/// so that U̇_j, V̇_j come out of the same expressions.
fn series_term<const N: usize>(j: u32, tau: Dual<N>, theta0: f64, mu: f64) -> (Dual<N>, Dual<N>) {
    let s = tau.sin();
    let c = tau.cos();
    let (st, ct) = theta0.sin_cos();
    match j {
        0 => (s * ct, s * st),
        3 => {
            // (tau - cos*sin) * sin: the k = 1 case of the (tau - cs)^k * s
            // bracket family shared with the j = 6 and j = 9 terms
            let b = (tau - c * s) * s;
            (b * st, -(b * ct))
        }
        6 => {
            let base = tau - c * s;
            let w = base * base * s;
            let c2 = c * c;
            let m = tau * c * 15.0 - ((c2 * c2) * (-2.0) + c2 * 9.0 + 8.0) * s;
            let au = 1.0 - 2.0 * ct.powi(4);
            let av = 1.0 - 2.0 * st.powi(4);
            (
                -((w - mu * au * m) * (0.5 * ct)),
                -((w - mu * av * m) * (0.5 * st)),
            )
        }
        8 => {
            let c2 = c * c;
            let c4 = c2 * c2;
            let br = tau * c * 105.0 - (c4 * c2 * 8.0 - c4 * 38.0 + c2 * 87.0 + 48.0) * s;
            let fac = mu * (1.0 - mu).powf(1.0 / 3.0) / 6.0;
            let au = 5.0 * ct.powi(6) - 6.0 * ct * ct + 2.0;
            let av = 5.0 * st.powi(6) - 6.0 * st * st + 2.0;
            (br * (fac * au * ct), -(br * (fac * av * st)))
        }
        9 => {
            let c2 = c * c;
            let c4 = c2 * c2;
            let c6 = c4 * c2;
            let base = tau - c * s;
            let cubic = base * base * base * s * 4.0;
            // bracket polynomial in q = cos^2(theta0) (U) or sin^2 (V)
            let poly = |q: f64| {
                tau * s * (c2 * 432.0 + c4 * 24.0 + 69.0)
                    - c * (c2 * (-217.0) + c4 * (-178.0) + c6 * 16.0 + 379.0)
                    - tau * s * ((c2 * 6.0 + 1.0) * (480.0 * q))
                    + c * ((c2 * (-53.0) + c4 * (-32.0) + c6 * 4.0 + 81.0) * (32.0 * q))
                    - tau * tau * c * (360.0 * q * q)
                    + tau * s * ((c2 * 15.0 - c4 + 3.0) * (240.0 * q * q))
                    - c * ((c2 * (-257.0) + c4 * (-143.0) + c6 * 26.0 + 374.0) * (8.0 * q * q))
            };
            (
                -((cubic - mu * poly(ct * ct)) * (st / 24.0)),
                (cubic - mu * poly(st * st)) * (ct / 24.0),
            )
        }
        10 => {
            let c2 = c * c;
            let c4 = c2 * c2;
            let c6 = c4 * c2;
            let c8 = c4 * c4;
            let br = tau * c * 315.0
                - (c2 * 325.0 - c4 * 210.0 + c6 * 88.0 - c8 * 16.0 + 128.0) * s;
            let fac = mu * (1.0 - mu).powf(2.0 / 3.0) / 8.0;
            let au = 3.0 - 20.0 * ct.powi(2) + 30.0 * ct.powi(4) - 14.0 * ct.powi(8);
            let av = 3.0 - 20.0 * st.powi(2) + 30.0 * st.powi(4) - 14.0 * st.powi(8);
            (br * (fac * au * ct), br * (fac * av * st))
        }
        _ => (Dual::cst(0.0), Dual::cst(0.0)),
    }
}

fn check_order(order: u32) -> Result<()> {
    if order > MAX_ORDER {
        Err(Error::Domain(format!("series order {order} exceeds implemented {MAX_ORDER}")))
    } else {
        Ok(())
    }
}

/// Solution series truncated at ε^order: state (U, V, U̇, V̇) at scaled time
/// τ for the ejection orbit with angle θ₀.
pub fn series_state(tau: f64, theta0: f64, mu: f64, eps: f64, order: u32) -> Result<State> {
    check_order(order)?;
    let t: Dual<1> = Dual::var(tau, 0);
    let mut u = Dual::cst(0.0);
    let mut v = Dual::cst(0.0);
    for &j in SERIES_ORDERS.iter().filter(|&&j| j <= order) {
        let (uj, vj) = series_term(j, t, theta0, mu);
        let w = eps.powi(j as i32);
        u = u + uj * w;
        v = v + vj * w;
    }
    Ok([u.re, v.re, u.du[0], v.du[0]])
}

/// Positions (U, V) only; see [`series_state`].
pub fn u_series(tau: f64, theta0: f64, mu: f64, eps: f64, order: u32) -> Result<(f64, f64)> {
    let y = series_state(tau, theta0, mu, eps, order)?;
    Ok((y[0], y[1]))
}

/// Series for the time τ*(n, θ₀) of the n-th radial minimum.
pub fn tau_star_series(n: u32, theta0: f64, mu: f64, eps: f64, order: u32) -> Result<f64> {
    check_order(order)?;
    let nf = n as f64;
    let t4 = (4.0 * theta0).cos();
    let mut tau = nf * PI;
    if order >= 6 {
        tau += eps.powi(6) * 15.0 * mu * nf * PI * (1.0 + 3.0 * t4) / 8.0;
    }
    if order >= 8 {
        let c2 = (2.0 * theta0).cos();
        tau -= eps.powi(8) * 35.0 * mu * (1.0 - mu).powf(1.0 / 3.0) * nf * PI * c2
            * (5.0 * c2 * c2 - 3.0)
            / 4.0;
    }
    if order >= 9 {
        tau += eps.powi(9) * 15.0 * mu * nf * nf * PI * PI * (4.0 * theta0).sin() / 2.0;
    }
    if order >= 10 {
        tau += eps.powi(10) * 315.0 * mu * (1.0 - mu).powf(2.0 / 3.0) * nf * PI
            * (13.0 - 10.0 * t4 - 35.0 * t4 * t4)
            / 256.0;
    }
    Ok(tau)
}

/// Series for the angular momentum M(n, θ₀) at the n-th radial minimum.
/// Zeros in θ₀ predict n-EC orbits; the leading ε⁶ term has zeros exactly
/// at θ₀ = mπ/4.
pub fn momentum_series(n: u32, theta0: f64, mu: f64, eps: f64, order: u32) -> Result<f64> {
    check_order(order)?;
    let nf = n as f64;
    let mut m = 0.0;
    if order >= 6 {
        m -= eps.powi(6) * 15.0 * mu * nf * PI * (4.0 * theta0).sin() / 4.0;
    }
    if order >= 8 {
        m += eps.powi(8) * 105.0 * mu * (1.0 - mu).powf(1.0 / 3.0) * nf * PI
            * ((2.0 * theta0).sin() + 5.0 * (6.0 * theta0).sin())
            / 64.0;
    }
    if order >= 9 {
        m += eps.powi(9) * 15.0 * mu * nf * nf * PI * PI * (4.0 * theta0).cos() / 2.0;
    }
    if order >= 10 {
        m -= eps.powi(10) * 315.0 * mu * (1.0 - mu).powf(2.0 / 3.0) * nf * PI
            * (2.0 * (4.0 * theta0).sin() + 7.0 * (8.0 * theta0).sin())
            / 128.0;
    }
    Ok(m)
}

/// Zeros of the momentum series over [0, π).
#[derive(Debug, Clone)]
pub enum SeriesRoots {
    /// M vanishes identically at this order (μ = 0 or order < 6): every θ₀
    /// is a zero and the two-body problem gives a continuum of EC orbits.
    Degenerate,
    /// Isolated predicted roots, sorted ascending.
    Roots(Vec<f64>),
}

/// Predicted n-EC ejection angles from the momentum series: a dense scan of
/// [0, π) followed by bisection of each sign change. Near the leading order
/// the roots sit at mπ/4; higher orders shift them and can create extra
/// pairs once ε is large enough.
pub fn predicted_roots(n: u32, mu: f64, eps: f64, order: u32) -> Result<SeriesRoots> {
    check_order(order)?;
    const GRID: usize = 4096;
    let f = |t: f64| momentum_series(n, t, mu, eps, order).unwrap();
    let vals: Vec<f64> = (0..=GRID).map(|i| f(PI * i as f64 / GRID as f64)).collect();
    let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if scale < 1e-14 {
        return Ok(SeriesRoots::Degenerate);
    }
    let mut roots = Vec::new();
    for i in 0..GRID {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            roots.push(PI * i as f64 / GRID as f64);
            continue;
        }
        if a * b < 0.0 {
            let (mut lo, mut hi) = (PI * i as f64 / GRID as f64, PI * (i + 1) as f64 / GRID as f64);
            let mut flo = a;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    Ok(SeriesRoots::Roots(roots))
}

// ---------------------------------------------------------------------------
// Exact mu = 0 (rotating Kepler) flow
// ---------------------------------------------------------------------------

/// Exact flow of the n-scaled μ = 0 system from an arbitrary initial state.
/// In a sidereal chart the system is a harmonic oscillator of frequency
/// ω = √(n² − 4L₀ξ³), with L₀ the sidereal angular momentum; the physical
/// time t accumulated along the orbit drives the rotation back to the
/// synodic chart.
fn general_flow<const N: usize>(n: u32, xi: f64, y0: &[Dual<N>; 4], that: f64) -> [Dual<N>; 4] {
    let x3 = xi * xi * xi;
    let nf = n as f64;
    let [u0, v0, ud0, vd0] = *y0;
    let rho0 = u0 * u0 + v0 * v0;
    // sidereal initial velocities (charts coincide at that = 0)
    let bud0 = ud0 - rho0 * v0 * (2.0 * x3);
    let bvd0 = vd0 + rho0 * u0 * (2.0 * x3);
    let l0 = u0 * bvd0 - v0 * bud0;
    let omega = (Dual::cst(nf * nf) - l0 * (4.0 * x3)).sqrt();
    let phase = omega * that;
    let (sw, cw) = (phase.sin(), phase.cos());
    let bu = u0 * cw + (bud0 / omega) * sw;
    let bv = v0 * cw + (bvd0 / omega) * sw;
    let bud = bud0 * cw - u0 * omega * sw;
    let bvd = bvd0 * cw - v0 * omega * sw;
    // physical time: integral of 4*rho(that')*xi^3
    let that_d = Dual::cst(that);
    let cs_w = cw * sw / omega;
    let t = (rho0 * (that_d + cs_w)
        + (u0 * bud0 + v0 * bvd0) * (sw * sw) / (omega * omega) * 2.0
        + (bud0 * bud0 + bvd0 * bvd0) / (omega * omega) * (that_d - cs_w))
        * (2.0 * x3);
    // rotate by -t/2 back to the synodic chart
    let ang = -(t * 0.5);
    let (sa, ca) = (ang.sin(), ang.cos());
    let rho = bu * bu + bv * bv;
    let pu = bud + rho * bv * (2.0 * x3);
    let pv = bvd - rho * bu * (2.0 * x3);
    [
        bu * ca - bv * sa,
        bu * sa + bv * ca,
        pu * ca - pv * sa,
        pu * sa + pv * ca,
    ]
}

/// Exact state of the μ = 0 ejection orbit with angle θ₀ at scaled time τ̂.
pub fn kepler_lc_ejection(n: u32, xi: f64, theta0: f64, that: f64) -> State {
    let nf = n as f64;
    let y0: [Dual<0>; 4] = [
        Dual::cst(0.0),
        Dual::cst(0.0),
        Dual::cst(nf * theta0.cos()),
        Dual::cst(nf * theta0.sin()),
    ];
    let y = general_flow(n, xi, &y0, that);
    [y[0].re, y[1].re, y[2].re, y[3].re]
}

/// Exact flow of the μ = 0 system from an arbitrary state (no dual payload).
pub fn kepler_flow(n: u32, xi: f64, y0: &State, that: f64) -> State {
    let yd: [Dual<0>; 4] = [
        Dual::cst(y0[0]),
        Dual::cst(y0[1]),
        Dual::cst(y0[2]),
        Dual::cst(y0[3]),
    ];
    let y = general_flow(n, xi, &yd, that);
    [y[0].re, y[1].re, y[2].re, y[3].re]
}

/// Fundamental matrix X(τ̂) = ∂φ_τ̂(y)/∂y of the μ = 0 flow along the
/// ejection orbit with angle θ₀, with X(0) = I. Computed by forward-mode
/// differentiation of the exact flow, so it satisfies the variational
/// equations to machine precision.
pub fn fundamental_matrix_kepler(n: u32, xi: f64, theta0: f64, that: f64) -> [[f64; 4]; 4] {
    let nf = n as f64;
    let base = [0.0, 0.0, nf * theta0.cos(), nf * theta0.sin()];
    let y0: [Dual<4>; 4] = std::array::from_fn(|i| Dual::var(base[i], i));
    let y = general_flow(n, xi, &y0, that);
    let mut x = [[0.0; 4]; 4];
    for (i, row) in x.iter_mut().enumerate() {
        *row = y[i].du;
    }
    x
}

/// Power-law prediction for the Hill-problem bifurcation values:
/// K̂_p(n) ≈ (2n/p)^{2/3}, the energy at which the p-th root-pair creation
/// happens for n-EC orbits. p = 1 gives the first bifurcation K̂(n).
pub fn k_hat_scaling(n: u32, p: u32) -> f64 {
    (2.0 * n as f64 / p as f64).powf(2.0 / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{EjectionSystem, NormalizedRtbp, RotatingKepler, System};
    use crate::integrator::{propagate, propagate_to_nth_min, IntegratorConfig};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn dual_chain_rule() {
        // d/dx sin(x^2) = 2x cos(x^2) at x = 0.7
        let x: Dual<1> = Dual::var(0.7, 0);
        let y = (x * x).sin();
        assert!(close(y.du[0], 2.0 * 0.7 * (0.49f64).cos(), 1e-15));
        // quotient rule: d/dx (sin x / x)
        let q = x.sin() / x;
        let expect = (0.7f64.cos() * 0.7 - 0.7f64.sin()) / 0.49;
        assert!(close(q.du[0], expect, 1e-15));
    }

    #[test]
    fn series_order_zero_is_oscillator() {
        let y = series_state(0.9, 0.3, 0.1, 0.2, 0).unwrap();
        assert!(close(y[0], 0.3f64.cos() * 0.9f64.sin(), 1e-15));
        assert!(close(y[1], 0.3f64.sin() * 0.9f64.sin(), 1e-15));
        assert!(close(y[2], 0.3f64.cos() * 0.9f64.cos(), 1e-15));
        assert!(close(y[3], 0.3f64.sin() * 0.9f64.cos(), 1e-15));
    }

    #[test]
    fn series_term_six_frozen_oracle() {
        // U6(tau = 2*pi, theta0 = 0.3, mu = 0.1): 30-digit substitution oracle
        let t: Dual<1> = Dual::var(2.0 * PI, 0);
        let (u6, _) = series_term(6, t, 0.3, 0.1);
        assert!(close(u6.re, -2.997939415043965, 1e-12), "{}", u6.re);
    }

    #[test]
    fn series_vanishes_at_ejection() {
        // all terms and their tau-derivatives beyond order 0 vanish at tau=0
        for &j in &SERIES_ORDERS[1..] {
            let t: Dual<1> = Dual::var(0.0, 0);
            let (u, v) = series_term(j, t, 0.7, 0.3);
            assert!(u.re.abs() < 1e-14 && v.re.abs() < 1e-14, "term {j}");
            assert!(u.du[0].abs() < 1e-13 && v.du[0].abs() < 1e-13, "term {j} derivative");
        }
    }

    #[test]
    fn tau_star_frozen_oracle() {
        let t = tau_star_series(2, 0.3, 0.1, 0.2, 10).unwrap();
        assert!(close(t, 6.2833525988801263, 1e-14), "{t}");
    }

    #[test]
    fn momentum_frozen_oracle() {
        let m = momentum_series(2, 0.3, 0.1, 0.2, 10).unwrap();
        assert!(close(m, -1.2218314342574156e-4, 1e-18), "{m}");
    }

    #[test]
    fn series_matches_integration() {
        // order-10 state series vs integrated normalized system at small eps
        let (mu, n, theta0) = (0.1f64, 2u32, 0.55);
        let eps = 0.12;
        let c = 3.0 * mu + (1.0 - mu).powf(2.0 / 3.0) / (eps * eps);
        let sys = NormalizedRtbp::new(mu, c).unwrap();
        let cfg = IntegratorConfig::default();
        let tau = 1.3;
        let tr = propagate(&sys, &sys.ejection_state(theta0), 0.0, tau, &cfg).unwrap();
        let y = series_state(tau, theta0, mu, eps, 10).unwrap();
        for m in 0..4 {
            // remainder is O(eps^11) ~ 1e-10 with an O(100) constant
            assert!(
                (tr.state[m] - y[m]).abs() < 3e-8,
                "component {m}: {} vs {}",
                tr.state[m],
                y[m]
            );
        }
        // momentum and event-time series against the integrated n-th minimum
        let ev = propagate_to_nth_min(&sys, &sys.ejection_state(theta0), n, None, &cfg).unwrap();
        let m_num = crate::integrator::angular_momentum(&ev.state);
        let m_ser = momentum_series(n, theta0, mu, eps, 10).unwrap();
        let t_ser = tau_star_series(n, theta0, mu, eps, 10).unwrap();
        assert!((m_num - m_ser).abs() < 3e-8, "{m_num} vs {m_ser}");
        assert!((ev.tau - t_ser).abs() < 3e-7, "{} vs {t_ser}", ev.tau);
    }

    #[test]
    fn predicted_roots_near_quarter_multiples() {
        let roots = match predicted_roots(2, 0.1, 0.1, 10).unwrap() {
            SeriesRoots::Roots(r) => r,
            SeriesRoots::Degenerate => panic!("unexpected degenerate"),
        };
        assert_eq!(roots.len(), 4, "{roots:?}");
        for (m, r) in roots.iter().enumerate() {
            assert!((r - m as f64 * PI / 4.0).abs() < 0.02, "root {m}: {r}");
        }
    }

    #[test]
    fn predicted_roots_degenerate_at_mu_zero() {
        assert!(matches!(predicted_roots(2, 0.0, 0.2, 10).unwrap(), SeriesRoots::Degenerate));
        assert!(matches!(predicted_roots(2, 0.3, 0.2, 3).unwrap(), SeriesRoots::Degenerate));
    }

    #[test]
    fn kepler_closed_form_matches_integration() {
        let (n, xi, theta0) = (2u32, 0.35, 0.8);
        let sys = RotatingKepler { n, xi };
        let cfg = IntegratorConfig::default();
        let y0 = sys.ejection_state(theta0);
        for &that in &[0.7, 2.0, 5.5] {
            let num = propagate(&sys, &y0, 0.0, that, &cfg).unwrap().state;
            let exact = kepler_lc_ejection(n, xi, theta0, that);
            for m in 0..4 {
                assert!(close(num[m], exact[m], 1e-10), "that={that}: {num:?} vs {exact:?}");
            }
        }
    }

    #[test]
    fn kepler_general_flow_from_generic_state() {
        let (n, xi) = (1u32, 0.4);
        let sys = RotatingKepler { n, xi };
        let cfg = IntegratorConfig::default();
        let y0 = [0.1, -0.2, 0.8, 0.3];
        let that = 1.5;
        let num = propagate(&sys, &y0, 0.0, that, &cfg).unwrap().state;
        let exact = kepler_flow(n, xi, &y0, that);
        for m in 0..4 {
            assert!(close(num[m], exact[m], 1e-10), "{num:?} vs {exact:?}");
        }
        // first integral is preserved exactly by the closed form
        assert!(sys.conserved_residual(&exact).abs() - sys.conserved_residual(&y0).abs() < 1e-12);
    }

    #[test]
    fn kepler_collision_at_n_pi() {
        // the ejection orbit recollides exactly at that = pi (per revolution)
        let y = kepler_lc_ejection(3, 0.3, 0.6, PI);
        assert!(y[0].abs() < 1e-14 && y[1].abs() < 1e-14, "{y:?}");
    }

    #[test]
    fn fundamental_matrix_identity_at_zero() {
        let x = fundamental_matrix_kepler(1, 0.2, 0.9, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(close(x[i][j], expect, 1e-15), "X[{i}][{j}] = {}", x[i][j]);
            }
        }
    }

    #[test]
    fn fundamental_matrix_matches_finite_differences() {
        let (n, xi, theta0, that) = (1u32, 0.2, 0.7, 2.3);
        let x = fundamental_matrix_kepler(n, xi, theta0, that);
        let nf = n as f64;
        let base = [0.0, 0.0, nf * theta0.cos(), nf * theta0.sin()];
        let h = 1e-6;
        for j in 0..4 {
            let mut yp = base;
            let mut ym = base;
            yp[j] += h;
            ym[j] -= h;
            let fp = kepler_flow(n, xi, &yp, that);
            let fm = kepler_flow(n, xi, &ym, that);
            for i in 0..4 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!(close(x[i][j], fd, 1e-7), "X[{i}][{j}] = {} vs fd {}", x[i][j], fd);
            }
        }
    }

    #[test]
    fn k_hat_scaling_values() {
        assert!(close(k_hat_scaling(1, 1), 2.0f64.powf(2.0 / 3.0), 1e-15));
        assert!(close(k_hat_scaling(4, 2), 4.0f64.powf(2.0 / 3.0), 1e-15));
    }
}
