//! Per-mode objectives Ψ(α, θ) = A(α)·θ² − B(α)·ρ(θ)·θ, virtual surpluses
//! φ(θ) = Ψ(α*(θ), θ), their inverses, and a cached curve representation.
//!
//! The generalized coefficients A(α, ζ) and B(α, ζ) cover the two pivotal
//! structures at ζ = 1 (winner) and ζ = 0 (seller); A satisfies the
//! reflection identity A(α, ζ) = A(1−α, 1−ζ). Effort substitution has its
//! own additive-value coefficients. The same A also equals the total
//! surplus created at equilibrium efforts, which is what makes the revenue
//! accounting in the mechanism module close exactly.
//!
//! [`SurplusCurve`] caches α*, φ, the winner's gross payoff and the
//! cumulative envelope integral on a knot grid with monotone cubic
//! interpolation, so Monte Carlo sweeps avoid re-solving the stationarity
//! condition per draw. Exact bisection against φ stays the reference path;
//! cached and exact evaluations agree to 1e-6 by construction tests.

use crate::dist::TypeDistribution;
use crate::error::{Error, Result};
use crate::numerics::{find_root, integrate, QuadConfig, RootConfig};
use crate::sharing::{self, alpha_star, Branch, CollaborationMode, SharingSolution};

/// D(α) = 1 − α + α² = 1 − (1−α)·α, the recurring denominator.
#[inline]
pub fn d_poly(alpha: f64) -> f64 {
    1.0 - alpha + alpha * alpha
}

/// κ(α, ζ) = (α + ζ(1−α)) / D(α): the winner's on-path pivotal base
/// (ζθ + e_s) equals κ·θ under a Dirac posterior.
#[inline]
pub(crate) fn kappa(alpha: f64, zeta: f64) -> f64 {
    (alpha + zeta * (1.0 - alpha)) / d_poly(alpha)
}

/// Generalized coefficients (A, B, H) at share α and interdependence ζ.
///
/// A weights the surplus term θ², B weights the information-rent term
/// ρ(θ)·θ, and H(α, ζ) = (1−α)²·(ζ + α(1−αζ)/D) is the existence-condition
/// weight for the nested mechanism.
pub fn nested_coefficients(alpha: f64, zeta: f64) -> (f64, f64, f64) {
    let a = alpha;
    let z = zeta;
    let d = d_poly(a);
    let one_m_az = 1.0 - a * z;
    let coef_a = z - z * z * (1.0 + a * a) / 2.0 + a * one_m_az * (1.0 - z * a * a) / d
        - a.powi(4) * one_m_az * one_m_az / (2.0 * d * d);
    let coef_b = (1.0 - a) * (z * (2.0 - z * (1.0 + a)) + a * one_m_az * one_m_az / d);
    let coef_h = (1.0 - a) * (1.0 - a) * (z + a * one_m_az / d);
    (coef_a, coef_b, coef_h)
}

/// Analytic ∂A/∂α and ∂B/∂α for the generalized coefficients.
pub(crate) fn nested_coefficient_slopes(alpha: f64, zeta: f64) -> (f64, f64) {
    let a = alpha;
    let z = zeta;
    let d = d_poly(a);
    let dp = 2.0 * a - 1.0;
    let one_m_az = 1.0 - a * z;
    // A = z − z²(1+a²)/2 + n2/D − n3/(2D²)
    let n2 = a * one_m_az * (1.0 - z * a * a);
    let n2p = 1.0 - 2.0 * z * a - 3.0 * z * a * a + 4.0 * z * z * a * a * a;
    let n3 = a.powi(4) * one_m_az * one_m_az;
    let n3p = 2.0 * a.powi(3) * one_m_az * (2.0 - 3.0 * a * z);
    let da = -z * z * a + (n2p * d - n2 * dp) / (d * d)
        - (n3p * d - 2.0 * n3 * dp) / (2.0 * d * d * d);
    // B = (1−a)·I with I = z(2 − z(1+a)) + m/D, m = a(1−az)²
    let m = a * one_m_az * one_m_az;
    let mp = one_m_az * (1.0 - 3.0 * a * z);
    let i_val = z * (2.0 - z * (1.0 + a)) + m / d;
    let ip = -z * z + (mp * d - m * dp) / (d * d);
    let db = -i_val + (1.0 - a) * ip;
    (da, db)
}

/// Surplus-term coefficient A(α) for the given mode.
pub fn coef_a(mode: CollaborationMode, alpha: f64) -> f64 {
    let a = alpha;
    let d = d_poly(a);
    match mode {
        CollaborationMode::WinnerPivotal => {
            (1.0 - 2.0 * a * a * (1.0 - a) - a.powi(4)) / (2.0 * d * d)
        }
        CollaborationMode::SellerPivotal => (2.0 * a * d - a.powi(4)) / (2.0 * d * d),
        CollaborationMode::EffortSubstitution => {
            1.0 - 0.5 * a * a - 0.5 * (1.0 - a) * (1.0 - a)
        }
        CollaborationMode::Nested { zeta } => nested_coefficients(a, zeta).0,
    }
}

/// Information-rent coefficient B(α) for the given mode.
pub fn coef_b(mode: CollaborationMode, alpha: f64) -> f64 {
    let a = alpha;
    let d = d_poly(a);
    match mode {
        CollaborationMode::WinnerPivotal => (1.0 - a) * (1.0 - a) / d,
        CollaborationMode::SellerPivotal => (1.0 - a) * a / d,
        CollaborationMode::EffortSubstitution => 1.0 - a,
        CollaborationMode::Nested { zeta } => nested_coefficients(a, zeta).1,
    }
}

/// Ψ(α, θ): the seller's per-bidder objective before maximizing over α.
pub fn psi(
    mode: CollaborationMode,
    dist: &TypeDistribution,
    alpha: f64,
    theta: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha={alpha} outside [0,1]")));
    }
    mode.validate()?;
    let rho = dist.inverse_hazard(theta)?;
    Ok(coef_a(mode, alpha) * theta * theta - coef_b(mode, alpha) * rho * theta)
}

/// Virtual surplus φ(θ) = max_α Ψ(α, θ) = Ψ(α*(θ), θ).
///
/// Non-negative and non-decreasing on the support for every mode. Effort
/// substitution uses its piecewise closed form directly.
pub fn phi(mode: CollaborationMode, dist: &TypeDistribution, theta: f64) -> Result<f64> {
    mode.validate()?;
    if !dist.contains(theta) {
        return Err(Error::Domain(format!(
            "theta={theta} outside support [{}, {}]",
            dist.theta_lo(),
            dist.theta_hi()
        )));
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    let rho = match dist.inverse_hazard(theta) {
        Ok(r) => r,
        // vanishing density at the bottom of the support: the share corner
        // α = 1 is the limit optimum and its rent term vanishes with B(1)=0
        Err(Error::DegenerateDensity { .. }) if theta == dist.theta_lo() => {
            return Ok(coef_a(mode, 1.0) * theta * theta);
        }
        Err(e) => return Err(e),
    };
    if let CollaborationMode::EffortSubstitution = mode {
        return Ok(phi_es_closed(theta, rho));
    }
    let sol = alpha_star(mode, dist, theta)?;
    Ok(coef_a(mode, sol.alpha) * theta * theta - coef_b(mode, sol.alpha) * rho * theta)
}

/// Effort-substitution virtual surplus in closed form.
fn phi_es_closed(theta: f64, rho: f64) -> f64 {
    if rho >= theta {
        0.5 * theta * theta
    } else {
        0.75 * theta * theta + 0.25 * rho * rho - 0.5 * rho * theta
    }
}

/// Inverse of the virtual surplus: θ with φ(θ) = p, clamped to the top type
/// for p above the range (the off-path posterior convention). Errors for p
/// below φ(theta_lo).
pub fn phi_inverse(mode: CollaborationMode, dist: &TypeDistribution, p: f64) -> Result<f64> {
    let lo = dist.theta_lo();
    let hi = dist.theta_hi();
    let phi_lo = phi(mode, dist, lo)?;
    let phi_hi = phi(mode, dist, hi)?;
    let scale = phi_hi.abs().max(1.0);
    if p < phi_lo - 1e-12 * scale {
        return Err(Error::Domain(format!(
            "p={p} below virtual-surplus range [{phi_lo}, {phi_hi}]"
        )));
    }
    if p >= phi_hi {
        return Ok(hi);
    }
    if p <= phi_lo {
        return Ok(lo);
    }
    find_root(
        |t| phi(mode, dist, t).unwrap_or(f64::NAN) - p,
        lo,
        hi,
        &RootConfig {
            abs_tol: 1e-13 * dist.range().max(1.0),
            max_iter: 300,
        },
    )
}

/// The winner's equilibrium value-sharing payoff (before cash) at share α,
/// true type θ, and a truthful Dirac posterior.
pub fn gross_winner_payoff(mode: CollaborationMode, alpha: f64, theta: f64) -> f64 {
    match mode.zeta() {
        None => 0.5 * (1.0 - alpha * alpha) * theta * theta,
        Some(zeta) => {
            let k = kappa(alpha, zeta);
            let one_m_a = 1.0 - alpha;
            one_m_a * (1.0 - zeta) * k * theta * theta
                + 0.5 * one_m_a * one_m_a * k * k * theta * theta
        }
    }
}

/// Envelope weight w(θ) = B(α)·θ: the derivative of the winner's interim
/// payoff with respect to his type. Cash payments integrate this between
/// the pivot type and the winner's type.
#[inline]
pub fn env_weight(mode: CollaborationMode, alpha: f64, theta: f64) -> f64 {
    coef_b(mode, alpha) * theta
}

/// Exact envelope integral ∫_a^b B(α*(τ))·τ dτ by adaptive quadrature,
/// re-solving the sharing rate at every abscissa.
pub fn env_integral_exact(
    mode: CollaborationMode,
    dist: &TypeDistribution,
    a: f64,
    b: f64,
    quad: &QuadConfig,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    integrate(
        |tau| match alpha_star(mode, dist, tau) {
            Ok(sol) => env_weight(mode, sol.alpha, tau),
            Err(_) => 0.0,
        },
        a,
        b,
        quad,
    )
}

/// First type (if any) above which the optimal share leaves the corner
/// α = 1: solves ρ(θ)/θ = 1 for the seller-pivotal and effort-substitution
/// modes and ρ(θ)/θ = 1/(1−ζ²) for the nested mode. `None` when the mode
/// has no corner region or the whole support is interior.
pub fn corner_threshold(
    mode: CollaborationMode,
    dist: &TypeDistribution,
) -> Result<Option<f64>> {
    let level = match mode {
        CollaborationMode::WinnerPivotal => return Ok(None),
        CollaborationMode::SellerPivotal | CollaborationMode::EffortSubstitution => 1.0,
        CollaborationMode::Nested { zeta } => {
            if zeta >= 1.0 {
                return Ok(None);
            }
            1.0 / (1.0 - zeta * zeta)
        }
    };
    let lo = dist.theta_lo();
    let hi = dist.theta_hi();
    let g = |t: f64| match dist.inverse_hazard(t) {
        Ok(rho) => rho - level * t,
        Err(_) => f64::INFINITY,
    };
    if g(lo) <= 0.0 {
        return Ok(None);
    }
    let root = find_root(
        g,
        lo,
        hi,
        &RootConfig {
            abs_tol: 1e-15 * dist.range().max(1.0),
            max_iter: 300,
        },
    )?;
    Ok(Some(root))
}

// ---------------------------------------------------------------------------
// Monotone cubic interpolation (Fritsch–Carlson)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub(crate) struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ms: Vec<f64>,
}

impl Pchip {
    pub(crate) fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        assert!(n >= 2 && ys.len() == n);
        let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ms = vec![0.0; n];
        ms[0] = endpoint_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        ms[n - 1] = endpoint_slope(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );
        for i in 1..n - 1 {
            let (d0, d1) = (delta[i - 1], delta[i]);
            if d0 * d1 <= 0.0 {
                ms[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                ms[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }
        Self { xs, ys, ms }
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.xs[lo + 1] - self.xs[lo];
        let t = (x - self.xs[lo]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[lo] + h10 * h * self.ms[lo] + h01 * self.ys[lo + 1] + h11 * h * self.ms[lo + 1]
    }

    pub(crate) fn first_y(&self) -> f64 {
        self.ys[0]
    }

    pub(crate) fn last_y(&self) -> f64 {
        *self.ys.last().unwrap()
    }
}

fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

// ---------------------------------------------------------------------------
// Cached surplus curve
// ---------------------------------------------------------------------------

/// Default knot count for [`SurplusCurve`].
pub const CURVE_GRID_N: usize = 512;

/// Cached per-distribution curves for one collaboration mode: α*(θ), φ(θ),
/// the winner's gross payoff, and the cumulative envelope integral
/// Ω(θ) = ∫ B(α*(τ))·τ dτ, all with monotone cubic interpolation between
/// exactly-solved knots. The corner threshold, when present, is inserted as
/// a knot so the kink is represented exactly.
#[derive(Debug, Clone)]
pub struct SurplusCurve {
    mode: CollaborationMode,
    dist: TypeDistribution,
    nodes: Vec<f64>,
    alphas: Vec<f64>,
    branches: Vec<Branch>,
    alpha_c: Pchip,
    phi_c: Pchip,
    gross_c: Pchip,
    env_c: Pchip,
    kink: Option<f64>,
}

impl SurplusCurve {
    pub fn build(mode: CollaborationMode, dist: &TypeDistribution) -> Result<Self> {
        Self::build_with(mode, dist, CURVE_GRID_N)
    }

    pub fn build_with(
        mode: CollaborationMode,
        dist: &TypeDistribution,
        n: usize,
    ) -> Result<Self> {
        mode.validate()?;
        let kink = corner_threshold(mode, dist)?;
        let mut nodes = dist.grid(n.max(8));
        if let Some(k) = kink {
            if k > dist.theta_lo() && k < dist.theta_hi() {
                nodes.push(k);
                // graded knots above the corner: the share leaves α = 1 with
                // a derivative kink and high curvature there
                for j in 2..=12 {
                    let t = k + dist.range() * 0.5f64.powi(j);
                    if t < dist.theta_hi() {
                        nodes.push(t);
                    }
                }
            }
        }
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * dist.range());

        let nested_solver = match mode {
            CollaborationMode::Nested { zeta } => Some(sharing::NestedSolver::new(zeta)),
            _ => None,
        };
        let solve = |theta: f64| -> Result<SharingSolution> {
            if theta <= 0.0 {
                return alpha_star(mode, dist, theta);
            }
            match (&nested_solver, dist.inverse_hazard(theta)) {
                (Some(ns), Ok(rho)) => Ok(ns.solve(theta, rho)),
                _ => alpha_star(mode, dist, theta),
            }
        };

        let mut alphas = Vec::with_capacity(nodes.len());
        let mut branches = Vec::with_capacity(nodes.len());
        let mut phis = Vec::with_capacity(nodes.len());
        let mut grosses = Vec::with_capacity(nodes.len());
        for &t in &nodes {
            let sol = solve(t)?;
            alphas.push(sol.alpha);
            branches.push(sol.branch);
            phis.push(phi(mode, dist, t)?);
            grosses.push(gross_winner_payoff(mode, sol.alpha, t));
        }
        let alpha_c = Pchip::new(nodes.clone(), alphas.clone());

        // cumulative envelope integral via per-interval Simpson panels on
        // the interpolated share curve
        let mut env = Vec::with_capacity(nodes.len());
        env.push(0.0);
        let w = |theta: f64| env_weight(mode, alpha_c.eval(theta), theta);
        for i in 1..nodes.len() {
            let (a, b) = (nodes[i - 1], nodes[i]);
            let panels = 8;
            let h = (b - a) / panels as f64;
            let mut acc = 0.0;
            for p in 0..panels {
                let x0 = a + h * p as f64;
                let x1 = x0 + h;
                acc += h / 6.0 * (w(x0) + 4.0 * w(0.5 * (x0 + x1)) + w(x1));
            }
            env.push(env[i - 1] + acc);
        }

        Ok(Self {
            mode,
            dist: *dist,
            phi_c: Pchip::new(nodes.clone(), phis),
            gross_c: Pchip::new(nodes.clone(), grosses),
            env_c: Pchip::new(nodes.clone(), env),
            alpha_c,
            alphas,
            branches,
            nodes,
            kink,
        })
    }

    pub fn mode(&self) -> CollaborationMode {
        self.mode
    }

    pub fn dist(&self) -> &TypeDistribution {
        &self.dist
    }

    /// Corner-threshold knot, when the mode has a pooling region.
    pub fn corner_kink(&self) -> Option<f64> {
        self.kink
    }

    pub(crate) fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn alpha(&self, theta: f64) -> f64 {
        self.alpha_c.eval(theta).clamp(0.0, 1.0)
    }

    pub fn phi(&self, theta: f64) -> f64 {
        self.phi_c.eval(theta)
    }

    pub fn gross(&self, theta: f64) -> f64 {
        self.gross_c.eval(theta)
    }

    /// Ω(θ) = ∫_{theta_lo}^{θ} B(α*(τ))·τ dτ.
    pub fn env_cum(&self, theta: f64) -> f64 {
        self.env_c.eval(theta)
    }

    pub fn env_integral(&self, a: f64, b: f64) -> f64 {
        self.env_c.eval(b) - self.env_c.eval(a)
    }

    pub fn phi_range(&self) -> (f64, f64) {
        (self.phi_c.first_y(), self.phi_c.last_y())
    }

    /// Inverse of the cached φ; clamps to the support ends outside the range.
    pub fn phi_inverse(&self, p: f64) -> f64 {
        let (lo_v, hi_v) = self.phi_range();
        if p <= lo_v {
            return self.dist.theta_lo();
        }
        if p >= hi_v {
            return self.dist.theta_hi();
        }
        let mut lo = self.dist.theta_lo();
        let mut hi = self.dist.theta_hi();
        for _ in 0..200 {
            if hi - lo <= 1e-14 * self.dist.range() {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.phi_c.eval(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Knot samples as (theta, alpha_star, phi, branch) rows.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64, Branch)> + '_ {
        self.nodes
            .iter()
            .zip(&self.alphas)
            .zip(&self.branches)
            .map(|((&t, &a), &b)| (t, a, self.phi_c.eval(t), b))
    }

    /// CSV export with columns `theta,alpha_star,phi,branch`.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "theta,alpha_star,phi,branch")?;
        for (t, a, p, b) in self.samples() {
            writeln!(out, "{t},{a},{p},{}", b.label())?;
        }
        Ok(())
    }
}
