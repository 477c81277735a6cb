//! Optimal value-sharing rate solvers.
//!
//! For each collaboration structure the seller's per-bidder objective is
//! `Ψ(α, θ) = A(α)·θ² − B(α)·ρ(θ)·θ` over the share `α ∈ [0, 1]` kept by the
//! seller, with `ρ` the inverse hazard. The winner- and seller-pivotal
//! maximizers satisfy cubic stationarity conditions in `α`:
//!
//! * winner-pivotal:  (α³ − 3α² + 4α − 1) / (D(α)·(1 − α²)) = ρ(θ)/θ
//! * seller-pivotal:  (α³ + α − 1) / (D(α)·(2α − 1))        = ρ(θ)/θ
//!
//! where `D(α) = 1 − α + α²`. Both left-hand sides are strictly increasing
//! where relevant, so a bracketed root solve is exact. The solvers work in
//! the complement `u = 1 − α` and bracket in log space, because the root
//! approaches `α = 1` like `θ / (2ρ)` for small types and absolute
//! residual control there needs full relative precision in `1 − α`.
//!
//! The effort-substitution rate is closed-form, and the nested-structure
//! rate is found by a global grid scan plus derivative refinement (no
//! uniqueness result is available for it in general).

use crate::dist::TypeDistribution;
use crate::error::{Error, Result};
use crate::numerics::{find_root, RootConfig};
use crate::surplus;

/// Which value-creation structure governs the aftermarket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollaborationMode {
    /// V = (θ + e_s) · e_b
    WinnerPivotal,
    /// V = (θ + e_b) · e_s
    SellerPivotal,
    /// V = θ · (e_s + e_b)
    EffortSubstitution,
    /// V = (ζθ + e_s) · ((1−ζ)θ + e_b); ζ=1 is winner-pivotal, ζ=0 seller-pivotal.
    Nested { zeta: f64 },
}

impl CollaborationMode {
    pub fn label(&self) -> String {
        match self {
            CollaborationMode::WinnerPivotal => "winner-pivotal".to_string(),
            CollaborationMode::SellerPivotal => "seller-pivotal".to_string(),
            CollaborationMode::EffortSubstitution => "effort-substitution".to_string(),
            CollaborationMode::Nested { zeta } => format!("nested(zeta={zeta})"),
        }
    }

    /// Interdependence weight for the product-form value functions.
    /// `None` for effort substitution, whose value function is additive.
    pub fn zeta(&self) -> Option<f64> {
        match self {
            CollaborationMode::WinnerPivotal => Some(1.0),
            CollaborationMode::SellerPivotal => Some(0.0),
            CollaborationMode::Nested { zeta } => Some(*zeta),
            CollaborationMode::EffortSubstitution => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let CollaborationMode::Nested { zeta } = self {
            if !(0.0..=1.0).contains(zeta) {
                return Err(Error::InvalidParameters(format!(
                    "zeta must lie in [0,1], got {zeta}"
                )));
            }
        }
        Ok(())
    }
}

/// Which part of the share domain the solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Interior,
    CornerOne,
    /// θ = 0 convention: the right limit of the interior solution.
    LimitAtZeroType,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Branch::Interior => "interior",
            Branch::CornerOne => "corner",
            Branch::LimitAtZeroType => "limit-at-zero",
        }
    }
}

/// A solved sharing rate with its stationarity residual.
///
/// For the cubic solvers the residual is `|LHS(α) − ρ/θ|`; for the nested
/// solver it is `|∂Ψ/∂α|` at the solution. Corners carry residual 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharingSolution {
    pub alpha: f64,
    pub branch: Branch,
    pub residual: f64,
}

impl SharingSolution {
    fn corner() -> Self {
        Self {
            alpha: 1.0,
            branch: Branch::CornerOne,
            residual: 0.0,
        }
    }

    fn zero_type_limit() -> Self {
        Self {
            alpha: 1.0,
            branch: Branch::LimitAtZeroType,
            residual: 0.0,
        }
    }
}

/// Root of u³ + u − 1: numerator zero of the winner-pivotal condition in
/// u = 1 − α, i.e. the top-type share is α = 1 − U_WP0 ≈ 0.3177.
pub(crate) const U_WP0: f64 = 0.682_327_803_828_019_3;
/// Root of 1 − 4u + 3u² − u³: numerator zero of the seller-pivotal
/// condition in u = 1 − α, giving the top-type share α ≈ 0.6823.
pub(crate) const U_SP0: f64 = 0.317_672_196_171_980_7;

/// Winner-pivotal stationarity LHS in u = 1 − α.
fn lhs_wp_u(u: f64) -> f64 {
    (1.0 - u - u * u * u) / ((1.0 - u + u * u) * u * (2.0 - u))
}

/// Seller-pivotal stationarity LHS in u = 1 − α.
fn lhs_sp_u(u: f64) -> f64 {
    (1.0 - 4.0 * u + 3.0 * u * u - u * u * u) / ((1.0 - u + u * u) * (1.0 - 2.0 * u))
}

/// Solves `lhs(u) = r` on `(0, u_hi]` where `lhs` is strictly decreasing,
/// via log-space bisection plus a secant polish in u.
fn solve_decreasing_u<F: Fn(f64) -> f64>(lhs: F, u_hi: f64, r: f64) -> (f64, f64) {
    if r <= 0.0 {
        return (u_hi, (lhs(u_hi) - r).abs());
    }
    let g = |u: f64| lhs(u) - r;
    let v = find_root(
        |v: f64| g(v.exp()),
        1e-300_f64.ln(),
        u_hi.ln(),
        &RootConfig {
            abs_tol: 1e-13,
            max_iter: 300,
        },
    )
    .expect("monotone bracket");
    let mut best_u = v.exp();
    let mut best_g = g(best_u);
    // secant polish in u-space for the last digits of the residual
    let mut u0 = best_u * (1.0 - 1e-9);
    let mut g0 = g(u0);
    let mut u1 = best_u;
    let mut g1 = best_g;
    for _ in 0..6 {
        let denom = g1 - g0;
        if denom == 0.0 {
            break;
        }
        let u2 = (u1 - g1 * (u1 - u0) / denom).clamp(1e-300, u_hi);
        let g2 = g(u2);
        if g2.abs() < best_g.abs() {
            best_g = g2;
            best_u = u2;
        }
        u0 = u1;
        g0 = g1;
        u1 = u2;
        g1 = g2;
        if g1 == 0.0 {
            break;
        }
    }
    (best_u, best_g.abs())
}

/// ρ(θ)/θ, treating a vanishing density at the bottom knot as +∞ (the
/// corner α = 1 is the limit optimum there).
fn rho_over_theta(dist: &TypeDistribution, theta: f64) -> Result<f64> {
    match dist.inverse_hazard(theta) {
        Ok(r) => Ok(r / theta),
        Err(Error::DegenerateDensity { .. }) if theta == dist.theta_lo() => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Optimal seller share under winner-pivotal collaboration. Always interior.
pub fn alpha_wp(dist: &TypeDistribution, theta: f64) -> Result<SharingSolution> {
    if theta <= 0.0 {
        if dist.contains(theta) {
            return Ok(SharingSolution::zero_type_limit());
        }
        return Err(Error::Domain(format!("theta={theta} outside support")));
    }
    let r = rho_over_theta(dist, theta)?;
    if r.is_infinite() {
        return Ok(SharingSolution::zero_type_limit());
    }
    let (u, residual) = solve_decreasing_u(lhs_wp_u, U_WP0, r);
    Ok(SharingSolution {
        alpha: 1.0 - u,
        branch: Branch::Interior,
        residual,
    })
}

/// Optimal seller share under seller-pivotal collaboration. Full extraction
/// (α = 1) on the pooling region ρ(θ)/θ ≥ 1; interior in (2/3, 1) above it.
pub fn alpha_sp(dist: &TypeDistribution, theta: f64) -> Result<SharingSolution> {
    if theta <= 0.0 {
        if dist.contains(theta) {
            return Ok(SharingSolution::zero_type_limit());
        }
        return Err(Error::Domain(format!("theta={theta} outside support")));
    }
    let r = rho_over_theta(dist, theta)?;
    if r >= 1.0 {
        return Ok(SharingSolution::corner());
    }
    let (u, residual) = solve_decreasing_u(lhs_sp_u, U_SP0, r);
    Ok(SharingSolution {
        alpha: 1.0 - u,
        branch: Branch::Interior,
        residual,
    })
}

/// Threshold type below which the seller-pivotal optimum is the corner
/// α = 1: the unique solution of ρ(θ)/θ = 1, or `theta_lo` when the whole
/// support is already interior.
pub fn theta_c(dist: &TypeDistribution) -> Result<f64> {
    let lo = dist.theta_lo();
    let hi = dist.theta_hi();
    // g(θ) = ρ(θ) − θ is strictly decreasing and shares the root of ρ/θ = 1;
    // a vanishing density counts as ρ = +∞
    let g = |t: f64| match dist.inverse_hazard(t) {
        Ok(rho) => rho - t,
        Err(_) => f64::INFINITY,
    };
    if g(lo) <= 0.0 {
        return Ok(lo);
    }
    find_root(
        g,
        lo,
        hi,
        &RootConfig {
            abs_tol: 1e-15 * dist.range().max(1.0),
            max_iter: 300,
        },
    )
}

/// Optimal seller share under effort substitution: closed form
/// α = (1 + ρ(θ)/θ) / 2, capped at the corner α = 1 below the threshold.
pub fn alpha_es(dist: &TypeDistribution, theta: f64) -> Result<SharingSolution> {
    if theta <= 0.0 {
        if dist.contains(theta) {
            return Ok(SharingSolution::zero_type_limit());
        }
        return Err(Error::Domain(format!("theta={theta} outside support")));
    }
    let r = rho_over_theta(dist, theta)?;
    if r >= 1.0 {
        return Ok(SharingSolution::corner());
    }
    let alpha = 0.5 * (1.0 + r);
    let rho = r * theta;
    Ok(SharingSolution {
        alpha,
        branch: Branch::Interior,
        residual: ((1.0 - 2.0 * alpha) * theta * theta + rho * theta).abs(),
    })
}

/// Grid size of the global scan used by the nested solver.
pub const NESTED_GRID_N: usize = 2048;

/// Nested-mode solver with the coefficient tables for one ζ precomputed,
/// so sweeps over θ pay the A/B evaluation cost once.
pub(crate) struct NestedSolver {
    zeta: f64,
    a_tab: Vec<f64>,
    b_tab: Vec<f64>,
}

impl NestedSolver {
    pub(crate) fn new(zeta: f64) -> Self {
        let n = NESTED_GRID_N;
        let mut a_tab = Vec::with_capacity(n);
        let mut b_tab = Vec::with_capacity(n);
        for i in 0..n {
            let a = i as f64 / (n - 1) as f64;
            let (ca, cb, _) = surplus::nested_coefficients(a, zeta);
            a_tab.push(ca);
            b_tab.push(cb);
        }
        Self { zeta, a_tab, b_tab }
    }

    /// Global scan of Ψ(·, θ, ζ) plus a derivative root refinement on the
    /// bracketing cell. Ties on the scan resolve to the smallest α.
    pub(crate) fn solve(&self, theta: f64, rho: f64) -> SharingSolution {
        let n = self.a_tab.len();
        let step = 1.0 / (n - 1) as f64;
        let t2 = theta * theta;
        let rt = rho * theta;
        let mut best_i = 0usize;
        let mut best_v = self.a_tab[0] * t2 - self.b_tab[0] * rt;
        for i in 1..n {
            let v = self.a_tab[i] * t2 - self.b_tab[i] * rt;
            if v > best_v {
                best_v = v;
                best_i = i;
            }
        }
        let zeta = self.zeta;
        let psi = |a: f64| {
            let (ca, cb, _) = surplus::nested_coefficients(a, zeta);
            ca * t2 - cb * rt
        };
        let dpsi = |a: f64| {
            let (da, db) = surplus::nested_coefficient_slopes(a, zeta);
            da * t2 - db * rt
        };
        if best_i == n - 1 && dpsi(1.0) >= 0.0 {
            return SharingSolution::corner();
        }
        let cell_lo = if best_i == 0 { 0.0 } else { step * (best_i - 1) as f64 };
        let cell_hi = if best_i == n - 1 { 1.0 } else { step * (best_i + 1) as f64 };
        let (d_lo, d_hi) = (dpsi(cell_lo), dpsi(cell_hi));
        let alpha = if d_lo >= 0.0 && d_hi <= 0.0 {
            find_root(
                dpsi,
                cell_lo,
                cell_hi,
                &RootConfig {
                    abs_tol: 1e-15,
                    max_iter: 300,
                },
            )
            .unwrap_or(0.5 * (cell_lo + cell_hi))
        } else {
            // no stationarity bracket (flat or boundary cell): golden-section only
            crate::numerics::maximize_bounded(psi, cell_lo, cell_hi, 3).0
        };
        if alpha >= 1.0 - 1e-9 {
            return SharingSolution::corner();
        }
        SharingSolution {
            alpha,
            branch: Branch::Interior,
            residual: dpsi(alpha).abs(),
        }
    }
}

/// Optimal seller share for the nested value structure with interdependence
/// ζ: global 2048-point scan of Ψ(·, θ, ζ) followed by a derivative root
/// refinement on the bracketing cell.
pub fn alpha_nested(dist: &TypeDistribution, theta: f64, zeta: f64) -> Result<SharingSolution> {
    if !(0.0..=1.0).contains(&zeta) {
        return Err(Error::InvalidParameters(format!(
            "zeta must lie in [0,1], got {zeta}"
        )));
    }
    if theta <= 0.0 {
        if dist.contains(theta) {
            return Ok(SharingSolution::zero_type_limit());
        }
        return Err(Error::Domain(format!("theta={theta} outside support")));
    }
    let rho = match dist.inverse_hazard(theta) {
        Ok(r) => r,
        Err(Error::DegenerateDensity { .. }) if theta == dist.theta_lo() => {
            // vanishing density at the bottom: the corner is the limit optimum
            return Ok(if zeta < 1.0 {
                SharingSolution::corner()
            } else {
                SharingSolution::zero_type_limit()
            });
        }
        Err(e) => return Err(e),
    };
    Ok(NestedSolver::new(zeta).solve(theta, rho))
}

/// Dispatches to the solver for the given mode.
pub fn alpha_star(
    mode: CollaborationMode,
    dist: &TypeDistribution,
    theta: f64,
) -> Result<SharingSolution> {
    match mode {
        CollaborationMode::WinnerPivotal => alpha_wp(dist, theta),
        CollaborationMode::SellerPivotal => alpha_sp(dist, theta),
        CollaborationMode::EffortSubstitution => alpha_es(dist, theta),
        CollaborationMode::Nested { zeta } => alpha_nested(dist, theta, zeta),
    }
}

/// Signs of ∂A/∂α and ∂H/∂α at the nested maximizer, evaluated by central
/// finite differences with step 1e-6. These are the existence conditions for
/// the nested-mode mechanism; they are only informative at interior
/// maximizers (the corner branch is handled by its own monotonicity
/// argument, so corners report as satisfied).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    pub alpha: f64,
    pub a_slope: f64,
    pub h_slope: f64,
    pub corner: bool,
    pub satisfied: bool,
}

/// Slack below which a finite-difference slope counts as non-positive; at
/// the top type the stationarity forces ∂A/∂α = 0 exactly, so a strict
/// sign test would be pure rounding noise there.
pub const CONDITION_SLOPE_TOL: f64 = 1e-8;

pub fn check_existence_conditions(
    dist: &TypeDistribution,
    theta: f64,
    zeta: f64,
) -> Result<ConditionReport> {
    let sol = alpha_nested(dist, theta, zeta)?;
    let alpha = sol.alpha;
    if sol.branch != Branch::Interior {
        let h = 1e-6;
        let slope_a = fd_slope(|a| surplus::nested_coefficients(a, zeta).0, alpha, h);
        let slope_h = fd_slope(|a| surplus::nested_coefficients(a, zeta).2, alpha, h);
        return Ok(ConditionReport {
            alpha,
            a_slope: slope_a,
            h_slope: slope_h,
            corner: true,
            satisfied: true,
        });
    }
    let h = 1e-6;
    let a_slope = fd_slope(|a| surplus::nested_coefficients(a, zeta).0, alpha, h);
    let h_slope = fd_slope(|a| surplus::nested_coefficients(a, zeta).2, alpha, h);
    Ok(ConditionReport {
        alpha,
        a_slope,
        h_slope,
        corner: false,
        satisfied: a_slope < CONDITION_SLOPE_TOL && h_slope < CONDITION_SLOPE_TOL,
    })
}

/// Central difference with the stencil shifted to stay inside [0, 1].
fn fd_slope<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let c = x.clamp(h, 1.0 - h);
    (f(c + h) - f(c - h)) / (2.0 * h)
}
