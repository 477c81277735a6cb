//! Numerical verification of the comparative results: sharing dominance,
//! effort ordering, revenue ranking, ascending-auction implementation, and
//! the seller's preferred interdependence weight. Each check returns a
//! [`PropResult`] with a worst margin, so the CLI can render a verdict
//! table and tests can assert on it.

use crate::auction::{revenue_equivalence_check, AuctionConfig};
use crate::dist::{BidderProfile, TypeDistribution};
use crate::error::Result;
use crate::mechanism::{efforts, expected_max_virtual_surplus, Market, PosteriorBelief};
use crate::numerics::{integrate, McConfig, QuadConfig};
use crate::sharing::{alpha_sp, alpha_wp, CollaborationMode, SharingSolution};
use crate::surplus::SurplusCurve;
use std::time::Instant;

/// Verdict for one proposition on one distribution.
#[derive(Debug, Clone)]
pub struct PropResult {
    pub proposition: &'static str,
    pub distribution: String,
    pub pass: bool,
    /// Smallest slack observed; negative means the claim failed by that much.
    pub worst_margin: f64,
    pub runtime_ms: f64,
}

impl PropResult {
    fn finish(
        proposition: &'static str,
        distribution: &str,
        start: Instant,
        pass: bool,
        worst_margin: f64,
    ) -> Self {
        Self {
            proposition,
            distribution: distribution.to_string(),
            pass,
            worst_margin,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        }
    }
}

/// Tolerance for the pointwise share-dominance comparison.
pub const DOMINANCE_TOL: f64 = 1e-9;
/// Margin demanded of the strict effort-ordering inequalities.
pub const EFFORT_MARGIN: f64 = 1e-12;

/// Sharing dominance with injectable solvers, so a corrupted solver can be
/// shown to surface as FAIL.
pub fn check_sharing_dominance_with<FW, FS>(
    dist: &TypeDistribution,
    name: &str,
    grid_n: usize,
    wp_solver: FW,
    sp_solver: FS,
) -> Result<PropResult>
where
    FW: Fn(&TypeDistribution, f64) -> Result<SharingSolution>,
    FS: Fn(&TypeDistribution, f64) -> Result<SharingSolution>,
{
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for i in 1..=grid_n {
        let theta = dist.theta_lo() + dist.range() * i as f64 / grid_n as f64;
        let wp = wp_solver(dist, theta)?.alpha;
        let sp = sp_solver(dist, theta)?.alpha;
        worst = worst.min(sp - wp);
    }
    Ok(PropResult::finish(
        "sharing-dominance",
        name,
        start,
        worst >= -DOMINANCE_TOL,
        worst,
    ))
}

/// α_sp(θ) ≥ α_wp(θ) pointwise.
pub fn check_sharing_dominance(
    dist: &TypeDistribution,
    name: &str,
    grid_n: usize,
) -> Result<PropResult> {
    check_sharing_dominance_with(dist, name, grid_n, alpha_wp, alpha_sp)
}

/// The four strict effort-ordering inequalities at interior grid types:
/// pivotal parties out-work supporting parties, and each party works harder
/// when pivotal.
pub fn check_effort_ordering(
    dist: &TypeDistribution,
    name: &str,
    grid_n: usize,
) -> Result<PropResult> {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for i in 1..grid_n {
        let theta = dist.theta_lo() + dist.range() * i as f64 / grid_n as f64;
        if theta <= 0.0 {
            continue;
        }
        let post = PosteriorBelief::dirac(theta);
        let a_wp = alpha_wp(dist, theta)?.alpha;
        let a_sp = alpha_sp(dist, theta)?.alpha;
        let (wp_s, wp_b) = efforts(CollaborationMode::WinnerPivotal, a_wp, theta, &post);
        let (sp_s, sp_b) = efforts(CollaborationMode::SellerPivotal, a_sp, theta, &post);
        worst = worst
            .min(wp_b - wp_s)
            .min(sp_s - sp_b)
            .min(wp_b - sp_b)
            .min(sp_s - wp_s);
    }
    Ok(PropResult::finish(
        "effort-ordering",
        name,
        start,
        worst > EFFORT_MARGIN,
        worst,
    ))
}

fn identical_market(dist: &TypeDistribution, n: usize, mode: CollaborationMode) -> Result<Market> {
    Market::new(
        (0..n).map(|i| BidderProfile::new(i, *dist)).collect(),
        mode,
    )
}

/// Seller-pivotal collaboration out-earns winner-pivotal for every bidder
/// count in `ns`; the gap must clear `10 × rel_tol` of the quadrature.
pub fn check_revenue_ranking(
    dist: &TypeDistribution,
    name: &str,
    ns: &[usize],
    quad: &QuadConfig,
) -> Result<PropResult> {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for &n in ns {
        let wp = expected_max_virtual_surplus(
            &identical_market(dist, n, CollaborationMode::WinnerPivotal)?,
            quad,
        )?;
        let sp = expected_max_virtual_surplus(
            &identical_market(dist, n, CollaborationMode::SellerPivotal)?,
            quad,
        )?;
        let needed = 10.0 * quad.rel_tol * sp.abs().max(1.0);
        worst = worst.min(sp - wp - needed);
    }
    Ok(PropResult::finish(
        "revenue-ranking",
        name,
        start,
        worst > 0.0,
        worst,
    ))
}

/// Winner-pivotal implementation: paired auction/direct revenue agrees.
pub fn check_wp_implementation(
    dist: &TypeDistribution,
    name: &str,
    mc: &McConfig,
) -> Result<PropResult> {
    let start = Instant::now();
    let market = identical_market(dist, 2, CollaborationMode::WinnerPivotal)?;
    let report = revenue_equivalence_check(&market, &AuctionConfig::winner_pivotal(), mc)?;
    let row = &report.rows[0];
    let margin = 1e-8 - row.max_abs_gap;
    Ok(PropResult::finish(
        "wp-implementation",
        name,
        start,
        report.passed && margin > 0.0,
        margin,
    ))
}

/// Seller-pivotal approximate implementation: the revenue gap shrinks
/// monotonically across ε ∈ {1e-2, 1e-3, 1e-4} within Monte Carlo error.
pub fn check_sp_implementation(
    dist: &TypeDistribution,
    name: &str,
    mc: &McConfig,
) -> Result<PropResult> {
    let start = Instant::now();
    let market = identical_market(dist, 2, CollaborationMode::SellerPivotal)?;
    let report = revenue_equivalence_check(&market, &AuctionConfig::seller_pivotal(1e-3), mc)?;
    // margin: smallest monotonicity slack across the ε ladder
    let mut worst = f64::INFINITY;
    for w in report.rows.windows(2) {
        let tol = 3.0 * (w[0].paired_se + w[1].paired_se);
        worst = worst.min(w[0].mean_gap - w[1].mean_gap + tol);
    }
    Ok(PropResult::finish(
        "sp-implementation",
        name,
        start,
        report.passed,
        worst,
    ))
}

/// E[max_i φ(θ_i, ζ)] for `n` identical bidders from a cached curve.
pub fn expected_max_phi_curve(curve: &SurplusCurve, n: usize, quad: &QuadConfig) -> Result<f64> {
    let d = curve.dist();
    let nf = n as f64;
    integrate(
        |t| {
            nf * curve.phi(t) * d.cdf_unchecked(t).powf(nf - 1.0) * d.pdf_unchecked(t)
        },
        d.theta_lo(),
        d.theta_hi(),
        quad,
    )
}

/// Sweep of the seller's payoff upper bound over the interdependence grid.
#[derive(Debug, Clone)]
pub struct ZetaSweep {
    pub zetas: Vec<f64>,
    pub revenues: Vec<f64>,
    pub argmax: f64,
}

/// Grid search over ζ of the expected payoff bound; the seller's preferred
/// weight must land at or below 1/2 (her own effort more critical).
pub fn zeta_sweep(
    dist: &TypeDistribution,
    n_bidders: usize,
    step: f64,
    quad: &QuadConfig,
) -> Result<ZetaSweep> {
    let mut zetas = Vec::new();
    let mut revenues = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut argmax = 0.0;
    let steps = (1.0 / step).round() as usize;
    for k in 0..=steps {
        let zeta = (k as f64 * step).min(1.0);
        let curve = SurplusCurve::build(CollaborationMode::Nested { zeta }, dist)?;
        let rev = expected_max_phi_curve(&curve, n_bidders, quad)?;
        if rev > best {
            best = rev;
            argmax = zeta;
        }
        zetas.push(zeta);
        revenues.push(rev);
    }
    Ok(ZetaSweep {
        zetas,
        revenues,
        argmax,
    })
}

pub fn check_zeta_star(
    dist: &TypeDistribution,
    name: &str,
    step: f64,
    quad: &QuadConfig,
) -> Result<PropResult> {
    let start = Instant::now();
    let sweep = zeta_sweep(dist, 2, step, quad)?;
    Ok(PropResult::finish(
        "zeta-star",
        name,
        start,
        sweep.argmax <= 0.5,
        0.5 - sweep.argmax,
    ))
}

/// Runs every proposition check for one named distribution.
pub fn run_all_checks(
    dist: &TypeDistribution,
    name: &str,
    grid_n: usize,
    quad: &QuadConfig,
    mc: &McConfig,
    zeta_step: f64,
) -> Result<Vec<PropResult>> {
    Ok(vec![
        check_sharing_dominance(dist, name, grid_n)?,
        check_effort_ordering(dist, name, grid_n)?,
        check_revenue_ranking(dist, name, &[1, 2, 5], quad)?,
        check_wp_implementation(dist, name, mc)?,
        check_sp_implementation(dist, name, mc)?,
        check_zeta_star(dist, name, zeta_step, quad)?,
    ])
}
