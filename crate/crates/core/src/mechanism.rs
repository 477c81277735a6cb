//! The optimal direct linear mechanism: allocation by highest virtual
//! surplus, deterministic value sharing, winner cash payments pinned by the
//! envelope condition, a full-revelation signal, equilibrium efforts, and
//! the incentive-compatibility audit.
//!
//! Cash construction: losers pay zero and the winner pays
//!
//! `t_w(θ, θ_pivot) = gross(θ) − ∫_{θ_pivot}^{θ} B(α*(τ))·τ dτ`
//!
//! where `gross` is the winner's equilibrium value-sharing payoff and the
//! pivot is the lowest type that still beats the realized rivals. This
//! leaves each winner exactly his envelope rent, so the seller's expected
//! revenue equals E[max_i φ_i(θ_i)].

use crate::dist::{BidderProfile, TypeDistribution};
use crate::error::{Error, Result};
use crate::numerics::{integrate, CounterRng, McConfig, QuadConfig};
use crate::sharing::{alpha_star, check_existence_conditions, CollaborationMode};
use crate::surplus::{self, SurplusCurve};
use serde::Serialize;

/// A set of bidders facing one collaboration structure.
#[derive(Debug, Clone)]
pub struct Market {
    bidders: Vec<BidderProfile>,
    mode: CollaborationMode,
}

impl Market {
    /// Validates every distribution and, for the nested mode, checks the
    /// mechanism-existence conditions on an interior grid. Construction is
    /// refused with a diagnostic when a condition fails, rather than
    /// extrapolating beyond the proven case.
    pub fn new(bidders: Vec<BidderProfile>, mode: CollaborationMode) -> Result<Self> {
        mode.validate()?;
        if bidders.is_empty() {
            return Err(Error::InvalidParameters("market needs at least one bidder".into()));
        }
        for (i, b) in bidders.iter().enumerate() {
            if bidders[..i].iter().any(|o| o.bidder_id == b.bidder_id) {
                return Err(Error::InvalidParameters(format!(
                    "duplicate bidder_id {}",
                    b.bidder_id
                )));
            }
            let report = b.distribution.validate();
            if !report.all_pass() {
                return Err(Error::InvalidParameters(format!(
                    "bidder {} distribution fails validation: {report:?}",
                    b.bidder_id
                )));
            }
        }
        if let CollaborationMode::Nested { zeta } = mode {
            for b in &bidders {
                let d = &b.distribution;
                for i in 1..33 {
                    let theta = d.theta_lo() + d.range() * i as f64 / 33.0;
                    let report = check_existence_conditions(d, theta, zeta)?;
                    if !report.satisfied {
                        return Err(Error::Unsupported(format!(
                            "nested mechanism existence conditions fail for bidder {} at \
                             theta={theta}: dA/dalpha={}, dH/dalpha={}",
                            b.bidder_id, report.a_slope, report.h_slope
                        )));
                    }
                }
            }
        }
        Ok(Self { bidders, mode })
    }

    pub fn bidders(&self) -> &[BidderProfile] {
        &self.bidders
    }

    pub fn mode(&self) -> CollaborationMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.bidders.len()
    }

    fn check_types(&self, theta_vec: &[f64]) -> Result<()> {
        if theta_vec.len() != self.bidders.len() {
            return Err(Error::Domain(format!(
                "type vector length {} != {} bidders",
                theta_vec.len(),
                self.bidders.len()
            )));
        }
        for (b, &t) in self.bidders.iter().zip(theta_vec) {
            if !b.distribution.contains(t) {
                return Err(Error::Domain(format!(
                    "theta={t} outside bidder {}'s support",
                    b.bidder_id
                )));
            }
        }
        Ok(())
    }
}

/// The seller's belief about the winner's type during collaboration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PosteriorBelief {
    pub mean: f64,
    pub is_dirac: bool,
}

impl PosteriorBelief {
    pub fn dirac(mean: f64) -> Self {
        Self {
            mean,
            is_dirac: true,
        }
    }
}

/// Equilibrium post-auction efforts (seller, winner) at share `alpha`,
/// winner's own type, and the seller's posterior mean.
///
/// The seller's effort responds to the posterior mean only; the winner's
/// best response uses his true type where it enters his marginal product.
pub fn efforts(
    mode: CollaborationMode,
    alpha: f64,
    own_type: f64,
    posterior: &PosteriorBelief,
) -> (f64, f64) {
    let m = posterior.mean;
    let d = surplus::d_poly(alpha);
    match mode {
        CollaborationMode::WinnerPivotal => {
            let e_s = (1.0 - alpha) * alpha * m / d;
            let e_b = (1.0 - alpha) * (own_type + e_s);
            (e_s, e_b)
        }
        CollaborationMode::SellerPivotal => {
            let e_s = alpha * m / d;
            let e_b = (1.0 - alpha) * e_s;
            (e_s, e_b)
        }
        CollaborationMode::EffortSubstitution => (alpha * m, (1.0 - alpha) * own_type),
        CollaborationMode::Nested { zeta } => {
            let e_s = alpha * (1.0 - alpha * zeta) * m / d;
            let e_b = (1.0 - alpha) * (zeta * own_type + e_s);
            (e_s, e_b)
        }
    }
}

/// Realized collaboration value for the given efforts.
pub fn realized_value(mode: CollaborationMode, theta: f64, e_s: f64, e_b: f64) -> f64 {
    match mode {
        CollaborationMode::WinnerPivotal => (theta + e_s) * e_b,
        CollaborationMode::SellerPivotal => (theta + e_b) * e_s,
        CollaborationMode::EffortSubstitution => theta * (e_s + e_b),
        CollaborationMode::Nested { zeta } => {
            (zeta * theta + e_s) * ((1.0 - zeta) * theta + e_b)
        }
    }
}

/// The winner's value-sharing payoff (before cash) when his true type is
/// `theta` but the seller's Dirac posterior sits at `posterior_mean`, with
/// the winner best-responding to the seller's effort.
pub fn gross_deviation_payoff(
    mode: CollaborationMode,
    theta: f64,
    posterior_mean: f64,
    alpha: f64,
) -> f64 {
    let post = PosteriorBelief::dirac(posterior_mean);
    let (e_s, e_b) = efforts(mode, alpha, theta, &post);
    (1.0 - alpha) * realized_value(mode, theta, e_s, e_b) - 0.5 * e_b * e_b
}

/// Full outcome of one run of the direct mechanism.
#[derive(Debug, Clone, Serialize)]
pub struct DirectOutcome {
    pub winner: Option<usize>,
    pub alpha: f64,
    pub cash_winner: f64,
    pub cash_losers: Vec<f64>,
    pub revealed_type: f64,
    pub effort_seller: f64,
    pub effort_winner: f64,
    pub realized_value: f64,
    pub seller_revenue: f64,
    pub bidder_payoffs: Vec<f64>,
}

/// Winner selection: highest virtual surplus, ties uniform at random.
pub fn allocate(market: &Market, theta_vec: &[f64], rng_seed: u64) -> Result<Option<usize>> {
    market.check_types(theta_vec)?;
    let phis: Vec<f64> = market
        .bidders
        .iter()
        .zip(theta_vec)
        .map(|(b, &t)| surplus::phi(market.mode, &b.distribution, t))
        .collect::<Result<_>>()?;
    Ok(Some(pick_winner(&phis, rng_seed)))
}

fn pick_winner(phis: &[f64], rng_seed: u64) -> usize {
    let best = phis.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..phis.len()).filter(|&i| phis[i] == best).collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[CounterRng::new(rng_seed).below(0, tied.len())]
    }
}

/// Winner cash payment for the envelope construction, exact path.
pub fn winner_cash_payment(
    mode: CollaborationMode,
    dist: &TypeDistribution,
    theta_win: f64,
    theta_pivot: f64,
) -> Result<f64> {
    if theta_pivot > theta_win {
        return Err(Error::Domain(format!(
            "pivot {theta_pivot} above winner type {theta_win}"
        )));
    }
    let sol = alpha_star(mode, dist, theta_win)?;
    let gross = surplus::gross_winner_payoff(mode, sol.alpha, theta_win);
    let rent = surplus::env_integral_exact(
        mode,
        dist,
        theta_pivot,
        theta_win,
        &QuadConfig::default(),
    )?;
    Ok(gross - rent)
}

/// Mode-evaluation backend: exact solves or a cached curve.
pub(crate) enum Eval<'a> {
    Exact {
        mode: CollaborationMode,
        dist: &'a TypeDistribution,
    },
    Cached(&'a SurplusCurve),
}

impl Eval<'_> {
    pub(crate) fn dist(&self) -> &TypeDistribution {
        match self {
            Eval::Exact { dist, .. } => dist,
            Eval::Cached(c) => c.dist(),
        }
    }

    pub(crate) fn phi(&self, theta: f64) -> Result<f64> {
        match self {
            Eval::Exact { mode, dist } => surplus::phi(*mode, dist, theta),
            Eval::Cached(c) => Ok(c.phi(theta)),
        }
    }

    pub(crate) fn alpha(&self, theta: f64) -> Result<f64> {
        match self {
            Eval::Exact { mode, dist } => Ok(alpha_star(*mode, dist, theta)?.alpha),
            Eval::Cached(c) => Ok(c.alpha(theta)),
        }
    }

    /// Inverse virtual surplus, clamped to the support at both ends.
    pub(crate) fn phi_inverse(&self, p: f64) -> Result<f64> {
        match self {
            Eval::Exact { mode, dist } => {
                let bottom = surplus::phi(*mode, dist, dist.theta_lo())?;
                if p <= bottom {
                    return Ok(dist.theta_lo());
                }
                surplus::phi_inverse(*mode, dist, p)
            }
            Eval::Cached(c) => Ok(c.phi_inverse(p)),
        }
    }

    pub(crate) fn gross(&self, theta: f64) -> Result<f64> {
        match self {
            Eval::Exact { mode, dist } => {
                let sol = alpha_star(*mode, dist, theta)?;
                Ok(surplus::gross_winner_payoff(*mode, sol.alpha, theta))
            }
            Eval::Cached(c) => Ok(c.gross(theta)),
        }
    }

    pub(crate) fn env_integral(&self, a: f64, b: f64) -> Result<f64> {
        match self {
            Eval::Exact { mode, dist } => {
                surplus::env_integral_exact(*mode, dist, a, b, &QuadConfig::default())
            }
            Eval::Cached(c) => Ok(c.env_integral(a, b)),
        }
    }
}

pub(crate) fn run_direct_with(
    market: &Market,
    evals: &[Eval<'_>],
    theta_vec: &[f64],
    rng_seed: u64,
) -> Result<DirectOutcome> {
    market.check_types(theta_vec)?;
    let mode = market.mode;
    let phis: Vec<f64> = evals
        .iter()
        .zip(theta_vec)
        .map(|(e, &t)| e.phi(t))
        .collect::<Result<_>>()?;
    let w = pick_winner(&phis, rng_seed);
    let theta_w = theta_vec[w];
    let ew = &evals[w];
    let alpha = ew.alpha(theta_w)?;

    // pivot: the lowest type that still beats the realized rivals
    let second = phis
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != w)
        .map(|(_, &p)| p)
        .fold(f64::NEG_INFINITY, f64::max);
    let pivot = if second.is_finite() {
        ew.phi_inverse(second.min(phis[w]))?
    } else {
        ew.dist().theta_lo()
    };

    let posterior = PosteriorBelief::dirac(theta_w);
    let (e_s, e_b) = efforts(mode, alpha, theta_w, &posterior);
    let value = realized_value(mode, theta_w, e_s, e_b);
    let cash = ew.gross(theta_w)? - ew.env_integral(pivot, theta_w)?;

    let seller_revenue = cash + alpha * value - 0.5 * e_s * e_s;
    let winner_payoff = -cash + (1.0 - alpha) * value - 0.5 * e_b * e_b;
    let bidder_payoffs: Vec<f64> = (0..market.n())
        .map(|i| if i == w { winner_payoff } else { 0.0 })
        .collect();
    Ok(DirectOutcome {
        winner: Some(market.bidders[w].bidder_id),
        alpha,
        cash_winner: cash,
        cash_losers: vec![0.0; market.n().saturating_sub(1)],
        revealed_type: theta_w,
        effort_seller: e_s,
        effort_winner: e_b,
        realized_value: value,
        seller_revenue,
        bidder_payoffs,
    })
}

/// Runs the direct mechanism once with exact solves.
pub fn run_direct(market: &Market, theta_vec: &[f64], rng_seed: u64) -> Result<DirectOutcome> {
    let evals: Vec<Eval<'_>> = market
        .bidders
        .iter()
        .map(|b| Eval::Exact {
            mode: market.mode,
            dist: &b.distribution,
        })
        .collect();
    run_direct_with(market, &evals, theta_vec, rng_seed)
}

/// Market simulator with cached surplus curves, for Monte Carlo sweeps.
pub struct MarketSim {
    market: Market,
    curves: Vec<SurplusCurve>,
}

impl MarketSim {
    pub fn new(market: Market) -> Result<Self> {
        let curves = market
            .bidders
            .iter()
            .map(|b| SurplusCurve::build(market.mode, &b.distribution))
            .collect::<Result<_>>()?;
        Ok(Self { market, curves })
    }

    pub fn market(&self) -> &Market {
        &self.market
    }

    pub fn curves(&self) -> &[SurplusCurve] {
        &self.curves
    }

    /// Type profile for one draw index; pure in (seed, draw).
    pub fn sample_types(&self, rng: &CounterRng, draw: u64) -> Vec<f64> {
        let r = rng.stream(draw);
        self.market
            .bidders
            .iter()
            .enumerate()
            .map(|(i, b)| {
                b.distribution
                    .inverse_cdf(r.uniform(i as u64))
                    .expect("u in [0,1]")
            })
            .collect()
    }

    pub fn run_direct(&self, theta_vec: &[f64], rng_seed: u64) -> Result<DirectOutcome> {
        let evals: Vec<Eval<'_>> = self.curves.iter().map(Eval::Cached).collect();
        run_direct_with(&self.market, &evals, theta_vec, rng_seed)
    }

    /// Seeded Monte Carlo of the seller's revenue: (mean, standard error).
    pub fn revenue_mc(&self, mc: &McConfig) -> Result<(f64, f64)> {
        let rng = CounterRng::new(mc.seed);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for d in 0..mc.n_draws {
            let theta = self.sample_types(&rng, d as u64);
            let out = self.run_direct(&theta, rng.stream(d as u64).seed())?;
            sum += out.seller_revenue;
            sum_sq += out.seller_revenue * out.seller_revenue;
        }
        let n = mc.n_draws as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        Ok((mean, (var / n).sqrt()))
    }
}

/// Two independent revenue estimates: quadrature of E[max φ] and a seeded
/// Monte Carlo average of simulated seller revenue.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RevenueEstimate {
    pub quadrature: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub n_draws: usize,
}

/// Quadrature value of E[max_i φ_i(θ_i)] for the market.
pub fn expected_max_virtual_surplus(market: &Market, quad: &QuadConfig) -> Result<f64> {
    let mode = market.mode;
    let dists: Vec<&TypeDistribution> = market.bidders.iter().map(|b| &b.distribution).collect();
    let identical = dists.windows(2).all(|w| w[0] == w[1]);
    if identical {
        let d = dists[0];
        let n = dists.len() as f64;
        return integrate(
            |t| {
                let p = surplus::phi(mode, d, t).unwrap_or(0.0);
                let f = d.pdf_unchecked(t);
                let cdf = d.cdf_unchecked(t);
                n * p * cdf.powf(n - 1.0) * f
            },
            d.theta_lo(),
            d.theta_hi(),
            quad,
        );
    }
    // heterogeneous: sum over each bidder of E[φ_i; i wins]
    let mut total = 0.0;
    for (i, di) in dists.iter().enumerate() {
        total += integrate(
            |t| {
                let p = match surplus::phi(mode, di, t) {
                    Ok(v) => v,
                    Err(_) => return 0.0,
                };
                let mut q = 1.0;
                for (j, dj) in dists.iter().enumerate() {
                    if j != i {
                        q *= win_factor(mode, dj, p);
                    }
                }
                p * q * di.pdf_unchecked(t)
            },
            di.theta_lo(),
            di.theta_hi(),
            quad,
        )?;
    }
    Ok(total)
}

/// P(φ_j(θ_j) ≤ p) for one rival.
fn win_factor(mode: CollaborationMode, dist: &TypeDistribution, p: f64) -> f64 {
    let lo = surplus::phi(mode, dist, dist.theta_lo()).unwrap_or(0.0);
    if p <= lo {
        return 0.0;
    }
    let hi = surplus::phi(mode, dist, dist.theta_hi()).unwrap_or(f64::INFINITY);
    if p >= hi {
        return 1.0;
    }
    match surplus::phi_inverse(mode, dist, p) {
        Ok(t) => dist.cdf_unchecked(t),
        Err(_) => 0.0,
    }
}

/// Expected seller revenue via the two independent routes.
pub fn seller_revenue_expected(
    market: &Market,
    quad: &QuadConfig,
    mc: &McConfig,
) -> Result<RevenueEstimate> {
    let quadrature = expected_max_virtual_surplus(market, quad)?;
    let sim = MarketSim::new(market.clone())?;
    let (mc_mean, mc_se) = sim.revenue_mc(mc)?;
    Ok(RevenueEstimate {
        quadrature,
        mc_mean,
        mc_se,
        n_draws: mc.n_draws,
    })
}

/// Result of an incentive-compatibility audit for one bidder and true type.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub bidder_id: usize,
    pub true_theta: f64,
    pub truthful_payoff: f64,
    /// max over the report grid of (deviation payoff − truthful payoff)
    pub max_gain: f64,
    pub worst_report: f64,
    pub gains: Vec<(f64, f64)>,
}

/// Interim incentive audit: for each misreport, the deviation payoff uses
/// the misreport's share, cash and seller effort, and the bidder's best
/// response given his true type; rivals are integrated out exactly.
pub fn ic_audit(
    market: &Market,
    bidder_id: usize,
    true_theta: f64,
    report_grid: &[f64],
) -> Result<AuditReport> {
    let mode = market.mode;
    let idx = market
        .bidders
        .iter()
        .position(|b| b.bidder_id == bidder_id)
        .ok_or_else(|| Error::Domain(format!("no bidder with id {bidder_id}")))?;
    let dist = &market.bidders[idx].distribution;
    if !dist.contains(true_theta) {
        return Err(Error::Domain(format!(
            "true type {true_theta} outside bidder {bidder_id}'s support"
        )));
    }
    for &r in report_grid {
        if !dist.contains(r) {
            return Err(Error::Domain(format!("report {r} outside support")));
        }
    }
    let rivals: Vec<&TypeDistribution> = market
        .bidders
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != idx)
        .map(|(_, b)| &b.distribution)
        .collect();
    // interim win probability of reporting/being type t
    let win_prob = |t: f64| -> f64 {
        if rivals.is_empty() {
            return 1.0;
        }
        let p = match surplus::phi(mode, dist, t) {
            Ok(v) => v,
            Err(_) => return 0.0,
        };
        rivals
            .iter()
            .map(|dj| {
                if *dj == dist {
                    dj.cdf_unchecked(t)
                } else {
                    win_factor(mode, dj, p)
                }
            })
            .product()
    };

    // cumulative ∫ Q(τ)·B(α*(τ))·τ dτ at all needed evaluation points
    let mut nodes: Vec<f64> = report_grid.to_vec();
    nodes.push(true_theta);
    nodes.push(dist.theta_lo());
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup_by(|a, b| *a == *b);
    let quad = QuadConfig {
        rel_tol: 1e-11,
        max_depth: 48,
    };
    let mut cum = vec![0.0; nodes.len()];
    for i in 1..nodes.len() {
        let seg = integrate(
            |tau| {
                let q = win_prob(tau);
                if q == 0.0 {
                    return 0.0;
                }
                match alpha_star(mode, dist, tau) {
                    Ok(sol) => q * surplus::env_weight(mode, sol.alpha, tau),
                    Err(_) => 0.0,
                }
            },
            nodes[i - 1],
            nodes[i],
            &quad,
        )?;
        cum[i] = cum[i - 1] + seg;
    }
    let cum_at = |t: f64| -> f64 {
        let i = nodes.iter().position(|&x| x == t).expect("node present");
        cum[i]
    };

    let truthful_payoff = cum_at(true_theta);
    let mut max_gain = f64::NEG_INFINITY;
    let mut worst_report = true_theta;
    let mut gains = Vec::with_capacity(report_grid.len());
    for &report in report_grid {
        let gain = if report == true_theta {
            0.0
        } else {
            let a_hat = alpha_star(mode, dist, report)?.alpha;
            let gross_dev = gross_deviation_payoff(mode, true_theta, report, a_hat);
            let gross_eq = surplus::gross_winner_payoff(mode, a_hat, report);
            win_prob(report) * (gross_dev - gross_eq) + (cum_at(report) - truthful_payoff)
        };
        gains.push((report, gain));
        if gain > max_gain {
            max_gain = gain;
            worst_report = report;
        }
    }
    Ok(AuditReport {
        bidder_id,
        true_theta,
        truthful_payoff,
        max_gain,
        worst_report,
        gains,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Family;

    const WP: CollaborationMode = CollaborationMode::WinnerPivotal;
    const SP: CollaborationMode = CollaborationMode::SellerPivotal;

    fn uniform_market(n: usize, mode: CollaborationMode) -> Market {
        let bidders = (0..n)
            .map(|i| BidderProfile::new(i, TypeDistribution::uniform_01()))
            .collect();
        Market::new(bidders, mode).unwrap()
    }

    #[test]
    fn efforts_known_values() {
        // wp at α = 1/2, θ = m = 1: (1/3, 2/3)
        let p = PosteriorBelief::dirac(1.0);
        let (es, eb) = efforts(WP, 0.5, 1.0, &p);
        assert!((es - 1.0 / 3.0).abs() < 1e-15);
        assert!((eb - 2.0 / 3.0).abs() < 1e-15);
        // sp corner: all seller effort, no winner effort
        let (es, eb) = efforts(SP, 1.0, 0.4, &PosteriorBelief::dirac(0.4));
        assert!((es - 0.4).abs() < 1e-15);
        assert_eq!(eb, 0.0);
        // wp with zero share: no seller effort, winner takes θ
        let (es, eb) = efforts(WP, 0.0, 0.7, &PosteriorBelief::dirac(0.7));
        assert_eq!(es, 0.0);
        assert!((eb - 0.7).abs() < 1e-15);
    }

    #[test]
    fn gross_deviation_matches_gross_on_path() {
        let d = TypeDistribution::uniform_01();
        for mode in [
            WP,
            SP,
            CollaborationMode::EffortSubstitution,
            CollaborationMode::Nested { zeta: 0.3 },
        ] {
            for &theta in &[0.4, 0.75, 1.0] {
                let a = alpha_star(mode, &d, theta).unwrap().alpha;
                let on_path = gross_deviation_payoff(mode, theta, theta, a);
                let closed = surplus::gross_winner_payoff(mode, a, theta);
                assert!(
                    (on_path - closed).abs() < 1e-12,
                    "{mode:?} theta={theta}: {on_path} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn allocate_higher_type_wins_under_identical_distributions() {
        let m = uniform_market(2, WP);
        let w = allocate(&m, &[0.8, 0.3], 1).unwrap();
        assert_eq!(w, Some(0));
    }

    #[test]
    fn allocate_ties_split_evenly() {
        let m = uniform_market(2, WP);
        let mut wins = [0usize; 2];
        for seed in 0..10_000u64 {
            let w = allocate(&m, &[0.6, 0.6], seed).unwrap().unwrap();
            wins[w] += 1;
        }
        // 3σ band around 5000 for a fair coin over 10^4 draws
        assert!((wins[0] as f64 - 5000.0).abs() < 150.0, "{wins:?}");
    }

    #[test]
    fn allocation_compares_virtual_surpluses_not_types() {
        // same θ, different hazard: winner decided by φ comparison
        let wide = TypeDistribution::new(Family::Uniform, 0.0, 2.0).unwrap();
        let narrow = TypeDistribution::uniform_01();
        let m = Market::new(
            vec![BidderProfile::new(0, narrow), BidderProfile::new(1, wide)],
            WP,
        )
        .unwrap();
        let theta = 0.9;
        let phi0 = surplus::phi(WP, &m.bidders()[0].distribution, theta).unwrap();
        let phi1 = surplus::phi(WP, &m.bidders()[1].distribution, theta).unwrap();
        let w = allocate(&m, &[theta, theta], 7).unwrap().unwrap();
        assert_eq!(w, if phi0 > phi1 { 0 } else { 1 });
        assert!(phi0 != phi1);
    }

    #[test]
    fn cash_payment_zero_integral_at_pivot_equal_winner() {
        let d = TypeDistribution::uniform_01();
        let t = winner_cash_payment(WP, &d, 0.7, 0.7).unwrap();
        let a = alpha_star(WP, &d, 0.7).unwrap().alpha;
        assert!((t - surplus::gross_winner_payoff(WP, a, 0.7)).abs() < 1e-12);
    }

    #[test]
    fn cash_payment_sp_corner_region_is_zero() {
        let d = TypeDistribution::uniform_01();
        // entirely inside the pooling region: gross and the rent integral both vanish
        let t = winner_cash_payment(SP, &d, 0.4, 0.2).unwrap();
        assert!(t.abs() < 1e-12);
    }

    #[test]
    fn cash_payment_quadrature_matches_riemann() {
        let d = TypeDistribution::uniform_01();
        let t = winner_cash_payment(WP, &d, 0.8, 0.5).unwrap();
        // brute-force Riemann reference for the rent integral
        let n = 200_000;
        let h = 0.3 / n as f64;
        let mut rent = 0.0;
        for i in 0..n {
            let tau = 0.5 + (i as f64 + 0.5) * h;
            let a = alpha_star(WP, &d, tau).unwrap().alpha;
            rent += surplus::env_weight(WP, a, tau) * h;
        }
        let a = alpha_star(WP, &d, 0.8).unwrap().alpha;
        let expect = surplus::gross_winner_payoff(WP, a, 0.8) - rent;
        assert!((t - expect).abs() < 1e-6, "{t} vs {expect}");
    }

    #[test]
    fn run_direct_single_bidder_invariants() {
        let m = uniform_market(1, WP);
        let out = run_direct(&m, &[0.8], 3).unwrap();
        assert_eq!(out.winner, Some(0));
        // value identity
        let v = (0.8 + out.effort_seller) * out.effort_winner;
        assert!((v - out.realized_value).abs() < 1e-12);
        // revenue identity
        let rev = out.cash_winner + out.alpha * out.realized_value
            - 0.5 * out.effort_seller * out.effort_seller;
        assert!((rev - out.seller_revenue).abs() < 1e-12);
        assert!(out.cash_winner >= 0.0);
        assert!(out.bidder_payoffs[0] >= 0.0);
    }

    #[test]
    fn run_direct_symmetric_tie_is_revenue_identical() {
        let m = uniform_market(2, WP);
        let a = run_direct(&m, &[0.6, 0.6], 11).unwrap();
        let b = run_direct(&m, &[0.6, 0.6], 12).unwrap();
        assert!((a.seller_revenue - b.seller_revenue).abs() < 1e-12);
    }

    #[test]
    fn run_direct_sp_corner_winner_indifferent() {
        let m = uniform_market(2, SP);
        let out = run_direct(&m, &[0.4, 0.2], 5).unwrap();
        assert_eq!(out.winner, Some(0));
        assert_eq!(out.alpha, 1.0);
        // α = 1 leaves the winner no value share and zero payoff
        assert!(out.bidder_payoffs[0].abs() < 1e-12);
        assert_eq!(out.effort_winner, 0.0);
    }

    #[test]
    fn cached_and_exact_run_direct_agree() {
        let m = uniform_market(2, WP);
        let sim = MarketSim::new(m.clone()).unwrap();
        for (i, &pair) in [[0.9, 0.4], [0.55, 0.7], [0.99, 0.98]].iter().enumerate() {
            let exact = run_direct(&m, &pair, i as u64).unwrap();
            let cached = sim.run_direct(&pair, i as u64).unwrap();
            assert_eq!(exact.winner, cached.winner);
            assert!((exact.seller_revenue - cached.seller_revenue).abs() < 1e-6);
            assert!((exact.cash_winner - cached.cash_winner).abs() < 1e-6);
        }
    }

    #[test]
    fn ic_audit_truthful_report_gains_zero() {
        let m = uniform_market(1, WP);
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let report = ic_audit(&m, 0, 0.6, &grid).unwrap();
        let at_true = report
            .gains
            .iter()
            .find(|(r, _)| (*r - 0.6).abs() < 1e-12)
            .unwrap();
        assert_eq!(at_true.1, 0.0);
        assert!(report.max_gain <= 1e-9, "max gain {}", report.max_gain);
    }

    #[test]
    fn ic_audit_bottom_type_has_zero_rent() {
        let m = uniform_market(2, SP);
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let report = ic_audit(&m, 0, 0.0, &grid).unwrap();
        assert!(report.truthful_payoff.abs() < 1e-12);
        assert!(report.max_gain <= 1e-9);
    }

    #[test]
    fn revenue_estimates_agree_for_single_uniform_bidder() {
        let m = uniform_market(1, WP);
        let est = seller_revenue_expected(
            &m,
            &QuadConfig::default(),
            &McConfig {
                n_draws: 40_000,
                seed: 9,
            },
        )
        .unwrap();
        assert!(
            (est.mc_mean - est.quadrature).abs() <= 3.0 * est.mc_se,
            "{est:?}"
        );
    }

    #[test]
    fn revenue_concentrates_at_top_surplus_without_type_risk() {
        // as competition removes type risk, expected revenue approaches the
        // top type's virtual surplus
        let d = TypeDistribution::uniform_01();
        let phi_top = surplus::phi(WP, &d, 1.0).unwrap();
        let quad = QuadConfig::default();
        let rev_1 = expected_max_virtual_surplus(&uniform_market(1, WP), &quad).unwrap();
        let rev_8 = expected_max_virtual_surplus(&uniform_market(8, WP), &quad).unwrap();
        let rev_64 = expected_max_virtual_surplus(&uniform_market(64, WP), &quad).unwrap();
        assert!(rev_1 < rev_8 && rev_8 < rev_64 && rev_64 < phi_top);
        assert!(phi_top - rev_64 < 0.06 * phi_top, "{rev_64} vs {phi_top}");
    }

    #[test]
    fn nested_market_construction_checks_conditions() {
        let bidders = vec![BidderProfile::new(0, TypeDistribution::uniform_01())];
        let m = Market::new(bidders, CollaborationMode::Nested { zeta: 0.25 });
        assert!(m.is_ok());
    }
}
