//! Ascending-clock auction with endogenous linear contracts.
//!
//! The clock quotes virtual-surplus values. Each bidder's quasi-dominant
//! exit is his own virtual surplus; the last active bidder wins and may
//! keep bidding up to his own exit price `p_n`, with the penultimate price
//! `p_{n-1}` pinning the pivot type. The winner's share comes from
//! inverting the virtual surplus at `p_n`; his cash payment mirrors the
//! direct mechanism's envelope construction between the pivot type and the
//! revealed type.
//!
//! Winner-pivotal play implements the direct mechanism exactly. Under
//! seller-pivotal play the corner α = 1 would pool low types, so the seller
//! leaves the winner a slice ε of the value to keep the clock separating;
//! the direct optimum is the ε → 0 limit.

use crate::dist::TypeDistribution;
use crate::error::{Error, Result};
use crate::mechanism::{
    efforts, gross_deviation_payoff, realized_value, DirectOutcome, Eval, Market, MarketSim,
    PosteriorBelief,
};
use crate::numerics::{integrate, CounterRng, McConfig, QuadConfig};
use crate::sharing::{alpha_star, CollaborationMode};
use crate::surplus::{self, Pchip, SurplusCurve};
use serde::Serialize;

/// Ascending-auction settings. `epsilon` is the share retained by the
/// winner under seller-pivotal play; `clock_resolution` only affects how
/// transcript prices are reported, never strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuctionConfig {
    pub mode: CollaborationMode,
    pub epsilon: f64,
    pub clock_resolution: f64,
}

impl AuctionConfig {
    pub fn winner_pivotal() -> Self {
        Self {
            mode: CollaborationMode::WinnerPivotal,
            epsilon: 0.0,
            clock_resolution: 0.0,
        }
    }

    pub fn seller_pivotal(epsilon: f64) -> Self {
        Self {
            mode: CollaborationMode::SellerPivotal,
            epsilon,
            clock_resolution: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            CollaborationMode::WinnerPivotal => Ok(()),
            CollaborationMode::SellerPivotal => {
                if self.epsilon > 0.0 && self.epsilon <= 0.1 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameters(format!(
                        "seller-pivotal auctions need epsilon in (0, 0.1], got {}",
                        self.epsilon
                    )))
                }
            }
            other => Err(Error::Unsupported(format!(
                "ascending auction covers the pivotal modes only, got {}",
                other.label()
            ))),
        }
    }
}

/// Record of one auction run.
#[derive(Debug, Clone, Serialize)]
pub struct AuctionTranscript {
    /// All drop-out prices in ascending order, the winner's last.
    pub exit_prices: Vec<f64>,
    pub winner_id: usize,
    pub contract_alpha: f64,
    /// Set when ε pushed the seller-pivotal share outside [0, 1].
    pub alpha_clamped: bool,
    pub contract_cash: f64,
    /// Type revealed by inverting the virtual surplus at `p_n`.
    pub posterior_type: f64,
    pub effort_seller: f64,
    pub effort_winner: f64,
    pub realized_value: f64,
    pub seller_revenue: f64,
    pub bidder_payoffs: Vec<f64>,
}

/// Paired Monte Carlo comparison of auction and direct-mechanism revenue.
#[derive(Debug, Clone, Serialize)]
pub struct EpsRow {
    pub epsilon: f64,
    /// mean of (direct − auction) over paired draws
    pub mean_gap: f64,
    pub paired_se: f64,
    pub max_abs_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub mode_label: String,
    pub n_draws: usize,
    pub rows: Vec<EpsRow>,
    pub passed: bool,
}

fn winner_of(prices: &[f64], rng_seed: u64) -> usize {
    let best = prices.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..prices.len()).filter(|&i| prices[i] == best).collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[CounterRng::new(rng_seed).below(0, tied.len())]
    }
}

/// ε-adjusted share for the winning contract.
fn contract_share(config: &AuctionConfig, alpha_star: f64) -> (f64, bool) {
    match config.mode {
        CollaborationMode::SellerPivotal => {
            let raw = alpha_star - config.epsilon;
            let clamped = !(0.0..=1.0).contains(&raw);
            (raw.clamp(0.0, 1.0), clamped)
        }
        _ => (alpha_star, false),
    }
}

/// Rent integrand for the ε-adjusted contract path.
fn eps_env_weight(
    mode: CollaborationMode,
    dist: &TypeDistribution,
    eps: f64,
    tau: f64,
) -> f64 {
    match alpha_star(mode, dist, tau) {
        Ok(sol) => {
            let a = (sol.alpha - eps).clamp(0.0, 1.0);
            surplus::env_weight(mode, a, tau)
        }
        Err(_) => 0.0,
    }
}

struct AuctionEnv<'a> {
    evals: Vec<Eval<'a>>,
    /// cumulative ε-adjusted rent integrals, one per bidder (cached path)
    eps_env: Option<Vec<Pchip>>,
}

impl AuctionEnv<'_> {
    fn rent_integral(
        &self,
        config: &AuctionConfig,
        bidder: usize,
        a: f64,
        b: f64,
    ) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let eps = match config.mode {
            CollaborationMode::SellerPivotal => config.epsilon,
            _ => 0.0,
        };
        if eps == 0.0 {
            return self.evals[bidder].env_integral(a, b);
        }
        if let Some(curves) = &self.eps_env {
            return Ok(curves[bidder].eval(b) - curves[bidder].eval(a));
        }
        let dist = self.evals[bidder].dist();
        integrate(
            |tau| eps_env_weight(config.mode, dist, eps, tau),
            a,
            b,
            &QuadConfig::default(),
        )
    }
}

fn run_auction_env(
    market: &Market,
    env: &AuctionEnv<'_>,
    theta_vec: &[f64],
    config: &AuctionConfig,
    rng_seed: u64,
) -> Result<AuctionTranscript> {
    config.validate()?;
    if market.mode() != config.mode {
        return Err(Error::InvalidParameters(format!(
            "market mode {} != auction mode {}",
            market.mode().label(),
            config.mode.label()
        )));
    }
    let n = market.n();
    let exits: Vec<f64> = env
        .evals
        .iter()
        .zip(theta_vec)
        .map(|(e, &t)| e.phi(t))
        .collect::<Result<_>>()?;
    let w = winner_of(&exits, rng_seed);
    let p_n = exits[w];
    let floor = env.evals[w].phi(env.evals[w].dist().theta_lo())?;
    let p_prev = if n >= 2 {
        exits
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != w)
            .map(|(_, &p)| p)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(floor)
    } else {
        floor
    };

    let posterior_type = env.evals[w].phi_inverse(p_n)?;
    let pivot = env.evals[w].phi_inverse(p_prev.min(p_n))?;
    let alpha_opt = env.evals[w].alpha(posterior_type)?;
    let (alpha, alpha_clamped) = contract_share(config, alpha_opt);

    let gross_at_posterior = surplus::gross_winner_payoff(config.mode, alpha, posterior_type);
    let cash = gross_at_posterior - env.rent_integral(config, w, pivot, posterior_type)?;

    let theta_true = theta_vec[w];
    let post = PosteriorBelief::dirac(posterior_type);
    let (e_s, e_b) = efforts(config.mode, alpha, theta_true, &post);
    let value = realized_value(config.mode, theta_true, e_s, e_b);
    let seller_revenue = cash + alpha * value - 0.5 * e_s * e_s;
    let winner_payoff = -cash + (1.0 - alpha) * value - 0.5 * e_b * e_b;

    let mut sorted = exits.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // move the winner's price to the closing slot for the tie case
    if let Some(pos) = sorted.iter().rposition(|&p| p == p_n) {
        sorted.remove(pos);
        sorted.push(p_n);
    }
    if config.clock_resolution > 0.0 {
        for p in &mut sorted {
            *p = (*p / config.clock_resolution).round() * config.clock_resolution;
        }
    }

    Ok(AuctionTranscript {
        exit_prices: sorted,
        winner_id: market.bidders()[w].bidder_id,
        contract_alpha: alpha,
        alpha_clamped,
        contract_cash: cash,
        posterior_type,
        effort_seller: e_s,
        effort_winner: e_b,
        realized_value: value,
        seller_revenue,
        bidder_payoffs: (0..n)
            .map(|i| if i == w { winner_payoff } else { 0.0 })
            .collect(),
    })
}

/// Runs the ascending auction once with exact solves.
pub fn run_auction(
    market: &Market,
    theta_vec: &[f64],
    config: &AuctionConfig,
    rng_seed: u64,
) -> Result<AuctionTranscript> {
    let env = AuctionEnv {
        evals: market
            .bidders()
            .iter()
            .map(|b| Eval::Exact {
                mode: market.mode(),
                dist: &b.distribution,
            })
            .collect(),
        eps_env: None,
    };
    run_auction_env(market, &env, theta_vec, config, rng_seed)
}

/// Cached auction runner built once per (market, ε).
pub struct AuctionSim<'a> {
    sim: &'a MarketSim,
    config: AuctionConfig,
    eps_env: Option<Vec<Pchip>>,
}

impl<'a> AuctionSim<'a> {
    pub fn new(sim: &'a MarketSim, config: AuctionConfig) -> Result<Self> {
        config.validate()?;
        let eps_env = match config.mode {
            CollaborationMode::SellerPivotal if config.epsilon > 0.0 => Some(
                sim.curves()
                    .iter()
                    .map(|c| eps_env_cumulative(c, config.mode, config.epsilon))
                    .collect(),
            ),
            _ => None,
        };
        Ok(Self {
            sim,
            config,
            eps_env,
        })
    }

    pub fn run(&self, theta_vec: &[f64], rng_seed: u64) -> Result<AuctionTranscript> {
        let env = AuctionEnv {
            evals: self.sim.curves().iter().map(Eval::Cached).collect(),
            eps_env: self.eps_env.clone(),
        };
        run_auction_env(self.sim.market(), &env, theta_vec, &self.config, rng_seed)
    }
}

/// Cumulative ∫ B(α*(τ) − ε)·τ dτ on the curve's knots.
fn eps_env_cumulative(curve: &SurplusCurve, mode: CollaborationMode, eps: f64) -> Pchip {
    let nodes = curve.nodes().to_vec();
    let w = |tau: f64| {
        let a = (curve.alpha(tau) - eps).clamp(0.0, 1.0);
        surplus::env_weight(mode, a, tau)
    };
    let mut cum = Vec::with_capacity(nodes.len());
    cum.push(0.0);
    for i in 1..nodes.len() {
        let (a, b) = (nodes[i - 1], nodes[i]);
        let panels = 8;
        let h = (b - a) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let x0 = a + h * p as f64;
            acc += h / 6.0 * (w(x0) + 4.0 * w(x0 + 0.5 * h) + w(x0 + h));
        }
        cum.push(cum[i - 1] + acc);
    }
    Pchip::new(nodes, cum)
}

/// Paired Monte Carlo of auction vs direct revenue on identical type draws.
///
/// Winner-pivotal: the mean difference must sit within 3 paired standard
/// errors of zero (and is pointwise tiny). Seller-pivotal: the gap
/// (direct − auction) is computed for ε in {1e-2, 1e-3, 1e-4} and must
/// shrink monotonically within Monte Carlo error.
pub fn revenue_equivalence_check(
    market: &Market,
    config: &AuctionConfig,
    mc: &McConfig,
) -> Result<EquivalenceReport> {
    config.validate()?;
    let sim = MarketSim::new(market.clone())?;
    let rng = CounterRng::new(mc.seed);

    let eps_list: Vec<f64> = match config.mode {
        CollaborationMode::WinnerPivotal => vec![0.0],
        _ => vec![1e-2, 1e-3, 1e-4],
    };
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in &eps_list {
        let auction_cfg = AuctionConfig {
            epsilon: eps,
            ..*config
        };
        let runner = AuctionSim::new(&sim, auction_cfg)?;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut max_abs: f64 = 0.0;
        for d in 0..mc.n_draws {
            let theta = sim.sample_types(&rng, d as u64);
            let seed = rng.stream(d as u64).seed();
            let direct = sim.run_direct(&theta, seed)?;
            let auction = runner.run(&theta, seed)?;
            let gap = direct.seller_revenue - auction.seller_revenue;
            sum += gap;
            sum_sq += gap * gap;
            max_abs = max_abs.max(gap.abs());
        }
        let n = mc.n_draws as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        rows.push(EpsRow {
            epsilon: eps,
            mean_gap: mean,
            paired_se: (var / n).sqrt(),
            max_abs_gap: max_abs,
        });
    }

    let passed = match config.mode {
        CollaborationMode::WinnerPivotal => {
            let r = &rows[0];
            r.mean_gap.abs() <= 3.0 * r.paired_se.max(1e-12)
        }
        _ => {
            let tol = |a: &EpsRow, b: &EpsRow| 3.0 * (a.paired_se + b.paired_se).max(1e-12);
            rows.windows(2).all(|w| w[0].mean_gap >= w[1].mean_gap - tol(&w[0], &w[1]))
                && rows
                    .iter()
                    .all(|r| r.mean_gap >= -3.0 * r.paired_se.max(1e-12))
        }
    };
    Ok(EquivalenceReport {
        mode_label: config.mode.label(),
        n_draws: mc.n_draws,
        rows,
        passed,
    })
}

/// Replays the auction with one bidder forced to a fixed exit price while
/// rivals play their equilibrium exits; returns the deviant's payoff minus
/// his equilibrium payoff. Quasi-dominance requires this to be ≤ 0 up to
/// numerical tolerance at every price.
pub fn deviation_probe(
    market: &Market,
    theta_vec: &[f64],
    deviant_id: usize,
    exit_price: f64,
    config: &AuctionConfig,
) -> Result<f64> {
    config.validate()?;
    let idx = market
        .bidders()
        .iter()
        .position(|b| b.bidder_id == deviant_id)
        .ok_or_else(|| Error::Domain(format!("no bidder with id {deviant_id}")))?;
    let dist = &market.bidders()[idx].distribution;
    let mode = config.mode;
    let phi_lo = surplus::phi(mode, dist, dist.theta_lo())?;
    let phi_hi = surplus::phi(mode, dist, dist.theta_hi())?;
    if exit_price < phi_lo - 1e-12 || exit_price > 1.2 * phi_hi + 1e-12 {
        return Err(Error::Domain(format!(
            "exit price {exit_price} outside probe range [{phi_lo}, {}]",
            1.2 * phi_hi
        )));
    }
    let theta_true = theta_vec[idx];
    let rival_max = market
        .bidders()
        .iter()
        .zip(theta_vec)
        .enumerate()
        .filter(|&(j, _)| j != idx)
        .map(|(_, (b, &t))| surplus::phi(mode, &b.distribution, t))
        .try_fold(f64::NEG_INFINITY, |acc, p| p.map(|v| acc.max(v)))?;

    let payoff_at = |price: f64| -> Result<f64> {
        if price <= rival_max {
            // exits no later than the best rival: loses, pays nothing
            return Ok(0.0);
        }
        let p_prev = rival_max.max(phi_lo);
        let posterior = surplus::phi_inverse(mode, dist, price)?;
        let pivot = surplus::phi_inverse(mode, dist, p_prev.min(price))?;
        let (alpha, _) = contract_share(config, alpha_star(mode, dist, posterior)?.alpha);
        let gross_eq = surplus::gross_winner_payoff(mode, alpha, posterior);
        let eps = match mode {
            CollaborationMode::SellerPivotal => config.epsilon,
            _ => 0.0,
        };
        let rent = if eps == 0.0 {
            surplus::env_integral_exact(mode, dist, pivot, posterior, &QuadConfig::default())?
        } else {
            integrate(
                |tau| eps_env_weight(mode, dist, eps, tau),
                pivot,
                posterior,
                &QuadConfig::default(),
            )?
        };
        let cash = gross_eq - rent;
        Ok(gross_deviation_payoff(mode, theta_true, posterior, alpha) - cash)
    };

    let equilibrium_price = surplus::phi(mode, dist, theta_true)?;
    Ok(payoff_at(exit_price)? - payoff_at(equilibrium_price)?)
}

/// Convenience: paired transcripts for one draw, used by transcript-identity
/// tests and the CLI summary.
pub fn paired_run(
    market: &Market,
    theta_vec: &[f64],
    config: &AuctionConfig,
    rng_seed: u64,
) -> Result<(AuctionTranscript, DirectOutcome)> {
    let auction = run_auction(market, theta_vec, config, rng_seed)?;
    let direct = crate::mechanism::run_direct(market, theta_vec, rng_seed)?;
    Ok((auction, direct))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::BidderProfile;
    use crate::dist::TypeDistribution;

    fn uniform_market(n: usize, mode: CollaborationMode) -> Market {
        let bidders = (0..n)
            .map(|i| BidderProfile::new(i, TypeDistribution::uniform_01()))
            .collect();
        Market::new(bidders, mode).unwrap()
    }

    #[test]
    fn wp_auction_reveals_types_and_matches_direct() {
        let m = uniform_market(2, CollaborationMode::WinnerPivotal);
        let cfg = AuctionConfig::winner_pivotal();
        let (auction, direct) = paired_run(&m, &[0.9, 0.4], &cfg, 1).unwrap();
        assert_eq!(auction.winner_id, 0);
        assert!((auction.posterior_type - 0.9).abs() < 1e-9);
        assert!((auction.exit_prices[1] - surplus::phi(m.mode(), &m.bidders()[0].distribution, 0.9).unwrap()).abs() < 1e-12);
        assert!((auction.seller_revenue - direct.seller_revenue).abs() < 1e-8);
        assert!((auction.contract_alpha - direct.alpha).abs() < 1e-8);
        assert!((auction.contract_cash - direct.cash_winner).abs() < 1e-8);
    }

    #[test]
    fn tie_draws_are_revenue_identical() {
        let m = uniform_market(2, CollaborationMode::WinnerPivotal);
        let cfg = AuctionConfig::winner_pivotal();
        let a = run_auction(&m, &[0.5, 0.5], &cfg, 2).unwrap();
        let b = run_auction(&m, &[0.5, 0.5], &cfg, 99).unwrap();
        assert!((a.seller_revenue - b.seller_revenue).abs() < 1e-12);
    }

    #[test]
    fn sp_contract_is_epsilon_below_optimum() {
        let m = uniform_market(2, CollaborationMode::SellerPivotal);
        let cfg = AuctionConfig::seller_pivotal(1e-3);
        let t = run_auction(&m, &[0.9, 0.4], &cfg, 3).unwrap();
        let astar = alpha_star(CollaborationMode::SellerPivotal, &m.bidders()[0].distribution, 0.9)
            .unwrap()
            .alpha;
        assert!((t.contract_alpha - (astar - 1e-3)).abs() < 1e-9);
        assert!(!t.alpha_clamped);
    }

    #[test]
    fn single_bidder_auction_matches_direct_exactly() {
        let m = uniform_market(1, CollaborationMode::WinnerPivotal);
        let cfg = AuctionConfig::winner_pivotal();
        let (auction, direct) = paired_run(&m, &[0.8], &cfg, 4).unwrap();
        assert!((auction.seller_revenue - direct.seller_revenue).abs() < 1e-9);
    }

    #[test]
    fn probe_zero_at_equilibrium_price() {
        let m = uniform_market(2, CollaborationMode::WinnerPivotal);
        let cfg = AuctionConfig::winner_pivotal();
        let eq_price =
            surplus::phi(CollaborationMode::WinnerPivotal, &m.bidders()[0].distribution, 0.7)
                .unwrap();
        let delta = deviation_probe(&m, &[0.7, 0.4], 0, eq_price, &cfg).unwrap();
        assert_eq!(delta, 0.0);
    }

    #[test]
    fn probe_overbid_and_underbid_never_gain() {
        let m = uniform_market(2, CollaborationMode::WinnerPivotal);
        let cfg = AuctionConfig::winner_pivotal();
        let d = &m.bidders()[0].distribution;
        let phi = |t: f64| surplus::phi(CollaborationMode::WinnerPivotal, d, t).unwrap();
        // rival between deviant's truth and the overbid
        let delta = deviation_probe(&m, &[0.5, 0.7], 0, phi(0.9), &cfg).unwrap();
        assert!(delta <= 1e-9, "overbid gained {delta}");
        // underbid forfeits a winning position
        let delta = deviation_probe(&m, &[0.9, 0.5], 0, phi(0.3), &cfg).unwrap();
        assert!(delta <= 0.0);
        assert!(delta < -1e-4, "forfeiting should cost surplus: {delta}");
    }

    #[test]
    fn wp_equivalence_check_passes() {
        let m = uniform_market(2, CollaborationMode::WinnerPivotal);
        let report = revenue_equivalence_check(
            &m,
            &AuctionConfig::winner_pivotal(),
            &McConfig {
                n_draws: 2000,
                seed: 5,
            },
        )
        .unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.rows[0].max_abs_gap < 1e-8, "{report:?}");
    }

    #[test]
    fn sp_gap_shrinks_with_epsilon() {
        let m = uniform_market(2, CollaborationMode::SellerPivotal);
        let report = revenue_equivalence_check(
            &m,
            &AuctionConfig::seller_pivotal(1e-3),
            &McConfig {
                n_draws: 4000,
                seed: 6,
            },
        )
        .unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.rows[0].mean_gap > report.rows[2].mean_gap, "{report:?}");
        // auction never beats the optimum in expectation
        for row in &report.rows {
            assert!(row.mean_gap >= -3.0 * row.paired_se, "{row:?}");
        }
    }
}
