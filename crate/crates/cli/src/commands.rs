//! The five experiment commands: alpha-curve, verify, simulate, zeta-sweep
//! and ic-audit. Every CSV starts with a comment line carrying the schema
//! version and the config hash, and identical (config, seed) pairs produce
//! byte-identical files.

use crate::config::Experiment;
use crate::ExitKind;
use collab_auction::auction::{revenue_equivalence_check, AuctionConfig, AuctionSim};
use collab_auction::mechanism::{ic_audit, Market, MarketSim};
use collab_auction::numerics::CounterRng;
use collab_auction::sharing::{alpha_sp, alpha_wp, theta_c, CollaborationMode};
use collab_auction::verify::{self, PropResult};
use collab_auction::BidderProfile;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

pub const SCHEMA_VERSION: u32 = 1;

fn open_output(exp: &Experiment, name: &str) -> Result<(PathBuf, fs::File), ExitKind> {
    fs::create_dir_all(&exp.config.output_dir)
        .map_err(|e| ExitKind::Config(format!("cannot create output dir: {e}")))?;
    let path = exp.config.output_dir.join(name);
    let mut file = fs::File::create(&path)
        .map_err(|e| ExitKind::Config(format!("cannot create {}: {e}", path.display())))?;
    writeln!(
        file,
        "# schema={SCHEMA_VERSION} config_sha256={}",
        exp.config_hash
    )
    .map_err(|e| ExitKind::Numerical(e.to_string()))?;
    Ok((path, file))
}

fn num_err(e: collab_auction::Error) -> ExitKind {
    ExitKind::Numerical(e.to_string())
}

fn io_err(e: std::io::Error) -> ExitKind {
    ExitKind::Numerical(e.to_string())
}

/// Optimal share curves per distribution, with the pooling-region marker.
pub fn cmd_alpha_curve(exp: &Experiment) -> Result<(), ExitKind> {
    let n = exp.config.theta_grid;
    if n < 2 {
        return Err(ExitKind::Config(format!(
            "theta_grid must be at least 2, got {n}"
        )));
    }
    let (path, mut out) = open_output(exp, "alpha_curve.csv")?;
    writeln!(out, "distribution,theta,alpha_wp,alpha_sp,in_pooling_region").map_err(io_err)?;
    for (name, dist) in &exp.distributions {
        let tc = theta_c(dist).map_err(num_err)?;
        for i in 0..n {
            let theta = dist.theta_lo() + dist.range() * (i as f64 + 0.5) / n as f64;
            let wp = alpha_wp(dist, theta).map_err(num_err)?.alpha;
            let sp = alpha_sp(dist, theta).map_err(num_err)?.alpha;
            if sp < wp - 1e-9 {
                return Err(ExitKind::Proposition(format!(
                    "share dominance violated at {name}, theta={theta}: wp {wp} > sp {sp}"
                )));
            }
            let pooled = u8::from(theta <= tc);
            writeln!(out, "{name},{theta},{wp},{sp},{pooled}").map_err(io_err)?;
        }
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn print_table(rows: &[PropResult]) {
    println!(
        "{:<20} {:<26} {:<6} {:>14} {:>10}",
        "proposition", "distribution", "pass", "worst margin", "ms"
    );
    for r in rows {
        println!(
            "{:<20} {:<26} {:<6} {:>14.3e} {:>10.1}",
            r.proposition,
            r.distribution,
            if r.pass { "PASS" } else { "FAIL" },
            r.worst_margin,
            r.runtime_ms
        );
    }
}

/// Proposition verdicts per distribution; nonzero exit on any FAIL.
pub fn cmd_verify(exp: &Experiment) -> Result<(), ExitKind> {
    let quad = exp.quad();
    let mc = exp.mc();
    let mut rows = Vec::new();
    for (name, dist) in &exp.distributions {
        let checks = verify::run_all_checks(
            dist,
            name,
            exp.config.theta_grid.max(50),
            &quad,
            &mc,
            exp.config.zeta_step.max(0.01),
        )
        .map_err(num_err)?;
        rows.extend(checks);
    }
    print_table(&rows);
    let (path, mut out) = open_output(exp, "verify.csv")?;
    writeln!(out, "proposition,distribution,pass,worst_margin,runtime_ms").map_err(io_err)?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.proposition, r.distribution, r.pass, r.worst_margin, r.runtime_ms
        )
        .map_err(io_err)?;
    }
    println!("wrote {}", path.display());
    if rows.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(ExitKind::Proposition(
            "at least one proposition check failed".to_string(),
        ))
    }
}

/// Seeded auction runs with a per-draw direct-mechanism comparison.
pub fn cmd_simulate(exp: &Experiment) -> Result<(), ExitKind> {
    let mode = exp.mode();
    let auction_cfg = match mode {
        CollaborationMode::WinnerPivotal => AuctionConfig::winner_pivotal(),
        CollaborationMode::SellerPivotal => AuctionConfig::seller_pivotal(exp.config.epsilon),
        other => {
            return Err(ExitKind::Config(format!(
                "simulate needs a pivotal mode (the ascending auction is defined for \
                 winner-pivotal and seller-pivotal), got {}",
                other.label()
            )))
        }
    };
    let market = Market::new(exp.bidders.clone(), mode).map_err(num_err)?;
    let sim = MarketSim::new(market.clone()).map_err(num_err)?;
    let runner = AuctionSim::new(&sim, auction_cfg).map_err(num_err)?;
    let rng = CounterRng::new(exp.config.seed);

    let (path, mut out) = open_output(exp, "transcripts.csv")?;
    writeln!(
        out,
        "draw,mode,seed,winner_id,p_penultimate,p_final,contract_alpha,contract_cash,\
         posterior_type,effort_seller,effort_winner,realized_value,seller_revenue,\
         direct_revenue,winner_payoff"
    )
    .map_err(io_err)?;

    let n = exp.config.n_draws;
    let mut sum_a = 0.0;
    let mut sum_d = 0.0;
    let mut sum_gap = 0.0;
    let mut sum_gap_sq = 0.0;
    for d in 0..n {
        let theta = sim.sample_types(&rng, d as u64);
        let seed = rng.stream(d as u64).seed();
        let auction = runner.run(&theta, seed).map_err(num_err)?;
        let direct = sim.run_direct(&theta, seed).map_err(num_err)?;
        let k = auction.exit_prices.len();
        let p_prev = if k >= 2 { auction.exit_prices[k - 2] } else { auction.exit_prices[0] };
        let winner_payoff = auction
            .bidder_payoffs
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        writeln!(
            out,
            "{d},{},{},{},{p_prev},{},{},{},{},{},{},{},{},{},{winner_payoff}",
            mode.label(),
            exp.config.seed,
            auction.winner_id,
            auction.exit_prices[k - 1],
            auction.contract_alpha,
            auction.contract_cash,
            auction.posterior_type,
            auction.effort_seller,
            auction.effort_winner,
            auction.realized_value,
            auction.seller_revenue,
            direct.seller_revenue,
        )
        .map_err(io_err)?;
        sum_a += auction.seller_revenue;
        sum_d += direct.seller_revenue;
        let gap = direct.seller_revenue - auction.seller_revenue;
        sum_gap += gap;
        sum_gap_sq += gap * gap;
    }
    let nf = n as f64;
    let mean_gap = sum_gap / nf;
    let se_gap = ((sum_gap_sq / nf - mean_gap * mean_gap).max(0.0) / nf).sqrt();
    println!("wrote {}", path.display());
    println!(
        "auction revenue mean {:.6}; direct mean {:.6}; paired gap {mean_gap:.3e} ± {se_gap:.3e}",
        sum_a / nf,
        sum_d / nf
    );

    if let CollaborationMode::SellerPivotal = mode {
        let report = revenue_equivalence_check(&market, &auction_cfg, &exp.mc()).map_err(num_err)?;
        println!("epsilon sweep (gap = direct − auction):");
        for row in &report.rows {
            println!(
                "  eps {:>7.0e}: gap {:>10.3e} ± {:>9.3e} (max |gap| {:.3e})",
                row.epsilon, row.mean_gap, row.paired_se, row.max_abs_gap
            );
        }
        if !report.passed {
            return Err(ExitKind::Proposition(
                "epsilon convergence check failed".to_string(),
            ));
        }
    }
    Ok(())
}

/// Seller's payoff bound over the interdependence grid, per distribution.
pub fn cmd_zeta_sweep(exp: &Experiment) -> Result<(), ExitKind> {
    let step = exp.config.zeta_step;
    if !(step > 0.0 && step <= 0.5) {
        return Err(ExitKind::Config(format!(
            "zeta_step must lie in (0, 0.5], got {step}"
        )));
    }
    let quad = exp.quad();
    let (path, mut out) = open_output(exp, "zeta_sweep.csv")?;
    writeln!(out, "distribution,zeta,expected_revenue_bound").map_err(io_err)?;
    let mut all_ok = true;
    for (name, dist) in &exp.distributions {
        let sweep = verify::zeta_sweep(dist, 2, step, &quad).map_err(num_err)?;
        for (z, r) in sweep.zetas.iter().zip(&sweep.revenues) {
            writeln!(out, "{name},{z},{r}").map_err(io_err)?;
        }
        println!("{name}: argmax zeta = {}", sweep.argmax);
        all_ok &= sweep.argmax <= 0.5;
    }
    println!("wrote {}", path.display());
    if all_ok {
        Ok(())
    } else {
        Err(ExitKind::Proposition(
            "a distribution preferred zeta above 1/2".to_string(),
        ))
    }
}

/// Misreport audits across true types; nonzero exit on an IC violation.
pub fn cmd_ic_audit(exp: &Experiment) -> Result<(), ExitKind> {
    let mode = exp.mode();
    let (path, mut out) = open_output(exp, "ic_audit.csv")?;
    writeln!(
        out,
        "distribution,mode,true_theta,truthful_payoff,max_gain,worst_report"
    )
    .map_err(io_err)?;
    let mut worst: f64 = f64::NEG_INFINITY;
    for (name, dist) in &exp.distributions {
        let market = Market::new(
            vec![
                BidderProfile::new(0, *dist),
                BidderProfile::new(1, *dist),
            ],
            mode,
        )
        .map_err(num_err)?;
        let grid: Vec<f64> = (0..=100)
            .map(|k| dist.theta_lo() + dist.range() * k as f64 / 100.0)
            .collect();
        for i in 0..5 {
            let theta = dist.theta_lo() + dist.range() * (0.1 + 0.2 * i as f64);
            let report = ic_audit(&market, 0, theta, &grid).map_err(num_err)?;
            worst = worst.max(report.max_gain);
            writeln!(
                out,
                "{name},{},{theta},{},{},{}",
                mode.label(),
                report.truthful_payoff,
                report.max_gain,
                report.worst_report
            )
            .map_err(io_err)?;
        }
    }
    println!("wrote {}", path.display());
    println!("max misreport gain across audits: {worst:.3e}");
    if worst <= 1e-9 {
        Ok(())
    } else {
        Err(ExitKind::Proposition(format!(
            "incentive compatibility violated: max gain {worst:.3e}"
        )))
    }
}
