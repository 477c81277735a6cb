//! Optimal linear-payment auctions with aftermarket collaboration.
//!
//! A seller auctions an asset whose value is created after the sale by
//! non-contractible efforts from both the seller and the winning bidder.
//! Payments are linear: a cash transfer plus a share α of realized value.
//! This crate solves the optimal share α*(θ) for the four collaboration
//! structures (winner-pivotal, seller-pivotal, perfect effort substitution,
//! and the nested family indexed by an interdependence weight ζ), evaluates
//! the induced virtual surpluses, assembles the optimal direct mechanism,
//! and simulates the ascending-clock implementation that prices contracts
//! off drop-out order statistics.
//!
//! Module map:
//! * [`dist`] — bidder type distributions and hazard machinery
//! * [`numerics`] — root refinement, quadrature, bounded maximization, RNG
//! * [`sharing`] — optimal sharing-rate solvers per mode
//! * [`surplus`] — objectives Ψ, virtual surpluses φ, inverses, cached curves
//! * [`mechanism`] — direct mechanism, efforts, payments, revenue, IC audit
//! * [`auction`] — ascending-clock simulator and equivalence checks
//! * [`verify`] — proposition-level verdicts for the CLI and tests

// `!(a <= b)` deliberately guards NaN inputs where `a > b` would not
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auction;
pub mod dist;
pub mod error;
pub mod mechanism;
pub mod numerics;
pub mod sharing;
pub mod surplus;
pub mod verify;

pub use auction::{run_auction, AuctionConfig, AuctionTranscript};
pub use dist::{BidderProfile, Family, TypeDistribution, ValidationReport};
pub use error::{Error, Result};
pub use mechanism::{
    allocate, ic_audit, run_direct, seller_revenue_expected, DirectOutcome, Market, MarketSim,
    PosteriorBelief,
};
pub use numerics::{CounterRng, McConfig, QuadConfig, RootConfig};
pub use sharing::{
    alpha_es, alpha_nested, alpha_sp, alpha_star, alpha_wp, theta_c, Branch, CollaborationMode,
    SharingSolution,
};
pub use surplus::{nested_coefficients, phi, phi_inverse, psi, SurplusCurve};
