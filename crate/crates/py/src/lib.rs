//! Python bindings: type distributions, sharing-rate solvers, virtual
//! surpluses, the direct mechanism, and the ascending-auction simulator.
//!
//! Build with `cargo build --release -p collab-auction-py`, then place
//! `libcollab_auction_py.so` on the Python path as `collab_auction_py.so`
//! (see python/smoke_test.py).

use collab_auction::auction::{run_auction, AuctionConfig};
use collab_auction::dist::BidderProfile;
use collab_auction::mechanism::{ic_audit, run_direct, seller_revenue_expected, Market};
use collab_auction::sharing::{alpha_star, theta_c, CollaborationMode};
use collab_auction::{surplus, Error, Family, McConfig, QuadConfig, TypeDistribution};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(mode: &str, zeta: Option<f64>) -> PyResult<CollaborationMode> {
    match mode {
        "winner-pivotal" => Ok(CollaborationMode::WinnerPivotal),
        "seller-pivotal" => Ok(CollaborationMode::SellerPivotal),
        "effort-substitution" => Ok(CollaborationMode::EffortSubstitution),
        "nested" => {
            let z = zeta.ok_or_else(|| PyValueError::new_err("nested mode needs zeta"))?;
            Ok(CollaborationMode::Nested { zeta: z })
        }
        other => Err(PyValueError::new_err(format!(
            "unknown mode `{other}` (winner-pivotal, seller-pivotal, effort-substitution, nested)"
        ))),
    }
}

/// A bidder type distribution on a bounded support.
#[pyclass(name = "Distribution", frozen, from_py_object)]
#[derive(Clone)]
struct PyDistribution {
    inner: TypeDistribution,
}

#[pymethods]
impl PyDistribution {
    #[staticmethod]
    #[pyo3(signature = (lo=0.0, hi=1.0))]
    fn uniform(lo: f64, hi: f64) -> PyResult<Self> {
        Ok(Self {
            inner: TypeDistribution::new(Family::Uniform, lo, hi).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (rate, lo=0.0, hi=1.0))]
    fn truncated_exponential(rate: f64, lo: f64, hi: f64) -> PyResult<Self> {
        Ok(Self {
            inner: TypeDistribution::new(Family::TruncatedExponential { rate }, lo, hi)
                .map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (mu, sigma, lo=0.0, hi=1.0))]
    fn truncated_normal(mu: f64, sigma: f64, lo: f64, hi: f64) -> PyResult<Self> {
        Ok(Self {
            inner: TypeDistribution::new(Family::TruncatedNormal { mu, sigma }, lo, hi)
                .map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (k, lo=0.0, hi=1.0))]
    fn power(k: f64, lo: f64, hi: f64) -> PyResult<Self> {
        Ok(Self {
            inner: TypeDistribution::new(Family::Power { k }, lo, hi).map_err(err)?,
        })
    }

    #[getter]
    fn theta_lo(&self) -> f64 {
        self.inner.theta_lo()
    }

    #[getter]
    fn theta_hi(&self) -> f64 {
        self.inner.theta_hi()
    }

    fn cdf(&self, theta: f64) -> PyResult<f64> {
        self.inner.cdf(theta).map_err(err)
    }

    fn pdf(&self, theta: f64) -> PyResult<f64> {
        self.inner.pdf(theta).map_err(err)
    }

    fn inverse_hazard(&self, theta: f64) -> PyResult<f64> {
        self.inner.inverse_hazard(theta).map_err(err)
    }

    fn inverse_cdf(&self, u: f64) -> PyResult<f64> {
        self.inner.inverse_cdf(u).map_err(err)
    }

    /// Threshold below which the seller-pivotal optimum pools at α = 1.
    fn theta_c(&self) -> PyResult<f64> {
        theta_c(&self.inner).map_err(err)
    }

    /// Standing-assumption checks as {name: (pass, worst_violation)}.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let report = self.inner.validate();
        let d = PyDict::new(py);
        for check in report.checks {
            d.set_item(check.name, (check.pass, check.worst_violation))?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Distribution({:?} on [{}, {}])",
            self.inner.family(),
            self.inner.theta_lo(),
            self.inner.theta_hi()
        )
    }
}

/// Optimal seller share α*(θ) as (alpha, branch, residual).
#[pyfunction]
#[pyo3(signature = (mode, dist, theta, zeta=None))]
fn optimal_share(
    mode: &str,
    dist: &PyDistribution,
    theta: f64,
    zeta: Option<f64>,
) -> PyResult<(f64, String, f64)> {
    let m = parse_mode(mode, zeta)?;
    let sol = alpha_star(m, &dist.inner, theta).map_err(err)?;
    Ok((sol.alpha, sol.branch.label().to_string(), sol.residual))
}

/// Objective Ψ(α, θ) = A(α)θ² − B(α)ρ(θ)θ.
#[pyfunction]
#[pyo3(signature = (mode, dist, alpha, theta, zeta=None))]
fn psi(mode: &str, dist: &PyDistribution, alpha: f64, theta: f64, zeta: Option<f64>) -> PyResult<f64> {
    surplus::psi(parse_mode(mode, zeta)?, &dist.inner, alpha, theta).map_err(err)
}

/// Virtual surplus φ(θ).
#[pyfunction]
#[pyo3(signature = (mode, dist, theta, zeta=None))]
fn phi(mode: &str, dist: &PyDistribution, theta: f64, zeta: Option<f64>) -> PyResult<f64> {
    surplus::phi(parse_mode(mode, zeta)?, &dist.inner, theta).map_err(err)
}

/// Inverse virtual surplus (clamped to the top type above the range).
#[pyfunction]
#[pyo3(signature = (mode, dist, p, zeta=None))]
fn phi_inverse(mode: &str, dist: &PyDistribution, p: f64, zeta: Option<f64>) -> PyResult<f64> {
    surplus::phi_inverse(parse_mode(mode, zeta)?, &dist.inner, p).map_err(err)
}

/// Generalized coefficients (A, B, H) at (alpha, zeta).
#[pyfunction]
fn nested_coefficients(alpha: f64, zeta: f64) -> (f64, f64, f64) {
    surplus::nested_coefficients(alpha, zeta)
}

/// A market of bidders under one collaboration mode.
#[pyclass(name = "Market")]
struct PyMarket {
    inner: Market,
}

#[pymethods]
impl PyMarket {
    #[new]
    #[pyo3(signature = (mode, distributions, zeta=None))]
    fn new(mode: &str, distributions: Vec<PyDistribution>, zeta: Option<f64>) -> PyResult<Self> {
        let m = parse_mode(mode, zeta)?;
        let bidders = distributions
            .into_iter()
            .enumerate()
            .map(|(i, d)| BidderProfile::new(i, d.inner))
            .collect();
        Ok(Self {
            inner: Market::new(bidders, m).map_err(err)?,
        })
    }

    /// One run of the optimal direct mechanism.
    #[pyo3(signature = (thetas, seed=0))]
    fn run_direct<'py>(
        &self,
        py: Python<'py>,
        thetas: Vec<f64>,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let out = run_direct(&self.inner, &thetas, seed).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("winner", out.winner)?;
        d.set_item("alpha", out.alpha)?;
        d.set_item("cash_winner", out.cash_winner)?;
        d.set_item("revealed_type", out.revealed_type)?;
        d.set_item("effort_seller", out.effort_seller)?;
        d.set_item("effort_winner", out.effort_winner)?;
        d.set_item("realized_value", out.realized_value)?;
        d.set_item("seller_revenue", out.seller_revenue)?;
        d.set_item("bidder_payoffs", out.bidder_payoffs)?;
        Ok(d)
    }

    /// One run of the ascending-clock auction (pivotal modes only).
    #[pyo3(signature = (thetas, seed=0, epsilon=1e-3))]
    fn run_auction<'py>(
        &self,
        py: Python<'py>,
        thetas: Vec<f64>,
        seed: u64,
        epsilon: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg = match self.inner.mode() {
            CollaborationMode::WinnerPivotal => AuctionConfig::winner_pivotal(),
            CollaborationMode::SellerPivotal => AuctionConfig::seller_pivotal(epsilon),
            other => {
                return Err(PyValueError::new_err(format!(
                    "auction is defined for pivotal modes, market is {}",
                    other.label()
                )))
            }
        };
        let t = run_auction(&self.inner, &thetas, &cfg, seed).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("exit_prices", t.exit_prices)?;
        d.set_item("winner_id", t.winner_id)?;
        d.set_item("contract_alpha", t.contract_alpha)?;
        d.set_item("contract_cash", t.contract_cash)?;
        d.set_item("posterior_type", t.posterior_type)?;
        d.set_item("effort_seller", t.effort_seller)?;
        d.set_item("effort_winner", t.effort_winner)?;
        d.set_item("realized_value", t.realized_value)?;
        d.set_item("seller_revenue", t.seller_revenue)?;
        d.set_item("bidder_payoffs", t.bidder_payoffs)?;
        Ok(d)
    }

    /// Quadrature and Monte Carlo estimates of expected seller revenue.
    #[pyo3(signature = (n_draws=100_000, seed=0))]
    fn expected_revenue<'py>(
        &self,
        py: Python<'py>,
        n_draws: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let est = seller_revenue_expected(
            &self.inner,
            &QuadConfig::default(),
            &McConfig { n_draws, seed },
        )
        .map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("quadrature", est.quadrature)?;
        d.set_item("mc_mean", est.mc_mean)?;
        d.set_item("mc_se", est.mc_se)?;
        d.set_item("n_draws", est.n_draws)?;
        Ok(d)
    }

    /// Max misreport gain for one bidder over a report grid.
    fn audit_incentives<'py>(
        &self,
        py: Python<'py>,
        bidder_id: usize,
        true_theta: f64,
        report_grid: Vec<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let report = ic_audit(&self.inner, bidder_id, true_theta, &report_grid).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("truthful_payoff", report.truthful_payoff)?;
        d.set_item("max_gain", report.max_gain)?;
        d.set_item("worst_report", report.worst_report)?;
        Ok(d)
    }
}

#[pymodule]
fn collab_auction_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyMarket>()?;
    m.add_function(wrap_pyfunction!(optimal_share, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(phi_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(nested_coefficients, m)?)?;
    Ok(())
}
