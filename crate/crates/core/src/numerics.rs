//! Shared numerical kernel: bracketed root refinement, bounded scalar
//! maximization, adaptive Simpson quadrature, a dense-grid argmax oracle for
//! tests, and a counter-based RNG for reproducible Monte Carlo.

use crate::error::{Error, Result};

/// Settings for [`find_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_depth: 40,
        }
    }
}

/// Settings for Monte Carlo sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_draws: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_draws: 100_000,
            seed: 0,
        }
    }
}

/// Bracketed scalar root refinement: bisection with secant acceleration.
///
/// Requires `g(lo) * g(hi) <= 0`. The bracket is retained at every step, so
/// the result always lies in `[lo, hi]`. Deterministic.
pub fn find_root<G: FnMut(f64) -> f64>(mut g: G, lo: f64, hi: f64, cfg: &RootConfig) -> Result<f64> {
    if !(lo <= hi) {
        return Err(Error::Domain(format!("bad bracket [{lo}, {hi}]")));
    }
    let mut a = lo;
    let mut b = hi;
    let mut ga = g(a);
    let mut gb = g(b);
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(Error::Bracket {
            lo,
            hi,
            g_lo: ga,
            g_hi: gb,
        });
    }
    for iter in 0..cfg.max_iter {
        if (b - a).abs() <= cfg.abs_tol {
            // return the endpoint with the smaller residual
            return Ok(if ga.abs() <= gb.abs() { a } else { b });
        }
        // secant candidate on alternate iterations, accepted only if it
        // falls safely inside the bracket; the interleaved midpoints keep
        // bisection's convergence guarantee
        let mid = 0.5 * (a + b);
        let mut x = mid;
        let denom = gb - ga;
        if iter % 2 == 1 && denom != 0.0 {
            let sec = a - ga * (b - a) / denom;
            let margin = 0.01 * (b - a);
            if sec > a + margin && sec < b - margin {
                x = sec;
            }
        }
        let gx = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        if gx.signum() == ga.signum() {
            a = x;
            ga = gx;
        } else {
            b = x;
            gb = gx;
        }
    }
    Err(Error::Convergence(format!(
        "root refinement exceeded {} iterations (bracket width {})",
        cfg.max_iter,
        b - a
    )))
}

/// Coarse grid scan followed by golden-section refinement of the bracketing
/// cell. Returns `(argmax, value)`.
///
/// Ties on the scan resolve to the smallest abscissa; a constant function
/// therefore returns `lo`.
pub fn maximize_bounded<H: FnMut(f64) -> f64>(
    mut h: H,
    lo: f64,
    hi: f64,
    grid_n: usize,
) -> (f64, f64) {
    let n = grid_n.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best_i = 0usize;
    let mut best_x = lo;
    let mut best_v = h(lo);
    for i in 1..n {
        let x = if i == n - 1 { hi } else { lo + step * i as f64 };
        let v = h(x);
        if v > best_v {
            best_v = v;
            best_x = x;
            best_i = i;
        }
    }
    // refine inside the two cells adjacent to the best grid point
    let mut a = if best_i == 0 { lo } else { lo + step * (best_i - 1) as f64 };
    let mut b = if best_i == n - 1 {
        hi
    } else {
        lo + step * (best_i + 1) as f64
    };
    a = a.max(lo);
    b = b.min(hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut hc = h(c);
    let mut hd = h(d);
    for _ in 0..90 {
        if b - a <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if hc > hd {
            b = d;
            d = c;
            hd = hc;
            c = b - INV_PHI * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + INV_PHI * (b - a);
            hd = h(d);
        }
        if hc > best_v {
            best_v = hc;
            best_x = c;
        }
        if hd > best_v {
            best_v = hd;
            best_x = d;
        }
    }
    (best_x, best_v)
}

/// Adaptive Simpson quadrature with relative-error control.
pub fn integrate<G: FnMut(f64) -> f64>(mut g: G, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(a <= b) {
        return Err(Error::Domain(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = g(a);
    let fb = g(b);
    let m = 0.5 * (a + b);
    let fm = g(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let scale = whole.abs().max(1e-12 * (b - a));
    let tol = cfg.rel_tol * scale;
    simpson_step(&mut g, a, b, fa, fm, fb, whole, tol, cfg.max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<G: FnMut(f64) -> f64>(
    g: &mut G,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = g(lm);
    let frm = g(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a) < 1e-14 * (1.0 + a.abs()) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Convergence(format!(
            "quadrature depth exhausted on [{a}, {b}]"
        )));
    }
    let l = simpson_step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// Pure dense-grid argmax with no refinement. Test oracle only; ties resolve
/// to the smallest abscissa.
pub fn grid_argmax_oracle<H: FnMut(f64) -> f64>(mut h: H, lo: f64, hi: f64, n: usize) -> f64 {
    let n = n.max(2);
    let mut best_x = lo;
    let mut best_v = h(lo);
    for i in 1..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let v = h(x);
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    }
    best_x
}

/// Counter-based uniform generator: the k-th variate of a stream is a pure
/// function of `(seed, k)`, so sweeps can be partitioned by draw index
/// without changing any value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterRng {
    seed: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed: mix64(seed ^ GOLDEN),
        }
    }

    /// Derives an independent stream, e.g. one per draw index.
    pub fn stream(&self, id: u64) -> CounterRng {
        CounterRng {
            seed: mix64(self.seed ^ id.wrapping_mul(0xD1B5_4A32_D192_ED03)),
        }
    }

    /// The mixed seed; usable as a derived seed for sub-components.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn word(&self, index: u64) -> u64 {
        mix64(self.seed.wrapping_add(index.wrapping_mul(GOLDEN)))
    }

    /// Uniform variate in [0, 1) at the given counter position.
    pub fn uniform(&self, index: u64) -> f64 {
        (self.word(index) >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform integer in [0, n) at the given counter position.
    pub fn below(&self, index: u64, n: usize) -> usize {
        ((self.uniform(index) * n as f64) as usize).min(n - 1)
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // reference values quoted in full
mod tests {
    use super::*;

    #[test]
    fn find_root_linear() {
        let r = find_root(|x| x - 0.5, 0.0, 1.0, &RootConfig::default()).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn find_root_wp_cubic() {
        // bisection oracle for the sharing-rate cubic at rho = 0
        let r = find_root(
            |a| a * a * a - 3.0 * a * a + 4.0 * a - 1.0,
            0.0,
            1.0,
            &RootConfig::default(),
        )
        .unwrap();
        assert!((r - 0.317672196171980672630516260289).abs() < 1e-11);
    }

    #[test]
    fn find_root_sp_cubic() {
        let r = find_root(|a| a * a * a + a - 1.0, 0.0, 1.0, &RootConfig::default()).unwrap();
        assert!((r - 0.682327803828019327369483739711).abs() < 1e-11);
    }

    #[test]
    fn find_root_requires_sign_change() {
        let err = find_root(|x| x * x + 1.0, 0.0, 1.0, &RootConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
    }

    #[test]
    fn find_root_stays_in_bracket() {
        let r = find_root(|x| (x - 0.3).tan(), 0.0, 0.6, &RootConfig::default()).unwrap();
        assert!((0.0..=0.6).contains(&r));
        assert!((r - 0.3).abs() < 1e-11);
    }

    #[test]
    fn maximize_quadratic_vertex() {
        let (x, v) = maximize_bounded(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 101);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(v.abs() < 1e-17);
    }

    #[test]
    fn maximize_constant_returns_lo() {
        let (x, v) = maximize_bounded(|_| 2.5, 0.0, 1.0, 64);
        assert_eq!(x, 0.0);
        assert_eq!(v, 2.5);
    }

    #[test]
    fn maximize_beats_grid_oracle() {
        let h = |x: f64| (3.1 * x).sin() - 0.2 * x;
        let (_, v) = maximize_bounded(h, 0.0, 1.0, 257);
        let xo = grid_argmax_oracle(h, 0.0, 1.0, 257);
        assert!(v >= h(xo));
    }

    #[test]
    fn integrate_linear() {
        let v = integrate(|x| x, 0.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn integrate_empty_interval() {
        let v = integrate(|x| x * x, 0.7, 0.7, &QuadConfig::default()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn integrate_matches_riemann_reference() {
        // oscillatory integrand vs a brute-force Riemann sum
        let g = |x: f64| (5.0 * x).cos() * x.exp();
        let v = integrate(g, 0.0, 2.0, &QuadConfig::default()).unwrap();
        let n = 1_000_000;
        let h = 2.0 / n as f64;
        let riemann: f64 = (0..n).map(|i| g((i as f64 + 0.5) * h) * h).sum();
        assert!((v - riemann).abs() < 1e-6, "{v} vs {riemann}");
    }

    #[test]
    fn grid_oracle_sin() {
        let x = grid_argmax_oracle(|x| x.sin(), 0.0, 3.0, 1_000_000);
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-5);
    }

    #[test]
    fn grid_oracle_linear_endpoint() {
        let x = grid_argmax_oracle(|x| x, 0.0, 1.0, 101);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn rng_reproducible_and_partition_independent() {
        let rng = CounterRng::new(42);
        let all: Vec<f64> = (0..1000).map(|i| rng.uniform(i)).collect();
        let again: Vec<f64> = (0..1000).map(|i| rng.uniform(i)).collect();
        assert_eq!(all, again);
        // split the index range as a worker pool would
        let first: Vec<f64> = (0..500).map(|i| rng.uniform(i)).collect();
        let second: Vec<f64> = (500..1000).map(|i| rng.uniform(i)).collect();
        let joined: Vec<f64> = first.into_iter().chain(second).collect();
        assert_eq!(all, joined);
    }

    #[test]
    fn rng_roughly_uniform() {
        let rng = CounterRng::new(7);
        let n = 100_000;
        let mean: f64 = (0..n).map(|i| rng.uniform(i)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 5e-3, "mean {mean}");
        let in_low: usize = (0..n).filter(|&i| rng.uniform(i) < 0.25).count();
        assert!((in_low as f64 / n as f64 - 0.25).abs() < 5e-3);
    }
}
