//! Mean-LLR EXIT analysis for LT check nodes.
//!
//! Messages are modelled as symmetric Gaussians (variance = 2 × mean). The
//! central quantities are
//!
//! * `φ(μ) = E[tanh(X/2)]`, `X ~ N(μ, 2μ)`,
//! * `f_d(μ) = 2 E[atanh(tanh(Z/2) Π_{q<d} tanh(X_q/2))]`, the mean message
//!   leaving a degree-`d` output node whose channel LLR is `Z ~ N(2γ, 4γ)`,
//! * the low-SNR form `f_d(μ) ≈ 2γ φ(μ)^{d-1}`.
//!
//! One-dimensional expectations use 64-node Gauss–Hermite quadrature. The
//! exact `f_d` is a Monte-Carlo estimate over the variable-node messages with
//! the channel LLR integrated out by quadrature.

use std::fmt::Write as _;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussHermite;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::rng::GaussianStream;

pub const QUADRATURE_NODES: usize = 64;

/// Default Monte-Carlo sample count for the exact `f_d`.
pub const DEFAULT_SAMPLES: usize = 200_000;

/// Standard-normal quadrature: `E[f(N(0,1))] ≈ Σ w_i f(z_i)`.
fn standard_normal_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let gh = GaussHermite::new(NonZeroUsize::new(QUADRATURE_NODES).unwrap());
        let pairs = gh.as_node_weight_pairs();
        let total: f64 = pairs.iter().map(|&(_, w)| w).sum();
        let mut rule: Vec<(f64, f64)> = pairs
            .iter()
            .map(|&(t, w)| (std::f64::consts::SQRT_2 * t, w / total))
            .collect();
        rule.sort_by(|a, b| a.0.total_cmp(&b.0));
        rule
    })
}

/// `E[f(X)]` for `X ~ N(mean, variance)` by Gauss–Hermite quadrature.
pub fn gaussian_expectation(mean: f64, variance: f64, f: impl Fn(f64) -> f64) -> f64 {
    let sd = variance.sqrt();
    standard_normal_rule()
        .iter()
        .map(|&(z, w)| w * f(mean + sd * z))
        .sum()
}

/// Symmetric Gaussian LLR law N(m, 2m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricGaussian {
    mean: f64,
}

impl SymmetricGaussian {
    pub fn new(mean: f64) -> Result<Self> {
        if !(mean >= 0.0) || !mean.is_finite() {
            return Err(invalid(format!("symmetric Gaussian mean must be >= 0, got {mean}")));
        }
        Ok(Self { mean })
    }

    /// Law of the BI-AWGN channel LLR at linear SNR `gamma`.
    pub fn channel(gamma: f64) -> Result<Self> {
        Self::new(2.0 * gamma)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        2.0 * self.mean
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        gaussian_expectation(self.mean, self.variance(), f)
    }

    pub fn sample(&self, g: &mut GaussianStream) -> f64 {
        g.normal(self.mean, self.variance())
    }
}

/// φ(μ) = E[tanh(X/2)] for X ~ N(μ, 2μ).
pub fn phi(mu: f64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(invalid(format!("phi requires mu >= 0, got {mu}")));
    }
    Ok(phi_unchecked(mu))
}

fn phi_unchecked(mu: f64) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    // u = μ + 2√μ·t with t standard-Hermite, i.e. σ = √(2μ) in normal form.
    gaussian_expectation(mu, 2.0 * mu, |u| (0.5 * u).tanh())
}

/// φ on every point of `mus`.
pub fn phi_grid(mus: &[f64]) -> Result<Vec<f64>> {
    mus.iter().map(|&m| phi(m)).collect()
}

/// Odd moment `E[X^{2n-1}]` of N(x, 2x):
/// `Σ_{j<n} C(2n-1, 2j) (2j-1)!! 2^j x^{2n-j-1}` with `(-1)!! = 1`.
pub fn gaussian_odd_moment(n: u32, x: f64) -> f64 {
    odd_moment_terms(n)
        .into_iter()
        .map(|(c, p)| c * x.powi(p as i32))
        .sum()
}

/// `(coefficient, power of x)` for each term of the odd-moment polynomial,
/// ordered by `j = 0..n`.
pub fn odd_moment_terms(n: u32) -> Vec<(f64, u32)> {
    assert!(n >= 1, "moment index must be positive");
    let order = 2 * n - 1;
    (0..n)
        .map(|j| {
            let coef = binomial(order, 2 * j) * double_factorial_odd(j) * 2f64.powi(j as i32);
            (coef, order - j)
        })
        .collect()
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// (2j-1)!!, with (-1)!! = 1.
fn double_factorial_odd(j: u32) -> f64 {
    (1..=j).fold(1.0, |acc, i| acc * (2 * i - 1) as f64)
}

/// Monte-Carlo configuration for the exact `f_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExitMethod {
    Exact(MonteCarlo),
    LowSnr,
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// `f_d(μ)` at SNR `gamma`.
pub fn f_d(d: u32, mu: f64, gamma: f64, method: ExitMethod) -> Result<f64> {
    match method {
        ExitMethod::LowSnr => {
            check_f_d_args(d, mu, gamma)?;
            Ok(2.0 * gamma * phi_unchecked(mu).powi(d as i32 - 1))
        }
        ExitMethod::Exact(mc) => f_d_exact(d, mu, gamma, mc).map(|e| e.mean),
    }
}

fn check_f_d_args(d: u32, mu: f64, gamma: f64) -> Result<()> {
    if d < 1 {
        return Err(invalid("check degree must be >= 1"));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("SNR must be positive, got {gamma}")));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(invalid(format!("mu must be >= 0, got {mu}")));
    }
    Ok(())
}

/// Exact `f_d(μ)` as a Monte-Carlo estimate.
///
/// Sample `s` draws `X_1..X_{d-1}` from stream `s` of `mc.seed`, so a sample
/// is identical whichever `d` or table it is used for.
pub fn f_d_exact(d: u32, mu: f64, gamma: f64, mc: MonteCarlo) -> Result<Estimate> {
    check_f_d_args(d, mu, gamma)?;
    if mc.samples == 0 {
        return Err(invalid("Monte-Carlo sample count must be positive"));
    }
    if d == 1 {
        // Empty product: 2 atanh(tanh(Z/2)) = Z.
        return Ok(Estimate {
            mean: 2.0 * gamma,
            std_error: 0.0,
        });
    }
    if mu == 0.0 {
        return Ok(Estimate {
            mean: 0.0,
            std_error: 0.0,
        });
    }
    let inner = CheckOutputMean::new(gamma);
    let sd = (2.0 * mu).sqrt();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for s in 0..mc.samples {
        let mut g = GaussianStream::new(mc.seed, s as u64);
        let mut p = 1.0;
        for _ in 1..d {
            p *= (0.5 * (mu + sd * g.standard())).tanh();
        }
        let v = inner.eval(p);
        sum += v;
        sum_sq += v * v;
    }
    let n = mc.samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    Ok(Estimate {
        mean,
        std_error: (var / n).sqrt(),
    })
}

/// `g(p) = E_Z[2 atanh(p tanh(Z/2))]` for `Z ~ N(2γ, 4γ)`.
///
/// Tabulated against `u = 2 atanh(p)`, where the function is smooth with
/// slope at most one, and evaluated by cubic Hermite interpolation using the
/// exact derivative. `g` is odd in `p`.
struct CheckOutputMean {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl CheckOutputMean {
    const INTERVALS: usize = 8192;
    /// Beyond this the table is flat to double precision.
    const U_MAX: f64 = 40.0;

    fn new(gamma: f64) -> Self {
        let law = SymmetricGaussian { mean: 2.0 * gamma };
        let sd = law.variance().sqrt();
        let rule: Vec<(f64, f64)> = standard_normal_rule()
            .iter()
            .map(|&(z, w)| (w, law.mean() + sd * z))
            .collect();
        let step = Self::U_MAX / Self::INTERVALS as f64;
        let mut values = Vec::with_capacity(Self::INTERVALS + 1);
        let mut slopes = Vec::with_capacity(Self::INTERVALS + 1);
        for i in 0..=Self::INTERVALS {
            let u = i as f64 * step;
            let (mut v, mut m) = (0.0, 0.0);
            for &(w, z) in &rule {
                v += w * boxplus(z, u);
                m += w * boxplus_slope(z, u);
            }
            values.push(v);
            slopes.push(m);
        }
        Self { step, values, slopes }
    }

    fn eval(&self, p: f64) -> f64 {
        let a = p.abs();
        let u = if a < 1.0 { 2.0 * a.atanh() } else { f64::INFINITY };
        if u >= Self::U_MAX {
            return self.values[Self::INTERVALS].copysign(p);
        }
        let x = u / self.step;
        let i = (x as usize).min(Self::INTERVALS - 1);
        let t = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        v.copysign(p)
    }
}

/// `2 atanh(tanh(z/2) tanh(u/2))` without overflow for large arguments.
fn boxplus(z: f64, u: f64) -> f64 {
    let core = z.signum() * u.signum() * z.abs().min(u.abs());
    core + (-(z + u).abs()).exp().ln_1p() - (-(z - u).abs()).exp().ln_1p()
}

/// `∂ boxplus(z, u) / ∂u` for `u ≥ 0`.
fn boxplus_slope(z: f64, u: f64) -> f64 {
    let logistic = |x: f64| {
        let e = (-x.abs()).exp();
        e / (1.0 + e)
    };
    let core = if u < z.abs() { z.signum() } else { 0.0 };
    core - logistic(z + u) * (z + u).signum() - logistic(z - u) * (z - u).signum()
}

/// Which capacity formula to use for the BI-AWGN channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityModel {
    /// `½ log₂(1 + γ)`, the low-SNR approximation.
    ShannonApprox,
    /// Binary-input AWGN capacity `1 − E[log₂(1 + e^{−L})]`, `L ~ N(2γ, 4γ)`.
    #[default]
    BiAwgnExact,
}

/// Capacity in bits per channel use.
pub fn capacity(gamma: f64, model: CapacityModel) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("SNR must be positive, got {gamma}")));
    }
    Ok(match model {
        CapacityModel::ShannonApprox => 0.5 * gamma.ln_1p() / std::f64::consts::LN_2,
        CapacityModel::BiAwgnExact => {
            let ln2 = std::f64::consts::LN_2;
            // log₂(2 / (1 + e^{−L})) = (ln 2 − softplus(−L)) / ln 2
            gaussian_expectation(2.0 * gamma, 4.0 * gamma, |l| (ln2 - softplus(-l)) / ln2)
        }
    })
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `f_d(μ_j)` for `d = 1..=D` over a μ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitTable {
    gamma: f64,
    mu_grid: Vec<f64>,
    max_degree: u32,
    /// Row-major: `values[(d - 1) * N + j]`.
    values: Vec<f64>,
}

impl ExitTable {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu_grid(&self) -> &[f64] {
        &self.mu_grid
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn value(&self, d: u32, j: usize) -> f64 {
        self.values[(d as usize - 1) * self.mu_grid.len() + j]
    }

    pub fn row(&self, d: u32) -> &[f64] {
        let n = self.mu_grid.len();
        &self.values[(d as usize - 1) * n..d as usize * n]
    }

    /// Count of adjacent pairs breaking "nonincreasing in d" or
    /// "nondecreasing in μ (d > 1)" by more than `tol`.
    pub fn monotonicity_violations(&self, tol: f64) -> usize {
        let n = self.mu_grid.len();
        let mut count = 0;
        for d in 1..=self.max_degree {
            for j in 0..n {
                if d > 1 && self.value(d, j) > self.value(d - 1, j) + tol {
                    count += 1;
                }
                if d > 1 && j > 0 && self.value(d, j) + tol < self.value(d, j - 1) {
                    count += 1;
                }
            }
        }
        count
    }

    /// CSV with one row per degree and one column per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d");
        for mu in &self.mu_grid {
            write!(out, ",{mu}").unwrap();
        }
        out.push('\n');
        for d in 1..=self.max_degree {
            write!(out, "{d}").unwrap();
            for v in self.row(d) {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Equally spaced grid `μ_o j / N`, `j = 1..=N`.
pub fn uniform_mu_grid(mu_o: f64, n: usize) -> Result<Vec<f64>> {
    if !(mu_o > 0.0) || n == 0 {
        return Err(invalid("mu grid needs mu_o > 0 and N >= 1"));
    }
    Ok((1..=n).map(|j| mu_o * j as f64 / n as f64).collect())
}

pub fn build_exit_table(max_degree: u32, mu_grid: &[f64], gamma: f64, method: ExitMethod) -> Result<ExitTable> {
    if max_degree == 0 {
        return Err(invalid("max degree must be positive"));
    }
    if mu_grid.is_empty() || mu_grid[0] <= 0.0 || mu_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("mu grid must be nonempty, positive and strictly ascending"));
    }
    check_f_d_args(1, mu_grid[mu_grid.len() - 1], gamma)?;
    let n = mu_grid.len();
    let dmax = max_degree as usize;
    let mut values = vec![0.0; dmax * n];
    match method {
        ExitMethod::LowSnr => {
            let phis = phi_grid(mu_grid)?;
            for d in 1..=dmax {
                for (j, &p) in phis.iter().enumerate() {
                    values[(d - 1) * n + j] = 2.0 * gamma * p.powi(d as i32 - 1);
                }
            }
        }
        ExitMethod::Exact(mc) => {
            if mc.samples == 0 {
                return Err(invalid("Monte-Carlo sample count must be positive"));
            }
            exact_table(&mut values, dmax, mu_grid, gamma, mc);
        }
    }
    Ok(ExitTable {
        gamma,
        mu_grid: mu_grid.to_vec(),
        max_degree,
        values,
    })
}

/// Fixed chunking keeps the floating-point summation order independent of
/// the number of worker threads.
const TABLE_CHUNKS: usize = 64;

fn exact_table(values: &mut [f64], dmax: usize, mu_grid: &[f64], gamma: f64, mc: MonteCarlo) {
    let n = mu_grid.len();
    let inner = CheckOutputMean::new(gamma);
    let sds: Vec<f64> = mu_grid.iter().map(|&m| (2.0 * m).sqrt()).collect();
    let chunk = mc.samples.div_ceil(TABLE_CHUNKS);
    let partials: Vec<Vec<f64>> = (0..TABLE_CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; dmax * n];
            let mut xi = vec![0.0; dmax.saturating_sub(1)];
            for s in (c * chunk)..((c + 1) * chunk).min(mc.samples) {
                let mut g = GaussianStream::new(mc.seed, s as u64);
                xi.iter_mut().for_each(|x| *x = g.standard());
                for j in 0..n {
                    let mut p = 1.0;
                    for d in 2..=dmax {
                        p *= (0.5 * (mu_grid[j] + sds[j] * xi[d - 2])).tanh();
                        if p.abs() < 1e-18 {
                            break;
                        }
                        acc[(d - 1) * n + j] += inner.eval(p);
                    }
                }
            }
            acc
        })
        .collect();
    for part in partials {
        for (v, p) in values.iter_mut().zip(part) {
            *v += p;
        }
    }
    let inv = 1.0 / mc.samples as f64;
    values.iter_mut().for_each(|v| *v *= inv);
    for j in 0..n {
        values[j] = 2.0 * gamma;
    }
}
