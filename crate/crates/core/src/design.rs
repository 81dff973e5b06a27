//! Degree-distribution design by linear programming.
//!
//! Two programs are supported:
//!
//! * the general program over edge-perspective variables `ω_d`, minimising
//!   `α Σ ω_d / d` subject to `α Σ ω_d f_d(μ_j) ≥ μ_j + δ`;
//! * the low-SNR program over `Ω_d`, maximising `Σ d Ω_d` subject to
//!   `Σ d Ω_d φ(μ_j)^{d-1} ≥ η (μ_j + ε) / (4 ln 2) + δ`, searched over a grid
//!   of efficiencies `η`.
//!
//! Both add `Σ = 1` and nonnegativity.

use serde::Serialize;

use crate::degree::{DegreeDistribution, DistributionJson, EdgeDistribution};
use crate::error::{invalid, Error, Result};
use crate::exit::{self, CapacityModel, ExitMethod, ExitTable};
use crate::lp::{LinearProgram, LpSolution, Relation, Sense};

pub const DEFAULT_GRID_SIZE: usize = 200;
/// Turns the strict growth inequalities into closed ones.
pub const STRICTNESS_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignSpecGeneral {
    pub alpha: f64,
    pub max_degree: u32,
    pub mu_o: f64,
    pub grid_size: usize,
    /// Linear SNR γ.
    pub snr: f64,
    #[serde(skip)]
    pub exit_method: ExitMethod,
}

impl DesignSpecGeneral {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(invalid("alpha must be positive"));
        }
        check_common(self.max_degree, self.mu_o, self.grid_size)?;
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return Err(invalid("SNR must be positive"));
        }
        Ok(())
    }

    pub fn mu_grid(&self) -> Result<Vec<f64>> {
        exit::uniform_mu_grid(self.mu_o, self.grid_size)
    }

    /// SNR below which no distribution satisfies the growth constraints.
    pub fn snr_threshold(&self) -> f64 {
        self.mu_o / (2.0 * self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignSpecLowSnr {
    pub max_degree: u32,
    pub mu_o: f64,
    pub grid_size: usize,
    pub epsilon: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_step: f64,
}

impl DesignSpecLowSnr {
    pub fn new(max_degree: u32, mu_o: f64) -> Self {
        Self {
            max_degree,
            mu_o,
            grid_size: DEFAULT_GRID_SIZE,
            epsilon: 0.01,
            eta_min: 0.80,
            eta_max: 1.00,
            eta_step: 0.0005,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.max_degree, self.mu_o, self.grid_size)?;
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(invalid("epsilon must be positive"));
        }
        if !(self.eta_min > 0.0 && self.eta_min <= self.eta_max && self.eta_max <= 1.0) {
            return Err(invalid("efficiency range must satisfy 0 < eta_min <= eta_max <= 1"));
        }
        if !(self.eta_step > 0.0) {
            return Err(invalid("efficiency step must be positive"));
        }
        Ok(())
    }

    pub fn mu_grid(&self) -> Result<Vec<f64>> {
        exit::uniform_mu_grid(self.mu_o, self.grid_size)
    }

    /// The searched efficiencies, ascending.
    pub fn eta_grid(&self) -> Vec<f64> {
        let steps = ((self.eta_max - self.eta_min) / self.eta_step + 1e-9).floor() as usize;
        (0..=steps)
            .map(|i| round_to_step(self.eta_min + i as f64 * self.eta_step))
            .collect()
    }
}

/// Removes accumulation noise such as 0.9680000000000001.
fn round_to_step(v: f64) -> f64 {
    (v * 1e10).round() / 1e10
}

fn check_common(max_degree: u32, mu_o: f64, grid_size: usize) -> Result<()> {
    if max_degree == 0 {
        return Err(invalid("max degree must be positive"));
    }
    if !(mu_o > 0.0) || !mu_o.is_finite() {
        return Err(invalid("mu_o must be positive"));
    }
    if grid_size == 0 {
        return Err(invalid("grid size must be positive"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaProbe {
    pub eta: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpDiagnostics {
    pub variables: usize,
    pub constraints: usize,
    pub pivots: usize,
    pub objective: f64,
    /// Largest constraint violation of the raw solver output.
    pub max_violation: f64,
    pub eta_probes: Vec<EtaProbe>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub distribution: DegreeDistribution,
    /// For the general program, design rate over capacity; above one where
    /// the Gaussian mean-LLR model is optimistic.
    pub eta: f64,
    pub beta: f64,
    pub feasible: bool,
    /// β/α for the general program.
    pub design_rate: Option<f64>,
    pub diagnostics: LpDiagnostics,
}

#[derive(Serialize)]
struct DesignReport<'a> {
    eta: f64,
    beta: f64,
    feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    design_rate: Option<f64>,
    distribution: DistributionJson,
    diagnostics: &'a LpDiagnostics,
}

impl DesignResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(DesignReport {
            eta: self.eta,
            beta: self.beta,
            feasible: self.feasible,
            design_rate: self.design_rate,
            distribution: self.distribution.to_json(),
            diagnostics: &self.diagnostics,
        })
        .expect("design report is always serialisable")
    }
}

/// The general program over `ω_1..ω_D`.
pub fn build_general_lp(spec: &DesignSpecGeneral, table: &ExitTable) -> Result<LinearProgram> {
    spec.validate()?;
    let grid = spec.mu_grid()?;
    if table.max_degree() != spec.max_degree {
        return Err(Error::DimensionMismatch(format!(
            "table has D = {}, spec has D = {}",
            table.max_degree(),
            spec.max_degree
        )));
    }
    let same_grid = table.mu_grid().len() == grid.len()
        && table
            .mu_grid()
            .iter()
            .zip(&grid)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs());
    if !same_grid {
        return Err(Error::DimensionMismatch("table grid differs from the spec grid".into()));
    }
    if (table.gamma() - spec.snr).abs() > 1e-12 * spec.snr {
        return Err(Error::DimensionMismatch(format!(
            "table built at SNR {}, spec SNR {}",
            table.gamma(),
            spec.snr
        )));
    }
    let dmax = spec.max_degree as usize;
    let objective = (1..=dmax).map(|d| spec.alpha / d as f64).collect();
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for (j, &mu) in grid.iter().enumerate() {
        let row = (1..=spec.max_degree).map(|d| spec.alpha * table.value(d, j)).collect();
        lp.add_constraint(row, Relation::Ge, mu + STRICTNESS_SLACK);
    }
    lp.add_constraint(vec![1.0; dmax], Relation::Eq, 1.0);
    Ok(lp)
}

/// The low-SNR program over `Ω_1..Ω_D` at efficiency `eta`.
pub fn build_low_snr_lp(spec: &DesignSpecLowSnr, eta: f64, phi_values: &[f64]) -> Result<LinearProgram> {
    spec.validate()?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid(format!("efficiency must lie in (0, 1], got {eta}")));
    }
    let grid = spec.mu_grid()?;
    if phi_values.len() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} phi values for a grid of {}",
            phi_values.len(),
            grid.len()
        )));
    }
    let dmax = spec.max_degree as usize;
    let objective = (1..=dmax).map(|d| d as f64).collect();
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    let scale = 4.0 * std::f64::consts::LN_2;
    for (&mu, &p) in grid.iter().zip(phi_values) {
        let mut row = Vec::with_capacity(dmax);
        let mut power = 1.0;
        for d in 1..=dmax {
            row.push(d as f64 * power);
            power *= p;
        }
        lp.add_constraint(row, Relation::Ge, eta * (mu + spec.epsilon) / scale + STRICTNESS_SLACK);
    }
    lp.add_constraint(vec![1.0; dmax], Relation::Eq, 1.0);
    Ok(lp)
}

/// Largest violation of the low-SNR program at `eta` by `dist`.
pub fn replay_low_snr(spec: &DesignSpecLowSnr, eta: f64, dist: &DegreeDistribution) -> Result<f64> {
    if dist.max_degree() > spec.max_degree {
        return Err(Error::DimensionMismatch(format!(
            "distribution has D = {}, spec has D = {}",
            dist.max_degree(),
            spec.max_degree
        )));
    }
    let phis = exit::phi_grid(&spec.mu_grid()?)?;
    let lp = build_low_snr_lp(spec, eta, &phis)?;
    let mut x = dist.to_dense();
    x.resize(spec.max_degree as usize, 0.0);
    Ok(lp.max_violation(&x))
}

/// Largest feasible `η` on the spec grid, found by bisection over grid
/// indices (feasibility is monotone in `η`).
pub fn optimize_low_snr(spec: &DesignSpecLowSnr) -> Result<DesignResult> {
    spec.validate()?;
    let phis = exit::phi_grid(&spec.mu_grid()?)?;
    let etas = spec.eta_grid();
    let mut probes = Vec::new();
    let mut probe = |i: usize| -> Result<Option<(LinearProgram, LpSolution)>> {
        let lp = build_low_snr_lp(spec, etas[i], &phis)?;
        let sol = lp.solve()?;
        probes.push(EtaProbe {
            eta: etas[i],
            feasible: sol.is_optimal(),
        });
        Ok(sol.is_optimal().then_some((lp, sol)))
    };

    let no_eta = || Error::NoFeasibleEfficiency {
        eta_min: spec.eta_min,
        eta_max: spec.eta_max,
    };
    let last = etas.len() - 1;
    let (best_idx, best) = match probe(last)? {
        Some(found) => (last, found),
        None => {
            let mut lo_found = probe(0)?.ok_or_else(no_eta)?;
            let (mut lo, mut hi) = (0, last);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                match probe(mid)? {
                    Some(found) => {
                        lo = mid;
                        lo_found = found;
                    }
                    None => hi = mid,
                }
            }
            (lo, lo_found)
        }
    };
    let (lp, sol) = best;
    let distribution = node_distribution(&sol.values, spec.max_degree)?;
    Ok(DesignResult {
        beta: distribution.mean_degree(),
        distribution,
        eta: etas[best_idx],
        feasible: true,
        design_rate: None,
        diagnostics: LpDiagnostics {
            variables: lp.num_vars(),
            constraints: lp.num_constraints(),
            pivots: sol.pivots,
            objective: sol.objective,
            max_violation: lp.max_violation(&sol.values),
            eta_probes: probes,
        },
    })
}

/// Solves the general program, building the EXIT table with
/// `spec.exit_method`.
pub fn optimize_general(spec: &DesignSpecGeneral) -> Result<DesignResult> {
    spec.validate()?;
    let grid = spec.mu_grid()?;
    let table = exit::build_exit_table(spec.max_degree, &grid, spec.snr, spec.exit_method)?;
    optimize_general_with_table(spec, &table)
}

pub fn optimize_general_with_table(spec: &DesignSpecGeneral, table: &ExitTable) -> Result<DesignResult> {
    let lp = build_general_lp(spec, table)?;
    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Err(Error::Infeasible);
    }
    let edge = EdgeDistribution::new(
        clean_weights(&sol.values, spec.max_degree)?.entries().iter().copied(),
        spec.max_degree,
    )?;
    let distribution = edge.to_node_perspective();
    let beta = distribution.mean_degree();
    let design_rate = beta / spec.alpha;
    let capacity = exit::capacity(spec.snr, CapacityModel::BiAwgnExact)?;
    Ok(DesignResult {
        distribution,
        eta: design_rate / capacity,
        beta,
        feasible: true,
        design_rate: Some(design_rate),
        diagnostics: LpDiagnostics {
            variables: lp.num_vars(),
            constraints: lp.num_constraints(),
            pivots: sol.pivots,
            objective: sol.objective,
            max_violation: lp.max_violation(&sol.values),
            eta_probes: Vec::new(),
        },
    })
}

/// Solver output to a distribution: round-off negatives dropped and the sum
/// re-anchored to exactly one.
fn clean_weights(values: &[f64], max_degree: u32) -> Result<DegreeDistribution> {
    DegreeDistribution::normalized(
        values.iter().enumerate().map(|(i, &v)| (i as u32 + 1, v)),
        max_degree,
    )
}

fn node_distribution(values: &[f64], max_degree: u32) -> Result<DegreeDistribution> {
    clean_weights(values, max_degree)
}
