//! Brute-force reference: the continuum is replaced by `N` midpoint levels
//! `ω_k = (k−½)Δω` with couplings `f(ω_k)√Δω`, and the resulting
//! `(N+2)×(N+2)` real symmetric matrix is diagonalised densely.
//!
//! Kept deliberately simple (uniform grid, dense solver) so that it shares no
//! numerical machinery with the spectral solution it checks. Recurrences
//! appear at `t ≈ 2π/Δω`; compare only for `t < π/Δω`.

use faer::{Mat, Side};

use crate::error::{Result, ZenoError};
use crate::evolution::SurvivalCurve;
use crate::model::ModelParams;
use crate::zeno::MeasurementSchedule;
use crate::{BareState, ComplexValue};

#[derive(Debug, Clone)]
pub struct DiscretizedModel {
    pub n: usize,
    pub omega_max: f64,
    /// Midpoint energies ω_1..ω_N.
    pub grid: Vec<f64>,
    /// Rows and columns ordered `[A, B, ω_1..ω_N]`.
    pub h: Mat<f64>,
}

impl DiscretizedModel {
    pub fn build(params: &ModelParams, n: usize, omega_max: f64) -> Result<Self> {
        if n < 2 {
            return Err(ZenoError::InvalidParams { name: "n", reason: format!("must be >= 2, got {n}") });
        }
        if !(omega_max > 0.0 && omega_max.is_finite()) {
            return Err(ZenoError::InvalidParams {
                name: "omega_max",
                reason: format!("must be > 0, got {omega_max}"),
            });
        }
        let dw = omega_max / n as f64;
        let grid: Vec<f64> = (1..=n).map(|k| (k as f64 - 0.5) * dw).collect();
        let coupling: Vec<f64> = grid.iter().map(|&w| params.form_factor_unchecked(w) * dw.sqrt()).collect();
        let dim = n + 2;
        let h = Mat::from_fn(dim, dim, |i, j| match (i, j) {
            (0, 0) => params.e_a,
            (1, 1) => params.e_b,
            (0, 1) | (1, 0) => params.coupling,
            (1, k) | (k, 1) if k >= 2 => coupling[k - 2],
            (k, l) if k == l => grid[k - 2],
            _ => 0.0,
        });
        Ok(DiscretizedModel { n, omega_max, grid, h })
    }

    pub fn dim(&self) -> usize {
        self.n + 2
    }

    pub fn spacing(&self) -> f64 {
        self.omega_max / self.n as f64
    }

    /// Times beyond this are contaminated by grid recurrences.
    pub fn revival_horizon(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    pub fn eigen(&self) -> Result<EigenSolution> {
        let evd = self.h.self_adjoint_eigen(Side::Lower).map_err(|e| ZenoError::Eigen(format!("{e:?}")))?;
        let u = evd.U();
        let s = evd.S();
        let dim = self.dim();
        let raw: Vec<f64> = (0..dim).map(|j| s[j]).collect();
        let mut order: Vec<usize> = (0..dim).collect();
        // Ascending energy, ties broken by A weight descending.
        order.sort_by(|&x, &y| {
            raw[x].total_cmp(&raw[y]).then_with(|| (u[(0, y)].powi(2)).total_cmp(&u[(0, x)].powi(2)))
        });
        let vectors = Mat::from_fn(dim, dim, |i, j| u[(i, order[j])]);
        let eigenvalues = order.iter().map(|&j| raw[j]).collect();
        let weights_a = (0..dim).map(|j| vectors[(0, j)].powi(2)).collect();
        let weights_b = (0..dim).map(|j| vectors[(1, j)].powi(2)).collect();
        Ok(EigenSolution { eigenvalues, weights_a, weights_b, vectors })
    }
}

#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub eigenvalues: Vec<f64>,
    pub weights_a: Vec<f64>,
    pub weights_b: Vec<f64>,
    /// Eigenvectors as columns, in the order of `eigenvalues`.
    pub vectors: Mat<f64>,
}

impl EigenSolution {
    pub fn weights(&self, state: BareState) -> &[f64] {
        match state {
            BareState::A => &self.weights_a,
            BareState::B => &self.weights_b,
        }
    }

    /// max |VᵀV − I|.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.vectors.transpose() * &self.vectors;
        let dim = gram.nrows();
        let mut worst = 0.0f64;
        for j in 0..dim {
            for i in 0..dim {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }

    pub fn amplitude(&self, state: BareState, t: f64) -> ComplexValue {
        self.eigenvalues
            .iter()
            .zip(self.weights(state))
            .map(|(&e, &w)| {
                let (s, c) = (e * t).sin_cos();
                ComplexValue::new(w * c, -w * s)
            })
            .sum()
    }

    /// Histogram of `|⟨X|v_j⟩|²` divided by the bin width, over `[lo, hi)`.
    pub fn binned_density(&self, state: BareState, lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64)> {
        let width = (hi - lo) / bins as f64;
        let mut acc = vec![0.0; bins];
        for (&e, &w) in self.eigenvalues.iter().zip(self.weights(state)) {
            if e >= lo && e < hi {
                let k = (((e - lo) / width) as usize).min(bins - 1);
                acc[k] += w;
            }
        }
        acc.iter().enumerate().map(|(k, a)| (lo + (k as f64 + 0.5) * width, a / width)).collect()
    }

    /// Cell edges: midpoints between neighbouring eigenvalues, with the
    /// outer cells mirrored.
    fn cell_edges(&self) -> Vec<f64> {
        let e = &self.eigenvalues;
        let n = e.len();
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(e[0] - 0.5 * (e[1] - e[0]));
        edges.extend(e.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        edges.push(e[n - 1] + 0.5 * (e[n - 1] - e[n - 2]));
        edges
    }

    /// Cumulative weight below `x`, with each eigenvector's weight spread
    /// uniformly over its cell. Piecewise linear, so it converges to the
    /// integrated continuum density instead of carrying O(ρΔω) steps.
    pub fn cumulative_weight(&self, state: BareState, x: f64) -> f64 {
        let edges = self.cell_edges();
        let w = self.weights(state);
        let k = edges.partition_point(|&b| b <= x);
        if k == 0 {
            return 0.0;
        }
        let below: f64 = w[..(k - 1).min(w.len())].iter().sum();
        if k > w.len() {
            return below;
        }
        let frac = (x - edges[k - 1]) / (edges[k] - edges[k - 1]);
        below + frac * w[k - 1]
    }

    /// Largest gap between the cumulative weight functions of two solutions.
    pub fn cumulative_distance(&self, other: &EigenSolution, state: BareState) -> f64 {
        let knots = |sol: &EigenSolution| {
            let w = sol.weights(state);
            let mut acc = 0.0;
            let mut cdf = vec![0.0];
            for wi in w {
                acc += wi;
                cdf.push(acc);
            }
            (sol.cell_edges(), cdf)
        };
        let (ea, ca) = knots(self);
        let (eb, cb) = knots(other);
        let eval = |edges: &[f64], cdf: &[f64], x: f64| {
            let k = edges.partition_point(|&b| b <= x);
            if k == 0 {
                0.0
            } else if k == edges.len() {
                cdf[k - 1]
            } else {
                cdf[k - 1] + (x - edges[k - 1]) / (edges[k] - edges[k - 1]) * (cdf[k] - cdf[k - 1])
            }
        };
        // The difference of two piecewise-linear functions peaks at a knot.
        ea.iter().chain(&eb).map(|&x| (eval(&ea, &ca, x) - eval(&eb, &cb, x)).abs()).fold(0.0, f64::max)
    }
}

/// P(t) = |Σ_j e^{−iE_j t} w_j|², exact for the finite model.
pub fn matrix_survival(solution: &EigenSolution, initial: BareState, times: &[f64]) -> SurvivalCurve {
    let amplitudes = times.iter().map(|&t| solution.amplitude(initial, t)).collect();
    SurvivalCurve::from_amplitudes(initial, times.to_vec(), amplitudes)
}

/// Reset protocol on the full state vector: evolve with `V e^{−iEτ} Vᵀ`,
/// zero every component except the initial one, repeat.
pub fn literal_reset_curve(
    solution: &EigenSolution,
    initial: BareState,
    schedule: MeasurementSchedule,
) -> SurvivalCurve {
    let v = &solution.vectors;
    let dim = v.nrows();
    let x = initial.index();
    let phases: Vec<ComplexValue> = solution
        .eigenvalues
        .iter()
        .map(|&e| {
            let (s, c) = (e * schedule.tau()).sin_cos();
            ComplexValue::new(c, -s)
        })
        .collect();
    let mut psi = vec![ComplexValue::new(0.0, 0.0); dim];
    psi[x] = ComplexValue::new(1.0, 0.0);
    let mut times = vec![0.0];
    let mut amplitudes = vec![psi[x]];
    for k in 1..=schedule.n() {
        // Coefficients in the eigenbasis, evolved.
        let coeff: Vec<ComplexValue> = (0..dim)
            .map(|j| {
                let c: ComplexValue =
                    (0..dim).filter(|&i| psi[i] != ComplexValue::new(0.0, 0.0)).map(|i| psi[i] * v[(i, j)]).sum();
                c * phases[j]
            })
            .collect();
        let evolved: Vec<ComplexValue> = (0..dim).map(|i| (0..dim).map(|j| coeff[j] * v[(i, j)]).sum()).collect();
        // Reset: keep only the initial bare component, un-normalised.
        psi.iter_mut().for_each(|c| *c = ComplexValue::new(0.0, 0.0));
        psi[x] = evolved[x];
        times.push(k as f64 * schedule.tau());
        amplitudes.push(psi[x]);
    }
    SurvivalCurve::from_amplitudes(initial, times, amplitudes)
}

/// A closed-form limit value and whether the parameters are inside the
/// regime where it applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitValue {
    pub value: f64,
    pub in_regime: bool,
}

/// Two-level survival of |A⟩ with the continuum switched off:
/// `1 − Ω²/(Ω²+Δ²)·sin²(√(Ω²+Δ²)·t)`, Δ = (E_B−E_A)/2.
pub fn rabi_closed_form(params: &ModelParams, t: f64) -> LimitValue {
    let delta = 0.5 * (params.e_b - params.e_a);
    let rabi2 = params.coupling.powi(2) + delta * delta;
    let value =
        if rabi2 == 0.0 { 1.0 } else { 1.0 - params.coupling.powi(2) / rabi2 * (rabi2.sqrt() * t).sin().powi(2) };
    LimitValue { value, in_regime: params.sigma == 0.0 }
}

/// Fermi golden-rule decay rate of |B⟩, `2π|f(E_B)|²`. Flagged outside the
/// regime unless `πσ² < μ/10`.
pub fn golden_rule_rate(params: &ModelParams) -> LimitValue {
    let g = if params.e_b > 0.0 { params.coupling_density(params.e_b) } else { 0.0 };
    LimitValue {
        value: 2.0 * std::f64::consts::PI * g,
        in_regime: std::f64::consts::PI * params.sigma.powi(2) < 0.1 * params.mu && params.e_b > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_block() {
        let p = ModelParams { sigma: 0.0, ..ModelParams::paper() };
        let m = DiscretizedModel::build(&p, 2, 10.0).unwrap();
        let sol = m.eigen().unwrap();
        let mean = 0.5 * (p.e_a + p.e_b);
        let split = (0.25 * (p.e_a - p.e_b).powi(2) + p.coupling.powi(2)).sqrt();
        let mut found: Vec<f64> = sol.eigenvalues.iter().copied().filter(|e| (e - mean).abs() < 0.2).collect();
        found.sort_by(f64::total_cmp);
        assert_eq!(found.len(), 2);
        assert!((found[0] - (mean - split)).abs() < 1e-14);
        assert!((found[1] - (mean + split)).abs() < 1e-14);
    }

    #[test]
    fn decoupled_a_is_an_eigenvalue() {
        let p = ModelParams { coupling: 0.0, ..ModelParams::paper() };
        let sol = DiscretizedModel::build(&p, 50, 10.0).unwrap().eigen().unwrap();
        let j = sol.weights_a.iter().position(|&w| w > 0.5).unwrap();
        assert!((sol.eigenvalues[j] - p.e_a).abs() < 1e-13);
        assert!((sol.weights_a[j] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn matrix_is_symmetric() {
        let m = DiscretizedModel::build(&ModelParams::paper(), 30, 10.0).unwrap();
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                assert_eq!(m.h[(i, j)], m.h[(j, i)]);
            }
        }
        assert!(DiscretizedModel::build(&ModelParams::paper(), 1, 10.0).is_err());
    }

    #[test]
    fn small_model_survival_properties() {
        let sol = DiscretizedModel::build(&ModelParams::paper(), 200, 10.0).unwrap().eigen().unwrap();
        let c = matrix_survival(&sol, BareState::A, &[0.0, 1.0, 5.0]);
        assert!((c.probabilities[0] - 1.0).abs() < 1e-13);
        let fwd = sol.amplitude(BareState::B, 3.0);
        let back = sol.amplitude(BareState::B, -3.0);
        assert!((fwd.conj() - back).norm() < 1e-13);
        let sa: f64 = sol.weights_a.iter().sum();
        assert!((sa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rabi_values() {
        let p = ModelParams { sigma: 0.0, ..ModelParams::paper() };
        assert_eq!(rabi_closed_form(&p, 0.0).value, 1.0);
        let q = ModelParams { e_b: p.e_a, ..p };
        let half_period = std::f64::consts::PI / (2.0 * q.coupling);
        assert!(rabi_closed_form(&q, half_period).value.abs() < 1e-15);
        assert!(!rabi_closed_form(&ModelParams::paper(), 1.0).in_regime);
    }

    #[test]
    fn golden_rule_value() {
        let r = golden_rule_rate(&ModelParams::paper());
        let expect = 2.0 * std::f64::consts::PI * (0.11f64 * 2.10f64.sqrt()).powi(2);
        assert!((r.value - expect).abs() < 1e-15);
        assert!((r.value - 0.160).abs() < 1e-3);
    }
}
