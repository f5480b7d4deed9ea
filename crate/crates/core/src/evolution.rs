//! Survival amplitudes of the bare states,
//!
//! ```text
//! 𝒜_X(t) = ∫₀^{ω_max} e^{−iλt} |μ^X_λ|² dλ + Σ_j e^{−iΛ_j t} |μ^X(Λ_j)|²,
//! ```
//!
//! evaluated on a [`SpectralGrid`]: the density is sampled once on
//! Gauss–Legendre panels that resolve both its resonances and the oscillation
//! `e^{−iλt}` up to the largest requested time, then reused for every `t`.

use rayon::prelude::*;

use crate::error::{Result, ZenoError};
use crate::fit::fit_line;
use crate::model::ModelParams;
use crate::quad::{Adaptive, GaussLegendre};
use crate::spectral::{densities, density_breakpoints, discrete_levels};
use crate::{BareState, ComplexValue};

/// Gauss–Legendre order of every panel.
pub const PANEL_ORDER: usize = 16;
/// Minimum number of nodes per oscillation period 2π/t.
pub const NODES_PER_PERIOD: f64 = 10.0;

/// Sampled survival of one bare state.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    pub initial: BareState,
    pub times: Vec<f64>,
    pub amplitudes: Vec<ComplexValue>,
    pub probabilities: Vec<f64>,
}

impl SurvivalCurve {
    pub fn from_amplitudes(initial: BareState, times: Vec<f64>, amplitudes: Vec<ComplexValue>) -> Self {
        let probabilities = amplitudes.iter().map(|a| a.norm_sqr()).collect();
        SurvivalCurve { initial, times, amplitudes, probabilities }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Quadrature nodes with density-weighted weights for one bare state, plus
/// the discrete part of its spectral measure. Immutable once built.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    initial: BareState,
    t_max: f64,
    panels: Vec<(f64, f64)>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    levels: Vec<(f64, f64)>,
}

impl SpectralGrid {
    /// Builds a grid able to evaluate the amplitude for `|t| <= t_max`.
    pub fn build(params: &ModelParams, initial: BareState, t_max: f64) -> Result<Self> {
        params.validate()?;
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(ZenoError::Domain {
                op: "SpectralGrid::build",
                value: t_max,
                reason: "t_max must be finite and >= 0",
            });
        }
        let levels =
            discrete_levels(params)?.iter().map(|l| (l.energy, l.weight(initial))).filter(|&(_, w)| w > 0.0).collect();
        let mut panels = Vec::new();
        let coupled = params.sigma > 0.0 && !(initial == BareState::A && params.coupling == 0.0);
        if coupled {
            let q = Adaptive { abs_tol: params.eps_tol, rel_tol: 1e-12, max_intervals: 20_000 };
            let (r, parts) = q.partition(
                |l| densities(params, l).map(|d| d.of(initial)).unwrap_or(f64::NAN),
                &density_breakpoints(params),
            );
            if !r.value.is_finite() {
                return Err(ZenoError::NonFinite("spectral density"));
            }
            if !r.converged {
                return Err(ZenoError::Quadrature { op: "spectral density partition", error: r.error });
            }
            let h_max = if t_max > 0.0 {
                PANEL_ORDER as f64 / NODES_PER_PERIOD * 2.0 * std::f64::consts::PI / t_max
            } else {
                f64::INFINITY
            };
            let needed: f64 =
                parts.iter().map(|(a, b)| ((b - a) / h_max).ceil().max(1.0)).sum::<f64>() * PANEL_ORDER as f64;
            if needed > params.node_budget as f64 {
                return Err(ZenoError::ResolutionBudget {
                    t: t_max,
                    needed: needed as usize,
                    budget: params.node_budget,
                });
            }
            for (a, b) in parts {
                let pieces = ((b - a) / h_max).ceil().max(1.0) as usize;
                let h = (b - a) / pieces as f64;
                panels.extend(
                    (0..pieces).map(|k| (a + k as f64 * h, if k + 1 == pieces { b } else { a + (k + 1) as f64 * h })),
                );
            }
        }
        Self::from_panels(params, initial, t_max, panels, levels)
    }

    fn from_panels(
        params: &ModelParams,
        initial: BareState,
        t_max: f64,
        panels: Vec<(f64, f64)>,
        levels: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let gl = GaussLegendre::new(PANEL_ORDER);
        let (nodes, qw): (Vec<f64>, Vec<f64>) = panels.iter().flat_map(|&(a, b)| gl.on(a, b)).unzip();
        let rho: Vec<f64> =
            nodes.par_iter().map(|&l| densities(params, l).map(|d| d.of(initial))).collect::<Result<_>>()?;
        let weights = qw.iter().zip(&rho).map(|(w, r)| w * r).collect();
        Ok(SpectralGrid { initial, t_max, panels, nodes, weights, levels })
    }

    /// The same grid with every panel split into `factor` equal pieces.
    pub fn refined(&self, params: &ModelParams, factor: usize) -> Result<Self> {
        let factor = factor.max(1);
        let panels = self
            .panels
            .iter()
            .flat_map(|&(a, b)| {
                let h = (b - a) / factor as f64;
                (0..factor).map(move |k| (a + k as f64 * h, if k + 1 == factor { b } else { a + (k + 1) as f64 * h }))
            })
            .collect();
        Self::from_panels(params, self.initial, self.t_max, panels, self.levels.clone())
    }

    pub fn initial(&self) -> BareState {
        self.initial
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Discrete levels as (energy, weight) pairs.
    pub fn levels(&self) -> &[(f64, f64)] {
        &self.levels
    }

    fn all_terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied()).chain(self.levels.iter().copied())
    }

    /// Total spectral weight: the closure sum, ideally 1.
    pub fn mass(&self) -> f64 {
        self.all_terms().map(|(_, w)| w).sum()
    }

    /// ⟨X|H|X⟩.
    pub fn mean_energy(&self) -> f64 {
        self.all_terms().map(|(l, w)| l * w).sum::<f64>() / self.mass()
    }

    /// ⟨X|H²|X⟩ − ⟨X|H|X⟩².
    pub fn energy_variance(&self) -> f64 {
        let m = self.mean_energy();
        self.all_terms().map(|(l, w)| w * (l - m) * (l - m)).sum::<f64>() / self.mass()
    }

    /// Amplitude at any real `t` with `|t| <= t_max`; negative times are
    /// allowed for symmetry checks.
    pub fn amplitude(&self, t: f64) -> Result<ComplexValue> {
        if !(t.abs() <= self.t_max * (1.0 + 1e-12)) {
            return Err(ZenoError::Domain {
                op: "SpectralGrid::amplitude",
                value: t,
                reason: "|t| exceeds the grid's t_max",
            });
        }
        let sum = self
            .all_terms()
            .map(|(l, w)| {
                let (s, c) = (l * t).sin_cos();
                ComplexValue::new(w * c, -w * s)
            })
            .sum();
        Ok(sum)
    }

    pub fn probability(&self, t: f64) -> Result<f64> {
        self.amplitude(t).map(|a| a.norm_sqr())
    }

    /// 1 − P(t)/M² with M the total weight, computed without cancellation so
    /// that it stays accurate when it is far below the quadrature error of P.
    pub fn deficit(&self, t: f64) -> Result<f64> {
        if !(t.abs() <= self.t_max * (1.0 + 1e-12)) {
            return Err(ZenoError::Domain {
                op: "SpectralGrid::deficit",
                value: t,
                reason: "|t| exceeds the grid's t_max",
            });
        }
        let m = self.mass();
        let e = self.mean_energy();
        let (mut d, mut s) = (0.0, 0.0);
        for (l, w) in self.all_terms() {
            let x = (l - e) * t;
            let h = (0.5 * x).sin();
            d += 2.0 * w * h * h;
            s += w * x.sin();
        }
        Ok((2.0 * m * d - d * d - s * s) / (m * m))
    }

    pub fn curve(&self, times: &[f64]) -> Result<SurvivalCurve> {
        let amplitudes = times.par_iter().map(|&t| self.amplitude(t)).collect::<Result<Vec<_>>>()?;
        Ok(SurvivalCurve::from_amplitudes(self.initial, times.to_vec(), amplitudes))
    }
}

/// 𝒜_X(t) for a single `t >= 0`.
pub fn survival_amplitude(params: &ModelParams, initial: BareState, t: f64) -> Result<ComplexValue> {
    if !(t >= 0.0) {
        return Err(ZenoError::Domain { op: "survival_amplitude", value: t, reason: "t must be >= 0" });
    }
    SpectralGrid::build(params, initial, t)?.amplitude(t)
}

/// Survival curve on ascending non-negative `times`, sharing one grid.
pub fn survival_curve(params: &ModelParams, initial: BareState, times: &[f64]) -> Result<SurvivalCurve> {
    check_times(times)?;
    let t_max = times.last().copied().unwrap_or(0.0);
    SpectralGrid::build(params, initial, t_max)?.curve(times)
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if let Some(&t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(ZenoError::Domain { op: "survival_curve", value: t, reason: "times must be finite and >= 0" });
    }
    if let Some(w) = times.windows(2).find(|w| w[1] < w[0]) {
        return Err(ZenoError::Domain { op: "survival_curve", value: w[1], reason: "times must be ascending" });
    }
    Ok(())
}

/// Window of the short-time power-law fit.
pub const SHORT_TIME_WINDOW: (f64, f64) = (1e-3, 1e-2);

/// Exponent p of `1 − P(t) ≈ c·t^p` fitted on [`SHORT_TIME_WINDOW`].
pub fn short_time_exponent(params: &ModelParams, initial: BareState) -> Result<f64> {
    let (mut lo, hi) = SHORT_TIME_WINDOW;
    let grid = SpectralGrid::build(params, initial, hi)?;
    loop {
        let ts: Vec<f64> = (0..16).map(|k| lo * (hi / lo).powf(k as f64 / 15.0)).collect();
        let ds = ts.iter().map(|&t| grid.deficit(t)).collect::<Result<Vec<_>>>()?;
        if ds.iter().all(|&d| d > 0.0) {
            let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
            let ys: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
            return Ok(fit_line(&xs, &ys)?.slope);
        }
        lo *= 2.0;
        if lo >= hi / 2.0 {
            return Err(ZenoError::Fit("1 - P(t) is not positive anywhere in the short-time window".into()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_amplitude_at_zero() {
        let p = ModelParams::paper();
        let a = survival_amplitude(&p, BareState::A, 0.0).unwrap();
        assert!((a.re - 1.0).abs() < 1e-7 && a.im.abs() < 1e-12);
    }

    #[test]
    fn negative_time_is_rejected() {
        assert!(survival_amplitude(&ModelParams::paper(), BareState::A, -1.0).is_err());
        assert!(survival_curve(&ModelParams::paper(), BareState::A, &[0.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let p = ModelParams { node_budget: 2_000, ..ModelParams::paper() };
        let err = survival_amplitude(&p, BareState::B, 500.0).unwrap_err();
        assert!(matches!(err, ZenoError::ResolutionBudget { .. }), "{err}");
    }

    #[test]
    fn time_reversal() {
        let grid = SpectralGrid::build(&ModelParams::paper(), BareState::A, 20.0).unwrap();
        for &t in &[0.5, 3.0, 17.0] {
            let fwd = grid.amplitude(t).unwrap();
            let back = grid.amplitude(-t).unwrap();
            assert!((fwd.conj() - back).norm() < 1e-14);
        }
    }

    #[test]
    fn variance_of_a_is_coupling_squared() {
        let p = ModelParams::paper();
        let grid = SpectralGrid::build(&p, BareState::A, 1.0).unwrap();
        assert!((grid.energy_variance() - p.coupling.powi(2)).abs() < 1e-9, "{}", grid.energy_variance());
        assert!((grid.mean_energy() - p.e_a).abs() < 1e-8);
    }

    #[test]
    fn rabi_limit_without_continuum() {
        let p = ModelParams { sigma: 0.0, ..ModelParams::paper() };
        let delta = 0.5 * (p.e_b - p.e_a);
        let rabi2 = p.coupling.powi(2) + delta * delta;
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 2.0).collect();
        let curve = survival_curve(&p, BareState::A, &times).unwrap();
        for (t, prob) in times.iter().zip(&curve.probabilities) {
            let expect = 1.0 - p.coupling.powi(2) / rabi2 * (rabi2.sqrt() * t).sin().powi(2);
            assert!((prob - expect).abs() < 1e-13);
        }
    }
}
