//! Repeated instantaneous measurements of the initial bare state.
//!
//! Every `τ` the evolved state is projected back onto the initial bare state:
//! the other components are set to zero and the remaining amplitude is kept
//! un-normalised. By linearity the state after `k` resets is `𝒜(τ)^k |X⟩`, so
//! the effective curve with the interruption periods removed passes through
//! `(kτ, P(τ)^k)`.

use rayon::prelude::*;

use crate::error::{Result, ZenoError};
use crate::evolution::{check_times, SpectralGrid, SurvivalCurve};
use crate::model::ModelParams;
use crate::{BareState, ComplexValue};

/// Probability difference at the horizon below which a verdict is neutral.
pub const MARGIN_THRESHOLD: f64 = 1e-3;
/// Horizon multiple of the unmeasured 1/e time.
pub const HORIZON_FACTOR: f64 = 3.0;
/// Relative deviation from `1 − P ≈ ΔH²t²` that ends the short-time region.
pub const SHORT_TIME_DEVIATION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSchedule {
    tau: f64,
    n: usize,
}

impl MeasurementSchedule {
    pub fn new(tau: f64, n: usize) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(ZenoError::Schedule(format!("tau must be finite and > 0, got {tau}")));
        }
        if n == 0 {
            return Err(ZenoError::Schedule("n must be >= 1".into()));
        }
        Ok(MeasurementSchedule { tau, n })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> f64 {
        self.n as f64 * self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Zeno,
    AntiZeno,
    Neutral,
}

impl Classification {
    pub fn from_margin(margin: f64) -> Self {
        if margin > MARGIN_THRESHOLD {
            Classification::Zeno
        } else if margin < -MARGIN_THRESHOLD {
            Classification::AntiZeno
        } else {
            Classification::Neutral
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Zeno => "zeno",
            Classification::AntiZeno => "anti-zeno",
            Classification::Neutral => "neutral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZenoVerdict {
    pub tau: f64,
    /// Number of intervals, `floor(T/τ)`.
    pub n: usize,
    /// Comparison time `n·τ`.
    pub horizon: f64,
    pub p_measured: f64,
    pub p_unmeasured: f64,
    pub gamma_eff: f64,
    /// `p_measured − p_unmeasured`.
    pub margin: f64,
    pub classification: Classification,
}

/// Effective curve sampled at the reset instants `kτ`, `k = 0..=n`.
///
/// Implements the reset procedure step by step: the post-reset state `c|X⟩`
/// is evolved for `τ` and its `X` component becomes the next `c`.
pub fn interrupted_curve(
    params: &ModelParams,
    initial: BareState,
    schedule: MeasurementSchedule,
) -> Result<SurvivalCurve> {
    let grid = SpectralGrid::build(params, initial, schedule.tau)?;
    interrupted_on_grid(&grid, schedule)
}

pub fn interrupted_on_grid(grid: &SpectralGrid, schedule: MeasurementSchedule) -> Result<SurvivalCurve> {
    let mut c = ComplexValue::new(1.0, 0.0);
    let mut times = Vec::with_capacity(schedule.n + 1);
    let mut amplitudes = Vec::with_capacity(schedule.n + 1);
    times.push(0.0);
    amplitudes.push(c);
    for k in 1..=schedule.n {
        // Evolve c|X⟩ for τ and keep only the X component.
        c *= grid.amplitude(schedule.tau)?;
        times.push(k as f64 * schedule.tau);
        amplitudes.push(c);
    }
    Ok(SurvivalCurve::from_amplitudes(grid.initial(), times, amplitudes))
}

/// `P(τ)^n`, the closed form the reset iteration must reproduce.
pub fn interrupted_power(grid: &SpectralGrid, schedule: MeasurementSchedule) -> Result<f64> {
    Ok(grid.probability(schedule.tau)?.powi(schedule.n as i32))
}

/// Measured survival at arbitrary `t`: `P(τ)^k · P(t − kτ)` with `k = ⌊t/τ⌋`.
pub fn measured_probability(grid: &SpectralGrid, tau: f64, t: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(ZenoError::Schedule(format!("tau must be > 0, got {tau}")));
    }
    let k = (t / tau + 1e-12).floor();
    let rest = (t - k * tau).max(0.0);
    Ok(grid.probability(tau)?.powi(k as i32) * grid.probability(rest)?)
}

/// Γ_eff(τ) = −ln P(τ)/τ. Uses the cancellation-free deficit `1 − P` so the
/// rate stays meaningful as τ → 0.
pub fn effective_rate(params: &ModelParams, initial: BareState, tau: f64) -> Result<f64> {
    let grid = SpectralGrid::build(params, initial, tau)?;
    effective_rate_on_grid(&grid, tau)
}

pub fn effective_rate_on_grid(grid: &SpectralGrid, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(ZenoError::Schedule(format!("tau must be > 0, got {tau}")));
    }
    let p = normalised_probability(grid, tau)?;
    if !(p > 0.0) {
        return Err(ZenoError::NonPositiveSurvival { tau, p });
    }
    let deficit = grid.deficit(tau)?;
    let log_p = if deficit < 0.5 { (-deficit).ln_1p() } else { p.ln() };
    Ok(-log_p / tau)
}

// P(t) divided by the squared total spectral weight.
fn normalised_probability(grid: &SpectralGrid, t: f64) -> Result<f64> {
    let m = grid.mass();
    Ok(grid.probability(t)? / (m * m))
}

/// First time the unmeasured survival drops below 1/e.
pub fn one_over_e_time(params: &ModelParams, initial: BareState) -> Result<f64> {
    let target = (-1.0f64).exp();
    let mut t_hi = 16.0;
    loop {
        let grid = SpectralGrid::build(params, initial, t_hi)?;
        let steps = 800;
        let mut prev = 0.0;
        for k in 1..=steps {
            let t = t_hi * k as f64 / steps as f64;
            if normalised_probability(&grid, t)? < target {
                let (mut a, mut b) = (prev, t);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if normalised_probability(&grid, m)? < target {
                        b = m;
                    } else {
                        a = m;
                    }
                    if b - a < 1e-10 * b {
                        break;
                    }
                }
                return Ok(0.5 * (a + b));
            }
            prev = t;
        }
        t_hi *= 4.0;
        if t_hi > 1e5 {
            return Err(ZenoError::Fit(format!("survival of {initial} never drops below 1/e before t = 1e5")));
        }
    }
}

/// Default comparison horizon: [`HORIZON_FACTOR`] × the unmeasured 1/e time.
pub fn default_horizon(params: &ModelParams, initial: BareState) -> Result<f64> {
    Ok(HORIZON_FACTOR * one_over_e_time(params, initial)?)
}

/// Compares `P(τ)^n` with the unmeasured `P(nτ)`, `n = ⌊T/τ⌋`, for every τ.
/// Intervals longer than the horizon get no verdict.
pub fn tau_scan(params: &ModelParams, initial: BareState, taus: &[f64], horizon: f64) -> Result<Vec<ZenoVerdict>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(ZenoError::Schedule(format!("horizon must be finite and > 0, got {horizon}")));
    }
    check_times(taus)?;
    if taus.iter().any(|&t| t <= 0.0) {
        return Err(ZenoError::Schedule("tau grid must be strictly positive".into()));
    }
    let grid = SpectralGrid::build(params, initial, horizon)?;
    scan_on_grid(&grid, taus, horizon)
}

pub fn scan_on_grid(grid: &SpectralGrid, taus: &[f64], horizon: f64) -> Result<Vec<ZenoVerdict>> {
    let verdicts: Vec<Option<ZenoVerdict>> = taus
        .par_iter()
        .map(|&tau| {
            let n = (horizon / tau * (1.0 + 1e-12)).floor() as usize;
            if n == 0 {
                return Ok(None);
            }
            let at = (n as f64 * tau).min(grid.t_max());
            let p_measured = normalised_probability(grid, tau)?.powi(n as i32);
            let p_unmeasured = normalised_probability(grid, at)?;
            let margin = p_measured - p_unmeasured;
            Ok(Some(ZenoVerdict {
                tau,
                n,
                horizon: at,
                p_measured,
                p_unmeasured,
                gamma_eff: effective_rate_on_grid(grid, tau)?,
                margin,
                classification: Classification::from_margin(margin),
            }))
        })
        .collect::<Result<_>>()?;
    Ok(verdicts.into_iter().flatten().collect())
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count).map(|k| lo * (hi / lo).powf(k as f64 / (count - 1) as f64)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inflection {
    At(f64),
    None,
}

/// End of the short-time region: the first time `1 − P(t)` departs from
/// `ΔH²t²` by more than [`SHORT_TIME_DEVIATION`] relative.
pub fn short_time_region_end(grid: &SpectralGrid, t_max: f64) -> Result<f64> {
    let var = grid.energy_variance();
    let steps = 4000;
    for k in 1..=steps {
        let t = t_max * k as f64 / steps as f64;
        let quad = var * t * t;
        if (grid.deficit(t)? - quad).abs() > SHORT_TIME_DEVIATION * quad {
            return Ok(t);
        }
    }
    Ok(t_max)
}

/// Step of the dense grid used for second differences.
pub const INFLECTION_STEP: f64 = 0.02;

/// First sign change of the second difference of P(t) inside `window`,
/// beyond the short-time region. The crossing is located by linear
/// interpolation of the second difference.
pub fn find_inflection(params: &ModelParams, initial: BareState, window: (f64, f64)) -> Result<Inflection> {
    let (lo, hi) = window;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(ZenoError::Domain { op: "find_inflection", value: hi, reason: "window must satisfy 0 <= lo < hi" });
    }
    let grid = SpectralGrid::build(params, initial, hi + INFLECTION_STEP)?;
    let start = lo.max(short_time_region_end(&grid, hi)?);
    inflection_in(|t| grid.probability(t), start, hi, INFLECTION_STEP)
}

/// Sign change of the second difference of `p` on `[lo, hi]` with step `h`.
pub fn inflection_in<F: Fn(f64) -> Result<f64>>(p: F, lo: f64, hi: f64, h: f64) -> Result<Inflection> {
    let steps = ((hi - lo) / h).ceil() as usize;
    if steps < 2 {
        return Ok(Inflection::None);
    }
    let h = (hi - lo) / steps as f64;
    let values: Vec<f64> = (0..=steps).map(|k| p(lo + k as f64 * h)).collect::<Result<_>>()?;
    let second: Vec<f64> = values.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
    for (k, pair) in second.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if a != 0.0 && b != 0.0 && a.signum() != b.signum() {
            // second[k] is centred on lo + (k + 1) h.
            let t0 = lo + (k + 1) as f64 * h;
            return Ok(Inflection::At(t0 + h * a / (a - b)));
        }
    }
    Ok(Inflection::None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_validation() {
        assert!(MeasurementSchedule::new(0.0, 3).is_err());
        assert!(MeasurementSchedule::new(1.0, 0).is_err());
        assert_eq!(MeasurementSchedule::new(0.5, 4).unwrap().total(), 2.0);
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(Classification::from_margin(2e-3), Classification::Zeno);
        assert_eq!(Classification::from_margin(-2e-3), Classification::AntiZeno);
        assert_eq!(Classification::from_margin(5e-4), Classification::Neutral);
        assert_eq!(Classification::from_margin(-1e-3), Classification::Neutral);
    }

    #[test]
    fn first_point_is_one() {
        let s = MeasurementSchedule::new(0.5, 3).unwrap();
        let c = interrupted_curve(&ModelParams::paper(), BareState::A, s).unwrap();
        assert_eq!(c.probabilities[0], 1.0);
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn pure_exponential_has_no_inflection() {
        let r = inflection_in(|t| Ok((-0.3 * t).exp()), 0.0, 50.0, 0.02).unwrap();
        assert_eq!(r, Inflection::None);
    }

    #[test]
    fn logistic_inflection_is_located() {
        // 1 − tanh-like step with inflection at t = 7.
        let r = inflection_in(|t| Ok(1.0 / (1.0 + (0.8 * (t - 7.0)).exp())), 0.0, 20.0, 0.02).unwrap();
        match r {
            Inflection::At(t) => assert!((t - 7.0).abs() < 1e-3, "{t}"),
            Inflection::None => panic!("missed"),
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-2, 20.0, 50);
        assert_eq!(g.len(), 50);
        assert!((g[0] - 1e-2).abs() < 1e-18 && (g[49] - 20.0).abs() < 1e-12);
    }

    #[test]
    fn zeno_limit_rate_vanishes() {
        let p = ModelParams::paper();
        let rates: Vec<f64> =
            log_grid(1e-3, 0.1, 8).iter().map(|&t| effective_rate(&p, BareState::A, t).unwrap()).collect();
        for w in rates.windows(2) {
            assert!(w[0] < w[1], "{rates:?}");
        }
        // Γ_eff ≈ Ω²τ for small τ.
        assert!((rates[0] / (p.coupling.powi(2) * 1e-3) - 1.0).abs() < 1e-3, "{}", rates[0]);
    }
}
