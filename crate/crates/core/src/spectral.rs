//! Physical eigenstates of H expressed in the bare basis.
//!
//! Continuum eigenstates |ψ_λ⟩ (0 < λ < ω_max) have bare components
//!
//! ```text
//! μ^B_λ = f(λ)/β⁺(λ),   μ^A_λ = μ^B_λ · Ω/(λ−E_A)
//! ```
//!
//! and the continuum–continuum component is `f(λ)f(ω)/(β⁺(λ)(λ−ω+i0)) + δ(λ−ω)`.
//! That last component carries a δ-function and is never materialised; the
//! closure and cross sums below are its executable consequence.
//!
//! Every density here is evaluated through `D(λ) = (λ−E_A)β⁺(λ)`, which never
//! divides by `λ−E_A`, so densities are finite and continuous at λ = E_A.

use crate::error::{Result, ZenoError};
use crate::model::{ModelParams, LAMBDA_MIN};
use crate::quad::Adaptive;
use crate::{BareState, ComplexValue};

/// Bare components of the continuum eigenstate at energy λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumAmplitudes {
    pub lambda: f64,
    pub mu_a: ComplexValue,
    pub mu_b: ComplexValue,
}

/// |μ^A|², |μ^B|² and the (real) overlap density μ^A*·μ^B at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Densities {
    pub a: f64,
    pub b: f64,
    pub cross: f64,
}

impl Densities {
    pub fn of(&self, state: BareState) -> f64 {
        match state {
            BareState::A => self.a,
            BareState::B => self.b,
        }
    }
}

/// A real zero of β below threshold together with its normalised bare
/// components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    pub lambda: f64,
    /// 1/√β′(Λ).
    pub norm: f64,
    pub mu_a: f64,
    pub mu_b: f64,
    /// |β(Λ)| after polishing.
    pub residual: f64,
}

/// Weak-coupling estimate of a complex resonance pole `center − i·width`.
/// Always approximate: the exact pole lives on the second sheet of β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleEstimate {
    pub center: f64,
    pub width: f64,
}

impl PoleEstimate {
    /// The decaying pole, with negative imaginary part.
    pub fn pole(&self) -> ComplexValue {
        ComplexValue::new(self.center, -self.width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelKind {
    /// Real zero of β below threshold.
    Bound,
    /// |A⟩ itself when Ω = 0.
    DecoupledA,
    /// Level of the A–B block when σ = 0 (no continuum coupling), at any energy.
    Embedded,
}

/// A normalisable eigenstate of H: one term of the discrete part of the
/// completeness relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteLevel {
    pub energy: f64,
    pub mu_a: f64,
    pub mu_b: f64,
    pub kind: LevelKind,
}

impl DiscreteLevel {
    pub fn weight(&self, state: BareState) -> f64 {
        match state {
            BareState::A => self.mu_a * self.mu_a,
            BareState::B => self.mu_b * self.mu_b,
        }
    }
}

fn check_continuum(op: &'static str, params: &ModelParams, lambda: f64) -> Result<()> {
    if lambda >= LAMBDA_MIN && lambda < params.omega_max {
        Ok(())
    } else {
        Err(ZenoError::Domain { op, value: lambda, reason: "lambda must lie in [1e-8, omega_max)" })
    }
}

/// All three continuum densities from a single principal-value evaluation.
pub fn densities(params: &ModelParams, lambda: f64) -> Result<Densities> {
    check_continuum("densities", params, lambda)?;
    let g = params.coupling_density(lambda);
    if g == 0.0 {
        return Ok(Densities { a: 0.0, b: 0.0, cross: 0.0 });
    }
    if params.coupling == 0.0 {
        let b = params.beta_plus(lambda)?;
        return Ok(Densities { a: 0.0, b: g / b.norm_sqr(), cross: 0.0 });
    }
    let d = params.beta_plus_times_detuning(lambda)?;
    let scale = g / d.norm_sqr();
    let det = lambda - params.e_a;
    let out = Densities {
        a: scale * params.coupling * params.coupling,
        b: scale * det * det,
        cross: scale * params.coupling * det,
    };
    if out.a.is_finite() && out.b.is_finite() && out.cross.is_finite() {
        Ok(out)
    } else {
        Err(ZenoError::NonFinite("densities"))
    }
}

/// |μ^A_λ|² = |f|²Ω² / |(λ−E_A)β⁺(λ)|².
pub fn density_a(params: &ModelParams, lambda: f64) -> Result<f64> {
    densities(params, lambda).map(|d| d.a)
}

/// |μ^B_λ|² = |f|²/|β⁺(λ)|².
pub fn density_b(params: &ModelParams, lambda: f64) -> Result<f64> {
    densities(params, lambda).map(|d| d.b)
}

pub fn continuum_amplitudes(params: &ModelParams, lambda: f64) -> Result<ContinuumAmplitudes> {
    check_continuum("continuum_amplitudes", params, lambda)?;
    let f = params.form_factor_unchecked(lambda);
    if f == 0.0 {
        let zero = ComplexValue::new(0.0, 0.0);
        return Ok(ContinuumAmplitudes { lambda, mu_a: zero, mu_b: zero });
    }
    if params.coupling == 0.0 {
        let mu_b = ComplexValue::new(f, 0.0) / params.beta_plus(lambda)?;
        return Ok(ContinuumAmplitudes { lambda, mu_a: ComplexValue::new(0.0, 0.0), mu_b });
    }
    let d = params.beta_plus_times_detuning(lambda)?;
    Ok(ContinuumAmplitudes {
        lambda,
        mu_a: ComplexValue::new(f * params.coupling, 0.0) / d,
        mu_b: ComplexValue::new(f * (lambda - params.e_a), 0.0) / d,
    })
}

/// Default lower end of the bound-state search.
pub const ROOT_SEARCH_MIN: f64 = -50.0;
const ROOT_SEARCH_MAX: f64 = -1e-6;
const ROOT_GRID: usize = 400;

/// All real zeros of β on (λ_min, 0), each normalised by 1/√β′(Λ).
///
/// β is strictly increasing between its poles (β′ ≥ 1), so a root shows up as
/// a −→+ sign change on the bracketing grid while the pole at E_A shows up as
/// +→−. Brackets are polished by safeguarded Newton iteration.
///
/// When Ω = 0 the decoupled |A⟩ is not a zero of β and is not reported here;
/// see [`discrete_levels`].
pub fn find_bound_states(params: &ModelParams) -> Result<Vec<BoundState>> {
    params.validate()?;
    let pole = (params.coupling != 0.0).then_some(params.e_a);

    // β(λ) → λ as λ → −∞, so the lower end must see a negative β.
    let mut lambda_min = ROOT_SEARCH_MIN.min(2.0 * params.e_a.min(params.e_b) - 1.0);
    let mut widenings = 0;
    loop {
        if pole == Some(lambda_min) {
            lambda_min *= 1.0 + 1e-9;
        }
        let b = params.beta_real(lambda_min)?;
        if b < 0.0 {
            break;
        }
        widenings += 1;
        if widenings > 12 {
            return Err(ZenoError::RootSearch(format!("beta({lambda_min}) = {b} is not negative; no lower bracket")));
        }
        lambda_min *= 2.0;
    }

    // Ascending log-spaced grid from lambda_min to -1e-6, with the pole spliced in.
    let (hi, lo) = ((-lambda_min).log10(), (-ROOT_SEARCH_MAX).log10());
    let mut grid: Vec<f64> = (0..ROOT_GRID)
        .map(|k| -(10f64.powf(hi + (lo - hi) * k as f64 / (ROOT_GRID - 1) as f64)))
        .filter(|&l| Some(l) != pole)
        .collect();
    grid.push(-1e-13);

    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut exact: Vec<f64> = Vec::new();
    let values: Vec<f64> = grid.iter().map(|&l| params.beta_real(l)).collect::<Result<_>>()?;
    for k in 0..grid.len() - 1 {
        let (a, b) = (grid[k], grid[k + 1]);
        let (fa, fb) = (values[k], values[k + 1]);
        if fa == 0.0 {
            exact.push(a);
            continue;
        }
        match pole.filter(|&e| a < e && e < b) {
            Some(e) => {
                // β → +∞ at e⁻ and −∞ at e⁺.
                if fa < 0.0 {
                    brackets.push((a, approach_pole(params, a, e)?));
                }
                if fb > 0.0 {
                    brackets.push((approach_pole(params, b, e)?, b));
                }
            }
            None => {
                if fa < 0.0 && fb > 0.0 {
                    brackets.push((a, b));
                }
            }
        }
    }
    if *values.last().unwrap() == 0.0 {
        exact.push(*grid.last().unwrap());
    }

    let mut roots: Vec<f64> = exact;
    for (a, b) in brackets {
        roots.push(polish_root(params, a, b)?);
    }
    roots.sort_by(f64::total_cmp);

    roots
        .into_iter()
        .map(|lambda| {
            let residual = params.beta_real(lambda)?.abs();
            let slope = params.beta_derivative(lambda)?;
            let norm = 1.0 / slope.sqrt();
            let mu_a = if params.coupling == 0.0 { 0.0 } else { norm * params.coupling / (lambda - params.e_a) };
            Ok(BoundState { lambda, norm, mu_a, mu_b: norm, residual })
        })
        .collect()
}

// Moves from `start` toward the pole at `e` until β changes sign, returning a
// point on the far side of the root from `start`.
fn approach_pole(params: &ModelParams, start: f64, e: f64) -> Result<f64> {
    let s0 = params.beta_real(start)?.signum();
    let mut delta = (start - e).abs() / 2.0;
    for _ in 0..80 {
        let x = if start < e { e - delta } else { e + delta };
        if x == e {
            break;
        }
        if params.beta_real(x)?.signum() != s0 {
            return Ok(x);
        }
        delta /= 2.0;
    }
    Err(ZenoError::RootSearch(format!(
        "could not separate a root from the pole at {e} (degenerate or near-double root)"
    )))
}

fn polish_root(params: &ModelParams, mut a: f64, mut b: f64) -> Result<f64> {
    let mut fa = params.beta_real(a)?;
    if fa == 0.0 {
        return Ok(a);
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = params.beta_real(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        let newton = x - fx / params.beta_derivative(x)?;
        let next = if newton > a.min(b) && newton < a.max(b) { newton } else { 0.5 * (a + b) };
        let step = (next - x).abs();
        x = next;
        if step <= 1e-3 * params.eps_tol * x.abs().max(1.0) || (b - a).abs() <= f64::EPSILON * x.abs() {
            return Ok(x);
        }
    }
    Err(ZenoError::RootSearch(format!("Newton/bisection did not converge in [{a}, {b}]")))
}

/// Weak-coupling pole estimates `E ∓ iπ|f(E)|²` for E = E_A and E = E_B.
pub fn pole_estimates(params: &ModelParams) -> Result<[PoleEstimate; 2]> {
    if !(params.e_a > 0.0 && params.e_b > 0.0) {
        return Err(ZenoError::Domain {
            op: "pole_estimates",
            value: params.e_a.min(params.e_b),
            reason: "pole estimates need E_A, E_B > 0",
        });
    }
    let width = |e: f64| {
        if e < params.omega_max {
            std::f64::consts::PI * params.coupling_density(e)
        } else {
            0.0
        }
    };
    Ok([
        PoleEstimate { center: params.e_a, width: width(params.e_a) },
        PoleEstimate { center: params.e_b, width: width(params.e_b) },
    ])
}

/// The discrete part of the spectrum of H: bound states below threshold,
/// plus the exact eigenstates that exist only when a coupling vanishes.
pub fn discrete_levels(params: &ModelParams) -> Result<Vec<DiscreteLevel>> {
    params.validate()?;
    let mut levels = Vec::new();
    if params.sigma == 0.0 {
        let mean = 0.5 * (params.e_a + params.e_b);
        let half = 0.5 * (params.e_b - params.e_a);
        if params.coupling == 0.0 {
            levels.push(DiscreteLevel { energy: params.e_a, mu_a: 1.0, mu_b: 0.0, kind: LevelKind::Embedded });
            levels.push(DiscreteLevel { energy: params.e_b, mu_a: 0.0, mu_b: 1.0, kind: LevelKind::Embedded });
        } else {
            let split = (half * half + params.coupling * params.coupling).sqrt();
            for energy in [mean - split, mean + split] {
                let det = energy - params.e_a;
                let norm = 1.0 / (1.0 + (params.coupling / det).powi(2)).sqrt();
                let kind = if energy < 0.0 { LevelKind::Bound } else { LevelKind::Embedded };
                levels.push(DiscreteLevel { energy, mu_a: norm * params.coupling / det, mu_b: norm, kind });
            }
        }
    } else {
        levels.extend(find_bound_states(params)?.into_iter().map(|s| DiscreteLevel {
            energy: s.lambda,
            mu_a: s.mu_a,
            mu_b: s.mu_b,
            kind: LevelKind::Bound,
        }));
        if params.coupling == 0.0 {
            levels.push(DiscreteLevel { energy: params.e_a, mu_a: 1.0, mu_b: 0.0, kind: LevelKind::DecoupledA });
        }
    }
    levels.sort_by(|x, y| x.energy.total_cmp(&y.energy));
    Ok(levels)
}

/// Interior energies where the continuum densities need panel breaks.
pub(crate) fn density_breakpoints(params: &ModelParams) -> Vec<f64> {
    let mut extra = vec![params.e_a, params.e_b];
    if let Ok(poles) = pole_estimates(params) {
        for p in poles {
            for k in [-3.0, -1.0, 1.0, 3.0] {
                extra.push(p.center + k * p.width);
            }
        }
    }
    let mut pts = params.breakpoints(&extra);
    if pts.len() > 1 && pts[1] > LAMBDA_MIN {
        pts[0] = LAMBDA_MIN;
    }
    pts
}

/// Continuum and discrete contributions to a completeness sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureParts {
    pub continuum: f64,
    pub discrete: f64,
}

impl ClosureParts {
    pub fn total(&self) -> f64 {
        self.continuum + self.discrete
    }
}

fn integrate_density<F: Fn(&Densities) -> f64>(params: &ModelParams, pick: F) -> Result<f64> {
    if params.sigma == 0.0 {
        return Ok(0.0);
    }
    let pts = density_breakpoints(params);
    let q = Adaptive { abs_tol: params.eps_tol, rel_tol: 1e-12, max_intervals: 20_000 };
    // The quadrature closure cannot return errors; NaN poisons the sum and is caught below.
    let r = q.integrate(|l| densities(params, l).map(|d| pick(&d)).unwrap_or(f64::NAN), &pts);
    if !r.value.is_finite() {
        return Err(ZenoError::NonFinite("continuum density integral"));
    }
    if !r.converged {
        return Err(ZenoError::Quadrature { op: "continuum density integral", error: r.error });
    }
    Ok(r.value)
}

/// ⟨X|X⟩ expanded in the physical basis, split into its two parts.
pub fn closure_parts(params: &ModelParams, which: BareState) -> Result<ClosureParts> {
    params.validate()?;
    let continuum = integrate_density(params, |d| d.of(which))?;
    let discrete = discrete_levels(params)?.iter().map(|l| l.weight(which)).sum();
    Ok(ClosureParts { continuum, discrete })
}

/// ⟨X|X⟩ = ∫|μ^X_λ|²dλ + Σ_j|μ^X(Λ_j)|², which completeness forces to 1.
/// Fails with the residual when it deviates by more than 100·eps_tol.
pub fn closure_sum(params: &ModelParams, which: BareState) -> Result<f64> {
    let total = closure_parts(params, which)?.total();
    let limit = 100.0 * params.eps_tol;
    if (total - 1.0).abs() > limit {
        return Err(ZenoError::Closure { which: format!("<{which}|{which}>"), residual: total - 1.0, limit });
    }
    Ok(total)
}

/// ⟨A|B⟩ = ∫μ^A*μ^B dλ + Σ_j μ_A(Λ_j)μ_B(Λ_j), which must vanish.
pub fn cross_sum_parts(params: &ModelParams) -> Result<ClosureParts> {
    params.validate()?;
    let continuum = integrate_density(params, |d| d.cross)?;
    let discrete = discrete_levels(params)?.iter().map(|l| l.mu_a * l.mu_b).sum();
    Ok(ClosureParts { continuum, discrete })
}

pub fn cross_sum(params: &ModelParams) -> Result<ComplexValue> {
    let total = cross_sum_parts(params)?.total();
    let limit = 100.0 * params.eps_tol;
    if total.abs() > limit {
        return Err(ZenoError::Closure { which: "<A|B>".into(), residual: total, limit });
    }
    // μ^A*μ^B is real for real Ω: μ^A = μ^B·Ω/(λ−E_A).
    Ok(ComplexValue::new(total, 0.0))
}
