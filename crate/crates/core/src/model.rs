//! Physical parameters, the form factor and the resolvent function β.
//!
//! The continuum is truncated at `omega_max`; every integral over the
//! continuum in this crate runs over `[0, omega_max]`. The boundary value
//! β⁺(λ) is assembled from a principal-value integral plus the exact
//! imaginary part `π|f(λ)|²`, so no small `iε` appears anywhere.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::quad::Adaptive;
use crate::ComplexValue;

/// Smallest energy accepted by the continuum (`λ > 0`) operations.
pub const LAMBDA_MIN: f64 = 1e-8;

/// Parameters of the two-level system coupled to a continuum, plus the
/// numerical controls shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    /// Bare energy of |A⟩.
    pub e_a: f64,
    /// Bare energy of |B⟩.
    pub e_b: f64,
    /// Real A↔B coupling Ω.
    pub coupling: f64,
    /// Form-factor strength σ.
    pub sigma: f64,
    /// Form-factor width μ.
    pub mu: f64,
    /// Form-factor peak ω₀.
    pub omega_0: f64,
    /// Continuum cutoff.
    pub omega_max: f64,
    /// Absolute tolerance for quadrature and root finding.
    pub eps_tol: f64,
    /// Maximum number of quadrature nodes a survival computation may use.
    pub node_budget: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::paper()
    }
}

impl ModelParams {
    /// The reference parameter set: E_A = 2.00, E_B = 2.10, ω₀ = 2.10,
    /// μ = 0.30, σ = 0.11, Ω = 0.04.
    pub fn paper() -> Self {
        ModelParams {
            e_a: 2.00,
            e_b: 2.10,
            coupling: 0.04,
            sigma: 0.11,
            mu: 0.30,
            omega_0: 2.10,
            omega_max: 10.0,
            eps_tol: 1e-9,
            node_budget: 400_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("e_a", self.e_a),
            ("e_b", self.e_b),
            ("coupling", self.coupling),
            ("sigma", self.sigma),
            ("mu", self.mu),
            ("omega_0", self.omega_0),
            ("omega_max", self.omega_max),
            ("eps_tol", self.eps_tol),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.mu <= 0.0 {
            return Err(invalid("mu", format!("must be > 0, got {}", self.mu)));
        }
        if self.sigma < 0.0 {
            return Err(invalid("sigma", format!("must be >= 0, got {}", self.sigma)));
        }
        if self.omega_0 <= 0.0 {
            return Err(invalid("omega_0", format!("must be > 0, got {}", self.omega_0)));
        }
        if self.coupling < 0.0 {
            return Err(invalid("coupling", format!("must be >= 0, got {}", self.coupling)));
        }
        let floor = self.omega_0 + 20.0 * self.mu;
        if self.omega_max <= floor {
            return Err(invalid("omega_max", format!("must exceed omega_0 + 20 mu = {floor}, got {}", self.omega_max)));
        }
        if self.eps_tol <= 0.0 {
            return Err(invalid("eps_tol", format!("must be > 0, got {}", self.eps_tol)));
        }
        if self.node_budget < 64 {
            return Err(invalid("node_budget", format!("must be >= 64, got {}", self.node_budget)));
        }
        Ok(())
    }

    /// f(ω) = σμ²√ω / ((ω−ω₀)² + μ²).
    pub fn form_factor(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(ZenoError::Domain { op: "form_factor", value: omega, reason: "omega must be >= 0" });
        }
        Ok(self.form_factor_unchecked(omega))
    }

    pub(crate) fn form_factor_unchecked(&self, omega: f64) -> f64 {
        let d = omega - self.omega_0;
        self.sigma * self.mu * self.mu * omega.sqrt() / (d * d + self.mu * self.mu)
    }

    /// |f(ω)|², a rational function of ω.
    pub fn coupling_density(&self, omega: f64) -> f64 {
        let mu2 = self.mu * self.mu;
        let d = omega - self.omega_0;
        let den = d * d + mu2;
        self.sigma * self.sigma * mu2 * mu2 * omega / (den * den)
    }

    /// d|f(ω)|²/dω.
    pub fn coupling_density_derivative(&self, omega: f64) -> f64 {
        let mu2 = self.mu * self.mu;
        let d = omega - self.omega_0;
        let den = d * d + mu2;
        let c = self.sigma * self.sigma * mu2 * mu2;
        c * (den - 4.0 * omega * d) / (den * den * den)
    }

    /// ∫₀^{ω_max} |f|² dω, the squared norm of the B–continuum coupling.
    pub fn continuum_weight(&self) -> f64 {
        let q = Adaptive::new(self.eps_tol * 1e-3);
        q.integrate(|w| self.coupling_density(w), &self.breakpoints(&[])).value
    }

    /// Analytic upper bound on ∫_{ω_max}^∞ |f|² dω, the coupling weight
    /// discarded by the cutoff.
    pub fn tail_weight_bound(&self) -> f64 {
        let u = self.omega_max - self.omega_0;
        let c = self.sigma * self.sigma * self.mu.powi(4);
        c * (1.0 / (2.0 * u * u) + self.omega_0 / (3.0 * u * u * u))
    }

    /// Sorted, deduplicated quadrature breakpoints on `[0, ω_max]`: the ends,
    /// the form-factor peak and any `extra` points inside the interval.
    pub(crate) fn breakpoints(&self, extra: &[f64]) -> Vec<f64> {
        let mut pts = vec![0.0, self.omega_max];
        pts.extend(
            std::iter::once(self.omega_0).chain(extra.iter().copied()).filter(|&x| x > 0.0 && x < self.omega_max),
        );
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Principal value P∫₀^{ω_max} |f(ω)|²/(λ−ω) dω for `0 < λ < ω_max`.
    ///
    /// Computed by singularity subtraction,
    /// `∫ (g(ω) − g(λ))/(λ−ω) dω + g(λ)·ln(λ/(ω_max−λ))`, whose integrand is
    /// regular at ω = λ.
    pub fn pv_integral(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= LAMBDA_MIN && lambda < self.omega_max) {
            return Err(ZenoError::Domain {
                op: "pv_integral",
                value: lambda,
                reason: "lambda must lie in [1e-8, omega_max)",
            });
        }
        let g_l = self.coupling_density(lambda);
        let dg_l = self.coupling_density_derivative(lambda);
        let integrand = |w: f64| {
            if w == lambda {
                -dg_l
            } else {
                (self.coupling_density(w) - g_l) / (lambda - w)
            }
        };
        let r = Adaptive::new(self.eps_tol).integrate(integrand, &self.breakpoints(&[lambda]));
        if !r.converged {
            return Err(ZenoError::Quadrature { op: "pv_integral", error: r.error });
        }
        Ok(r.value + g_l * (lambda / (self.omega_max - lambda)).ln())
    }

    /// β⁺(λ) = λ − E_B − Ω²/(λ−E_A) − PV(λ) + iπ|f(λ)|².
    pub fn beta_plus(&self, lambda: f64) -> Result<ComplexValue> {
        if lambda == self.e_a && self.coupling != 0.0 {
            return Err(ZenoError::Pole(lambda));
        }
        let pv = self.pv_integral(lambda)?;
        let pole = if self.coupling == 0.0 { 0.0 } else { self.coupling.powi(2) / (lambda - self.e_a) };
        Ok(ComplexValue::new(lambda - self.e_b - pole - pv, std::f64::consts::PI * self.coupling_density(lambda)))
    }

    /// β⁻(λ) = conj(β⁺(λ)).
    pub fn beta_minus(&self, lambda: f64) -> Result<ComplexValue> {
        self.beta_plus(lambda).map(|b| b.conj())
    }

    /// (λ−E_A)·β⁺(λ), finite everywhere on the continuum including λ = E_A.
    pub fn beta_plus_times_detuning(&self, lambda: f64) -> Result<ComplexValue> {
        let pv = self.pv_integral(lambda)?;
        let det = lambda - self.e_a;
        let inner = ComplexValue::new(lambda - self.e_b - pv, std::f64::consts::PI * self.coupling_density(lambda));
        Ok(inner * det - self.coupling * self.coupling)
    }

    /// β(λ) below threshold, where the continuum integral is regular.
    pub fn beta_real(&self, lambda: f64) -> Result<f64> {
        if !(lambda < 0.0) {
            return Err(ZenoError::Domain { op: "beta_real", value: lambda, reason: "lambda must be < 0" });
        }
        if lambda == self.e_a && self.coupling != 0.0 {
            return Err(ZenoError::Pole(lambda));
        }
        let integral = self.below_threshold_integral(lambda, 1)?;
        let pole = if self.coupling == 0.0 { 0.0 } else { self.coupling.powi(2) / (lambda - self.e_a) };
        Ok(lambda - self.e_b - pole + integral)
    }

    /// β′(λ) = 1 + Ω²/(λ−E_A)² + ∫|f|²/(λ−ω)² dω for λ < 0.
    pub fn beta_derivative(&self, lambda: f64) -> Result<f64> {
        if !(lambda < 0.0) {
            return Err(ZenoError::Domain { op: "beta_derivative", value: lambda, reason: "lambda must be < 0" });
        }
        if lambda == self.e_a && self.coupling != 0.0 {
            return Err(ZenoError::Pole(lambda));
        }
        let integral = self.below_threshold_integral(lambda, 2)?;
        let pole = if self.coupling == 0.0 { 0.0 } else { (self.coupling / (lambda - self.e_a)).powi(2) };
        Ok(1.0 + pole + integral)
    }

    // ∫₀^{ω_max} |f(ω)|² / (ω−λ)^power dω for λ < 0.
    fn below_threshold_integral(&self, lambda: f64, power: i32) -> Result<f64> {
        // Grade panels toward ω = 0 when the pole at λ sits close to the threshold.
        let mut extra = Vec::new();
        let mut x = -lambda;
        while x < 1.0 {
            extra.push(x);
            x *= 4.0;
        }
        let q = Adaptive::new(self.eps_tol * 1e-3);
        let r = q.integrate(|w| self.coupling_density(w) / (w - lambda).powi(power), &self.breakpoints(&extra));
        if !r.converged {
            return Err(ZenoError::Quadrature { op: "beta_real", error: r.error });
        }
        Ok(r.value)
    }
}

fn invalid(name: &'static str, reason: String) -> ZenoError {
    ZenoError::InvalidParams { name, reason }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn form_factor_values() {
        let p = ModelParams::paper();
        assert_eq!(p.form_factor(0.0).unwrap(), 0.0);
        let peak = p.form_factor(2.10).unwrap();
        assert!((peak - 0.11 * 2.10f64.sqrt()).abs() < 1e-15);
        // 0.11 · 0.09 · 1 / (1.21 + 0.09)
        let v = p.form_factor(1.0).unwrap();
        assert!((v - 0.0099 / 1.30).abs() < 1e-16, "{v}");
        assert!(p.form_factor(-1e-3).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = ModelParams::paper();
        for &w in &[0.3, 1.9, 2.1, 2.4, 7.0] {
            let h = 1e-5;
            let fd = (p.coupling_density(w + h) - p.coupling_density(w - h)) / (2.0 * h);
            assert!((fd - p.coupling_density_derivative(w)).abs() < 1e-9);
        }
    }

    #[test]
    fn validation_rejects_bad_params() {
        let bad = [
            ModelParams { mu: 0.0, ..ModelParams::paper() },
            ModelParams { sigma: -0.1, ..ModelParams::paper() },
            ModelParams { omega_max: 8.0, ..ModelParams::paper() },
            ModelParams { coupling: -0.04, ..ModelParams::paper() },
            ModelParams { e_a: f64::NAN, ..ModelParams::paper() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
        ModelParams::paper().validate().unwrap();
    }

    #[test]
    fn pv_far_below_support_is_negative() {
        let p = ModelParams::paper();
        let pv = p.pv_integral(1e-6).unwrap();
        let direct = Adaptive::new(1e-13).integrate(|w| p.coupling_density(w) / w, &[0.0, 2.1, 10.0]).value;
        assert!(pv < 0.0);
        assert!((pv + direct).abs() < 1e-7, "{pv} vs {}", -direct);
    }

    #[test]
    fn pv_domain_errors() {
        let p = ModelParams::paper();
        assert!(p.pv_integral(0.0).is_err());
        assert!(p.pv_integral(10.0).is_err());
        assert!(p.pv_integral(-1.0).is_err());
    }

    #[test]
    fn beta_plus_imaginary_part_and_conjugation() {
        let p = ModelParams::paper();
        for &l in &[0.5, 1.7, 2.05, 2.1, 3.3] {
            let b = p.beta_plus(l).unwrap();
            let f = p.form_factor(l).unwrap();
            assert!((b.im - PI * f * f).abs() <= 1e-15 * b.im.abs().max(1e-300));
            assert_eq!(p.beta_minus(l).unwrap(), b.conj());
        }
        assert!(matches!(p.beta_plus(p.e_a), Err(ZenoError::Pole(_))));
    }

    #[test]
    fn beta_real_limits() {
        let p = ModelParams::paper();
        let l = -1e6;
        assert!((p.beta_real(l).unwrap() / l - 1.0).abs() < 1e-5);
        assert!(p.beta_real(0.0).is_err());
        // Ω = 0: the coupling term drops.
        let q = ModelParams { coupling: 0.0, ..ModelParams::paper() };
        let l = -0.7;
        let integral = Adaptive::new(1e-14).integrate(|w| q.coupling_density(w) / (l - w), &[0.0, 2.1, 10.0]).value;
        assert!((q.beta_real(l).unwrap() - (l - q.e_b - integral)).abs() < 1e-12);
    }

    #[test]
    fn tail_bound_dominates_numerical_tail() {
        let p = ModelParams::paper();
        let tail = Adaptive::new(1e-16).integrate(|w| p.coupling_density(w), &[10.0, 100.0, 1e4, 1e6]).value;
        assert!(tail <= p.tail_weight_bound());
        assert!(p.tail_weight_bound() < 2.0 * tail);
    }
}
