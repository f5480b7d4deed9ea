//! β and the principal-value integral against a closed form obtained by
//! partial fractions of the rational coupling density.

use num_complex::Complex64 as C;
use zeno_core::ModelParams;

/// ∫₀^W |f(ω)|²/(z−ω) dω for complex z off [0, W], or the principal value
/// for real z in (0, W).
fn cauchy_integral(p: &ModelParams, z: C) -> C {
    let w_max = p.omega_max;
    let q = C::new(p.omega_0, p.mu);
    let qb = q.conj();
    let k = p.sigma.powi(2) * p.mu.powi(4);

    // ω/((ω−q)²(ω−q̄)²(z−ω)) = a/(z−ω) + Σ c1/(ω−r) + c2/(ω−r)²
    let a = z / ((z - q).powi(2) * (z - qb).powi(2));
    let log_term =
        if z.im == 0.0 { C::new((z.re.abs() / (z.re - w_max).abs()).ln(), 0.0) } else { z.ln() - (z - w_max).ln() };
    let mut total = a * log_term;
    for (r, other) in [(q, qb), (qb, q)] {
        let h = |w: C| w / ((w - other).powi(2) * (z - w));
        let c2 = h(r);
        let c1 = c2 * (1.0 / r - 2.0 / (r - other) + 1.0 / (z - r));
        let int1 = (C::new(w_max, 0.0) - r).ln() - (-r).ln();
        let int2 = -1.0 / (C::new(w_max, 0.0) - r) - 1.0 / r;
        total += c1 * int1 + c2 * int2;
    }
    total * k
}

fn beta_closed(p: &ModelParams, z: C) -> C {
    z - p.e_b - p.coupling.powi(2) / (z - p.e_a) - cauchy_integral(p, z)
}

#[test]
fn principal_value_matches_partial_fractions() {
    let p = ModelParams::paper();
    let lambdas = [1e-6, 0.01, 0.5, 1.0, 1.8, 2.0, 2.05, 2.1, 2.1 + 1e-7, 2.4, 3.0, 5.0, 9.0, 9.99];
    for &l in &lambdas {
        let numeric = p.pv_integral(l).unwrap();
        let exact = cauchy_integral(&p, C::new(l, 0.0)).re;
        assert!((numeric - exact).abs() < 1e-9, "lambda={l}: {numeric} vs {exact}");
    }
}

#[test]
fn beta_below_threshold_matches_partial_fractions() {
    let p = ModelParams { e_a: -1.0, e_b: -1.0, ..ModelParams::paper() };
    for &l in &[-40.0, -3.0, -1.2, -0.7, -0.1, -1e-4] {
        let numeric = p.beta_real(l).unwrap();
        let exact = beta_closed(&p, C::new(l, 0.0));
        assert!(exact.im.abs() < 1e-15);
        assert!((numeric - exact.re).abs() < 1e-10, "lambda={l}: {numeric} vs {}", exact.re);
    }
}

#[test]
fn beta_derivative_matches_finite_difference_of_closed_form() {
    let p = ModelParams { e_a: -1.0, e_b: -1.0, ..ModelParams::paper() };
    for &l in &[-2.0, -0.5, -0.05] {
        let h = 1e-5;
        let fd = (beta_closed(&p, C::new(l + h, 0.0)).re - beta_closed(&p, C::new(l - h, 0.0)).re) / (2.0 * h);
        let numeric = p.beta_derivative(l).unwrap();
        assert!(numeric >= 1.0);
        assert!((numeric - fd).abs() < 1e-7 * fd, "lambda={l}: {numeric} vs {fd}");
    }
}

#[test]
fn boundary_value_is_the_limit_from_above() {
    let p = ModelParams::paper();
    for &l in &[0.3, 1.95, 2.1, 2.6, 7.0] {
        // Richardson extrapolation of β(λ+iδ) in δ → 0⁺; the error is linear in δ.
        let d = 1e-4;
        let b1 = beta_closed(&p, C::new(l, d));
        let b2 = beta_closed(&p, C::new(l, 0.5 * d));
        let limit = 2.0 * b2 - b1;
        let plus = p.beta_plus(l).unwrap();
        assert!((plus - limit).norm() < 1e-6, "lambda={l}: {plus} vs {limit}");
        let minus = p.beta_minus(l).unwrap();
        let below = 2.0 * beta_closed(&p, C::new(l, -0.5 * d)) - beta_closed(&p, C::new(l, -d));
        assert!((minus - below).norm() < 1e-6);
    }
}

#[test]
fn pole_safe_form_agrees_away_from_the_pole() {
    let p = ModelParams::paper();
    for &l in &[1.0, 1.99, 2.01, 4.0] {
        let direct = p.beta_plus(l).unwrap() * (l - p.e_a);
        let safe = p.beta_plus_times_detuning(l).unwrap();
        assert!((direct - safe).norm() < 1e-12);
    }
    let at_pole = p.beta_plus_times_detuning(p.e_a).unwrap();
    assert!((at_pole.re + p.coupling.powi(2)).abs() < 1e-15);
}

#[test]
fn discretised_coupling_weight_converges() {
    let p = ModelParams::paper();
    let exact = p.continuum_weight();
    let mut previous = f64::INFINITY;
    for n in [250, 500, 1000, 2000] {
        let m = zeno_core::oracle::DiscretizedModel::build(&p, n, p.omega_max).unwrap();
        let sum: f64 = (2..m.dim()).map(|k| m.h[(1, k)].powi(2)).sum();
        let err = (sum - exact).abs();
        assert!(err < 5.0 / n as f64 * exact);
        assert!(err <= previous);
        previous = err;
    }
}
