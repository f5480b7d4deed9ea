//! Spectral solution against the dense discretised Hamiltonian.

use std::sync::OnceLock;

use zeno_core::evolution::{survival_curve, SpectralGrid};
use zeno_core::oracle::{matrix_survival, DiscretizedModel, EigenSolution};
use zeno_core::spectral::{closure_parts, density_a, density_b, find_bound_states};
use zeno_core::{BareState, ModelParams};

const N: usize = 4000;

fn paper_oracle() -> &'static EigenSolution {
    static CELL: OnceLock<EigenSolution> = OnceLock::new();
    CELL.get_or_init(|| {
        let p = ModelParams::paper();
        DiscretizedModel::build(&p, N, p.omega_max).unwrap().eigen().unwrap()
    })
}

fn stable() -> ModelParams {
    ModelParams { e_a: -1.0, e_b: -1.0, ..ModelParams::paper() }
}

fn stable_oracle() -> &'static EigenSolution {
    static CELL: OnceLock<EigenSolution> = OnceLock::new();
    CELL.get_or_init(|| {
        let p = stable();
        DiscretizedModel::build(&p, N, p.omega_max).unwrap().eigen().unwrap()
    })
}

#[test]
fn eigenvectors_are_orthonormal() {
    let sol = paper_oracle();
    assert!(sol.orthonormality_defect() <= 1e-10);
    assert!(sol.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    let sa: f64 = sol.weights_a.iter().sum();
    let sb: f64 = sol.weights_b.iter().sum();
    assert!((sa - 1.0).abs() < 1e-10 && (sb - 1.0).abs() < 1e-10);
}

#[test]
fn survival_agrees_on_fifty_time_units() {
    let p = ModelParams::paper();
    let times: Vec<f64> = (0..200).map(|k| 50.0 * k as f64 / 199.0).collect();
    for state in [BareState::A, BareState::B] {
        let analytic = survival_curve(&p, state, &times).unwrap();
        let matrix = matrix_survival(paper_oracle(), state, &times);
        let worst =
            analytic.probabilities.iter().zip(&matrix.probabilities).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-3, "{state}: {worst}");
    }
}

#[test]
fn paper_survival_at_long_time() {
    // Without bound states the survival still decays, but slowly: the A
    // level sits below the resonance and leaks through the Ω coupling.
    let p = ModelParams::paper();
    let analytic = survival_curve(&p, BareState::A, &[100.0]).unwrap().probabilities[0];
    let matrix = matrix_survival(paper_oracle(), BareState::A, &[100.0]).probabilities[0];
    assert!((analytic - matrix).abs() < 1e-3);
    assert!(analytic > 0.05 && analytic < 0.2);
}

#[test]
fn cumulative_density_matches_eigenvector_weights() {
    let p = ModelParams::paper();
    let sol = paper_oracle();
    let edges: Vec<f64> = (1..=80).map(|k| 1.0 + 0.025 * k as f64).collect();
    for (state, density) in
        [(BareState::A, density_a as fn(&ModelParams, f64) -> zeno_core::Result<f64>), (BareState::B, density_b)]
    {
        let q = zeno_core::quad::Adaptive::new(1e-12);
        let mut worst = 0.0f64;
        let mut lo = zeno_core::model::LAMBDA_MIN;
        let mut analytic = 0.0;
        for &hi in &edges {
            analytic += q.integrate(|l| density(&p, l).unwrap(), &[lo, p.e_a.clamp(lo, hi), hi]).value;
            lo = hi;
            let matrix = sol.cumulative_weight(state, hi);
            worst = worst.max((analytic - matrix).abs());
        }
        assert!(worst < 2e-3, "{state}: {worst}");
    }
}

#[test]
fn binned_density_tracks_the_continuum_density() {
    let p = ModelParams::paper();
    let sol = paper_oracle();
    // Bins of 0.05 hold 20 eigenvalues; compare well off the A peak.
    for (center, value) in sol.binned_density(BareState::B, 2.5, 4.0, 30) {
        let expect = density_b(&p, center).unwrap();
        assert!((value - expect).abs() < 0.05 * expect + 1e-3, "{center}: {value} vs {expect}");
    }
}

#[test]
fn stable_bound_state_weights() {
    let p = stable();
    let sol = stable_oracle();
    let bound = find_bound_states(&p).unwrap();
    assert_eq!(bound.len(), 2);
    let below: Vec<usize> = (0..sol.eigenvalues.len()).filter(|&j| sol.eigenvalues[j] < 0.0).collect();
    assert_eq!(below.len(), 2);
    for (state, j) in bound.iter().zip(&below) {
        assert!((state.lambda - sol.eigenvalues[*j]).abs() < 1e-4);
        assert!((state.mu_a.powi(2) - sol.weights_a[*j]).abs() < 1e-3);
        assert!((state.mu_b.powi(2) - sol.weights_b[*j]).abs() < 1e-3);
        assert!((state.norm.powi(2) - sol.weights_b[*j]).abs() < 1e-3);
    }
    // Without the bound terms the closure sum falls short by the oracle's bound weight.
    let parts = closure_parts(&p, BareState::A).unwrap();
    let oracle_bound: f64 = below.iter().map(|&j| sol.weights_a[j]).sum();
    assert!(parts.continuum < 1.0);
    assert!((1.0 - parts.continuum - oracle_bound).abs() < 1e-3);
    assert!((parts.total() - 1.0).abs() < 1e-6);
}

#[test]
fn stable_survival_agrees() {
    let p = stable();
    let times: Vec<f64> = (0..100).map(|k| 2.0 * k as f64).collect();
    let analytic = survival_curve(&p, BareState::A, &times).unwrap();
    let matrix = matrix_survival(stable_oracle(), BareState::A, &times);
    for (a, b) in analytic.probabilities.iter().zip(&matrix.probabilities) {
        assert!((a - b).abs() < 1e-3);
    }
}

#[test]
fn grid_doubling_changes_survival_below_tolerance() {
    let p = ModelParams::paper();
    for state in [BareState::A, BareState::B] {
        let grid = SpectralGrid::build(&p, state, 100.0).unwrap();
        let fine = grid.refined(&p, 2).unwrap();
        for k in 0..=200 {
            let t = 0.5 * k as f64;
            let d = (grid.probability(t).unwrap() - fine.probability(t).unwrap()).abs();
            assert!(d < 1e-6, "{state} t={t}: {d}");
        }
    }
}

#[test]
fn spectrum_converges_under_grid_doubling() {
    let p = ModelParams::paper();
    let coarse = paper_oracle();
    let fine = DiscretizedModel::build(&p, 2 * N, p.omega_max).unwrap().eigen().unwrap();
    for state in [BareState::A, BareState::B] {
        let d = coarse.cumulative_distance(&fine, state);
        assert!(d < 1e-3, "{state}: {d}");
    }
    let t = [10.0];
    let pa = matrix_survival(coarse, BareState::A, &t).probabilities[0];
    let pb = matrix_survival(&fine, BareState::A, &t).probabilities[0];
    assert!((pa - pb).abs() < 1e-4);
}
